#include <cmath>
#include <numbers>

#include "doctest.h"
#include "padelab/errors.hpp"
#include "padelab/potential.hpp"

using namespace padelab;

namespace {

const IntervalSystem kUnit({-1.0, 1.0});
const IntervalSystem kTwo({-2.0, -1.0, 1.0, 2.0});

} // namespace

TEST_CASE("single interval equilibrium matches the arcsine law")
{
    const auto eq = solve_equilibrium(kUnit, 64);
    CHECK(eq.capacity() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(eq.gamma() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(eq.density(0.0) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));
    CHECK(eq.frostman_deviation() <= 1e-8);
    CHECK(eq.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
    const auto finer = solve_equilibrium(kUnit, 128);
    CHECK(std::abs(finer.capacity() - eq.capacity()) < 1e-12);
}

TEST_CASE("symmetric two-interval capacity")
{
    // cap(S)^2 = cap([1,4]) = 3/4 under z -> z^2.
    const auto eq = solve_equilibrium(kTwo, 128);
    CHECK(std::abs(eq.capacity() - std::sqrt(3.0) / 2.0) < 1e-10);
    CHECK(std::abs(eq.h_coeffs()[0]) < 1e-12);
    CHECK(eq.h_coeffs()[1] > 0.0);
    CHECK(eq.masses()[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(eq.frostman_deviation() <= 1e-8);
    const auto finer = solve_equilibrium(kTwo, 256);
    CHECK(std::abs(finer.capacity() - eq.capacity()) < 1e-12);
}

TEST_CASE("equilibrium rejects too few nodes")
{
    CHECK_THROWS_AS(solve_equilibrium(kUnit, 16), DomainError);
}

TEST_CASE("green function closed forms")
{
    const auto eq = solve_equilibrium(kUnit, 64);
    CHECK(green(eq, {2.0, 0.0}) == doctest::Approx(std::log(2.0 + std::sqrt(3.0))).epsilon(1e-12));
    CHECK(green(eq, {0.3, 0.0}) == 0.0);
    // g(z) = log|z| + gamma + o(1) at infinity.
    const double big = 1e6;
    CHECK(std::abs(green(eq, {big, 0.0}) - std::log(big) - eq.gamma()) < 1e-5);

    // The multi-interval path (no shortcut) on the same geometry.
    const auto two = solve_equilibrium(kTwo, 128);
    CHECK(std::abs(green(two, {0.0, 1e6}) - std::log(1e6) - two.gamma()) < 1e-5);
    CHECK(green(two, {1.5, 0.0}) == 0.0);
    // Oracle via z -> z^2: g_S(z) = g_{[1,4]}(z^2) / 2.
    const auto sq = solve_equilibrium(IntervalSystem({1.0, 4.0}), 64);
    for (cplx z : {cplx(0.0, 0.5), cplx(2.5, 0.3), cplx(-1.2, 0.1), cplx(0.0, 0.0)})
        CHECK(green(two, z) == doctest::Approx(0.5 * green(sq, z * z)).epsilon(1e-10));
}

TEST_CASE("green function is positive and harmonic off S")
{
    const auto eq = solve_equilibrium(IntervalSystem({-1.5, -0.5, 0.2, 0.6, 1.0, 2.0}), 128);
    CHECK(eq.frostman_deviation() <= 1e-8);
    for (cplx z : {cplx(0.0, 0.4), cplx(-0.2, 0.0), cplx(2.6, -0.5), cplx(-2.0, 1.0)}) {
        const double g = green(eq, z);
        CHECK(g > 0.0);
        double avg = 0.0;
        for (int k = 0; k < 64; ++k)
            avg += green(eq, z + std::polar(1e-3, 2.0 * std::numbers::pi * k / 64));
        CHECK(std::abs(avg / 64 - g) < 1e-6);
    }
}

TEST_CASE("capacity is monotone and scales affinely")
{
    const double c1 = solve_equilibrium(IntervalSystem({-1.0, -0.5, 0.5, 1.0}), 128).capacity();
    const double c2 = solve_equilibrium(IntervalSystem({-1.0, -0.3, 0.5, 1.0}), 128).capacity();
    const double c3 = solve_equilibrium(IntervalSystem({-1.0, 1.0}), 128).capacity();
    CHECK(c1 <= c2);
    CHECK(c2 <= c3);
    for (double t : {0.5, 1.0, 3.0})
        CHECK(solve_equilibrium(IntervalSystem({-t, t}), 64).capacity() == doctest::Approx(t / 2).epsilon(1e-12));
    const auto a = solve_equilibrium(IntervalSystem({-1.0, -0.5, 0.5, 1.0}), 128);
    const auto b = solve_equilibrium(IntervalSystem({-3.0, -1.5, 1.5, 3.0}), 128);
    CHECK(b.capacity() == doctest::Approx(3.0 * a.capacity()).epsilon(1e-10));
    CHECK(b.cdf(-2.0) == doctest::Approx(a.cdf(-2.0 / 3.0)).epsilon(1e-10));
}

TEST_CASE("level curves")
{
    const auto eq = solve_equilibrium(kUnit, 64);
    const auto curve = level_curve(eq, 2.0, 64);
    REQUIRE(curve.points.size() == 64);
    CHECK(curve.components == 1);
    double right = -1e9, top = -1e9;
    for (auto z : curve.points) {
        CHECK(std::abs(green(eq, z) - std::log(2.0)) <= 1e-8);
        right = std::max(right, z.real());
        top = std::max(top, z.imag());
    }
    // Bernstein ellipse with semi-axes 1.25 and 0.75.
    CHECK(right == doctest::Approx(1.25).epsilon(1e-9));
    CHECK(top == doctest::Approx(0.75).epsilon(1e-3));

    const auto two = solve_equilibrium(kTwo, 128);
    const auto small = level_curve(two, 1.01, 40);
    CHECK(small.components == 2);
    CHECK(small.points.size() == 40);
    for (std::size_t i = 0; i < small.points.size(); ++i) {
        CHECK(std::abs(green(two, small.points[i]) - std::log(1.01)) <= 1e-8);
        CHECK((small.points[i].real() > 0) == (small.component[i] == 1));
    }
    const auto big = level_curve(two, 3.0, 40);
    CHECK(big.components == 1);
    for (auto z : big.points)
        CHECK(std::abs(green(two, z) - std::log(3.0)) <= 1e-8);
    CHECK_THROWS_AS(level_curve(eq, 1.0, 10), DomainError);
}

TEST_CASE("potentials of discrete measures")
{
    DiscreteMeasure point{{{cplx(0.0, 0.0), 1.0}}};
    CHECK(potential_of_measure(point, {2.0, 0.0}) == doctest::Approx(-std::log(2.0)));
    CHECK_THROWS_AS(potential_of_measure(point, {0.0, 0.0}), DomainError);

    DiscreteMeasure pair{{{cplx(1.0, 0.0), 0.5}, {cplx(-1.0, 0.0), 0.5}}};
    CHECK(potential_of_measure(pair, {0.0, 1.0}) == doctest::Approx(-0.5 * std::log(2.0)).epsilon(1e-14));

    const auto eq = solve_equilibrium(kUnit, 256);
    const auto lam = quadrature_measure(eq);
    CHECK(lam.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    const double expect = std::log(2.0) - std::log(2.0 + std::sqrt(3.0));
    CHECK(potential_of_measure(lam, {2.0, 0.0}) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(eq.potential({2.0, 0.0}) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("energy oracle agrees with the analytic solver")
{
    const auto one = energy_oracle(kUnit, 2000);
    CHECK(std::abs(one.gamma_hat - std::log(2.0)) <= 1e-3);
    CHECK(one.measure.total_mass() == doctest::Approx(1.0).epsilon(1e-12));

    const auto two = energy_oracle(kTwo, 2000);
    CHECK(std::abs(std::exp(-two.gamma_hat) - std::sqrt(3.0) / 2.0) <= 2e-3);
    CHECK(std::abs(two.masses[0] - 0.5) <= 1e-3);

    const IntervalSystem three({-1.5, -0.5, 0.2, 0.6, 1.0, 2.0});
    const auto o3 = energy_oracle(three, 2000);
    CHECK(std::abs(o3.gamma_hat - solve_equilibrium(three, 128).gamma()) <= 5e-3);
    CHECK_THROWS_AS(energy_oracle(kUnit, 50), DomainError);
}
