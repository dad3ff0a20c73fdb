#include <cmath>
#include <random>

#include "doctest.h"
#include "padelab/errors.hpp"
#include "padelab/testfn.hpp"

using namespace padelab;

namespace {

constexpr Precision kP = 256;
using cd = std::complex<double>;

BigComplex num(double re, double im = 0.0) { return BigComplex(cd(re, im), kP); }

const Segment kUnitSeg{"-1", "1"};

} // namespace

TEST_CASE("inverse Zhukovskii map")
{
    // (phi + 1/phi)/2 = 1.25 with |phi| > 1 gives phi = 2.
    CHECK(abs(inverse_zhukovskii(num(1.25), kUnitSeg, Sheet::zero) - num(2)).to_double() < 1e-70);
    CHECK(abs(inverse_zhukovskii(num(1.25), kUnitSeg, Sheet::one) - num(0.5)).to_double() < 1e-70);
    CHECK(abs(inverse_zhukovskii(num(1), kUnitSeg, Sheet::zero) - num(1)).to_double() < 1e-70);
    CHECK(abs(inverse_zhukovskii(num(1), kUnitSeg, Sheet::one) - num(1)).to_double() < 1e-70);
    CHECK_THROWS_AS(inverse_zhukovskii(num(0.3), kUnitSeg, Sheet::zero), DomainError);

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const Segment seg{"1/2", "5/2"};
    for (int i = 0; i < 50; ++i) {
        const BigComplex z = num(u(rng), u(rng));
        const BigComplex phi = inverse_zhukovskii(z, seg, Sheet::zero);
        const BigComplex inv = inverse_zhukovskii(z, seg, Sheet::one);
        CHECK(abs(phi * inv - num(1)).to_double() < std::ldexp(1.0, -kP + 8));
        CHECK(abs(phi).to_double() >= 1.0);
        // psi(z) = z - 3/2 for this segment.
        const BigComplex psi = z - num(1.5);
        CHECK(abs((phi + inv) * BigReal::parse("1/2", kP) - psi).to_double() < std::ldexp(1.0, -kP + 8));
    }
}

TEST_CASE("algebraic test function branches")
{
    const auto spec = algebraic_spec("2", "3");
    const auto far = eval_branch(spec, num(1e8), Sheet::zero);
    CHECK(std::abs(far.to_complex() - cd(std::sqrt(6.0), 0.0)) < 1e-7);

    // On the second sheet phi(1.25) = 2 = A: the branch point a = (A + 1/A)/2.
    CHECK(abs(eval_branch(spec, num(1.25), Sheet::one)).to_double() < 1e-60);

    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    int distinct = 0;
    for (int i = 0; i < 100; ++i) {
        const BigComplex z = num(u(rng), 0.05 + std::abs(u(rng)));
        const BigComplex f0 = eval_branch(spec, z, Sheet::zero);
        const BigComplex w = inverse_zhukovskii(z, kUnitSeg, Sheet::one);
        const BigComplex rel = (num(2) - w) * (num(3) - w);
        CHECK(abs(f0 * f0 - rel).to_double() < std::ldexp(1.0, -kP + 16));
        const BigComplex f1 = eval_branch(spec, z, Sheet::one);
        const BigComplex w1 = BigComplex(1.0, kP) / w;
        CHECK(abs(f1 * f1 - (num(2) - w1) * (num(3) - w1)).to_double() < std::ldexp(1.0, -kP + 24));
        if (abs(f0 - f1).to_double() > 1e-10)
            ++distinct;
    }
    CHECK(distinct > 0);
}

TEST_CASE("second-sheet values are continuous along level curves")
{
    const auto spec = algebraic_spec("2", "3");
    // phi = 1.5 e^{it}: a circle on the second sheet well inside |w| < A.
    cd prev;
    for (int k = 0; k <= 400; ++k) {
        const cd phi = std::polar(1.5, 2.0 * M_PI * k / 400 + 0.001);
        const cd z = 0.5 * (phi + 1.0 / phi);
        const cd f1 = eval_branch(spec, BigComplex(z, kP), Sheet::one).to_complex();
        // Closed form on the disk |w| < 2: principal square roots of (C - w)/C.
        const cd expect = std::sqrt(6.0) * std::sqrt(1.0 - phi / 2.0) * std::sqrt(1.0 - phi / 3.0);
        CHECK(std::abs(f1 - expect) < 1e-12);
        if (k > 0)
            CHECK(std::abs(f1 - prev) < 0.1);
        prev = f1;
    }
}

TEST_CASE("branch tracking past a branch point of the second sheet")
{
    // phi(z) = 2.5 e^{0.3i} lies beyond A = 2; the path from the midpoint
    // crossing passes above w = 2. Oracle: sign-continuous square root along
    // the same polygon, sampled finely.
    const auto spec = algebraic_spec("2", "3");
    const cd phi = std::polar(2.5, 0.3);
    const cd z = 0.5 * (phi + 1.0 / phi);
    const cd w0 = 1.0 / phi;
    const cd via = w0.imag() < 0 ? cd(0, -1) : cd(0, 1);
    auto f = [](cd w) { return (2.0 - w) * (3.0 - w); };
    cd cur = std::sqrt(6.0) * std::sqrt(1.0 - w0 / 2.0) * std::sqrt(1.0 - w0 / 3.0);
    const cd pts[3] = {w0, via, phi};
    for (int leg = 0; leg < 2; ++leg)
        for (int i = 1; i <= 20000; ++i) {
            const cd w = pts[leg] + (pts[leg + 1] - pts[leg]) * (i / 20000.0);
            cd r = std::sqrt(f(w));
            if (std::abs(r - cur) > std::abs(-r - cur))
                r = -r;
            cur = r;
        }
    const cd got = eval_branch(spec, BigComplex(z, kP), Sheet::one).to_complex();
    CHECK(std::abs(got - cur) < 1e-10);
}

TEST_CASE("germs at infinity")
{
    const Germ w = inverse_zhukovskii_germ(kUnitSeg, 12, kP);
    CHECK(abs(w[0]).to_double() < 1e-70);
    CHECK(abs(w[1] - num(0.5)).to_double() < 1e-70);
    CHECK(abs(w[2]).to_double() < 1e-70);
    CHECK(abs(w[3] - num(0.125)).to_double() < 1e-70);
    CHECK(abs(w[5] - num(0.0625)).to_double() < 1e-70);
    // 1/phi(10) = 10 - sqrt(99).
    const auto v = series_eval(inverse_zhukovskii_germ(kUnitSeg, 40, kP), num(10));
    CHECK(std::abs(v.value.to_complex().real() - (10.0 - std::sqrt(99.0))) < 1e-15);

    const auto spec = algebraic_spec("2", "3");
    const Germ g = germ_at_infinity(spec, 20, kP);
    CHECK(abs(g[0] - sqrt(num(6))).to_double() < 1e-70);
    CHECK_THROWS_AS(germ_at_infinity(spec, 1, kP), DomainError);

    std::vector<TestFunctionSpec> specs{
        spec,
        algebraic_spec("5/4", "7/3", {"1/2", "5/2"}),
        product_spec({{{"-2", "-1"}, {"2", "3"}}, {{"1", "2"}, {"3/2", "4"}}}),
        TestFunctionSpec({FactorSpec{kUnitSeg, {{"2", "1/3"}, {"-3", "1/3"}, {"2.5+1i", "1/3"}}}}),
        TestFunctionSpec({FactorSpec{kUnitSeg, {{"2", "0.5+0.25i"}, {"3", "0.5-0.25i"}}}}, RationalMultiplier{{"1"}, {"-3", "1"}}),
    };
    for (const auto& s : specs) {
        const Germ gs = germ_at_infinity(s, 120, kP);
        const BigComplex z = num(10);
        const auto sv = series_eval(gs, z);
        const double diff = abs(sv.value - eval_branch(s, z, Sheet::zero)).to_double();
        CHECK(diff <= sv.tail_bound + std::ldexp(1.0, -kP / 2));
        const BigComplex z2 = num(-4, 6);
        const auto sv2 = series_eval(gs, z2);
        CHECK(abs(sv2.value - eval_branch(s, z2, Sheet::zero)).to_double() <= sv2.tail_bound + std::ldexp(1.0, -kP / 2));
    }
}

TEST_CASE("Stahl compact of real segments")
{
    const auto one = stahl_compact(algebraic_spec("2", "3"));
    CHECK(one == IntervalSystem({-1.0, 1.0}));
    const auto two = stahl_compact(product_spec({{{"1", "2"}, {"2", "3"}}, {{"-2", "-1"}, {"2", "3"}}}));
    CHECK(two == IntervalSystem({-2.0, -1.0, 1.0, 2.0}));
    CHECK_THROWS_AS(product_spec({{{"0", "2"}, {"2", "3"}}, {{"1", "3"}, {"2", "3"}}}), DomainError);
    CHECK_THROWS_AS(algebraic_spec("2", "3", {"-1+1i", "1"}), UnsupportedError);
    CHECK_THROWS_AS(stahl_compact(rational_spec({{"1"}, {"-3", "1"}})), DomainError);
}

TEST_CASE("spec validation")
{
    CHECK_THROWS_AS(algebraic_spec("3", "2"), DomainError);
    CHECK_THROWS_AS(TestFunctionSpec({FactorSpec{kUnitSeg, {{"0.5", "1/2"}}}}), DomainError);
    // Denominator (z - 0.5) vanishes on the segment.
    CHECK_THROWS_AS(TestFunctionSpec({FactorSpec{kUnitSeg, {{"2", "1/2"}, {"3", "1/2"}}}}, RationalMultiplier{{"1"}, {"-0.5", "1"}}),
                    DomainError);
    CHECK_THROWS_AS(rational_spec({{"1", "1", "1"}, {"1", "1"}}), DomainError);
    CHECK(algebraic_spec("2", "3").hash() == algebraic_spec("2", "3").hash());
    CHECK(algebraic_spec("2", "3").hash() != algebraic_spec("2", "3.5").hash());
}

TEST_CASE("class validation and branch points")
{
    const auto rep = validate_class(algebraic_spec("2", "3"));
    CHECK(rep.in_f);
    CHECK_FALSE(rep.unsupported);

    const auto thirds = validate_class(TestFunctionSpec({FactorSpec{kUnitSeg, {{"2", "1/3"}, {"3", "1/3"}, {"4", "1/3"}}}}));
    CHECK_FALSE(thirds.in_f);
    CHECK(thirds.in_extension);

    const auto bad = validate_class(TestFunctionSpec({FactorSpec{kUnitSeg, {{"2", "1/3"}, {"3", "1/3"}}}}));
    CHECK(bad.unsupported);

    const auto bp = branch_points(algebraic_spec("2", "3"));
    REQUIRE(bp.size() == 4);
    CHECK(bp[0] == cd(-1, 0));
    CHECK(bp[1] == cd(1, 0));
    CHECK(bp[2].real() == doctest::Approx(1.25));
    CHECK(bp[3].real() == doctest::Approx(5.0 / 3.0));
}
