#include <random>

#include "doctest.h"
#include "padelab/bigseries.hpp"
#include "padelab/errors.hpp"

using namespace padelab;

namespace {

constexpr Precision kP = 256;

BigComplex num(double re, double im = 0.0) { return BigComplex(std::complex<double>(re, im), kP); }

Germ germ_of(std::initializer_list<double> cs, int order)
{
    std::vector<BigComplex> v(static_cast<std::size_t>(order) + 1, BigComplex(kP));
    std::size_t k = 0;
    for (double c : cs)
        v[k++] = num(c);
    return Germ(std::move(v));
}

Germ random_germ(std::mt19937& rng, int order)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<BigComplex> v;
    v.push_back(num(2.0 + u(rng), u(rng)));
    for (int k = 1; k <= order; ++k)
        v.push_back(num(u(rng), u(rng)));
    return Germ(std::move(v));
}

// Largest coefficient modulus of a - b.
double distance(const Germ& a, const Germ& b)
{
    double d = 0.0;
    for (int k = 0; k <= std::min(a.order(), b.order()); ++k)
        d = std::max(d, abs(a[k] - b[k]).to_double());
    return d;
}

// Oracle: 1/a by long division, independent of the power recurrence.
Germ long_division_inverse(const Germ& a)
{
    std::vector<BigComplex> b;
    const BigComplex inv = BigComplex(1.0, kP) / a[0];
    for (int k = 0; k <= a.order(); ++k) {
        BigComplex acc(k == 0 ? 1.0 : 0.0, kP);
        for (int j = 1; j <= k; ++j)
            acc -= a[j] * b[static_cast<std::size_t>(k - j)];
        b.push_back(acc * inv);
    }
    return Germ(std::move(b));
}

const double kTol = std::ldexp(1.0, -kP + 8);

} // namespace

TEST_CASE("series multiplication")
{
    const Germ a = germ_of({1, 1}, 6), b = germ_of({1, -1}, 6);
    const Germ p = series_mul(a, b);
    CHECK(distance(p, germ_of({1, 0, -1}, 6)) == 0.0);
    CHECK(distance(series_mul(Germ::constant(num(1), 6), a), a) == 0.0);

    std::vector<BigComplex> ones(21, num(1));
    const Germ geo(std::move(ones));
    const Germ t = series_mul(geo, germ_of({1, -1}, 20));
    CHECK(t.order() == 20);
    CHECK(distance(t, germ_of({1}, 20)) == 0.0);

    // Truncation to the shorter germ.
    CHECK(series_mul(germ_of({1, 2}, 3), germ_of({1, 2}, 8)).order() == 3);
    CHECK_THROWS_AS(series_mul(Germ::constant(BigComplex(1.0, 128), 3), a), DomainError);
    CHECK_THROWS_AS(Germ(std::vector<BigComplex>{}), DomainError);
}

TEST_CASE("complex powers of germs")
{
    const Germ a = germ_of({1, -1}, 24);
    const Germ inv = series_cpow(a, num(-1), num(1));
    CHECK(distance(inv, long_division_inverse(a)) <= kTol);
    for (int k = 0; k <= 24; ++k)
        CHECK(abs(inv[k] - num(1)).to_double() <= kTol);

    CHECK(distance(series_cpow(a, num(1), a[0]), a) <= kTol);

    // (1 - u)^{1/2} with u = z^{-2}: binomial coefficients binom(1/2, m) (-1)^m.
    const Germ b = germ_of({1, 0, -1}, 20);
    const BigComplex half(BigReal::parse("1/2", kP), BigReal(kP));
    const Germ r = series_cpow(b, half, num(1));
    BigReal binom(1L, kP);
    for (int m = 0; 2 * m <= 20; ++m) {
        BigReal expected = (m % 2 == 0) ? binom : -binom;
        CHECK(abs(r[2 * m] - BigComplex(expected)).to_double() <= kTol);
        CHECK(abs(r[2 * m + (2 * m < 20 ? 1 : 0)]).to_double() <= (2 * m < 20 ? kTol : 1e300));
        binom *= (BigReal::parse("1/2", kP) - BigReal(static_cast<long>(m), kP)) / BigReal(static_cast<long>(m + 1), kP);
    }
    CHECK(r[2].to_complex().real() == doctest::Approx(-0.5));
    CHECK(r[4].to_complex().real() == doctest::Approx(-0.125));

    CHECK_THROWS_AS(series_cpow(germ_of({0, 1}, 4), half, num(1)), DomainError);
}

TEST_CASE("square roots of germs")
{
    const Germ four = Germ::constant(num(4), 5);
    const Germ s = series_sqrt(four, num(-2));
    CHECK(distance(s, Germ::constant(num(-2), 5)) == 0.0);
    CHECK_THROWS_AS(series_sqrt(four, num(2.1)), DomainError);

    const Germ b = germ_of({1, 0, -1}, 16);
    const BigComplex half(BigReal::parse("1/2", kP), BigReal(kP));
    CHECK(distance(series_sqrt(b, num(1)), series_cpow(b, half, num(1))) == 0.0);

    std::mt19937 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const Germ a = random_germ(rng, 12);
        const Germ root = series_sqrt(a, sqrt(a[0]));
        const Germ sq = series_mul(root, root);
        CHECK(distance(sq, a) <= kTol * a.max_abs().to_double());
    }
}

TEST_CASE("germ ring and power laws on random germs")
{
    std::mt19937 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const Germ a = random_germ(rng, 10), b = random_germ(rng, 10), c = random_germ(rng, 10);
        CHECK(distance(series_mul(a, b), series_mul(b, a)) <= kTol * 16);
        CHECK(distance(series_mul(series_mul(a, b), c), series_mul(a, series_mul(b, c))) <= kTol * 256);
        CHECK(distance(series_mul(a, series_add(b, c)), series_add(series_mul(a, b), series_mul(a, c))) <= kTol * 64);

        const BigComplex alpha = num(0.3, -0.7);
        const Germ pa = series_cpow(a, alpha, pow(a[0], alpha));
        const Germ na = series_cpow(a, -alpha, pow(a[0], -alpha));
        CHECK(distance(series_mul(pa, na), Germ::constant(num(1), 10)) <= kTol * 1024);

        const Germ cube = series_cpow(a, num(3), pow(a[0], 3));
        CHECK(distance(cube, series_mul(a, series_mul(a, a))) <= kTol * 1024);
    }
}

TEST_CASE("raising precision barely moves coefficients")
{
    std::mt19937 rng(5);
    const Germ a = random_germ(rng, 12);
    const BigComplex alpha = num(0.25, 0.5);
    const Germ lo = series_cpow(a, alpha, pow(a[0], alpha));
    std::vector<BigComplex> up;
    for (const auto& c : a.coeffs())
        up.push_back(c.with_precision(2 * kP));
    const Germ hi = series_cpow(Germ(std::move(up)), alpha.with_precision(2 * kP), pow(a[0].with_precision(2 * kP), alpha.with_precision(2 * kP)));
    for (int k = 0; k <= 12; ++k) {
        const double scale = std::max(1.0, abs(hi[k]).to_double());
        CHECK(abs(hi[k].with_precision(kP) - lo[k]).to_double() <= kTol * scale);
    }
}

TEST_CASE("series evaluation")
{
    const Germ c = Germ::constant(num(3, 1), 4);
    const auto v = series_eval(c, num(7));
    CHECK(abs(v.value - num(3, 1)).to_double() == 0.0);
    CHECK(v.tail_bound == 0.0);

    const auto w = series_eval(germ_of({1, -1}, 1), num(2));
    CHECK(w.value.to_complex().real() == doctest::Approx(0.5));
    CHECK_THROWS_AS(series_eval(c, num(0)), DomainError);
}
