#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "padelab/errors.hpp"
#include "padelab/verify.hpp"

using namespace padelab;

namespace {

constexpr Precision kP = 512;
using cd = std::complex<double>;

BigComplex num(double re, double im = 0.0) { return BigComplex(cd(re, im), kP); }

PadePair synthetic(std::vector<BigComplex> p, std::vector<BigComplex> q)
{
    PadePair pr;
    pr.n = static_cast<int>(std::max(p.size(), q.size())) - 1;
    pr.k_n = static_cast<int>(q.size()) - 1;
    pr.p = std::move(p);
    pr.q = std::move(q);
    pr.precision = kP;
    return pr;
}

} // namespace

TEST_CASE("zero counting measures")
{
    const auto mu = zero_measure(synthetic({num(1)}, {num(-1), num(0), num(1)}));
    REQUIRE(mu.atoms.size() == 2);
    CHECK(mu.atoms[0].location.real() == doctest::Approx(-1.0));
    CHECK(mu.atoms[0].weight == 0.5);
    CHECK(mu.atoms[1].weight == 0.5);

    const auto spec = rational_spec({{"1"}, {"-3", "1"}});
    const PadePair pr = pade_pair(germ_at_infinity(spec, 12, kP), 3);
    const auto one = zero_measure(pr);
    REQUIRE(one.atoms.size() == 1);
    CHECK(std::abs(one.atoms[0].location - cd(3, 0)) < 1e-100);
    CHECK(one.atoms[0].weight == 1.0);

    CHECK_THROWS_AS(zero_measure(synthetic({num(1)}, {num(1)})), DomainError);
}

TEST_CASE("weak-star discrepancy")
{
    const IntervalSystem s({-1.0, 1.0});
    const auto eq = solve_equilibrium(s, 1024);
    const auto probes = ProbeSet::defaults(s);
    const auto self = weak_star_discrepancy(quadrature_measure(eq), eq, probes);
    CHECK(self.pot_gap <= 1e-8);
    CHECK(self.cdf_gap <= 1e-3);
    CHECK(self.discarded_mass == 0.0);

    // Point mass at 10 against the arcsine law at z = 2.
    DiscreteMeasure far{{{cd(10, 0), 1.0}}};
    const ProbeSet at2({{cd(2, 0), "2"}}, s);
    const auto d = weak_star_discrepancy(far, eq, at2);
    const double expected = std::abs(-std::log(8.0) - (std::log(2.0) - std::log(2.0 + std::sqrt(3.0))));
    CHECK(d.pot_gap == doctest::Approx(expected).epsilon(1e-10));
    CHECK(d.pot_gap == doctest::Approx(1.4556).epsilon(1e-4));
    CHECK(d.discarded_mass == 1.0);
    CHECK(d.cdf_gap == 2.0);

    DiscreteMeasure half{{{cd(0, 0), 0.5}, {cd(0, 5), 0.5}}};
    CHECK(mass_near(half, s, 0.05) == 0.5);
}

TEST_CASE("probe sets")
{
    const IntervalSystem s({-2.0, -1.0, 1.0, 2.0});
    const auto d = ProbeSet::defaults(s);
    REQUIRE(d.probes().size() == 4);
    CHECK(d.probes()[0].z == cd(4, 0));
    CHECK(d.probes()[2].label == "2+2i");
    CHECK_THROWS_AS(ProbeSet({{cd(1.5, 0.2), ""}}, s), DomainError);
    CHECK_THROWS_AS(ProbeSet({{cd(5, 0), ""}}, s, {cd(5, 0)}), DomainError);
    CHECK(ProbeSet::label_of(cd(-3, 0)) == "-3");
    CHECK(ProbeSet::label_of(cd(0.2, -0.9)) == "0.2-0.9i");
}

TEST_CASE("Froissart doublets")
{
    const auto spec = rational_spec({{"1"}, {"-3", "1"}});
    const Germ g = germ_at_infinity(spec, 48, kP);
    for (int n = 1; n <= 20; ++n)
        CHECK(froissart_scan(pade_pair(g, n), 1e-6).empty());

    // Q = (z - 1)(z - w), P = (z - w - 1e-13) with w = 5 + 5i.
    const BigComplex w = num(5, 5), w2 = w + num(1e-13);
    const PadePair pr = synthetic({-w2, num(1)}, {w, -(w + num(1)), num(1)});
    const IntervalSystem s({-1.0, 1.0});
    const auto dbl = froissart_scan(pr, 1e-12, &s);
    REQUIRE(dbl.size() == 1);
    CHECK(std::abs(dbl[0].pole.to_complex() - cd(5, 5)) < 1e-12);
    CHECK(dbl[0].distance == doctest::Approx(1e-13).epsilon(1e-6));
    CHECK(froissart_scan(pr, 1e-14, &s).empty());
    CHECK_THROWS_AS(froissart_scan(pr, 0.0), DomainError);
}

TEST_CASE("two-sheet identity")
{
    const auto spec = algebraic_spec("2", "3");
    const PadePair pr = pade_pair(germ_at_infinity(spec, 48, kP), 20);
    const auto eq = solve_equilibrium(stahl_compact(spec));
    const auto pts = level_curve(eq, 1.2, 16).points;
    const auto res = identity_check(spec, pr, pts);
    CHECK(res.skipped == 0);
    CHECK(res.max_residual <= std::ldexp(1.0, -kP / 2 + 16));
    CHECK(res.min_modulus > 1e-6);

    // Negative control: a negated second-sheet value breaks the identity.
    const BigComplex z(pts[3], kP);
    const BigComplex f0 = eval_branch(spec, z, Sheet::zero), f1 = eval_branch(spec, z, Sheet::one);
    const BigComplex qz = poly_eval(pr.q, z), pz = poly_eval(pr.p, z);
    const BigComplex r0 = qz * f0 - pz, r1 = qz * f1 - pz;
    CHECK(identity_residual(r0, r1, qz, f0, f1) <= std::ldexp(1.0, -kP / 2 + 16));
    const double bad = identity_residual(r0, -r1, qz, f0, f1);
    const double scale = std::max(abs(r0).to_double(), abs(qz * (f0 - f1)).to_double());
    CHECK(bad == doctest::Approx(2.0 * abs(r1).to_double() / scale).epsilon(1e-6));
    CHECK(bad > 0.1);
}

TEST_CASE("rate report on a rational function")
{
    const auto spec = rational_spec({{"1"}, {"-3", "1"}});
    const Germ g = germ_at_infinity(spec, 28, kP);
    std::vector<PadePair> pairs;
    for (int n = 1; n <= 10; ++n)
        pairs.push_back(pade_pair(g, n));
    const auto probes = ProbeSet::unconstrained({{cd(2, 0), ""}, {cd(1, 1), ""}});
    const auto rep = rate_report(spec, nullptr, pairs, probes, {});
    REQUIRE(rep.rows.size() == 10);
    for (const auto& r : rep.rows) {
        CHECK(r.max_abs_error < 1e-100);
        CHECK(r.froissart == 0);
        CHECK_FALSE(r.sup_s_q);
    }
}

TEST_CASE("rate report structure and worker independence")
{
    const auto spec = algebraic_spec("2", "3");
    const Germ g = germ_at_infinity(spec, 40, kP);
    std::vector<PadePair> pairs;
    for (int n = 16; n >= 4; --n)
        pairs.push_back(pade_pair(g, n));
    const auto eq = solve_equilibrium(stahl_compact(spec));
    const auto probes = ProbeSet::defaults(eq.support());
    RateOptions one;
    one.curve_points = 32;
    RateOptions three = one;
    three.workers = 3;
    const auto a = rate_report(spec, &eq, pairs, probes, {1.5, 2.0}, one);
    const auto b = rate_report(spec, &eq, pairs, probes, {1.5, 2.0}, three);
    CHECK(report_csv(a) == report_csv(b));
    CHECK(report_json(a).dump() == report_json(b).dump());

    REQUIRE(a.rows.size() == 13);
    for (std::size_t i = 1; i < a.rows.size(); ++i)
        CHECK(a.rows[i].n > a.rows[i - 1].n);
    // Trailing median of five.
    std::vector<double> last;
    for (std::size_t i = a.rows.size() - 5; i < a.rows.size(); ++i)
        last.push_back(*a.rows[i].sup_s_q);
    std::sort(last.begin(), last.end());
    CHECK(*a.rows.back().sup_s_q_med == last[2]);
    for (const auto& r : a.rows) {
        CHECK(std::isfinite(*r.sup_s_q));
        CHECK(*r.identity_residual <= std::ldexp(1.0, -kP / 2 + 16));
        for (const auto& q : r.rhos) {
            CHECK(q.lower_ok);
            CHECK(q.m_n1.has_value());
        }
        for (const auto& p : r.probes)
            CHECK(*p.consistency < 1e-10);
    }
    const std::string csv = report_csv(a);
    CHECK(csv.rfind("n,k_n,unique,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 14);
}
