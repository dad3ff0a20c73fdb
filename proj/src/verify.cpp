#include "padelab/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <thread>

#include "padelab/errors.hpp"
#include "padelab/hash.hpp"

namespace padelab {

namespace {

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

double log_abs(const BigComplex& z) { return log(abs(z)).to_double(); }

// log |Q(z)| for monic Q from its zeros.
double log_abs_monic(const ZeroMultiset& zeros, cplx z)
{
    double s = 0.0;
    for (const auto& r : zeros.roots)
        s += r.multiplicity * std::log(std::abs(z - r.location.to_complex()));
    return s;
}

std::optional<BigComplex> multiplier_denominator(const TestFunctionSpec& spec, const BigComplex& z)
{
    if (!spec.rational())
        return std::nullopt;
    std::vector<BigComplex> d;
    for (const auto& c : spec.rational()->denominator)
        d.push_back(c.at(z.precision()));
    return poly_eval(d, z);
}

std::optional<double> median(std::vector<double> v)
{
    if (v.empty())
        return std::nullopt;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<Doublet> doublets(const ZeroMultiset& qz, const PadePair& pair, double tol, const IntervalSystem* s)
{
    std::vector<Doublet> out;
    std::size_t hi = pair.p.size();
    while (hi > 0 && pair.p[hi - 1].is_zero())
        --hi;
    if (hi <= 1 || qz.roots.empty())
        return out;
    const ZeroMultiset pz = roots(std::span<const BigComplex>(pair.p).subspan(0, hi));
    auto off_cut = [&](cplx z) { return s == nullptr || s->distance(z) > tol; };
    for (const auto& pole : qz.roots) {
        const cplx pc = pole.location.to_complex();
        if (!off_cut(pc))
            continue;
        const Root* best = nullptr;
        double bd = std::numeric_limits<double>::infinity();
        for (const auto& zero : pz.roots) {
            const double d = abs(zero.location - pole.location).to_double();
            if (d < bd) {
                bd = d;
                best = &zero;
            }
        }
        if (best != nullptr && bd < tol && off_cut(best->location.to_complex()))
            out.push_back({best->location, pole.location, bd});
    }
    return out;
}

// Values of f on both sheets at a point, shared by all rows.
struct SheetValues {
    BigComplex z;
    std::optional<BigComplex> f0, f1, qm;
};

SheetValues sheet_values(const TestFunctionSpec& spec, cplx z, Precision prec)
{
    SheetValues v{BigComplex(z, prec), std::nullopt, std::nullopt, std::nullopt};
    v.qm = multiplier_denominator(spec, v.z);
    try {
        v.f0 = eval_branch(spec, v.z, Sheet::zero);
        v.f1 = eval_branch(spec, v.z, Sheet::one);
    } catch (const NumericalError&) {
        v.f1.reset();
    } catch (const DomainError&) {
        v.f1.reset();
    }
    return v;
}

} // namespace

DiscreteMeasure zero_measure(const ZeroMultiset& zeros)
{
    const int k = zeros.degree();
    if (k < 1)
        throw DomainError("zero measure of a constant polynomial");
    DiscreteMeasure mu;
    for (const auto& r : zeros.roots)
        mu.atoms.push_back({r.location.to_complex(), static_cast<double>(r.multiplicity) / k});
    return mu;
}

DiscreteMeasure zero_measure(const PadePair& pair)
{
    if (pair.k_n < 1)
        throw DomainError("zero measure needs k_n >= 1");
    return zero_measure(roots(pair.q));
}

std::vector<cplx> multiplier_poles(const TestFunctionSpec& spec)
{
    std::vector<cplx> out;
    if (!spec.rational())
        return out;
    std::vector<BigComplex> d;
    for (const auto& c : spec.rational()->denominator)
        d.push_back(c.at(256));
    if (d.size() < 2)
        return out;
    for (const auto& r : roots(d).roots)
        out.push_back(r.location.to_complex());
    return out;
}

std::string ProbeSet::label_of(cplx z)
{
    char buf[64];
    if (z.imag() == 0.0)
        std::snprintf(buf, sizeof buf, "%g", z.real());
    else
        std::snprintf(buf, sizeof buf, "%g%+gi", z.real(), z.imag());
    return buf;
}

ProbeSet::ProbeSet(std::vector<Probe> probes, const IntervalSystem& s, const std::vector<cplx>& poles)
    : probes_(std::move(probes))
{
    const double min_dist = 0.1 * s.diameter();
    for (auto& p : probes_) {
        if (p.label.empty())
            p.label = label_of(p.z);
        if (s.distance(p.z) < min_dist * (1.0 - 1e-12))
            throw DomainError("probe " + p.label + " is closer than 0.1 diam(S) to S");
        for (cplx pole : poles)
            if (std::abs(p.z - pole) < 1e-8 * std::max(1.0, std::abs(pole)))
                throw DomainError("probe " + p.label + " sits on a pole of the rational multiplier");
    }
}

ProbeSet ProbeSet::defaults(const IntervalSystem& s, const std::vector<cplx>& poles)
{
    const double c = s.center(), r = 0.5 * s.diameter();
    std::vector<Probe> p;
    for (cplx u : {cplx(2, 0), cplx(-3, 0), cplx(1, 1), cplx(0.2, 0.9)})
        p.push_back({c + r * u, ""});
    return ProbeSet(std::move(p), s, poles);
}

ProbeSet ProbeSet::unconstrained(std::vector<Probe> probes)
{
    ProbeSet ps;
    ps.probes_ = std::move(probes);
    for (auto& p : ps.probes_)
        if (p.label.empty())
            p.label = label_of(p.z);
    return ps;
}

Discrepancy weak_star_discrepancy(const DiscreteMeasure& mu, const EquilibriumData& eq, const ProbeSet& probes)
{
    Discrepancy d;
    for (const auto& p : probes.probes())
        d.pot_gap = std::max(d.pot_gap, std::abs(potential_of_measure(mu, p.z) - eq.potential(p.z)));

    std::vector<std::pair<double, double>> kept;
    double total = 0.0;
    for (const auto& a : mu.atoms) {
        if (eq.support().distance(a.location) > 0.1)
            d.discarded_mass += a.weight;
        else {
            kept.emplace_back(a.location.real(), a.weight);
            total += a.weight;
        }
    }
    std::sort(kept.begin(), kept.end());
    double ks = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < kept.size();) {
        const double x = kept[i].first;
        const double before = acc;
        while (i < kept.size() && kept[i].first == x)
            acc += kept[i++].second / total;
        const double f = eq.cdf(x);
        ks = std::max({ks, std::abs(before - f), std::abs(acc - f)});
    }
    if (kept.empty())
        ks = 1.0;
    d.cdf_gap = ks + d.discarded_mass;
    return d;
}

double mass_near(const DiscreteMeasure& mu, const IntervalSystem& s, double radius)
{
    double m = 0.0;
    for (const auto& a : mu.atoms)
        if (s.distance(a.location) <= radius)
            m += a.weight;
    return m / mu.total_mass();
}

std::vector<Doublet> froissart_scan(const PadePair& pair, double tol, const IntervalSystem* s)
{
    if (!(tol > 0.0))
        throw DomainError("froissart tolerance must be positive");
    if (pair.k_n < 1)
        return {};
    return doublets(roots(pair.q), pair, tol, s);
}

double identity_residual(const BigComplex& r0, const BigComplex& r1, const BigComplex& qz, const BigComplex& f0,
                         const BigComplex& f1)
{
    const BigComplex rhs = qz * (f0 - f1);
    BigReal scale = abs(r0);
    const BigReal b = abs(rhs);
    if (b > scale)
        scale = b;
    if (scale.is_zero())
        return 0.0;
    return (abs(r0 - r1 - rhs) / scale).to_double();
}

IdentityResult identity_check(const TestFunctionSpec& spec, const PadePair& pair, const std::vector<cplx>& points)
{
    IdentityResult res;
    res.min_modulus = std::numeric_limits<double>::infinity();
    for (cplx pt : points) {
        const SheetValues v = sheet_values(spec, pt, pair.precision);
        if (!v.f1) {
            ++res.skipped;
            continue;
        }
        const BigComplex qz = poly_eval(pair.q, v.z), pz = poly_eval(pair.p, v.z);
        const BigComplex r0 = qz * *v.f0 - pz, r1 = qz * *v.f1 - pz;
        res.max_residual = std::max(res.max_residual, identity_residual(r0, r1, qz, *v.f0, *v.f1));
        BigComplex diff = *v.f0 - *v.f1;
        if (v.qm)
            diff *= *v.qm;
        res.min_modulus = std::min(res.min_modulus, abs(diff).to_double());
    }
    if (res.skipped == static_cast<int>(points.size()))
        res.min_modulus = 0.0;
    return res;
}

const ReportRow* ConvergenceReport::row(int n) const
{
    for (const auto& r : rows)
        if (r.n == n)
            return &r;
    return nullptr;
}

std::string equilibrium_hash(const EquilibriumData& eq)
{
    std::string text;
    for (double a : eq.support().endpoints())
        text += fmt(a) + ",";
    text += ";K=" + std::to_string(eq.nodes_per_interval()) + ";gamma=" + fmt(eq.gamma()) + ";h=";
    for (double h : eq.h_coeffs())
        text += fmt(h) + ",";
    return stable_hash(text);
}

namespace {

struct RowContext {
    const TestFunctionSpec& spec;
    const EquilibriumData* eq;
    const ProbeSet& probes;
    const std::vector<double>& rhos;
    const RateOptions& opt;
    const std::vector<std::vector<SheetValues>>& curves; // per rho
    const std::vector<SheetValues>& probe_values;
};

ReportRow compute_row(const RowContext& ctx, const PadePair& pair)
{
    ReportRow row;
    row.n = pair.n;
    row.k_n = pair.k_n;
    row.unique = pair.unique;
    row.degree_ratio = pair.n > 0 ? static_cast<double>(pair.k_n) / pair.n : 1.0;
    const double n = std::max(1, pair.n);

    ZeroMultiset zeros;
    if (pair.k_n >= 1) {
        try {
            zeros = roots(pair.q);
        } catch (const RootFindingError& e) {
            zeros = e.partial();
        }
    }

    const EquilibriumData* eq = ctx.eq;
    if (eq != nullptr) {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& node : eq->nodes())
            best = std::max(best, log_abs_monic(zeros, cplx(node.x, 0.0)));
        row.sup_s_q = std::exp(best / n);
    }

    for (std::size_t ri = 0; ri < ctx.rhos.size(); ++ri) {
        RhoRow rr;
        rr.rho = ctx.rhos[ri];
        double lq = -std::numeric_limits<double>::infinity();
        double lm1 = -std::numeric_limits<double>::infinity();
        bool any1 = false;
        double identity = 0.0, min_mod = std::numeric_limits<double>::infinity();
        int skipped = 0;
        for (const auto& v : ctx.curves[ri]) {
            lq = std::max(lq, log_abs_monic(zeros, v.z.to_complex()));
            if (!v.f1) {
                ++skipped;
                continue;
            }
            const BigComplex qz = poly_eval(pair.q, v.z), pz = poly_eval(pair.p, v.z);
            const BigComplex r1 = qz * *v.f1 - pz;
            BigComplex m1 = v.qm ? r1 * *v.qm : r1;
            if (!m1.is_zero()) {
                lm1 = std::max(lm1, log_abs(m1));
                any1 = true;
            }
            if (ri == 0) {
                const BigComplex r0 = qz * *v.f0 - pz;
                identity = std::max(identity, identity_residual(r0, r1, qz, *v.f0, *v.f1));
                BigComplex diff = *v.f0 - *v.f1;
                if (v.qm)
                    diff *= *v.qm;
                min_mod = std::min(min_mod, abs(diff).to_double());
            }
        }
        rr.m_root_n = std::exp(lq / n);
        rr.m_root_kn = pair.k_n > 0 ? std::exp(lq / pair.k_n) : 1.0;
        if (any1)
            rr.m_n1 = std::exp(lm1 / n);
        const double cap = eq != nullptr ? eq->capacity() : 0.0;
        rr.lower_ok = rr.m_root_kn >= rr.rho * cap * (1.0 - ctx.opt.lower_slack);
        if (ri == 0) {
            if (skipped < static_cast<int>(ctx.curves[ri].size())) {
                row.identity_residual = identity;
                row.identity_min_modulus = min_mod;
            }
            row.identity_skipped = skipped;
        }
        row.rhos.push_back(rr);
    }

    for (std::size_t pi = 0; pi < ctx.probe_values.size(); ++pi) {
        const SheetValues& v = ctx.probe_values[pi];
        const Probe& probe = ctx.probes.probes()[pi];
        ProbeRow pr;
        pr.label = probe.label;
        const BigComplex qz = poly_eval(pair.q, v.z), pz = poly_eval(pair.p, v.z);
        const BigComplex r = qz * *v.f0 - pz;
        row.max_abs_error = std::max(row.max_abs_error, abs(r).to_double());
        bool near_pole = qz.is_zero();
        for (const auto& root : zeros.roots)
            if (std::abs(root.location.to_complex() - probe.z) < 1e-6)
                near_pole = true;
        pr.flagged = near_pole || r.is_zero();
        if (!pr.flagged && eq != nullptr) {
            const double g = green(*eq, probe.z);
            const double lr = log_abs(r) / n;
            const double le = log_abs(r / qz) / n;
            const double lqz = log_abs(qz) / n;
            pr.err_gap = std::abs(lr - (std::log(eq->capacity()) - g));
            pr.approx_gap = std::abs(le + 2.0 * g);
            pr.consistency = std::abs(le - lr + lqz);
        }
        row.probes.push_back(pr);
    }

    if (eq != nullptr && pair.k_n >= 1 && zeros.degree() == pair.k_n) {
        const DiscreteMeasure mu = zero_measure(zeros);
        try {
            const Discrepancy d = weak_star_discrepancy(mu, *eq, ctx.probes);
            row.pot_gap = d.pot_gap;
            row.cdf_gap = d.cdf_gap;
        } catch (const DomainError&) {
            // a zero sits on a probe; leave the columns empty
        }
        row.near_mass = mass_near(mu, eq->support(), ctx.opt.near_radius);
    }
    if (pair.k_n >= 1)
        row.froissart = static_cast<int>(
            doublets(zeros, pair, ctx.opt.froissart_tol, eq != nullptr ? &eq->support() : nullptr).size());
    return row;
}

} // namespace

ConvergenceReport rate_report(const TestFunctionSpec& spec, const EquilibriumData* eq, const std::vector<PadePair>& pairs,
                              const ProbeSet& probes, const std::vector<double>& rhos, const RateOptions& opt)
{
    ConvergenceReport rep;
    rep.spec_hash = spec.hash();
    rep.eq_hash = eq != nullptr ? equilibrium_hash(*eq) : std::string();
    rep.capacity = eq != nullptr ? eq->capacity() : 0.0;
    rep.rhos = rhos;
    rep.probes = probes.probes();
    if (pairs.empty())
        return rep;
    rep.precision = pairs.front().precision;
    for (const auto& p : pairs)
        rep.precision = std::min(rep.precision, p.precision);

    std::vector<std::vector<SheetValues>> curves;
    for (double rho : rhos) {
        std::vector<SheetValues> vals;
        if (eq != nullptr)
            for (cplx z : level_curve(*eq, rho, opt.curve_points).points)
                vals.push_back(sheet_values(spec, z, rep.precision));
        curves.push_back(std::move(vals));
    }
    std::vector<SheetValues> probe_values;
    for (const auto& p : probes.probes()) {
        SheetValues v{BigComplex(p.z, rep.precision), eval_branch(spec, BigComplex(p.z, rep.precision), Sheet::zero),
                      std::nullopt, std::nullopt};
        probe_values.push_back(std::move(v));
    }

    std::vector<const PadePair*> order;
    for (const auto& p : pairs)
        order.push_back(&p);
    std::stable_sort(order.begin(), order.end(), [](const PadePair* a, const PadePair* b) { return a->n < b->n; });

    const RowContext ctx{spec, eq, probes, rhos, opt, curves, probe_values};
    rep.rows.resize(order.size());
    std::vector<std::exception_ptr> errors(order.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < order.size();) {
            try {
                rep.rows[i] = compute_row(ctx, *order[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int workers = std::max(1, std::min<int>(opt.workers, static_cast<int>(order.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w)
        pool.emplace_back(work);
    work();
    for (auto& t : pool)
        t.join();
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i])
            continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            throw NumericalError("n = " + std::to_string(order[i]->n) + ": " + e.what());
        }
    }

    // Trailing-window medians.
    const int w = std::max(1, opt.window);
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const std::size_t lo = i + 1 >= static_cast<std::size_t>(w) ? i + 1 - static_cast<std::size_t>(w) : 0;
        auto collect = [&](auto get) {
            std::vector<double> v;
            for (std::size_t j = lo; j <= i; ++j)
                if (auto x = get(rep.rows[j]))
                    v.push_back(*x);
            return median(std::move(v));
        };
        auto& row = rep.rows[i];
        row.sup_s_q_med = collect([](const ReportRow& r) { return r.sup_s_q; });
        for (std::size_t k = 0; k < row.rhos.size(); ++k)
            row.rhos[k].m_root_n_med =
                collect([k](const ReportRow& r) { return std::optional<double>(r.rhos[k].m_root_n); }).value_or(0.0);
        for (std::size_t k = 0; k < row.probes.size(); ++k) {
            row.probes[k].err_gap_med = collect([k](const ReportRow& r) { return r.probes[k].err_gap; });
            row.probes[k].approx_gap_med = collect([k](const ReportRow& r) { return r.probes[k].approx_gap; });
        }
        if (row.identity_min_modulus && *row.identity_min_modulus < 1e-6)
            rep.warnings.push_back("n = " + std::to_string(row.n) + ": min |q_m (f0 - f1)| on the first level curve is " +
                                   fmt(*row.identity_min_modulus));
    }
    return rep;
}

std::vector<CheckResult> check_limit_laws(const ConvergenceReport& report, const LimitLawThresholds& t)
{
    std::vector<CheckResult> out;
    auto rows_in = [&](int lo, int hi) {
        std::vector<const ReportRow*> v;
        for (const auto& r : report.rows)
            if (r.n >= lo && r.n <= hi)
                v.push_back(&r);
        return v;
    };
    const double cap = report.capacity;

    if (t.degree) {
        CheckResult c{"degree", true, ""};
        int full = 0, worst = 0;
        for (const auto& r : report.rows) {
            full += r.k_n == r.n;
            worst = std::max(worst, r.n - r.k_n);
        }
        const double frac = report.rows.empty() ? 0.0 : static_cast<double>(full) / static_cast<double>(report.rows.size());
        c.passed = !report.rows.empty() && worst <= t.degree_deficit && frac >= t.degree_full_fraction;
        c.detail = "max n - k_n = " + std::to_string(worst) + ", fraction k_n = n: " + fmt(frac);
        out.push_back(c);
    }

    if (t.sup_s) {
        CheckResult c{"sup_S", true, ""};
        const auto late = rows_in(t.late_lo, t.late_hi), early = rows_in(t.early_lo, t.early_hi);
        double late_max = 0.0, early_min = std::numeric_limits<double>::infinity();
        bool ok = !late.empty() && !early.empty();
        for (const auto* r : late)
            if (r->sup_s_q_med)
                late_max = std::max(late_max, std::abs(*r->sup_s_q_med - cap));
            else
                ok = false;
        for (const auto* r : early)
            if (r->sup_s_q_med)
                early_min = std::min(early_min, std::abs(*r->sup_s_q_med - cap));
        c.passed = ok && late_max <= t.sup_s_tol && late_max < early_min;
        c.detail = "late gap " + fmt(late_max) + ", smallest early gap " + fmt(early_min);
        out.push_back(c);
    }

    if (t.rho) {
        for (std::size_t k = 0; k < report.rhos.size(); ++k) {
            const double rho = report.rhos[k];
            CheckResult c{"level_curve rho=" + fmt(rho), true, ""};
            const auto late = rows_in(t.late_lo, t.late_hi);
            double gap = 0.0, worst_ratio = std::numeric_limits<double>::infinity();
            for (const auto* r : late)
                gap = std::max(gap, std::abs(r->rhos[k].m_root_n_med - rho * cap));
            for (const auto& r : report.rows)
                if (r.n >= t.lower_from)
                    worst_ratio = std::min(worst_ratio, r.rhos[k].m_root_kn / (rho * cap));
            c.passed = !late.empty() && gap <= t.rho_tol && worst_ratio >= 1.0 - t.lower_slack;
            c.detail = "late gap " + fmt(gap) + ", min m_n^{1/k_n}/(rho cap) " + fmt(worst_ratio);
            out.push_back(c);
        }
    }

    if (t.gaps) {
        for (std::size_t k = 0; k < report.probes.size(); ++k) {
            const std::string& label = report.probes[k].label;
            if (!t.gap_probes.empty() && std::find(t.gap_probes.begin(), t.gap_probes.end(), label) == t.gap_probes.end())
                continue;
            CheckResult c{"rates z=" + label, true, ""};
            const auto late = rows_in(t.late_lo, t.late_hi);
            double ge = 0.0, ga = 0.0;
            bool ok = !late.empty();
            for (const auto* r : late) {
                const auto& p = r->probes[k];
                if (!p.err_gap_med || !p.approx_gap_med) {
                    ok = false;
                    continue;
                }
                ge = std::max(ge, *p.err_gap_med);
                ga = std::max(ga, *p.approx_gap_med);
            }
            c.passed = ok && ge <= t.gap_tol && ga <= t.gap_tol;
            c.detail = "err_gap " + fmt(ge) + ", approx_gap " + fmt(ga);
            out.push_back(c);
        }
    }

    if (t.zeros) {
        CheckResult c{"zero_distribution", true, ""};
        const ReportRow* fin = report.row(t.pot_final_n);
        const ReportRow* ref = report.row(t.pot_ref_n);
        const ReportRow* nr = report.row(t.near_n);
        if (fin == nullptr || ref == nullptr || nr == nullptr || !fin->pot_gap || !ref->pot_gap || !nr->near_mass) {
            c.passed = false;
            c.detail = "required rows missing";
        } else {
            c.passed = *fin->pot_gap <= t.pot_final_tol && *fin->pot_gap <= t.pot_ratio * *ref->pot_gap &&
                       *nr->near_mass >= t.near_fraction;
            c.detail = "pot gap n=" + std::to_string(t.pot_final_n) + ": " + fmt(*fin->pot_gap) + ", n=" +
                       std::to_string(t.pot_ref_n) + ": " + fmt(*ref->pot_gap) + ", near mass n=" +
                       std::to_string(t.near_n) + ": " + fmt(*nr->near_mass);
        }
        out.push_back(c);
    }
    return out;
}

std::string report_csv(const ConvergenceReport& report)
{
    std::string h = "n,k_n,unique,degree_ratio,max_abs_error,sup_s_q,sup_s_q_med";
    for (double rho : report.rhos) {
        const std::string s = "[rho=" + fmt(rho) + "]";
        h += ",m_root_n" + s + ",m_root_n_med" + s + ",m_root_kn" + s + ",M_n1" + s + ",lower_ok" + s;
    }
    for (const auto& p : report.probes) {
        const std::string s = "[z=" + p.label + "]";
        h += ",err_gap" + s + ",err_gap_med" + s + ",approx_gap" + s + ",approx_gap_med" + s + ",consistency" + s + ",flagged" + s;
    }
    h += ",pot_gap,cdf_gap,near_mass,froissart,identity_residual,identity_min_modulus,identity_skipped\n";

    std::string out = h;
    for (const auto& r : report.rows) {
        std::string line = std::to_string(r.n) + "," + std::to_string(r.k_n) + "," + (r.unique ? "1" : "0") + "," +
                           fmt(r.degree_ratio) + "," + fmt(r.max_abs_error) + "," + fmt(r.sup_s_q) + "," +
                           fmt(r.sup_s_q_med);
        for (const auto& q : r.rhos)
            line += "," + fmt(q.m_root_n) + "," + fmt(q.m_root_n_med) + "," + fmt(q.m_root_kn) + "," + fmt(q.m_n1) + "," +
                    (q.lower_ok ? "1" : "0");
        for (const auto& p : r.probes)
            line += "," + fmt(p.err_gap) + "," + fmt(p.err_gap_med) + "," + fmt(p.approx_gap) + "," + fmt(p.approx_gap_med) + "," +
                    fmt(p.consistency) + "," + (p.flagged ? "1" : "0");
        line += "," + fmt(r.pot_gap) + "," + fmt(r.cdf_gap) + "," + fmt(r.near_mass) + "," + std::to_string(r.froissart) +
                "," + fmt(r.identity_residual) + "," + fmt(r.identity_min_modulus) + "," +
                std::to_string(r.identity_skipped);
        out += line + "\n";
    }
    return out;
}

nlohmann::json report_json(const ConvergenceReport& report)
{
    using nlohmann::json;
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json j;
    j["spec_hash"] = report.spec_hash;
    j["eq_hash"] = report.eq_hash;
    j["precision_bits"] = report.precision;
    j["capacity"] = report.capacity;
    j["rhos"] = report.rhos;
    j["probes"] = json::array();
    for (const auto& p : report.probes)
        j["probes"].push_back({{"label", p.label}, {"re", p.z.real()}, {"im", p.z.imag()}});
    j["warnings"] = report.warnings;
    j["rows"] = json::array();
    for (const auto& r : report.rows) {
        json row{{"n", r.n},
                 {"k_n", r.k_n},
                 {"unique", r.unique},
                 {"degree_ratio", r.degree_ratio},
                 {"max_abs_error", r.max_abs_error},
                 {"sup_s_q", opt(r.sup_s_q)},
                 {"sup_s_q_med", opt(r.sup_s_q_med)},
                 {"pot_gap", opt(r.pot_gap)},
                 {"cdf_gap", opt(r.cdf_gap)},
                 {"near_mass", opt(r.near_mass)},
                 {"froissart", r.froissart},
                 {"identity_residual", opt(r.identity_residual)},
                 {"identity_min_modulus", opt(r.identity_min_modulus)},
                 {"identity_skipped", r.identity_skipped}};
        row["rhos"] = json::array();
        for (const auto& q : r.rhos)
            row["rhos"].push_back({{"rho", q.rho},
                                   {"m_root_n", q.m_root_n},
                                   {"m_root_n_med", q.m_root_n_med},
                                   {"m_root_kn", q.m_root_kn},
                                   {"M_n1", opt(q.m_n1)},
                                   {"lower_ok", q.lower_ok}});
        row["probes"] = json::array();
        for (const auto& p : r.probes)
            row["probes"].push_back({{"label", p.label},
                                     {"err_gap", opt(p.err_gap)},
                                     {"err_gap_med", opt(p.err_gap_med)},
                                     {"approx_gap", opt(p.approx_gap)},
                                     {"approx_gap_med", opt(p.approx_gap_med)},
                                     {"consistency", opt(p.consistency)},
                                     {"flagged", p.flagged}});
        j["rows"].push_back(std::move(row));
    }
    return j;
}

namespace {

std::string file_tag(const std::string& label)
{
    std::string s;
    for (char c : label) {
        if (c == '+')
            s += 'p';
        else if (c == '-')
            s += 'm';
        else
            s += c;
    }
    return s;
}

void write_series(const std::filesystem::path& file, const std::vector<std::pair<int, std::optional<double>>>& v)
{
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + file.string());
    for (const auto& [n, x] : v)
        if (x)
            out << n << ' ' << fmt(*x) << '\n';
}

} // namespace

void write_plot_data(const ConvergenceReport& report, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    auto series = [&](auto get) {
        std::vector<std::pair<int, std::optional<double>>> v;
        for (const auto& r : report.rows)
            v.emplace_back(r.n, get(r));
        return v;
    };
    using O = std::optional<double>;
    write_series(dir / "degree_ratio.dat", series([](const ReportRow& r) { return O(r.degree_ratio); }));
    write_series(dir / "max_abs_error.dat", series([](const ReportRow& r) { return O(r.max_abs_error); }));
    write_series(dir / "sup_s_q.dat", series([](const ReportRow& r) { return r.sup_s_q; }));
    write_series(dir / "pot_gap.dat", series([](const ReportRow& r) { return r.pot_gap; }));
    write_series(dir / "cdf_gap.dat", series([](const ReportRow& r) { return r.cdf_gap; }));
    write_series(dir / "near_mass.dat", series([](const ReportRow& r) { return r.near_mass; }));
    write_series(dir / "froissart.dat", series([](const ReportRow& r) { return O(r.froissart); }));
    write_series(dir / "identity_residual.dat", series([](const ReportRow& r) { return r.identity_residual; }));
    for (std::size_t k = 0; k < report.rhos.size(); ++k) {
        const std::string tag = file_tag(fmt(report.rhos[k]));
        write_series(dir / ("m_root_n_rho" + tag + ".dat"), series([k](const ReportRow& r) { return O(r.rhos[k].m_root_n); }));
        write_series(dir / ("M_n1_rho" + tag + ".dat"), series([k](const ReportRow& r) { return r.rhos[k].m_n1; }));
    }
    for (std::size_t k = 0; k < report.probes.size(); ++k) {
        const std::string tag = file_tag(report.probes[k].label);
        write_series(dir / ("err_gap_z" + tag + ".dat"), series([k](const ReportRow& r) { return r.probes[k].err_gap; }));
        write_series(dir / ("approx_gap_z" + tag + ".dat"), series([k](const ReportRow& r) { return r.probes[k].approx_gap; }));
    }
}

} // namespace padelab
