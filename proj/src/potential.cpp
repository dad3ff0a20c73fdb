#include "padelab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "padelab/errors.hpp"

namespace padelab {

namespace {

constexpr double kPi = std::numbers::pi;

// 1 / sqrt|prod (x - a_i)| over all endpoints except indices skip0, skip1.
double other_endpoint_weight(std::span<const double> ends, double x, std::size_t skip0, std::size_t skip1)
{
    double prod = 1.0;
    for (std::size_t i = 0; i < ends.size(); ++i)
        if (i != skip0 && i != skip1)
            prod *= std::abs(x - ends[i]);
    return 1.0 / std::sqrt(prod);
}

double chebyshev_node(int m, int k) { return (m + 0.5) * kPi / k; }

// Exact mean of log|x - y| over x in [a,b], y in [c,d].
double mean_log_distance(double a, double b, double c, double d)
{
    auto f = [](double u) { return u == 0.0 ? 0.0 : 0.5 * u * u * std::log(std::abs(u)) - 0.75 * u * u; };
    return (f(b - c) - f(a - c) - f(b - d) + f(a - d)) / ((b - a) * (d - c));
}

void project_to_simplex(std::vector<double>& v)
{
    std::vector<double> s = v;
    std::sort(s.begin(), s.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        cum += s[i];
        const double t = (cum - 1.0) / static_cast<double>(i + 1);
        if (s[i] - t > 0.0)
            theta = t;
    }
    for (auto& x : v)
        x = std::max(0.0, x - theta);
}

} // namespace

IntervalSystem::IntervalSystem(std::vector<double> endpoints) : endpoints_(std::move(endpoints))
{
    if (endpoints_.size() < 2 || endpoints_.size() % 2 != 0)
        throw DomainError("an interval system needs an even, positive number of endpoints");
    for (std::size_t i = 0; i < endpoints_.size(); ++i) {
        if (!std::isfinite(endpoints_[i]))
            throw DomainError("non-finite interval endpoint");
        if (i > 0 && !(endpoints_[i] > endpoints_[i - 1]))
            throw DomainError("interval endpoints must be strictly increasing");
    }
}

IntervalSystem IntervalSystem::from_intervals(std::vector<std::pair<double, double>> intervals)
{
    std::sort(intervals.begin(), intervals.end());
    std::vector<double> e;
    for (auto [a, b] : intervals) {
        e.push_back(a);
        e.push_back(b);
    }
    return IntervalSystem(std::move(e));
}

double IntervalSystem::distance(cplx z) const
{
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < count(); ++j) {
        const double x = std::clamp(z.real(), left(j), right(j));
        best = std::min(best, std::abs(z - cplx(x, 0.0)));
    }
    return best;
}

cplx zhukovskii_exterior(cplx zeta)
{
    const cplx s = std::sqrt(zeta - 1.0) * std::sqrt(zeta + 1.0);
    cplx phi = zeta + s;
    if (std::abs(phi) < 1.0)
        phi = zeta - s;
    return phi;
}

EquilibriumData solve_equilibrium(const IntervalSystem& s, int k)
{
    if (k < 32)
        throw DomainError("at least 32 quadrature nodes per interval are required");
    const int p = s.count();
    const auto ends = s.endpoints();
    const double center = s.center();
    const double half = 0.5 * s.diameter();
    auto tvar = [&](double x) { return (x - center) / half; };

    // Interval j carries sign (-1)^{p-1-j} of h (0-based j).
    auto interval_sign = [&](int j) { return ((p - 1 - j) % 2 == 0) ? 1.0 : -1.0; };

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);

    // Normalization row: sum_j sign_j (1/pi) int_{S_j} h / sqrt|w| = 1.
    for (int j = 0; j < p; ++j) {
        const double c = 0.5 * (s.left(j) + s.right(j)), r = 0.5 * (s.right(j) - s.left(j));
        for (int m = 0; m < k; ++m) {
            const double y = c + r * std::cos(chebyshev_node(m, k));
            const double w = other_endpoint_weight(ends, y, 2 * j, 2 * j + 1);
            double tp = 1.0;
            for (int q = 0; q < p; ++q, tp *= tvar(y))
                a(0, q) += interval_sign(j) * tp * w / k;
        }
    }
    rhs(0) = 1.0;
    // Gap rows: int_{gap} h / sqrt|w| = 0.
    for (int g = 0; g + 1 < p; ++g) {
        const double lo = s.right(g), hi = s.left(g + 1);
        const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
        for (int m = 0; m < k; ++m) {
            const double y = c + r * std::cos(chebyshev_node(m, k));
            const double w = other_endpoint_weight(ends, y, 2 * g + 1, 2 * g + 2);
            double tp = 1.0;
            for (int q = 0; q < p; ++q, tp *= tvar(y))
                a(g + 1, q) += tp * w / k;
        }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible())
        throw NumericalError("singular equilibrium system (degenerate interval geometry)");
    const Eigen::VectorXd hv = lu.solve(rhs);

    EquilibriumData eq(s);
    eq.k_ = k;
    eq.h_.assign(hv.data(), hv.data() + p);
    eq.cheb_.assign(static_cast<std::size_t>(p), std::vector<double>(static_cast<std::size_t>(k), 0.0));
    eq.masses_.assign(static_cast<std::size_t>(p), 0.0);

    double gmax = 0.0, gmin = 0.0;
    for (int j = 0; j < p; ++j) {
        const double c = 0.5 * (s.left(j) + s.right(j)), r = 0.5 * (s.right(j) - s.left(j));
        std::vector<double> gvals(static_cast<std::size_t>(k));
        for (int m = 0; m < k; ++m) {
            const double y = c + r * std::cos(chebyshev_node(m, k));
            const double gv = interval_sign(j) * eq.h(y) * other_endpoint_weight(ends, y, 2 * j, 2 * j + 1);
            gvals[static_cast<std::size_t>(m)] = gv;
            gmax = std::max(gmax, gv);
            gmin = std::min(gmin, gv);
            eq.nodes_.push_back({y, gv / k, j});
        }
        auto& coef = eq.cheb_[static_cast<std::size_t>(j)];
        for (int q = 0; q < k; ++q) {
            double acc = 0.0;
            for (int m = 0; m < k; ++m)
                acc += gvals[static_cast<std::size_t>(m)] * std::cos(q * chebyshev_node(m, k));
            coef[static_cast<std::size_t>(q)] = (q == 0 ? 1.0 : 2.0) * acc / k;
        }
        eq.masses_[static_cast<std::size_t>(j)] = coef[0];
    }
    if (gmin < -1e-10 * gmax)
        throw NumericalError("equilibrium density changes sign");

    // Frostman: V = gamma on S, so gamma is the lambda-average of V.
    double gamma = 0.0;
    std::vector<double> vnode;
    vnode.reserve(eq.nodes_.size());
    for (const auto& nd : eq.nodes_) {
        vnode.push_back(eq.potential(cplx(nd.x, 0.0)));
        gamma += nd.weight * vnode.back();
    }
    if (p == 1)
        gamma = -std::log(0.25 * s.diameter());
    double dev = 0.0;
    for (double v : vnode)
        dev = std::max(dev, std::abs(v - gamma));
    eq.gamma_ = gamma;
    eq.capacity_ = std::exp(-gamma);
    eq.frostman_dev_ = dev;
    return eq;
}

double EquilibriumData::h(double x) const
{
    const double t = (x - support_.center()) / (0.5 * support_.diameter());
    double acc = 0.0;
    for (std::size_t q = h_.size(); q-- > 0;)
        acc = acc * t + h_[q];
    return acc;
}

double EquilibriumData::density(double x) const
{
    const auto ends = support_.endpoints();
    for (int j = 0; j < support_.count(); ++j) {
        if (x > support_.left(j) && x < support_.right(j)) {
            double prod = 1.0;
            for (double e : ends)
                prod *= std::abs(x - e);
            return std::abs(h(x)) / (kPi * std::sqrt(prod));
        }
    }
    return 0.0;
}

double EquilibriumData::cdf(double x) const
{
    double acc = 0.0;
    for (int j = 0; j < support_.count(); ++j) {
        const auto& g = cheb_[static_cast<std::size_t>(j)];
        if (x >= support_.right(j)) {
            acc += masses_[static_cast<std::size_t>(j)];
            continue;
        }
        if (x <= support_.left(j))
            break;
        const double c = 0.5 * (support_.left(j) + support_.right(j));
        const double r = 0.5 * (support_.right(j) - support_.left(j));
        const double th = std::acos(std::clamp((x - c) / r, -1.0, 1.0));
        double part = g[0] * (kPi - th);
        for (std::size_t q = 1; q < g.size(); ++q)
            part -= g[q] * std::sin(static_cast<double>(q) * th) / static_cast<double>(q);
        acc += part / kPi;
    }
    return acc;
}

double EquilibriumData::potential(cplx z) const
{
    double v = 0.0;
    for (int j = 0; j < support_.count(); ++j) {
        const auto& g = cheb_[static_cast<std::size_t>(j)];
        const double c = 0.5 * (support_.left(j) + support_.right(j));
        const double r = 0.5 * (support_.right(j) - support_.left(j));
        const cplx phi = zhukovskii_exterior((z - c) / r);
        v -= g[0] * (std::log(r) + std::log(0.5 * std::abs(phi)));
        const cplx q = 1.0 / phi;
        cplx qk = 1.0;
        for (std::size_t k = 1; k < g.size(); ++k) {
            qk *= q;
            v += g[k] * qk.real() / static_cast<double>(k);
        }
    }
    return v;
}

double green(const EquilibriumData& eq, cplx z)
{
    const auto& s = eq.support();
    if (s.count() == 1) {
        const double c = s.center(), r = 0.5 * s.diameter();
        return std::max(0.0, std::log(std::abs(zhukovskii_exterior((z - c) / r))));
    }
    return std::max(0.0, eq.gamma() - eq.potential(z));
}

std::vector<std::pair<double, double>> gap_critical_points(const EquilibriumData& eq)
{
    const auto& s = eq.support();
    std::vector<std::pair<double, double>> out;
    for (int g = 0; g + 1 < s.count(); ++g) {
        double lo = s.right(g), hi = s.left(g + 1);
        double flo = eq.h(lo);
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = eq.h(mid);
            if ((fm < 0) == (flo < 0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        const double x = 0.5 * (lo + hi);
        out.emplace_back(x, green(eq, cplx(x, 0.0)));
    }
    return out;
}

namespace {

struct RayTracer {
    const EquilibriumData& eq;
    double level;
    cplx center;
    double reach;

    // First crossing of g = level along the ray center + t e^{i theta}.
    cplx solve(double theta) const
    {
        const cplx dir = std::polar(1.0, theta);
        constexpr int steps = 256;
        double t0 = 0.0;
        double t1 = reach / steps;
        while (green(eq, center + t1 * dir) <= level) {
            t0 = t1;
            t1 += reach / steps;
            if (t1 > 4.0 * reach)
                throw NumericalError("level curve ray did not cross the level");
        }
        for (int it = 0; it < 200 && t1 - t0 > 1e-15 * std::max(1.0, t1); ++it) {
            const double mid = 0.5 * (t0 + t1);
            if (green(eq, center + mid * dir) <= level)
                t0 = mid;
            else
                t1 = mid;
        }
        return center + 0.5 * (t0 + t1) * dir;
    }
};

} // namespace

LevelCurve level_curve(const EquilibriumData& eq, double rho, int points)
{
    if (!(rho > 1.0))
        throw DomainError("level curves need rho > 1");
    if (points < 1)
        throw DomainError("level curve needs at least one point");
    const auto& s = eq.support();
    const double level = std::log(rho);

    // Group intervals whose sublevel sets have merged.
    std::vector<std::pair<int, int>> groups;
    const auto crit = gap_critical_points(eq);
    int first = 0;
    for (int g = 0; g + 1 < s.count(); ++g) {
        if (crit[static_cast<std::size_t>(g)].second >= level) {
            groups.emplace_back(first, g);
            first = g + 1;
        }
    }
    groups.emplace_back(first, s.count() - 1);

    const double c0 = s.center(), r0 = 0.5 * s.diameter();
    const int samples = std::max(256, 4 * points);

    struct Loop {
        RayTracer tracer;
        std::vector<double> theta, arclen;
        double length;
    };
    std::vector<Loop> loops;
    double total = 0.0;
    for (auto [ga, gb] : groups) {
        const cplx center(0.5 * (s.left(ga) + s.right(gb)), 0.0);
        RayTracer tr{eq, level, center, std::abs(center - c0) + 1.01 * rho * r0};
        Loop loop{tr, {}, {}, 0.0};
        cplx prev, first_pt;
        for (int i = 0; i <= samples; ++i) {
            const double th = 2.0 * std::numbers::pi * i / samples;
            const cplx pt = i == samples ? first_pt : tr.solve(th);
            if (i == 0)
                first_pt = pt;
            else
                loop.length += std::abs(pt - prev);
            loop.theta.push_back(th);
            loop.arclen.push_back(loop.length);
            prev = pt;
        }
        total += loop.length;
        loops.push_back(std::move(loop));
    }

    // Split the point budget by arclength.
    std::vector<int> share(loops.size(), 0);
    int assigned = 0;
    for (std::size_t c = 0; c < loops.size(); ++c) {
        share[c] = std::max(1, static_cast<int>(std::lround(points * loops[c].length / total)));
        assigned += share[c];
    }
    while (assigned > points && *std::max_element(share.begin(), share.end()) > 1) {
        --*std::max_element(share.begin(), share.end());
        --assigned;
    }
    while (assigned < points) {
        ++*std::max_element(share.begin(), share.end());
        ++assigned;
    }

    LevelCurve out;
    out.rho = rho;
    out.components = static_cast<int>(loops.size());
    for (std::size_t c = 0; c < loops.size(); ++c) {
        const auto& loop = loops[c];
        for (int i = 0; i < share[c]; ++i) {
            const double target = loop.length * i / share[c];
            const auto it = std::upper_bound(loop.arclen.begin(), loop.arclen.end(), target);
            const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - loop.arclen.begin()), loop.arclen.size() - 1);
            const std::size_t lo = hi == 0 ? 0 : hi - 1;
            const double span = loop.arclen[hi] - loop.arclen[lo];
            const double frac = span > 0 ? (target - loop.arclen[lo]) / span : 0.0;
            const double th = loop.theta[lo] + frac * (loop.theta[hi] - loop.theta[lo]);
            out.points.push_back(loop.tracer.solve(th));
            out.component.push_back(static_cast<int>(c));
        }
    }
    return out;
}

double DiscreteMeasure::total_mass() const
{
    double m = 0.0;
    for (const auto& a : atoms)
        m += a.weight;
    return m;
}

double potential_of_measure(const DiscreteMeasure& mu, cplx z)
{
    const double tol = std::ldexp(std::max(1.0, std::abs(z)), -26);
    double u = 0.0;
    for (const auto& a : mu.atoms) {
        const double d = std::abs(z - a.location);
        if (d <= tol)
            throw DomainError("potential evaluated on an atom of the measure");
        u -= a.weight * std::log(d);
    }
    return u;
}

DiscreteMeasure quadrature_measure(const EquilibriumData& eq)
{
    DiscreteMeasure mu;
    for (const auto& n : eq.nodes())
        mu.atoms.push_back({cplx(n.x, 0.0), n.weight});
    return mu;
}

OracleResult energy_oracle(const IntervalSystem& s, int grid_points, int max_iterations)
{
    if (grid_points < 100)
        throw DomainError("energy oracle needs at least 100 grid points");
    const int p = s.count();
    const double scale = s.diameter();
    const double c0 = s.center();

    // Arcsine-spaced cells per interval, in coordinates scaled to unit diameter.
    std::vector<double> lo, hi, mid;
    std::vector<int> owner;
    for (int j = 0; j < p; ++j) {
        const int mj = grid_points / p + (j < grid_points % p ? 1 : 0);
        const double c = (0.5 * (s.left(j) + s.right(j)) - c0) / scale;
        const double r = 0.5 * (s.right(j) - s.left(j)) / scale;
        for (int m = 0; m < mj; ++m) {
            const double a = c - r * std::cos(kPi * m / mj);
            const double b = c - r * std::cos(kPi * (m + 1) / mj);
            lo.push_back(a);
            hi.push_back(b);
            mid.push_back(0.5 * (a + b));
            owner.push_back(j);
        }
    }
    const std::size_t n = mid.size();
    Eigen::MatrixXd kern(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double di = hi[i] - lo[i];
        for (std::size_t j = i; j < n; ++j) {
            const double dj = hi[j] - lo[j];
            const double d = std::abs(mid[i] - mid[j]);
            double v;
            if (d > 4.0 * (di + dj))
                v = -std::log(d) + (di * di + dj * dj) / (24.0 * d * d);
            else
                v = -mean_log_distance(lo[i], hi[i], lo[j], hi[j]);
            kern(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            kern(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    }

    // Largest eigenvalue by power iteration for the step size.
    Eigen::VectorXd v = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / std::sqrt(static_cast<double>(n)));
    double lmax = 0.0;
    for (int it = 0; it < 100; ++it) {
        Eigen::VectorXd kv = kern * v;
        const double nv = kv.norm();
        if (std::abs(nv - lmax) <= 1e-10 * nv) {
            lmax = nv;
            break;
        }
        lmax = nv;
        v = kv / nv;
    }
    const double step = 1.0 / (2.0 * lmax);

    std::vector<double> w(n, 1.0 / static_cast<double>(n)), y = w, wprev = w;
    auto energy_of = [&](const std::vector<double>& x) {
        const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(n));
        return xv.dot(kern * xv);
    };
    double t = 1.0;
    double energy = energy_of(w);
    OracleResult res;
    for (int it = 1; it <= max_iterations; ++it) {
        const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(n));
        const Eigen::VectorXd grad = 2.0 * (kern * yv);
        std::vector<double> next(n);
        for (std::size_t i = 0; i < n; ++i)
            next[i] = y[i] - step * grad(static_cast<Eigen::Index>(i));
        project_to_simplex(next);
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        wprev = w;
        w = std::move(next);
        for (std::size_t i = 0; i < n; ++i)
            y[i] = w[i] + ((t - 1.0) / tn) * (w[i] - wprev[i]);
        t = tn;
        res.iterations = it;
        if (it % 20 == 0) {
            const double e = energy_of(w);
            if (e > energy) {
                // Momentum overshoot: restart from the current iterate.
                y = w;
                t = 1.0;
            }
            if (std::abs(e - energy) <= 1e-13 * std::max(1.0, std::abs(e))) {
                energy = e;
                res.converged = true;
                break;
            }
            energy = e;
        }
    }
    energy = energy_of(w);
    res.gamma_hat = energy - std::log(scale);
    res.masses.assign(static_cast<std::size_t>(p), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        res.measure.atoms.push_back({cplx(c0 + scale * mid[i], 0.0), w[i]});
        res.masses[static_cast<std::size_t>(owner[i])] += w[i];
    }
    return res;
}

} // namespace padelab
