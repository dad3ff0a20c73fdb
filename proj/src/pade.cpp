#include "padelab/pade.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <numbers>

namespace padelab {

namespace {

using cd = std::complex<double>;

BigReal tolerance_scale(Precision p, const BigReal& scale)
{
    return ldexp(scale, -p / 2);
}

BigReal max_abs(std::span<const BigComplex> v, Precision p)
{
    BigReal m(p);
    for (const auto& c : v) {
        BigReal a = abs(c);
        if (a > m)
            m = std::move(a);
    }
    return m;
}

// Coefficient of z^{-m} (m may be negative) in Q f.
BigComplex product_coeff(const Germ& g, std::span<const BigComplex> q, int m)
{
    BigComplex s(g.precision());
    for (int j = 0; j < static_cast<int>(q.size()); ++j) {
        const int k = m + j;
        if (k >= 0 && k <= g.order())
            mul_add(s, q[static_cast<std::size_t>(j)], g[k]);
    }
    return s;
}

} // namespace

PadePair pade_pair(const Germ& germ, int n)
{
    if (n < 0)
        throw DomainError("Padé order must be nonnegative");
    if (germ.order() < 2 * n)
        throw DomainError("insufficient coefficients: germ order " + std::to_string(germ.order()) + " < 2n = " +
                          std::to_string(2 * n));
    const Precision prec = germ.precision();
    if (max_abs(germ.coeffs(), prec).is_zero())
        throw DomainError("numerically zero germ");
    BigReal cnorm = max_abs(germ.coeffs().subspan(0, static_cast<std::size_t>(2 * n + 1)), prec);
    if (cnorm.is_zero())
        cnorm = BigReal(1L, prec);
    const BigReal tol = tolerance_scale(prec, cnorm);

    // Row-echelon reduction of H (n x (n+1)), one column at a time.
    std::vector<std::vector<BigComplex>> h(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= n; ++j)
            h[static_cast<std::size_t>(i)].push_back(germ[i + 1 + j]);

    int rank = 0;
    int first_free = -1;
    for (int j = 0; j <= n; ++j) {
        int best = -1;
        BigReal best_abs(prec);
        for (int i = rank; i < n; ++i) {
            BigReal a = abs(h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
            if (best < 0 || a > best_abs) {
                best = i;
                best_abs = std::move(a);
            }
        }
        if (best < 0 || best_abs <= tol) {
            if (first_free < 0)
                first_free = j;
            continue;
        }
        std::swap(h[static_cast<std::size_t>(rank)], h[static_cast<std::size_t>(best)]);
        const auto& prow = h[static_cast<std::size_t>(rank)];
        const BigComplex inv = BigComplex(1.0, prec) / prow[static_cast<std::size_t>(j)];
        for (int i = rank + 1; i < n; ++i) {
            auto& row = h[static_cast<std::size_t>(i)];
            if (row[static_cast<std::size_t>(j)].is_zero())
                continue;
            const BigComplex f = row[static_cast<std::size_t>(j)] * inv;
            row[static_cast<std::size_t>(j)] = BigComplex(prec);
            for (int l = j + 1; l <= n; ++l)
                row[static_cast<std::size_t>(l)] -= f * prow[static_cast<std::size_t>(l)];
        }
        ++rank;
    }
    if (first_free < 0)
        first_free = n; // unreachable: n rows cannot pivot n + 1 columns

    // Columns 0..k-1 pivoted on rows 0..k-1; back-substitute with q_k = 1.
    const int k = first_free;
    std::vector<BigComplex> q(static_cast<std::size_t>(k) + 1, BigComplex(prec));
    q[static_cast<std::size_t>(k)] = BigComplex(1.0, prec);
    for (int j = k - 1; j >= 0; --j) {
        const auto& row = h[static_cast<std::size_t>(j)];
        BigComplex s(prec);
        for (int l = j + 1; l <= k; ++l)
            mul_add(s, row[static_cast<std::size_t>(l)], q[static_cast<std::size_t>(l)]);
        q[static_cast<std::size_t>(j)] = -(s / row[static_cast<std::size_t>(j)]);
    }

    PadePair pair;
    pair.n = n;
    pair.k_n = k;
    pair.unique = rank == n;
    pair.precision = prec;
    pair.germ_hash = germ_hash(germ);
    for (int t = 0; t <= n; ++t)
        pair.p.push_back(product_coeff(germ, q, -t));
    pair.q = std::move(q);

    if (residual_order(germ, pair) < n + 1)
        throw NumericalError("Hankel rank test inconclusive at " + std::to_string(prec) + " bits (n = " +
                             std::to_string(n) + ")");
    return pair;
}

PadePair pade_pair_escalating(const GermSource& source, int n, Precision start, int max_escalations)
{
    Precision prec = start;
    std::string last;
    for (int attempt = 0; attempt <= max_escalations; ++attempt, prec *= 2) {
        try {
            return pade_pair(source(prec), n);
        } catch (const NumericalError& e) {
            last = e.what();
        }
    }
    throw NumericalError("precision exhausted after " + std::to_string(max_escalations) + " escalations: " + last);
}

int residual_order(const Germ& germ, const PadePair& pair)
{
    const Precision prec = std::min(germ.precision(), pair.precision);
    BigReal scale = max_abs(germ.coeffs(), prec);
    const BigReal qn = max_abs(pair.q, prec);
    if (qn > 1.0)
        scale *= qn;
    const BigReal tol = tolerance_scale(prec, scale);

    for (int t = static_cast<int>(pair.p.size()) - 1; t >= 0; --t) {
        BigComplex c = product_coeff(germ, pair.q, -t) - pair.p[static_cast<std::size_t>(t)];
        if (abs(c) > tol)
            return 0;
    }
    const int last = germ.order() - (static_cast<int>(pair.q.size()) - 1);
    for (int m = 1; m <= last; ++m)
        if (abs(product_coeff(germ, pair.q, m)) > tol)
            return m;
    return kFullTail;
}

BigComplex poly_eval(std::span<const BigComplex> coeffs, const BigComplex& z)
{
    BigComplex s(z.precision());
    for (std::size_t i = coeffs.size(); i-- > 0;) {
        s *= z;
        s += coeffs[i];
    }
    return s;
}

BigComplex approximant(const PadePair& pair, const BigComplex& z)
{
    const BigComplex qz = poly_eval(pair.q, z);
    if (qz.is_zero())
        throw DomainError("evaluation at a pole of the approximant");
    return poly_eval(pair.p, z) / qz;
}

BigComplex error_at(const PadePair& pair, const TestFunctionSpec& spec, const BigComplex& z, Sheet sheet)
{
    return poly_eval(pair.q, z) * eval_branch(spec, z, sheet) - poly_eval(pair.p, z);
}

int ZeroMultiset::degree() const
{
    int d = 0;
    for (const auto& r : roots)
        d += r.multiplicity;
    return d;
}

namespace {

// Monic coefficients a_0..a_{d-1} (a_d = 1 implied).
struct Monic {
    std::vector<BigComplex> a;
    int degree() const { return static_cast<int>(a.size()); }
};

bool double_aberth(const std::vector<cd>& a, std::vector<cd>& z)
{
    const int d = static_cast<int>(a.size());
    std::vector<bool> frozen(static_cast<std::size_t>(d), false);
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (int iter = 0; iter < 1000; ++iter) {
        bool all = true;
        for (int i = 0; i < d; ++i) {
            if (frozen[static_cast<std::size_t>(i)])
                continue;
            const cd x = z[static_cast<std::size_t>(i)];
            cd p = 1.0, dp = 0.0;
            double bound = 1.0;
            const double ax = std::abs(x);
            for (int k = d - 1; k >= 0; --k) {
                dp = dp * x + p;
                p = p * x + a[static_cast<std::size_t>(k)];
                bound = bound * ax + std::abs(a[static_cast<std::size_t>(k)]);
            }
            if (!std::isfinite(std::abs(p)) || !std::isfinite(std::abs(dp)))
                return false;
            if (std::abs(p) <= 8.0 * d * eps * bound) {
                frozen[static_cast<std::size_t>(i)] = true;
                continue;
            }
            all = false;
            cd s = 0.0;
            for (int j = 0; j < d; ++j)
                if (j != i)
                    s += 1.0 / (x - z[static_cast<std::size_t>(j)]);
            const cd ratio = p / dp;
            z[static_cast<std::size_t>(i)] = x - ratio / (1.0 - ratio * s);
        }
        if (all)
            return true;
    }
    return true; // a rough start is still useful to the high-precision stages
}

// Gauss-Seidel Aberth iteration at the precision of `z`. Returns true when
// every root satisfies the backward-error stop |p(z)| <= 2^{-(P-12)} sum|a_k||z|^k.
bool big_aberth(const Monic& m, std::vector<BigComplex>& z, int max_iter)
{
    const int d = m.degree();
    const Precision prec = z.front().precision();
    std::vector<bool> frozen(static_cast<std::size_t>(d), false);
    const BigComplex one(1.0, prec);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool all = true;
        for (int i = 0; i < d; ++i) {
            if (frozen[static_cast<std::size_t>(i)])
                continue;
            const BigComplex& x = z[static_cast<std::size_t>(i)];
            BigComplex p = one, dp(prec);
            BigReal bound(1L, prec);
            const BigReal ax = abs(x);
            for (int k = d - 1; k >= 0; --k) {
                dp *= x;
                dp += p;
                p *= x;
                p += m.a[static_cast<std::size_t>(k)];
                bound *= ax;
                bound += abs(m.a[static_cast<std::size_t>(k)]);
            }
            if (abs(p) <= ldexp(bound, -(prec - 12))) {
                frozen[static_cast<std::size_t>(i)] = true;
                continue;
            }
            all = false;
            if (dp.is_zero()) {
                z[static_cast<std::size_t>(i)] += BigComplex(std::complex<double>(1e-3, 1e-3), prec);
                continue;
            }
            BigComplex s(prec);
            for (int j = 0; j < d; ++j)
                if (j != i)
                    s += one / (x - z[static_cast<std::size_t>(j)]);
            const BigComplex ratio = p / dp;
            const BigComplex den = one - ratio * s;
            z[static_cast<std::size_t>(i)] -= den.is_zero() ? ratio : ratio / den;
        }
        if (all)
            return true;
    }
    return false;
}

Monic monic_at(std::span<const BigComplex> c, Precision prec)
{
    const BigComplex lead = c.back().with_precision(prec);
    Monic m;
    for (std::size_t k = 0; k + 1 < c.size(); ++k)
        m.a.push_back(c[k].with_precision(prec) / lead);
    return m;
}

std::vector<BigComplex> initial_guesses(const std::vector<cd>& a, Precision prec)
{
    const int d = static_cast<int>(a.size());
    double r = std::pow(std::abs(a.front()), 1.0 / d);
    if (!(r > 1e-12) || !std::isfinite(r))
        r = 1.0;
    std::vector<cd> z;
    for (int k = 0; k < d; ++k)
        z.push_back(std::polar(r, 2.0 * std::numbers::pi * k / d + 0.4));
    std::vector<cd> start = z;
    if (!double_aberth(a, z))
        z = start;
    for (std::size_t k = 0; k < z.size(); ++k)
        if (!std::isfinite(z[k].real()) || !std::isfinite(z[k].imag()))
            z[k] = start[k];
    std::vector<BigComplex> out;
    for (const auto& x : z)
        out.emplace_back(x, prec);
    return out;
}

bool certified(std::span<const BigComplex> coeffs, const BigComplex& r, Precision prec, const BigReal& cmax)
{
    const int d = static_cast<int>(coeffs.size()) - 1;
    BigReal bound = ldexp(cmax, -prec / 4);
    const BigReal ar = abs(r);
    if (ar > 1.0)
        for (int k = 0; k < d; ++k)
            bound *= ar;
    BigComplex v(prec);
    for (std::size_t i = coeffs.size(); i-- > 0;) {
        v *= r;
        v += coeffs[i].with_precision(prec);
    }
    return abs(v) <= bound;
}

ZeroMultiset cluster(const std::vector<BigComplex>& z, Precision prec)
{
    const std::size_t d = z.size();
    std::vector<std::size_t> parent(d);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i)
            i = parent[i] = parent[parent[i]];
        return i;
    };
    const BigReal one(1L, prec);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            BigReal scale = abs(z[i]);
            if (scale < one)
                scale = one;
            if (abs(z[i] - z[j]) <= ldexp(scale, -prec / 8))
                parent[find(j)] = find(i);
        }
    ZeroMultiset out;
    std::vector<int> slot(d, -1);
    for (std::size_t i = 0; i < d; ++i) {
        const std::size_t r = find(i);
        if (slot[r] < 0) {
            slot[r] = static_cast<int>(out.roots.size());
            out.roots.push_back({z[i], 1});
        } else {
            auto& root = out.roots[static_cast<std::size_t>(slot[r])];
            root.location += z[i];
            ++root.multiplicity;
        }
    }
    for (auto& r : out.roots)
        if (r.multiplicity > 1)
            r.location = r.location / BigReal(static_cast<long>(r.multiplicity), prec);
    // Deterministic order: by real part, then imaginary part.
    std::sort(out.roots.begin(), out.roots.end(), [](const Root& a, const Root& b) {
        if (a.location.re() != b.location.re())
            return a.location.re() < b.location.re();
        return a.location.im() < b.location.im();
    });
    return out;
}

} // namespace

ZeroMultiset roots(std::span<const BigComplex> coeffs)
{
    if (coeffs.empty())
        throw DomainError("roots of an empty polynomial");
    Precision prec = coeffs.front().precision();
    for (const auto& c : coeffs)
        prec = std::min(prec, c.precision());
    std::size_t hi = coeffs.size();
    while (hi > 0 && coeffs[hi - 1].is_zero())
        --hi;
    if (hi == 0)
        throw DomainError("roots of the zero polynomial");
    std::size_t lo = 0;
    while (coeffs[lo].is_zero())
        ++lo;

    ZeroMultiset zero_part;
    if (lo > 0)
        zero_part.roots.push_back({BigComplex(prec), static_cast<int>(lo)});
    const auto core = coeffs.subspan(lo, hi - lo);
    if (core.size() == 1)
        return zero_part;

    const BigReal cmax = max_abs(core, prec);
    const Monic rough = monic_at(core, 128);
    std::vector<cd> ad;
    for (const auto& c : rough.a)
        ad.push_back(c.to_complex());
    std::vector<BigComplex> z = initial_guesses(ad, 128);
    big_aberth(rough, z, 400);

    std::vector<BigComplex> best;
    for (Precision work = prec; work <= 2 * prec; work *= 2) {
        for (auto& x : z)
            x = x.with_precision(work);
        big_aberth(monic_at(core, work), z, 200);
        best = z;
        const bool ok = std::all_of(z.begin(), z.end(), [&](const BigComplex& r) {
            return certified(core, r.with_precision(prec), prec, cmax);
        });
        if (ok)
            break;
        if (work == 2 * prec) {
            std::vector<BigComplex> partial;
            for (const auto& r : best)
                partial.push_back(r.with_precision(prec));
            ZeroMultiset part = cluster(partial, prec);
            part.roots.insert(part.roots.end(), zero_part.roots.begin(), zero_part.roots.end());
            throw RootFindingError("root iteration did not converge after escalation", std::move(part));
        }
    }
    for (auto& x : best)
        x = x.with_precision(prec);
    ZeroMultiset out = cluster(best, prec);
    if (!zero_part.roots.empty()) {
        out.roots.push_back(zero_part.roots.front());
        std::sort(out.roots.begin(), out.roots.end(), [](const Root& a, const Root& b) {
            if (a.location.re() != b.location.re())
                return a.location.re() < b.location.re();
            return a.location.im() < b.location.im();
        });
    }
    return out;
}

std::vector<BigComplex> from_roots(const ZeroMultiset& zeros, Precision prec)
{
    std::vector<BigComplex> c{BigComplex(1.0, prec)};
    for (const auto& r : zeros.roots)
        for (int m = 0; m < r.multiplicity; ++m) {
            const BigComplex x = r.location.with_precision(prec);
            c.push_back(BigComplex(prec));
            for (std::size_t k = c.size() - 1; k > 0; --k) {
                c[k] = c[k - 1] - x * c[k];
            }
            c[0] = -(x * c[0]);
        }
    return c;
}

} // namespace padelab
