#include "padelab/bigseries.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "padelab/errors.hpp"
#include "padelab/hash.hpp"

namespace padelab {

namespace {

void require_compatible(const Germ& a, const Germ& b)
{
    if (a.precision() != b.precision())
        throw DomainError("germ precision mismatch: " + std::to_string(a.precision()) + " vs " +
                          std::to_string(b.precision()));
}

} // namespace

Germ::Germ(std::vector<BigComplex> coeffs) : coeffs_(std::move(coeffs))
{
    if (coeffs_.empty())
        throw DomainError("empty germ");
    const Precision p = coeffs_.front().precision();
    for (auto& c : coeffs_)
        if (c.precision() != p)
            c = c.with_precision(p);
}

Germ Germ::constant(const BigComplex& c, int order)
{
    if (order < 0)
        throw DomainError("negative germ order");
    std::vector<BigComplex> v(static_cast<std::size_t>(order) + 1, BigComplex(c.precision()));
    v[0] = c;
    return Germ(std::move(v));
}

Germ Germ::inverse_z(int order, Precision prec)
{
    if (order < 1)
        throw DomainError("1/z needs order >= 1");
    std::vector<BigComplex> v(static_cast<std::size_t>(order) + 1, BigComplex(prec));
    v[1] = BigComplex(1.0, prec);
    return Germ(std::move(v));
}

Germ Germ::truncated(int order) const
{
    if (order < 0 || order > this->order())
        throw DomainError("cannot truncate germ to order " + std::to_string(order));
    return Germ(std::vector<BigComplex>(coeffs_.begin(), coeffs_.begin() + order + 1));
}

BigReal Germ::max_abs() const
{
    BigReal m(precision());
    for (const auto& c : coeffs_) {
        BigReal a = abs(c);
        if (a > m)
            m = std::move(a);
    }
    return m;
}

Germ series_add(const Germ& a, const Germ& b)
{
    require_compatible(a, b);
    const int n = std::min(a.order(), b.order());
    std::vector<BigComplex> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k)
        out.push_back(a[k] + b[k]);
    return Germ(std::move(out));
}

Germ series_sub(const Germ& a, const Germ& b)
{
    require_compatible(a, b);
    const int n = std::min(a.order(), b.order());
    std::vector<BigComplex> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k)
        out.push_back(a[k] - b[k]);
    return Germ(std::move(out));
}

Germ series_scale(const Germ& a, const BigComplex& s)
{
    std::vector<BigComplex> out;
    out.reserve(a.coeffs().size());
    const BigComplex sp = s.with_precision(a.precision());
    for (const auto& c : a.coeffs())
        out.push_back(c * sp);
    return Germ(std::move(out));
}

Germ series_mul(const Germ& a, const Germ& b)
{
    require_compatible(a, b);
    const int n = std::min(a.order(), b.order());
    std::vector<BigComplex> out(static_cast<std::size_t>(n) + 1, BigComplex(a.precision()));
    for (int k = 0; k <= n; ++k)
        for (int i = 0; i <= k; ++i)
            mul_add(out[static_cast<std::size_t>(k)], a[i], b[k - i]);
    return Germ(std::move(out));
}

Germ series_cpow(const Germ& a, const BigComplex& alpha, const BigComplex& branch)
{
    if (a[0].is_zero())
        throw DomainError("leading germ coefficient vanishes");
    const Precision p = a.precision();
    const int n = a.order();
    const BigComplex al = alpha.with_precision(p);
    const BigComplex inv_a0 = BigComplex(1.0, p) / a[0];

    // b = a^alpha satisfies a b' = alpha a' b; in powers of 1/z this gives
    // b_k = (1 / (k a_0)) sum_{j=1}^{k} ((alpha + 1) j - k) a_j b_{k-j}.
    std::vector<BigComplex> b(static_cast<std::size_t>(n) + 1, BigComplex(p));
    b[0] = branch.with_precision(p);
    const BigComplex alpha1 = al + BigComplex(1.0, p);
    for (int k = 1; k <= n; ++k) {
        BigComplex acc(p);
        for (int j = 1; j <= k; ++j) {
            if (a[j].is_zero())
                continue;
            BigComplex w = alpha1 * BigReal(static_cast<long>(j), p);
            w.re() -= BigReal(static_cast<long>(k), p);
            mul_add(acc, w * a[j], b[static_cast<std::size_t>(k - j)]);
        }
        b[static_cast<std::size_t>(k)] = acc * inv_a0 / BigReal(static_cast<long>(k), p);
    }
    return Germ(std::move(b));
}

Germ series_sqrt(const Germ& a, const BigComplex& branch)
{
    const Precision p = a.precision();
    const BigComplex br = branch.with_precision(p);
    const BigReal scale = abs(a[0]);
    const BigReal mismatch = abs(br * br - a[0]);
    if (scale.is_zero() || mismatch > ldexp(scale, -p / 2))
        throw DomainError("branch is not a square root of the leading coefficient");
    BigComplex half(BigReal::parse("1/2", p), BigReal(p));
    return series_cpow(a, half, br);
}

Germ series_inverse(const Germ& a)
{
    if (a[0].is_zero())
        throw DomainError("leading germ coefficient vanishes");
    const Precision p = a.precision();
    return series_cpow(a, BigComplex(-1.0, p), BigComplex(1.0, p) / a[0]);
}

SeriesValue series_eval(const Germ& a, const BigComplex& z)
{
    if (z.is_zero())
        throw DomainError("cannot evaluate a germ at infinity's antipode z = 0");
    const Precision p = a.precision();
    const BigComplex x = BigComplex(1.0, p) / z.with_precision(p);
    BigComplex v = a[a.order()];
    for (int k = a.order() - 1; k >= 0; --k) {
        v *= x;
        v += a[k];
    }
    const double az = abs(z).to_double();
    double tail = std::numeric_limits<double>::infinity();
    if (az > 1.0) {
        const double cn = abs(a[a.order()]).to_double();
        tail = cn == 0.0 ? 0.0 : cn * std::pow(az, -a.order()) / (1.0 - 1.0 / az);
    }
    return {std::move(v), tail};
}

std::string germ_hash(const Germ& g)
{
    std::string text = std::to_string(g.precision()) + ":";
    for (const auto& c : g.coeffs())
        text += c.to_string() + ";";
    return stable_hash(text);
}

} // namespace padelab
