#include "padelab/testfn.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "padelab/errors.hpp"
#include "padelab/hash.hpp"

namespace padelab {

namespace {

using cd = std::complex<double>;

std::string strip_spaces(std::string s)
{
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    return s;
}

cd zhukovskii_double(cd z, double alpha, double beta)
{
    return zhukovskii_exterior((2.0 * z - (alpha + beta)) / (beta - alpha));
}

BigComplex poly_eval(const std::vector<ExactComplex>& coeffs, const BigComplex& z, BigReal* gauge = nullptr)
{
    const Precision p = z.precision();
    BigComplex acc(p);
    BigReal g(p);
    const BigReal az = abs(z);
    for (std::size_t k = coeffs.size(); k-- > 0;) {
        acc *= z;
        const BigComplex c = coeffs[k].at(p);
        acc += c;
        if (gauge) {
            g *= az;
            g += abs(c);
        }
    }
    if (gauge)
        *gauge = g;
    return acc;
}

BigComplex rational_value(const RationalMultiplier& r, const BigComplex& z)
{
    BigReal gauge(z.precision());
    const BigComplex den = poly_eval(r.denominator, z, &gauge);
    if (abs(den) <= ldexp(gauge, -z.precision() / 2))
        throw DomainError("evaluation at a pole of the rational multiplier");
    return poly_eval(r.numerator, z) / den;
}

// C^e exp(e (Log(1 - w/C) + 2 pi i winding)).
BigComplex power_value(const PowerFactor& pf, const BigComplex& w, long winding)
{
    const Precision p = w.precision();
    const BigComplex c = pf.constant.at(p);
    const BigComplex e = pf.exponent.at(p);
    const BigComplex one(1.0, p);
    const BigComplex u = one - w / c;
    if (abs(u) <= ldexp(BigReal(1.0, p), -p + 8)) {
        if (e.re().sign() > 0)
            return BigComplex(p);
        throw NumericalError("evaluation at a branch point with non-positive exponent");
    }
    BigComplex l = log(u);
    if (winding != 0)
        l.im() += BigReal::pi(p) * static_cast<double>(2 * winding);
    return pow(c, e) * exp(e * l);
}

// Continuation of Log(1 - w/C) along w0 -> via -> w1; returns the winding
// number of the end value relative to the principal logarithm.
long track_winding(cd c, cd w0, cd via, cd w1)
{
    auto plog = [&](cd w) {
        const cd u = 1.0 - w / c;
        if (std::abs(u) < 1e-300)
            throw NumericalError("branch tracking hit a branch point");
        return std::log(u);
    };
    constexpr double two_pi = 2.0 * std::numbers::pi;
    cd cur = plog(w0);
    const cd legs[3] = {w0, via, w1};
    for (int leg = 0; leg < 2; ++leg) {
        const cd a = legs[leg], b = legs[leg + 1];
        const double len = std::abs(b - a);
        if (len == 0.0)
            continue;
        const double h0 = 1.0 / 64.0;
        double s = 0.0, h = h0;
        while (s < 1.0) {
            const double sn = std::min(1.0, s + h);
            const cd lp = plog(a + sn * (b - a));
            const double k = std::round((cur.imag() - lp.imag()) / two_pi);
            const cd cand = lp + cd(0.0, two_pi * k);
            if (std::abs(cand - cur) > 0.5) {
                h *= 0.5;
                if (h * len < 1e-14)
                    throw NumericalError("branch tracking step underflow");
                continue;
            }
            cur = cand;
            s = sn;
            h = std::min(h0, 2.0 * h);
        }
    }
    return std::lround((cur.imag() - plog(w1).imag()) / two_pi);
}

BigComplex factor_sheet0(const FactorSpec& f, const BigComplex& z)
{
    const BigComplex w = inverse_zhukovskii(z, f.segment, Sheet::one);
    BigComplex v(1.0, z.precision());
    for (const auto& pf : f.powers)
        v *= power_value(pf, w, 0);
    return v;
}

BigComplex factor_sheet1(const FactorSpec& f, const BigComplex& z)
{
    const BigComplex w1 = inverse_zhukovskii(z, f.segment, Sheet::zero);
    const cd w1d = w1.to_complex();
    const cd w0d = 1.0 / w1d;
    // The segment midpoint maps to +-i; cross there on the side of w0.
    const cd via = w0d.imag() < 0.0 ? cd(0.0, -1.0) : cd(0.0, 1.0);
    BigComplex v(1.0, z.precision());
    for (const auto& pf : f.powers) {
        const cd c = pf.constant.value();
        // At the branch point itself the value is 0 (or an error) on every branch.
        const long k = std::abs(1.0 - w1d / c) < 1e-12 ? 0 : track_winding(c, w0d, via, w1d);
        v *= power_value(pf, w1, k);
    }
    return v;
}

void validate_factor(const FactorSpec& f)
{
    if (!(f.segment.alpha.value() < f.segment.beta.value()))
        throw DomainError("segment endpoints must satisfy alpha < beta");
    if (f.powers.empty())
        throw DomainError("a factor needs at least one (C, exponent) pair");
    for (const auto& pf : f.powers)
        if (!(std::abs(pf.constant.value()) > 1.0))
            throw DomainError("factor constants must satisfy |C| > 1");
}

} // namespace

ExactReal::ExactReal(std::string text) : text_(strip_spaces(std::move(text)))
{
    try {
        value_ = BigReal::parse(text_, 128).to_double();
    } catch (const DomainError&) {
        const BigComplex z = BigComplex::parse(text_, 128);
        if (!z.im().is_zero())
            throw UnsupportedError("non-real value '" + text_ + "' where a real is required");
        text_ = z.re().to_string();
        value_ = z.re().to_double();
    }
}

ExactComplex::ExactComplex(std::string text) : text_(strip_spaces(std::move(text)))
{
    value_ = BigComplex::parse(text_, 128).to_complex();
}

TestFunctionSpec::TestFunctionSpec(std::vector<FactorSpec> factors, std::optional<RationalMultiplier> rational)
    : factors_(std::move(factors)), rational_(std::move(rational))
{
    if (factors_.empty() && !rational_)
        throw DomainError("a test function needs at least one factor or a rational multiplier");
    for (const auto& f : factors_)
        validate_factor(f);
    std::vector<std::pair<double, double>> segs;
    for (const auto& f : factors_)
        segs.emplace_back(f.segment.alpha.value(), f.segment.beta.value());
    std::sort(segs.begin(), segs.end());
    for (std::size_t i = 1; i < segs.size(); ++i)
        if (!(segs[i].first > segs[i - 1].second))
            throw DomainError("segments must be pairwise disjoint");

    if (rational_) {
        auto& r = *rational_;
        if (r.numerator.empty() || r.denominator.empty())
            throw DomainError("rational multiplier needs numerator and denominator coefficients");
        if (r.denominator.back().value() == cd(0.0, 0.0))
            throw DomainError("leading denominator coefficient is zero");
        if (r.numerator.size() > r.denominator.size())
            throw DomainError("rational multiplier must be bounded at infinity (deg N <= deg D)");
        for (auto [a, b] : segs) {
            constexpr int grid = 2048;
            for (int i = 0; i <= grid; ++i) {
                const cd x(a + (b - a) * i / grid, 0.0);
                cd d = 0.0;
                for (std::size_t k = r.denominator.size(); k-- > 0;)
                    d = d * x + r.denominator[k].value();
                if (std::abs(d) < 1e-10)
                    throw DomainError("rational multiplier denominator vanishes on a segment");
            }
        }
    }
}

std::string TestFunctionSpec::canonical() const
{
    std::ostringstream os;
    os << "segments = [";
    for (std::size_t j = 0; j < factors_.size(); ++j)
        os << (j ? "," : "") << "[" << factors_[j].segment.alpha.text() << "," << factors_[j].segment.beta.text() << "]";
    os << "]\nfactors = [";
    bool first = true;
    for (std::size_t j = 0; j < factors_.size(); ++j)
        for (const auto& pf : factors_[j].powers) {
            os << (first ? "" : ",") << "{seg=" << j << ",C=" << pf.constant.text() << ",exp=" << pf.exponent.text() << "}";
            first = false;
        }
    os << "]\n";
    if (rational_) {
        os << "rational = {num=[";
        for (std::size_t k = 0; k < rational_->numerator.size(); ++k)
            os << (k ? "," : "") << rational_->numerator[k].text();
        os << "],den=[";
        for (std::size_t k = 0; k < rational_->denominator.size(); ++k)
            os << (k ? "," : "") << rational_->denominator[k].text();
        os << "]}\n";
    }
    return os.str();
}

std::string TestFunctionSpec::hash() const { return stable_hash(canonical()); }

TestFunctionSpec algebraic_spec(ExactReal a, ExactReal b, Segment seg)
{
    if (!(1.0 < a.value() && a.value() < b.value()))
        throw DomainError("algebraic test function needs 1 < A < B");
    return TestFunctionSpec({FactorSpec{std::move(seg), {{ExactComplex(a.text()), "1/2"}, {ExactComplex(b.text()), "1/2"}}}});
}

TestFunctionSpec product_spec(const std::vector<std::pair<Segment, std::pair<ExactReal, ExactReal>>>& parts)
{
    std::vector<FactorSpec> fs;
    for (const auto& [seg, ab] : parts) {
        if (!(1.0 < ab.first.value() && ab.first.value() < ab.second.value()))
            throw DomainError("algebraic test function needs 1 < A < B");
        fs.push_back(FactorSpec{seg, {{ExactComplex(ab.first.text()), "1/2"}, {ExactComplex(ab.second.text()), "1/2"}}});
    }
    return TestFunctionSpec(std::move(fs));
}

TestFunctionSpec rational_spec(RationalMultiplier r) { return TestFunctionSpec({}, std::move(r)); }

BigComplex inverse_zhukovskii(const BigComplex& z, const Segment& seg, Sheet sheet)
{
    const Precision p = z.precision();
    const BigReal a = seg.alpha.at(p), b = seg.beta.at(p);
    if (!(a < b))
        throw DomainError("degenerate segment");
    const BigComplex psi = BigComplex(z.re() * 2.0 - a - b, z.im() * 2.0) / (b - a);
    if (psi.im().is_zero() && abs(psi.re()) < 1.0)
        throw DomainError("inverse Zhukovskii map evaluated on the open segment");
    const BigComplex one(1.0, p);
    const BigComplex s = sqrt(psi - one) * sqrt(psi + one);
    BigComplex phi = psi + s;
    if (norm(phi) < 1.0)
        phi = psi - s;
    return sheet == Sheet::zero ? phi : one / phi;
}

int crossed_factor(const TestFunctionSpec& spec, std::complex<double> z)
{
    const auto& fs = spec.factors();
    if (fs.empty())
        throw DomainError("a rational function has no second sheet");
    int best = 0;
    double best_mod = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < fs.size(); ++j) {
        const double m = std::abs(zhukovskii_double(z, fs[j].segment.alpha.value(), fs[j].segment.beta.value()));
        if (m < best_mod) {
            best_mod = m;
            best = static_cast<int>(j);
        }
    }
    return best;
}

BigComplex eval_branch(const TestFunctionSpec& spec, const BigComplex& z, Sheet sheet)
{
    const Precision p = z.precision();
    const int crossed = sheet == Sheet::one ? crossed_factor(spec, z.to_complex()) : -1;
    BigComplex v(1.0, p);
    for (std::size_t j = 0; j < spec.factors().size(); ++j) {
        const auto& f = spec.factors()[j];
        v *= static_cast<int>(j) == crossed ? factor_sheet1(f, z) : factor_sheet0(f, z);
    }
    if (spec.rational())
        v *= rational_value(*spec.rational(), z);
    return v;
}

Germ inverse_zhukovskii_germ(const Segment& seg, int order, Precision prec)
{
    if (order < 2)
        throw DomainError("germ order must be at least 2");
    const BigReal a = seg.alpha.at(prec), b = seg.beta.at(prec);
    const BigReal c = (a + b) / 2.0, r = (b - a) / 2.0;
    // t = 1/psi(z) = r / (z - c) = sum_{k>=1} r c^{k-1} z^{-k}.
    std::vector<BigComplex> tc(static_cast<std::size_t>(order) + 1, BigComplex(prec));
    BigReal ck = r;
    for (int k = 1; k <= order; ++k) {
        tc[static_cast<std::size_t>(k)] = BigComplex(ck);
        ck *= c;
    }
    const Germ t(std::move(tc));
    const Germ one = Germ::constant(BigComplex(1.0, prec), order);
    const Germ root = series_sqrt(series_sub(one, series_mul(t, t)), BigComplex(1.0, prec));
    // 1/phi = t / (1 + sqrt(1 - t^2)).
    return series_mul(t, series_inverse(series_add(one, root)));
}

Germ germ_at_infinity(const TestFunctionSpec& spec, int order, Precision prec)
{
    if (order < 2)
        throw DomainError("germ order must be at least 2");
    Germ g = Germ::constant(BigComplex(1.0, prec), order);
    for (const auto& f : spec.factors()) {
        const Germ w = inverse_zhukovskii_germ(f.segment, order, prec);
        for (const auto& pf : f.powers) {
            const BigComplex cst = pf.constant.at(prec);
            const BigComplex e = pf.exponent.at(prec);
            const Germ base = series_sub(Germ::constant(cst, order), w);
            g = series_mul(g, series_cpow(base, e, pow(cst, e)));
        }
    }
    if (spec.rational()) {
        const auto& r = *spec.rational();
        const int dn = static_cast<int>(r.numerator.size()) - 1;
        const int dd = static_cast<int>(r.denominator.size()) - 1;
        // N(z)/D(z) = z^{dn-dd} (sum n_{dn-k} z^{-k}) / (sum d_{dd-k} z^{-k}).
        std::vector<BigComplex> nc(static_cast<std::size_t>(order) + 1, BigComplex(prec));
        std::vector<BigComplex> dc(static_cast<std::size_t>(order) + 1, BigComplex(prec));
        for (int k = 0; k <= std::min(dn, order); ++k)
            nc[static_cast<std::size_t>(k)] = r.numerator[static_cast<std::size_t>(dn - k)].at(prec);
        for (int k = 0; k <= std::min(dd, order); ++k)
            dc[static_cast<std::size_t>(k)] = r.denominator[static_cast<std::size_t>(dd - k)].at(prec);
        const Germ ratio = series_mul(Germ(std::move(nc)), series_inverse(Germ(std::move(dc))));
        std::vector<BigComplex> shifted(static_cast<std::size_t>(order) + 1, BigComplex(prec));
        const int shift = dd - dn;
        for (int k = shift; k <= order; ++k)
            shifted[static_cast<std::size_t>(k)] = ratio[k - shift];
        g = series_mul(g, Germ(std::move(shifted)));
    }
    return g;
}

IntervalSystem stahl_compact(const TestFunctionSpec& spec)
{
    if (spec.factors().empty())
        throw DomainError("a rational function has no branch cut");
    std::vector<std::pair<double, double>> segs;
    for (const auto& f : spec.factors())
        segs.emplace_back(f.segment.alpha.value(), f.segment.beta.value());
    return IntervalSystem::from_intervals(std::move(segs));
}

std::vector<std::complex<double>> branch_points(const TestFunctionSpec& spec)
{
    std::vector<std::complex<double>> out;
    for (const auto& f : spec.factors()) {
        const double a = f.segment.alpha.value(), b = f.segment.beta.value();
        out.emplace_back(a, 0.0);
        out.emplace_back(b, 0.0);
        for (const auto& pf : f.powers) {
            const cd c = pf.constant.value();
            out.push_back(0.5 * (a + b) + 0.5 * (b - a) * 0.5 * (c + 1.0 / c));
        }
    }
    return out;
}

ClassReport validate_class(const TestFunctionSpec& spec)
{
    constexpr Precision p = 256;
    ClassReport rep;
    if (spec.factors().empty()) {
        rep.unsupported = true;
        rep.reason = "rational function without branch points";
        return rep;
    }
    const BigReal tol = ldexp(BigReal(1.0, p), -p / 2);
    auto is_integer = [&](const BigComplex& z) { return abs(z.im()) <= tol && abs(z.re() - round(z.re())) <= tol; };
    bool all_half = true, any_integer = false, sums_integer = true, distinct = true;
    for (const auto& f : spec.factors()) {
        BigComplex sum(p);
        for (std::size_t i = 0; i < f.powers.size(); ++i) {
            const BigComplex e = f.powers[i].exponent.at(p);
            sum += e;
            if (is_integer(e))
                any_integer = true;
            const BigComplex twice = e * BigReal(2L, p);
            if (!(abs(twice.im()) <= tol && abs(abs(twice.re()) - 1.0) <= tol))
                all_half = false;
            for (std::size_t k = 0; k < i; ++k)
                if (f.powers[k].constant.value() == f.powers[i].constant.value())
                    distinct = false;
        }
        if (!is_integer(sum))
            sums_integer = false;
    }
    if (any_integer) {
        rep.unsupported = true;
        rep.reason = "integer exponent";
    } else if (!sums_integer) {
        rep.unsupported = true;
        rep.reason = "exponent sum of a factor is not an integer";
    } else if (all_half && distinct) {
        rep.in_f = true;
        rep.reason = "square-root branch points, real disjoint segments";
    } else {
        rep.in_extension = true;
        rep.reason = all_half ? "repeated constants" : "non-integer exponents with integer sum";
    }
    return rep;
}

} // namespace padelab
