#include "padelab/big.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <memory>
#include <string>

#include "padelab/errors.hpp"

namespace padelab {

namespace {

Precision checked(Precision prec)
{
    if (prec < kMinPrecision)
        throw DomainError("precision below " + std::to_string(kMinPrecision) + " bits");
    return prec;
}

Precision pmin(const BigReal& a, const BigReal& b)
{
    return std::min(a.precision(), b.precision());
}

std::string trim(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

BigReal parse_decimal(const std::string& s, Precision prec)
{
    if (s.empty())
        throw DomainError("empty number");
    BigReal r(prec);
    char* end = nullptr;
    mpfr_strtofr(r.get(), s.c_str(), &end, 10, MPFR_RNDN);
    if (end == s.c_str() || *end != '\0')
        throw DomainError("malformed number '" + s + "'");
    r.check_finite("parse");
    return r;
}

} // namespace

BigReal::BigReal(Precision prec)
{
    mpfr_init2(v_, checked(prec));
    mpfr_set_zero(v_, 1);
}

BigReal::BigReal(double v, Precision prec)
{
    if (!std::isfinite(v))
        throw NumericalError("non-finite value");
    mpfr_init2(v_, checked(prec));
    mpfr_set_d(v_, v, MPFR_RNDN);
}

BigReal::BigReal(long v, Precision prec)
{
    mpfr_init2(v_, checked(prec));
    mpfr_set_si(v_, v, MPFR_RNDN);
}

BigReal BigReal::parse(std::string_view text, Precision prec)
{
    const std::string s = trim(text);
    const auto slash = s.find('/');
    if (slash == std::string::npos)
        return parse_decimal(s, prec);
    BigReal num = parse_decimal(trim(std::string_view(s).substr(0, slash)), prec);
    BigReal den = parse_decimal(trim(std::string_view(s).substr(slash + 1)), prec);
    if (den.is_zero())
        throw DomainError("zero denominator in '" + s + "'");
    return num / den;
}

BigReal BigReal::pi(Precision prec)
{
    BigReal r(prec);
    mpfr_const_pi(r.v_, MPFR_RNDN);
    return r;
}

BigReal::BigReal(const BigReal& other)
{
    mpfr_init2(v_, other.precision());
    mpfr_set(v_, other.v_, MPFR_RNDN);
}

BigReal::BigReal(BigReal&& other) noexcept
{
    // Steal the limbs; the source is left holding a fresh minimal value.
    v_[0] = other.v_[0];
    mpfr_init2(other.v_, kMinPrecision);
}

BigReal& BigReal::operator=(const BigReal& other)
{
    if (this != &other) {
        mpfr_set_prec(v_, other.precision());
        mpfr_set(v_, other.v_, MPFR_RNDN);
    }
    return *this;
}

BigReal& BigReal::operator=(BigReal&& other) noexcept
{
    if (this != &other)
        mpfr_swap(v_, other.v_);
    return *this;
}

BigReal::~BigReal() { release(); }

void BigReal::release() noexcept { mpfr_clear(v_); }

BigReal BigReal::with_precision(Precision prec) const
{
    BigReal r(prec);
    mpfr_set(r.v_, v_, MPFR_RNDN);
    return r;
}

std::string BigReal::to_string() const
{
    // 1 + ceil(p log10 2) digits guarantee an exact read-back.
    const int digits = 1 + static_cast<int>(std::ceil(static_cast<double>(precision()) * 0.30102999566398120));
    return to_string(digits);
}

std::string BigReal::to_string(int digits) const
{
    if (is_zero())
        return "0";
    mpfr_exp_t e = 0;
    std::unique_ptr<char, void (*)(char*)> raw(mpfr_get_str(nullptr, &e, 10, static_cast<std::size_t>(digits), v_, MPFR_RNDN),
                                               mpfr_free_str);
    std::string m(raw.get());
    std::string sign;
    if (!m.empty() && m[0] == '-') {
        sign = "-";
        m.erase(0, 1);
    }
    while (m.size() > 1 && m.back() == '0')
        m.pop_back();
    std::string out = sign + m.substr(0, 1);
    if (m.size() > 1)
        out += "." + m.substr(1);
    const long exp10 = static_cast<long>(e) - 1;
    if (exp10 != 0)
        out += "e" + std::to_string(exp10);
    return out;
}

void BigReal::check_finite(const char* what) const
{
    if (!mpfr_number_p(v_))
        throw NumericalError(std::string("non-finite result in ") + what);
}

#define PADELAB_BINOP(OP, FN)                                   \
    BigReal operator OP(const BigReal& a, const BigReal& b)     \
    {                                                           \
        BigReal r(pmin(a, b));                                  \
        FN(r.v_, a.v_, b.v_, MPFR_RNDN);                        \
        r.check_finite(#FN);                                    \
        return r;                                               \
    }

PADELAB_BINOP(+, mpfr_add)
PADELAB_BINOP(-, mpfr_sub)
PADELAB_BINOP(*, mpfr_mul)
PADELAB_BINOP(/, mpfr_div)
#undef PADELAB_BINOP

BigReal operator*(const BigReal& a, double b)
{
    BigReal r(a.precision());
    mpfr_mul_d(r.v_, a.v_, b, MPFR_RNDN);
    r.check_finite("mul_d");
    return r;
}

BigReal operator/(const BigReal& a, double b)
{
    BigReal r(a.precision());
    mpfr_div_d(r.v_, a.v_, b, MPFR_RNDN);
    r.check_finite("div_d");
    return r;
}

BigReal operator+(const BigReal& a, double b)
{
    BigReal r(a.precision());
    mpfr_add_d(r.v_, a.v_, b, MPFR_RNDN);
    r.check_finite("add_d");
    return r;
}

BigReal operator-(const BigReal& a, double b)
{
    BigReal r(a.precision());
    mpfr_sub_d(r.v_, a.v_, b, MPFR_RNDN);
    r.check_finite("sub_d");
    return r;
}

#define PADELAB_COMPOUND(OP, FN)                                         \
    BigReal& BigReal::operator OP(const BigReal& o)                      \
    {                                                                    \
        if (o.precision() < precision())                                 \
            mpfr_prec_round(v_, o.precision(), MPFR_RNDN);               \
        FN(v_, v_, o.v_, MPFR_RNDN);                                     \
        check_finite(#FN);                                               \
        return *this;                                                    \
    }

PADELAB_COMPOUND(+=, mpfr_add)
PADELAB_COMPOUND(-=, mpfr_sub)
PADELAB_COMPOUND(*=, mpfr_mul)
PADELAB_COMPOUND(/=, mpfr_div)
#undef PADELAB_COMPOUND

BigReal BigReal::operator-() const
{
    BigReal r(precision());
    mpfr_neg(r.v_, v_, MPFR_RNDN);
    return r;
}

#define PADELAB_UNARY(NAME, FN)                      \
    BigReal NAME(const BigReal& x)                   \
    {                                                \
        BigReal r(x.precision());                    \
        FN(r.get(), x.get(), MPFR_RNDN);             \
        r.check_finite(#NAME);                       \
        return r;                                    \
    }

PADELAB_UNARY(abs, mpfr_abs)
PADELAB_UNARY(sqrt, mpfr_sqrt)
PADELAB_UNARY(log, mpfr_log)
PADELAB_UNARY(exp, mpfr_exp)
PADELAB_UNARY(sin, mpfr_sin)
PADELAB_UNARY(cos, mpfr_cos)
#undef PADELAB_UNARY

BigReal atan2(const BigReal& y, const BigReal& x)
{
    BigReal r(pmin(y, x));
    mpfr_atan2(r.get(), y.get(), x.get(), MPFR_RNDN);
    r.check_finite("atan2");
    return r;
}

BigReal hypot(const BigReal& x, const BigReal& y)
{
    BigReal r(pmin(x, y));
    mpfr_hypot(r.get(), x.get(), y.get(), MPFR_RNDN);
    r.check_finite("hypot");
    return r;
}

BigReal ldexp(const BigReal& x, long e)
{
    BigReal r(x.precision());
    mpfr_mul_2si(r.get(), x.get(), e, MPFR_RNDN);
    r.check_finite("ldexp");
    return r;
}

BigReal round(const BigReal& x)
{
    BigReal r(x.precision());
    mpfr_round(r.get(), x.get());
    return r;
}

BigReal min_precision_zero(const BigReal& a, const BigReal& b) { return BigReal(pmin(a, b)); }

// --- complex ---------------------------------------------------------------

BigComplex::BigComplex(BigReal re, BigReal im) : re_(std::move(re)), im_(std::move(im))
{
    const Precision p = std::min(re_.precision(), im_.precision());
    if (re_.precision() != p)
        re_ = re_.with_precision(p);
    if (im_.precision() != p)
        im_ = im_.with_precision(p);
}

BigComplex::BigComplex(BigReal re) : re_(std::move(re)), im_(re_.precision()) {}

BigComplex::BigComplex(std::complex<double> z, Precision prec) : re_(z.real(), prec), im_(z.imag(), prec) {}

BigComplex BigComplex::parse(std::string_view text, Precision prec)
{
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c)))
            s += c;
    if (s.empty())
        throw DomainError("empty complex number");
    if (s.back() != 'i' && s.back() != 'j')
        return BigComplex(BigReal::parse(s, prec), BigReal(prec));
    s.pop_back();
    // Split at the last sign that is not part of an exponent.
    std::size_t split = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    auto imag_part = [&](const std::string& t) {
        if (t.empty() || t == "+")
            return BigReal(1L, prec);
        if (t == "-")
            return BigReal(-1L, prec);
        return BigReal::parse(t, prec);
    };
    if (split == std::string::npos)
        return BigComplex(BigReal(prec), imag_part(s));
    return BigComplex(BigReal::parse(s.substr(0, split), prec), imag_part(s.substr(split)));
}

BigComplex BigComplex::with_precision(Precision prec) const
{
    return BigComplex(re_.with_precision(prec), im_.with_precision(prec));
}

std::string BigComplex::to_string() const { return re_.to_string() + "," + im_.to_string(); }

std::string BigComplex::to_string(int digits) const
{
    std::string im = im_.to_string(digits);
    if (im[0] != '-')
        im = "+" + im;
    return re_.to_string(digits) + im + "i";
}

BigComplex& BigComplex::operator+=(const BigComplex& o)
{
    re_ += o.re_;
    im_ += o.im_;
    return *this;
}

BigComplex& BigComplex::operator-=(const BigComplex& o)
{
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
}

BigComplex& BigComplex::operator*=(const BigComplex& o)
{
    *this = *this * o;
    return *this;
}

BigComplex& BigComplex::operator/=(const BigComplex& o)
{
    *this = *this / o;
    return *this;
}

BigComplex& BigComplex::operator*=(const BigReal& o)
{
    re_ *= o;
    im_ *= o;
    return *this;
}

BigComplex operator*(const BigComplex& a, const BigComplex& b)
{
    const Precision p = std::min(a.precision(), b.precision());
    BigReal re(p), im(p);
    mpfr_fmms(re.get(), a.re_.get(), b.re_.get(), a.im_.get(), b.im_.get(), MPFR_RNDN);
    mpfr_fmma(im.get(), a.re_.get(), b.im_.get(), a.im_.get(), b.re_.get(), MPFR_RNDN);
    re.check_finite("complex mul");
    im.check_finite("complex mul");
    return BigComplex(std::move(re), std::move(im));
}

BigComplex operator/(const BigComplex& a, const BigComplex& b)
{
    if (b.is_zero())
        throw NumericalError("complex division by zero");
    const BigReal d = norm(b);
    return (a * conj(b)) / d;
}

BigComplex operator/(const BigComplex& a, const BigReal& b)
{
    if (b.is_zero())
        throw NumericalError("complex division by zero");
    return BigComplex(a.re_ / b, a.im_ / b);
}

void mul_add(BigComplex& acc, const BigComplex& a, const BigComplex& b)
{
    const Precision p = std::min({acc.precision(), a.precision(), b.precision()});
    BigReal t(p);
    mpfr_fmms(t.get(), a.re().get(), b.re().get(), a.im().get(), b.im().get(), MPFR_RNDN);
    acc.re() += t;
    mpfr_fmma(t.get(), a.re().get(), b.im().get(), a.im().get(), b.re().get(), MPFR_RNDN);
    acc.im() += t;
}

BigReal abs(const BigComplex& z) { return hypot(z.re(), z.im()); }

BigReal norm(const BigComplex& z)
{
    BigReal r(z.precision());
    mpfr_fmma(r.get(), z.re().get(), z.re().get(), z.im().get(), z.im().get(), MPFR_RNDN);
    r.check_finite("norm");
    return r;
}

BigReal arg(const BigComplex& z) { return atan2(z.im(), z.re()); }

BigComplex conj(const BigComplex& z) { return BigComplex(z.re(), -z.im()); }

BigComplex exp(const BigComplex& z)
{
    const BigReal m = exp(z.re());
    return BigComplex(m * cos(z.im()), m * sin(z.im()));
}

BigComplex log(const BigComplex& z)
{
    if (z.is_zero())
        throw NumericalError("logarithm of zero");
    return BigComplex(log(abs(z)), arg(z));
}

BigComplex sqrt(const BigComplex& z)
{
    if (z.is_zero())
        return BigComplex(z.precision());
    // Stable form: t = sqrt((|z| + |re|)/2).
    const BigReal r = abs(z);
    const BigReal t = sqrt((r + abs(z.re())) / 2.0);
    if (z.re().sign() >= 0)
        return BigComplex(t, z.im() / (t * 2.0));
    BigReal im = t;
    if (z.im().sign() < 0)
        im = -im;
    return BigComplex(abs(z.im()) / (t * 2.0), im);
}

BigComplex pow(const BigComplex& z, const BigComplex& w)
{
    if (z.is_zero()) {
        if (w.re().sign() > 0)
            return BigComplex(std::min(z.precision(), w.precision()));
        throw NumericalError("zero raised to a power with non-positive real part");
    }
    return exp(w * log(z));
}

BigComplex pow(const BigComplex& z, long k)
{
    if (k < 0)
        return BigComplex(1.0, z.precision()) / pow(z, -k);
    BigComplex result(1.0, z.precision());
    BigComplex base = z;
    while (k > 0) {
        if (k & 1)
            result *= base;
        k >>= 1;
        if (k)
            base *= base;
    }
    return result;
}

} // namespace padelab
