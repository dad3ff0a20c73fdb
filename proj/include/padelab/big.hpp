#pragma once

// Arbitrary-precision real and complex scalars on top of MPFR.
//
// Every value carries its own binary precision. Binary operations produce
// a result at the smaller of the two operand precisions, and any operation
// that would yield NaN or an infinity throws NumericalError.

#include <complex>
#include <string>
#include <string_view>

#include <mpfr.h>

namespace padelab {

using Precision = long;

inline constexpr Precision kMinPrecision = 64;
inline constexpr Precision kDefaultPrecision = 512;

class BigReal {
public:
    explicit BigReal(Precision prec = kDefaultPrecision);
    BigReal(double v, Precision prec);
    BigReal(long v, Precision prec);
    BigReal(int v, Precision prec) : BigReal(static_cast<long>(v), prec) {}

    // Accepts decimal and scientific notation ("-1.25e-3") and exact
    // fractions ("1/3"). Throws DomainError on malformed text.
    static BigReal parse(std::string_view text, Precision prec);
    static BigReal pi(Precision prec);

    BigReal(const BigReal& other);
    BigReal(BigReal&& other) noexcept;
    BigReal& operator=(const BigReal& other);
    BigReal& operator=(BigReal&& other) noexcept;
    ~BigReal();

    Precision precision() const { return mpfr_get_prec(v_); }
    // Same value rounded to a new precision.
    BigReal with_precision(Precision prec) const;

    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    // Shortest decimal text that reads back to the identical value at the
    // same precision.
    std::string to_string() const;
    // Decimal text with a fixed number of significant digits.
    std::string to_string(int digits) const;

    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }

    mpfr_srcptr get() const { return v_; }
    mpfr_ptr get() { return v_; }

    BigReal& operator+=(const BigReal& o);
    BigReal& operator-=(const BigReal& o);
    BigReal& operator*=(const BigReal& o);
    BigReal& operator/=(const BigReal& o);
    BigReal operator-() const;

    friend BigReal operator+(const BigReal& a, const BigReal& b);
    friend BigReal operator-(const BigReal& a, const BigReal& b);
    friend BigReal operator*(const BigReal& a, const BigReal& b);
    friend BigReal operator/(const BigReal& a, const BigReal& b);
    friend BigReal operator*(const BigReal& a, double b);
    friend BigReal operator*(double a, const BigReal& b) { return b * a; }
    friend BigReal operator/(const BigReal& a, double b);
    friend BigReal operator+(const BigReal& a, double b);
    friend BigReal operator-(const BigReal& a, double b);

    friend bool operator<(const BigReal& a, const BigReal& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
    friend bool operator>(const BigReal& a, const BigReal& b) { return mpfr_greater_p(a.v_, b.v_) != 0; }
    friend bool operator<=(const BigReal& a, const BigReal& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
    friend bool operator>=(const BigReal& a, const BigReal& b) { return mpfr_greaterequal_p(a.v_, b.v_) != 0; }
    friend bool operator==(const BigReal& a, const BigReal& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
    friend bool operator<(const BigReal& a, double b) { return mpfr_cmp_d(a.v_, b) < 0; }
    friend bool operator>(const BigReal& a, double b) { return mpfr_cmp_d(a.v_, b) > 0; }

    // Asserts finiteness after an in-place MPFR call on get().
    void check_finite(const char* what) const;

private:
    void release() noexcept;
    mpfr_t v_;
};

BigReal abs(const BigReal& x);
BigReal sqrt(const BigReal& x);
BigReal log(const BigReal& x);
BigReal exp(const BigReal& x);
BigReal sin(const BigReal& x);
BigReal cos(const BigReal& x);
BigReal atan2(const BigReal& y, const BigReal& x);
BigReal hypot(const BigReal& x, const BigReal& y);
// x * 2^e, exact.
BigReal ldexp(const BigReal& x, long e);
// Rounds to the nearest integer, ties away from zero.
BigReal round(const BigReal& x);
BigReal min_precision_zero(const BigReal& a, const BigReal& b);

class BigComplex {
public:
    explicit BigComplex(Precision prec = kDefaultPrecision) : re_(prec), im_(prec) {}
    BigComplex(BigReal re, BigReal im);
    explicit BigComplex(BigReal re);
    BigComplex(std::complex<double> z, Precision prec);
    BigComplex(double re, Precision prec) : re_(re, prec), im_(0.0, prec) {}

    // Accepts "a", "bi", "a+bi", "a-bi", "i", "-i"; each real part may be a
    // decimal or a fraction p/q.
    static BigComplex parse(std::string_view text, Precision prec);

    const BigReal& re() const { return re_; }
    const BigReal& im() const { return im_; }
    BigReal& re() { return re_; }
    BigReal& im() { return im_; }

    Precision precision() const { return std::min(re_.precision(), im_.precision()); }
    BigComplex with_precision(Precision prec) const;
    std::complex<double> to_complex() const { return {re_.to_double(), im_.to_double()}; }
    // Round-trippable "re,im" pair of decimal strings.
    std::string to_string() const;
    std::string to_string(int digits) const;

    bool is_zero() const { return re_.is_zero() && im_.is_zero(); }

    BigComplex& operator+=(const BigComplex& o);
    BigComplex& operator-=(const BigComplex& o);
    BigComplex& operator*=(const BigComplex& o);
    BigComplex& operator/=(const BigComplex& o);
    BigComplex& operator*=(const BigReal& o);
    BigComplex operator-() const { return BigComplex(-re_, -im_); }

    friend BigComplex operator+(BigComplex a, const BigComplex& b) { return a += b; }
    friend BigComplex operator-(BigComplex a, const BigComplex& b) { return a -= b; }
    friend BigComplex operator*(const BigComplex& a, const BigComplex& b);
    friend BigComplex operator/(const BigComplex& a, const BigComplex& b);
    friend BigComplex operator*(BigComplex a, const BigReal& b) { return a *= b; }
    friend BigComplex operator*(const BigReal& a, BigComplex b) { return b *= a; }
    friend BigComplex operator/(const BigComplex& a, const BigReal& b);

private:
    BigReal re_;
    BigReal im_;
};

// acc += a * b without extra temporaries at the call site.
void mul_add(BigComplex& acc, const BigComplex& a, const BigComplex& b);

BigReal abs(const BigComplex& z);
BigReal norm(const BigComplex& z); // |z|^2
BigReal arg(const BigComplex& z);
BigComplex conj(const BigComplex& z);
BigComplex exp(const BigComplex& z);
// Principal logarithm, imaginary part in (-pi, pi]. Throws on zero.
BigComplex log(const BigComplex& z);
// Principal square root (non-negative real part).
BigComplex sqrt(const BigComplex& z);
// Principal power exp(w * Log z); 0^w = 0 for Re w > 0.
BigComplex pow(const BigComplex& z, const BigComplex& w);
BigComplex pow(const BigComplex& z, long k);

} // namespace padelab
