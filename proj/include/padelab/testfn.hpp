#pragma once

// Algebraic test functions built from the inverse Zhukovskii map.
//
// For a segment [alpha, beta] let psi(z) = (2z - alpha - beta)/(beta - alpha)
// and phi(z) = psi + sqrt(psi^2 - 1) with |phi| >= 1. A factor on that
// segment is
//
//     prod_i (C_i - 1/phi(z))^{e_i},
//
// and a test function is a product of factors over disjoint segments times an
// optional rational multiplier N(z)/D(z). With |C_i| > 1 every factor is
// holomorphic off its segment and equals prod C_i^{e_i} at infinity.
//
// The second-sheet value at z replaces 1/phi by phi in the factor of the
// segment being crossed; the branch of each power is fixed by continuation
// along a path through the segment's midpoint.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "padelab/big.hpp"
#include "padelab/bigseries.hpp"
#include "padelab/potential.hpp"

namespace padelab {

// A real number kept as its defining decimal (or p/q) text so it can be
// materialized at any precision.
class ExactReal {
public:
    ExactReal() : text_("0") {}
    ExactReal(std::string text); // NOLINT(google-explicit-constructor)
    ExactReal(const char* text) : ExactReal(std::string(text)) {}

    const std::string& text() const { return text_; }
    BigReal at(Precision prec) const { return BigReal::parse(text_, prec); }
    double value() const { return value_; }

private:
    std::string text_;
    double value_ = 0.0;
};

class ExactComplex {
public:
    ExactComplex() : text_("0") {}
    ExactComplex(std::string text); // NOLINT(google-explicit-constructor)
    ExactComplex(const char* text) : ExactComplex(std::string(text)) {}

    const std::string& text() const { return text_; }
    BigComplex at(Precision prec) const { return BigComplex::parse(text_, prec); }
    std::complex<double> value() const { return value_; }

private:
    std::string text_;
    std::complex<double> value_;
};

struct Segment {
    ExactReal alpha;
    ExactReal beta;
};

struct PowerFactor {
    ExactComplex constant; // C_i, |C_i| > 1
    ExactComplex exponent; // e_i
};

struct FactorSpec {
    Segment segment;
    std::vector<PowerFactor> powers;
};

// Coefficients in ascending powers of z; deg numerator <= deg denominator.
struct RationalMultiplier {
    std::vector<ExactComplex> numerator;
    std::vector<ExactComplex> denominator;
};

class TestFunctionSpec {
public:
    // Validates segment ordering and disjointness, |C_i| > 1, the degree
    // condition and that the denominator does not vanish on the segments.
    TestFunctionSpec(std::vector<FactorSpec> factors, std::optional<RationalMultiplier> rational = std::nullopt);

    const std::vector<FactorSpec>& factors() const { return factors_; }
    const std::optional<RationalMultiplier>& rational() const { return rational_; }

    // Canonical key-value serialization; its hash keys the result cache.
    std::string canonical() const;
    std::string hash() const;

private:
    std::vector<FactorSpec> factors_;
    std::optional<RationalMultiplier> rational_;
};

// sqrt((A - 1/phi)(B - 1/phi)) on one segment.
TestFunctionSpec algebraic_spec(ExactReal a, ExactReal b, Segment seg = {"-1", "1"});
// Product of algebraic_spec factors over several segments.
TestFunctionSpec product_spec(const std::vector<std::pair<Segment, std::pair<ExactReal, ExactReal>>>& parts);
// A pure rational function N/D (no branch cut).
TestFunctionSpec rational_spec(RationalMultiplier r);

enum class Sheet { zero = 0, one = 1 };

// phi(psi(z)) on sheet zero, 1/phi(psi(z)) on sheet one. Throws DomainError on
// the open segment.
BigComplex inverse_zhukovskii(const BigComplex& z, const Segment& seg, Sheet sheet);

BigComplex eval_branch(const TestFunctionSpec& spec, const BigComplex& z, Sheet sheet);

// Index of the factor whose cut a second-sheet evaluation at z crosses.
int crossed_factor(const TestFunctionSpec& spec, std::complex<double> z);

// Germ of 1/phi for the segment, the building block of every factor germ.
Germ inverse_zhukovskii_germ(const Segment& seg, int order, Precision prec);

Germ germ_at_infinity(const TestFunctionSpec& spec, int order, Precision prec);

// Sorted union of the spec's segments. Throws DomainError without segments.
IntervalSystem stahl_compact(const TestFunctionSpec& spec);

// Endpoints plus the images of (C + 1/C)/2 for each constant.
std::vector<std::complex<double>> branch_points(const TestFunctionSpec& spec);

struct ClassReport {
    bool in_f = false;
    bool in_extension = false;
    bool unsupported = false;
    std::string reason;
};

ClassReport validate_class(const TestFunctionSpec& spec);

} // namespace padelab
