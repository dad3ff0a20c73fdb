#pragma once

// Diagonal Padé pairs at infinity.
//
// For f = sum c_k z^{-k}, Q_n = sum_{j<=k_n} q_j z^j solves the Hankel system
//
//     sum_{j=0}^{n} q_j c_{i+j} = 0,   i = 1..n,
//
// and P_n is the polynomial part of Q_n f, p_t = sum_j q_j c_{j-t}. Q_n is
// the monic vector of least degree in the nullspace.

#include <climits>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "padelab/big.hpp"
#include "padelab/bigseries.hpp"
#include "padelab/errors.hpp"
#include "padelab/testfn.hpp"

namespace padelab {

struct PadePair {
    int n = 0;
    int k_n = 0;
    bool unique = true;
    std::vector<BigComplex> p; // ascending, size n + 1
    std::vector<BigComplex> q; // ascending, size k_n + 1, q[k_n] = 1
    Precision precision = kDefaultPrecision;
    std::string germ_hash;
};

// Needs germ order >= 2n. Throws DomainError on a short or numerically zero
// germ and NumericalError when the computed pair fails its order condition.
PadePair pade_pair(const Germ& germ, int n);

// Regenerates the germ at doubled precision after a NumericalError, at most
// max_escalations times.
using GermSource = std::function<Germ(Precision)>;
PadePair pade_pair_escalating(const GermSource& source, int n, Precision start, int max_escalations = 4);

// Returned by residual_order when every available tail coefficient vanishes.
inline constexpr int kFullTail = INT_MAX;

// Largest m with the coefficients of z^0..z^{-(m-1)} of Q f - P below
// 2^{-P/2} |c| max(1, |q|); 0 if a nonnegative power already fails.
int residual_order(const Germ& germ, const PadePair& pair);

BigComplex poly_eval(std::span<const BigComplex> coeffs, const BigComplex& z);
BigComplex approximant(const PadePair& pair, const BigComplex& z);

// Q_n(z) f(z^{(sheet)}) - P_n(z) with closed-form branch values.
BigComplex error_at(const PadePair& pair, const TestFunctionSpec& spec, const BigComplex& z, Sheet sheet);

struct Root {
    BigComplex location;
    int multiplicity = 1;
};

struct ZeroMultiset {
    std::vector<Root> roots;
    int degree() const;
};

class RootFindingError : public NumericalError {
public:
    RootFindingError(const std::string& msg, ZeroMultiset partial)
        : NumericalError(msg), partial_(std::move(partial)) {}
    const ZeroMultiset& partial() const { return partial_; }

private:
    ZeroMultiset partial_;
};

// All roots of sum a_k z^k (ascending), at the coefficients' precision P.
// Each root satisfies |poly(r)| <= 2^{-P/4} max|a_k| max(1,|r|)^deg; roots
// closer than 2^{-P/8} are merged into one with multiplicity.
ZeroMultiset roots(std::span<const BigComplex> coeffs);

// Monic polynomial with the given zeros, ascending coefficients.
std::vector<BigComplex> from_roots(const ZeroMultiset& zeros, Precision prec);

} // namespace padelab
