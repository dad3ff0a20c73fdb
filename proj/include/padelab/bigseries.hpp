#pragma once

// Truncated expansions at infinity, sum_{k=0}^{N} c_k z^{-k}.
//
// A Germ stores c_0..c_N at a single working precision. Arithmetic between
// germs of different orders truncates to the shorter one; germs of
// different precisions are incompatible.

#include <span>
#include <string>
#include <vector>

#include "padelab/big.hpp"

namespace padelab {

class Germ {
public:
    explicit Germ(std::vector<BigComplex> coeffs);

    static Germ constant(const BigComplex& c, int order);
    // 1/z as a germ of the given order.
    static Germ inverse_z(int order, Precision prec);

    int order() const { return static_cast<int>(coeffs_.size()) - 1; }
    Precision precision() const { return coeffs_.front().precision(); }
    const BigComplex& operator[](int k) const { return coeffs_[static_cast<std::size_t>(k)]; }
    std::span<const BigComplex> coeffs() const { return coeffs_; }

    Germ truncated(int order) const;
    // max_k |c_k|
    BigReal max_abs() const;

private:
    std::vector<BigComplex> coeffs_;
};

// Hash of the precision and full-precision coefficient text.
std::string germ_hash(const Germ& g);

Germ series_add(const Germ& a, const Germ& b);
Germ series_sub(const Germ& a, const Germ& b);
Germ series_scale(const Germ& a, const BigComplex& s);
Germ series_mul(const Germ& a, const Germ& b);

// branch * (a / a_0)^alpha, where branch is the chosen value of a_0^alpha.
Germ series_cpow(const Germ& a, const BigComplex& alpha, const BigComplex& branch);
// series_cpow with alpha = 1/2; branch^2 must equal a_0.
Germ series_sqrt(const Germ& a, const BigComplex& branch);
// 1/a, with the reciprocal of a_0 as branch.
Germ series_inverse(const Germ& a);

struct SeriesValue {
    BigComplex value;
    // |c_N| |z|^{-N} / (1 - 1/|z|); infinite when |z| <= 1. A gauge, not a bound.
    double tail_bound;
};

SeriesValue series_eval(const Germ& a, const BigComplex& z);

} // namespace padelab
