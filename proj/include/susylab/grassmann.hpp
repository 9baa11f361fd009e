#pragma once

// Finite-dimensional complex Grassmann algebra on up to 64 anticommuting
// generators, with left/right derivatives, Berezin integration, lifts of
// smooth scalar functions to even elements, Gaussian Berezin integrals and
// superdeterminants. Everything is exact symbolic algebra over
// std::complex<double> coefficients; no truncation happens anywhere.

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace susylab::grassmann {

using cplx = std::complex<double>;

// Element of the Grassmann algebra A_q. A monomial is a subset of the
// generators {1..q}, stored as a bitmask (bit j-1 <=> generator j) with the
// factors in ascending index order; signs from reordering are folded into the
// coefficients at insertion time. Terms are kept mask-sorted and never store
// an exact zero coefficient.
class GrassmannElement {
public:
    struct Term {
        std::uint64_t mask;
        cplx coeff;
    };

    GrassmannElement() : q_(0) {}
    explicit GrassmannElement(int q);

    static GrassmannElement scalar(int q, cplx c);
    static GrassmannElement generator(int q, int j);                 // j in [1, q]
    static GrassmannElement monomial(int q, std::uint64_t mask, cplx c);

    int generators() const { return q_; }
    const std::vector<Term>& terms() const { return terms_; }
    std::size_t term_count() const { return terms_.size(); }

    cplx coeff(std::uint64_t mask) const;                            // 0 if absent
    cplx body() const { return coeff(0); }
    GrassmannElement nilpotent_part() const;

    bool is_zero() const { return terms_.empty(); }
    bool is_scalar() const;
    // Degree parity. The zero element counts as both even and odd.
    bool is_even() const;
    bool is_odd() const;
    int max_degree() const;

    GrassmannElement operator-() const;
    GrassmannElement& operator+=(const GrassmannElement& rhs);
    GrassmannElement& operator-=(const GrassmannElement& rhs);
    GrassmannElement& operator*=(cplx s);

    friend GrassmannElement operator+(GrassmannElement a, const GrassmannElement& b) { return a += b; }
    friend GrassmannElement operator-(GrassmannElement a, const GrassmannElement& b) { return a -= b; }
    friend GrassmannElement operator*(GrassmannElement a, cplx s) { return a *= s; }
    friend GrassmannElement operator*(cplx s, GrassmannElement a) { return a *= s; }

    // l-infinity distance on coefficients; both operands padded with zeros.
    friend double max_coeff_distance(const GrassmannElement& a, const GrassmannElement& b);

private:
    void prune();
    friend GrassmannElement wedge(const GrassmannElement&, const GrassmannElement&);
    friend GrassmannElement derivative_left(const GrassmannElement&, int);
    friend GrassmannElement derivative_right(const GrassmannElement&, int);

    int q_;
    std::vector<Term> terms_;
};

// Associative anticommuting product. Operands must live in the same algebra.
GrassmannElement wedge(const GrassmannElement& a, const GrassmannElement& b);
inline GrassmannElement operator*(const GrassmannElement& a, const GrassmannElement& b) { return wedge(a, b); }

// Left derivative d/d chi_j: chi^I = sigma_l chi_j chi^{I\j}  ->  sigma_l chi^{I\j}.
GrassmannElement derivative_left(const GrassmannElement& a, int j);
// Right derivative: chi^I = sigma_r chi^{I\j} chi_j  ->  sigma_r chi^{I\j}.
GrassmannElement derivative_right(const GrassmannElement& a, int j);

// Berezin integral with measure d chi_{order[0]} d chi_{order[1]} ... :
// iterated left derivatives applied innermost-first, i.e. order.back() acts
// first. Repeated indices are rejected.
GrassmannElement berezin(const GrassmannElement& a, std::span<const int> order);
GrassmannElement berezin(const GrassmannElement& a, std::initializer_list<int> order);

// A scalar function together with as many derivatives as the caller can
// supply. deriv(k, x) must return f^(k)(x) for 0 <= k <= max_order.
struct ScalarFunction {
    int max_order;
    std::function<cplx(int k, cplx x)> deriv;
};

ScalarFunction exp_function();        // all orders available
ScalarFunction identity_function();   // f(x) = x

// Lift of f to an even element a = b + n via the finite Taylor series
// f(a) = sum_k f^(k)(b)/k! n^k. Rejects odd a and runs out of derivatives
// only if the nilpotency order of n exceeds f.max_order.
GrassmannElement lift_function(const ScalarFunction& f, const GrassmannElement& a);

// Gaussian Berezin integral: builds A_{2n} with generators chi_j <-> 2j-1,
// chibar_j <-> 2j, evaluates int dchibar_1 dchi_1 ... e^{-chibar M chi}.
// Equals det M exactly. n <= 8.
cplx grassmann_gaussian(const Eigen::MatrixXcd& M);

// Supermatrix with (p|q) block structure over A_gens. Entries in the
// bose-bose block a and fermi-fermi block b must be even, entries in the
// off-diagonal blocks rho (bose-fermi) and sigma (fermi-bose) odd.
class SuperMatrix {
public:
    SuperMatrix(int p, int q, int gens);

    int bose_dim() const { return p_; }
    int fermi_dim() const { return fq_; }
    int dim() const { return p_ + fq_; }
    int generators() const { return gens_; }

    GrassmannElement& at(int i, int j);
    const GrassmannElement& at(int i, int j) const;

    // True when every entry has the parity its block demands.
    bool has_valid_parity() const;

private:
    int p_, fq_, gens_;
    std::vector<GrassmannElement> entries_;
};

SuperMatrix supermatrix_product(const SuperMatrix& A, const SuperMatrix& B);

// Multiplicative inverse of an even element with nonzero body.
GrassmannElement even_inverse(const GrassmannElement& c);

// Determinant of a square matrix of even elements (cofactor expansion).
GrassmannElement even_matrix_determinant(const std::vector<GrassmannElement>& m, int n);

// Berezinian: sdet M = det(a - sigma b^{-1} rho) * det(b)^{-1}. The body of
// det(b) must be nonzero. Multiplicative: sdet(MN) = sdet(M) sdet(N).
GrassmannElement sdet(const SuperMatrix& M);

}
