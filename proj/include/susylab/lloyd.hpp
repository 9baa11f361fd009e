#pragma once

// Closed forms for Cauchy-averaged resolvent traces (imaginary on-site
// shifts), the pair-correlated model: a 2D quadrature oracle, the sign-region
// decomposition of the averaged trace with its boundary remainder, error
// sweeps in the correlation strength, and checks of the resolvent decay and
// Schur-complement bounds that control the remainder.

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "susylab/disorder.hpp"
#include "susylab/lattice.hpp"
#include "susylab/resolvent.hpp"

namespace susylab::lloyd {

using cplx = std::complex<double>;

// Tr((E + i eps) I + i lambda diag(shift) - H0)^{-1}: the disorder average of
// the resolvent trace once each Cauchy variable has been integrated out, with
// one nonnegative shift entry per site (the row sums of the correlation
// matrix; all ones in the iid case). Building block for the exact formulas
// and the reference values of toymodel_error_sweep. Requires eps > 0 or a
// strictly positive shift with lambda > 0, so the matrix is nonsingular.
cplx shifted_trace(const lattice::LatticeSpec& spec, const std::vector<double>& shift,
                   const resolvent::SpectralProbe& probe);

// Averaged trace for iid or nonnegatively correlated disorder: shifted_trace
// with shift_j = sum_k T_jk. The pair-correlated model has a negative entry
// and does not reduce to a shift; it is rejected with a usage error (use
// toymodel_oracle / toymodel_decomposition instead).
cplx exact_trace(const lattice::LatticeSpec& spec, const disorder::DisorderModel& model,
                 const resolvent::SpectralProbe& probe);

// Averaged determinant-ratio generating function for the same models:
// det((E + i eps) I + i lambda That - H0) / det(at E_tilde), computed in log
// space. Returns exactly 1 when E_tilde == E. Its -d/dE_tilde derivative at
// E_tilde = E is exact_trace.
cplx exact_genfun(const lattice::LatticeSpec& spec, const disorder::DisorderModel& model,
                  const resolvent::SpectralProbe& probe);

// Averaged trace for the pair-correlated model, evaluated directly: every
// site off the pair integrates to an i*lambda shift, and the remaining two
// Cauchy variables are averaged by nested tan-substituted adaptive
// quadrature, each evaluation being a rank-2 update of a precomputed
// inverse. Requires eps > 0 (the pair sites carry no shift of their own).
// Throws numeric_error if the quadrature budget is exhausted.
cplx toymodel_oracle(const lattice::LatticeSpec& spec, double delta,
                     const resolvent::SpectralProbe& probe);

// Averaged trace of the two-site pair-correlated model split by the sign
// pattern of (r1^2 - delta^2 r2^2, r2^2 - delta^2 r1^2) in polar radii: three
// absolutely convergent region integrals (the quadratic-form determinant
// prefactor times a Bessel-kernel radial integral) plus the remainder
// collected on the region boundary r1 = delta r2, which carries an explicit
// delta^2 weight. total = region_pp + region_pm + region_mp + remainder and
// agrees with toymodel_oracle as eps -> 0.
struct ToymodelDecomposition {
    cplx region_pp;         // both differences positive (bulk region)
    cplx region_pm;         // r1 dominant: r1 > r2 / delta
    cplx region_mp;         // r2 dominant: r1 < delta r2
    cplx remainder;         // boundary term, O(delta^2)
    cplx total;             // sum of the four
    double quad_error = 0;  // accumulated absolute quadrature error estimate
};

// Only the two-site lattice is supported (usage error otherwise); epsilon > 0
// sharpens the match with toymodel_oracle at the same epsilon.
ToymodelDecomposition toymodel_decomposition(const lattice::LatticeSpec& spec, double delta,
                                             double lambda, double energy, double epsilon = 0.0);

struct SweepRow {
    double delta = 0.0;
    double deviation = 0.0;     // |oracle - shifted reference| / |reference|
    double mc_deviation = 0.0;  // Monte Carlo counterpart (0 when samples == 0)
    double std_error = 0.0;     // MC standard error / |reference| (0 when samples == 0)
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double floor = 0.0;  // deviation at delta = 0: pure volume/quadrature noise
    double slope = 0.0;  // log-log slope of (deviation - floor) vs delta over delta > 0
};

// Relative deviation of the pair-correlated average from the row-sum-shifted
// closed form, per delta. The delta = 0 deviation is subtracted as the
// volume floor before the least-squares slope fit; the expected slope is 2.
// samples > 0 adds a Monte Carlo cross-check per row with the given sample
// count. probe supplies E and epsilon; its lambda, if nonzero, must agree
// with the lambda argument. Requires delta * (1 + 1/lambda) < 1 for every
// delta (the regime where the quadratic error law applies).
SweepResult toymodel_error_sweep(const lattice::LatticeSpec& spec,
                                 const std::vector<double>& deltas, double lambda,
                                 const resolvent::SpectralProbe& probe, long long samples = 0);

// Block decomposition of the quadratic forms behind the pair-correlated
// average: the 2x2 pair block per sign region, the bulk block on the
// remaining sites, their coupling, and the Schur complements after the bulk
// is integrated out. Pair sites are 0 and 1 (adjacent by construction).
struct ToymodelBlocks {
    double delta = 0.0;
    double lambda = 0.0;
    double energy = 0.0;
    double epsilon = 0.0;

    Eigen::Matrix2cd a0;               // bare pair block, no disorder shift
    Eigen::Matrix2cd a_pp;             // pair block, both-positive region
    Eigen::Matrix2cd a_pm;             // pair block, r1-dominant region
    Eigen::Matrix2cd a_mp;             // pair block, r2-dominant region
    Eigen::MatrixXcd bulk;             // block on the lattice minus the pair
    Eigen::MatrixXcd coupling;         // 2 x (N-2) pair-to-rest adjacency
    Eigen::MatrixXcd c_pp, c_pm, c_mp; // full matrices, pair rows/cols first
    Eigen::Matrix2cd s_pp, s_pm, s_mp; // Schur complements A + D B^{-1} D^T
    Eigen::Matrix2cd s0;               // same built on the bare pair block
    Eigen::Matrix2cd bulk_feedback;    // I - D B^{-2} D^T
    Eigen::Matrix2cd shift_gap;        // a_mp - a_pp = 2 lambda diag(-1, delta^2)

    // Phase-dressed direction (e^{i th1} delta v, e^{i th2}); the shift_gap
    // quadratic form on it equals 2 lambda delta^2 (1 - v^2) for |v| <= 1.
    Eigen::Vector2cd v_theta(double theta1, double theta2, double v = 1.0) const;
};

// Requires at least 3 sites (so the bulk is nonempty), delta < 1, and
// lambda + epsilon > 0 (the bulk block must be invertible).
ToymodelBlocks make_toymodel_blocks(const lattice::LatticeSpec& spec, double delta, double lambda,
                                    double energy, double epsilon = 0.0);

// Entrywise exponential decay of the inverse bulk block B = i(H0' - (E + i
// lambda)) on the lattice minus the pair: |B^{-1}_ij| <= (2/lambda)
// exp(-mu dist(i,j)) with mu = lambda eta / (lambda + 4 d e^eta), plus the
// quadratic-form lower bound Re(f* B^{-1} f) >= lambda / (lambda^2 + (4d)^2)
// per unit norm, sampled on random unit vectors.
struct DecayBoundReport {
    bool passed = false;
    double decay_rate = 0.0;    // mu
    double worst_ratio = 0.0;   // max |B^{-1}_ij| / bound(i,j); passing means <= 1
    int worst_i = -1;           // site indices attaining worst_ratio
    int worst_j = -1;
    double quad_margin = 0.0;   // min_f Re(f* B^{-1} f) - lambda/(lambda^2+(4d)^2)
};

DecayBoundReport combes_thomas_check(const lattice::LatticeSpec& spec, double lambda,
                                     double energy, double eta, int n_vectors = 100,
                                     std::uint64_t seed = 611953);

// Positivity and trace bounds on the Schur complements: smallest eigenvalue
// of the hermitian part of S_pp (claimed >= lambda/2 for delta <= 1/2), the
// quadratic-form margin on random unit vectors, the determinant
// factorization det C = det B * det S for every region, and the empirical
// constant relating |Tr C_pp^{-1}| to N lambda / (lambda + 1)^2.
struct SchurReport {
    bool passed = false;
    double min_re_eig_schur = 0.0;      // eigenvalue floor of Herm(S_pp)
    double min_re_eig_bulk = 0.0;       // eigenvalue floor of Herm(bulk)
    double quad_margin = 0.0;           // min_f Re(f* S_pp f) - lambda/2
    double k_empirical = 0.0;           // N lambda / (|Tr C_pp^{-1}| (lambda+1)^2)
    double det_identity_rel_err = 0.0;  // worst |det C - det B det S| / |det C|
};

// Requires delta <= 1/2 (the regime of the lambda/2 bound).
SchurReport schur_bounds_check(const lattice::LatticeSpec& spec, double delta, double lambda,
                               double energy, int n_vectors = 100, std::uint64_t seed = 20260819);

}  // namespace susylab::lloyd
