#pragma once

// Supervectors Phi = (z, chi), the supersymmetric Gaussian representation
// det A2 / det A1 = I(e^{-Phi* A Phi}), and the polar-coordinate
// decomposition I(f) = sum_alpha I_alpha(f). Grassmann directions are
// integrated symbolically; the remaining radial/angular integrals run on
// adaptive quadrature.

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "susylab/grassmann.hpp"
#include "susylab/quadrature.hpp"

namespace susylab::superpolar {

using cplx = std::complex<double>;
using grassmann::GrassmannElement;
using quadrature::QuadOptions;

// n-site supervector. Site j (0-based) owns the odd generators 2j+1 (chi_j)
// and 2j+2 (chibar_j) of A_{2n}. z entries are even elements: numeric
// scalars in the flat chart, r - rhobar rho / 2 times a phase in a polar
// chart, zero at sites a chart removes.
struct SuperVector {
    int sites = 0;
    std::vector<GrassmannElement> z, zbar, chi, chibar;

    // Phi*_j Phi_j = zbar_j z_j + chibar_j chi_j (even, body >= 0 on charts)
    GrassmannElement pair(int j) const;
    // zbar A_bose z + chibar A_fermi chi
    GrassmannElement quadratic(const Eigen::MatrixXcd& a_bose,
                               const Eigen::MatrixXcd& a_fermi) const;
};

// Chart constructors. flat: z_j given directly. polar: alpha_j = 1 pins every
// variable of site j to zero; alpha_j = 0 gives z_j = e^{i theta_j}(r_j -
// rhobar_j rho_j / 2), chi_j = sqrt(r_j) rho_j (the sqrt(r) rides along as a
// coefficient on the odd generator).
SuperVector flat_chart_point(int sites, const std::vector<cplx>& z);
SuperVector polar_chart_point(int sites, const std::vector<int>& alpha,
                              const std::vector<double>& r, const std::vector<double>& theta);

enum class AngularForm {
    autodetect,   // probe the reduced integrand numerically
    independent,  // no angle dependence: angular integrals become 2 pi factors
    relative,     // two sites, depends on theta_1 - theta_2 only
    general       // full tensor-product angular quadrature
};

struct SusyIntegrand {
    int sites = 1;
    std::function<GrassmannElement(const SuperVector&)> eval;
    AngularForm angular = AngularForm::autodetect;
    // Optional scalar factor applied after the polar substitution; receives
    // the radii (zero at sites removed by alpha). Lives outside eval so
    // factors that are only piecewise smooth, like Fourier transforms of
    // heavy-tailed laws, never meet the smooth-lift machinery. Rejected by
    // flat_integral, where the corresponding factor would need a lift.
    std::function<double(const std::vector<double>&)> radial_weight;
    bool split_at_equal_radii = false;  // seed quadrature breakpoints at r_i = r_j
};

inline QuadOptions default_quad() {
    QuadOptions opt;
    opt.rel_tol = 1e-8;
    opt.abs_tol = 1e-12;
    return opt;
}

// I(f) = int prod_j (2 pi)^{-1} dzbar_j dz_j dchibar_j dchi_j f(Phi*, Phi),
// for 1 or 2 sites.
cplx flat_integral(const SusyIntegrand& f, const QuadOptions& opt = default_quad());

struct PolarTerm {
    std::vector<int> alpha;  // one flag per site; 1 = site pinned to zero
    cplx value;
};
struct PolarDecomposition {
    std::vector<PolarTerm> terms;  // binary counting order, site 0 fastest
    cplx total;
};

// I_alpha(f) = pi^{-|1-alpha|} int (dr dtheta drhobar drho)^{1-alpha}
// f(Psi_alpha), with flat dr measure, plus total = sum_alpha I_alpha.
PolarDecomposition polar_decomposition(const SusyIntegrand& f,
                                       const QuadOptions& opt = default_quad());

// Checks det A2 / det A1 = I(e^{-Phi* A Phi}) for Re A1 positive definite,
// and the moment formula I(zbar_k z_j e^{-Phi* A1^ Phi}) = (A1^{-1})_{jk}.
struct RepresentationReport {
    cplx integral;
    cplx det_ratio;        // LU reference
    double det_rel_error;
    Eigen::MatrixXcd entry_integral;
    Eigen::MatrixXcd inverse_ref;
    double entry_max_error;
    bool pass;             // det 1e-8 relative, entries 1e-6 absolute
};
RepresentationReport verify_susy_representation(const Eigen::MatrixXcd& a1,
                                                const Eigen::MatrixXcd& a2,
                                                const QuadOptions& opt = default_quad());

// Single-site second moment: the two-copy polar representation of
// E[|G(E+i eps)_{11}|^2] under Cauchy disorder versus direct quadrature of
// E[|E + i eps - lambda v|^{-2}]. The Fourier factor becomes
// e^{-lambda |r^2 - rtilde^2|} once the polar substitution makes its
// argument real.
struct G2Report {
    double value;          // real part of the decomposition total
    double imag_residue;   // |imaginary part|, should be at noise level
    double oracle;
    double rel_error;
    PolarDecomposition decomposition;
    bool pass;             // 1e-6 relative
};
G2Report verify_g2_single_site(double E, double eps, double lambda, int sites = 1,
                               const QuadOptions& opt = default_quad());

}  // namespace susylab::superpolar
