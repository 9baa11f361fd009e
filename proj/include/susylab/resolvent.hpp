#pragma once

// Green's functions G(z) = ((E + i eps) - H)^{-1}, the determinant-ratio
// generating function, and the smoothed density of states.

#include <utility>
#include <vector>

#include "susylab/lattice.hpp"

namespace susylab::resolvent {

using cplx = lattice::cplx;

struct SpectralProbe {
    double E = 0.0;
    double E_tilde = 0.0;  // generating function only
    double epsilon = 0.0;
    double lambda = 0.0;

    cplx z() const { return {E, epsilon}; }
    cplx z_tilde() const { return {E_tilde, epsilon}; }
};

struct GreenResult {
    cplx trace;                 // Tr G, Im < 0 for eps > 0
    std::vector<cplx> entries;  // requested G_jk in request order
    std::vector<double> abs2;   // |G_jk|^2 alongside
    cplx logdet;                // log det((E + i eps) I - H)
};

using EntryRequest = std::vector<std::pair<int, int>>;

GreenResult green(const lattice::Hamiltonian& h, const SpectralProbe& probe,
                  const EntryRequest& request = {});

// Complex log-determinant from an LU factorization: sum of log U_ii plus
// i*pi when the pivot permutation is odd. Branch offsets are harmless
// downstream because only exp(differences) is ever formed.
cplx log_det(const Eigen::MatrixXcd& a);

// det((E+ie)I - H) / det((E~+ie)I - H), evaluated in log space
cplx gen_function(const lattice::Hamiltonian& h, const SpectralProbe& probe);

// -(1 / pi N) Im Tr G(E + i eps) per grid point
std::vector<double> dos_curve(const lattice::Hamiltonian& h, const std::vector<double>& e_grid,
                              double epsilon);

// eigenvalues of a real-symmetric H, ascending
std::vector<double> eig_spectrum(const lattice::Hamiltonian& h);

}  // namespace susylab::resolvent
