#include "susylab/resolvent.hpp"

#include <cmath>
#include <string>

#include "susylab/errors.hpp"

namespace susylab::resolvent {

namespace {
constexpr int kFullInverseLimit = 512;
const double kPi = 2.0 * std::asin(1.0);

void check_probe(const SpectralProbe& probe) {
    if (!(probe.epsilon > 0.0)) throw usage_error("spectral probe requires epsilon > 0");
    if (!std::isfinite(probe.E) || !std::isfinite(probe.E_tilde) || !std::isfinite(probe.epsilon))
        throw usage_error("spectral probe has non-finite fields");
}

// min/max |U_ii| ratio as a cheap singularity witness
void check_pivots(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu) {
    Eigen::VectorXd mags = lu.matrixLU().diagonal().cwiseAbs();
    double lo = mags.minCoeff(), hi = mags.maxCoeff();
    if (!(lo > hi * 1e-300) || !std::isfinite(hi))
        throw numeric_error("singular shifted Hamiltonian, pivot ratio " +
                            std::to_string(lo / hi));
}
}  // namespace

cplx log_det(const Eigen::MatrixXcd& a) {
    if (a.rows() != a.cols() || a.rows() < 1) throw usage_error("log_det needs a square matrix");
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    check_pivots(lu);
    cplx sum = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) sum += std::log(lu.matrixLU()(i, i));
    if (lu.permutationP().determinant() < 0) sum += cplx(0.0, kPi);
    return sum;
}

GreenResult green(const lattice::Hamiltonian& h, const SpectralProbe& probe,
                  const EntryRequest& request) {
    check_probe(probe);
    const int n = int(h.H.rows());
    Eigen::MatrixXcd a = -h.H;
    a.diagonal().array() += probe.z();

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    check_pivots(lu);

    GreenResult out;
    out.logdet = 0.0;
    for (int i = 0; i < n; ++i) out.logdet += std::log(lu.matrixLU()(i, i));
    if (lu.permutationP().determinant() < 0) out.logdet += cplx(0.0, kPi);

    for (const auto& [j, k] : request)
        if (j < 0 || j >= n || k < 0 || k >= n)
            throw usage_error("green: requested entry out of range");

    out.trace = 0.0;
    if (n <= kFullInverseLimit) {
        Eigen::MatrixXcd g = lu.inverse();
        out.trace = g.trace();
        for (const auto& [j, k] : request) out.entries.push_back(g(j, k));
    } else {
        // column solves; one pass covers the trace, a second the requests
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
        for (int k = 0; k < n; ++k) {
            e[k] = 1.0;
            out.trace += lu.solve(e)[k];
            e[k] = 0.0;
        }
        for (const auto& [j, k] : request) {
            e[k] = 1.0;
            out.entries.push_back(lu.solve(e)[j]);
            e[k] = 0.0;
        }
    }
    for (cplx g : out.entries) out.abs2.push_back(std::norm(g));
    return out;
}

cplx gen_function(const lattice::Hamiltonian& h, const SpectralProbe& probe) {
    check_probe(probe);
    Eigen::MatrixXcd num = -h.H;
    num.diagonal().array() += probe.z();
    Eigen::MatrixXcd den = -h.H;
    den.diagonal().array() += probe.z_tilde();
    return std::exp(log_det(num) - log_det(den));
}

std::vector<double> dos_curve(const lattice::Hamiltonian& h, const std::vector<double>& e_grid,
                              double epsilon) {
    const int n = int(h.H.rows());
    std::vector<double> rho;
    rho.reserve(e_grid.size());
    for (double e : e_grid) {
        SpectralProbe probe;
        probe.E = e;
        probe.epsilon = epsilon;
        rho.push_back(-green(h, probe).trace.imag() / (kPi * n));
    }
    return rho;
}

std::vector<double> eig_spectrum(const lattice::Hamiltonian& h) {
    const int n = int(h.H.rows());
    if (h.H.imag().cwiseAbs().maxCoeff() != 0.0)
        throw usage_error("eig_spectrum requires a real Hamiltonian");
    Eigen::MatrixXd hr = h.H.real();
    if ((hr - hr.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + hr.cwiseAbs().maxCoeff()))
        throw usage_error("eig_spectrum requires a symmetric Hamiltonian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hr);
    if (es.info() != Eigen::Success) throw numeric_error("eigensolver failed to converge");
    return {es.eigenvalues().data(), es.eigenvalues().data() + n};
}

}  // namespace susylab::resolvent
