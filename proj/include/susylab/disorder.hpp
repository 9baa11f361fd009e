#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace susylab::disorder {

// Linearly correlated Cauchy potential V = T W with W_k iid standard Cauchy.
enum class Kind { iid, nonneg_correlated, toymodel };

struct DisorderModel {
    Kind kind = Kind::iid;
    int n = 0;

    // toymodel(delta, pair): T is the identity except T_{p0,p1} = T_{p1,p0} = -delta^2,
    // kept implicit so no N x N matrix is ever materialized.
    double delta = 0.0;
    int pair0 = -1;
    int pair1 = -1;

    // dense correlation matrix, used only by nonneg_correlated
    Eigen::MatrixXd T;

    double t_entry(int j, int k) const;
    // row sum T̂_jj = Σ_k T_jk; strictly positive for every valid model
    double row_sum(int j) const;
};

DisorderModel make_iid(int n);
DisorderModel make_correlated(const Eigen::MatrixXd& T);
DisorderModel make_toymodel(int n, double delta, int pair0, int pair1);

// Counter-based stream: (seed, stream, counter) -> sample is a pure function,
// so samples are reproducible regardless of evaluation order or thread count.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::uint64_t counter = 0;

    static double uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

    double uniform();  // strictly inside (0,1); advances counter
    double cauchy();
};

// inverse CDF of the standard Cauchy law, tan(pi (u - 1/2))
double cauchy_quantile(double u);

// characteristic function E[e^{itW}] = e^{-|t|} of a standard Cauchy variable
double cauchy_char(double t);

std::vector<double> sample_potential(const DisorderModel& model, RngStream& stream);

// E[e^{i Σ_j V_j s_j}] = exp(-Σ_k |Σ_j T_jk s_j|), real and in (0,1]
double joint_fourier(const DisorderModel& model, const std::vector<double>& s);

}  // namespace susylab::disorder
