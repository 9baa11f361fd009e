#include "susylab/disorder.hpp"

#include <cmath>
#include <string>

#include "susylab/errors.hpp"

namespace susylab::disorder {

double DisorderModel::t_entry(int j, int k) const {
    if (j < 0 || j >= n || k < 0 || k >= n) throw usage_error("t_entry: index out of range");
    switch (kind) {
        case Kind::iid:
            return j == k ? 1.0 : 0.0;
        case Kind::toymodel:
            if (j == k) return 1.0;
            if ((j == pair0 && k == pair1) || (j == pair1 && k == pair0)) return -delta * delta;
            return 0.0;
        case Kind::nonneg_correlated:
            return T(j, k);
    }
    return 0.0;
}

double DisorderModel::row_sum(int j) const {
    if (j < 0 || j >= n) throw usage_error("row_sum: index out of range");
    switch (kind) {
        case Kind::iid:
            return 1.0;
        case Kind::toymodel:
            return (j == pair0 || j == pair1) ? 1.0 - delta * delta : 1.0;
        case Kind::nonneg_correlated:
            return T.row(j).sum();
    }
    return 0.0;
}

DisorderModel make_iid(int n) {
    if (n < 1) throw usage_error("disorder model needs at least one site");
    DisorderModel m;
    m.kind = Kind::iid;
    m.n = n;
    return m;
}

DisorderModel make_correlated(const Eigen::MatrixXd& T) {
    if (T.rows() < 1 || T.rows() != T.cols())
        throw usage_error("correlation matrix must be square and nonempty");
    if (!T.allFinite()) throw usage_error("correlation matrix has non-finite entries");
    if ((T - T.transpose()).cwiseAbs().maxCoeff() > 0.0)
        throw usage_error("correlation matrix must be symmetric");
    for (Eigen::Index k = 0; k < T.cols(); ++k)
        if (T.col(k).sum() <= 0.0)
            throw usage_error("correlation matrix column " + std::to_string(k) +
                              " has non-positive sum");
    DisorderModel m;
    m.kind = Kind::nonneg_correlated;
    m.n = int(T.rows());
    m.T = T;
    return m;
}

DisorderModel make_toymodel(int n, double delta, int pair0, int pair1) {
    if (n < 2) throw usage_error("toymodel needs at least two sites");
    if (!(delta > 0.0 && delta < 1.0)) throw usage_error("toymodel requires 0 < delta < 1");
    if (pair0 < 0 || pair0 >= n || pair1 < 0 || pair1 >= n)
        throw usage_error("toymodel pair out of range");
    if (pair1 - pair0 != 1 && pair0 - pair1 != 1)
        throw usage_error("toymodel pair must be adjacent sites");
    DisorderModel m;
    m.kind = Kind::toymodel;
    m.n = n;
    m.delta = delta;
    m.pair0 = pair0;
    m.pair1 = pair1;
    return m;
}

namespace {
constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace

double RngStream::uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    std::uint64_t h = mix64(seed + kGamma);
    h = mix64(h ^ (stream + kGamma * 2));
    h = mix64(h ^ (counter + kGamma * 3));
    // 53-bit mantissa centered in its cell: never exactly 0 or 1
    return (double(h >> 11) + 0.5) * 0x1p-53;
}

double RngStream::uniform() { return uniform_at(seed, stream, counter++); }

double RngStream::cauchy() { return cauchy_quantile(uniform()); }

double cauchy_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) throw usage_error("cauchy_quantile requires 0 < u < 1");
    const double pi = 2.0 * std::asin(1.0);
    return std::tan(pi * (u - 0.5));
}

double cauchy_char(double t) {
    if (!std::isfinite(t)) throw usage_error("cauchy_char requires finite argument");
    return std::exp(-std::abs(t));
}

std::vector<double> sample_potential(const DisorderModel& model, RngStream& stream) {
    std::vector<double> w(std::size_t(model.n));
    for (auto& wk : w) wk = stream.cauchy();
    switch (model.kind) {
        case Kind::iid:
            return w;
        case Kind::toymodel: {
            std::vector<double> v = w;
            double d2 = model.delta * model.delta;
            v[std::size_t(model.pair0)] -= d2 * w[std::size_t(model.pair1)];
            v[std::size_t(model.pair1)] -= d2 * w[std::size_t(model.pair0)];
            return v;
        }
        case Kind::nonneg_correlated: {
            Eigen::Map<const Eigen::VectorXd> wv(w.data(), model.n);
            Eigen::VectorXd v = model.T * wv;
            return {v.data(), v.data() + v.size()};
        }
    }
    return w;
}

double joint_fourier(const DisorderModel& model, const std::vector<double>& s) {
    if (int(s.size()) != model.n) throw usage_error("joint_fourier: argument size mismatch");
    for (double sj : s)
        if (!std::isfinite(sj)) throw usage_error("joint_fourier: non-finite argument");
    if (model.kind == Kind::iid) {
        double prod = 1.0;
        for (double sj : s) prod *= cauchy_char(sj);
        return prod;
    }
    double total = 0.0;
    for (int k = 0; k < model.n; ++k) {
        double col = 0.0;
        for (int j = 0; j < model.n; ++j) col += model.t_entry(j, k) * s[std::size_t(j)];
        total += std::abs(col);
    }
    return std::exp(-total);
}

}  // namespace susylab::disorder
