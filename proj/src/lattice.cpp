#include "susylab/lattice.hpp"

#include <cmath>

#include "susylab/errors.hpp"

namespace susylab::lattice {

std::string to_string(Boundary bc) {
    return bc == Boundary::periodic ? "periodic" : "restriction";
}

Boundary boundary_from_string(const std::string& s) {
    if (s == "periodic") return Boundary::periodic;
    if (s == "restriction") return Boundary::restriction;
    throw usage_error("unknown boundary condition '" + s + "'");
}

int site_count(const LatticeSpec& spec) {
    if (spec.d < 1) throw usage_error("lattice: need d >= 1");
    if (spec.L < 1) throw usage_error("lattice: need L >= 1");
    if (spec.bc == Boundary::periodic && spec.L < 3)
        throw usage_error("lattice: periodic boundary needs L >= 3 (double-edge ambiguity)");
    long n = 1;
    for (int k = 0; k < spec.d; ++k) {
        n *= spec.L;
        if (n > 4096) throw usage_error("lattice: N = L^d exceeds the dense-storage cap 4096");
    }
    return int(n);
}

std::vector<int> site_coords(const LatticeSpec& spec, int index) {
    const int n = site_count(spec);
    if (index < 0 || index >= n) throw usage_error("lattice: site index out of range");
    std::vector<int> c(std::size_t(spec.d), 0);
    // row-major: last coordinate fastest
    for (int k = spec.d - 1; k >= 0; --k) {
        c[std::size_t(k)] = index % spec.L;
        index /= spec.L;
    }
    return c;
}

int coords_to_index(const LatticeSpec& spec, const std::vector<int>& c) {
    if (int(c.size()) != spec.d) throw usage_error("lattice: coordinate arity mismatch");
    int idx = 0;
    for (int k = 0; k < spec.d; ++k) {
        int x = c[std::size_t(k)];
        if (x < 0 || x >= spec.L) throw usage_error("lattice: coordinate out of range");
        idx = idx * spec.L + x;
    }
    return idx;
}

int lattice_distance(const LatticeSpec& spec, int i, int j) {
    auto ci = site_coords(spec, i);
    auto cj = site_coords(spec, j);
    int dist = 0;
    for (int k = 0; k < spec.d; ++k) {
        int dx = std::abs(ci[std::size_t(k)] - cj[std::size_t(k)]);
        if (spec.bc == Boundary::periodic) dx = std::min(dx, spec.L - dx);
        dist += dx;
    }
    return dist;
}

std::vector<std::pair<int, int>> edges(const LatticeSpec& spec) {
    const int n = site_count(spec);
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i) {
        auto c = site_coords(spec, i);
        for (int k = 0; k < spec.d; ++k) {
            // forward neighbor in direction k; periodic wraps
            std::vector<int> cn = c;
            if (c[std::size_t(k)] + 1 < spec.L) {
                cn[std::size_t(k)] = c[std::size_t(k)] + 1;
            } else if (spec.bc == Boundary::periodic) {
                cn[std::size_t(k)] = 0;
            } else {
                continue;
            }
            int j = coords_to_index(spec, cn);
            e.emplace_back(std::min(i, j), std::max(i, j));
        }
    }
    return e;
}

Hamiltonian build_laplacian(const LatticeSpec& spec) {
    const int n = site_count(spec);
    Hamiltonian out;
    out.spec = spec;
    out.lambda = 0.0;
    out.H = Eigen::MatrixXcd::Zero(n, n);
    for (auto [i, j] : edges(spec)) {
        out.H(i, j) -= 1.0;
        out.H(j, i) -= 1.0;
        out.H(i, i) += 1.0;
        out.H(j, j) += 1.0;
    }
    return out;
}

Hamiltonian assemble(const LatticeSpec& spec, double lambda, const std::vector<double>& V,
                     std::uint64_t realization_id) {
    const int n = site_count(spec);
    if (int(V.size()) != n) throw usage_error("assemble: potential size mismatch");
    for (double v : V)
        if (!std::isfinite(v)) throw usage_error("assemble: potential must be finite");
    Hamiltonian out = build_laplacian(spec);
    out.lambda = lambda;
    out.realization_id = realization_id;
    for (int j = 0; j < n; ++j) out.H(j, j) += lambda * V[std::size_t(j)];
    return out;
}

}
