#pragma once

// Finite cubes in Z^d, the discrete Laplacian with selectable boundary
// condition, and Hamiltonians H = -Delta + lambda V. Sites are indexed
// row-major over the cube; matrices are dense (N <= 4096).

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace susylab::lattice {

using cplx = std::complex<double>;

enum class Boundary { restriction, periodic };

std::string to_string(Boundary bc);
Boundary boundary_from_string(const std::string& s);

struct LatticeSpec {
    int d = 1;
    int L = 1;
    Boundary bc = Boundary::restriction;
};

// N = L^d, validated (d >= 1, L >= 1, N <= 4096; periodic needs L >= 3).
int site_count(const LatticeSpec& spec);

// Row-major coordinates of a site and back.
std::vector<int> site_coords(const LatticeSpec& spec, int index);
int coords_to_index(const LatticeSpec& spec, const std::vector<int>& c);

// l1 lattice distance between two sites (shortest wrap for periodic).
int lattice_distance(const LatticeSpec& spec, int i, int j);

// Unordered nearest-neighbor pairs (i < j), wrap-around edges included for
// periodic boundary.
std::vector<std::pair<int, int>> edges(const LatticeSpec& spec);

struct Hamiltonian {
    Eigen::MatrixXcd H;
    LatticeSpec spec;
    double lambda = 0.0;
    std::uint64_t realization_id = 0;  // disorder stream; 0 = clean operator
};

// H0 = -Delta: diagonal = neighbor count, off-diagonal -1 per edge.
// Restriction drops outside neighbors (boundary sites have smaller degree);
// periodic wraps (needs L >= 3 to avoid double edges).
Hamiltonian build_laplacian(const LatticeSpec& spec);

// H = -Delta + lambda diag(V). V must be finite, size N.
Hamiltonian assemble(const LatticeSpec& spec, double lambda, const std::vector<double>& V,
                     std::uint64_t realization_id = 0);

}
