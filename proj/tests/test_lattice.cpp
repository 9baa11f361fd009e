#include <doctest.h>

#include <cmath>
#include <random>

#include "susylab/errors.hpp"
#include "susylab/lattice.hpp"

using namespace susylab;
using namespace susylab::lattice;

static const double kPi = 2.0 * std::asin(1.0);

TEST_CASE("laplacian d=1 L=3 restriction: explicit matrix") {
    auto h = build_laplacian({1, 3, Boundary::restriction});
    Eigen::MatrixXd want(3, 3);
    want << 1, -1, 0, -1, 2, -1, 0, -1, 1;
    CHECK((h.H.real() - want).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(h.H.imag().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("laplacian d=1 L=4 periodic: Fourier eigenvalues {0,2,2,4}") {
    auto h = build_laplacian({1, 4, Boundary::periodic});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.H.real());
    std::vector<double> want;
    for (int k = 0; k < 4; ++k) want.push_back(2.0 - 2.0 * std::cos(2.0 * kPi * k / 4.0));
    std::sort(want.begin(), want.end());
    for (int k = 0; k < 4; ++k) CHECK(std::abs(es.eigenvalues()[k] - want[std::size_t(k)]) < 1e-12);
}

TEST_CASE("laplacian d=2 L=2 restriction: corner degrees") {
    auto h = build_laplacian({2, 2, Boundary::restriction});
    for (int i = 0; i < 4; ++i) CHECK(h.H(i, i) == cplx(2.0));
    // each site couples to exactly two neighbors
    for (int i = 0; i < 4; ++i) {
        int nbrs = 0;
        for (int j = 0; j < 4; ++j)
            if (j != i && h.H(i, j) != cplx(0.0)) ++nbrs;
        CHECK(nbrs == 2);
    }
}

TEST_CASE("assemble: explicit small cases") {
    LatticeSpec one{1, 1, Boundary::restriction};
    auto h1 = assemble(one, 3.0, {2.0});
    CHECK(h1.H(0, 0) == cplx(6.0));  // no neighbors: H = [lambda v]

    LatticeSpec two{1, 2, Boundary::restriction};
    auto h2 = assemble(two, 2.0, {1.0, 0.0});
    CHECK(h2.H(0, 0) == cplx(3.0));
    CHECK(h2.H(0, 1) == cplx(-1.0));
    CHECK(h2.H(1, 1) == cplx(1.0));

    // lambda = 0 leaves the free operator
    auto h0 = assemble(two, 0.0, {5.0, -7.0});
    CHECK((h0.H - build_laplacian(two).H).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("assemble is linear in V") {
    LatticeSpec spec{2, 3, Boundary::periodic};
    int n = site_count(spec);
    std::mt19937 rng(801);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> v1, v2, sum;
    for (int i = 0; i < n; ++i) {
        v1.push_back(u(rng));
        v2.push_back(u(rng));
        sum.push_back(v1.back() + v2.back());
    }
    double lambda = 1.7;
    auto a = assemble(spec, lambda, sum);
    auto b = assemble(spec, lambda, v1);
    Eigen::MatrixXcd diff = a.H - b.H;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            cplx want = (i == j) ? cplx(lambda * v2[std::size_t(i)]) : cplx(0.0);
            CHECK(std::abs(diff(i, j) - want) < 1e-14);
        }
}

TEST_CASE("spectrum of -Delta lies in [0, 4d]") {
    std::mt19937 rng(802);
    for (int rep = 0; rep < 10; ++rep) {
        LatticeSpec spec;
        spec.d = 1 + int(rng() % 2);
        spec.L = 3 + int(rng() % 6);
        spec.bc = (rng() % 2) ? Boundary::periodic : Boundary::restriction;
        auto h = build_laplacian(spec);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.H.real());
        CHECK(es.eigenvalues().minCoeff() > -1e-12);
        CHECK(es.eigenvalues().maxCoeff() < 4.0 * spec.d + 1e-12);
    }
}

TEST_CASE("periodic laplacian commutes with the cyclic shift") {
    LatticeSpec spec{1, 6, Boundary::periodic};
    auto h = build_laplacian(spec);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(6, 6);
    for (int i = 0; i < 6; ++i) S((i + 1) % 6, i) = 1.0;
    Eigen::MatrixXd H = h.H.real();
    CHECK((S * H - H * S).cwiseAbs().maxCoeff() < 1e-14);

    // restriction operator is symmetric
    auto hr = build_laplacian({2, 4, Boundary::restriction});
    CHECK((hr.H - hr.H.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("neighbor counts match the boundary condition") {
    for (int d = 1; d <= 2; ++d) {
        LatticeSpec rs{d, 4, Boundary::restriction};
        auto hr = build_laplacian(rs);
        int n = site_count(rs);
        for (int i = 0; i < n; ++i) {
            double deg = hr.H(i, i).real();
            CHECK(deg >= d);
            CHECK(deg <= 2 * d);
        }
        LatticeSpec ps{d, 4, Boundary::periodic};
        auto hp = build_laplacian(ps);
        for (int i = 0; i < site_count(ps); ++i) CHECK(hp.H(i, i).real() == 2.0 * d);
    }
}

TEST_CASE("lattice validation errors") {
    CHECK_THROWS_AS(site_count({1, 2, Boundary::periodic}), usage_error);
    CHECK_THROWS_AS(site_count({0, 4, Boundary::restriction}), usage_error);
    CHECK_THROWS_AS(site_count({2, 65, Boundary::restriction}), usage_error);  // 65^2 > 4096
    CHECK_THROWS_AS(assemble({1, 2, Boundary::restriction}, 1.0, {1.0}), usage_error);
    CHECK_THROWS_AS(assemble({1, 2, Boundary::restriction}, 1.0,
                             {1.0, std::nan("")}), usage_error);
    CHECK_THROWS_AS(boundary_from_string("open"), usage_error);
}

TEST_CASE("coordinates, distance, edges") {
    LatticeSpec spec{2, 3, Boundary::restriction};
    auto c = site_coords(spec, 5);  // row-major: 5 = 1*3 + 2
    CHECK(c[0] == 1);
    CHECK(c[1] == 2);
    CHECK(coords_to_index(spec, c) == 5);
    CHECK(lattice_distance(spec, 0, 8) == 4);  // (0,0) -> (2,2)

    LatticeSpec ring{1, 6, Boundary::periodic};
    CHECK(lattice_distance(ring, 0, 5) == 1);  // wrap
    CHECK(edges(ring).size() == 6);
    CHECK(edges({1, 6, Boundary::restriction}).size() == 5);
    CHECK(edges({2, 3, Boundary::periodic}).size() == 18);  // 2 * L^2
}
