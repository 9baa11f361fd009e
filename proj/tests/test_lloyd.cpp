#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "susylab/disorder.hpp"
#include "susylab/errors.hpp"
#include "susylab/lattice.hpp"
#include "susylab/lloyd.hpp"
#include "susylab/mc.hpp"
#include "susylab/quadrature.hpp"
#include "susylab/resolvent.hpp"

using namespace susylab;
using namespace susylab::lattice;
using namespace susylab::lloyd;
using resolvent::SpectralProbe;

static const double kPi = 2.0 * std::asin(1.0);
static const cplx kI{0.0, 1.0};

namespace {

SpectralProbe probe_at(double e, double eps, double lam, double e_tilde = 0.0) {
    SpectralProbe p;
    p.E = e;
    p.E_tilde = e_tilde;
    p.epsilon = eps;
    p.lambda = lam;
    return p;
}

const LatticeSpec kTwoSite{1, 2, Boundary::restriction};

}  // namespace

TEST_CASE("shifted_trace: one site reduces to the scalar formula") {
    LatticeSpec one{1, 1, Boundary::restriction};
    auto got = shifted_trace(one, {1.0}, probe_at(0.7, 0.2, 1.3));
    CHECK(std::abs(got - 1.0 / cplx(0.7, 0.2 + 1.3)) < 1e-15);
}

TEST_CASE("exact_trace: iid equals the identity-correlation model exactly") {
    LatticeSpec spec{1, 8, Boundary::restriction};
    auto probe = probe_at(0.4, 0.3, 1.0);
    auto iid = exact_trace(spec, disorder::make_iid(8), probe);
    auto corr = exact_trace(spec, disorder::make_correlated(Eigen::MatrixXd::Identity(8, 8)), probe);
    CHECK(iid == corr);
}

TEST_CASE("exact_trace: doubled row sums act like doubled coupling") {
    LatticeSpec spec{1, 8, Boundary::restriction};
    auto twice = exact_trace(spec, disorder::make_correlated(2.0 * Eigen::MatrixXd::Identity(8, 8)),
                             probe_at(0.4, 0.3, 1.0));
    auto strong = exact_trace(spec, disorder::make_iid(8), probe_at(0.4, 0.3, 2.0));
    CHECK(std::abs(twice - strong) < 1e-14);
}

TEST_CASE("exact_trace: matches the eigenvalue sum of the clean operator") {
    LatticeSpec spec{1, 16, Boundary::restriction};
    auto probe = probe_at(0.7, 0.3, 1.0);
    auto got = exact_trace(spec, disorder::make_iid(16), probe);
    auto ev = resolvent::eig_spectrum(build_laplacian(spec));
    cplx want = 0.0;
    for (double ek : ev) want += 1.0 / (cplx(0.7, 0.3 + 1.0) - ek);
    CHECK(std::abs(got - want) < 1e-12 * std::abs(want));
}

TEST_CASE("exact_trace: far outside the spectrum the trace is nearly N/E") {
    LatticeSpec spec{1, 8, Boundary::restriction};
    auto got = exact_trace(spec, disorder::make_iid(8), probe_at(1e6, 0.1, 0.01));
    CHECK(std::abs(got - 8.0 / 1e6) < 1e-10);
}

TEST_CASE("exact_trace: rejects the pair-correlated model") {
    LatticeSpec spec{1, 8, Boundary::restriction};
    auto model = disorder::make_toymodel(8, 0.3, 0, 1);
    CHECK_THROWS_AS((void)exact_trace(spec, model, probe_at(0.0, 0.1, 1.0)), usage_error);
}

TEST_CASE("exact_genfun: equal energies give exactly one") {
    LatticeSpec spec{1, 8, Boundary::restriction};
    auto got = exact_genfun(spec, disorder::make_iid(8), probe_at(0.4, 0.2, 1.0, 0.4));
    CHECK(got == cplx(1.0, 0.0));
}

TEST_CASE("exact_genfun: one-site closed forms") {
    LatticeSpec one{1, 1, Boundary::restriction};
    auto probe = probe_at(0.3, 0.0, 1.0, 1.2);
    auto got = exact_genfun(one, disorder::make_iid(1), probe);
    CHECK(std::abs(got - cplx(0.3, 1.0) / cplx(1.2, 1.0)) < 1e-14);

    // doubled row sums shift the pole twice as far
    auto scaled =
        exact_genfun(one, disorder::make_correlated(2.0 * Eigen::MatrixXd::Identity(1, 1)), probe);
    CHECK(std::abs(scaled - cplx(0.3, 2.0) / cplx(1.2, 2.0)) < 1e-14);
}

TEST_CASE("exact_genfun: central difference in E~ recovers exact_trace") {
    LatticeSpec spec{1, 8, Boundary::restriction};
    auto model = disorder::make_iid(8);
    const double h = 1e-5;
    auto up = exact_genfun(spec, model, probe_at(0.3, 0.4, 1.0, 0.3 + h));
    auto dn = exact_genfun(spec, model, probe_at(0.3, 0.4, 1.0, 0.3 - h));
    auto diff = -(up - dn) / (2.0 * h);
    auto want = exact_trace(spec, model, probe_at(0.3, 0.4, 1.0));
    CHECK(std::abs(diff - want) < 1e-6 * std::abs(want));
}

TEST_CASE("toymodel_oracle: delta -> 0 recovers the iid average") {
    for (int L : {2, 4}) {
        LatticeSpec spec{1, L, Boundary::restriction};
        auto probe = probe_at(0.0, 0.1, 1.0);
        auto got = toymodel_oracle(spec, 0.0, probe);
        auto want = exact_trace(spec, disorder::make_iid(L), probe);
        CHECK(std::abs(got - want) < 1e-8 * std::abs(want));
    }
}

TEST_CASE("toymodel_oracle: pinned two-site value") {
    auto got = toymodel_oracle(kTwoSite, 0.3, probe_at(0.0, 0.1, 1.0));
    CHECK(std::abs(got - cplx(-0.240954058871080, -1.157844151786093)) < 5e-9);
}

TEST_CASE("toymodel_oracle: rank-2 update agrees with per-sample assembly") {
    LatticeSpec spec{1, 4, Boundary::restriction};
    const double delta = 0.25, lam = 1.0;
    auto probe = probe_at(0.3, 0.2, lam);
    auto got = toymodel_oracle(spec, delta, probe);

    // same double Cauchy average, but each evaluation builds the full matrix
    const Eigen::MatrixXcd h0 = build_laplacian(spec).H;
    quadrature::QuadOptions opt;
    opt.rel_tol = 1e-9;
    auto brute = quadrature::cauchy_expectation(
        [&](double w2) {
            return quadrature::cauchy_expectation(
                       [&](double w1) {
                           Eigen::MatrixXcd m = -h0;
                           for (int j = 0; j < 4; ++j)
                               m(j, j) += probe.z() + (j < 2 ? cplx(0.0, 0.0) : kI * lam);
                           m(0, 0) -= lam * (w1 - delta * delta * w2);
                           m(1, 1) -= lam * (w2 - delta * delta * w1);
                           return m.partialPivLu()
                               .solve(Eigen::MatrixXcd::Identity(4, 4))
                               .trace();
                       },
                       opt)
                .value;
        },
        opt);
    CHECK(brute.converged);
    CHECK(std::abs(got - brute.value) < 1e-8 * std::abs(got));
}

TEST_CASE("toymodel_oracle: analytic in delta near zero") {
    LatticeSpec spec{1, 8, Boundary::restriction};
    auto probe = probe_at(0.5, 0.2, 1.0);
    const auto ds = std::vector<double>{0.0, 0.05, 0.1, 0.15};
    Eigen::MatrixXd vand(4, 3);
    Eigen::VectorXd yre(4), yim(4);
    double scale = 0.0;
    for (int k = 0; k < 4; ++k) {
        auto v = toymodel_oracle(spec, ds[size_t(k)], probe);
        vand(k, 0) = 1.0, vand(k, 1) = ds[size_t(k)], vand(k, 2) = ds[size_t(k)] * ds[size_t(k)];
        yre(k) = v.real(), yim(k) = v.imag();
        scale += std::abs(v) / 4.0;
    }
    const auto resid = [&](const Eigen::VectorXd& y) {
        Eigen::VectorXd x = vand.colPivHouseholderQr().solve(y);
        return (y - vand * x).norm();
    };
    CHECK(std::hypot(resid(yre), resid(yim)) < 1e-4 * scale);
}

TEST_CASE("toymodel_oracle: argument validation") {
    CHECK_THROWS_AS((void)toymodel_oracle(kTwoSite, 0.3, probe_at(0.0, 0.0, 1.0)), usage_error);
    CHECK_THROWS_AS((void)toymodel_oracle(kTwoSite, 1.0, probe_at(0.0, 0.1, 1.0)), usage_error);
    CHECK_THROWS_AS((void)toymodel_oracle({1, 1, Boundary::restriction}, 0.3,
                                          probe_at(0.0, 0.1, 1.0)),
                    usage_error);
}

TEST_CASE("toymodel_decomposition: pinned regions, remainder, and total") {
    auto d3 = toymodel_decomposition(kTwoSite, 0.3, 1.0, 0.0);
    CHECK(std::abs(d3.region_pp - cplx(-0.175769910460, -1.165122609250)) < 1e-7);
    CHECK(std::abs(d3.region_pm - cplx(0.059406000957, -0.035703941729)) < 1e-7);
    CHECK(std::abs(d3.region_mp - cplx(0.059406000957, -0.035703941729)) < 1e-7);
    CHECK(std::abs(d3.remainder - cplx(-0.178998042779, -0.027960363634)) < 1e-7);
    CHECK(std::abs(d3.total - cplx(-0.235955951326, -1.264490856343)) < 2e-7);

    auto d1 = toymodel_decomposition(kTwoSite, 0.1, 1.0, 0.0);
    CHECK(std::abs(d1.region_pp - cplx(-0.371998617239, -1.198405446771)) < 1e-7);
    CHECK(std::abs(d1.region_pm - cplx(0.005197274985, -0.004897830764)) < 1e-7);
    CHECK(std::abs(d1.remainder - cplx(-0.019997215090, -0.000393091938)) < 1e-7);
    CHECK(std::abs(d1.total - cplx(-0.381601282358, -1.208594200237)) < 2e-7);
}

TEST_CASE("toymodel_decomposition: total matches the oracle as eps -> 0") {
    for (double delta : {0.1, 0.3}) {
        auto dec = toymodel_decomposition(kTwoSite, delta, 1.0, 0.0);
        auto want = toymodel_oracle(kTwoSite, delta, probe_at(0.0, 1e-5, 1.0));
        CHECK(std::abs(dec.total - want) < 1e-4 * std::abs(want));
    }
}

TEST_CASE("toymodel_decomposition: matches the oracle exactly at equal eps") {
    auto dec = toymodel_decomposition(kTwoSite, 0.3, 1.0, 0.0, 0.1);
    auto want = toymodel_oracle(kTwoSite, 0.3, probe_at(0.0, 0.1, 1.0));
    CHECK(std::abs(dec.total - want) < 1e-7 * std::abs(want));
}

TEST_CASE("toymodel_decomposition: the two dominant-radius regions agree") {
    auto dec = toymodel_decomposition(kTwoSite, 0.2, 1.0, 0.7, 0.05);
    CHECK(std::abs(dec.region_pm - dec.region_mp) < 1e-10);
}

TEST_CASE("toymodel_decomposition: delta -> 0 leaves only the bulk region") {
    auto dec = toymodel_decomposition(kTwoSite, 0.0, 1.0, 0.0);
    CHECK(dec.region_pm == cplx(0.0, 0.0));
    CHECK(dec.region_mp == cplx(0.0, 0.0));
    CHECK(dec.remainder == cplx(0.0, 0.0));
    auto want = exact_trace(kTwoSite, disorder::make_iid(2), probe_at(0.0, 0.0, 1.0));
    CHECK(std::abs(dec.total - want) < 1e-8 * std::abs(want));
}

TEST_CASE("toymodel_decomposition: remainder scales as delta squared") {
    double prev = 0.0;
    std::vector<double> logr, logd;
    for (double delta : {0.05, 0.1, 0.2}) {
        auto dec = toymodel_decomposition(kTwoSite, delta, 1.0, 0.0);
        const double ratio = std::abs(dec.remainder) / (delta * delta);
        CHECK(ratio > 1.9);
        CHECK(ratio < 2.1);
        CHECK(std::abs(dec.remainder) > prev);
        prev = std::abs(dec.remainder);
        logr.push_back(std::log(std::abs(dec.remainder)));
        logd.push_back(std::log(delta));
    }
    const double slope = (logr[2] - logr[0]) / (logd[2] - logd[0]);
    CHECK(slope > 1.9);
    CHECK(slope < 2.1);
}

TEST_CASE("toymodel_decomposition: remainder matches its Laplace closed form") {
    for (auto [delta, energy, eps] : {std::tuple{0.3, 0.0, 0.0}, std::tuple{0.15, 0.7, 0.05}}) {
        const double lam = 1.0, dsq = delta * delta;
        auto dec = toymodel_decomposition(kTwoSite, delta, lam, energy, eps);
        const cplx c{lam * (1.0 - dsq * dsq) + eps * (1.0 + dsq), -(energy - 1.0) * (1.0 + dsq)};
        const cplx want =
            -kI * (4.0 * lam * dsq * (1.0 + dsq) * c / std::pow(c * c + 4.0 * dsq, 1.5));
        CHECK(std::abs(dec.remainder - want) < 1e-8 * std::abs(want));
    }
}

TEST_CASE("toymodel_decomposition: rejects lattices that are not two sites") {
    CHECK_THROWS_AS((void)toymodel_decomposition({1, 4, Boundary::restriction}, 0.3, 1.0, 0.0),
                    usage_error);
}

TEST_CASE("periodic trapezoid reproduces the Bessel kernel of the angular integrals") {
    for (double x : {0.0, 0.5, 2.3, 7.7, 15.0}) {
        auto got = quadrature::trapezoid_periodic(
                       [x](double u) { return std::exp(kI * (x * std::cos(u))); }, 64) /
                   (2.0 * kPi);
        CHECK(std::abs(got - std::cyl_bessel_j(0.0, x)) < 1e-12);
    }
}

TEST_CASE("toymodel_error_sweep: quadratic error law at fixed volume") {
    LatticeSpec spec{1, 32, Boundary::restriction};
    auto res = toymodel_error_sweep(spec, {0.05, 0.1, 0.15, 0.2}, 1.0, probe_at(1.0, 0.1, 0.0));
    REQUIRE(res.rows.size() == 4);
    CHECK(res.floor < 1e-8);
    CHECK(res.slope > 1.6);
    CHECK(res.slope < 2.4);
    CHECK(res.rows[3].deviation < 0.16);
    for (size_t k = 1; k < 4; ++k) CHECK(res.rows[k].deviation > res.rows[k - 1].deviation);
    // deviations frozen against an independently implemented average
    const double want[] = {3.4970e-4, 1.3785e-3, 3.0303e-3, 5.2243e-3};
    for (size_t k = 0; k < 4; ++k)
        CHECK(std::abs(res.rows[k].deviation - want[k]) < 1e-4 * want[k]);
}

TEST_CASE("toymodel_error_sweep: deviation shrinks when the volume grows") {
    auto small = toymodel_error_sweep({1, 16, Boundary::restriction}, {0.05}, 1.0,
                                      probe_at(1.0, 0.1, 0.0));
    auto large = toymodel_error_sweep({1, 32, Boundary::restriction}, {0.05}, 1.0,
                                      probe_at(1.0, 0.1, 0.0));
    CHECK(large.rows[0].deviation < small.rows[0].deviation);
    CHECK(small.rows[0].deviation / large.rows[0].deviation > 1.4);
}

TEST_CASE("toymodel_error_sweep: the delta = 0 row sits on the floor") {
    auto res = toymodel_error_sweep({1, 8, Boundary::restriction}, {0.0}, 1.0,
                                    probe_at(0.5, 0.2, 0.0));
    REQUIRE(res.rows.size() == 1);
    CHECK(std::abs(res.rows[0].deviation - res.floor) < 1e-12 * (1.0 + res.floor));
    CHECK(res.slope == 0.0);
}

TEST_CASE("toymodel_error_sweep: monte carlo column is consistent with the oracle") {
    LatticeSpec spec{1, 8, Boundary::restriction};
    auto res = toymodel_error_sweep(spec, {0.2}, 1.0, probe_at(0.0, 0.5, 0.0), 4000);
    REQUIRE(res.rows.size() == 1);
    CHECK(res.rows[0].std_error > 0.0);
    CHECK(res.rows[0].mc_deviation <
          res.rows[0].deviation + 6.0 * res.rows[0].std_error + 1e-12);
}

TEST_CASE("toymodel_error_sweep: argument validation") {
    LatticeSpec spec{1, 8, Boundary::restriction};
    CHECK_THROWS_AS(
        (void)toymodel_error_sweep(spec, {0.6}, 1.0, probe_at(0.0, 0.1, 0.0)), usage_error);
    CHECK_THROWS_AS(
        (void)toymodel_error_sweep(spec, {0.1}, 1.0, probe_at(0.0, 0.1, 2.0)), usage_error);
    CHECK_THROWS_AS(
        (void)toymodel_error_sweep(spec, {0.1}, 1.0, probe_at(0.0, 0.0, 0.0)), usage_error);
}

TEST_CASE("monte carlo averages match the closed forms within three sigma") {
    LatticeSpec spec{1, 8, Boundary::restriction};
    auto probe = probe_at(0.0, 0.6, 1.0);
    mc::McPlan plan;
    plan.samples = 20000;
    plan.seed = 2026;
    plan.target = mc::Functional::trace_grid;
    plan.e_grid = {0.0, 1.5};

    auto check_model = [&](const disorder::DisorderModel& model) {
        auto est = mc::mc_average(plan, spec, model, probe);
        for (size_t k = 0; k < plan.e_grid.size(); ++k) {
            auto p = probe;
            p.E = plan.e_grid[k];
            auto want = exact_trace(spec, model, p);
            CHECK(std::abs(est.mean[k] - want) < 3.0 * est.std_error[k]);
        }
    };
    check_model(disorder::make_iid(8));

    Eigen::MatrixXd t = Eigen::MatrixXd::Identity(8, 8);
    for (auto [i, j] : edges(spec)) t(i, j) = t(j, i) = 0.5;
    check_model(disorder::make_correlated(t));
}

TEST_CASE("make_toymodel_blocks: algebraic identities") {
    LatticeSpec spec{1, 8, Boundary::restriction};
    const double delta = 0.25, lam = 1.0;
    auto b = make_toymodel_blocks(spec, delta, lam, 0.4, 0.05);

    // the pair couples to the rest through real 0/1 adjacency entries
    CHECK(b.coupling.imag().norm() == 0.0);
    CHECK(b.coupling.real().sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(b.coupling.real().maxCoeff() == 1.0);

    // region shifts differ on the pair block only, by fixed diagonal gaps
    Eigen::Matrix2cd gap_want = Eigen::Matrix2cd::Zero();
    gap_want(0, 0) = -2.0 * lam;
    gap_want(1, 1) = 2.0 * lam * delta * delta;
    CHECK((b.shift_gap - gap_want).norm() < 1e-14);
    CHECK((b.a_mp - b.a_pp - gap_want).norm() < 1e-14);
    CHECK((b.a_pp - b.a0 - lam * (1.0 - delta * delta) * Eigen::Matrix2cd::Identity()).norm() <
          1e-14);
    CHECK((b.s_pp - b.s0 - lam * (1.0 - delta * delta) * Eigen::Matrix2cd::Identity()).norm() <
          1e-14);

    // dressed directions see a nonnegative gap form of size 2 lam delta^2 (1 - v^2)
    for (double th1 : {0.0, 1.1, 2.2, kPi})
        for (double th2 : {0.0, 0.7, 2.9})
            for (double v : {0.0, 0.3, 0.7, 1.0}) {
                auto f = b.v_theta(th1, th2, v);
                const double got = (f.adjoint() * (b.shift_gap * f)).value().real();
                const double want = 2.0 * lam * delta * delta * (1.0 - v * v);
                CHECK(std::abs(got - want) < 1e-13);
                CHECK(got > -1e-13);
            }

    // without correlation the dressed pair block is the bare shift
    auto b0 = make_toymodel_blocks(spec, 0.0, lam, 0.4, 0.0);
    CHECK((b0.a_pp.real() - lam * Eigen::Matrix2d::Identity()).norm() < 1e-14);
    CHECK(b0.shift_gap.diagonal()(1) == cplx(0.0, 0.0));

    CHECK_THROWS_AS((void)make_toymodel_blocks(kTwoSite, 0.25, 1.0, 0.0), usage_error);
}

TEST_CASE("schur_bounds_check: positivity, factorization, and trace constant") {
    LatticeSpec spec{1, 16, Boundary::restriction};
    auto rep = schur_bounds_check(spec, 0.25, 1.0, 0.0);
    CHECK(rep.passed);
    CHECK(rep.min_re_eig_schur >= 0.5);
    CHECK(std::abs(rep.min_re_eig_schur - 0.9375) < 2e-2);
    CHECK(rep.min_re_eig_bulk > 0.9);
    CHECK(rep.quad_margin > 0.2);
    CHECK(rep.det_identity_rel_err < 1e-10);

    // the empirical trace constant stays bounded as the volume grows
    double kmin = 1e9, kmax = 0.0;
    for (int L : {8, 16, 32}) {
        auto r = schur_bounds_check({1, L, Boundary::restriction}, 0.25, 1.0, 0.0);
        CHECK(r.passed);
        kmin = std::min(kmin, r.k_empirical);
        kmax = std::max(kmax, r.k_empirical);
        CHECK(r.k_empirical > 0.4);
        CHECK(r.k_empirical < 0.6);
    }
    CHECK(kmax / kmin < 2.0);

    CHECK_THROWS_AS((void)schur_bounds_check(spec, 0.6, 1.0, 0.0), usage_error);
}

TEST_CASE("combes_thomas_check: decay and quadratic-form bounds hold") {
    for (double lam : {0.5, 1.0, 2.0}) {
        auto rep = combes_thomas_check({1, 16, Boundary::restriction}, lam, 0.0, 1.0);
        CHECK(rep.passed);
        CHECK(rep.worst_ratio < 0.6);
        CHECK(rep.quad_margin > 0.0);
    }
    auto rep2 = combes_thomas_check({2, 8, Boundary::restriction}, 1.0, 0.0, 1.0);
    CHECK(rep2.passed);
    CHECK(rep2.worst_ratio < 0.6);

    auto repp = combes_thomas_check({1, 16, Boundary::periodic}, 1.0, 0.0, 1.0);
    CHECK(repp.passed);

    CHECK_THROWS_AS((void)combes_thomas_check({1, 16, Boundary::restriction}, 1.0, 0.0, 0.0),
                    usage_error);
}

TEST_CASE("shifted_trace: argument validation") {
    CHECK_THROWS_AS((void)shifted_trace(kTwoSite, {1.0}, probe_at(0.0, 0.1, 1.0)), usage_error);
    CHECK_THROWS_AS((void)shifted_trace(kTwoSite, {1.0, -1.0}, probe_at(0.0, 0.1, 1.0)),
                    usage_error);
    CHECK_THROWS_AS((void)shifted_trace(kTwoSite, {0.0, 1.0}, probe_at(0.0, 0.0, 1.0)),
                    usage_error);
}
