#include "susylab/lloyd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "susylab/errors.hpp"
#include "susylab/mc.hpp"
#include "susylab/quadrature.hpp"

namespace susylab::lloyd {

namespace {

const double kPi = 2.0 * std::asin(1.0);
const cplx kI{0.0, 1.0};
const double kInf = std::numeric_limits<double>::infinity();

void check_probe(const resolvent::SpectralProbe& probe) {
    if (!std::isfinite(probe.E) || !std::isfinite(probe.E_tilde) ||
        !std::isfinite(probe.epsilon) || !std::isfinite(probe.lambda))
        throw usage_error("probe has non-finite fields");
    if (probe.epsilon < 0.0) throw usage_error("epsilon must be >= 0");
    if (probe.lambda < 0.0) throw usage_error("lambda must be >= 0");
}

// (E + i eps) I + i lambda diag(shift) - H0, the matrix whose inverse trace
// and determinant the closed forms need.
Eigen::MatrixXcd shifted_matrix(const lattice::LatticeSpec& spec, const std::vector<double>& shift,
                                double energy, double epsilon, double lambda) {
    const int n = lattice::site_count(spec);
    if (int(shift.size()) != n) throw usage_error("shift vector size must equal the site count");
    double min_shift = kInf;
    for (double s : shift) {
        if (!std::isfinite(s) || s < 0.0)
            throw usage_error("shift entries must be finite and >= 0");
        min_shift = std::min(min_shift, s);
    }
    if (!(epsilon > 0.0 || (lambda > 0.0 && min_shift > 0.0)))
        throw usage_error("need epsilon > 0 or a strictly positive shift to stay nonsingular");
    Eigen::MatrixXcd m = -lattice::build_laplacian(spec).H;
    const cplx z{energy, epsilon};
    for (int j = 0; j < n; ++j) m(j, j) += z + kI * (lambda * shift[j]);
    return m;
}

std::vector<double> row_sum_shift(const disorder::DisorderModel& model) {
    auto shift = std::vector<double>(size_t(model.n), 0.0);
    for (int j = 0; j < model.n; ++j) {
        shift[size_t(j)] = model.row_sum(j);
        if (!(shift[size_t(j)] > 0.0))
            throw usage_error("disorder row sums must be strictly positive");
    }
    return shift;
}

void check_reducible(const lattice::LatticeSpec& spec, const disorder::DisorderModel& model) {
    if (model.kind == disorder::Kind::toymodel)
        throw usage_error(
            "pair-correlated disorder does not reduce to a diagonal shift; "
            "use toymodel_oracle or toymodel_decomposition");
    if (model.n != lattice::site_count(spec))
        throw usage_error("disorder model size must equal the site count");
}

// unit vector with iid complex gaussian entries, reproducible per (seed, id)
Eigen::VectorXcd random_unit(int n, std::uint64_t seed, std::uint64_t id) {
    disorder::RngStream rng{seed, id, 0};
    Eigen::VectorXcd f(n);
    for (int j = 0; j < n; ++j) {
        const double r1 = std::sqrt(-2.0 * std::log(rng.uniform()));
        const double p1 = 2.0 * kPi * rng.uniform();
        const double r2 = std::sqrt(-2.0 * std::log(rng.uniform()));
        const double p2 = 2.0 * kPi * rng.uniform();
        f(j) = cplx{r1 * std::cos(p1), r2 * std::cos(p2)};
    }
    const double nrm = f.norm();
    if (!(nrm > 1e-12)) {
        f.setZero();
        f(0) = 1.0;
        return f;
    }
    return f / nrm;
}

}  // namespace

cplx shifted_trace(const lattice::LatticeSpec& spec, const std::vector<double>& shift,
                   const resolvent::SpectralProbe& probe) {
    check_probe(probe);
    const Eigen::MatrixXcd m = shifted_matrix(spec, shift, probe.E, probe.epsilon, probe.lambda);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
    return lu.solve(Eigen::MatrixXcd::Identity(m.rows(), m.cols())).trace();
}

cplx exact_trace(const lattice::LatticeSpec& spec, const disorder::DisorderModel& model,
                 const resolvent::SpectralProbe& probe) {
    check_probe(probe);
    check_reducible(spec, model);
    return shifted_trace(spec, row_sum_shift(model), probe);
}

cplx exact_genfun(const lattice::LatticeSpec& spec, const disorder::DisorderModel& model,
                  const resolvent::SpectralProbe& probe) {
    check_probe(probe);
    check_reducible(spec, model);
    if (probe.E_tilde == probe.E) return {1.0, 0.0};
    const auto shift = row_sum_shift(model);
    const cplx num =
        resolvent::log_det(shifted_matrix(spec, shift, probe.E, probe.epsilon, probe.lambda));
    const cplx den =
        resolvent::log_det(shifted_matrix(spec, shift, probe.E_tilde, probe.epsilon, probe.lambda));
    return std::exp(num - den);
}

cplx toymodel_oracle(const lattice::LatticeSpec& spec, double delta,
                     const resolvent::SpectralProbe& probe) {
    check_probe(probe);
    const int n = lattice::site_count(spec);
    if (n < 2) throw usage_error("pair-correlated model needs at least two sites");
    if (!(delta >= 0.0 && delta < 1.0)) throw usage_error("delta must lie in [0, 1)");
    if (!(probe.epsilon > 0.0))
        throw usage_error("oracle requires epsilon > 0: the pair sites carry no shift of their own");

    const double lam = probe.lambda;
    const double dsq = delta * delta;
    const cplx z = probe.z();

    // everything but the pair integrated out: (E + i eps) I + i lam (off-pair) - H0
    Eigen::MatrixXcd m0 = -lattice::build_laplacian(spec).H;
    for (int j = 0; j < n; ++j) m0(j, j) += (j < 2) ? z : z + kI * lam;

    // rank-2 update data: the pair variables only touch a precomputed inverse
    const bool direct = (n == 2);
    cplx tr0{}, s00{}, s01{}, s10{}, s11{}, q00{}, q01{}, q10{}, q11{};
    if (!direct) {
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m0);
        const Eigen::MatrixXcd inv = lu.solve(Eigen::MatrixXcd::Identity(n, n));
        const Eigen::MatrixXcd inv2 = inv * inv;
        tr0 = inv.trace();
        s00 = inv(0, 0), s01 = inv(0, 1), s10 = inv(1, 0), s11 = inv(1, 1);
        q00 = inv2(0, 0), q01 = inv2(0, 1), q10 = inv2(1, 0), q11 = inv2(1, 1);
    }

    auto trace_at = [&](double w1, double w2) -> cplx {
        const double d1 = -lam * (w1 - dsq * w2);
        const double d2 = -lam * (w2 - dsq * w1);
        if (direct) {
            const cplx mm0 = m0(0, 0) + d1;
            const cplx mm1 = m0(1, 1) + d2;
            return (mm0 + mm1) / (mm0 * mm1 - m0(0, 1) * m0(1, 0));
        }
        const cplx e0 = 1.0 + s00 * d1;
        const cplx e1 = 1.0 + s11 * d2;
        const cplx det = e0 * e1 - s01 * s10 * (d1 * d2);
        const cplx num = d1 * q00 * e1 + d2 * q11 * e0 - (d1 * d2) * (q10 * s01 + q01 * s10);
        return tr0 - num / det;
    };

    quadrature::QuadOptions inner_opt;
    inner_opt.rel_tol = 1e-9;
    inner_opt.abs_tol = 1e-12;
    quadrature::QuadOptions outer_opt;
    outer_opt.rel_tol = 1e-8;
    outer_opt.abs_tol = 1e-11;

    bool inner_ok = true;
    double worst_inner = 0.0;
    long inner_evals = 0;
    const auto out = quadrature::cauchy_expectation(
        [&](double w2) -> cplx {
            const auto in = quadrature::cauchy_expectation(
                [&](double w1) { return trace_at(w1, w2); }, inner_opt);
            inner_ok = inner_ok && in.converged;
            worst_inner = std::max(worst_inner, in.error);
            inner_evals += in.evals;
            return in.value;
        },
        outer_opt);

    if (!out.converged || !inner_ok) {
        std::ostringstream msg;
        msg << "pair-average quadrature did not converge (outer error " << out.error
            << ", worst inner error " << worst_inner << ", evals " << out.evals << " outer / "
            << inner_evals << " inner)";
        throw numeric_error(msg.str());
    }
    return out.value;
}

ToymodelDecomposition toymodel_decomposition(const lattice::LatticeSpec& spec, double delta,
                                             double lambda, double energy, double epsilon) {
    if (lattice::site_count(spec) != 2)
        throw usage_error("decomposition supports exactly the two-site lattice");
    if (!(delta >= 0.0 && delta < 1.0)) throw usage_error("delta must lie in [0, 1)");
    if (!std::isfinite(lambda) || lambda < 0.0) throw usage_error("lambda must be finite and >= 0");
    if (!std::isfinite(epsilon) || epsilon < 0.0)
        throw usage_error("epsilon must be finite and >= 0");
    if (!std::isfinite(energy)) throw usage_error("energy must be finite");
    if (!(lambda + epsilon > 0.0))
        throw usage_error("need lambda > 0 or epsilon > 0 for decaying integrals");

    const Eigen::Matrix2cd h0 = lattice::build_laplacian(spec).H;
    const cplx z{energy, epsilon};
    const double dsq = delta * delta;

    quadrature::QuadOptions inner_opt;
    inner_opt.rel_tol = 1e-9;
    inner_opt.abs_tol = 1e-14;
    inner_opt.max_panels = 2000;
    quadrature::QuadOptions outer_opt;
    outer_opt.rel_tol = 1e-9;
    outer_opt.abs_tol = 1e-13;

    bool all_ok = true;
    double err_acc = 0.0;

    // One sign region: the pair block picks up lambda * diag(t1, t2), the
    // radial integral runs over the region's (r1, r2) wedge, and the angular
    // integrals have already been folded into the Bessel kernel. Regions:
    // 0 bulk (delta r2 < r1 < r2/delta), 1 r1-dominant, 2 r2-dominant.
    auto region_integral = [&](double t1, double t2, int region) -> cplx {
        Eigen::Matrix2cd a = -kI * (z * Eigen::Matrix2cd::Identity() - h0);
        a(0, 0) += lambda * t1;
        a(1, 1) += lambda * t2;
        const cplx a1 = a(0, 0), a2 = a(1, 1);
        const cplx det_a = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);

        if (region != 0 && delta == 0.0) return {0.0, 0.0};  // empty wedges

        bool inner_ok = true;
        double worst_inner = 0.0;
        const auto outer = quadrature::integrate_from(
            [&](double r2) -> cplx {
                double lo = 0.0, hi_region = kInf;
                switch (region) {
                    case 0: lo = delta * r2; hi_region = delta > 0.0 ? r2 / delta : kInf; break;
                    case 1: lo = r2 / delta; break;
                    case 2: hi_region = delta * r2; break;
                }
                // the full exponent stays inside the integrand (its real part
                // is <= 0 on every wedge), and the r1 range is clipped where
                // the gaussian factor is below 4e-20 of its in-range peak
                double hi = hi_region;
                if (a1.real() > 0.0)
                    hi = std::min(hi_region, std::sqrt(lo * lo + 45.0 / a1.real()));
                if (!(hi > lo)) return {0.0, 0.0};
                const auto in = quadrature::integrate(
                    [&](double r1) -> cplx {
                        const cplx expo = -a1 * (r1 * r1) - a2 * (r2 * r2);
                        return r1 * r2 * (r1 * r1 + r2 * r2) * std::exp(expo) *
                               std::cyl_bessel_j(0.0, 2.0 * r1 * r2);
                    },
                    lo, hi, inner_opt);
                inner_ok = inner_ok && in.converged;
                worst_inner = std::max(worst_inner, in.error);
                return in.value;
            },
            0.0, outer_opt);

        all_ok = all_ok && outer.converged && inner_ok;
        err_acc += 4.0 * std::abs(det_a) * (outer.error + worst_inner);
        return -kI * (4.0 * det_a * outer.value);
    };

    ToymodelDecomposition out{};
    out.region_pp = region_integral(1.0 - dsq, 1.0 - dsq, 0);
    out.region_pm = region_integral(1.0 + dsq, -(1.0 + dsq), 1);
    out.region_mp = region_integral(-(1.0 + dsq), 1.0 + dsq, 2);

    // Boundary remainder, collected on r1 = delta r2: weight lambda delta^2
    // times the gaussian in r2, angular part reduced to the difference angle
    // and evaluated by the 64-node periodic trapezoid.
    if (lambda * dsq > 0.0) {
        const cplx c{lambda * (1.0 - dsq * dsq) + epsilon * (1.0 + dsq),
                     -(energy - 1.0) * (1.0 + dsq)};
        const double cut = std::sqrt(std::log(1e14) / (lambda * (1.0 - dsq * dsq)));
        quadrature::QuadOptions r_opt;
        r_opt.rel_tol = 1e-10;
        r_opt.abs_tol = 1e-14;
        r_opt.max_panels = 2000;
        const auto rr = quadrature::integrate(
            [&](double r) -> cplx {
                const double r2 = r * r;
                const double x = 2.0 * delta * r2;
                const cplx angular = quadrature::trapezoid_periodic(
                                         [x](double u) { return std::exp(kI * (x * std::cos(u))); },
                                         64) /
                                     (2.0 * kPi);
                return r * r2 * std::exp(-c * r2) * angular;
            },
            0.0, cut, r_opt);
        all_ok = all_ok && rr.converged;
        const double pref = 8.0 * lambda * dsq * (1.0 + dsq);
        out.remainder = -kI * (pref * rr.value);
        err_acc += pref * rr.error;
    }

    out.total = out.region_pp + out.region_pm + out.region_mp + out.remainder;
    out.quad_error = err_acc;
    if (!all_ok) {
        std::ostringstream msg;
        msg << "region quadrature did not converge (accumulated error " << err_acc << ")";
        throw numeric_error(msg.str());
    }
    return out;
}

SweepResult toymodel_error_sweep(const lattice::LatticeSpec& spec,
                                 const std::vector<double>& deltas, double lambda,
                                 const resolvent::SpectralProbe& probe, long long samples) {
    check_probe(probe);
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw usage_error("sweep requires lambda > 0");
    if (probe.lambda != 0.0 && probe.lambda != lambda)
        throw usage_error("probe.lambda conflicts with the sweep's lambda argument");
    if (!(probe.epsilon > 0.0)) throw usage_error("sweep requires epsilon > 0");
    if (deltas.empty()) throw usage_error("sweep needs at least one delta");
    const int n = lattice::site_count(spec);
    if (n < 2) throw usage_error("sweep needs at least two sites");
    for (double d : deltas) {
        if (!(d >= 0.0 && d < 1.0)) throw usage_error("sweep deltas must lie in [0, 1)");
        if (!(d * (1.0 + 1.0 / lambda) < 1.0))
            throw usage_error("sweep requires delta * (1 + 1/lambda) < 1 (weak correlation)");
    }

    resolvent::SpectralProbe p = probe;
    p.lambda = lambda;

    const auto reference = [&](double d) -> cplx {
        auto shift = std::vector<double>(size_t(n), 1.0);
        shift[0] = shift[1] = 1.0 - d * d;
        return shifted_trace(spec, shift, p);
    };

    SweepResult out;
    const cplx ref0 = reference(0.0);
    out.floor = std::abs(toymodel_oracle(spec, 0.0, p) - ref0) / std::abs(ref0);

    out.rows.reserve(deltas.size());
    for (double d : deltas) {
        SweepRow row;
        row.delta = d;
        const cplx ref = reference(d);
        const double scale = std::abs(ref);
        row.deviation = std::abs(toymodel_oracle(spec, d, p) - ref) / scale;
        if (samples > 0) {
            const disorder::DisorderModel model =
                d > 0.0 ? disorder::make_toymodel(n, d, 0, 1) : disorder::make_iid(n);
            mc::McPlan plan;
            plan.samples = samples;
            plan.seed = 1789;
            plan.threads = 1;
            plan.target = mc::Functional::trace;
            const auto est = mc::mc_average(plan, spec, model, p);
            row.mc_deviation = std::abs(est.mean[0] - ref) / scale;
            row.std_error = est.std_error[0] / scale;
        }
        out.rows.push_back(row);
    }

    // least-squares slope of log(deviation - floor) against log(delta)
    auto xs = std::vector<double>();
    auto ys = std::vector<double>();
    for (const auto& row : out.rows) {
        if (row.delta <= 0.0) continue;
        xs.push_back(std::log(row.delta));
        ys.push_back(std::log(std::max(row.deviation - out.floor, 1e-18)));
    }
    if (xs.size() >= 2) {
        double mx = 0.0, my = 0.0;
        for (size_t k = 0; k < xs.size(); ++k) mx += xs[k], my += ys[k];
        mx /= double(xs.size());
        my /= double(xs.size());
        double sxx = 0.0, sxy = 0.0;
        for (size_t k = 0; k < xs.size(); ++k) {
            sxx += (xs[k] - mx) * (xs[k] - mx);
            sxy += (xs[k] - mx) * (ys[k] - my);
        }
        out.slope = sxy / sxx;
    }
    return out;
}

Eigen::Vector2cd ToymodelBlocks::v_theta(double theta1, double theta2, double v) const {
    Eigen::Vector2cd f;
    f(0) = std::polar(1.0, theta1) * (delta * v);
    f(1) = std::polar(1.0, theta2);
    return f;
}

ToymodelBlocks make_toymodel_blocks(const lattice::LatticeSpec& spec, double delta, double lambda,
                                    double energy, double epsilon) {
    const int n = lattice::site_count(spec);
    if (n < 3) throw usage_error("blocks need at least three sites so the bulk is nonempty");
    if (!(delta >= 0.0 && delta < 1.0)) throw usage_error("delta must lie in [0, 1)");
    if (!std::isfinite(lambda) || lambda < 0.0) throw usage_error("lambda must be finite and >= 0");
    if (!std::isfinite(epsilon) || epsilon < 0.0)
        throw usage_error("epsilon must be finite and >= 0");
    if (!std::isfinite(energy)) throw usage_error("energy must be finite");
    if (!(lambda + epsilon > 0.0))
        throw usage_error("need lambda > 0 or epsilon > 0: the bulk block must be invertible");

    const Eigen::MatrixXcd h0 = lattice::build_laplacian(spec).H;
    const cplx z{energy, epsilon};
    const int rest = n - 2;
    const double dsq = delta * delta;

    // -i((E + i eps) I - H0), the quadratic-form kernel before disorder shifts
    Eigen::MatrixXcd base = kI * h0;
    for (int j = 0; j < n; ++j) base(j, j) -= kI * z;

    const auto with_shift = [&](double t1, double t2) {
        Eigen::MatrixXcd c = base;
        c(0, 0) += lambda * t1;
        c(1, 1) += lambda * t2;
        for (int j = 2; j < n; ++j) c(j, j) += lambda;
        return c;
    };

    ToymodelBlocks b;
    b.delta = delta;
    b.lambda = lambda;
    b.energy = energy;
    b.epsilon = epsilon;
    b.c_pp = with_shift(1.0 - dsq, 1.0 - dsq);
    b.c_pm = with_shift(1.0 + dsq, -(1.0 + dsq));
    b.c_mp = with_shift(-(1.0 + dsq), 1.0 + dsq);
    b.a0 = base.block(0, 0, 2, 2);
    b.a_pp = b.c_pp.block(0, 0, 2, 2);
    b.a_pm = b.c_pm.block(0, 0, 2, 2);
    b.a_mp = b.c_mp.block(0, 0, 2, 2);
    b.bulk = b.c_pp.block(2, 2, rest, rest);
    b.coupling = kI * b.c_pp.block(0, 2, 2, rest);  // off-diagonal blocks are -i D

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(b.bulk);
    const Eigen::MatrixXcd binv_dt = lu.solve(b.coupling.transpose());
    const Eigen::Matrix2cd dbd = b.coupling * binv_dt;
    b.s_pp = b.a_pp + dbd;
    b.s_pm = b.a_pm + dbd;
    b.s_mp = b.a_mp + dbd;
    b.s0 = b.a0 + dbd;
    b.bulk_feedback = Eigen::Matrix2cd::Identity() - b.coupling * lu.solve(binv_dt);
    b.shift_gap = b.a_mp - b.a_pp;
    return b;
}

DecayBoundReport combes_thomas_check(const lattice::LatticeSpec& spec, double lambda,
                                     double energy, double eta, int n_vectors,
                                     std::uint64_t seed) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw usage_error("eta must be positive");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw usage_error("lambda must be positive");
    if (!std::isfinite(energy)) throw usage_error("energy must be finite");
    if (n_vectors < 1) throw usage_error("need at least one test vector");
    const int n = lattice::site_count(spec);
    if (n < 3) throw usage_error("need at least three sites so the complement is nonempty");
    const int rest = n - 2;

    const Eigen::MatrixXcd h0 = lattice::build_laplacian(spec).H;
    const Eigen::MatrixXcd bm =
        kI * (h0.block(2, 2, rest, rest) -
              cplx{energy, lambda} * Eigen::MatrixXcd::Identity(rest, rest));
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(bm);
    const Eigen::MatrixXcd binv = lu.solve(Eigen::MatrixXcd::Identity(rest, rest));

    DecayBoundReport rep;
    rep.decay_rate = lambda * eta / (lambda + 4.0 * double(spec.d) * std::exp(eta));
    for (int a = 0; a < rest; ++a) {
        for (int b = 0; b < rest; ++b) {
            const int dist = lattice::lattice_distance(spec, a + 2, b + 2);
            const double bound = (2.0 / lambda) * std::exp(-rep.decay_rate * double(dist));
            const double ratio = std::abs(binv(a, b)) / bound;
            if (ratio > rep.worst_ratio) {
                rep.worst_ratio = ratio;
                rep.worst_i = a + 2;
                rep.worst_j = b + 2;
            }
        }
    }

    const double dd = 4.0 * double(spec.d);
    const double lower = lambda / (lambda * lambda + dd * dd);
    double margin = kInf;
    for (int k = 0; k < n_vectors; ++k) {
        const Eigen::VectorXcd f = random_unit(rest, seed, std::uint64_t(k));
        const cplx form = (f.adjoint() * (binv * f)).value();
        margin = std::min(margin, form.real() - lower);
    }
    rep.quad_margin = margin;
    rep.passed = rep.worst_ratio <= 1.0 + 1e-9 && rep.quad_margin >= -1e-12;
    return rep;
}

SchurReport schur_bounds_check(const lattice::LatticeSpec& spec, double delta, double lambda,
                               double energy, int n_vectors, std::uint64_t seed) {
    if (!(delta >= 0.0 && delta <= 0.5))
        throw usage_error("delta must lie in [0, 1/2] for the Schur bound");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw usage_error("lambda must be positive");
    if (n_vectors < 1) throw usage_error("need at least one test vector");
    const auto b = make_toymodel_blocks(spec, delta, lambda, energy, 0.0);
    const int n = lattice::site_count(spec);

    SchurReport rep;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es2(
        Eigen::Matrix2cd(0.5 * (b.s_pp + b.s_pp.adjoint())));
    rep.min_re_eig_schur = es2.eigenvalues().minCoeff();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> esb(
        Eigen::MatrixXcd(0.5 * (b.bulk + b.bulk.adjoint())));
    rep.min_re_eig_bulk = esb.eigenvalues().minCoeff();

    double margin = kInf;
    for (int k = 0; k < n_vectors; ++k) {
        const Eigen::VectorXcd f = random_unit(2, seed, std::uint64_t(k));
        const cplx form = (f.adjoint() * (b.s_pp * f)).value();
        margin = std::min(margin, form.real() - 0.5 * lambda);
    }
    rep.quad_margin = margin;

    const cplx ld_bulk = resolvent::log_det(b.bulk);
    const std::pair<const Eigen::MatrixXcd*, const Eigen::Matrix2cd*> parts[] = {
        {&b.c_pp, &b.s_pp}, {&b.c_pm, &b.s_pm}, {&b.c_mp, &b.s_mp}};
    for (const auto& [c, s] : parts) {
        const cplx det_s = (*s)(0, 0) * (*s)(1, 1) - (*s)(0, 1) * (*s)(1, 0);
        const cplx ld_c = resolvent::log_det(*c);
        const double rel = std::abs(std::exp(ld_c - ld_bulk - std::log(det_s)) - 1.0);
        rep.det_identity_rel_err = std::max(rep.det_identity_rel_err, rel);
    }

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(b.c_pp);
    const cplx tr_c = lu.solve(Eigen::MatrixXcd::Identity(n, n)).trace();
    rep.k_empirical = double(n) * lambda / (std::abs(tr_c) * (lambda + 1.0) * (lambda + 1.0));

    rep.passed = rep.min_re_eig_schur >= 0.5 * lambda - 1e-10 && rep.min_re_eig_bulk > 0.0 &&
                 rep.quad_margin >= -1e-10 && rep.det_identity_rel_err <= 1e-10;
    return rep;
}

}  // namespace susylab::lloyd
