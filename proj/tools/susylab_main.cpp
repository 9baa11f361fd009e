// Command-line front end. Every experiment is a subcommand driven by a JSON
// config; outputs are CSV tables and JSON summaries that embed the resolved
// config and the tool version, so a result file is reproducible from its own
// header. Exit codes: 0 success, 1 threshold breach, 2 bad config or usage,
// 3 numerical failure.

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "susylab/config.hpp"
#include "susylab/disorder.hpp"
#include "susylab/errors.hpp"
#include "susylab/grassmann.hpp"
#include "susylab/lattice.hpp"
#include "susylab/lloyd.hpp"
#include "susylab/mc.hpp"
#include "susylab/resolvent.hpp"
#include "susylab/superpolar.hpp"
#include "susylab/version.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using cplx = std::complex<double>;
using susylab::numeric_error;
using susylab::usage_error;
using susylab::config::ExperimentConfig;
namespace lattice = susylab::lattice;
namespace disorder = susylab::disorder;
namespace resolvent = susylab::resolvent;
namespace mc = susylab::mc;
namespace lloyd = susylab::lloyd;
namespace superpolar = susylab::superpolar;
namespace grassmann = susylab::grassmann;

const double kPi = 2.0 * std::asin(1.0);
const double kInf = std::numeric_limits<double>::infinity();

enum ExitCode { kOk = 0, kBreach = 1, kUsage = 2, kNumeric = 3 };

struct RunContext {
    ExperimentConfig cfg;
    fs::path out_dir;
    int threads = 1;
    std::string command;
    std::string config_echo;  // minified resolved config, embedded in outputs
};

// ----- output plumbing ------------------------------------------------------

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw usage_error("cannot open output file " + p.string());
    f << content;
    f.flush();
    if (!f.good()) throw usage_error("failed writing output file " + p.string());
}

json envelope(const RunContext& ctx) {
    json j;
    j["version"] = susylab::kVersion;
    j["command"] = ctx.command;
    j["config"] = json::parse(ctx.config_echo);
    return j;
}

fs::path output_base(const RunContext& ctx) { return ctx.out_dir / ctx.cfg.output.path; }

// CSV (with '#' preamble carrying version and config) plus a JSON summary
// sidecar, or a single JSON document when the config asks for json format.
void write_table(const RunContext& ctx, const Table& t, const json& summary) {
    const fs::path base = output_base(ctx);
    if (ctx.cfg.output.format == "csv") {
        std::string csv = "# ";
        csv += susylab::kVersion;
        csv += "\n# config ";
        csv += ctx.config_echo;
        csv += '\n';
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            if (c > 0) csv += ',';
            csv += t.columns[c];
        }
        csv += '\n';
        for (const auto& row : t.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c > 0) csv += ',';
                csv += fmt17(row[c]);
            }
            csv += '\n';
        }
        const fs::path csv_path = fs::path(base.string() + ".csv");
        write_file(csv_path, csv);

        json s = envelope(ctx);
        s["summary"] = summary;
        const fs::path sum_path = fs::path(base.string() + ".summary.json");
        write_file(sum_path, s.dump(2) + "\n");
        std::cout << "wrote " << csv_path.string() << " and " << sum_path.string() << "\n";
    } else {
        json s = envelope(ctx);
        s["columns"] = t.columns;
        s["rows"] = t.rows;
        s["summary"] = summary;
        const fs::path p = fs::path(base.string() + ".json");
        write_file(p, s.dump(2) + "\n");
        std::cout << "wrote " << p.string() << "\n";
    }
}

void write_report(const RunContext& ctx, const json& report) {
    json s = envelope(ctx);
    s["report"] = report;
    const fs::path p = fs::path(output_base(ctx).string() + ".json");
    write_file(p, s.dump(2) + "\n");
    std::cout << "wrote " << p.string() << "\n";
}

json as_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

// ----- MC-vs-exact gating ---------------------------------------------------

// A point agrees when it sits within `sigma` standard errors, or when the
// difference is already below the deterministic tolerance (covers runs whose
// samples are all identical, where the standard error collapses to zero).
struct PointCheck {
    double sigma_distance = 0.0;
    bool pass = false;
};

PointCheck check_point(double diff, double std_error, double exact_scale,
                       const ExperimentConfig::Tolerances& tol) {
    PointCheck pc;
    const bool deterministic_ok = diff <= tol.rel_error * (1.0 + exact_scale);
    pc.sigma_distance = std_error > 0.0 ? diff / std_error : (deterministic_ok ? 0.0 : kInf);
    pc.pass = deterministic_ok || (std_error > 0.0 && diff <= tol.sigma * std_error);
    return pc;
}

// One outlier is tolerated per 20 grid points (a 3 sigma gate trips on a few
// percent of honest points).
long long allowed_outliers(std::size_t points) { return (long long)(points) / 20; }

mc::McPlan plan_for(const RunContext& ctx) {
    mc::McPlan plan;
    plan.samples = ctx.cfg.mc.samples;
    plan.seed = ctx.cfg.mc.seed;
    plan.threads = ctx.threads;
    return plan;
}

resolvent::SpectralProbe probe_at(const ExperimentConfig& cfg, double E) {
    return {E, cfg.probe.e_tilde, cfg.probe.epsilon, cfg.probe.lambda};
}

// ----- subcommands ----------------------------------------------------------

int cmd_dos(RunContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    const auto& grid = cfg.probe.e_grid;
    const int n = lattice::site_count(cfg.lattice);
    const disorder::DisorderModel model = susylab::config::build_disorder(cfg);

    // exact curve first: it is cheap and validates the model kind up front
    std::vector<double> rho_exact(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx tr = lloyd::exact_trace(cfg.lattice, model, probe_at(cfg, grid[i]));
        rho_exact[i] = -tr.imag() / (kPi * n);
    }

    const mc::McEstimate est =
        mc::mc_dos(plan_for(ctx), cfg.lattice, model, grid, cfg.probe.epsilon, cfg.probe.lambda);

    Table t;
    t.columns = {"E", "rho_mc", "stderr", "rho_exact"};
    double max_sigma = 0.0;
    long long outliers = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double rho_mc = est.mean[i].real();
        const double se = est.std_error[i];
        const PointCheck pc =
            check_point(std::abs(rho_mc - rho_exact[i]), se, std::abs(rho_exact[i]),
                        cfg.tolerances);
        max_sigma = std::max(max_sigma, pc.sigma_distance);
        if (!pc.pass) ++outliers;
        t.rows.push_back({grid[i], rho_mc, se, rho_exact[i]});
    }
    const bool pass = outliers <= allowed_outliers(grid.size());

    json summary;
    summary["points"] = grid.size();
    summary["samples"] = est.samples;
    summary["max_sigma_distance"] = std::isfinite(max_sigma) ? json(max_sigma) : json();
    summary["sigma_tolerance"] = cfg.tolerances.sigma;
    summary["outliers"] = outliers;
    summary["allowed_outliers"] = allowed_outliers(grid.size());
    summary["pass"] = pass;
    write_table(ctx, t, summary);

    std::cout << "dos: max deviation " << max_sigma << " sigma over " << grid.size()
              << " points -> " << (pass ? "pass" : "FAIL") << "\n";
    return pass ? kOk : kBreach;
}

int cmd_trace(RunContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    const auto& grid = cfg.probe.e_grid;
    const disorder::DisorderModel model = susylab::config::build_disorder(cfg);

    std::vector<cplx> exact(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        exact[i] = lloyd::exact_trace(cfg.lattice, model, probe_at(cfg, grid[i]));

    mc::McPlan plan = plan_for(ctx);
    plan.target = mc::Functional::trace_grid;
    plan.e_grid = grid;
    const mc::McEstimate est =
        mc::mc_average(plan, cfg.lattice, model, probe_at(cfg, grid.front()));

    Table t;
    t.columns = {"E", "re_tr_mc", "im_tr_mc", "stderr", "re_tr_exact", "im_tr_exact",
                 "sigma_distance"};
    double max_sigma = 0.0;
    long long outliers = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const PointCheck pc = check_point(std::abs(est.mean[i] - exact[i]), est.std_error[i],
                                          std::abs(exact[i]), cfg.tolerances);
        max_sigma = std::max(max_sigma, pc.sigma_distance);
        if (!pc.pass) ++outliers;
        t.rows.push_back({grid[i], est.mean[i].real(), est.mean[i].imag(), est.std_error[i],
                          exact[i].real(), exact[i].imag(), pc.sigma_distance});
    }
    const bool pass = outliers <= allowed_outliers(grid.size());

    json summary;
    summary["points"] = grid.size();
    summary["samples"] = est.samples;
    summary["max_sigma_distance"] = std::isfinite(max_sigma) ? json(max_sigma) : json();
    summary["sigma_tolerance"] = cfg.tolerances.sigma;
    summary["outliers"] = outliers;
    summary["allowed_outliers"] = allowed_outliers(grid.size());
    summary["pass"] = pass;
    write_table(ctx, t, summary);

    std::cout << "trace: max deviation " << max_sigma << " sigma over " << grid.size()
              << " points -> " << (pass ? "pass" : "FAIL") << "\n";
    return pass ? kOk : kBreach;
}

int cmd_g2(RunContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    Table t;
    t.columns = {"E", "g2_polar", "g2_quadrature", "rel_error", "imag_residue"};
    double max_rel = 0.0;
    bool pass = true;
    for (double E : cfg.probe.e_grid) {
        const superpolar::G2Report r =
            superpolar::verify_g2_single_site(E, cfg.probe.epsilon, cfg.probe.lambda);
        max_rel = std::max(max_rel, r.rel_error);
        if (r.rel_error > cfg.tolerances.rel_error) pass = false;
        t.rows.push_back({E, r.value, r.oracle, r.rel_error, r.imag_residue});
    }
    json summary;
    summary["points"] = cfg.probe.e_grid.size();
    summary["max_rel_error"] = max_rel;
    summary["rel_tolerance"] = cfg.tolerances.rel_error;
    summary["pass"] = pass;
    write_table(ctx, t, summary);

    std::cout << "g2: max relative error " << max_rel << " -> " << (pass ? "pass" : "FAIL")
              << "\n";
    return pass ? kOk : kBreach;
}

int cmd_genfun(RunContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    const disorder::DisorderModel model = susylab::config::build_disorder(cfg);

    Table t;
    t.columns = {"E", "E_tilde", "re_g_mc", "im_g_mc", "stderr", "re_g_exact", "im_g_exact",
                 "sigma_distance"};
    double max_sigma = 0.0;
    long long outliers = 0;
    for (double E : cfg.probe.e_grid) {
        const resolvent::SpectralProbe probe = probe_at(cfg, E);
        const cplx exact = lloyd::exact_genfun(cfg.lattice, model, probe);
        mc::McPlan plan = plan_for(ctx);
        plan.target = mc::Functional::gen_function;
        const mc::McEstimate est = mc::mc_average(plan, cfg.lattice, model, probe);
        const PointCheck pc = check_point(std::abs(est.mean[0] - exact), est.std_error[0],
                                          std::abs(exact), cfg.tolerances);
        max_sigma = std::max(max_sigma, pc.sigma_distance);
        if (!pc.pass) ++outliers;
        t.rows.push_back({E, cfg.probe.e_tilde, est.mean[0].real(), est.mean[0].imag(),
                          est.std_error[0], exact.real(), exact.imag(), pc.sigma_distance});
    }
    const bool pass = outliers <= allowed_outliers(cfg.probe.e_grid.size());

    json summary;
    summary["points"] = cfg.probe.e_grid.size();
    summary["samples"] = cfg.mc.samples;
    summary["max_sigma_distance"] = std::isfinite(max_sigma) ? json(max_sigma) : json();
    summary["sigma_tolerance"] = cfg.tolerances.sigma;
    summary["outliers"] = outliers;
    summary["allowed_outliers"] = allowed_outliers(cfg.probe.e_grid.size());
    summary["pass"] = pass;
    write_table(ctx, t, summary);

    std::cout << "genfun: max deviation " << max_sigma << " sigma -> "
              << (pass ? "pass" : "FAIL") << "\n";
    return pass ? kOk : kBreach;
}

int cmd_toymodel(RunContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    const resolvent::SpectralProbe probe = probe_at(cfg, cfg.probe.e_grid.front());
    const lloyd::SweepResult sweep = lloyd::toymodel_error_sweep(
        cfg.lattice, cfg.sweep.deltas, cfg.probe.lambda, probe, cfg.mc.samples);

    Table t;
    const bool with_mc = cfg.mc.samples > 0;
    t.columns = with_mc ? std::vector<std::string>{"delta", "deviation", "mc_deviation",
                                                   "std_error"}
                        : std::vector<std::string>{"delta", "deviation"};
    for (const auto& row : sweep.rows) {
        if (with_mc)
            t.rows.push_back({row.delta, row.deviation, row.mc_deviation, row.std_error});
        else
            t.rows.push_back({row.delta, row.deviation});
    }

    std::size_t fitted = 0;
    for (double d : cfg.sweep.deltas)
        if (d > 0.0) ++fitted;
    const bool slope_defined = fitted >= 2;
    bool pass = !slope_defined || std::abs(sweep.slope - 2.0) <= cfg.tolerances.slope_band;

    json summary;
    summary["floor"] = sweep.floor;
    summary["slope"] = slope_defined ? json(sweep.slope) : json();
    summary["slope_target"] = 2.0;
    summary["slope_band"] = cfg.tolerances.slope_band;

    if (cfg.sweep.decomposition_check) {
        const lattice::LatticeSpec two{1, 2, lattice::Boundary::restriction};
        const double eps_oracle = cfg.probe.epsilon > 0.0 ? cfg.probe.epsilon : 1e-5;
        json checks = json::array();
        for (double d : cfg.sweep.deltas) {
            if (d <= 0.0) continue;
            const lloyd::ToymodelDecomposition dec = lloyd::toymodel_decomposition(
                two, d, cfg.probe.lambda, probe.E, cfg.probe.epsilon);
            const cplx oracle = lloyd::toymodel_oracle(
                two, d, {probe.E, 0.0, eps_oracle, cfg.probe.lambda});
            const double rel = std::abs(dec.total - oracle) / std::abs(oracle);
            if (rel > cfg.tolerances.decomposition_rel) pass = false;
            checks.push_back({{"delta", d}, {"rel_deviation", rel}});
        }
        summary["decomposition_check"] = checks;
    }
    summary["pass"] = pass;
    write_table(ctx, t, summary);

    if (slope_defined)
        std::cout << "toymodel: slope " << sweep.slope << " (target 2 +/- "
                  << cfg.tolerances.slope_band << "), floor " << sweep.floor << " -> "
                  << (pass ? "pass" : "FAIL") << "\n";
    else
        std::cout << "toymodel: floor " << sweep.floor << " (no slope fit: fewer than two "
                  << "positive deltas) -> " << (pass ? "pass" : "FAIL") << "\n";
    return pass ? kOk : kBreach;
}

int cmd_decomposition(RunContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    if (lattice::site_count(cfg.lattice) != 2)
        throw usage_error(
            "decomposition needs the two-site lattice: set lattice {\"d\": 1, \"L\": 2}");
    const double E = cfg.probe.e_grid.front();
    const lloyd::ToymodelDecomposition dec = lloyd::toymodel_decomposition(
        cfg.lattice, cfg.disorder.delta, cfg.probe.lambda, E, cfg.probe.epsilon);
    const double eps_oracle = cfg.probe.epsilon > 0.0 ? cfg.probe.epsilon : 1e-5;
    const cplx oracle =
        lloyd::toymodel_oracle(cfg.lattice, cfg.disorder.delta,
                               {E, 0.0, eps_oracle, cfg.probe.lambda});
    const double rel = std::abs(dec.total - oracle) / std::abs(oracle);
    const bool pass = rel <= cfg.tolerances.decomposition_rel;

    json report;
    report["delta"] = cfg.disorder.delta;
    report["lambda"] = cfg.probe.lambda;
    report["E"] = E;
    report["epsilon"] = cfg.probe.epsilon;
    report["components"] = {{"region_pp", as_json(dec.region_pp)},
                            {"region_pm", as_json(dec.region_pm)},
                            {"region_mp", as_json(dec.region_mp)},
                            {"remainder", as_json(dec.remainder)}};
    report["total"] = as_json(dec.total);
    report["oracle"] = as_json(oracle);
    report["oracle_epsilon"] = eps_oracle;
    report["rel_deviation"] = rel;
    report["rel_tolerance"] = cfg.tolerances.decomposition_rel;
    report["quad_error"] = dec.quad_error;
    report["pass"] = pass;
    write_report(ctx, report);

    std::cout << "decomposition: relative deviation " << rel << " (tolerance "
              << cfg.tolerances.decomposition_rel << ") -> " << (pass ? "pass" : "FAIL")
              << "\n";
    return pass ? kOk : kBreach;
}

int cmd_bounds(RunContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    const double E = cfg.probe.e_grid.front();
    const lloyd::DecayBoundReport ct =
        lloyd::combes_thomas_check(cfg.lattice, cfg.probe.lambda, E, cfg.bounds.eta);
    const lloyd::SchurReport schur =
        lloyd::schur_bounds_check(cfg.lattice, cfg.disorder.delta, cfg.probe.lambda, E);
    const bool pass = ct.passed && schur.passed;

    json report;
    report["decay"] = {{"passed", ct.passed},
                       {"decay_rate", ct.decay_rate},
                       {"worst_ratio", ct.worst_ratio},
                       {"worst_i", ct.worst_i},
                       {"worst_j", ct.worst_j},
                       {"quad_margin", ct.quad_margin},
                       {"eta", cfg.bounds.eta}};
    report["schur"] = {{"passed", schur.passed},
                       {"min_re_eig_schur", schur.min_re_eig_schur},
                       {"min_re_eig_bulk", schur.min_re_eig_bulk},
                       {"quad_margin", schur.quad_margin},
                       {"k_empirical", schur.k_empirical},
                       {"det_identity_rel_err", schur.det_identity_rel_err}};
    report["pass"] = pass;
    write_report(ctx, report);

    std::cout << "bounds: decay worst ratio " << ct.worst_ratio << ", Schur margin "
              << schur.quad_margin << " -> " << (pass ? "pass" : "FAIL") << "\n";
    return pass ? kOk : kBreach;
}

int cmd_spectrum(RunContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    const int n = lattice::site_count(cfg.lattice);
    std::vector<double> v(std::size_t(n), 0.0);
    if (cfg.probe.lambda != 0.0) {
        const disorder::DisorderModel model = susylab::config::build_disorder(cfg);
        disorder::RngStream rng{cfg.mc.seed, 0, 0};
        v = disorder::sample_potential(model, rng);
    }
    const lattice::Hamiltonian h = lattice::assemble(cfg.lattice, cfg.probe.lambda, v, 1);
    const std::vector<double> ev = resolvent::eig_spectrum(h);

    Table t;
    t.columns = {"index", "eigenvalue"};
    for (std::size_t i = 0; i < ev.size(); ++i) t.rows.push_back({double(i), ev[i]});

    json summary;
    summary["sites"] = n;
    summary["min"] = ev.front();
    summary["max"] = ev.back();
    summary["pass"] = true;
    write_table(ctx, t, summary);

    std::cout << "spectrum: " << n << " eigenvalues in [" << ev.front() << ", " << ev.back()
              << "]\n";
    return kOk;
}

// ----- verify suites --------------------------------------------------------

struct CheckRow {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::string fmt3(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

cplx random_unit_box(disorder::RngStream& rng) {
    return {2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
}

std::vector<CheckRow> suite_grassmann() {
    std::vector<CheckRow> rows;

    // Gaussian Berezin integral against the LU determinant, 200 random draws
    double max_err = 0.0;
    for (int k = 0; k < 200; ++k) {
        const int n = k % 4 + 1;
        disorder::RngStream rng{40961, std::uint64_t(k), 0};
        Eigen::MatrixXcd m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = random_unit_box(rng);
        const cplx det = m.partialPivLu().determinant();
        max_err = std::max(max_err, std::abs(grassmann::grassmann_gaussian(m) - det));
    }
    rows.push_back({"gaussian-det-fuzz", max_err < 1e-12,
                    "max |integral - det| = " + fmt3(max_err) + " over 200 draws"});

    // odd elements anticommute: theta eta + eta theta = 0
    double max_anti = 0.0;
    for (int k = 0; k < 20; ++k) {
        disorder::RngStream rng{52361, std::uint64_t(k), 0};
        grassmann::GrassmannElement theta(6), eta(6);
        for (int j = 1; j <= 6; ++j) {
            theta += random_unit_box(rng) * grassmann::GrassmannElement::generator(6, j);
            eta += random_unit_box(rng) * grassmann::GrassmannElement::generator(6, j);
        }
        const auto sum = theta * eta + eta * theta;
        max_anti = std::max(
            max_anti, max_coeff_distance(sum, grassmann::GrassmannElement(6)));
    }
    rows.push_back({"odd-anticommutation", max_anti < 1e-14,
                    "max residual " + fmt3(max_anti) + " over 20 draws"});

    // exponential lift of a nilpotent argument terminates exactly
    {
        using grassmann::GrassmannElement;
        GrassmannElement a = GrassmannElement::scalar(4, 0.3);
        a += GrassmannElement::monomial(4, 0b0011, 0.7);
        a += GrassmannElement::monomial(4, 0b1100, 0.2);
        const GrassmannElement lifted = grassmann::lift_function(grassmann::exp_function(), a);
        GrassmannElement expect = GrassmannElement::scalar(4, 1.0);
        expect += GrassmannElement::monomial(4, 0b0011, 0.7);
        expect += GrassmannElement::monomial(4, 0b1100, 0.2);
        expect += GrassmannElement::monomial(4, 0b1111, 0.14);
        expect *= std::exp(cplx(0.3, 0.0));
        const double err = max_coeff_distance(lifted, expect);
        rows.push_back({"exp-lift-taylor", err < 1e-13, "max coefficient error " + fmt3(err)});
    }

    // superdeterminant is multiplicative on random (1|1) supermatrices
    double max_sdet = 0.0;
    for (int k = 0; k < 20; ++k) {
        disorder::RngStream rng{77141, std::uint64_t(k), 0};
        const auto even = [&](bool unit_body) {
            using grassmann::GrassmannElement;
            cplx body = random_unit_box(rng);
            if (unit_body && std::abs(body) < 0.5) body += cplx(1.0, 0.0);
            GrassmannElement e = GrassmannElement::scalar(4, body);
            e += GrassmannElement::monomial(4, 0b0011, random_unit_box(rng));
            e += GrassmannElement::monomial(4, 0b0101, random_unit_box(rng));
            return e;
        };
        const auto odd = [&]() {
            grassmann::GrassmannElement o(4);
            for (int j = 1; j <= 4; ++j)
                o += random_unit_box(rng) * grassmann::GrassmannElement::generator(4, j);
            return o;
        };
        grassmann::SuperMatrix M(1, 1, 4), N(1, 1, 4);
        M.at(0, 0) = even(false);
        M.at(0, 1) = odd();
        M.at(1, 0) = odd();
        M.at(1, 1) = even(true);
        N.at(0, 0) = even(false);
        N.at(0, 1) = odd();
        N.at(1, 0) = odd();
        N.at(1, 1) = even(true);
        const auto lhs = grassmann::sdet(grassmann::supermatrix_product(M, N));
        const auto rhs = grassmann::sdet(M) * grassmann::sdet(N);
        max_sdet = std::max(max_sdet, max_coeff_distance(lhs, rhs));
    }
    rows.push_back({"sdet-multiplicative", max_sdet < 1e-10,
                    "max coefficient error " + fmt3(max_sdet) + " over 20 draws"});
    return rows;
}

std::vector<CheckRow> suite_susy() {
    std::vector<CheckRow> rows;
    const Eigen::MatrixXcd one = Eigen::MatrixXcd::Identity(1, 1);

    {
        const auto r = superpolar::verify_susy_representation(one, one);
        rows.push_back({"unit-weight-normalization",
                        r.pass && std::abs(r.integral - cplx(1.0, 0.0)) < 1e-8,
                        "integral deviates from 1 by " + fmt3(std::abs(r.integral - 1.0))});
    }
    {
        Eigen::MatrixXcd a1 = cplx(1.4, 0.6) * one, a2 = cplx(0.5, -0.9) * one;
        const auto r = superpolar::verify_susy_representation(a1, a2);
        rows.push_back({"one-site-det-ratio", r.pass,
                        "det rel err " + fmt3(r.det_rel_error) + ", entry err " +
                            fmt3(r.entry_max_error)});
    }
    {
        Eigen::MatrixXcd a1(2, 2), a2(2, 2);
        a1 << cplx(1.3, 0.4), cplx(0.31, -0.12), cplx(-0.05, 0.22), cplx(0.9, -0.1);
        a2 << cplx(0.7, 0.2), cplx(-0.4, 0.0), cplx(0.0, 0.25), cplx(1.6, -0.5);
        const auto r = superpolar::verify_susy_representation(a1, a2);
        rows.push_back({"two-site-det-ratio", r.pass,
                        "det rel err " + fmt3(r.det_rel_error) + ", entry err " +
                            fmt3(r.entry_max_error)});
    }
    return rows;
}

// smooth compactly supported profile of the radial pair variable, with the
// value exp(-1) at the origin
grassmann::ScalarFunction mollifier() {
    return {1, [](int k, cplx x) -> cplx {
                const double u = x.real();
                if (std::abs(u) >= 1.0 / std::sqrt(2.0)) return 0.0;
                const double d = 1.0 - 2.0 * u * u;
                const double val = std::exp(-1.0 / d);
                return k == 0 ? val : val * (-4.0 * u) / (d * d);
            }};
}

// smooth bump supported on [0.3, 2]: vanishes in a neighborhood of zero
grassmann::ScalarFunction bump() {
    return {1, [](int k, cplx x) -> cplx {
                const double u = x.real();
                if (u <= 0.3 || u >= 2.0) return 0.0;
                const double g = (u - 0.3) * (2.0 - u);
                const double val = std::exp(-1.0 / g);
                return k == 0 ? val : val * (2.3 - 2.0 * u) / (g * g);
            }};
}

superpolar::SusyIntegrand gaussian_weight(int n) {
    superpolar::SusyIntegrand f;
    f.sites = n;
    f.eval = [n](const superpolar::SuperVector& sv) {
        grassmann::GrassmannElement s(2 * n);
        for (int j = 0; j < n; ++j) s += sv.pair(j);
        return grassmann::lift_function(grassmann::exp_function(), -s);
    };
    return f;
}

std::vector<CheckRow> suite_polar() {
    std::vector<CheckRow> rows;

    {
        superpolar::SusyIntegrand phi;
        phi.sites = 1;
        phi.eval = [](const superpolar::SuperVector& sv) {
            return grassmann::lift_function(mollifier(), sv.pair(0));
        };
        const auto dec = superpolar::polar_decomposition(phi);
        const double live = std::abs(dec.terms[0].value);
        const double pinned = std::abs(dec.terms[1].value - std::exp(-1.0));
        const double total = std::abs(dec.total - std::exp(-1.0));
        rows.push_back({"mollifier-splits-to-exp-minus-one",
                        live < 1e-9 && pinned < 1e-12 && total < 1e-9,
                        "split (" + fmt3(live) + ", e^-1 + " + fmt3(pinned) + "), total off by " +
                            fmt3(total)});
    }

    {
        std::vector<superpolar::SusyIntegrand> suite;
        suite.push_back(gaussian_weight(1));

        superpolar::SusyIntegrand moment;
        moment.sites = 1;
        moment.eval = [](const superpolar::SuperVector& sv) {
            return sv.zbar[0] * sv.z[0] *
                   grassmann::lift_function(grassmann::exp_function(), -sv.pair(0));
        };
        suite.push_back(moment);

        Eigen::MatrixXcd a(2, 2);
        a << cplx(1.1, 0.2), cplx(0.25, 0.1), cplx(0.2, -0.15), cplx(0.9, -0.1);
        superpolar::SusyIntegrand coupled;
        coupled.sites = 2;
        coupled.eval = [a](const superpolar::SuperVector& sv) {
            return grassmann::lift_function(grassmann::exp_function(), -sv.quadratic(a, a));
        };
        suite.push_back(coupled);

        double worst = 0.0;
        for (const auto& f : suite) {
            const cplx flat = superpolar::flat_integral(f);
            const auto dec = superpolar::polar_decomposition(f);
            worst = std::max(worst, std::abs(dec.total - flat) / (1.0 + std::abs(flat)));
        }
        rows.push_back({"alpha-sum-matches-flat-integral", worst < 1e-6,
                        "worst relative gap " + fmt3(worst) + " over 3 integrands"});
    }

    {
        superpolar::SusyIntegrand f;
        f.sites = 1;
        f.eval = [](const superpolar::SuperVector& sv) {
            return grassmann::lift_function(bump(), sv.zbar[0] * sv.z[0]) *
                   (-(sv.chibar[0] * sv.chi[0]));
        };
        const auto dec = superpolar::polar_decomposition(f);
        const double pinned = std::abs(dec.terms[1].value);
        rows.push_back({"compact-support-kills-pinned-terms", pinned < 1e-10,
                        "pinned term magnitude " + fmt3(pinned)});
    }
    return rows;
}

std::vector<CheckRow> suite_decomposition() {
    std::vector<CheckRow> rows;
    const lattice::LatticeSpec two{1, 2, lattice::Boundary::restriction};

    for (double d : {0.1, 0.3}) {
        const auto dec = lloyd::toymodel_decomposition(two, d, 1.0, 0.0, 0.0);
        const cplx oracle = lloyd::toymodel_oracle(two, d, {0.0, 0.0, 1e-5, 1.0});
        const double rel = std::abs(dec.total - oracle) / std::abs(oracle);
        rows.push_back({"total-vs-oracle-delta-" + fmt3(d), rel < 1e-4,
                        "relative deviation " + fmt3(rel)});
    }

    {
        bool ok = true;
        std::string detail = "|remainder|/delta^2 =";
        for (double d : {0.1, 0.2}) {
            const auto dec = lloyd::toymodel_decomposition(two, d, 1.0, 0.0, 0.0);
            const double ratio = std::abs(dec.remainder) / (d * d);
            ok = ok && ratio > 1.9 && ratio < 2.1;
            detail += " " + fmt3(ratio);
        }
        rows.push_back({"remainder-shrinks-quadratically", ok, detail});
    }
    return rows;
}

std::vector<CheckRow> suite_bounds() {
    std::vector<CheckRow> rows;

    {
        bool ok = true;
        double worst = 0.0;
        for (double lam : {0.5, 1.0, 2.0}) {
            const auto r = lloyd::combes_thomas_check({1, 16, lattice::Boundary::restriction},
                                                      lam, 0.0, 1.0);
            ok = ok && r.passed;
            worst = std::max(worst, r.worst_ratio);
        }
        rows.push_back({"decay-bound-d1", ok,
                        "worst entry/bound ratio " + fmt3(worst) + " over lambda grid"});
    }
    {
        const auto open = lloyd::combes_thomas_check({2, 8, lattice::Boundary::restriction},
                                                     1.0, 0.0, 1.0);
        const auto wrap = lloyd::combes_thomas_check({2, 6, lattice::Boundary::periodic},
                                                     1.0, 0.0, 1.0);
        rows.push_back({"decay-bound-d2", open.passed && wrap.passed,
                        "worst ratios " + fmt3(open.worst_ratio) + " (restriction), " +
                            fmt3(wrap.worst_ratio) + " (periodic)"});
    }
    {
        const auto r = lloyd::schur_bounds_check({1, 16, lattice::Boundary::restriction},
                                                 0.25, 1.0, 0.0);
        rows.push_back({"schur-margins-and-identity", r.passed,
                        "min Re eig " + fmt3(r.min_re_eig_schur) + ", det identity err " +
                            fmt3(r.det_identity_rel_err)});
    }
    {
        double kmin = kInf, kmax = 0.0;
        for (int L : {8, 16, 32}) {
            const auto r = lloyd::schur_bounds_check({1, L, lattice::Boundary::restriction},
                                                     0.25, 1.0, 0.0);
            kmin = std::min(kmin, r.k_empirical);
            kmax = std::max(kmax, r.k_empirical);
        }
        rows.push_back({"trace-constant-stability", kmax / kmin < 2.0,
                        "empirical constant in [" + fmt3(kmin) + ", " + fmt3(kmax) + "]"});
    }
    return rows;
}

int cmd_verify(RunContext& ctx, const std::string& suite) {
    const std::map<std::string, std::function<std::vector<CheckRow>()>> suites = {
        {"grassmann", suite_grassmann},
        {"susy", suite_susy},
        {"polar", suite_polar},
        {"decomposition", suite_decomposition},
        {"bounds", suite_bounds},
    };
    const auto it = suites.find(suite);
    if (it == suites.end()) throw usage_error("unknown verify suite " + suite);

    const std::vector<CheckRow> rows = it->second();
    bool all = true;
    int passed = 0;
    std::cout << "verify " << suite << "\n";
    json checks = json::array();
    for (const auto& row : rows) {
        all = all && row.pass;
        passed += row.pass ? 1 : 0;
        std::cout << "  [" << (row.pass ? " ok " : "FAIL") << "] " << row.name << ": "
                  << row.detail << "\n";
        checks.push_back({{"name", row.name}, {"pass", row.pass}, {"detail", row.detail}});
    }
    std::cout << "  " << passed << "/" << rows.size() << " checks passed\n";

    json report;
    report["suite"] = suite;
    report["checks"] = checks;
    report["pass"] = all;
    write_report(ctx, report);
    return all ? kOk : kBreach;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(susylab::kVersion) +
                 " -- disorder-averaged lattice resolvent experiments"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int threads = 1;
    std::string suite;

    app.add_option("--config", config_path, "JSON experiment config (defaults when omitted)");
    CLI::Option* seed_opt = app.add_option("--seed", seed, "override mc.seed from the config");
    app.add_option("--threads", threads, "worker threads; results do not depend on this")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "output directory (created when missing)");

    app.add_subcommand("dos", "Monte Carlo smoothed density of states against the exact curve");
    app.add_subcommand("trace", "Monte Carlo averaged resolvent trace against the exact value");
    app.add_subcommand("g2", "single-site second moment: polar split against direct quadrature");
    app.add_subcommand("genfun", "Monte Carlo determinant-ratio generating function vs exact");
    app.add_subcommand("toymodel", "pair-correlation error sweep with slope fit");
    app.add_subcommand("decomposition", "two-site region split against the nested-quadrature oracle");
    app.add_subcommand("bounds", "resolvent decay and Schur-complement bound checks");
    app.add_subcommand("spectrum", "eigenvalues of one disorder realization");
    CLI::App* verify = app.add_subcommand("verify", "run a named invariant suite");
    verify->add_option("suite", suite, "grassmann|susy|polar|decomposition|bounds")
        ->required()
        ->check(CLI::IsMember({"grassmann", "susy", "polar", "decomposition", "bounds"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        RunContext ctx;
        ctx.cfg = config_path.empty() ? ExperimentConfig{}
                                      : susylab::config::load_config(config_path);
        if (seed_opt->count() > 0) ctx.cfg.mc.seed = seed;
        ctx.threads = threads;
        ctx.out_dir = out_dir;
        ctx.command = app.get_subcommands().front()->get_name();
        if (ctx.cfg.output.path.empty()) ctx.cfg.output.path = ctx.command;
        ctx.config_echo = susylab::config::echo_config(ctx.cfg);
        try {
            fs::create_directories(ctx.out_dir);
        } catch (const fs::filesystem_error& e) {
            throw usage_error(std::string("cannot create output directory: ") + e.what());
        }

        if (ctx.command == "dos") return cmd_dos(ctx);
        if (ctx.command == "trace") return cmd_trace(ctx);
        if (ctx.command == "g2") return cmd_g2(ctx);
        if (ctx.command == "genfun") return cmd_genfun(ctx);
        if (ctx.command == "toymodel") return cmd_toymodel(ctx);
        if (ctx.command == "decomposition") return cmd_decomposition(ctx);
        if (ctx.command == "bounds") return cmd_bounds(ctx);
        if (ctx.command == "spectrum") return cmd_spectrum(ctx);
        if (ctx.command == "verify") return cmd_verify(ctx, suite);
        throw usage_error("unknown command " + ctx.command);
    } catch (const usage_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    }
}
