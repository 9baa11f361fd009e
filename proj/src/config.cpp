#include "susylab/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "susylab/errors.hpp"

namespace susylab::config {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw usage_error("config: " + path + " " + what);
}

// Unknown keys are rejected everywhere so typos never silently fall back to
// a default.
void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) throw usage_error("config: unknown key \"" + it.key() + "\" in " + path);
    }
}

const json* find(const json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

const json& as_object(const json& v, const std::string& path) {
    if (!v.is_object()) bad(path, "must be an object");
    return v;
}

double as_num(const json& v, const std::string& path) {
    if (!v.is_number()) bad(path, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) bad(path, "must be finite");
    return x;
}

long long as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) bad(path, "must be an integer");
    return v.get<long long>();
}

std::uint64_t as_u64(const json& v, const std::string& path) {
    if (!v.is_number_unsigned()) bad(path, "must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

std::string as_str(const json& v, const std::string& path) {
    if (!v.is_string()) bad(path, "must be a string");
    return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) bad(path, "must be a boolean");
    return v.get<bool>();
}

std::vector<double> as_num_array(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) bad(path, "must be a nonempty array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(as_num(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

void parse_lattice(const json& j, ExperimentConfig& cfg) {
    check_keys(j, "lattice", {"d", "L", "bc"});
    if (const json* v = find(j, "d")) {
        const long long d = as_int(*v, "lattice.d");
        if (d < 1 || d > 8) bad("lattice.d", "must lie in [1, 8]");
        cfg.lattice.d = int(d);
    }
    if (const json* v = find(j, "L")) {
        const long long L = as_int(*v, "lattice.L");
        if (L < 1 || L > 4096) bad("lattice.L", "must lie in [1, 4096]");
        cfg.lattice.L = int(L);
    }
    if (const json* v = find(j, "bc"))
        cfg.lattice.bc = lattice::boundary_from_string(as_str(*v, "lattice.bc"));
}

void parse_disorder(const json& j, ExperimentConfig& cfg) {
    check_keys(j, "disorder", {"kind", "delta", "pair", "T_file"});
    if (const json* v = find(j, "kind")) {
        const std::string s = as_str(*v, "disorder.kind");
        if (s == "iid")
            cfg.disorder.kind = disorder::Kind::iid;
        else if (s == "nonneg_correlated")
            cfg.disorder.kind = disorder::Kind::nonneg_correlated;
        else if (s == "toymodel")
            cfg.disorder.kind = disorder::Kind::toymodel;
        else
            bad("disorder.kind", "must be \"iid\", \"nonneg_correlated\" or \"toymodel\"");
    }
    if (const json* v = find(j, "delta")) {
        const double d = as_num(*v, "disorder.delta");
        if (!(d >= 0.0 && d < 1.0)) bad("disorder.delta", "must lie in [0, 1)");
        cfg.disorder.delta = d;
    }
    if (const json* v = find(j, "pair")) {
        if (!v->is_array() || v->size() != 2) bad("disorder.pair", "must be a pair of site indices");
        const long long a = as_int((*v)[0], "disorder.pair[0]");
        const long long b = as_int((*v)[1], "disorder.pair[1]");
        if (a < 0 || b < 0 || a == b) bad("disorder.pair", "must name two distinct sites");
        cfg.disorder.pair0 = int(a);
        cfg.disorder.pair1 = int(b);
    }
    if (const json* v = find(j, "T_file")) cfg.disorder.t_file = as_str(*v, "disorder.T_file");
}

void parse_probe(const json& j, ExperimentConfig& cfg) {
    check_keys(j, "probe", {"E", "E_grid", "E_tilde", "epsilon", "lambda"});
    const json* e = find(j, "E");
    const json* grid = find(j, "E_grid");
    if (e && grid) bad("probe", "gives both E and E_grid; use one");
    if (e) {
        cfg.probe.e_grid = {as_num(*e, "probe.E")};
        cfg.probe.grid_given = false;
    }
    if (grid) {
        cfg.probe.e_grid = as_num_array(*grid, "probe.E_grid");
        cfg.probe.grid_given = true;
    }
    if (const json* v = find(j, "E_tilde")) cfg.probe.e_tilde = as_num(*v, "probe.E_tilde");
    if (const json* v = find(j, "epsilon")) {
        const double eps = as_num(*v, "probe.epsilon");
        if (eps < 0.0) bad("probe.epsilon", "must be nonnegative");
        cfg.probe.epsilon = eps;
    }
    if (const json* v = find(j, "lambda")) {
        const double lam = as_num(*v, "probe.lambda");
        if (lam < 0.0) bad("probe.lambda", "must be nonnegative");
        cfg.probe.lambda = lam;
    }
}

void parse_mc(const json& j, ExperimentConfig& cfg) {
    check_keys(j, "mc", {"samples", "seed"});
    if (const json* v = find(j, "samples")) {
        const long long m = as_int(*v, "mc.samples");
        if (m < 0) bad("mc.samples", "must be nonnegative");
        cfg.mc.samples = m;
    }
    if (const json* v = find(j, "seed")) cfg.mc.seed = as_u64(*v, "mc.seed");
}

void parse_sweep(const json& j, ExperimentConfig& cfg) {
    check_keys(j, "sweep", {"deltas", "decomposition_check"});
    if (const json* v = find(j, "deltas")) {
        cfg.sweep.deltas = as_num_array(*v, "sweep.deltas");
        for (double d : cfg.sweep.deltas)
            if (!(d >= 0.0 && d < 1.0)) bad("sweep.deltas", "entries must lie in [0, 1)");
    }
    if (const json* v = find(j, "decomposition_check"))
        cfg.sweep.decomposition_check = as_bool(*v, "sweep.decomposition_check");
}

void parse_bounds(const json& j, ExperimentConfig& cfg) {
    check_keys(j, "bounds", {"eta"});
    if (const json* v = find(j, "eta")) {
        const double eta = as_num(*v, "bounds.eta");
        if (!(eta > 0.0)) bad("bounds.eta", "must be positive");
        cfg.bounds.eta = eta;
    }
}

void parse_output(const json& j, ExperimentConfig& cfg) {
    check_keys(j, "output", {"path", "format"});
    if (const json* v = find(j, "path")) cfg.output.path = as_str(*v, "output.path");
    if (const json* v = find(j, "format")) {
        const std::string f = as_str(*v, "output.format");
        if (f != "csv" && f != "json") bad("output.format", "must be \"csv\" or \"json\"");
        cfg.output.format = f;
    }
}

void parse_tolerances(const json& j, ExperimentConfig& cfg) {
    check_keys(j, "tolerances", {"sigma", "rel_error", "decomposition_rel", "slope_band"});
    const auto positive = [&](const char* key, double& slot) {
        if (const json* v = find(j, key)) {
            const double x = as_num(*v, std::string("tolerances.") + key);
            if (!(x > 0.0)) bad(std::string("tolerances.") + key, "must be positive");
            slot = x;
        }
    };
    positive("sigma", cfg.tolerances.sigma);
    positive("rel_error", cfg.tolerances.rel_error);
    positive("decomposition_rel", cfg.tolerances.decomposition_rel);
    positive("slope_band", cfg.tolerances.slope_band);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // the message carries "parse error at line L, column C: ..."
        throw usage_error(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw usage_error("config: document root must be a JSON object");
    check_keys(j, "the top level",
               {"lattice", "disorder", "probe", "mc", "sweep", "bounds", "output", "tolerances"});

    ExperimentConfig cfg;
    if (const json* v = find(j, "lattice")) parse_lattice(as_object(*v, "lattice"), cfg);
    if (const json* v = find(j, "disorder")) parse_disorder(as_object(*v, "disorder"), cfg);
    if (const json* v = find(j, "probe")) parse_probe(as_object(*v, "probe"), cfg);
    if (const json* v = find(j, "mc")) parse_mc(as_object(*v, "mc"), cfg);
    if (const json* v = find(j, "sweep")) parse_sweep(as_object(*v, "sweep"), cfg);
    if (const json* v = find(j, "bounds")) parse_bounds(as_object(*v, "bounds"), cfg);
    if (const json* v = find(j, "output")) parse_output(as_object(*v, "output"), cfg);
    if (const json* v = find(j, "tolerances")) parse_tolerances(as_object(*v, "tolerances"), cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw usage_error("config: cannot read file " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config(buf.str());
}

std::string echo_config(const ExperimentConfig& cfg) {
    json j;
    j["lattice"] = {{"d", cfg.lattice.d},
                    {"L", cfg.lattice.L},
                    {"bc", lattice::to_string(cfg.lattice.bc)}};

    const char* kind = cfg.disorder.kind == disorder::Kind::iid ? "iid"
                       : cfg.disorder.kind == disorder::Kind::nonneg_correlated
                           ? "nonneg_correlated"
                           : "toymodel";
    j["disorder"] = {{"kind", kind},
                     {"delta", cfg.disorder.delta},
                     {"pair", {cfg.disorder.pair0, cfg.disorder.pair1}},
                     {"T_file", cfg.disorder.t_file}};

    json probe = {{"E_tilde", cfg.probe.e_tilde},
                  {"epsilon", cfg.probe.epsilon},
                  {"lambda", cfg.probe.lambda}};
    if (cfg.probe.grid_given)
        probe["E_grid"] = cfg.probe.e_grid;
    else
        probe["E"] = cfg.probe.e_grid.front();
    j["probe"] = probe;

    j["mc"] = {{"samples", cfg.mc.samples}, {"seed", cfg.mc.seed}};
    j["sweep"] = {{"deltas", cfg.sweep.deltas},
                  {"decomposition_check", cfg.sweep.decomposition_check}};
    j["bounds"] = {{"eta", cfg.bounds.eta}};
    j["output"] = {{"path", cfg.output.path}, {"format", cfg.output.format}};
    j["tolerances"] = {{"sigma", cfg.tolerances.sigma},
                       {"rel_error", cfg.tolerances.rel_error},
                       {"decomposition_rel", cfg.tolerances.decomposition_rel},
                       {"slope_band", cfg.tolerances.slope_band}};
    return j.dump();
}

Eigen::MatrixXd default_correlation(const lattice::LatticeSpec& spec) {
    const int n = lattice::site_count(spec);
    Eigen::MatrixXd T = Eigen::MatrixXd::Identity(n, n);
    for (const auto& [i, k] : lattice::edges(spec)) {
        T(i, k) += 0.5;
        T(k, i) += 0.5;
    }
    return T;
}

Eigen::MatrixXd load_matrix(const std::string& path, int n) {
    std::ifstream f(path);
    if (!f) throw usage_error("config: cannot read matrix file " + path);
    std::vector<double> values;
    double x = 0.0;
    while (f >> x) values.push_back(x);
    if (!f.eof()) throw usage_error("config: non-numeric data in matrix file " + path);
    if (values.size() != std::size_t(n) * std::size_t(n))
        throw usage_error("config: matrix file " + path + " holds " +
                          std::to_string(values.size()) + " numbers, expected " +
                          std::to_string(std::size_t(n) * std::size_t(n)));
    Eigen::MatrixXd T(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) T(r, c) = values[std::size_t(r) * std::size_t(n) + c];
    return T;
}

disorder::DisorderModel build_disorder(const ExperimentConfig& cfg) {
    const int n = lattice::site_count(cfg.lattice);
    switch (cfg.disorder.kind) {
        case disorder::Kind::iid:
            return disorder::make_iid(n);
        case disorder::Kind::toymodel:
            return disorder::make_toymodel(n, cfg.disorder.delta, cfg.disorder.pair0,
                                           cfg.disorder.pair1);
        case disorder::Kind::nonneg_correlated: {
            const Eigen::MatrixXd T = cfg.disorder.t_file.empty()
                                          ? default_correlation(cfg.lattice)
                                          : load_matrix(cfg.disorder.t_file, n);
            return disorder::make_correlated(T);
        }
    }
    throw usage_error("config: unknown disorder kind");
}

}  // namespace susylab::config
