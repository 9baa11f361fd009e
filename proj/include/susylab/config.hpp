#pragma once

// JSON experiment configuration: schema-validated parsing that rejects
// unknown keys, fills defaults, and echoes the fully resolved document so
// every output file records exactly what produced it.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "susylab/disorder.hpp"
#include "susylab/lattice.hpp"

namespace susylab::config {

struct ExperimentConfig {
    // Members shadow the susylab::lattice / susylab::disorder namespaces, so
    // initializers inside this class spell the namespaces out in full.
    susylab::lattice::LatticeSpec lattice{1, 16, susylab::lattice::Boundary::restriction};

    struct Disorder {
        susylab::disorder::Kind kind = susylab::disorder::Kind::iid;
        double delta = 0.1;     // pair-correlation strength (toymodel kind)
        int pair0 = 0;          // the correlated pair (toymodel kind)
        int pair1 = 1;
        std::string t_file;     // nonneg_correlated: empty = default_correlation
    } disorder;

    struct Probe {
        std::vector<double> e_grid{0.0};  // a scalar "E" parses to one entry
        bool grid_given = false;          // config said "E_grid" rather than "E"
        double e_tilde = 1.0;
        double epsilon = 0.1;
        double lambda = 1.0;
    } probe;

    struct Mc {
        long long samples = 10000;
        std::uint64_t seed = 1;
    } mc;

    struct Sweep {
        std::vector<double> deltas{0.05, 0.1, 0.15, 0.2};
        bool decomposition_check = false;  // also cross-check the two-site split
    } sweep;

    struct Bounds {
        double eta = 1.0;  // decay-rate parameter of the resolvent bound
    } bounds;

    struct Output {
        std::string path;            // output basename; empty = subcommand name
        std::string format = "csv";  // "csv" (table + JSON summary) or "json"
    } output;

    struct Tolerances {
        double sigma = 3.0;              // MC-vs-exact gate, in standard errors
        double rel_error = 1e-6;         // deterministic comparisons
        double decomposition_rel = 1e-4; // two-site split total vs oracle
        double slope_band = 0.4;         // allowed |slope - 2| in the sweep fit
    } tolerances;
};

// Parse a JSON document into a config. Unknown keys at any level, type
// mismatches, and malformed JSON (reported with line/column) all raise
// usage_error. Absent keys keep the defaults above.
ExperimentConfig parse_config(const std::string& text);

// parse_config applied to the contents of a file.
ExperimentConfig load_config(const std::string& path);

// The fully resolved config (defaults included) as a minified JSON document
// with alphabetically ordered keys. Parsing the echo reproduces the config.
std::string echo_config(const ExperimentConfig& cfg);

// Correlation matrix used by the nonneg_correlated kind when no t_file is
// given: identity plus 1/2 on every nearest-neighbor bond.
Eigen::MatrixXd default_correlation(const lattice::LatticeSpec& spec);

// n x n matrix from a text file of whitespace-separated numbers, row-major.
Eigen::MatrixXd load_matrix(const std::string& path, int n);

// Disorder model described by the config, sized to its lattice.
disorder::DisorderModel build_disorder(const ExperimentConfig& cfg);

}  // namespace susylab::config
