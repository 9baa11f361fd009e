#pragma once

// Disorder-averaged resolvent functionals with reproducible parallel
// sampling: sample m is a pure function of (seed, m), and accumulation is
// batched so results are bit-identical at any thread count.

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "susylab/disorder.hpp"
#include "susylab/lattice.hpp"
#include "susylab/resolvent.hpp"

namespace susylab::mc {

using cplx = std::complex<double>;

// what gets evaluated per disorder sample
enum class Functional {
    trace,         // Tr G(E + i eps)
    entry,         // G_jk
    abs2_entry,    // |G_jk|^2
    gen_function,  // determinant ratio at (E, E~)
    trace_grid,    // Tr G over an E-grid, one eigendecomposition per sample
    dos_grid,      // -(1/pi N) Im Tr G over the same grid
};

struct McPlan {
    long long samples = 0;  // >= 2 so the standard error is defined
    std::uint64_t seed = 0;
    int threads = 1;
    Functional target = Functional::trace;
    std::pair<int, int> entry{0, 0};  // entry / abs2_entry only
    std::vector<double> e_grid;       // trace_grid / dos_grid only
    bool progress = false;            // batch ticks on standard error
};

struct McEstimate {
    std::vector<cplx> mean;         // one component per output (1 for scalar targets)
    std::vector<double> std_error;  // sample std / sqrt(M), componentwise
    long long samples = 0;
    std::uint64_t seed = 0;
};

// Averages the plan's functional over disorder draws; the grid targets share
// one draw per sample across every E (common random numbers). probe.lambda
// sets the coupling in H = -Delta + lambda V.
McEstimate mc_average(const McPlan& plan, const lattice::LatticeSpec& spec,
                      const disorder::DisorderModel& model,
                      const resolvent::SpectralProbe& probe);

// Smoothed density of states on a grid, one disorder draw per sample.
McEstimate mc_dos(const McPlan& plan, const lattice::LatticeSpec& spec,
                  const disorder::DisorderModel& model, const std::vector<double>& e_grid,
                  double epsilon, double lambda);

}  // namespace susylab::mc
