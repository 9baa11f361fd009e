#include "susylab/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "susylab/errors.hpp"

namespace susylab::mc {

namespace {

const double kPi = 2.0 * std::asin(1.0);

// Accumulation granularity. Each batch of consecutive samples is reduced
// sequentially, and batches are merged in index order, so the arithmetic is
// independent of how batches were distributed over threads.
constexpr long long kBatch = 256;

// One-pass moments (Welford), complex components with |.|^2 spread.
struct Acc {
    long long n = 0;
    std::vector<cplx> mean;
    std::vector<double> m2;

    explicit Acc(std::size_t k) : mean(k, cplx(0.0, 0.0)), m2(k, 0.0) {}

    void add(const std::vector<cplx>& x) {
        ++n;
        for (std::size_t i = 0; i < mean.size(); ++i) {
            cplx d = x[i] - mean[i];
            mean[i] += d / double(n);
            m2[i] += (d * std::conj(x[i] - mean[i])).real();
        }
    }

    void merge(const Acc& b) {
        if (b.n == 0) return;
        const long long na = n, nb = b.n;
        n = na + nb;
        for (std::size_t i = 0; i < mean.size(); ++i) {
            cplx d = b.mean[i] - mean[i];
            mean[i] += d * (double(nb) / double(n));
            m2[i] += b.m2[i] + std::norm(d) * double(na) * double(nb) / double(n);
        }
    }
};

std::size_t component_count(const McPlan& plan) {
    switch (plan.target) {
        case Functional::trace_grid:
        case Functional::dos_grid:
            return plan.e_grid.size();
        default:
            return 1;
    }
}

std::vector<cplx> evaluate(const McPlan& plan, const lattice::LatticeSpec& spec,
                           const disorder::DisorderModel& model,
                           const resolvent::SpectralProbe& probe, long long m) {
    disorder::RngStream rng{plan.seed, std::uint64_t(m), 0};
    std::vector<double> v = disorder::sample_potential(model, rng);
    lattice::Hamiltonian h = lattice::assemble(spec, probe.lambda, v, std::uint64_t(m) + 1);

    switch (plan.target) {
        case Functional::trace:
            return {resolvent::green(h, probe).trace};
        case Functional::entry:
            return {resolvent::green(h, probe, {plan.entry}).entries[0]};
        case Functional::abs2_entry:
            return {cplx(resolvent::green(h, probe, {plan.entry}).abs2[0], 0.0)};
        case Functional::gen_function:
            return {resolvent::gen_function(h, probe)};
        case Functional::trace_grid:
        case Functional::dos_grid: {
            // one eigendecomposition serves every grid point of this sample
            std::vector<double> ev = resolvent::eig_spectrum(h);
            std::vector<cplx> row(plan.e_grid.size());
            for (std::size_t g = 0; g < plan.e_grid.size(); ++g) {
                cplx z(plan.e_grid[g], probe.epsilon);
                cplx tr(0.0, 0.0);
                for (double e : ev) tr += 1.0 / (z - e);
                row[g] = plan.target == Functional::trace_grid
                             ? tr
                             : cplx(-tr.imag() / (kPi * double(ev.size())), 0.0);
            }
            return row;
        }
    }
    throw usage_error("mc: unknown functional");
}

void validate(const McPlan& plan, const lattice::LatticeSpec& spec,
              const disorder::DisorderModel& model, const resolvent::SpectralProbe& probe) {
    const int n = lattice::site_count(spec);
    if (plan.samples < 2) throw usage_error("mc: need at least 2 samples for a standard error");
    if (plan.threads < 1) throw usage_error("mc: thread count must be positive");
    if (!(probe.epsilon > 0.0) || !std::isfinite(probe.epsilon))
        throw usage_error("mc: epsilon must be positive and finite");
    if (model.n != n) throw usage_error("mc: disorder model size does not match the lattice");
    const bool grid = plan.target == Functional::trace_grid || plan.target == Functional::dos_grid;
    if (grid && plan.e_grid.empty()) throw usage_error("mc: grid target needs a non-empty E-grid");
    if (plan.target == Functional::entry || plan.target == Functional::abs2_entry) {
        if (plan.entry.first < 0 || plan.entry.first >= n || plan.entry.second < 0 ||
            plan.entry.second >= n)
            throw usage_error("mc: entry indices out of range");
    }
}

}  // namespace

McEstimate mc_average(const McPlan& plan, const lattice::LatticeSpec& spec,
                      const disorder::DisorderModel& model,
                      const resolvent::SpectralProbe& probe) {
    validate(plan, spec, model, probe);
    const std::size_t k = component_count(plan);
    const long long nbatches = (plan.samples + kBatch - 1) / kBatch;

    auto parts = std::vector<Acc>(std::size_t(nbatches), Acc(k));
    std::atomic<long long> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        try {
            for (;;) {
                const long long b = next.fetch_add(1);
                if (b >= nbatches || failed.load()) break;
                Acc acc(k);
                const long long lo = b * kBatch;
                const long long hi = std::min(plan.samples, lo + kBatch);
                for (long long m = lo; m < hi; ++m)
                    acc.add(evaluate(plan, spec, model, probe, m));
                parts[std::size_t(b)] = std::move(acc);
                if (plan.progress && b % std::max<long long>(1, nbatches / 20) == 0)
                    std::fprintf(stderr, "mc: batch %lld/%lld\n", b + 1, nbatches);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            failed.store(true);
        }
    };

    if (plan.threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(std::size_t(plan.threads));
        for (int t = 0; t < plan.threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    Acc total(k);
    for (const auto& p : parts) total.merge(p);

    McEstimate est;
    est.mean = total.mean;
    est.std_error.resize(k);
    for (std::size_t i = 0; i < k; ++i)
        est.std_error[i] =
            std::sqrt(std::max(0.0, total.m2[i]) / double(total.n - 1) / double(total.n));
    est.samples = plan.samples;
    est.seed = plan.seed;
    return est;
}

McEstimate mc_dos(const McPlan& plan, const lattice::LatticeSpec& spec,
                  const disorder::DisorderModel& model, const std::vector<double>& e_grid,
                  double epsilon, double lambda) {
    McPlan p = plan;
    p.target = Functional::dos_grid;
    p.e_grid = e_grid;
    resolvent::SpectralProbe probe;
    probe.epsilon = epsilon;
    probe.lambda = lambda;
    return mc_average(p, spec, model, probe);
}

}  // namespace susylab::mc
