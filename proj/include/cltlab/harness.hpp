#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cltlab/conditions.hpp"
#include "cltlab/empirical.hpp"
#include "cltlab/grid.hpp"
#include "cltlab/measures.hpp"
#include "cltlab/process.hpp"

namespace cltlab {

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Exceptions from
// workers are rethrown on the calling thread.
void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn);

// ---- experiment configuration ----------------------------------------------

struct ExperimentConfig {
    std::string name = "experiment";
    ProcessSpec process = IIDProcess{};
    MeasureSpec measure = LebesgueInterval{0.0, 1.0};
    std::size_t grid_cells = 64;
    double p = 2.0;
    std::vector<std::size_t> n_schedule = {256, 512, 1024};  // increasing
    std::size_t replicates = 100;                            // >= 100
    std::size_t max_lag = 50;
    std::vector<int> levels = {1, 2, 3, 4};
    std::size_t cov_budget = 1000000;
    std::size_t calibration = 200000;  // marginal-CDF run for map-driven specs
    std::uint64_t seed = 1;
    std::size_t jobs = 1;
};

void validate(const ExperimentConfig& config);

// ---- distribution distances ------------------------------------------------

struct DistanceResult {
    double ks = 0.0;
    double w1 = 0.0;
};

DistanceResult compare_distributions(const std::vector<double>& a,
                                     const std::vector<double>& b);

// ---- the Monte-Carlo CLT experiment ----------------------------------------

struct CltResult {
    GridMeasure grid;
    std::vector<double> true_cdf;           // marginal CDF at the nodes
    CovarianceOperator cov;
    std::vector<double> gaussian_sample;    // R draws of the limit functional
    std::vector<std::size_t> ns;
    std::vector<std::vector<double>> statistic_samples;  // per n, R values
    std::vector<DistanceResult> to_limit;                // per n
    std::vector<double> ks_consecutive;     // KS between schedule neighbors
    std::uint64_t clip_total = 0;
    double grid_mass_loss = 0.0;
};

CltResult run_clt_experiment(const ExperimentConfig& config);

// ---- martingale diagnostics (exact for finite-state chains) ----------------

struct DiagnosticsReport {
    std::vector<std::size_t> ns;
    std::vector<std::size_t> block_sizes;          // m_n = floor(n^{1/3})
    std::vector<double> cond_expectation_norm;     // (a) E||E(S_n|F_0)|| / sqrt(n)
    std::vector<std::string> panel_names;
    std::vector<std::vector<double>> sigma_n;      // (b) per n, per panel entry
    std::vector<double> sigma_limit;               // lag-sum sigma^2 per panel entry
    std::vector<double> lindeberg_eps = {0.1, 0.5, 1.0};
    std::vector<std::vector<double>> lindeberg;    // (c) per n, per epsilon
    std::vector<int> levels;
    std::vector<std::vector<double>> tail_mean_sq; // (d) per n, per level (p=2 exact)
};

DiagnosticsReport martingale_diagnostics(const FiniteStateMarkov& chain,
                                         const GridMeasure& grid,
                                         const std::vector<std::size_t>& n_schedule,
                                         const std::vector<int>& levels,
                                         std::uint64_t seed,
                                         std::size_t lindeberg_replicates = 32);

// ---- divergence probe ------------------------------------------------------

struct ProbeReport {
    std::vector<std::size_t> ns;
    std::vector<double> ks_doublings;  // KS between statistic samples at n, 2n
    bool stabilizing = false;          // final doubling KS <= 0.05
    double hill_index = 0.0;           // tail index of the marginal envelope
    bool heavy_tail_flag = false;      // hill_index < 2
    double critical_alpha = 0.0;
    std::string note;
};

// Statistic pipeline on the observable-composed intermittent-map dual, with
// mu = Lebesgue truncated to [0, truncation]. The heavy-tail flag reads the
// Hill index of the marginal envelope sample |F_mu(phi(Y))|^{1/p}.
ProbeReport divergence_probe(double gamma, double p, double alpha, ObservableKind kind,
                             const std::vector<std::size_t>& n_schedule,
                             std::size_t replicates, std::uint64_t seed,
                             std::size_t jobs = 1, double truncation = 50.0,
                             std::size_t grid_cells = 64);

}  // namespace cltlab
