#pragma once

#include <vector>

#include "cltlab/grid.hpp"
#include "cltlab/process.hpp"
#include "cltlab/rng.hpp"

namespace cltlab {

// F_n at the grid nodes.
LpPath empirical_cdf_path(const PathSample& sample, const GridMeasure& grid);

// sqrt(n) (F_n - F) at the grid nodes; F given at the nodes.
LpPath centered_process(const PathSample& sample, const std::vector<double>& true_cdf,
                        const GridMeasure& grid);

// n^{p/2} int |F_n - F|^p dmu  =  lp_norm(centered)^p.
double statistic(const PathSample& sample, const std::vector<double>& true_cdf,
                 const GridMeasure& grid);

// Lag-sum covariance operator of the centered indicator process, symmetrized
// and eigenvalue-clipped to PSD.
struct CovarianceOperator {
    std::vector<std::vector<double>> k;  // M x M, K(node_i, node_j)
    std::size_t max_lag = 0;
    double clipped_mass = 0.0;   // |sum of negative eigenvalues| removed
    bool plateau_reached = true; // trace change < 1% when halving the lag window
};

CovarianceOperator estimate_cov_operator(const ProcessSpec& spec, const GridMeasure& grid,
                                         const std::vector<double>& true_cdf,
                                         std::size_t max_lag, std::size_t budget,
                                         RngStream& rng);

// Factorization of a PSD-projected covariance, reusable across draws.
struct GaussianSampler {
    std::vector<std::vector<double>> factor;  // M x M, K = factor factor^T
    std::size_t dim = 0;

    // One draw of sum_j w_j |G_j|^p for a centered Gaussian path with the
    // factored covariance.
    double sample(const GridMeasure& grid, RngStream& rng) const;
};

GaussianSampler make_gaussian_sampler(const CovarianceOperator& cov);

// Single-draw convenience wrapper.
double sample_gaussian_limit(const CovarianceOperator& cov, const GridMeasure& grid,
                             RngStream& rng);

// Max over random grid-function pairs of
// ||x+y||^2 + ||x-y||^2 - 2||x||^2 - 2(p-1)||y||^2  (the 2-smoothness bound).
double smoothness_check(const GridMeasure& grid, std::size_t trials, RngStream& rng);

}  // namespace cltlab
