#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "cltlab/distributions.hpp"
#include "cltlab/grid.hpp"
#include "cltlab/process.hpp"
#include "cltlab/rng.hpp"

namespace cltlab {

// ---- profiles --------------------------------------------------------------

enum class ProfileKind { Exact, Empirical, Theoretical };

// k -> beta_tilde_1(k) for k = 0..K; values clamped to [0,1]. Monotonicity is
// not asserted. Empirical profiles carry standard errors.
struct MixingProfile {
    std::vector<double> values;
    std::vector<double> std_errors;  // empty unless empirical
    ProfileKind provenance = ProfileKind::Theoretical;
};

struct PolynomialRate {
    double C = 1.0;
    double s = 1.0;  // min(1, C (k+1)^{-s})
};

struct ExponentialRate {
    double C = 1.0;
    double tau = 1.0;
    double a = 1.0;  // min(1, C exp(-tau k^{1/a}))
};

using RateFamily = std::variant<PolynomialRate, ExponentialRate>;

double theoretical_profile(const RateFamily& family, std::size_t k);
MixingProfile profile_theoretical(const RateFamily& family, std::size_t k_max);

// ---- exact coefficients for finite-state chains ----------------------------

// E over the stationary start of sup_t |P(Y_k <= t | Y_0) - P(Y_k <= t)|; the
// sup is attained at state values. k = 0 conditions on the present.
// Sets *underflow when matrix powers have decayed below representable scale.
double beta_tilde_exact_markov(const FiniteStateMarkov& chain, std::size_t k,
                               bool* underflow = nullptr);

MixingProfile profile_exact_markov(const FiniteStateMarkov& chain, std::size_t k_max);

// gamma_n = E ||E(X_n | F_0)||_{p,mu} for the centered indicator process of
// the chain, computed exactly from matrix powers and the grid norm.
double gamma_from_chain(const FiniteStateMarkov& chain, const GridMeasure& grid,
                        std::size_t n);

// Law of ||X_0||_{p,mu} for the chain's centered indicator process: a
// discrete law with one atom per start state.
DistributionSpec chain_indicator_norm_dist(const FiniteStateMarkov& chain,
                                           const GridMeasure& grid);

// Law of Y_{p,mu} = |F_mu(Y_0)|^{1/p} under the stationary law of the chain.
DistributionSpec chain_envelope_dist(const FiniteStateMarkov& chain,
                                     const MeasureSpec& measure, double p);

// ---- empirical estimator ---------------------------------------------------

struct BetaEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

// Cross-fitted binned estimate of E sup_t |P(Y_k <= t | Y_0) - P(Y_k <= t)|.
// Conditions on Y_0 only, so it refuses non-Markov-type specs (the binned
// conditional law would be biased for them). The threshold sup is scanned on
// the supplied grid and is one-sided (it underestimates the sup).
BetaEstimate beta_tilde_empirical(const ProcessSpec& spec, std::size_t k,
                                  std::size_t replicates,
                                  const std::vector<double>& thresholds, RngStream& rng,
                                  std::size_t pairs_per_replicate = 2000,
                                  std::size_t bins = 16);

}  // namespace cltlab
