#include "cltlab/mixing.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cltlab {

namespace {

Eigen::MatrixXd to_matrix(const FiniteStateMarkov& chain) {
    const auto m = static_cast<Eigen::Index>(chain.num_states());
    Eigen::MatrixXd P(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            P(i, j) = chain.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return P;
}

Eigen::MatrixXd matrix_power(Eigen::MatrixXd base, std::size_t k) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(base.rows(), base.cols());
    while (k > 0) {
        if (k & 1) acc = acc * base;
        base = base * base;
        k >>= 1;
    }
    return acc;
}

FiniteStateMarkov validated(const FiniteStateMarkov& chain) {
    ProcessSpec spec = chain;
    validate(spec);
    return std::get<FiniteStateMarkov>(spec.as_variant());
}

}  // namespace

double theoretical_profile(const RateFamily& family, std::size_t k) {
    return std::visit(
        [k](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if (!(f.C > 0.0)) throw std::domain_error("theoretical_profile: C must be > 0");
            const double kd = static_cast<double>(k);
            if constexpr (std::is_same_v<T, PolynomialRate>) {
                if (!(f.s > 0.0)) throw std::domain_error("theoretical_profile: s must be > 0");
                return std::min(1.0, f.C * std::pow(kd + 1.0, -f.s));
            } else {
                if (!(f.tau > 0.0 && f.a > 0.0))
                    throw std::domain_error("theoretical_profile: tau, a must be > 0");
                return std::min(1.0, f.C * std::exp(-f.tau * std::pow(kd, 1.0 / f.a)));
            }
        },
        family);
}

MixingProfile profile_theoretical(const RateFamily& family, std::size_t k_max) {
    MixingProfile p;
    p.provenance = ProfileKind::Theoretical;
    p.values.reserve(k_max + 1);
    for (std::size_t k = 0; k <= k_max; ++k) p.values.push_back(theoretical_profile(family, k));
    return p;
}

namespace {

// pi-average over start states of the sup over thresholds of the cumulative
// row differences; the sup is attained at state values.
double beta_from_diff(const FiniteStateMarkov& chain, const Eigen::MatrixXd& D,
                      bool* any_signal) {
    const auto m = static_cast<Eigen::Index>(chain.num_states());
    double beta = 0.0;
    for (Eigen::Index s = 0; s < m; ++s) {
        double cum = 0.0, best = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            cum += D(s, j);
            best = std::max(best, std::abs(cum));
        }
        if (best > 1e-280) *any_signal = true;
        beta += chain.stationary[static_cast<std::size_t>(s)] * best;
    }
    return beta;
}

}  // namespace

double beta_tilde_exact_markov(const FiniteStateMarkov& chain_in, std::size_t k,
                               bool* underflow) {
    const FiniteStateMarkov chain = validated(chain_in);
    if (underflow) *underflow = false;
    const auto m = static_cast<Eigen::Index>(chain.num_states());
    const Eigen::MatrixXd P = to_matrix(chain);

    // Fast path: rows of P^k minus the stationary row.
    Eigen::MatrixXd D = matrix_power(P, k);
    for (Eigen::Index s = 0; s < m; ++s)
        for (Eigen::Index j = 0; j < m; ++j)
            D(s, j) -= chain.stationary[static_cast<std::size_t>(j)];
    bool any_signal = false;
    double beta = beta_from_diff(chain, D, &any_signal);
    if (any_signal && beta > 1e-12) return std::clamp(beta, 0.0, 1.0);
    if (k == 0) return std::clamp(beta, 0.0, 1.0);

    // Below the round-off floor of the subtraction. Iterate the difference
    // matrix itself (its entries decay together, so they can underflow
    // honestly instead of stalling at ~1e-13 of noise).
    Eigen::MatrixXd E = -Eigen::MatrixXd::Ones(m, 1) *
                        Eigen::Map<const Eigen::VectorXd>(chain.stationary.data(), m)
                            .transpose();
    E += Eigen::MatrixXd::Identity(m, m);
    const Eigen::Map<const Eigen::VectorXd> pi(chain.stationary.data(), m);
    const std::size_t cap = std::min<std::size_t>(k, 200000);
    std::size_t steps = 0;
    for (; steps < cap; ++steps) {
        if (E.cwiseAbs().maxCoeff() < 1e-290) break;
        E = E * P;
        // Rounding regenerates a component along the stationary direction and
        // would stall the decay at machine epsilon; project it back out.
        E -= (E * Eigen::VectorXd::Ones(m)) * pi.transpose();
    }
    if (steps < k && E.cwiseAbs().maxCoeff() < 1e-290) {
        if (underflow) *underflow = true;
        return 0.0;
    }
    any_signal = false;
    beta = beta_from_diff(chain, E, &any_signal);
    if (!any_signal) {
        if (underflow) *underflow = true;
        return 0.0;
    }
    return std::clamp(beta, 0.0, 1.0);
}

MixingProfile profile_exact_markov(const FiniteStateMarkov& chain, std::size_t k_max) {
    MixingProfile p;
    p.provenance = ProfileKind::Exact;
    p.values.reserve(k_max + 1);
    for (std::size_t k = 0; k <= k_max; ++k)
        p.values.push_back(beta_tilde_exact_markov(chain, k));
    return p;
}

double gamma_from_chain(const FiniteStateMarkov& chain_in, const GridMeasure& grid,
                        std::size_t n) {
    const FiniteStateMarkov chain = validated(chain_in);
    const std::size_t m = chain.num_states();
    const Eigen::MatrixXd Pn = matrix_power(to_matrix(chain), n);
    // Stationary cumulative CDF at grid nodes.
    std::vector<double> F(grid.size(), 0.0);
    for (std::size_t j = 0; j < grid.size(); ++j)
        for (std::size_t i = 0; i < m; ++i)
            if (chain.states[i] <= grid.nodes[j]) F[j] += chain.stationary[i];

    double gamma = 0.0;
    LpPath diff;
    diff.values.resize(grid.size());
    for (std::size_t s = 0; s < m; ++s) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            double cond = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                if (chain.states[i] <= grid.nodes[j])
                    cond += Pn(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i));
            diff.values[j] = cond - F[j];
        }
        gamma += chain.stationary[s] * lp_norm(diff, grid);
    }
    return gamma;
}

DistributionSpec chain_indicator_norm_dist(const FiniteStateMarkov& chain_in,
                                           const GridMeasure& grid) {
    const FiniteStateMarkov chain = validated(chain_in);
    const std::size_t m = chain.num_states();
    std::vector<double> F(grid.size(), 0.0);
    for (std::size_t j = 0; j < grid.size(); ++j)
        for (std::size_t i = 0; i < m; ++i)
            if (chain.states[i] <= grid.nodes[j]) F[j] += chain.stationary[i];
    std::vector<std::pair<double, double>> atoms;  // (norm value, prob)
    LpPath x0;
    x0.values.resize(grid.size());
    for (std::size_t s = 0; s < m; ++s) {
        for (std::size_t j = 0; j < grid.size(); ++j)
            x0.values[j] = (chain.states[s] <= grid.nodes[j] ? 1.0 : 0.0) - F[j];
        atoms.emplace_back(lp_norm(x0, grid), chain.stationary[s]);
    }
    std::sort(atoms.begin(), atoms.end());
    Discrete d;
    for (const auto& [v, p] : atoms) {
        d.values.push_back(v);
        d.probs.push_back(p);
    }
    return d;
}

DistributionSpec chain_envelope_dist(const FiniteStateMarkov& chain_in,
                                     const MeasureSpec& measure, double p) {
    const FiniteStateMarkov chain = validated(chain_in);
    std::vector<std::pair<double, double>> atoms;
    for (std::size_t s = 0; s < chain.num_states(); ++s) {
        const double v = std::pow(std::abs(f_mu(measure, chain.states[s])), 1.0 / p);
        atoms.emplace_back(v, chain.stationary[s]);
    }
    std::sort(atoms.begin(), atoms.end());
    Discrete d;
    for (const auto& [v, q] : atoms) {
        d.values.push_back(v);
        d.probs.push_back(q);
    }
    return d;
}

namespace {

struct PairBatch {
    std::vector<double> y0, yk;
};

PairBatch draw_pairs(const ProcessSpec& spec, std::size_t k, std::size_t count,
                     RngStream& rng) {
    // One stationary path of length count + k; overlapping pairs (Y_i, Y_{i+k})
    // have the right joint law for every stationary spec.
    const PathSample path = generate_path(spec, count + k, rng);
    PairBatch batch;
    batch.y0.reserve(count);
    batch.yk.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        batch.y0.push_back(path.values[i]);
        batch.yk.push_back(path.values[i + k]);
    }
    return batch;
}

std::vector<double> bin_edges_from(const std::vector<double>& y0, std::size_t bins) {
    std::vector<double> sorted = y0;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> edges;
    for (std::size_t b = 1; b < bins; ++b) {
        const std::size_t pos = b * sorted.size() / bins;
        edges.push_back(sorted[std::min(pos, sorted.size() - 1)]);
    }
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

std::size_t bin_of(const std::vector<double>& edges, double y) {
    return static_cast<std::size_t>(
        std::upper_bound(edges.begin(), edges.end(), y) - edges.begin());
}

}  // namespace

BetaEstimate beta_tilde_empirical(const ProcessSpec& spec, std::size_t k,
                                  std::size_t replicates,
                                  const std::vector<double>& thresholds, RngStream& rng,
                                  std::size_t pairs_per_replicate, std::size_t bins) {
    if (replicates < 100)
        throw std::invalid_argument("beta_tilde_empirical: need >= 100 replicates");
    if (thresholds.size() < 2)
        throw std::invalid_argument("beta_tilde_empirical: need a threshold grid");
    if (!is_markov_type(spec))
        throw std::invalid_argument(
            "beta_tilde_empirical: conditioning on Y_0 only is valid for Markov-type "
            "specs (i.i.d., finite-state chains, the intermittent-map dual); this spec "
            "would give a biased estimate");

    const std::size_t T = thresholds.size();
    std::vector<double> reps;
    reps.reserve(replicates);
    for (std::size_t r = 0; r < replicates; ++r) {
        // Two independent halves: thresholds/signs picked on A, the signed
        // difference evaluated on B. Keeps the estimator honest at beta = 0
        // (no |.|-induced positive bias).
        const PairBatch A = draw_pairs(spec, k, pairs_per_replicate, rng);
        const PairBatch B = draw_pairs(spec, k, pairs_per_replicate, rng);
        const std::vector<double> edges = bin_edges_from(A.y0, bins);
        const std::size_t nb = edges.size() + 1;

        std::vector<std::vector<double>> cdfA(nb, std::vector<double>(T, 0.0));
        std::vector<double> allA(T, 0.0), countA(nb, 0.0);
        for (std::size_t i = 0; i < A.y0.size(); ++i) {
            const std::size_t b = bin_of(edges, A.y0[i]);
            countA[b] += 1.0;
            for (std::size_t t = 0; t < T; ++t)
                if (A.yk[i] <= thresholds[t]) {
                    cdfA[b][t] += 1.0;
                    allA[t] += 1.0;
                }
        }
        std::vector<std::size_t> pick(nb, 0);
        std::vector<double> sign(nb, 1.0);
        for (std::size_t b = 0; b < nb; ++b) {
            double best = -1.0;
            for (std::size_t t = 0; t < T; ++t) {
                const double cond = countA[b] > 0.0 ? cdfA[b][t] / countA[b] : 0.0;
                const double d = cond - allA[t] / static_cast<double>(A.y0.size());
                if (std::abs(d) > best) {
                    best = std::abs(d);
                    pick[b] = t;
                    sign[b] = d >= 0.0 ? 1.0 : -1.0;
                }
            }
        }

        std::vector<double> condB(nb, 0.0), countB(nb, 0.0), allB(T, 0.0);
        for (std::size_t i = 0; i < B.y0.size(); ++i) {
            const std::size_t b = bin_of(edges, B.y0[i]);
            countB[b] += 1.0;
            if (B.yk[i] <= thresholds[pick[b]]) condB[b] += 1.0;
            for (std::size_t t = 0; t < T; ++t)
                if (B.yk[i] <= thresholds[t]) allB[t] += 1.0;
        }
        double est = 0.0;
        const double nB = static_cast<double>(B.y0.size());
        for (std::size_t b = 0; b < nb; ++b) {
            if (countB[b] == 0.0) continue;
            const double d = condB[b] / countB[b] - allB[pick[b]] / nB;
            est += (countB[b] / nB) * sign[b] * d;
        }
        reps.push_back(est);
    }

    const double mean = std::accumulate(reps.begin(), reps.end(), 0.0) /
                        static_cast<double>(reps.size());
    double var = 0.0;
    for (double v : reps) var += (v - mean) * (v - mean);
    var /= static_cast<double>(reps.size() - 1);
    BetaEstimate out;
    out.estimate = std::clamp(mean, 0.0, 1.0);
    out.std_error = std::sqrt(var / static_cast<double>(reps.size()));
    return out;
}

}  // namespace cltlab
