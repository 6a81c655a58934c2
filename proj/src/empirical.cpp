#include "cltlab/empirical.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cltlab {

LpPath empirical_cdf_path(const PathSample& sample, const GridMeasure& grid) {
    if (sample.values.empty()) throw std::invalid_argument("empirical_cdf_path: empty sample");
    std::vector<double> sorted = sample.values;
    std::sort(sorted.begin(), sorted.end());
    LpPath out;
    out.meta = sample.spec_tag;
    out.values.resize(grid.size());
    const double n = static_cast<double>(sorted.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const auto it = std::upper_bound(sorted.begin(), sorted.end(), grid.nodes[j]);
        out.values[j] = static_cast<double>(it - sorted.begin()) / n;
    }
    return out;
}

LpPath centered_process(const PathSample& sample, const std::vector<double>& true_cdf,
                        const GridMeasure& grid) {
    if (true_cdf.size() != grid.size())
        throw std::invalid_argument("centered_process: cdf/grid size mismatch");
    LpPath fn = empirical_cdf_path(sample, grid);
    const double root_n = std::sqrt(static_cast<double>(sample.values.size()));
    for (std::size_t j = 0; j < grid.size(); ++j)
        fn.values[j] = root_n * (fn.values[j] - true_cdf[j]);
    return fn;
}

double statistic(const PathSample& sample, const std::vector<double>& true_cdf,
                 const GridMeasure& grid) {
    const LpPath path = centered_process(sample, true_cdf, grid);
    return std::pow(lp_norm(path, grid), grid.p);
}

namespace {

// Index of the first node >= y (M when y is beyond the last node); then
// 1_{y <= node_j} iff idx(y) <= j.
std::size_t node_index(const std::vector<double>& nodes, double y) {
    return static_cast<std::size_t>(
        std::lower_bound(nodes.begin(), nodes.end(), y) - nodes.begin());
}

}  // namespace

CovarianceOperator estimate_cov_operator(const ProcessSpec& spec, const GridMeasure& grid,
                                         const std::vector<double>& true_cdf,
                                         std::size_t max_lag, std::size_t budget,
                                         RngStream& rng) {
    if (budget < 1000) throw std::invalid_argument("estimate_cov_operator: budget too small");
    const std::size_t M = grid.size();
    const std::size_t N = budget;
    const PathSample path = generate_path(spec, N, rng);

    std::vector<std::size_t> idx(N);
    for (std::size_t i = 0; i < N; ++i) idx[i] = node_index(grid.nodes, path.values[i]);

    auto lag_cov = [&](std::size_t k) {
        // c_k(s,t) = mean over i of (1_{Y_i<=s} - F(s)) (1_{Y_{i+k}<=t} - F(t)).
        const std::size_t npairs = N - k;
        std::vector<std::vector<double>> hist(M + 1, std::vector<double>(M + 1, 0.0));
        std::vector<double> m1(M + 1, 0.0), m2(M + 1, 0.0);
        for (std::size_t i = 0; i < npairs; ++i) {
            hist[idx[i]][idx[i + k]] += 1.0;
            m1[idx[i]] += 1.0;
            m2[idx[i + k]] += 1.0;
        }
        // Prefix sums turn bucket counts into joint/marginal CDF counts.
        for (std::size_t a = 0; a <= M; ++a)
            for (std::size_t b = 1; b <= M; ++b) hist[a][b] += hist[a][b - 1];
        for (std::size_t b = 0; b <= M; ++b)
            for (std::size_t a = 1; a <= M; ++a) hist[a][b] += hist[a - 1][b];
        for (std::size_t a = 1; a <= M; ++a) m1[a] += m1[a - 1];
        for (std::size_t b = 1; b <= M; ++b) m2[b] += m2[b - 1];
        const double inv = 1.0 / static_cast<double>(npairs);
        std::vector<std::vector<double>> c(M, std::vector<double>(M, 0.0));
        for (std::size_t s = 0; s < M; ++s)
            for (std::size_t t = 0; t < M; ++t)
                c[s][t] = hist[s][t] * inv - true_cdf[s] * m2[t] * inv -
                          true_cdf[t] * m1[s] * inv + true_cdf[s] * true_cdf[t];
        return c;
    };

    CovarianceOperator cov;
    cov.max_lag = max_lag;
    cov.k.assign(M, std::vector<double>(M, 0.0));
    double trace_half = 0.0;
    for (std::size_t k = 0; k <= std::min(max_lag, N - 1); ++k) {
        const auto c = lag_cov(k);
        for (std::size_t s = 0; s < M; ++s)
            for (std::size_t t = 0; t < M; ++t)
                cov.k[s][t] += (k == 0) ? c[s][t] : c[s][t] + c[t][s];
        if (k == max_lag / 2) {
            for (std::size_t s = 0; s < M; ++s) trace_half += cov.k[s][s];
        }
    }
    double trace = 0.0;
    for (std::size_t s = 0; s < M; ++s) trace += cov.k[s][s];
    cov.plateau_reached = std::abs(trace - trace_half) <= 0.01 * std::max(std::abs(trace), 1e-12);

    // Symmetrize (guards round-off) and clip negative eigenvalues.
    Eigen::MatrixXd K(M, M);
    for (std::size_t s = 0; s < M; ++s)
        for (std::size_t t = 0; t < M; ++t) K(s, t) = 0.5 * (cov.k[s][t] + cov.k[t][s]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("estimate_cov_operator: eigendecomposition failed");
    Eigen::VectorXd lam = eig.eigenvalues();
    double clipped = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (lam(i) < 0.0) {
            clipped += -lam(i);
            lam(i) = 0.0;
        }
    cov.clipped_mass = clipped;
    const Eigen::MatrixXd Kpsd =
        eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
    for (std::size_t s = 0; s < M; ++s)
        for (std::size_t t = 0; t < M; ++t) cov.k[s][t] = Kpsd(s, t);
    return cov;
}

GaussianSampler make_gaussian_sampler(const CovarianceOperator& cov) {
    const std::size_t M = cov.k.size();
    Eigen::MatrixXd K(M, M);
    for (std::size_t s = 0; s < M; ++s)
        for (std::size_t t = 0; t < M; ++t) K(s, t) = 0.5 * (cov.k[s][t] + cov.k[t][s]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("make_gaussian_sampler: eigendecomposition failed");
    Eigen::VectorXd lam = eig.eigenvalues();
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) < -1e-10) {
            throw std::runtime_error(
                "make_gaussian_sampler: covariance not PSD, min eigenvalue " +
                std::to_string(lam(i)));
        }
        lam(i) = std::sqrt(std::max(lam(i), 0.0));
    }
    const Eigen::MatrixXd L = eig.eigenvectors() * lam.asDiagonal();
    GaussianSampler s;
    s.dim = M;
    s.factor.assign(M, std::vector<double>(M, 0.0));
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < M; ++j) s.factor[i][j] = L(i, j);
    return s;
}

double GaussianSampler::sample(const GridMeasure& grid, RngStream& rng) const {
    std::vector<double> z(dim);
    for (std::size_t j = 0; j < dim; ++j) z[j] = rng.normal();
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        double g = 0.0;
        for (std::size_t j = 0; j < dim; ++j) g += factor[i][j] * z[j];
        acc += grid.weights[i] * std::pow(std::abs(g), grid.p);
    }
    return acc;
}

double sample_gaussian_limit(const CovarianceOperator& cov, const GridMeasure& grid,
                             RngStream& rng) {
    return make_gaussian_sampler(cov).sample(grid, rng);
}

double smoothness_check(const GridMeasure& grid, std::size_t trials, RngStream& rng) {
    const double d2 = grid.p - 1.0;  // L^p is (2, sqrt(p-1))-smooth
    double worst = -kInf;
    LpPath x, y, sum, diff;
    x.values.resize(grid.size());
    y.values.resize(grid.size());
    sum.values.resize(grid.size());
    diff.values.resize(grid.size());
    for (std::size_t t = 0; t < trials; ++t) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            x.values[j] = rng.uniform(-1.0, 1.0);
            y.values[j] = rng.uniform(-1.0, 1.0);
            sum.values[j] = x.values[j] + y.values[j];
            diff.values[j] = x.values[j] - y.values[j];
        }
        const double nx = lp_norm(x, grid), ny = lp_norm(y, grid);
        const double ns = lp_norm(sum, grid), nd = lp_norm(diff, grid);
        worst = std::max(worst, ns * ns + nd * nd - 2.0 * nx * nx - 2.0 * d2 * ny * ny);
    }
    return worst;
}

}  // namespace cltlab
