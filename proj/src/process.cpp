#include "cltlab/process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cltlab {

namespace {

double observable_eval(const Observable& obs, double x, std::uint64_t* clips) {
    return std::visit(
        [x, clips](const auto& o) -> double {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, ObsIdentity>) {
                return x;
            } else if constexpr (std::is_same_v<T, ObsInvPow> ||
                                 std::is_same_v<T, ObsInvPowRight>) {
                double arg = std::is_same_v<T, ObsInvPow> ? x : 1.0 - x;
                bool clipped = false;
                if (arg < kSingularityClip) {
                    arg = kSingularityClip;
                    clipped = true;
                }
                double v = std::pow(arg, -o.alpha);
                if (std::isinf(v)) {
                    v = std::numeric_limits<double>::max();
                    clipped = true;
                }
                if (clipped && clips) ++*clips;
                return v;
            } else {
                const auto& xs = o.xs;
                const auto& ys = o.ys;
                if (x <= xs.front()) return ys.front();
                if (x >= xs.back()) return ys.back();
                const auto it = std::upper_bound(xs.begin(), xs.end(), x);
                const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
                const double frac = (x - xs[i]) / (xs[i + 1] - xs[i]);
                return ys[i] + frac * (ys[i + 1] - ys[i]);
            }
        },
        obs);
}

void validate_chain(FiniteStateMarkov& c) {
    const std::size_t m = c.num_states();
    if (m == 0) throw std::invalid_argument("markov chain: no states");
    if (!std::is_sorted(c.states.begin(), c.states.end()))
        throw std::invalid_argument("markov chain: states must be sorted");
    if (c.rows.size() != m) throw std::invalid_argument("markov chain: matrix shape");
    for (const auto& row : c.rows) {
        if (row.size() != m) throw std::invalid_argument("markov chain: matrix shape");
        double s = 0.0;
        for (double v : row) {
            if (v < -1e-15) throw std::invalid_argument("markov chain: negative entry");
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-12)
            throw std::invalid_argument("markov chain: row sums must be 1");
    }
    if (c.stationary.empty()) {
        // Power iteration on the left; chains here are small and aperiodic
        // enough after averaging with the identity.
        std::vector<double> pi(m, 1.0 / static_cast<double>(m)), next(m);
        for (int it = 0; it < 200000; ++it) {
            for (std::size_t j = 0; j < m; ++j) {
                double acc = 0.0;
                for (std::size_t i = 0; i < m; ++i) acc += pi[i] * c.rows[i][j];
                next[j] = 0.5 * (acc + pi[j]);  // lazy chain, same fixed point
            }
            double diff = 0.0, norm = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                diff += std::abs(next[j] - pi[j]);
                norm += next[j];
            }
            for (std::size_t j = 0; j < m; ++j) pi[j] = next[j] / norm;
            if (diff < 1e-15 && it > 10) break;
        }
        c.stationary = pi;
    }
    // Stationary vector must be a left fixed point.
    for (std::size_t j = 0; j < m; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) acc += c.stationary[i] * c.rows[i][j];
        if (std::abs(acc - c.stationary[j]) > 1e-10)
            throw std::invalid_argument("markov chain: stationary vector is not invariant");
    }
}

std::size_t draw_index(const std::vector<double>& probs, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u <= acc) return i;
    }
    return probs.size() - 1;
}

}  // namespace

double apply_observable_value(const Observable& obs, double x, std::uint64_t* clip_count) {
    return observable_eval(obs, x, clip_count);
}

void validate(ProcessSpec& spec) {
    std::visit(
        [](auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, FiniteStateMarkov>) {
                validate_chain(s);
            } else if constexpr (std::is_same_v<T, LSVOrbit> || std::is_same_v<T, LSVDual>) {
                if (!(s.gamma > 0.0 && s.gamma < 1.0))
                    throw std::invalid_argument("lsv: gamma must lie in (0,1)");
            } else if constexpr (std::is_same_v<T, ComposedProcess>) {
                if (!s.base) throw std::invalid_argument("composed process: missing base");
                validate(*s.base);
            }
        },
        spec.as_variant());
}

double lsv_map(double gamma, double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("lsv_map: x must lie in [0,1]");
    // The branch boundary 1/2 belongs to the right branch.
    if (x < 0.5) return x * (1.0 + std::pow(2.0, gamma) * std::pow(x, gamma));
    return 2.0 * x - 1.0;
}

double sample_invariant(double gamma, RngStream& rng, std::size_t burn_in) {
    double x = rng.uniform(0.0, 1.0);
    for (std::size_t i = 0; i < burn_in; ++i) x = lsv_map(gamma, x);
    return x;
}

PathSample generate_path(const ProcessSpec& spec, std::size_t n, RngStream& rng) {
    if (n == 0) throw std::invalid_argument("generate_path: n must be >= 1");
    PathSample out;
    out.spec_tag = describe(spec);
    out.values.reserve(n);
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, IIDProcess>) {
                for (std::size_t i = 0; i < n; ++i)
                    out.values.push_back(quantile_sample(s.dist, rng.uniform01()));
            } else if constexpr (std::is_same_v<T, FiniteStateMarkov>) {
                FiniteStateMarkov chain = s;
                validate_chain(chain);
                std::size_t state = draw_index(chain.stationary, rng.uniform01());
                out.values.push_back(chain.states[state]);
                for (std::size_t i = 1; i < n; ++i) {
                    state = draw_index(chain.rows[state], rng.uniform01());
                    out.values.push_back(chain.states[state]);
                }
            } else if constexpr (std::is_same_v<T, LSVOrbit>) {
                double x = sample_invariant(s.gamma, rng, s.burn_in);
                out.values.push_back(x);
                for (std::size_t i = 1; i < n; ++i) {
                    x = lsv_map(s.gamma, x);
                    out.values.push_back(x);
                }
            } else if constexpr (std::is_same_v<T, LSVDual>) {
                // Forward orbit from an invariant draw, read right to left:
                // (T, ..., T^n) is distributed as (X_n, ..., X_1).
                double x = sample_invariant(s.gamma, rng, s.burn_in);
                out.values.resize(n);
                for (std::size_t i = n; i-- > 0;) {
                    x = lsv_map(s.gamma, x);
                    out.values[i] = x;
                }
            } else {  // ComposedProcess
                PathSample base = generate_path(*s.base, n, rng);
                out.clip_count = base.clip_count;
                for (double v : base.values)
                    out.values.push_back(observable_eval(s.observable, v, &out.clip_count));
            }
        },
        spec.as_variant());
    return out;
}

PathSample apply_observable(const PathSample& path, const Observable& obs) {
    PathSample out;
    out.seed = path.seed;
    out.stream_id = path.stream_id;
    out.clip_count = path.clip_count;
    out.spec_tag = path.spec_tag + "|obs";
    out.values.reserve(path.values.size());
    for (double v : path.values)
        out.values.push_back(observable_eval(obs, v, &out.clip_count));
    return out;
}

std::vector<double> marginal_cdf_on_grid(const ProcessSpec& spec, const GridMeasure& grid,
                                         std::size_t calibration, RngStream& rng) {
    std::vector<double> F(grid.size(), 0.0);
    if (const auto* iid = std::get_if<IIDProcess>(&spec.as_variant())) {
        for (std::size_t j = 0; j < grid.size(); ++j)
            F[j] = 1.0 - survival(iid->dist, grid.nodes[j]);
        return F;
    }
    if (const auto* chain = std::get_if<FiniteStateMarkov>(&spec.as_variant())) {
        FiniteStateMarkov c = *chain;
        validate_chain(c);
        for (std::size_t j = 0; j < grid.size(); ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < c.num_states(); ++i)
                if (c.states[i] <= grid.nodes[j]) acc += c.stationary[i];
            F[j] = acc;
        }
        return F;
    }
    // Map-driven specs: calibration run, one long stationary path.
    PathSample calib = generate_path(spec, std::max<std::size_t>(calibration, 1000), rng);
    std::sort(calib.values.begin(), calib.values.end());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const auto it =
            std::upper_bound(calib.values.begin(), calib.values.end(), grid.nodes[j]);
        F[j] = static_cast<double>(it - calib.values.begin()) /
               static_cast<double>(calib.values.size());
    }
    return F;
}

bool is_markov_type(const ProcessSpec& spec) {
    return std::visit(
        [](const auto& s) -> bool {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, IIDProcess> ||
                          std::is_same_v<T, FiniteStateMarkov> || std::is_same_v<T, LSVDual>) {
                return true;
            } else if constexpr (std::is_same_v<T, ComposedProcess>) {
                // Monotone observables preserve the conditioning structure.
                return is_markov_type(*s.base);
            } else {
                // The deterministic forward orbit conditions trivially on Y_0,
                // but binned conditional CDFs are meaningless for it.
                return false;
            }
        },
        spec.as_variant());
}

std::string describe(const ProcessSpec& spec) {
    std::ostringstream os;
    std::visit(
        [&os](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, IIDProcess>)
                os << "iid(" << describe(s.dist) << ")";
            else if constexpr (std::is_same_v<T, FiniteStateMarkov>)
                os << "markov(" << s.num_states() << " states)";
            else if constexpr (std::is_same_v<T, LSVOrbit>)
                os << "lsv_orbit(gamma=" << s.gamma << ")";
            else if constexpr (std::is_same_v<T, LSVDual>)
                os << "lsv_dual(gamma=" << s.gamma << ")";
            else
                os << "composed(" << describe(*s.base) << ")";
        },
        spec.as_variant());
    return os.str();
}

}  // namespace cltlab
