#include "cltlab/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cltlab {

namespace {

void check_u(double u) {
    if (!(u > 0.0) || !(u <= 1.0))
        throw std::domain_error("upper_tail_quantile: u must lie in (0,1]");
}

void check_x01(double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("integrated quantile: x must lie in [0,1]");
}

// Tail probabilities of a discrete law, T[j] = sum_{i >= j} probs[i].
std::vector<double> tail_probs(const std::vector<double>& probs) {
    std::vector<double> tails(probs.size() + 1, 0.0);
    for (std::size_t j = probs.size(); j-- > 0;) tails[j] = tails[j + 1] + probs[j];
    return tails;
}

double discrete_survival(const std::vector<double>& vals, const std::vector<double>& probs,
                         double t) {
    double s = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i)
        if (vals[i] > t) s += probs[i];
    return s;
}

double discrete_quantile(const std::vector<double>& vals, const std::vector<double>& probs,
                         double u) {
    const auto tails = tail_probs(probs);
    // Smallest index j with P(|X| > vals[j]) = tails[j+1] <= u; if already
    // P(|X| > 0) <= u the infimum is 0.
    if (discrete_survival(vals, probs, 0.0) <= u) return 0.0;
    for (std::size_t j = 0; j < vals.size(); ++j)
        if (tails[j + 1] <= u) return vals[j];
    return vals.back();  // unreachable: tails.back() = 0
}

// Exact integral of g(Q(u)) over u in [0, x] for a discrete law, where Q is a
// step function of u with breakpoints at the tail probabilities.
template <typename G>
double discrete_step_integral(const std::vector<double>& vals, const std::vector<double>& probs,
                              double x, G&& g) {
    const auto tails = tail_probs(probs);
    double acc = 0.0;
    // Segment (tails[j+1], tails[j]] carries the value vals[j].
    for (std::size_t j = vals.size(); j-- > 0;) {
        const double lo = tails[j + 1];
        const double hi = std::min(tails[j], x);
        if (hi > lo) acc += (hi - lo) * g(vals[j]);
        if (tails[j] >= x) break;
    }
    return acc;
}

struct TableSegments {
    // Q restricted to (u_lo, u_hi) is linear: q(u) = q_lo + slope * (u - u_lo).
    struct Seg {
        double u_lo, u_hi, q_lo, q_hi;
    };
    std::vector<Seg> segs;  // ordered by increasing u
};

TableSegments table_quantile_segments(const TableSurvival& tab) {
    TableSegments out;
    const auto& ts = tab.ts;
    const auto& ss = tab.ss;
    const std::size_t m = ts.size();
    // Residual table mass becomes an atom at the last node.
    if (ss.back() > 0.0)
        out.segs.push_back({0.0, ss.back(), ts.back(), ts.back()});
    for (std::size_t i = m - 1; i-- > 0;) {
        if (ss[i] > ss[i + 1])
            out.segs.push_back({ss[i + 1], ss[i], ts[i + 1], ts[i]});
    }
    if (ss.front() < 1.0)
        out.segs.push_back({ss.front(), 1.0, 0.0, 0.0});
    return out;
}

template <typename G>
double table_segment_integral(const TableSurvival& tab, double x, G&& g) {
    // Numeric per-segment quadrature (Simpson, 64 panels per segment).
    const auto segments = table_quantile_segments(tab);
    double acc = 0.0;
    for (const auto& s : segments.segs) {
        const double hi = std::min(s.u_hi, x);
        if (hi <= s.u_lo) break;
        const double width = hi - s.u_lo;
        const int n = 64;
        const double h = width / n;
        double sum = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double u = s.u_lo + k * h;
            const double frac = (s.u_hi > s.u_lo) ? (u - s.u_lo) / (s.u_hi - s.u_lo) : 0.0;
            const double q = s.q_lo + frac * (s.q_hi - s.q_lo);
            const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
            sum += w * g(q);
        }
        acc += sum * h / 3.0;
    }
    return acc;
}

double table_survival(const TableSurvival& tab, double t) {
    const auto& ts = tab.ts;
    const auto& ss = tab.ss;
    if (t < ts.front()) return ss.front();
    if (t >= ts.back()) return 0.0;  // residual mass is an atom at the last node
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - ts.begin()) - 1;
    const double frac = (t - ts[i]) / (ts[i + 1] - ts[i]);
    return ss[i] + frac * (ss[i + 1] - ss[i]);
}

double table_quantile(const TableSurvival& tab, double u) {
    const auto& ts = tab.ts;
    const auto& ss = tab.ss;
    if (ss.front() <= u) return 0.0;
    if (u < ss.back()) return ts.back();
    // Find the interpolation segment where the survival crosses u.
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        if (ss[i] > u && u >= ss[i + 1]) {
            if (ss[i] == ss[i + 1]) return ts[i];
            const double frac = (ss[i] - u) / (ss[i] - ss[i + 1]);
            return ts[i] + frac * (ts[i + 1] - ts[i]);
        }
    }
    return ts.back();
}

}  // namespace

double survival(const DistributionSpec& dist, double t) {
    return std::visit(
        [t](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform01>) {
                if (t < 0.0) return 1.0;
                return t >= 1.0 ? 0.0 : 1.0 - t;
            } else if constexpr (std::is_same_v<T, ParetoTail>) {
                if (t < d.scale) return 1.0;
                return std::pow(d.scale / t, d.exponent);
            } else if constexpr (std::is_same_v<T, PointMass>) {
                return t < d.value ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, Empirical>) {
                const auto& s = d.sorted_samples;
                const auto it = std::upper_bound(s.begin(), s.end(), t);
                return static_cast<double>(s.end() - it) / static_cast<double>(s.size());
            } else if constexpr (std::is_same_v<T, Discrete>) {
                return discrete_survival(d.values, d.probs, t);
            } else {
                return table_survival(d, t);
            }
        },
        dist);
}

double upper_tail_quantile(const DistributionSpec& dist, double u) {
    check_u(u);
    return std::visit(
        [u](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform01>) {
                return 1.0 - u;
            } else if constexpr (std::is_same_v<T, ParetoTail>) {
                if (u >= 1.0) return 0.0;
                return d.scale * std::pow(u, -1.0 / d.exponent);
            } else if constexpr (std::is_same_v<T, PointMass>) {
                return u >= 1.0 ? 0.0 : d.value;
            } else if constexpr (std::is_same_v<T, Empirical>) {
                const auto& s = d.sorted_samples;
                const std::size_t n = s.size();
                // Smallest candidate t with #{samples > t}/n <= u; compare the
                // same quotient the survival function computes so boundary
                // values of u stay consistent.
                const double dn = static_cast<double>(n);
                auto surv_at = [&](std::size_t i) {
                    const auto it = std::upper_bound(s.begin(), s.end(), s[i]);
                    return static_cast<double>(s.end() - it) / dn;
                };
                const auto it0 = std::upper_bound(s.begin(), s.end(), 0.0);
                if (static_cast<double>(s.end() - it0) / dn <= u) return 0.0;
                std::size_t lo = 0, hi = n - 1;
                while (lo < hi) {
                    const std::size_t mid = (lo + hi) / 2;
                    if (surv_at(mid) <= u)
                        hi = mid;
                    else
                        lo = mid + 1;
                }
                return s[lo];
            } else if constexpr (std::is_same_v<T, Discrete>) {
                return discrete_quantile(d.values, d.probs, u);
            } else {
                return table_quantile(d, u);
            }
        },
        dist);
}

double integrated_quantile(const DistributionSpec& dist, double x) {
    check_x01(x);
    if (x == 0.0) return 0.0;
    return std::visit(
        [x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform01>) {
                return x - 0.5 * x * x;
            } else if constexpr (std::is_same_v<T, ParetoTail>) {
                const double r = d.exponent;
                if (r <= 1.0) return kInf;
                return d.scale * r / (r - 1.0) * std::pow(x, 1.0 - 1.0 / r);
            } else if constexpr (std::is_same_v<T, PointMass>) {
                return d.value * x;
            } else if constexpr (std::is_same_v<T, Empirical>) {
                const double n = static_cast<double>(d.sorted_samples.size());
                std::vector<double> probs(d.sorted_samples.size(), 1.0 / n);
                return discrete_step_integral(d.sorted_samples, probs, x,
                                              [](double v) { return v; });
            } else if constexpr (std::is_same_v<T, Discrete>) {
                return discrete_step_integral(d.values, d.probs, x, [](double v) { return v; });
            } else {
                return table_segment_integral(d, x, [](double q) { return q; });
            }
        },
        dist);
}

double integrated_square_quantile(const DistributionSpec& dist, double x) {
    check_x01(x);
    if (x == 0.0) return 0.0;
    return std::visit(
        [x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform01>) {
                const double y = 1.0 - x;
                return (1.0 - y * y * y) / 3.0;
            } else if constexpr (std::is_same_v<T, ParetoTail>) {
                const double r = d.exponent;
                if (r <= 2.0) return kInf;
                return d.scale * d.scale * r / (r - 2.0) * std::pow(x, 1.0 - 2.0 / r);
            } else if constexpr (std::is_same_v<T, PointMass>) {
                return d.value * d.value * x;
            } else if constexpr (std::is_same_v<T, Empirical>) {
                const double n = static_cast<double>(d.sorted_samples.size());
                std::vector<double> probs(d.sorted_samples.size(), 1.0 / n);
                return discrete_step_integral(d.sorted_samples, probs, x,
                                              [](double v) { return v * v; });
            } else if constexpr (std::is_same_v<T, Discrete>) {
                return discrete_step_integral(d.values, d.probs, x,
                                              [](double v) { return v * v; });
            } else {
                return table_segment_integral(d, x, [](double q) { return q * q; });
            }
        },
        dist);
}

double moment(const DistributionSpec& dist, double m) {
    return std::visit(
        [m](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform01>) {
                return 1.0 / (m + 1.0);
            } else if constexpr (std::is_same_v<T, ParetoTail>) {
                if (m >= d.exponent) return kInf;
                return std::pow(d.scale, m) * d.exponent / (d.exponent - m);
            } else if constexpr (std::is_same_v<T, PointMass>) {
                return std::pow(d.value, m);
            } else if constexpr (std::is_same_v<T, Empirical>) {
                double acc = 0.0;
                for (double v : d.sorted_samples) acc += std::pow(v, m);
                return acc / static_cast<double>(d.sorted_samples.size());
            } else if constexpr (std::is_same_v<T, Discrete>) {
                double acc = 0.0;
                for (std::size_t i = 0; i < d.values.size(); ++i)
                    acc += d.probs[i] * std::pow(d.values[i], m);
                return acc;
            } else {
                return table_segment_integral(d, 1.0, [m](double q) { return std::pow(q, m); });
            }
        },
        dist);
}

double g_inverse(const DistributionSpec& dist, double y) {
    if (y < 0.0) throw std::domain_error("g_inverse: y must be nonnegative");
    if (y == 0.0) return 0.0;
    const double mean = integrated_quantile(dist, 1.0);
    if (y > mean * (1.0 + 1e-12) + 1e-300)
        throw std::range_error("g_inverse: y exceeds E|X|");
    // Smallest x with int_0^x Q >= y; the integrated quantile is continuous
    // and nondecreasing, so bisection on [0,1] converges to the left edge.
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (integrated_quantile(dist, mid) < y)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

double log_moment(const DistributionSpec& dist, double a) {
    if (moment(dist, 2.0) == kInf) return kInf;
    // E[X^2 (log(1+X))^a] = int_0^1 Q^2(u) (log(1+Q(u)))^a du; the second
    // moment being finite makes the integrand integrable for every variant
    // in this family. Log-spaced composite quadrature toward u = 0.
    double acc = 0.0;
    const int decades = 14, per = 64;
    double hi = 1.0;
    for (int dcd = 0; dcd < decades; ++dcd) {
        const double lo = hi / 10.0;
        const double h = (hi - lo) / per;
        for (int k = 0; k < per; ++k) {
            const double u = lo + (k + 0.5) * h;
            const double q = upper_tail_quantile(dist, u);
            acc += h * q * q * std::pow(std::log1p(q), a);
        }
        hi = lo;
    }
    return acc;
}

bool tail_dominated_by(const DistributionSpec& dist, double c, double r) {
    if (!(c > 0.0) || !(r > 0.0))
        throw std::domain_error("tail_dominated_by: c and r must be positive");
    if (const auto* par = std::get_if<ParetoTail>(&dist)) {
        return par->exponent >= r && c >= par->scale;
    }
    // Grid check on a wide log scale; the ratio is piecewise monotone for the
    // remaining (bounded or tabulated) variants.
    for (int j = -200; j <= 400; ++j) {
        const double x = c * std::pow(2.0, j / 8.0);
        if (survival(dist, x) > std::pow(c / x, r) + 1e-12) return false;
    }
    return true;
}

double truncated_mean(const DistributionSpec& dist_x, const DistributionSpec& dist_y,
                      Coupling joint, double x) {
    if (joint == Coupling::Independent) {
        const double mean = integrated_quantile(dist_x, 1.0);
        return mean * survival(dist_y, x);
    }
    // Identical coupling: E(X 1_{X > x}).
    return std::visit(
        [x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform01>) {
                if (x >= 1.0) return 0.0;
                const double t = std::max(x, 0.0);
                return 0.5 * (1.0 - t * t);
            } else if constexpr (std::is_same_v<T, ParetoTail>) {
                const double r = d.exponent;
                if (r <= 1.0) return kInf;
                const double full = d.scale * r / (r - 1.0);
                if (x <= d.scale) return full;
                return r / (r - 1.0) * std::pow(d.scale, r) * std::pow(x, 1.0 - r);
            } else if constexpr (std::is_same_v<T, PointMass>) {
                return x < d.value ? d.value : 0.0;
            } else if constexpr (std::is_same_v<T, Empirical>) {
                double acc = 0.0;
                for (double v : d.sorted_samples)
                    if (v > x) acc += v;
                return acc / static_cast<double>(d.sorted_samples.size());
            } else if constexpr (std::is_same_v<T, Discrete>) {
                double acc = 0.0;
                for (std::size_t i = 0; i < d.values.size(); ++i)
                    if (d.values[i] > x) acc += d.probs[i] * d.values[i];
                return acc;
            } else {
                // E(X 1_{X>x}) = x S(x) + int_x^tmax S(t) dt. The survival
                // drops to 0 at the last node (residual mass is an atom
                // there), but the integrand up to tmax is the interpolated
                // table, integrated exactly by trapezoids.
                const double t0 = std::max(x, 0.0);
                if (t0 >= d.ts.back()) return 0.0;
                auto interp = [&d](double t) {
                    if (t <= d.ts.front()) return d.ss.front();
                    const auto it = std::upper_bound(d.ts.begin(), d.ts.end(), t);
                    std::size_t i = static_cast<std::size_t>(it - d.ts.begin());
                    if (i >= d.ts.size()) return d.ss.back();
                    --i;
                    const double frac = (t - d.ts[i]) / (d.ts[i + 1] - d.ts[i]);
                    return d.ss[i] + frac * (d.ss[i + 1] - d.ss[i]);
                };
                double acc = t0 * table_survival(d, t0);
                double prev_t = t0, prev_s = interp(t0);
                for (std::size_t i = 0; i < d.ts.size(); ++i) {
                    if (d.ts[i] <= t0) continue;
                    acc += 0.5 * (prev_s + d.ss[i]) * (d.ts[i] - prev_t);
                    prev_t = d.ts[i];
                    prev_s = d.ss[i];
                }
                return acc;
            }
        },
        dist_x);
}

double h_function(const DistributionSpec& dist_x, const DistributionSpec& dist_y,
                  Coupling joint, double u) {
    if (u < 0.0) throw std::domain_error("h_function: u must be nonnegative");
    if (truncated_mean(dist_x, dist_y, joint, 0.0) <= u) return 0.0;
    double hi = 1.0;
    int guard = 0;
    while (truncated_mean(dist_x, dist_y, joint, hi) > u) {
        hi *= 2.0;
        if (++guard > 2000) return kInf;  // infinite-mean law, no finite inverse
    }
    double lo = hi > 1.0 ? hi / 2.0 : 0.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (truncated_mean(dist_x, dist_y, joint, mid) > u)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

double quantile_sample(const DistributionSpec& dist, double u) {
    return upper_tail_quantile(dist, u);
}

std::string describe(const DistributionSpec& dist) {
    std::ostringstream os;
    std::visit(
        [&os](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform01>)
                os << "uniform01";
            else if constexpr (std::is_same_v<T, ParetoTail>)
                os << "pareto(c=" << d.scale << ",r=" << d.exponent << ")";
            else if constexpr (std::is_same_v<T, PointMass>)
                os << "point_mass(" << d.value << ")";
            else if constexpr (std::is_same_v<T, Empirical>)
                os << "empirical(n=" << d.sorted_samples.size() << ")";
            else if constexpr (std::is_same_v<T, Discrete>)
                os << "discrete(m=" << d.values.size() << ")";
            else
                os << "table_survival(m=" << d.ts.size() << ")";
        },
        dist);
    return os.str();
}

}  // namespace cltlab
