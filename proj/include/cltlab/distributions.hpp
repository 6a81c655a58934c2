#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace cltlab {

// Law of a nonnegative scalar, described through its upper tail function
// t -> P(|X| > t). Everything downstream (Q, G, H, condition integrals)
// is derived from this.

struct Uniform01 {};

struct ParetoTail {
    double scale = 1.0;     // c > 0
    double exponent = 1.0;  // r > 0, survival (c/t)^r for t >= c
};

struct PointMass {
    double value = 0.0;  // c >= 0
};

// Equal-weight sample, sorted nondecreasing, all values >= 0.
struct Empirical {
    std::vector<double> sorted_samples;
};

// Atoms with arbitrary positive probabilities summing to 1.
struct Discrete {
    std::vector<double> values;  // sorted nondecreasing, >= 0
    std::vector<double> probs;
};

// Monotone nonincreasing survival function tabulated on a grid,
// linearly interpolated between nodes, >= 2 nodes.
struct TableSurvival {
    std::vector<double> ts;  // increasing, >= 0
    std::vector<double> ss;  // nonincreasing, in [0,1]
};

using DistributionSpec =
    std::variant<Uniform01, ParetoTail, PointMass, Empirical, Discrete, TableSurvival>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// P(|X| > t), right-continuous, nonincreasing.
double survival(const DistributionSpec& dist, double t);

// Q(u) = inf{t >= 0 : P(|X| > t) <= u}, u in (0,1]. Throws std::domain_error
// outside (0,1].
double upper_tail_quantile(const DistributionSpec& dist, double u);

// int_0^x Q(u) du for x in [0,1]; equals E|X| at x = 1 (possibly +inf).
double integrated_quantile(const DistributionSpec& dist, double x);

// int_0^x Q^2(u) du; +inf when the integral diverges (e.g. Pareto r <= 2).
double integrated_square_quantile(const DistributionSpec& dist, double x);

// E|X|^m = int_0^1 Q(u)^m du; +inf when divergent.
double moment(const DistributionSpec& dist, double m);

// Smallest x with int_0^x Q >= y. Throws std::range_error when y exceeds E|X|.
double g_inverse(const DistributionSpec& dist, double y);

// E[X^2 (log(1+X))^a]; +inf when divergent.
double log_moment(const DistributionSpec& dist, double a);

// Whether P(|X| > x) <= (c/x)^r for all x > 0 (checked analytically where
// possible, otherwise on a fine grid).
bool tail_dominated_by(const DistributionSpec& dist, double c, double r);

enum class Coupling { Identical, Independent };

// E(|X| 1_{|Y| > x}) for the given coupling rule.
double truncated_mean(const DistributionSpec& dist_x, const DistributionSpec& dist_y,
                      Coupling joint, double x);

// Generalized inverse of x -> E(|X| 1_{|Y| > x}): smallest x with the map <= u.
double h_function(const DistributionSpec& dist_x, const DistributionSpec& dist_y,
                  Coupling joint, double u);

// Draw with the law of |X| (inverse transform through Q).
// u must be a uniform draw on (0,1].
double quantile_sample(const DistributionSpec& dist, double u);

std::string describe(const DistributionSpec& dist);

}  // namespace cltlab
