#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "cltlab/distributions.hpp"
#include "cltlab/grid.hpp"
#include "cltlab/rng.hpp"

namespace cltlab {

// ---- observables -----------------------------------------------------------

struct ObsIdentity {};
struct ObsInvPow {
    double alpha = 1.0;  // x -> x^(-alpha)
};
struct ObsInvPowRight {
    double alpha = 1.0;  // x -> (1-x)^(-alpha)
};
struct ObsMonotoneTable {
    std::vector<double> xs;  // increasing
    std::vector<double> ys;  // nondecreasing; linear interpolation between
};

using Observable = std::variant<ObsIdentity, ObsInvPow, ObsInvPowRight, ObsMonotoneTable>;

// Evaluates the observable; arguments below the clip threshold are clipped
// (double-overflow guard) and counted by the caller.
inline constexpr double kSingularityClip = 1e-300;
double apply_observable_value(const Observable& obs, double x, std::uint64_t* clip_count);

// ---- process specifications ------------------------------------------------

struct IIDProcess {
    DistributionSpec dist = Uniform01{};
};

struct FiniteStateMarkov {
    std::vector<double> states;               // sorted real values
    std::vector<std::vector<double>> rows;    // row-stochastic transition matrix
    std::vector<double> stationary;           // filled by validate() when empty

    std::size_t num_states() const { return states.size(); }
};

struct LSVOrbit {
    double gamma = 0.25;          // in (0,1)
    std::size_t burn_in = 10000;  // iterations toward the invariant measure
};

struct LSVDual {
    double gamma = 0.25;
    std::size_t burn_in = 10000;
};

struct ProcessSpec;

struct ComposedProcess {
    std::shared_ptr<ProcessSpec> base;
    Observable observable = ObsIdentity{};
};

struct ProcessSpec
    : std::variant<IIDProcess, FiniteStateMarkov, LSVOrbit, LSVDual, ComposedProcess> {
    using variant::variant;
    const variant& as_variant() const { return *this; }
    variant& as_variant() { return *this; }
};

// Validates invariants (stochastic rows, gamma range) and computes the
// stationary vector of a chain when absent. Throws std::invalid_argument.
void validate(ProcessSpec& spec);

struct PathSample {
    std::vector<double> values;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::uint64_t clip_count = 0;  // singular observable evaluations clipped
    std::string spec_tag;
};

// ---- operations ------------------------------------------------------------

// The intermittent interval map: x(1 + 2^g x^g) on [0,1/2), 2x-1 on [1/2,1].
double lsv_map(double gamma, double x);

// One draw approximately distributed as the absolutely continuous invariant
// measure, by iterating the map from a uniform start for burn_in steps.
double sample_invariant(double gamma, RngStream& rng, std::size_t burn_in);

// Stationary path of length n. For the dual spec the returned sequence is a
// reversed orbit started at an invariant draw.
PathSample generate_path(const ProcessSpec& spec, std::size_t n, RngStream& rng);

PathSample apply_observable(const PathSample& path, const Observable& obs);

// True (or high-accuracy) CDF of the process marginal at the grid nodes.
// Analytic for i.i.d. and finite-state specs; for map-driven specs an
// empirical CDF from a calibration run of `calibration` draws.
std::vector<double> marginal_cdf_on_grid(const ProcessSpec& spec, const GridMeasure& grid,
                                         std::size_t calibration, RngStream& rng);

// Whether conditioning on Y_0 equals conditioning on the full past, which the
// mixing estimator requires.
bool is_markov_type(const ProcessSpec& spec);

std::string describe(const ProcessSpec& spec);

}  // namespace cltlab
