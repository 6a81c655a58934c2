#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cltlab/measures.hpp"

namespace cltlab {

// Quadrature discretization of L^p(mu): nodes, positive weights, exponent.
// When the grid comes from an interval it remembers the interval so dyadic
// cell projections are well defined.
struct GridMeasure {
    std::vector<double> nodes;    // strictly increasing
    std::vector<double> weights;  // positive
    double p = 2.0;
    std::optional<std::pair<double, double>> interval;  // [a,b] when cell-based

    std::size_t size() const { return nodes.size(); }
};

// Midpoint discretization of Lebesgue measure on [a,b] with M equal cells.
GridMeasure lebesgue_grid(double a, double b, std::size_t cells, double p);

// Grid for a general measure: midpoint nodes with trapezoid/atomic weights.
// Unbounded measures must be truncated by the caller first; `mass_loss`
// reports the truncated mass for density measures (0 otherwise).
GridMeasure grid_from_measure(const MeasureSpec& measure, std::size_t cells, double p,
                              double* mass_loss = nullptr);

// Function on the grid nodes, an element of the discretized L^p(mu).
struct LpPath {
    std::vector<double> values;
    // provenance, free-form (process tag, n, replicate id)
    std::string meta;
};

// (sum_j w_j |v_j|^p)^{1/p}
double lp_norm(const LpPath& path, const GridMeasure& grid);

// mu-weighted average of the path over each of the 2^level dyadic cells of
// the grid interval; idempotent and norm-nonexpansive. Throws when the grid
// has no interval or some cell holds no node.
LpPath dyadic_projection(const LpPath& path, int level, const GridMeasure& grid);

// ||path - P_level path||, an upper bound for the distance of the path to
// the span of the first 2^level dyadic cell indicators.
double tail_functional(const LpPath& path, int level, const GridMeasure& grid);

// F_mu evaluated at grid nodes using the grid's own weights (the discrete
// measure the grid carries); used by envelope property tests.
std::vector<double> grid_f_mu(const GridMeasure& grid);

}  // namespace cltlab
