#include "cltlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cltlab {

GridMeasure lebesgue_grid(double a, double b, std::size_t cells, double p) {
    if (!(b > a) || cells == 0) throw std::invalid_argument("lebesgue_grid: bad interval");
    GridMeasure g;
    g.p = p;
    g.interval = {a, b};
    const double h = (b - a) / static_cast<double>(cells);
    g.nodes.reserve(cells);
    g.weights.assign(cells, h);
    for (std::size_t j = 0; j < cells; ++j)
        g.nodes.push_back(a + (static_cast<double>(j) + 0.5) * h);
    return g;
}

GridMeasure grid_from_measure(const MeasureSpec& measure, std::size_t cells, double p,
                              double* mass_loss) {
    if (mass_loss) *mass_loss = 0.0;
    if (const auto* li = std::get_if<LebesgueInterval>(&measure))
        return lebesgue_grid(li->a, li->b, cells, p);
    if (const auto* dw = std::get_if<DensityWeighted>(&measure)) {
        GridMeasure g = lebesgue_grid(dw->a, dw->b, cells, p);
        // Weight each cell with its mu-mass.
        const double h = (dw->b - dw->a) / static_cast<double>(cells);
        for (std::size_t j = 0; j < cells; ++j) {
            const double lo = dw->a + static_cast<double>(j) * h;
            const double cell_mass = f_mu(measure, lo + h) - f_mu(measure, lo);
            g.weights[j] = std::max(cell_mass, 1e-300);
        }
        return g;
    }
    if (const auto* at = std::get_if<Atomic>(&measure)) {
        GridMeasure g;
        g.p = p;
        auto atoms = at->atoms;
        std::sort(atoms.begin(), atoms.end());
        for (const auto& [loc, mass] : atoms) {
            g.nodes.push_back(loc);
            g.weights.push_back(mass);
        }
        return g;
    }
    throw std::invalid_argument(
        "grid_from_measure: the Lebesgue line must be truncated to an interval first");
}

double lp_norm(const LpPath& path, const GridMeasure& grid) {
    if (path.values.size() != grid.size())
        throw std::invalid_argument("lp_norm: path/grid size mismatch");
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j)
        acc += grid.weights[j] * std::pow(std::abs(path.values[j]), grid.p);
    return std::pow(acc, 1.0 / grid.p);
}

LpPath dyadic_projection(const LpPath& path, int level, const GridMeasure& grid) {
    if (!grid.interval)
        throw std::invalid_argument("dyadic_projection: grid is not interval-based");
    if (level < 0) throw std::invalid_argument("dyadic_projection: level must be >= 0");
    if (path.values.size() != grid.size())
        throw std::invalid_argument("dyadic_projection: path/grid size mismatch");
    const auto [a, b] = *grid.interval;
    const std::size_t ncells = std::size_t{1} << level;
    const double w = (b - a) / static_cast<double>(ncells);
    std::vector<double> mass(ncells, 0.0), avg(ncells, 0.0);
    std::vector<std::size_t> cell_of(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        auto c = static_cast<std::size_t>((grid.nodes[j] - a) / w);
        if (c >= ncells) c = ncells - 1;
        cell_of[j] = c;
        mass[c] += grid.weights[j];
        avg[c] += grid.weights[j] * path.values[j];
    }
    for (std::size_t c = 0; c < ncells; ++c) {
        if (mass[c] <= 0.0)
            throw std::invalid_argument("dyadic_projection: level too deep, empty cell");
        avg[c] /= mass[c];
    }
    LpPath out;
    out.meta = path.meta;
    out.values.resize(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) out.values[j] = avg[cell_of[j]];
    return out;
}

double tail_functional(const LpPath& path, int level, const GridMeasure& grid) {
    const LpPath proj = dyadic_projection(path, level, grid);
    LpPath diff;
    diff.values.resize(path.values.size());
    for (std::size_t j = 0; j < path.values.size(); ++j)
        diff.values[j] = path.values[j] - proj.values[j];
    return lp_norm(diff, grid);
}

std::vector<double> grid_f_mu(const GridMeasure& grid) {
    // Signed cumulative weight of ]0, node] (or -[node, 0[) in the discrete
    // measure carried by the grid itself.
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        double acc = 0.0;
        const double x = grid.nodes[j];
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double t = grid.nodes[i];
            if (x >= 0.0 && t > 0.0 && t <= x) acc += grid.weights[i];
            if (x < 0.0 && t >= x && t < 0.0) acc -= grid.weights[i];
        }
        out[j] = acc;
    }
    return out;
}

}  // namespace cltlab
