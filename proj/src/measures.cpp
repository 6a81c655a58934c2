#include "cltlab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cltlab {

namespace {

// mu(]lo, hi]) for a trapezoid density table, lo <= hi.
double density_mass(const DensityWeighted& d, double lo, double hi) {
    const std::size_t m = d.density.size();
    const double h = (d.b - d.a) / static_cast<double>(m - 1);
    lo = std::max(lo, d.a);
    hi = std::min(hi, d.b);
    if (hi <= lo) return 0.0;
    auto value_at = [&](double t) {
        const double pos = (t - d.a) / h;
        const auto i = std::min(static_cast<std::size_t>(pos), m - 2);
        const double frac = pos - static_cast<double>(i);
        return d.density[i] + frac * (d.density[i + 1] - d.density[i]);
    };
    // Exact trapezoid integral of the piecewise-linear density.
    double acc = 0.0;
    double t = lo, v = value_at(lo);
    const auto first = static_cast<std::size_t>(std::ceil((lo - d.a) / h - 1e-12));
    for (std::size_t i = first; i < m; ++i) {
        const double node = d.a + static_cast<double>(i) * h;
        if (node <= t) continue;
        if (node >= hi) break;
        acc += 0.5 * (v + d.density[i]) * (node - t);
        t = node;
        v = d.density[i];
    }
    acc += 0.5 * (v + value_at(hi)) * (hi - t);
    return acc;
}

}  // namespace

double f_mu(const MeasureSpec& measure, double x) {
    return std::visit(
        [x](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LebesgueInterval>) {
                if (x >= 0.0) {
                    const double lo = std::max(0.0, m.a), hi = std::min(x, m.b);
                    return hi > lo ? hi - lo : 0.0;
                }
                const double lo = std::max(x, m.a), hi = std::min(0.0, m.b);
                return hi > lo ? -(hi - lo) : 0.0;
            } else if constexpr (std::is_same_v<T, LebesgueLine>) {
                return x;
            } else if constexpr (std::is_same_v<T, DensityWeighted>) {
                return x >= 0.0 ? density_mass(m, 0.0, x) : -density_mass(m, x, 0.0);
            } else {
                // Atomic: mass of ]0,x] or -mass of [x,0[.
                double acc = 0.0;
                for (const auto& [loc, mass] : m.atoms) {
                    if (x >= 0.0 && loc > 0.0 && loc <= x) acc += mass;
                    if (x < 0.0 && loc >= x && loc < 0.0) acc -= mass;
                }
                return acc;
            }
        },
        measure);
}

bool is_finite_measure(const MeasureSpec& measure) {
    return !std::holds_alternative<LebesgueLine>(measure);
}

double total_mass(const MeasureSpec& measure) {
    return std::visit(
        [](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LebesgueInterval>) {
                return m.b - m.a;
            } else if constexpr (std::is_same_v<T, LebesgueLine>) {
                return std::numeric_limits<double>::infinity();
            } else if constexpr (std::is_same_v<T, DensityWeighted>) {
                return density_mass(m, m.a, m.b);
            } else {
                double acc = 0.0;
                for (const auto& [loc, mass] : m.atoms) acc += mass;
                return acc;
            }
        },
        measure);
}

EnvelopeValue envelope_value(const MeasureSpec& measure, double p, double x) {
    if (!(p >= 2.0)) throw std::domain_error("envelope_value: p must be >= 2");
    const double fm = f_mu(measure, x);
    EnvelopeValue out;
    out.value = std::pow(std::abs(fm), 1.0 / p);
    if (fm != 0.0) {
        const double q = p / (p - 1.0);
        out.witness.support_lo = std::min(0.0, x);
        out.witness.support_hi = std::max(0.0, x);
        out.witness.sign = x > 0.0 ? 1 : -1;
        out.witness.normalizer = std::pow(std::abs(fm), -1.0 / q);
    }
    return out;
}

std::string describe(const MeasureSpec& measure) {
    std::ostringstream os;
    std::visit(
        [&os](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LebesgueInterval>)
                os << "lebesgue[" << m.a << "," << m.b << "]";
            else if constexpr (std::is_same_v<T, LebesgueLine>)
                os << "lebesgue_line";
            else if constexpr (std::is_same_v<T, DensityWeighted>)
                os << "density[" << m.a << "," << m.b << ";m=" << m.density.size() << "]";
            else
                os << "atomic(" << m.atoms.size() << ")";
        },
        measure);
    return os.str();
}

}  // namespace cltlab
