#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace cltlab {

// Sigma-finite measure on the real line, restricted to the variants the
// laboratory actually exercises.

struct LebesgueInterval {
    double a = 0.0;
    double b = 1.0;
};

struct LebesgueLine {};

// Density tabulated at uniformly spaced nodes on [a,b]; mass integrals are
// trapezoid sums (O(h^2) in the node spacing).
struct DensityWeighted {
    double a = 0.0;
    double b = 1.0;
    std::vector<double> density;  // nonnegative, >= 2 nodes
};

struct Atomic {
    std::vector<std::pair<double, double>> atoms;  // (location, mass > 0)
};

using MeasureSpec = std::variant<LebesgueInterval, LebesgueLine, DensityWeighted, Atomic>;

// Signed cumulative mass: mu(]0,x]) for x >= 0, -mu([x,0[) for x < 0.
// Nondecreasing, zero at zero.
double f_mu(const MeasureSpec& measure, double x);

bool is_finite_measure(const MeasureSpec& measure);
double total_mass(const MeasureSpec& measure);  // +inf for the Lebesgue line

// Description of the extremal Sobolev-ball function attaining the envelope
// at x: a normalized indicator supported on [0,x] (or [x,0]).
struct EnvelopeWitness {
    double support_lo = 0.0;
    double support_hi = 0.0;
    int sign = 0;               // +1 for x > 0, -1 for x < 0, 0 when F_mu(x) = 0
    double normalizer = 0.0;    // |F_mu(x)|^{-1/q}, q conjugate to p
};

struct EnvelopeValue {
    double value = 0.0;  // |F_mu(x)|^{1/p}
    EnvelopeWitness witness;
};

// Pointwise supremum of |f(x) - f(0)| over the unit ball W_{1,q}(mu),
// q = p/(p-1). Requires p >= 2.
EnvelopeValue envelope_value(const MeasureSpec& measure, double p, double x);

std::string describe(const MeasureSpec& measure);

}  // namespace cltlab
