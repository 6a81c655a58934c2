#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cltlab/distributions.hpp"
#include "cltlab/measures.hpp"
#include "cltlab/mixing.hpp"

namespace cltlab {

// ---- series verdicts -------------------------------------------------------

enum class Verdict { Converges, Diverges, Inconclusive };

std::string verdict_name(Verdict v);

// Convergence of a numeric series is undecidable from finitely many terms;
// the operational rule fits the slope of log increments against log(n+1) on
// the upper quarter of the schedule: < -1.05 converges, > -0.95 diverges,
// the dead zone in between is inconclusive. `strict` suppresses the verdict
// and reports partial sums only.
struct ConditionReport {
    Verdict verdict = Verdict::Inconclusive;
    std::vector<std::pair<std::size_t, double>> partial_sums;  // dyadic (N, S_N)
    double slope = 0.0;       // NaN when no fit was possible
    bool slope_valid = false;
    std::string reason;
    std::string inputs;       // echo of the instance
    bool strict = false;
};

std::string to_json(const ConditionReport& report);

// n -> gamma_n = E ||E(X_n | F_0)||, stored with values[i] = gamma_{i+1}.
struct GammaSequence {
    std::vector<double> values;
};

// sum_{n>=1} int_0^{beta(n)} Q^2(u) du. The profile must cover k = 0..N_max.
ConditionReport series_quantile_integral(const MixingProfile& profile,
                                         const DistributionSpec& dist, std::size_t n_max,
                                         bool strict = false);

// sum_{n>=1} int_0^{gamma_n} Q o G (u) du, evaluated through the change of
// variables int_0^g Q o G = int_0^{G(g)} Q^2. gamma_n above E|X| clamps to
// the full range of the integrated quantile.
ConditionReport gamma_condition(const GammaSequence& gammas, const DistributionSpec& dist,
                                std::size_t n_max, bool strict = false);

// ---- moment/rate sufficient conditions -------------------------------------

struct MomentHypothesis {
    double r = 4.0;  // E|X|^r < inf  and  sum (n+1)^{2/(r-2)} beta(n) < inf
};
struct TailHypothesis {
    double r = 4.0;  // P(|X|>x) <= (c/x)^r  and  sum beta(n)^{1-2/r} < inf
    double c = 1.0;
};
struct LogMomentHypothesis {
    double a = 1.0;  // E[X^2 log^a(1+X)] < inf  and  beta(n) = O(e^{-tau n^{1/a}})
    double tau = 1.0;
};

using RateHypothesis = std::variant<MomentHypothesis, TailHypothesis, LogMomentHypothesis>;

struct RateCheckResult {
    bool satisfied = false;      // hypothesis_ok and series converges/bounded
    bool hypothesis_ok = false;  // the moment/tail/log-moment part
    ConditionReport series;      // summability (or O-boundedness) evidence
    std::string evidence;
};

RateCheckResult rate_condition_check(const RateHypothesis& hypothesis,
                                     const DistributionSpec& dist,
                                     const MixingProfile& profile, bool strict = false);

// ---- i.i.d. reduction ------------------------------------------------------

// Marginal law of Y_0 on the whole line (the envelope moment needs signed
// arguments, so nonnegative DistributionSpec laws are not enough).
struct UniformOn {
    double a = 0.0;
    double b = 1.0;
};
struct StandardCauchy {};
struct NonnegativeLaw {
    DistributionSpec dist = Uniform01{};
};

using RealLaw = std::variant<UniformOn, StandardCauchy, NonnegativeLaw>;

struct IidReductionResult {
    bool finite = false;
    double value = 0.0;          // the stabilized truncated integral when finite
    double last_truncation = 0.0;
    std::string note;
};

// E |F_mu(Y_0)|^{2/p} < inf? Numeric proxy: truncated integrals over
// |Y_0| <= T stabilize within 1% under doubling T.
IidReductionResult iid_reduction(const MeasureSpec& measure, const RealLaw& law, double p);

// ---- intermittent-map observable thresholds --------------------------------

enum class ObservableKind { InvPow, InvPowRight };

struct ThresholdResult {
    double critical_alpha = 0.0;
    bool admissible = false;  // false when gamma >= 1/2 (no admissible alpha)
};

// Critical exponent below which the composed observable keeps the CLT:
// (p/2)(1-2g) for x^{-a}, (p/2)(1-2g)/(1-g) for (1-x)^{-a}.
ThresholdResult lsv_observable_threshold(double gamma, double p, ObservableKind kind);

}  // namespace cltlab
