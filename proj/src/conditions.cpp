#include "cltlab/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace cltlab {

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Converges: return "converges";
        case Verdict::Diverges: return "diverges";
        default: return "inconclusive";
    }
}

std::string to_json(const ConditionReport& report) {
    nlohmann::json j;
    j["verdict"] = report.strict ? "suppressed" : verdict_name(report.verdict);
    nlohmann::json sums = nlohmann::json::array();
    for (const auto& [n, s] : report.partial_sums) sums.push_back({n, s});
    j["partial_sums"] = sums;
    if (report.slope_valid)
        j["slope"] = report.slope;
    else
        j["slope"] = nullptr;
    j["reason"] = report.reason;
    j["inputs"] = report.inputs;
    return j.dump(2);
}

namespace {

// increments[i] is the summand for n = i+1.
ConditionReport report_from_increments(const std::vector<double>& increments,
                                       std::string inputs, bool strict) {
    ConditionReport rep;
    rep.inputs = std::move(inputs);
    rep.strict = strict;
    rep.slope = std::numeric_limits<double>::quiet_NaN();

    const std::size_t n_max = increments.size();
    double running = 0.0;
    std::size_t next_dyadic = 1;
    for (std::size_t i = 0; i < n_max; ++i) {
        const double a = increments[i];
        if (!(a >= 0.0)) throw std::logic_error("condition series: negative increment");
        if (std::isinf(a)) {
            rep.verdict = Verdict::Diverges;
            rep.reason = "inner integral infinite at n = " + std::to_string(i + 1);
            return rep;
        }
        running += a;
        if (i + 1 == next_dyadic || i + 1 == n_max) {
            rep.partial_sums.emplace_back(i + 1, running);
            while (next_dyadic <= i + 1) next_dyadic *= 2;
        }
    }

    // Fit on the upper quarter of the schedule, skipping exact zeros.
    const std::size_t lo = std::max<std::size_t>(4, n_max / 4);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t pts = 0;
    bool any_positive = false;
    for (std::size_t n = lo; n <= n_max; ++n) {
        const double a = increments[n - 1];
        if (a <= 0.0) continue;
        any_positive = true;
        const double x = std::log(static_cast<double>(n + 1));
        const double y = std::log(a);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++pts;
    }
    if (!any_positive) {
        rep.verdict = Verdict::Converges;
        rep.reason = "tail increments vanish identically";
        if (strict) rep.verdict = Verdict::Inconclusive;
        return rep;
    }
    if (pts < 3) {
        rep.verdict = Verdict::Inconclusive;
        rep.reason = "too few positive increments in the fit window";
        return rep;
    }
    const double denom = static_cast<double>(pts) * sxx - sx * sx;
    rep.slope = (static_cast<double>(pts) * sxy - sx * sy) / denom;
    rep.slope_valid = true;
    if (rep.slope < -1.05) {
        rep.verdict = Verdict::Converges;
        rep.reason = "log-increment slope below -1.05";
    } else if (rep.slope > -0.95) {
        rep.verdict = Verdict::Diverges;
        rep.reason = "log-increment slope above -0.95";
    } else {
        rep.verdict = Verdict::Inconclusive;
        rep.reason = "slope inside the dead zone (-1.05, -0.95)";
    }
    if (strict) {
        rep.verdict = Verdict::Inconclusive;
        rep.reason = "strict mode: partial sums only";
    }
    return rep;
}

double clamped_square_integral(const DistributionSpec& dist, double beta) {
    const double b = std::clamp(beta, 0.0, 1.0);
    if (b == 0.0) return 0.0;
    return integrated_square_quantile(dist, b);
}

}  // namespace

ConditionReport series_quantile_integral(const MixingProfile& profile,
                                         const DistributionSpec& dist, std::size_t n_max,
                                         bool strict) {
    if (profile.values.size() <= n_max)
        throw std::invalid_argument("series_quantile_integral: profile shorter than n_max");
    std::vector<double> inc;
    inc.reserve(n_max);
    for (std::size_t n = 1; n <= n_max; ++n)
        inc.push_back(clamped_square_integral(dist, profile.values[n]));
    std::ostringstream in;
    in << "series_quantile_integral(" << describe(dist) << ", n_max=" << n_max << ")";
    return report_from_increments(inc, in.str(), strict);
}

ConditionReport gamma_condition(const GammaSequence& gammas, const DistributionSpec& dist,
                                std::size_t n_max, bool strict) {
    if (gammas.values.size() < n_max)
        throw std::invalid_argument("gamma_condition: sequence shorter than n_max");
    const double mean = moment(dist, 1.0);
    std::vector<double> inc;
    inc.reserve(n_max);
    for (std::size_t n = 1; n <= n_max; ++n) {
        double g = gammas.values[n - 1];
        if (g < 0.0) throw std::invalid_argument("gamma_condition: negative gamma_n");
        if (g == 0.0) {
            inc.push_back(0.0);
            continue;
        }
        if (std::isfinite(mean) && g > mean) g = mean;
        // int_0^g Q o G = int_0^{G(g)} Q^2 by u = int_0^x Q.
        const double x = g_inverse(dist, g);
        inc.push_back(integrated_square_quantile(dist, x));
    }
    std::ostringstream in;
    in << "gamma_condition(" << describe(dist) << ", n_max=" << n_max << ")";
    return report_from_increments(inc, in.str(), strict);
}

RateCheckResult rate_condition_check(const RateHypothesis& hypothesis,
                                     const DistributionSpec& dist,
                                     const MixingProfile& profile, bool strict) {
    RateCheckResult out;
    const std::size_t n_max = profile.values.empty() ? 0 : profile.values.size() - 1;
    if (n_max < 16)
        throw std::invalid_argument("rate_condition_check: profile too short (need k_max >= 16)");
    std::visit(
        [&](const auto& h) {
            using T = std::decay_t<decltype(h)>;
            std::ostringstream ev;
            if constexpr (std::is_same_v<T, MomentHypothesis>) {
                if (!(h.r > 2.0))
                    throw std::invalid_argument("rate_condition_check: need r > 2");
                const double m = moment(dist, h.r);
                out.hypothesis_ok = std::isfinite(m);
                ev << "E|X|^" << h.r << " = " << m << "; ";
                std::vector<double> inc;
                for (std::size_t n = 1; n <= n_max; ++n)
                    inc.push_back(std::pow(static_cast<double>(n + 1), 2.0 / (h.r - 2.0)) *
                                  profile.values[n]);
                out.series = report_from_increments(
                    inc, "sum (n+1)^{2/(r-2)} beta(n), r=" + std::to_string(h.r), strict);
            } else if constexpr (std::is_same_v<T, TailHypothesis>) {
                if (!(h.r > 2.0))
                    throw std::invalid_argument("rate_condition_check: need r > 2");
                out.hypothesis_ok = tail_dominated_by(dist, h.c, h.r);
                ev << "tail dominated by (c/x)^r: " << (out.hypothesis_ok ? "yes" : "no")
                   << "; ";
                std::vector<double> inc;
                for (std::size_t n = 1; n <= n_max; ++n)
                    inc.push_back(std::pow(profile.values[n], 1.0 - 2.0 / h.r));
                out.series = report_from_increments(
                    inc, "sum beta(n)^{1-2/r}, r=" + std::to_string(h.r), strict);
            } else {
                if (!(h.a > 0.0 && h.tau > 0.0))
                    throw std::invalid_argument("rate_condition_check: need a, tau > 0");
                const double lm = log_moment(dist, h.a);
                out.hypothesis_ok = std::isfinite(lm);
                ev << "E[X^2 log^a(1+X)] = " << lm << "; ";
                // O(e^{-tau n^{1/a}}): the ratio beta(n) e^{tau n^{1/a}} must
                // stay bounded; operationally, its max over the second half
                // of the profile must not exceed the max over the first half.
                double head = 0.0, tail = 0.0;
                std::size_t next_dyadic = 1;
                ConditionReport rep;
                rep.strict = strict;
                rep.slope = std::numeric_limits<double>::quiet_NaN();
                rep.inputs = "ratio beta(n) exp(tau n^{1/a}), tau=" + std::to_string(h.tau) +
                             ", a=" + std::to_string(h.a);
                double run_max = 0.0;
                for (std::size_t n = 1; n <= n_max; ++n) {
                    const double ratio =
                        profile.values[n] *
                        std::exp(h.tau * std::pow(static_cast<double>(n), 1.0 / h.a));
                    run_max = std::max(run_max, ratio);
                    if (n <= n_max / 2)
                        head = std::max(head, ratio);
                    else
                        tail = std::max(tail, ratio);
                    if (n == next_dyadic || n == n_max) {
                        rep.partial_sums.emplace_back(n, run_max);
                        while (next_dyadic <= n) next_dyadic *= 2;
                    }
                }
                const bool bounded =
                    std::isfinite(run_max) && tail <= head * (1.0 + 1e-6) + 1e-300;
                rep.verdict = strict ? Verdict::Inconclusive
                                     : (bounded ? Verdict::Converges : Verdict::Diverges);
                rep.reason = bounded ? "ratio max not growing on the second half"
                                     : "ratio grows: beta is not O(e^{-tau n^{1/a}})";
                out.series = rep;
                ev << rep.reason << "; ";
            }
            ev << "series verdict " << verdict_name(out.series.verdict);
            out.evidence = ev.str();
        },
        hypothesis);
    out.satisfied = out.hypothesis_ok && out.series.verdict == Verdict::Converges;
    return out;
}

namespace {

// Truncated E |F_mu(Y_0)|^{2/p} over |Y_0| <= T.
double truncated_envelope_moment(const MeasureSpec& measure, const RealLaw& law, double p,
                                 double T) {
    const double e = 2.0 / p;
    auto g = [&](double y) { return std::pow(std::abs(f_mu(measure, y)), e); };
    return std::visit(
        [&](const auto& l) -> double {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, UniformOn>) {
                const double lo = std::max(l.a, -T), hi = std::min(l.b, T);
                if (hi <= lo) return 0.0;
                const std::size_t m = 4096;
                double acc = 0.0;
                const double hstep = (hi - lo) / static_cast<double>(m);
                for (std::size_t i = 0; i < m; ++i)
                    acc += g(lo + (static_cast<double>(i) + 0.5) * hstep);
                return acc * hstep / (l.b - l.a);
            } else if constexpr (std::is_same_v<L, StandardCauchy>) {
                // Core |y| <= 1 on a linear grid; tails on a log grid in |y|
                // (a linear grid cannot resolve the region each doubling of T
                // adds, and would declare log-divergent integrals stable).
                const std::size_t m = 4096;
                double acc = 0.0;
                double hstep = 2.0 / static_cast<double>(m);
                for (std::size_t i = 0; i < m; ++i) {
                    const double y = -1.0 + (static_cast<double>(i) + 0.5) * hstep;
                    acc += g(y) / (1.0 + y * y) * hstep;
                }
                if (T > 1.0) {
                    const double smax = std::log(T);
                    hstep = smax / static_cast<double>(m);
                    for (std::size_t i = 0; i < m; ++i) {
                        const double y = std::exp((static_cast<double>(i) + 0.5) * hstep);
                        acc += (g(y) + g(-y)) * y / (1.0 + y * y) * hstep;
                    }
                }
                return acc / M_PI;
            } else {
                // Nonnegative law through the quantile transform Y = Q(U),
                // log-spaced in u so the u -> 0 tail stays resolved.
                const double cutoff = std::max(survival(l.dist, T), 1e-280);
                const std::size_t m = 8192;
                const double vlo = std::log(cutoff);
                if (vlo >= 0.0) return 0.0;
                const double hstep = -vlo / static_cast<double>(m);
                double acc = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double u = std::exp(vlo + (static_cast<double>(i) + 0.5) * hstep);
                    acc += g(upper_tail_quantile(l.dist, u)) * u * hstep;
                }
                return acc;
            }
        },
        law);
}

}  // namespace

IidReductionResult iid_reduction(const MeasureSpec& measure, const RealLaw& law, double p) {
    if (!(p >= 2.0)) throw std::invalid_argument("iid_reduction: p must be >= 2");
    IidReductionResult out;
    if (is_finite_measure(measure)) {
        // |F_mu| <= mu(R), so the envelope moment is bounded outright.
        out.finite = true;
        out.last_truncation = kInf;
        out.value = truncated_envelope_moment(measure, law, p, 1e12);
        out.note = "finite measure: envelope bounded by total mass";
        return out;
    }
    double prev = truncated_envelope_moment(measure, law, p, 1.0);
    std::size_t stable = 0;
    double T = 1.0;
    for (int k = 0; k < 48; ++k) {
        T *= 2.0;
        const double cur = truncated_envelope_moment(measure, law, p, T);
        const double rel = std::abs(cur - prev) / std::max(std::abs(cur), 1e-12);
        stable = rel <= 0.01 ? stable + 1 : 0;
        prev = cur;
        if (stable >= 2) {
            out.finite = true;
            out.value = cur;
            out.last_truncation = T;
            out.note = "truncated integral stabilized under doubling";
            return out;
        }
    }
    out.finite = false;
    out.value = prev;
    out.last_truncation = T;
    out.note = "truncated integral still moving after 48 doublings";
    return out;
}

ThresholdResult lsv_observable_threshold(double gamma, double p, ObservableKind kind) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::domain_error("lsv_observable_threshold: gamma must lie in (0,1)");
    if (!(p >= 2.0)) throw std::domain_error("lsv_observable_threshold: p must be >= 2");
    ThresholdResult out;
    if (gamma >= 0.5) return out;  // no admissible alpha in the CLT regime
    out.admissible = true;
    out.critical_alpha = kind == ObservableKind::InvPow
                             ? 0.5 * p * (1.0 - 2.0 * gamma)
                             : 0.5 * p * (1.0 - 2.0 * gamma) / (1.0 - gamma);
    return out;
}

}  // namespace cltlab
