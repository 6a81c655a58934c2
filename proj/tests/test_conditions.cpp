#include <doctest.h>

#include <cmath>

#include "cltlab/conditions.hpp"

using namespace cltlab;

namespace {

MixingProfile poly_profile(double C, double s, std::size_t k_max) {
    return profile_theoretical(RateFamily{PolynomialRate{C, s}}, k_max);
}

}  // namespace

TEST_CASE("series verdict on the pareto/polynomial grid") {
    // Increments ~ n^{-s(1-2/r)}: converges iff s(1-2/r) > 1 (exact power law,
    // so the fitted slope lands outside the dead zone whenever the margin
    // does).
    const DistributionSpec pareto = ParetoTail{1.0, 4.0};
    const auto conv = series_quantile_integral(poly_profile(1.0, 3.0, 1024), pareto, 1024);
    CHECK(conv.verdict == Verdict::Converges);  // 3 * (1/2) = 1.5
    CHECK(conv.slope_valid);
    CHECK(conv.slope == doctest::Approx(-1.5).epsilon(0.01));

    const auto div = series_quantile_integral(poly_profile(1.0, 1.0, 1024), pareto, 1024);
    CHECK(div.verdict == Verdict::Diverges);  // 1 * (1/2) = 0.5
    CHECK(div.slope == doctest::Approx(-0.5).epsilon(0.01));

    // Uniform law: increments ~ beta(n) itself, so the boundary sits at s = 1.
    const DistributionSpec u01 = Uniform01{};
    CHECK(series_quantile_integral(poly_profile(1.0, 1.5, 1024), u01, 1024).verdict ==
          Verdict::Converges);
    CHECK(series_quantile_integral(poly_profile(1.0, 0.5, 1024), u01, 1024).verdict ==
          Verdict::Diverges);
    // s = 1 gives slope -1, inside the dead zone.
    CHECK(series_quantile_integral(poly_profile(1.0, 1.0, 1024), u01, 1024).verdict ==
          Verdict::Inconclusive);
}

TEST_CASE("infinite increments and vanishing tails decide immediately") {
    const DistributionSpec heavy = ParetoTail{1.0, 2.0};  // int Q^2 diverges
    const auto rep = series_quantile_integral(poly_profile(1.0, 5.0, 64), heavy, 64);
    CHECK(rep.verdict == Verdict::Diverges);
    CHECK_FALSE(rep.slope_valid);

    MixingProfile zeros;
    zeros.provenance = ProfileKind::Exact;
    zeros.values.assign(65, 0.0);
    zeros.values[0] = 0.5;
    const auto rep0 = series_quantile_integral(zeros, DistributionSpec{Uniform01{}}, 64);
    CHECK(rep0.verdict == Verdict::Converges);
}

TEST_CASE("partial sums are dyadic and monotone; strict suppresses the verdict") {
    const DistributionSpec u01 = Uniform01{};
    const auto rep = series_quantile_integral(poly_profile(1.0, 2.0, 256), u01, 256);
    REQUIRE(!rep.partial_sums.empty());
    double prev = 0.0;
    std::size_t prev_n = 0;
    for (const auto& [n, s] : rep.partial_sums) {
        CHECK(n > prev_n);
        if (prev_n > 0) CHECK(n == 2 * prev_n);
        CHECK(s >= prev);
        prev = s;
        prev_n = n;
    }
    const auto strict = series_quantile_integral(poly_profile(1.0, 2.0, 256), u01, 256, true);
    CHECK(strict.strict);
    CHECK(strict.verdict == Verdict::Inconclusive);
    CHECK(strict.partial_sums == rep.partial_sums);
    CHECK(to_json(strict).find("partial_sums") != std::string::npos);
}

TEST_CASE("gamma condition through the change of variables") {
    // gamma_n = n^{-a} with the uniform law: integrand ~ gamma_n, boundary at
    // a = 1.
    const DistributionSpec u01 = Uniform01{};
    for (double a : {0.5, 2.0}) {
        GammaSequence g;
        for (std::size_t n = 1; n <= 1024; ++n)
            g.values.push_back(0.2 * std::pow(static_cast<double>(n), -a));
        const auto rep = gamma_condition(g, u01, 1024);
        CHECK(rep.verdict == (a > 1.0 ? Verdict::Converges : Verdict::Diverges));
    }
    // gamma above E|X| clamps instead of throwing.
    GammaSequence big;
    big.values.assign(64, 5.0);
    const auto rep = gamma_condition(big, u01, 64);
    CHECK(rep.verdict == Verdict::Diverges);
    CHECK(rep.partial_sums.back().second ==
          doctest::Approx(64.0 / 3.0));  // 64 full integrals of Q^2
}

TEST_CASE("series condition is weaker than the gamma condition") {
    // gamma_n <= 2 int_0^{beta(n)} Q: whenever the series over the quantile
    // integral converges, feeding those gamma bounds back in must not produce
    // a divergent gamma series.
    const DistributionSpec dists[] = {DistributionSpec{Uniform01{}},
                                      DistributionSpec{ParetoTail{1.0, 4.0}}};
    for (const auto& d : dists) {
        const MixingProfile prof = poly_profile(0.5, 3.0, 1024);
        const auto series = series_quantile_integral(prof, d, 1024);
        REQUIRE(series.verdict == Verdict::Converges);
        GammaSequence g;
        for (std::size_t n = 1; n <= 1024; ++n)
            g.values.push_back(2.0 * integrated_quantile(d, prof.values[n]));
        const auto gc = gamma_condition(g, d, 1024);
        CHECK(gc.verdict == Verdict::Converges);
    }
}

TEST_CASE("moment rate hypothesis") {
    // r = 4: need sum (n+1)^{2/(r-2)} beta(n) = sum (n+1)^{1-s} to converge,
    // so s > 2.
    const DistributionSpec u01 = Uniform01{};
    auto res = rate_condition_check(RateHypothesis{MomentHypothesis{4.0}}, u01,
                                    poly_profile(1.0, 3.5, 1024));
    CHECK(res.hypothesis_ok);
    CHECK(res.satisfied);
    res = rate_condition_check(RateHypothesis{MomentHypothesis{4.0}}, u01,
                               poly_profile(1.0, 1.5, 1024));
    CHECK(res.hypothesis_ok);
    CHECK_FALSE(res.satisfied);
    // Pareto with r = 4 has no finite 4th moment.
    res = rate_condition_check(RateHypothesis{MomentHypothesis{4.0}},
                               DistributionSpec{ParetoTail{1.0, 4.0}},
                               poly_profile(1.0, 3.5, 1024));
    CHECK_FALSE(res.hypothesis_ok);
    CHECK_FALSE(res.satisfied);
}

TEST_CASE("tail rate hypothesis") {
    const DistributionSpec pareto = ParetoTail{1.0, 4.0};
    // sum beta^{1/2} = sum (n+1)^{-s/2}: converges for s = 3, diverges s = 1.
    auto res = rate_condition_check(RateHypothesis{TailHypothesis{4.0, 1.0}}, pareto,
                                    poly_profile(1.0, 3.0, 1024));
    CHECK(res.hypothesis_ok);
    CHECK(res.satisfied);
    res = rate_condition_check(RateHypothesis{TailHypothesis{4.0, 1.0}}, pareto,
                               poly_profile(1.0, 1.0, 1024));
    CHECK_FALSE(res.satisfied);
    // Wrong domination constant.
    res = rate_condition_check(RateHypothesis{TailHypothesis{5.0, 1.0}}, pareto,
                               poly_profile(1.0, 3.0, 1024));
    CHECK_FALSE(res.hypothesis_ok);
}

TEST_CASE("log-moment rate hypothesis") {
    const DistributionSpec u01 = Uniform01{};
    const MixingProfile expo =
        profile_theoretical(RateFamily{ExponentialRate{1.0, 0.5, 1.0}}, 64);
    auto res = rate_condition_check(
        RateHypothesis{LogMomentHypothesis{1.0, 0.5}}, u01, expo);
    CHECK(res.hypothesis_ok);
    CHECK(res.satisfied);
    // Polynomial decay is not O(e^{-tau n}).
    res = rate_condition_check(RateHypothesis{LogMomentHypothesis{1.0, 0.5}}, u01,
                               poly_profile(1.0, 3.0, 64));
    CHECK(res.hypothesis_ok);
    CHECK_FALSE(res.satisfied);
    // Law without E X^2 log X.
    res = rate_condition_check(RateHypothesis{LogMomentHypothesis{1.0, 0.5}},
                               DistributionSpec{ParetoTail{1.0, 2.0}}, expo);
    CHECK_FALSE(res.hypothesis_ok);
}

TEST_CASE("iid reduction") {
    const MeasureSpec unit = LebesgueInterval{0.0, 1.0};
    auto res = iid_reduction(unit, RealLaw{UniformOn{0.0, 1.0}}, 2.0);
    CHECK(res.finite);  // finite measure: always true
    CHECK(res.value == doctest::Approx(0.5).epsilon(1e-3));  // E|Y| on [0,1]

    // Lebesgue line with Cauchy marginal and p = 2: E|Y| = inf.
    auto cauchy = iid_reduction(MeasureSpec{LebesgueLine{}}, RealLaw{StandardCauchy{}}, 2.0);
    CHECK_FALSE(cauchy.finite);
    // p = 4: E|Y|^{1/2} over the Cauchy law is finite.
    auto c4 = iid_reduction(MeasureSpec{LebesgueLine{}}, RealLaw{StandardCauchy{}}, 4.0);
    CHECK(c4.finite);
    // 2/pi int_0^inf sqrt(y)/(1+y^2) dy = 2/pi * pi/sqrt(2) = sqrt(2)
    CHECK(c4.value == doctest::Approx(std::sqrt(2.0)).epsilon(0.02));

    auto nn = iid_reduction(MeasureSpec{LebesgueLine{}},
                            RealLaw{NonnegativeLaw{ParetoTail{1.0, 3.0}}}, 2.0);
    CHECK(nn.finite);
    CHECK(nn.value == doctest::Approx(1.5).epsilon(0.02));  // E Y, pareto r=3
    auto nn2 = iid_reduction(MeasureSpec{LebesgueLine{}},
                             RealLaw{NonnegativeLaw{ParetoTail{1.0, 1.0}}}, 2.0);
    CHECK_FALSE(nn2.finite);
}

TEST_CASE("observable thresholds for the interval map") {
    auto t = lsv_observable_threshold(0.25, 2.0, ObservableKind::InvPow);
    CHECK(t.admissible);
    CHECK(t.critical_alpha == doctest::Approx(0.5));
    t = lsv_observable_threshold(0.25, 2.0, ObservableKind::InvPowRight);
    CHECK(t.admissible);
    CHECK(t.critical_alpha == doctest::Approx(0.5 / 0.75));
    t = lsv_observable_threshold(0.5, 2.0, ObservableKind::InvPow);
    CHECK_FALSE(t.admissible);
    t = lsv_observable_threshold(0.75, 4.0, ObservableKind::InvPowRight);
    CHECK_FALSE(t.admissible);
    // Larger p admits more singular observables.
    const double a2 = lsv_observable_threshold(0.25, 2.0, ObservableKind::InvPow).critical_alpha;
    const double a4 = lsv_observable_threshold(0.25, 4.0, ObservableKind::InvPow).critical_alpha;
    CHECK(a4 == doctest::Approx(2.0 * a2));
}
