#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cltlab/mixing.hpp"

using namespace cltlab;

namespace {

FiniteStateMarkov two_state_chain() {
    FiniteStateMarkov c;
    c.states = {0.0, 1.0};
    c.rows = {{0.9, 0.1}, {0.2, 0.8}};
    return c;
}

FiniteStateMarkov swap_chain() {
    FiniteStateMarkov c;
    c.states = {0.0, 1.0};
    c.rows = {{0.0, 1.0}, {1.0, 0.0}};
    return c;
}

ProcessSpec chain_spec(const FiniteStateMarkov& c) {
    ProcessSpec s = c;
    validate(s);
    return s;
}

}  // namespace

TEST_CASE("exact chain coefficients follow the spectral decay") {
    const FiniteStateMarkov chain = two_state_chain();
    // pi = (2/3, 1/3), second eigenvalue 0.7: beta(k) = (4/9) 0.7^k.
    for (std::size_t k = 0; k <= 20; ++k) {
        const double expect = (4.0 / 9.0) * std::pow(0.7, static_cast<double>(k));
        CHECK(beta_tilde_exact_markov(chain, k) == doctest::Approx(expect).epsilon(1e-10));
    }
    bool underflow = false;
    const double tiny = beta_tilde_exact_markov(chain, 3000, &underflow);
    CHECK(underflow);
    CHECK(tiny == 0.0);

    const MixingProfile prof = profile_exact_markov(chain, 10);
    REQUIRE(prof.values.size() == 11);
    CHECK(prof.provenance == ProfileKind::Exact);
    CHECK(prof.values[0] == doctest::Approx(4.0 / 9.0));
    CHECK(prof.values[5] == doctest::Approx((4.0 / 9.0) * std::pow(0.7, 5.0)));
}

TEST_CASE("periodic chain never mixes") {
    const FiniteStateMarkov chain = swap_chain();
    for (std::size_t k = 1; k <= 10; ++k)
        CHECK(beta_tilde_exact_markov(chain, k) == doctest::Approx(0.5));
}

TEST_CASE("theoretical profiles") {
    const RateFamily poly = PolynomialRate{2.0, 1.5};
    CHECK(theoretical_profile(poly, 0) == doctest::Approx(1.0));  // clamped
    CHECK(theoretical_profile(poly, 3) == doctest::Approx(2.0 * std::pow(4.0, -1.5)));
    const RateFamily expo = ExponentialRate{1.0, 0.5, 2.0};
    CHECK(theoretical_profile(expo, 9) == doctest::Approx(std::exp(-0.5 * 3.0)));
    const MixingProfile prof = profile_theoretical(expo, 5);
    CHECK(prof.values.size() == 6);
    CHECK(prof.provenance == ProfileKind::Theoretical);
    CHECK_THROWS_AS(profile_theoretical(RateFamily{PolynomialRate{-1.0, 1.0}}, 5),
                    std::domain_error);
    CHECK_THROWS_AS(profile_theoretical(RateFamily{ExponentialRate{1.0, -0.2, 1.0}}, 5),
                    std::domain_error);
}

TEST_CASE("empirical estimator is unbiased at zero for iid") {
    ProcessSpec iid = IIDProcess{Uniform01{}};
    validate(iid);
    std::vector<double> thresholds;
    for (int i = 1; i < 16; ++i) thresholds.push_back(i / 16.0);
    RngStream rng(61, 0);
    const BetaEstimate est = beta_tilde_empirical(iid, 3, 200, thresholds, rng, 500);
    CHECK(est.std_error > 0.0);
    CHECK(std::fabs(est.estimate) <= 3.0 * est.std_error + 1e-12);
}

TEST_CASE("empirical estimator tracks the exact chain coefficients") {
    const FiniteStateMarkov chain = two_state_chain();
    const ProcessSpec spec = chain_spec(chain);
    const std::vector<double> thresholds = {0.0, 1.0};
    for (std::size_t k : {1, 2, 4}) {
        RngStream rng(61, 10 + k);
        const BetaEstimate est =
            beta_tilde_empirical(spec, k, 300, thresholds, rng, 2000);
        const double exact = beta_tilde_exact_markov(chain, k);
        CHECK(std::fabs(est.estimate - exact) <= 3.0 * est.std_error + 0.01);
    }
}

TEST_CASE("empirical estimator refuses non-markov specs and tiny designs") {
    ProcessSpec orbit = LSVOrbit{0.25, 100};
    validate(orbit);
    const std::vector<double> thresholds = {0.25, 0.5, 0.75};
    RngStream rng(61, 50);
    CHECK_THROWS_AS(beta_tilde_empirical(orbit, 1, 200, thresholds, rng),
                    std::invalid_argument);
    ProcessSpec iid = IIDProcess{Uniform01{}};
    validate(iid);
    CHECK_THROWS_AS(beta_tilde_empirical(iid, 1, 50, thresholds, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(beta_tilde_empirical(iid, 1, 200, {0.5}, rng),
                    std::invalid_argument);
}

TEST_CASE("reversed-orbit coefficients decay polynomially") {
    // gamma = 0.25 should give a summable polynomial profile; fit the slope of
    // log(estimate) against log(k) using only well-resolved points.
    ProcessSpec dual = LSVDual{0.25, 2000};
    validate(dual);
    std::vector<double> thresholds;
    for (int i = 1; i < 32; ++i) thresholds.push_back(i / 32.0);
    std::vector<double> lx, ly;
    for (std::size_t k : {1, 2, 4, 8, 16}) {
        RngStream rng(67, k);
        const BetaEstimate est = beta_tilde_empirical(dual, k, 150, thresholds, rng, 1500);
        if (est.estimate > 3.0 * est.std_error) {
            lx.push_back(std::log(static_cast<double>(k)));
            ly.push_back(std::log(est.estimate));
        }
    }
    REQUIRE(lx.size() >= 3);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double n = static_cast<double>(lx.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope < -1.0);  // decays at least like 1/k
}

TEST_CASE("chain gamma sequence and norm laws") {
    const FiniteStateMarkov chain = two_state_chain();
    const GridMeasure grid = lebesgue_grid(0.0, 1.0, 64, 2.0);
    // gamma_n decays geometrically with the spectral gap; check ratio.
    const double g1 = gamma_from_chain(chain, grid, 1);
    const double g4 = gamma_from_chain(chain, grid, 4);
    CHECK(g1 > 0.0);
    CHECK(g4 == doctest::Approx(g1 * std::pow(0.7, 3.0)).epsilon(1e-8));

    const DistributionSpec norm_dist = chain_indicator_norm_dist(chain, grid);
    // ||X_0|| takes one value per start state: |1_{s<=t} - 2/3| is 1/3 on
    // [0,1) from state 0 and 2/3 from state 1.
    CHECK(upper_tail_quantile(norm_dist, 0.9) == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    CHECK(upper_tail_quantile(norm_dist, 0.1) == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK(moment(norm_dist, 1.0) ==
          doctest::Approx((2.0 / 3.0) * (1.0 / 3.0) + (1.0 / 3.0) * (2.0 / 3.0))
              .epsilon(1e-6));

    const DistributionSpec env = chain_envelope_dist(chain, MeasureSpec{LebesgueInterval{0.0, 1.0}}, 2.0);
    // F_mu(0) = 0, F_mu(1) = 1: atoms 0 (mass 2/3) and 1 (mass 1/3).
    CHECK(moment(env, 1.0) == doctest::Approx(1.0 / 3.0));
}
