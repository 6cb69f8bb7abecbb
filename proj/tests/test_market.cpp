#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oligoshare/market.hpp"
#include "oligoshare/rng.hpp"

using oligoshare::InfeasibleCosts;
using oligoshare::InfeasibleDemand;
using oligoshare::market::bertrand_coefficients;
using oligoshare::market::bertrand_equilibrium;
using oligoshare::market::BertrandCoefficients;
using oligoshare::market::cournot_equilibrium;
using oligoshare::market::CostVector;
using oligoshare::market::demand_from_prices;
using oligoshare::market::duopoly_welfare;
using oligoshare::market::equilibrium_oracle;
using oligoshare::market::EquilibriumOutcome;
using oligoshare::market::inverse_demand;
using oligoshare::market::MarketParams;
using oligoshare::market::Mode;
using oligoshare::rng::Stream;

namespace {

MarketParams make_params(int m, double gamma, Mode mode) {
    MarketParams params;
    params.m = m;
    params.gamma = gamma;
    params.mode = mode;
    params.budget = static_cast<double>(m) + 1.0;
    return params;
}

// Draws gamma strictly inside the admissible interval and costs that keep the
// requested mode feasible (rejection sampling on the library's own check).
struct RandomInstance {
    MarketParams params;
    CostVector costs;
};

RandomInstance draw_instance(Stream& stream, int m, Mode mode) {
    for (;;) {
        const double lo = -1.0 / (m - 1);
        const double gamma = 0.9 * (lo + (1.0 - lo) * stream.next_unit());
        MarketParams params = make_params(m, gamma, mode);
        CostVector costs(m);
        for (double& c : costs) c = 0.5 * stream.next_unit();
        try {
            if (mode == Mode::Cournot) {
                cournot_equilibrium(costs, params);
            } else {
                bertrand_equilibrium(costs, params);
            }
            return {params, costs};
        } catch (const InfeasibleCosts&) {
            continue;
        }
    }
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    return worst;
}

}  // namespace

TEST_CASE("two-firm quantity equilibrium matches hand-computed values") {
    const MarketParams params = make_params(2, 0.5, Mode::Cournot);
    const EquilibriumOutcome outcome = cournot_equilibrium({0.1, 0.2}, params);
    // q_i = (2 - g - 2 c_i + g c_j) / ((2 - g)(2 + g)) with g = 1/2:
    CHECK(outcome.quantities[0] == doctest::Approx(1.4 / 3.75).epsilon(1e-14));
    CHECK(outcome.quantities[1] == doctest::Approx(1.15 / 3.75).epsilon(1e-14));
    CHECK(outcome.profits[0] ==
          doctest::Approx(outcome.quantities[0] * outcome.quantities[0])
              .epsilon(1e-14));
    CHECK(outcome.prices[0] ==
          doctest::Approx(1.0 - outcome.quantities[0] -
                          0.5 * outcome.quantities[1])
              .epsilon(1e-14));
    CHECK(outcome.feasible);
    CHECK_FALSE(outcome.boundary);
}

TEST_CASE("symmetric three-firm quantities collapse to the one-firm formula") {
    const MarketParams params = make_params(3, 0.4, Mode::Cournot);
    const EquilibriumOutcome outcome =
        cournot_equilibrium({0.1, 0.1, 0.1}, params);
    for (const double q : outcome.quantities) {
        CHECK(q == doctest::Approx(0.9 / 2.8).epsilon(1e-14));
    }
}

TEST_CASE("gamma zero decouples the firms in both modes") {
    const CostVector costs{0.15, 0.4, 0.05};
    const EquilibriumOutcome cournot =
        cournot_equilibrium(costs, make_params(3, 0.0, Mode::Cournot));
    const EquilibriumOutcome bertrand =
        bertrand_equilibrium(costs, make_params(3, 0.0, Mode::Bertrand));
    for (int i = 0; i < 3; ++i) {
        CHECK(cournot.quantities[i] ==
              doctest::Approx((1.0 - costs[i]) / 2.0).epsilon(1e-14));
        CHECK(bertrand.prices[i] ==
              doctest::Approx((1.0 + costs[i]) / 2.0).epsilon(1e-14));
    }
}

TEST_CASE("closed forms agree with the damped best-response oracle") {
    Stream stream(2024);
    for (const Mode mode : {Mode::Cournot, Mode::Bertrand}) {
        for (int m = 2; m <= 5; ++m) {
            for (int rep = 0; rep < 10; ++rep) {
                const RandomInstance inst = draw_instance(stream, m, mode);
                const EquilibriumOutcome closed =
                    mode == Mode::Cournot
                        ? cournot_equilibrium(inst.costs, inst.params)
                        : bertrand_equilibrium(inst.costs, inst.params);
                const EquilibriumOutcome iterated =
                    equilibrium_oracle(inst.costs, inst.params);
                CHECK(max_abs_diff(closed.quantities, iterated.quantities) <=
                      1e-10);
                CHECK(max_abs_diff(closed.prices, iterated.prices) <= 1e-10);
                CHECK(max_abs_diff(closed.profits, iterated.profits) <= 1e-10);
            }
        }
    }
}

TEST_CASE("no profitable unilateral deviation on a fine action grid") {
    Stream stream(77);
    for (const Mode mode : {Mode::Cournot, Mode::Bertrand}) {
        for (int m : {2, 4}) {
            const RandomInstance inst = draw_instance(stream, m, mode);
            const EquilibriumOutcome eq =
                mode == Mode::Cournot
                    ? cournot_equilibrium(inst.costs, inst.params)
                    : bertrand_equilibrium(inst.costs, inst.params);
            for (int i = 0; i < m; ++i) {
                double best = eq.profits[i];
                for (int g = 0; g <= 1000; ++g) {
                    const double action = g / 1000.0;
                    double profit;
                    if (mode == Mode::Cournot) {
                        std::vector<double> q = eq.quantities;
                        q[i] = action;
                        const std::vector<double> p =
                            inverse_demand(q, inst.params);
                        profit = (p[i] - inst.costs[i]) * q[i];
                    } else {
                        std::vector<double> p = eq.prices;
                        p[i] = action;
                        std::vector<double> q(m, 0.0);
                        try {
                            q = demand_from_prices(p, inst.params);
                        } catch (const InfeasibleDemand&) {
                            continue;  // deviation prices its rival out
                        }
                        profit = (p[i] - inst.costs[i]) * q[i];
                    }
                    best = std::max(best, profit);
                }
                CHECK(best <= eq.profits[i] + 1e-9);
            }
        }
    }
}

TEST_CASE("price-to-quantity inversion round-trips to 1e-12") {
    Stream stream(11);
    for (int m = 2; m <= 5; ++m) {
        const double lo = -1.0 / (m - 1);
        for (int rep = 0; rep < 25; ++rep) {
            const double gamma = 0.9 * (lo + (1.0 - lo) * stream.next_unit());
            const MarketParams params = make_params(m, gamma, Mode::Cournot);
            std::vector<double> quantities(m);
            for (double& q : quantities) q = 0.5 * stream.next_unit();
            const std::vector<double> prices = inverse_demand(quantities, params);
            const std::vector<double> back = demand_from_prices(prices, params);
            CHECK(max_abs_diff(quantities, back) <= 1e-12);
        }
    }
}

TEST_CASE("two-firm price-competition coefficients take the classical form") {
    const double gamma = 0.3;
    const BertrandCoefficients c =
        bertrand_coefficients(make_params(2, gamma, Mode::Bertrand));
    CHECK(c.d1 == doctest::Approx(2.0 - gamma - gamma * gamma).epsilon(1e-14));
    CHECK(c.d2 == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(c.d3 == doctest::Approx(gamma).epsilon(1e-14));
    CHECK(c.d4 == doctest::Approx(4.0 - gamma * gamma).epsilon(1e-14));
}

TEST_CASE("price-competition profits obey the equilibrium markup identity") {
    // At the equilibrium first-order condition, quantity is proportional to
    // markup: q_i = (1 + g(m-2)) / ((1-g)(1+g(m-1))) (p_i - c_i), so profit
    // equals that prefactor times the squared markup. The same identity with
    // (m+2) in the prefactor must fail for m >= 3.
    const int m = 3;
    const double gamma = 0.6;
    const CostVector costs{0.05, 0.2, 0.12};
    const MarketParams params = make_params(m, gamma, Mode::Bertrand);
    const EquilibriumOutcome eq = bertrand_equilibrium(costs, params);
    const double good =
        (1.0 + gamma * (m - 2)) / ((1.0 - gamma) * (1.0 + gamma * (m - 1)));
    const double bad =
        (1.0 + gamma * (m + 2)) / ((1.0 - gamma) * (1.0 + gamma * (m - 1)));
    for (int i = 0; i < m; ++i) {
        const double markup = eq.prices[i] - costs[i];
        CHECK(eq.profits[i] ==
              doctest::Approx(good * markup * markup).epsilon(1e-12));
        CHECK(std::abs(eq.profits[i] - bad * markup * markup) > 1e-6);
    }
}

TEST_CASE("cost spreads beyond the interior condition name the failing firm") {
    const MarketParams params = make_params(2, 0.9, Mode::Cournot);
    CHECK_THROWS_AS(cournot_equilibrium({0.0, 0.95}, params), InfeasibleCosts);
    try {
        cournot_equilibrium({0.0, 0.95}, params);
    } catch (const InfeasibleCosts& e) {
        CHECK(e.firm == 1);
    }
}

TEST_CASE("a quantity exactly at zero is feasible with the boundary flag") {
    // (2 - g)(1 - c2) = g (c2 - c1) at g = 1/2, c = (0, 3/4).
    const MarketParams params = make_params(2, 0.5, Mode::Cournot);
    const EquilibriumOutcome eq = cournot_equilibrium({0.0, 0.75}, params);
    CHECK(eq.quantities[1] == 0.0);
    CHECK(eq.feasible);
    CHECK(eq.boundary);
}

TEST_CASE("parameter validation rejects out-of-range inputs") {
    CHECK_THROWS_AS(cournot_equilibrium({0.1, 0.1}, make_params(2, 1.0, Mode::Cournot)),
                    std::invalid_argument);
    CHECK_THROWS_AS(cournot_equilibrium({0.1, 0.1, 0.1}, make_params(3, -0.55, Mode::Cournot)),
                    std::invalid_argument);
    MarketParams tight = make_params(2, 0.5, Mode::Cournot);
    tight.budget = 2.0;  // must strictly exceed the firm count
    CHECK_THROWS_AS(cournot_equilibrium({0.1, 0.1}, tight), std::invalid_argument);
    MarketParams lonely = make_params(2, 0.0, Mode::Cournot);
    lonely.m = 1;
    CHECK_THROWS_AS(cournot_equilibrium({0.1}, lonely), std::invalid_argument);
    CHECK_THROWS_AS(cournot_equilibrium({0.1, 1.0}, make_params(2, 0.5, Mode::Cournot)),
                    std::invalid_argument);
    CHECK_THROWS_AS(cournot_equilibrium({0.1}, make_params(2, 0.5, Mode::Cournot)),
                    std::invalid_argument);
}

TEST_CASE("prices implying negative demand are rejected with the firm index") {
    const MarketParams params = make_params(2, 0.8, Mode::Bertrand);
    CHECK_THROWS_AS(demand_from_prices({1.5, 0.1}, params), InfeasibleDemand);
}

TEST_CASE("two-firm welfare matches the symmetric closed form") {
    const double gamma = 0.6;
    const double c = 0.2;
    const double budget = 3.0;
    const double denom = (4.0 - gamma * gamma) * (4.0 - gamma * gamma);
    const double closed =
        (12.0 - 8.0 * gamma - gamma * gamma + gamma * gamma * gamma) *
            (1.0 - c) * (1.0 - c) / denom +
        budget;
    CHECK(duopoly_welfare({c, c}, gamma, budget) ==
          doctest::Approx(closed).epsilon(1e-13));
    // Same quantity through the component sum with equilibrium quantities.
    const EquilibriumOutcome eq =
        cournot_equilibrium({c, c}, make_params(2, gamma, Mode::Cournot));
    const double q1 = eq.quantities[0];
    const double q2 = eq.quantities[1];
    const double direct = q1 + q2 -
                          (q1 * q1 + q2 * q2 + 2.0 * gamma * q1 * q2) / 2.0 +
                          budget - c * q1 - c * q2;
    CHECK(duopoly_welfare({c, c}, gamma, budget) ==
          doctest::Approx(direct).epsilon(1e-13));
}
