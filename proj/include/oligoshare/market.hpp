#pragma once

#include <vector>

#include "oligoshare/errors.hpp"

namespace oligoshare::market {

// Comparison tolerance for boundary feasibility: constraints holding with
// equality (within this tolerance) are reported feasible with the boundary
// flag set instead of being rejected.
inline constexpr double kBoundaryTol = 1e-12;

enum class Mode { Cournot, Bertrand };

// Linear demand market from a quasi-linear quadratic-utility consumer:
//   p_i = 1 - q_i - gamma * sum_{j != i} q_j.
// gamma in (-1/(m-1), 1) spans complements to near-perfect substitutes.
// The consumer budget must exceed m so that the demand side never binds
// at equilibrium (every p_i, q_i lies in [0, 1]).
struct MarketParams {
    int m = 2;
    double gamma = 0.0;
    Mode mode = Mode::Cournot;
    double budget = 3.0;

    void validate() const;
};

// One marginal cost per firm, each in [0, 1).
using CostVector = std::vector<double>;

struct EquilibriumOutcome {
    std::vector<double> quantities;
    std::vector<double> prices;
    std::vector<double> profits;
    bool feasible = true;   // interior conditions hold up to kBoundaryTol
    bool boundary = false;  // some condition binds with equality (within tol)
};

// p_i = 1 - q_i - gamma * sum_{j != i} q_j. Quantities must be >= 0.
std::vector<double> inverse_demand(const std::vector<double>& quantities,
                                   const MarketParams& params);

// Inverts the price system:
//   q_i = (1 - gamma - (1 + gamma(m-2)) p_i + gamma sum_{j != i} p_j)
//         / ((1 - gamma)(1 + gamma(m-1))).
// Throws InfeasibleDemand if any q_i < -kBoundaryTol; values in
// [-kBoundaryTol, 0) are clamped to exactly 0.
std::vector<double> demand_from_prices(const std::vector<double>& prices,
                                       const MarketParams& params);

// True iff every firm's demanded quantity is nonnegative,
//   (1 - gamma)(1 - p_i) >= gamma * sum_{j != i} (p_j - p_i),
// and the implied expenditure sum q_i p_i stays within the budget.
// Boundary cases (q_i == 0) count as feasible.
bool check_demand_feasibility(const std::vector<double>& prices,
                              const MarketParams& params);

// Quantity-competition Nash equilibrium (closed form):
//   q_i = (2 - gamma - (2 + gamma(m-2)) c_i + gamma sum_{j != i} c_j)
//         / ((2 - gamma)(2 + (m-1) gamma)),     profit_i = q_i^2.
// Requires, for every i: (2 - gamma)(1 - c_i) >= gamma sum_{j != i}(c_i - c_j)
// (else InfeasibleCosts naming the violating firm).
EquilibriumOutcome cournot_equilibrium(const CostVector& costs,
                                       const MarketParams& params);

struct BertrandCoefficients {
    double d1, d2, d3, d4;
};

// Coefficients of the price-competition equilibrium
//   p_i = (d1 + d2 c_i + d3 sum_{j != i} c_j) / d4 with
//   d1 = 2 + gamma(2m-5) - gamma^2(2m-3)
//   d2 = 2 + 3 gamma(m-2) + gamma^2(m^2 - 4m + 4)
//   d3 = gamma + gamma^2(m-2)
//   d4 = 4 + 6 gamma(m-2) + gamma^2(2m^2 - 9m + 9).
BertrandCoefficients bertrand_coefficients(const MarketParams& params);

// Price-competition Nash equilibrium. Feasibility requires, for every i,
//   d1 (1 - c_i) >= d3 sum_{j != i} (c_i - c_j)
// (equivalent to a nonnegative equilibrium markup). Profits are computed
// directly as (p_i - c_i) q_i with q from the demand system.
EquilibriumOutcome bertrand_equilibrium(const CostVector& costs,
                                        const MarketParams& params);

struct OracleOptions {
    double damping = 0.5;
    long max_iterations = 100000;
    double tolerance = 1e-12;  // sup-norm stopping rule on the action vector
};

// Damped simultaneous best-response iteration on the exact first-order
// conditions (mode chosen by params.mode). Independent of the closed forms;
// used to cross-check them. Throws NoConvergence if the iteration cap is hit.
EquilibriumOutcome equilibrium_oracle(const CostVector& costs,
                                      const MarketParams& params,
                                      const OracleOptions& opts = {});

// Total welfare (consumer utility + profits) at the two-firm quantity
// equilibrium:
//   W = q1 + q2 - (q1^2 + q2^2 + 2 gamma q1 q2)/2 + budget - c1 q1 - c2 q2.
double duopoly_welfare(const CostVector& costs, double gamma, double budget);

}  // namespace oligoshare::market
