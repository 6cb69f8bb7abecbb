#include "oligoshare/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace oligoshare::market {

namespace {

void check_costs(const CostVector& costs, const MarketParams& params) {
    if (static_cast<int>(costs.size()) != params.m)
        throw std::invalid_argument("cost vector size must equal m");
    for (double c : costs)
        if (!(c >= 0.0 && c < 1.0))
            throw std::invalid_argument("marginal costs must lie in [0, 1)");
}

double sum(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace

void MarketParams::validate() const {
    if (m < 2) throw std::invalid_argument("market needs at least two firms");
    const double lo = -1.0 / (m - 1);
    if (!(gamma > lo && gamma < 1.0))
        throw std::invalid_argument("gamma must lie in (-1/(m-1), 1)");
    if (!(budget > static_cast<double>(m)))
        throw std::invalid_argument("consumer budget must exceed m");
}

std::vector<double> inverse_demand(const std::vector<double>& quantities,
                                   const MarketParams& params) {
    params.validate();
    if (static_cast<int>(quantities.size()) != params.m)
        throw std::invalid_argument("quantity vector size must equal m");
    for (double q : quantities)
        if (!(q >= -kBoundaryTol))
            throw std::invalid_argument("quantities must be nonnegative");
    const double total = sum(quantities);
    std::vector<double> prices(params.m);
    for (int i = 0; i < params.m; ++i)
        prices[i] = 1.0 - quantities[i] - params.gamma * (total - quantities[i]);
    return prices;
}

std::vector<double> demand_from_prices(const std::vector<double>& prices,
                                       const MarketParams& params) {
    params.validate();
    const int m = params.m;
    const double g = params.gamma;
    if (static_cast<int>(prices.size()) != m)
        throw std::invalid_argument("price vector size must equal m");
    const double denom = (1.0 - g) * (1.0 + g * (m - 1));
    const double total = sum(prices);
    std::vector<double> q(m);
    for (int i = 0; i < m; ++i) {
        const double num =
            1.0 - g - (1.0 + g * (m - 2)) * prices[i] + g * (total - prices[i]);
        double qi = num / denom;
        if (qi < -kBoundaryTol)
            throw InfeasibleDemand(i, "prices imply a negative quantity for firm " +
                                          std::to_string(i));
        q[i] = std::max(qi, 0.0);
    }
    return q;
}

bool check_demand_feasibility(const std::vector<double>& prices,
                              const MarketParams& params) {
    params.validate();
    const int m = params.m;
    const double g = params.gamma;
    if (static_cast<int>(prices.size()) != m)
        throw std::invalid_argument("price vector size must equal m");
    const double total = sum(prices);
    for (int i = 0; i < m; ++i) {
        // sum_{j != i}(p_j - p_i) = total - m * p_i
        const double margin =
            (1.0 - g) * (1.0 - prices[i]) - g * (total - m * prices[i]);
        if (margin < -kBoundaryTol) return false;
    }
    std::vector<double> q;
    try {
        q = demand_from_prices(prices, params);
    } catch (const InfeasibleDemand&) {
        return false;
    }
    double spend = 0.0;
    for (int i = 0; i < m; ++i) spend += q[i] * prices[i];
    return spend <= params.budget + kBoundaryTol;
}

EquilibriumOutcome cournot_equilibrium(const CostVector& costs,
                                       const MarketParams& params) {
    params.validate();
    check_costs(costs, params);
    const int m = params.m;
    const double g = params.gamma;
    const double total = sum(costs);

    EquilibriumOutcome out;
    for (int i = 0; i < m; ++i) {
        // sum_{j != i}(c_i - c_j) = m * c_i - total
        const double margin =
            (2.0 - g) * (1.0 - costs[i]) - g * (m * costs[i] - total);
        if (margin < -kBoundaryTol)
            throw InfeasibleCosts(i, "firm " + std::to_string(i) +
                                         " would shut down at the quantity "
                                         "equilibrium");
        if (margin <= kBoundaryTol) out.boundary = true;
    }

    const double denom = (2.0 - g) * (2.0 + (m - 1) * g);
    out.quantities.resize(m);
    for (int i = 0; i < m; ++i) {
        const double num = 2.0 - g - (2.0 + g * (m - 2)) * costs[i] +
                           g * (total - costs[i]);
        out.quantities[i] = std::max(num / denom, 0.0);
    }
    out.prices = inverse_demand(out.quantities, params);
    out.profits.resize(m);
    for (int i = 0; i < m; ++i)
        out.profits[i] = out.quantities[i] * out.quantities[i];
    return out;
}

BertrandCoefficients bertrand_coefficients(const MarketParams& params) {
    params.validate();
    const double m = params.m;
    const double g = params.gamma;
    return BertrandCoefficients{
        2.0 + g * (2.0 * m - 5.0) - g * g * (2.0 * m - 3.0),
        2.0 + 3.0 * g * (m - 2.0) + g * g * (m * m - 4.0 * m + 4.0),
        g + g * g * (m - 2.0),
        4.0 + 6.0 * g * (m - 2.0) + g * g * (2.0 * m * m - 9.0 * m + 9.0)};
}

EquilibriumOutcome bertrand_equilibrium(const CostVector& costs,
                                        const MarketParams& params) {
    params.validate();
    check_costs(costs, params);
    const int m = params.m;
    const auto [d1, d2, d3, d4] = bertrand_coefficients(params);
    const double total = sum(costs);

    EquilibriumOutcome out;
    for (int i = 0; i < m; ++i) {
        const double margin = d1 * (1.0 - costs[i]) - d3 * (m * costs[i] - total);
        if (margin < -kBoundaryTol)
            throw InfeasibleCosts(i, "firm " + std::to_string(i) +
                                         " would price below cost at the price "
                                         "equilibrium");
        if (margin <= kBoundaryTol) out.boundary = true;
    }

    out.prices.resize(m);
    for (int i = 0; i < m; ++i)
        out.prices[i] = (d1 + d2 * costs[i] + d3 * (total - costs[i])) / d4;
    out.quantities = demand_from_prices(out.prices, params);
    out.profits.resize(m);
    for (int i = 0; i < m; ++i)
        out.profits[i] = (out.prices[i] - costs[i]) * out.quantities[i];
    return out;
}

EquilibriumOutcome equilibrium_oracle(const CostVector& costs,
                                      const MarketParams& params,
                                      const OracleOptions& opts) {
    params.validate();
    check_costs(costs, params);
    const int m = params.m;
    const double g = params.gamma;
    const double d = opts.damping;

    std::vector<double> x(m, 0.0), next(m);
    long iter = 0;
    for (;; ++iter) {
        if (iter >= opts.max_iterations)
            throw NoConvergence(iter, "best-response iteration did not reach "
                                      "tolerance");
        const double total = sum(x);
        double diff = 0.0;
        for (int i = 0; i < m; ++i) {
            double br;
            if (params.mode == Mode::Cournot) {
                br = 0.5 * (1.0 - costs[i] - g * (total - x[i]));
            } else {
                const double k = 1.0 + g * (m - 2);
                br = (1.0 - g + k * costs[i] + g * (total - x[i])) / (2.0 * k);
            }
            next[i] = (1.0 - d) * x[i] + d * br;
            diff = std::max(diff, std::fabs(next[i] - x[i]));
        }
        x.swap(next);
        if (diff <= opts.tolerance) break;
    }

    EquilibriumOutcome out;
    if (params.mode == Mode::Cournot) {
        out.quantities = x;
        for (double& q : out.quantities) q = std::max(q, 0.0);
        out.prices = inverse_demand(out.quantities, params);
    } else {
        out.prices = x;
        out.quantities = demand_from_prices(out.prices, params);
    }
    out.profits.resize(m);
    for (int i = 0; i < m; ++i) {
        out.profits[i] = (out.prices[i] - costs[i]) * out.quantities[i];
        if (out.quantities[i] <= kBoundaryTol) out.boundary = true;
    }
    return out;
}

double duopoly_welfare(const CostVector& costs, double gamma, double budget) {
    MarketParams params{2, gamma, Mode::Cournot, budget};
    const auto eq = cournot_equilibrium(costs, params);
    const double q1 = eq.quantities[0], q2 = eq.quantities[1];
    return q1 + q2 - 0.5 * (q1 * q1 + q2 * q2 + 2.0 * gamma * q1 * q2) +
           budget - costs[0] * q1 - costs[1] * q2;
}

}  // namespace oligoshare::market
