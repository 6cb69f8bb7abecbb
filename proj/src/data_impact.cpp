#include "oligoshare/data_impact.hpp"

#include <cmath>
#include <string>

namespace oligoshare::data_impact {

void CostModel::validate() const {
    if (!(a >= 0.0 && a < 1.0))
        throw std::invalid_argument("cost floor a must lie in [0, 1)");
    if (!(b > 0.0))
        throw std::invalid_argument("data premium b must be positive");
    if (!(beta > 0.0 && beta <= 1.0))
        throw std::invalid_argument("learning exponent beta must lie in (0, 1]");
}

bool CostModel::within_smallness_cap(double cap) const {
    return b / (1.0 - a) <= cap;
}

void FirmProfile::validate() const {
    cost_model.validate();
    if (n < 1) throw std::invalid_argument("firm needs at least one observation");
    if (!(consent_fraction >= 0.0 && consent_fraction <= 1.0))
        throw std::invalid_argument("consent fraction must lie in [0, 1]");
}

double expected_cost(double n, const CostModel& model) {
    model.validate();
    if (!(n >= 1.0))
        throw std::invalid_argument("dataset size must be at least 1");
    return model.a + model.b * std::pow(n, -model.beta);
}

double heterogeneous_shared_cost(double n_i, double n_other, double sigma2,
                                 const CostModel& model) {
    model.validate();
    if (model.beta != 1.0)
        throw BetaMismatch(model.beta,
                           "heterogeneous shared cost has a closed form only "
                           "for beta == 1");
    if (!(n_i >= 1.0) || !(n_other >= 1.0))
        throw std::invalid_argument("dataset sizes must be at least 1");
    if (!(sigma2 >= 0.0))
        throw std::invalid_argument("population variance must be nonnegative");
    return model.a + model.b * (2.0 * sigma2 * n_other + 1.0) /
                         (2.0 * sigma2 * n_i * n_other + n_i + n_other);
}

market::EquilibriumOutcome quadratic_cournot(const std::array<double, 2>& costs,
                                             double k) {
    for (double c : costs)
        if (!(c >= 0.0 && c < 1.0))
            throw std::invalid_argument("marginal costs must lie in [0, 1)");
    if (!(k >= 0.0))
        throw std::invalid_argument("quadratic cost slope k must be nonnegative");

    const double denom = (1.0 + k) * (3.0 + k);
    market::EquilibriumOutcome out;
    out.quantities.resize(2);
    for (int i = 0; i < 2; ++i) {
        const double qi =
            (1.0 + k + costs[1 - i] - (2.0 + k) * costs[i]) / denom;
        if (qi <= 0.0)
            throw InfeasibleCosts(i, "firm " + std::to_string(i) +
                                         " would shut down in the quadratic-cost "
                                         "duopoly");
        out.quantities[i] = qi;
    }
    const double p = 1.0 - out.quantities[0] - out.quantities[1];
    out.prices = {p, p};
    out.profits.resize(2);
    for (int i = 0; i < 2; ++i)
        out.profits[i] =
            0.5 * (2.0 + k) * out.quantities[i] * out.quantities[i];
    return out;
}

std::pair<bool, bool> quadratic_share_criterion(long long n1, long long n2,
                                                double k) {
    if (n1 < 1 || n2 < 1)
        throw std::invalid_argument("dataset sizes must be at least 1");
    if (!(k >= 0.0))
        throw std::invalid_argument("quadratic cost slope k must be nonnegative");
    const double pool = 1.0 / static_cast<double>(n1 + n2);
    const auto gains = [&](double ni, double nj) {
        return (2.0 + k) * (1.0 / ni - pool) > 1.0 / nj - 1.0 / ni;
    };
    return {gains(static_cast<double>(n1), static_cast<double>(n2)),
            gains(static_cast<double>(n2), static_cast<double>(n1))};
}

std::pair<double, double> multiplicative_profits(
    const std::array<double, 2>& costs, double alpha_b) {
    for (int i = 0; i < 2; ++i)
        if (!(costs[i] > 0.0))
            throw ZeroCost("multiplicative profit ratios need strictly "
                           "positive costs");
    if (!(alpha_b > 0.0))
        throw std::invalid_argument("alpha * B must be positive");
    const auto profit = [&](double ci, double cj) {
        const double r = 1.0 + ci / cj;
        return alpha_b / (r * r);
    };
    return {profit(costs[0], costs[1]), profit(costs[1], costs[0])};
}

std::pair<bool, bool> multiplicative_share_gains(
    const std::array<double, 2>& costs) {
    for (int i = 0; i < 2; ++i)
        if (!(costs[i] > 0.0))
            throw ZeroCost("multiplicative profit ratios need strictly "
                           "positive costs");
    // shared profit alpha_b/4 beats alpha_b/(1 + c_i/c_j)^2 iff c_i > c_j
    return {costs[0] > costs[1], costs[1] > costs[0]};
}

std::pair<double, double> asymmetric_readiness(const FirmProfile& p1,
                                               const FirmProfile& p2,
                                               double gamma) {
    p1.validate();
    p2.validate();
    // gamma = 1 (perfect substitutes) is admitted: the readiness values are
    // plain formulas, not equilibrium quantities.
    if (!(gamma > -1.0 && gamma <= 1.0))
        throw std::invalid_argument("gamma must lie in (-1, 1]");
    const double n1 = static_cast<double>(p1.n);
    const double n2 = static_cast<double>(p2.n);
    const double nsh = n1 + n2;
    const auto drop = [&](double n, const CostModel& m) {
        return std::pow(n, -m.beta) - std::pow(nsh, -m.beta);
    };
    const double f1 = 2.0 * p1.cost_model.b * drop(n1, p1.cost_model) -
                      gamma * p2.cost_model.b * drop(n2, p2.cost_model);
    const double f2 = 2.0 * p2.cost_model.b * drop(n2, p2.cost_model) -
                      gamma * p1.cost_model.b * drop(n1, p1.cost_model);
    return {f1, f2};
}

}  // namespace oligoshare::data_impact
