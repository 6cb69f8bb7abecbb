#pragma once

#include <array>
#include <utility>

#include "oligoshare/errors.hpp"
#include "oligoshare/market.hpp"

namespace oligoshare::data_impact {

// Expected marginal cost of a firm whose predictor was trained on n
// observations: c(n) = a + b * n^(-beta). `a` is the irreducible cost floor,
// `b` the data-starved premium, `beta` the learning-curve exponent.
struct CostModel {
    double a = 0.1;
    double b = 0.1;
    double beta = 0.9;

    void validate() const;  // a in [0,1), b > 0, beta in (0,1]

    // Interior-equilibrium guard: cost spread b relative to headroom 1 - a.
    bool within_smallness_cap(double cap = 0.2) const;
};

struct FirmProfile {
    int id = 0;
    long long n = 1;  // owned observations, >= 1
    CostModel cost_model{};
    // Fraction of the firm's customers who opt in to sharing; scales the
    // portion of this firm's data a partner can see.
    double consent_fraction = 1.0;

    void validate() const;
};

// c(n) for a real-valued effective dataset size n >= 1 (consent-weighted
// pooled sizes are fractional in general).
double expected_cost(double n, const CostModel& model);

// Firm i's expected cost when two firms with heterogeneous customer
// populations pool data; sigma2 is the across-population parameter variance.
// Requires model.beta == 1 (throws BetaMismatch otherwise):
//   a + b (2 sigma2 n_other + 1) / (2 sigma2 n_i n_other + n_i + n_other).
// sigma2 = 0 collapses to a + b/(n_i + n_other); sigma2 -> infinity leaves
// only the firm's own data: a + b/n_i.
double heterogeneous_shared_cost(double n_i, double n_other, double sigma2,
                                 const CostModel& model);

// Duopoly quantity equilibrium with perfect substitutes (gamma = 1) and
// quadratic production costs C_i(q) = c_i q + k q^2 / 2:
//   q_i = (1 + k + c_{-i} - (2 + k) c_i) / ((1 + k)(3 + k)),
//   profit_i = (2 + k)/2 * q_i^2,  p = 1 - q_1 - q_2.
// Throws InfeasibleCosts if either equilibrium quantity is nonpositive.
market::EquilibriumOutcome quadratic_cournot(const std::array<double, 2>& costs,
                                             double k);

// Per-firm full-sharing screen in the quadratic-cost duopoly (beta = 1 model,
// (a, b) cancel), evaluated exactly as displayed:
//   (2 + k)(1/n_i - 1/(n1 + n2)) > 1/n_{-i} - 1/n_i.
// Caveat: the exact equilibrium comparison (via quadratic_cournot profits)
// has 1/(n1 + n2) in place of the final 1/n_i, so for size ratios
// small/large strictly between 1/sqrt(3+k) and 1/sqrt(2+k) this screen
// reports a gain for the larger firm that the profit comparison rejects;
// the two agree everywhere else.
std::pair<bool, bool> quadratic_share_criterion(long long n1, long long n2,
                                                double k);

// Profits when data quality enters demand multiplicatively instead of through
// cost: profit_i = alpha_b / (1 + c_i / c_{-i})^2 with alpha_b = alpha * B > 0.
// Throws ZeroCost unless both costs are strictly positive.
std::pair<double, double> multiplicative_profits(
    const std::array<double, 2>& costs, double alpha_b);

// Companion predicate for the multiplicative model: after full sharing both
// cost ratios become 1 and each firm earns alpha_b / 4, so firm i gains iff
// its pre-sharing cost exceeds its rival's (the better-endowed firm loses).
std::pair<bool, bool> multiplicative_share_gains(
    const std::array<double, 2>& costs);

// Sharing-readiness values for two firms with independent cost models
// (a_i, b_i, beta_i); firm i gains from full mutual sharing iff f_i > 0:
//   f_i = 2 b_i (n_i^-beta_i - n_sh^-beta_i)
//         - gamma b_{-i} (n_{-i}^-beta_{-i} - n_sh^-beta_{-i}),
// with n_sh = n1 + n2.
std::pair<double, double> asymmetric_readiness(const FirmProfile& p1,
                                               const FirmProfile& p2,
                                               double gamma);

}  // namespace oligoshare::data_impact
