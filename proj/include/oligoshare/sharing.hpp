#pragma once

#include <utility>

#include "oligoshare/data_impact.hpp"
#include "oligoshare/market.hpp"

namespace oligoshare::sharing {

struct ShareDecision {
    bool firm1_gains = false;
    bool firm2_gains = false;
    bool both_share = false;  // firm1_gains && firm2_gains
    // Equilibrium profit change of each firm when both pool their
    // (consent-weighted) data, recomputed through the market equilibria.
    std::pair<double, double> profit_deltas{0.0, 0.0};
};

// Full mutual sharing decision for two firms with a common cost model.
// Firm i compares its equilibrium profit before and after pooling; with
// monotone equilibrium profits this reduces to the cost-drop inequality
//   w [c(n_i) - c(n_i + x_{-i} n_{-i})] >= gamma [c(n_{-i}) - c(n_{-i} + x_i n_i)]
// with w = 2 under quantity competition and w = 2 - gamma^2 under price
// competition, where x_j is firm j's consent fraction. Exact indifference
// counts as sharing. The inequality decision is cross-checked against the
// profit deltas; disagreement beyond rounding raises std::logic_error.
ShareDecision full_share_decision(const data_impact::FirmProfile& p1,
                                  const data_impact::FirmProfile& p2,
                                  double gamma, market::Mode mode);

// Break-even size-share function underlying the sharing decision: with
// x = n_{-i} / (n_1 + n_2) the rival's share of the pooled data, firm i
// gains from full sharing iff f(x) > 0 where
//   quantity:  f(x) = 2 x^b - g (1-x)^b - (2-g) x^b (1-x)^b
//   price:     f(x) = (2-g-g^2) x^b (1 - (1-x)^b) - g ((1-x)^b - x^b).
double threshold_function(double x, double gamma, double beta,
                          market::Mode mode);

// Unique root x_t in (0, 1) of the threshold function: firm i gains iff its
// rival contributes more than x_t of the pooled data. Defined for
// gamma in (0, 1] (throws std::domain_error otherwise; for gamma <= 0 sharing
// is always profitable) and beta in (0, 1]. Bisection to 1e-12. gamma = 1
// (perfect substitutes) is admitted here even though interior market
// equilibria require gamma < 1: the threshold function itself is well defined
// and has its classical root there.
double share_threshold(double gamma, double beta, market::Mode mode);

enum class BargainMethod { ClosedForm, ExactNumeric };

struct BargainingOutcome {
    // Fraction of its own data each INPUT firm hands to the other.
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double nash_product = 0.0;
    BargainMethod method = BargainMethod::ClosedForm;
    bool clamped = false;         // closed form exceeded 1 before clamping
    bool at_disagreement = false; // no individually rational gain was found
};

// Exact equilibrium profit gain of firm `i` (0 or 1) at partial-sharing
// fractions (lambda1, lambda2) relative to no sharing, at the quantity
// equilibrium; firm j's effective dataset is n_j + lambda_{-j} n_{-j}.
double profit_gain(int i, double lambda1, double lambda2,
                   const data_impact::FirmProfile& p1,
                   const data_impact::FirmProfile& p2, double gamma);

// Small-premium closed form for the larger firm's bargained share when the
// smaller firm hands over everything (lambda_small = 1). Requires n1 >= n2;
// defined for gamma in (0, 1) (returns 1 for gamma <= 0). Values above 1 are
// reported as 1 (see BargainingOutcome::clamped on the wrapper).
double closed_form_lambda1(long long n1, long long n2, double gamma,
                           double beta, bool* clamped = nullptr);

// Large-size-gap asymptotic of closed_form_lambda1:
//   (4 + gamma^2) / (4 gamma) * (n2/n1)^(beta + 2).
double asymptotic_lambda1(long long n1, long long n2, double gamma,
                          double beta);

// Nash bargaining split via the closed form; inputs are reordered internally
// so the larger firm takes the lambda-tilde role and results are mapped back
// to input order. Consent fractions cap the returned lambdas.
BargainingOutcome bargaining_closed_form(const data_impact::FirmProfile& p1,
                                         const data_impact::FirmProfile& p2,
                                         double gamma);

// Numerical maximizer of the Nash product
//   max (profit gain of firm 1) * (profit gain of firm 2)
// over lambda in [0, consent1] x [0, consent2] subject to both gains >= 0.
// Grid scan over 201 lines per axis with, on every line, the individually
// rational interval bracketed exactly by bisection on each (monotone) gain
// sign, then golden-section refinement and coordinate descent to 1e-8.
// If no individually rational point exists, returns (0, 0) with
// at_disagreement set.
BargainingOutcome bargaining_exact(const data_impact::FirmProfile& p1,
                                   const data_impact::FirmProfile& p2,
                                   double gamma);

}  // namespace oligoshare::sharing
