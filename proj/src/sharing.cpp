#include "oligoshare/sharing.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace oligoshare::sharing {

namespace {

using data_impact::CostModel;
using data_impact::FirmProfile;
using data_impact::expected_cost;

void require_common_model(const FirmProfile& p1, const FirmProfile& p2) {
    const CostModel &m1 = p1.cost_model, &m2 = p2.cost_model;
    if (m1.a != m2.a || m1.b != m2.b || m1.beta != m2.beta)
        throw std::invalid_argument(
            "firms must use a common cost model here; use asymmetric_readiness "
            "for independent models");
}

void require_duopoly_gamma(double gamma) {
    if (!(gamma > -1.0 && gamma < 1.0))
        throw std::invalid_argument("gamma must lie in (-1, 1) for two firms");
}

// Keeps every equilibrium-quantity numerator 2 - g - 2 c_i + g c_j positive
// for all sharing levels (costs range over [a, a + b]), which also makes the
// second factor of the profit-gain expression provably positive.
void require_interior_premium(const CostModel& m, double gamma) {
    if (!(2.0 * m.b < (1.0 - m.a) * (2.0 - gamma)))
        throw std::invalid_argument(
            "data premium b too large for interior duopoly equilibria");
}

struct GainParts {
    double sign_factor;  // cost-drop combination; carries the sign of the gain
    double scale;        // strictly positive under the interior-premium guard
};

GainParts gain_parts(int i, double lambda1, double lambda2,
                     const FirmProfile& p1, const FirmProfile& p2,
                     double gamma) {
    const FirmProfile& self = (i == 0) ? p1 : p2;
    const FirmProfile& rival = (i == 0) ? p2 : p1;
    const double lam_self = (i == 0) ? lambda1 : lambda2;
    const double lam_rival = (i == 0) ? lambda2 : lambda1;
    const double n_self = static_cast<double>(self.n);
    const double n_rival = static_cast<double>(rival.n);

    const double ci0 = expected_cost(n_self, self.cost_model);
    const double cj0 = expected_cost(n_rival, rival.cost_model);
    const double ci = expected_cost(n_self + lam_rival * n_rival, self.cost_model);
    const double cj = expected_cost(n_rival + lam_self * n_self, rival.cost_model);

    const double t1 = 2.0 * (ci0 - ci) - gamma * (cj0 - cj);
    const double t2 = 4.0 - 2.0 * gamma - 2.0 * ci0 + gamma * cj0 - 2.0 * ci +
                      gamma * cj;
    const double d = 4.0 - gamma * gamma;
    return {t1, t2 / (d * d)};
}

}  // namespace

ShareDecision full_share_decision(const FirmProfile& p1, const FirmProfile& p2,
                                  double gamma, market::Mode mode) {
    p1.validate();
    p2.validate();
    require_common_model(p1, p2);
    require_duopoly_gamma(gamma);

    const CostModel& model = p1.cost_model;
    const double n1 = static_cast<double>(p1.n);
    const double n2 = static_cast<double>(p2.n);
    const double n1_eff = n1 + p2.consent_fraction * n2;
    const double n2_eff = n2 + p1.consent_fraction * n1;

    const double drop1 = expected_cost(n1, model) - expected_cost(n1_eff, model);
    const double drop2 = expected_cost(n2, model) - expected_cost(n2_eff, model);
    const double w =
        (mode == market::Mode::Cournot) ? 2.0 : 2.0 - gamma * gamma;

    ShareDecision d;
    d.firm1_gains = w * drop1 >= gamma * drop2;
    d.firm2_gains = w * drop2 >= gamma * drop1;
    d.both_share = d.firm1_gains && d.firm2_gains;

    const market::MarketParams params{2, gamma, mode, 3.0};
    const market::CostVector ind{expected_cost(n1, model),
                                 expected_cost(n2, model)};
    const market::CostVector shared{expected_cost(n1_eff, model),
                                    expected_cost(n2_eff, model)};
    const auto eq = [&](const market::CostVector& c) {
        return mode == market::Mode::Cournot ? market::cournot_equilibrium(c, params)
                                             : market::bertrand_equilibrium(c, params);
    };
    const auto before = eq(ind);
    const auto after = eq(shared);
    d.profit_deltas = {after.profits[0] - before.profits[0],
                       after.profits[1] - before.profits[1]};

    const auto consistent = [](bool gains, double delta) {
        if (std::fabs(delta) <= market::kBoundaryTol) return true;  // tie zone
        return gains == (delta > 0.0);
    };
    if (!consistent(d.firm1_gains, d.profit_deltas.first) ||
        !consistent(d.firm2_gains, d.profit_deltas.second))
        throw std::logic_error(
            "sharing inequality disagrees with recomputed profit deltas");
    return d;
}

double threshold_function(double x, double gamma, double beta,
                          market::Mode mode) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("size share x must lie in [0, 1]");
    const double xb = std::pow(x, beta);
    const double yb = std::pow(1.0 - x, beta);
    if (mode == market::Mode::Cournot)
        return 2.0 * xb - gamma * yb - (2.0 - gamma) * xb * yb;
    return (2.0 - gamma - gamma * gamma) * xb * (1.0 - yb) - gamma * (yb - xb);
}

double share_threshold(double gamma, double beta, market::Mode mode) {
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw std::domain_error(
            "no break-even share exists outside gamma in (0, 1]; sharing is "
            "always mutually profitable for gamma <= 0");
    if (!(beta > 0.0 && beta <= 1.0))
        throw std::invalid_argument("beta must lie in (0, 1]");
    double lo = 0.0, hi = 1.0;  // f(0) = -gamma < 0 < f(1)
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (threshold_function(mid, gamma, beta, mode) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double profit_gain(int i, double lambda1, double lambda2,
                   const FirmProfile& p1, const FirmProfile& p2, double gamma) {
    if (i != 0 && i != 1) throw std::invalid_argument("firm index must be 0 or 1");
    if (!(lambda1 >= 0.0 && lambda1 <= 1.0 && lambda2 >= 0.0 && lambda2 <= 1.0))
        throw std::invalid_argument("sharing fractions must lie in [0, 1]");
    p1.validate();
    p2.validate();
    require_duopoly_gamma(gamma);
    const auto parts = gain_parts(i, lambda1, lambda2, p1, p2, gamma);
    return parts.sign_factor * parts.scale;
}

double closed_form_lambda1(long long n1, long long n2, double gamma,
                           double beta, bool* clamped) {
    if (clamped) *clamped = false;
    if (n2 < 1 || n1 < n2)
        throw std::invalid_argument("requires n1 >= n2 >= 1");
    if (!(beta > 0.0 && beta <= 1.0))
        throw std::invalid_argument("beta must lie in (0, 1]");
    if (!(gamma < 1.0))
        throw std::domain_error("gamma must be below 1");
    if (gamma <= 0.0) return 1.0;  // sharing helps both; full transfer

    const double N1 = static_cast<double>(n1);
    const double N2 = static_cast<double>(n2);
    const double gate_lhs = (4.0 + gamma * gamma) / std::pow(N1, beta);
    const double gate_rhs = 4.0 * gamma / std::pow(N2, beta) +
                            (2.0 - gamma) * (2.0 - gamma) /
                                std::pow(N1 + N2, beta);
    if (!(gate_lhs <= gate_rhs)) return 1.0;

    const double r = N2 / N1;
    const double inner =
        1.0 - (4.0 + gamma * gamma) / (4.0 * gamma) * std::pow(r, beta) *
                  (1.0 - std::pow(N1 / (N1 + N2), beta));
    if (!(inner > 0.0)) {
        if (clamped) *clamped = true;
        return 1.0;
    }
    const double lam = r * (std::pow(inner, -1.0 / beta) - 1.0);
    if (lam > 1.0) {
        if (clamped) *clamped = true;
        return 1.0;
    }
    return std::max(lam, 0.0);
}

double asymptotic_lambda1(long long n1, long long n2, double gamma,
                          double beta) {
    if (n2 < 1 || n1 < n2)
        throw std::invalid_argument("requires n1 >= n2 >= 1");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::domain_error("asymptotic form needs gamma in (0, 1)");
    const double r = static_cast<double>(n2) / static_cast<double>(n1);
    return (4.0 + gamma * gamma) / (4.0 * gamma) * std::pow(r, beta + 2.0);
}

BargainingOutcome bargaining_closed_form(const FirmProfile& p1,
                                         const FirmProfile& p2, double gamma) {
    p1.validate();
    p2.validate();
    require_common_model(p1, p2);
    require_duopoly_gamma(gamma);

    const bool swapped = p2.n > p1.n;
    const FirmProfile& big = swapped ? p2 : p1;
    const FirmProfile& small = swapped ? p1 : p2;

    BargainingOutcome out;
    out.method = BargainMethod::ClosedForm;
    bool clamped = false;
    double lam_big = closed_form_lambda1(big.n, small.n, gamma,
                                         big.cost_model.beta, &clamped);
    out.clamped = clamped;
    lam_big = std::min(lam_big, big.consent_fraction);
    const double lam_small = std::min(1.0, small.consent_fraction);

    out.lambda1 = swapped ? lam_small : lam_big;
    out.lambda2 = swapped ? lam_big : lam_small;
    out.nash_product = profit_gain(0, out.lambda1, out.lambda2, p1, p2, gamma) *
                       profit_gain(1, out.lambda1, out.lambda2, p1, p2, gamma);
    return out;
}

namespace {

// Sub-interval of [lo, hi] where the monotone function sgn is >= 0, or
// nullopt. Endpoint signs decide the direction; the edge is bisected.
template <typename F>
std::optional<std::pair<double, double>> nonnegative_interval(const F& sgn,
                                                              double lo,
                                                              double hi) {
    const double slo = sgn(lo), shi = sgn(hi);
    if (slo >= 0.0 && shi >= 0.0) return std::pair{lo, hi};
    if (slo < 0.0 && shi < 0.0) return std::nullopt;
    double a = lo, b = hi;
    if (slo < 0.0) {  // increasing: feasible above the root
        for (int k = 0; k < 100; ++k) {
            const double mid = 0.5 * (a + b);
            (sgn(mid) >= 0.0 ? b : a) = mid;
        }
        return std::pair{b, hi};
    }
    // decreasing: feasible below the root
    for (int k = 0; k < 100; ++k) {
        const double mid = 0.5 * (a + b);
        (sgn(mid) >= 0.0 ? a : b) = mid;
    }
    return std::pair{lo, a};
}

struct LineBest {
    double value = -1.0;  // Nash product; -1 marks "no feasible point"
    double t = 0.0;
};

}  // namespace

BargainingOutcome bargaining_exact(const FirmProfile& p1,
                                   const FirmProfile& p2, double gamma) {
    p1.validate();
    p2.validate();
    require_duopoly_gamma(gamma);
    require_interior_premium(p1.cost_model, gamma);
    require_interior_premium(p2.cost_model, gamma);

    const double cap1 = p1.consent_fraction;
    const double cap2 = p2.consent_fraction;

    const auto sign1 = [&](double l1, double l2) {
        return gain_parts(0, l1, l2, p1, p2, gamma).sign_factor;
    };
    const auto sign2 = [&](double l1, double l2) {
        return gain_parts(1, l1, l2, p1, p2, gamma).sign_factor;
    };
    const auto nash = [&](double l1, double l2) {
        const auto g1 = gain_parts(0, l1, l2, p1, p2, gamma);
        const auto g2 = gain_parts(1, l1, l2, p1, p2, gamma);
        const double v1 = g1.sign_factor * g1.scale;
        const double v2 = g2.sign_factor * g2.scale;
        if (v1 < 0.0 || v2 < 0.0) return -1.0;
        return v1 * v2;
    };

    // Maximize the Nash product along one coordinate, the other fixed. The
    // gain sign factors are monotone in each lambda, so the individually
    // rational segment is an interval found by bisection even when it is far
    // narrower than any sampling grid.
    const auto line_best = [&](int coord, double fixed) -> LineBest {
        const double cap = (coord == 0) ? cap1 : cap2;
        const auto at = [&](double t) {
            return (coord == 0) ? std::pair{t, fixed} : std::pair{fixed, t};
        };
        const auto s1 = [&](double t) {
            auto [l1, l2] = at(t);
            return sign1(l1, l2);
        };
        const auto s2 = [&](double t) {
            auto [l1, l2] = at(t);
            return sign2(l1, l2);
        };
        const auto iv1 = nonnegative_interval(s1, 0.0, cap);
        if (!iv1) return {};
        const auto iv2 = nonnegative_interval(s2, 0.0, cap);
        if (!iv2) return {};
        const double lo = std::max(iv1->first, iv2->first);
        const double hi = std::min(iv1->second, iv2->second);
        if (lo > hi) return {};
        const auto np = [&](double t) {
            auto [l1, l2] = at(t);
            return nash(l1, l2);
        };
        // coarse presample, then golden-section inside the best bracket
        constexpr int kSamples = 64;
        double bt = lo, bv = np(lo);
        for (int k = 1; k <= kSamples; ++k) {
            const double t = lo + (hi - lo) * k / kSamples;
            const double v = np(t);
            if (v > bv) {
                bv = v;
                bt = t;
            }
        }
        const double step = (hi - lo) / kSamples;
        double gl = std::max(lo, bt - step), gh = std::min(hi, bt + step);
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = gh - gr * (gh - gl), d = gl + gr * (gh - gl);
        double fc = np(c), fd = np(d);
        while (gh - gl > 1e-11) {
            if (fc >= fd) {
                gh = d;
                d = c;
                fd = fc;
                c = gh - gr * (gh - gl);
                fc = np(c);
            } else {
                gl = c;
                c = d;
                fc = fd;
                d = gl + gr * (gh - gl);
                fd = np(d);
            }
        }
        const double x = 0.5 * (gl + gh);
        const double vx = np(x);
        if (vx >= bv) return {vx, x};
        return {bv, bt};
    };

    BargainingOutcome out;
    out.method = BargainMethod::ExactNumeric;

    double best_np = 0.0, best_l1 = 0.0, best_l2 = 0.0;
    bool found = false;
    const auto consider = [&](double npv, double l1, double l2) {
        if (npv <= 0.0) return;
        if (!found || npv > best_np ||
            (npv == best_np && (l1 < best_l1 ||
                                (l1 == best_l1 && l2 < best_l2)))) {
            found = true;
            best_np = npv;
            best_l1 = l1;
            best_l2 = l2;
        }
    };

    constexpr int kLines = 200;  // 201 gridlines per axis
    for (int k = 0; k <= kLines; ++k) {
        const double l2 = cap2 * k / kLines;
        const auto r = line_best(0, l2);
        if (r.value > 0.0) consider(r.value, r.t, l2);
    }
    for (int k = 0; k <= kLines; ++k) {
        const double l1 = cap1 * k / kLines;
        const auto r = line_best(1, l1);
        if (r.value > 0.0) consider(r.value, l1, r.t);
    }

    if (!found) {
        out.at_disagreement = true;
        return out;
    }

    double l1 = best_l1, l2 = best_l2;
    for (int sweep = 0; sweep < 60; ++sweep) {
        const auto r1 = line_best(0, l2);
        const double n1v = (r1.value > 0.0) ? r1.t : l1;
        const auto r2 = line_best(1, n1v);
        const double n2v = (r2.value > 0.0) ? r2.t : l2;
        const bool done = std::fabs(n1v - l1) < 1e-9 && std::fabs(n2v - l2) < 1e-9;
        l1 = n1v;
        l2 = n2v;
        if (done) break;
    }

    out.lambda1 = l1;
    out.lambda2 = l2;
    out.nash_product = nash(l1, l2);
    if (out.nash_product < 0.0) {  // fell off the band by rounding; keep stage-A point
        out.lambda1 = best_l1;
        out.lambda2 = best_l2;
        out.nash_product = best_np;
    }
    return out;
}

}  // namespace oligoshare::sharing
