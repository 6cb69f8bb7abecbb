#pragma once

#include <stdexcept>
#include <string>

namespace oligoshare {

// Cost vector violates the interior-equilibrium condition for some firm:
// that firm's marginal cost is so far above its rivals' that its equilibrium
// quantity (or markup) would be negative.
struct InfeasibleCosts : std::runtime_error {
    int firm;
    InfeasibleCosts(int firm_, const std::string& what)
        : std::runtime_error(what), firm(firm_) {}
};

// Price vector maps to a negative demanded quantity for some firm.
struct InfeasibleDemand : std::runtime_error {
    int firm;
    InfeasibleDemand(int firm_, const std::string& what)
        : std::runtime_error(what), firm(firm_) {}
};

// Fixed-point iteration failed to reach the requested tolerance.
struct NoConvergence : std::runtime_error {
    long iterations;
    NoConvergence(long iterations_, const std::string& what)
        : std::runtime_error(what), iterations(iterations_) {}
};

// Combinatorial routine called with more firms than it supports.
struct SizeLimitExceeded : std::runtime_error {
    int m;
    int limit;
    SizeLimitExceeded(int m_, int limit_, const std::string& what)
        : std::runtime_error(what), m(m_), limit(limit_) {}
};

// Routine requires beta == 1 (closed form only exists there).
struct BetaMismatch : std::runtime_error {
    double beta;
    BetaMismatch(double beta_, const std::string& what)
        : std::runtime_error(what), beta(beta_) {}
};

// Multiplicative-impact profit ratios need strictly positive costs.
struct ZeroCost : std::runtime_error {
    explicit ZeroCost(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace oligoshare
