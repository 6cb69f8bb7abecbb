#pragma once

#include <vector>

#include "oligoshare/data_impact.hpp"
#include "oligoshare/market.hpp"

namespace oligoshare::coalition {

// Disjoint cover of the firm-id set. Canonical form (produced by every
// operation here): members ascending inside each block, blocks ordered by
// smallest member.
using Partition = std::vector<std::vector<int>>;

// Canonicalizes a block list in place-by-value and validates nothing.
Partition canonical_partition(Partition partition);

enum class GameSolver { BackwardInduction, BruteForce };

struct GameResult {
    Partition partition;           // canonical, over firm ids
    std::vector<double> profits;   // one per input profile, input order
    GameSolver solver = GameSolver::BackwardInduction;
};

// Equilibrium profits when each firm's expected cost is evaluated at its
// block's pooled dataset size (full sharing inside a block; consent fractions
// are a two-firm construct and do not enter coalition pooling). Quantity
// competition with budget m + 1. The partition must be a disjoint cover of
// the profile ids. Throws InfeasibleCosts when the induced cost vector has no
// interior equilibrium.
std::vector<double> partition_profits(
    const Partition& partition,
    const std::vector<data_impact::FirmProfile>& profiles, double gamma);

// Subgame-perfect outcome of the sequential proposal game: firms propose in
// decreasing data-size order (ties by id ascending); a proposer makes each
// distinct offer (a subset of active firms containing itself) at most once,
// in an order of its own optimal choosing; invitees accept or decline in
// decreasing-size order with perfect information; unanimous acceptance forms
// the block and removes it from play; proposing one's own singleton (or
// exhausting all offers) forms a singleton. Deterministic indifference rules:
// responders accept on ties; a proposer indifferent between options prefers
// an accepted offer over exiting over a doomed offer, and among equal-value
// accepted (or doomed) offers prefers the larger pooled size, then the
// lexicographically smallest member set. Declined invitees stay available
// for the proposer's later offers.
//
// Enforces m <= 8 (throws SizeLimitExceeded); every partition of the firms
// must admit an interior equilibrium (throws InfeasibleCosts otherwise), so
// profit comparisons are always well defined. Exact solving is practical for
// m <= 5; beyond that the offer-subset state space explodes combinatorially
// and run time may be prohibitive even though the cap admits it.
GameResult sequential_game_solve(
    const std::vector<data_impact::FirmProfile>& profiles, double gamma);

// Same game, solved by full game-tree expansion with no memoization — an
// independent oracle for sequential_game_solve. m <= 4.
GameResult brute_force_game_solve(
    const std::vector<data_impact::FirmProfile>& profiles, double gamma);

// True iff no nonempty subset S of firms blocks the partition, where S blocks
// when, for every counter-partition Q of the remaining firms, every member of
// S earns strictly more under Q ∪ {S} than under the given partition. m <= 6
// (Bell-number enumeration); every partition of the firms must admit an
// interior equilibrium.
bool alpha_core_membership(
    const Partition& partition,
    const std::vector<data_impact::FirmProfile>& profiles, double gamma);

// With firms sorted by decreasing size, consider the two-block prefix
// partitions {first i firms, rest} (i = m giving the grand coalition) and
// return the one maximizing the largest firm's profit (ties toward smaller
// i). The result always lies in the alpha-core.
Partition best_prefix_partition(
    const std::vector<data_impact::FirmProfile>& profiles, double gamma);

// Consensus treaty: everyone shares with everyone iff unanimously preferred
// to no sharing. Since grand-coalition profits are common to all firms and
// stand-alone profit is highest for the best-endowed firm, unanimity reduces
// to the largest firm strictly preferring the grand coalition over all
// singletons; decided here by direct profit comparison. Requires a common
// cost model across firms.
bool universal_treaty_is_equilibrium(
    const std::vector<data_impact::FirmProfile>& profiles, double gamma);

// Opt-in treaty: each firm simultaneously answers Y or N; the Y-answerers
// pool data among themselves (a one-member Y-set shares nothing) and
// N-answerers stand alone. Nash equilibria have threshold structure: the
// Y-set is a suffix of the decreasing-size order. Returns every suffix
// candidate (grand set down to the smallest firm alone) plus the empty set
// that survives full per-firm unilateral-deviation checks (weak preference
// to stay on ties), each as an ascending list of firm ids; the empty set
// always passes because a lone joiner changes nothing. With equal-size ties,
// outcome-equivalent non-suffix equilibria may exist and are not reported.
std::vector<std::vector<int>> treaty_equilibria(
    const std::vector<data_impact::FirmProfile>& profiles, double gamma);

}  // namespace oligoshare::coalition
