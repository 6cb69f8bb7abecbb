#include "oligoshare/coalition.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace oligoshare::coalition {
namespace {

using data_impact::CostModel;
using data_impact::FirmProfile;
using data_impact::expected_cost;

using Mask = std::uint32_t;  // firm set, one bit per firm (m <= 8)

int popcount(Mask x) { return std::popcount(x); }
int lowest_bit(Mask x) { return std::countr_zero(x); }
Mask bit(int i) { return Mask{1} << i; }

std::map<int, int> validate_profiles(const std::vector<FirmProfile>& profiles,
                                     double gamma) {
    if (profiles.size() < 2)
        throw std::invalid_argument("need at least two firm profiles");
    const int m = static_cast<int>(profiles.size());
    market::MarketParams{m, gamma, market::Mode::Cournot, m + 1.0}.validate();
    std::map<int, int> id_to_index;
    for (int i = 0; i < m; ++i) {
        profiles[i].validate();
        if (!id_to_index.emplace(profiles[i].id, i).second)
            throw std::invalid_argument("firm ids must be distinct");
    }
    return id_to_index;
}

// Input-order firm indices sorted by decreasing dataset size, ties by id.
std::vector<int> sorted_order(const std::vector<FirmProfile>& profiles) {
    std::vector<int> order(profiles.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (profiles[a].n != profiles[b].n) return profiles[a].n > profiles[b].n;
        return profiles[a].id < profiles[b].id;
    });
    return order;
}

// Visits every partition of {0..m-1} as a block-assignment vector
// (restricted-growth enumeration).
template <typename F>
void for_each_assignment(int m, F&& visit) {
    std::vector<int> assign(m, 0);
    auto rec = [&](auto&& self, int k, int max_used) -> void {
        if (k == m) {
            visit(assign);
            return;
        }
        for (int v = 0; v <= max_used + 1; ++v) {
            assign[k] = v;
            self(self, k + 1, std::max(max_used, v));
        }
    };
    rec(rec, 0, -1);
}

// Profits (input order) for a partition given as disjoint input-index masks.
// Profiles must already be validated.
std::vector<double> index_profits(const std::vector<FirmProfile>& profiles,
                                  const std::vector<Mask>& blocks,
                                  double gamma) {
    const int m = static_cast<int>(profiles.size());
    market::CostVector costs(m, 0.0);
    for (Mask b : blocks) {
        long long pooled = 0;
        for (int i = 0; i < m; ++i)
            if (b & bit(i)) pooled += profiles[i].n;
        for (int i = 0; i < m; ++i)
            if (b & bit(i))
                costs[i] = expected_cost(static_cast<double>(pooled),
                                         profiles[i].cost_model);
    }
    const market::MarketParams params{m, gamma, market::Mode::Cournot, m + 1.0};
    return market::cournot_equilibrium(costs, params).profits;
}

// Every partition of the firms must admit an interior quantity equilibrium;
// otherwise profit comparisons inside the games are undefined.
void ensure_all_partitions_feasible(const std::vector<FirmProfile>& profiles,
                                    double gamma) {
    const int m = static_cast<int>(profiles.size());
    for_each_assignment(m, [&](const std::vector<int>& assign) {
        std::array<long long, 8> pooled{};
        for (int i = 0; i < m; ++i) pooled[assign[i]] += profiles[i].n;
        std::array<double, 8> cost{};
        double total = 0.0;
        for (int i = 0; i < m; ++i) {
            cost[i] = expected_cost(static_cast<double>(pooled[assign[i]]),
                                    profiles[i].cost_model);
            total += cost[i];
        }
        for (int i = 0; i < m; ++i) {
            const double margin =
                (2.0 - gamma) * (1.0 - cost[i]) - gamma * (m * cost[i] - total);
            if (margin < -market::kBoundaryTol)
                throw InfeasibleCosts(
                    i,
                    "some partition of the firms has no interior equilibrium "
                    "(firm " +
                        std::to_string(profiles[i].id) + " would exit)");
        }
    });
}

// Shared state for both game solvers, indexed by sorted position
// (position 0 = largest firm).
struct GameContext {
    const std::vector<FirmProfile>* profiles = nullptr;  // input order
    std::vector<int> order;                              // position -> input index
    int m = 0;
    double gamma = 0.0;
    double coef = 0.0;               // 2 + gamma (m - 2)
    std::vector<long long> pooled;   // by position mask

    void init(const std::vector<FirmProfile>& p, double g) {
        profiles = &p;
        order = sorted_order(p);
        m = static_cast<int>(p.size());
        gamma = g;
        coef = 2.0 + g * (m - 2);
        pooled.assign(std::size_t{1} << m, 0);
        for (Mask s = 1; s < pooled.size(); ++s) {
            const int f = lowest_bit(s);
            pooled[s] = pooled[s & (s - 1)] + p[order[f]].n;
        }
    }

    double cost_of(int pos, Mask block) const {
        return expected_cost(static_cast<double>(pooled[block]),
                             (*profiles)[order[pos]].cost_model);
    }

    // Profit-order surrogate for the firms in `active` under a complete block
    // cover of `active`: the equilibrium-quantity numerator of firm i is
    // (2 - gamma) + gamma * (costs of coalitions already out of play)
    // + score_i, so within one decision node (fixed out-of-play blocks) profit
    // comparisons reduce to score comparisons. Rival costs are accumulated in
    // ascending value order so both solvers produce bit-identical ties.
    std::vector<double> scores(const std::vector<Mask>& blocks,
                               Mask active) const {
        std::array<double, 8> cost{};
        for (Mask b : blocks)
            for (Mask r = b; r;) {
                const int f = lowest_bit(r);
                r &= r - 1;
                cost[f] = cost_of(f, b);
            }
        std::vector<double> out(m, 0.0);
        std::array<double, 8> others{};
        for (Mask r = active; r;) {
            const int i = lowest_bit(r);
            r &= r - 1;
            int k = 0;
            for (Mask t = active; t;) {
                const int j = lowest_bit(t);
                t &= t - 1;
                if (j != i) others[k++] = cost[j];
            }
            std::sort(others.begin(), others.begin() + k);
            double rivals = 0.0;
            for (int t = 0; t < k; ++t) rivals += others[t];
            out[i] = -coef * cost[i] + gamma * rivals;
        }
        return out;
    }
};

struct Offer {
    Mask mask = 0;
    long long pooled = 0;
    std::vector<int> members;  // ascending positions
};

// All offers a proposer at position p can make within `active` (subsets
// containing p with at least two members), in canonical order: larger pooled
// size first, ties by lexicographically smallest member list.
std::vector<Offer> canonical_offers(const GameContext& ctx, Mask active,
                                    int p) {
    std::vector<Offer> offers;
    for (Mask s = active; s; s = (s - 1) & active) {
        if (!(s & bit(p)) || popcount(s) < 2) continue;
        Offer o;
        o.mask = s;
        o.pooled = ctx.pooled[s];
        for (Mask r = s; r;) {
            o.members.push_back(lowest_bit(r));
            r &= r - 1;
        }
        offers.push_back(std::move(o));
    }
    std::sort(offers.begin(), offers.end(), [](const Offer& a, const Offer& b) {
        if (a.pooled != b.pooled) return a.pooled > b.pooled;
        return a.members < b.members;
    });
    return offers;
}

std::vector<Mask> compose(Mask first, std::vector<Mask> rest) {
    rest.push_back(first);
    std::sort(rest.begin(), rest.end(),
              [](Mask a, Mask b) { return lowest_bit(a) < lowest_bit(b); });
    return rest;
}

using Avail = unsigned __int128;  // subset of a proposer's offer list

struct SequentialSolver {
    GameContext ctx;
    std::map<Mask, std::vector<Mask>> memo;  // active set -> final blocks

    const std::vector<Mask>& solve(Mask active) {
        auto it = memo.find(active);
        if (it != memo.end()) return it->second;
        std::vector<Mask> result;
        if (active != 0) {
            if (popcount(active) == 1)
                result = {active};
            else
                result = turn(active);
        }
        return memo.emplace(active, std::move(result)).first->second;
    }

    std::vector<Mask> turn(Mask active) {
        const int p = lowest_bit(active);
        const std::vector<Offer> offers = canonical_offers(ctx, active, p);
        const int K = static_cast<int>(offers.size());

        const std::vector<Mask> exit_blocks =
            compose(bit(p), solve(active ^ bit(p)));
        std::vector<std::vector<Mask>> formed(K);
        for (int k = 0; k < K; ++k)
            formed[k] = compose(offers[k].mask, solve(active ^ offers[k].mask));

        std::map<std::vector<Mask>, std::vector<double>> score_cache;
        auto scores_of =
            [&](const std::vector<Mask>& b) -> const std::vector<double>& {
            auto [it, inserted] = score_cache.try_emplace(b);
            if (inserted) it->second = ctx.scores(b, active);
            return it->second;
        };

        std::map<Avail, std::vector<Mask>> wmemo;
        auto walk = [&](auto&& self, Avail avail) -> const std::vector<Mask>& {
            auto hit = wmemo.find(avail);
            if (hit != wmemo.end()) return hit->second;

            // start from the always-available exit option (rank 1)
            std::vector<Mask> best_blocks = exit_blocks;
            double best_value = scores_of(exit_blocks)[p];
            int best_rank = 1, best_index = -1;

            for (int k = 0; k < K; ++k) {
                if (!(avail & (Avail{1} << k))) continue;
                const std::vector<Mask>& rejected =
                    self(self, avail & ~(Avail{1} << k));
                const std::vector<double>& rsc = scores_of(rejected);
                const std::vector<double>& fsc = scores_of(formed[k]);
                bool accepted = true;
                for (int pos : offers[k].members) {
                    if (pos == p) continue;  // responders accept on ties
                    if (fsc[pos] < rsc[pos]) {
                        accepted = false;
                        break;
                    }
                }
                const std::vector<Mask>& outcome =
                    accepted ? formed[k] : rejected;
                const double value = (accepted ? fsc : rsc)[p];
                const int rank = accepted ? 0 : 2;
                if (value > best_value ||
                    (value == best_value &&
                     (rank < best_rank ||
                      (rank == best_rank && k < best_index)))) {
                    best_blocks = outcome;
                    best_value = value;
                    best_rank = rank;
                    best_index = k;
                }
            }
            return wmemo.emplace(avail, std::move(best_blocks)).first->second;
        };

        const Avail full = (K >= 1) ? ((Avail{1} << K) - 1) : Avail{0};
        return walk(walk, full);
    }
};

struct BruteForceSolver {
    GameContext ctx;

    // No memoization anywhere: every subgame is re-expanded from scratch.
    std::vector<Mask> solve(Mask active) {
        if (active == 0) return {};
        if (popcount(active) == 1) return {active};
        const int p = lowest_bit(active);
        const std::vector<Offer> offers = canonical_offers(ctx, active, p);
        std::vector<int> all(offers.size());
        std::iota(all.begin(), all.end(), 0);
        return walk(active, p, offers, all);
    }

    std::vector<Mask> respond(Mask active, const std::vector<int>& responders,
                              std::size_t at, const std::vector<Mask>& formed,
                              const std::vector<Mask>& rejected) {
        if (at == responders.size()) return formed;
        const std::vector<Mask> upon_accept =
            respond(active, responders, at + 1, formed, rejected);
        const int i = responders[at];
        const double accept_value = ctx.scores(upon_accept, active)[i];
        const double reject_value = ctx.scores(rejected, active)[i];
        return accept_value >= reject_value ? upon_accept : rejected;
    }

    std::vector<Mask> walk(Mask active, int p, const std::vector<Offer>& offers,
                           const std::vector<int>& avail) {
        std::vector<Mask> best_blocks = compose(bit(p), solve(active ^ bit(p)));
        double best_value = ctx.scores(best_blocks, active)[p];
        int best_rank = 1, best_index = -1;

        for (int k : avail) {
            std::vector<int> remaining;
            for (int j : avail)
                if (j != k) remaining.push_back(j);
            const std::vector<Mask> rejected = walk(active, p, offers, remaining);
            const std::vector<Mask> formed =
                compose(offers[k].mask, solve(active ^ offers[k].mask));
            std::vector<int> responders;
            for (int pos : offers[k].members)
                if (pos != p) responders.push_back(pos);
            const std::vector<Mask> outcome =
                respond(active, responders, 0, formed, rejected);
            const bool accepted = outcome == formed;
            const double value = ctx.scores(outcome, active)[p];
            const int rank = accepted ? 0 : 2;
            if (value > best_value ||
                (value == best_value &&
                 (rank < best_rank || (rank == best_rank && k < best_index)))) {
                best_blocks = outcome;
                best_value = value;
                best_rank = rank;
                best_index = k;
            }
        }
        return best_blocks;
    }
};

Partition blocks_to_partition(const GameContext& ctx,
                              const std::vector<Mask>& blocks) {
    Partition out;
    for (Mask b : blocks) {
        std::vector<int> ids;
        for (Mask r = b; r;) {
            ids.push_back((*ctx.profiles)[ctx.order[lowest_bit(r)]].id);
            r &= r - 1;
        }
        out.push_back(std::move(ids));
    }
    return canonical_partition(std::move(out));
}

// Validates the partition against the id set and returns input-index masks.
std::vector<Mask> partition_to_masks(const Partition& partition,
                                     const std::map<int, int>& id_to_index) {
    std::vector<Mask> blocks;
    Mask seen = 0;
    for (const auto& block : partition) {
        if (block.empty())
            throw std::invalid_argument("partition blocks must be nonempty");
        Mask b = 0;
        for (int id : block) {
            const auto it = id_to_index.find(id);
            if (it == id_to_index.end())
                throw std::invalid_argument("partition names an unknown firm id");
            const Mask f = bit(it->second);
            if (seen & f)
                throw std::invalid_argument(
                    "partition repeats a firm id across blocks");
            seen |= f;
            b |= f;
        }
        blocks.push_back(b);
    }
    if (popcount(seen) != static_cast<int>(id_to_index.size()))
        throw std::invalid_argument("partition must cover every firm");
    return blocks;
}

void require_common_model(const std::vector<FirmProfile>& profiles) {
    const CostModel& first = profiles.front().cost_model;
    for (const FirmProfile& p : profiles) {
        const CostModel& m = p.cost_model;
        if (m.a != first.a || m.b != first.b || m.beta != first.beta)
            throw std::invalid_argument(
                "firms must use a common cost model here");
    }
}

}  // namespace

Partition canonical_partition(Partition partition) {
    for (auto& block : partition) std::sort(block.begin(), block.end());
    std::sort(partition.begin(), partition.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) {
                  return a.front() < b.front();
              });
    return partition;
}

std::vector<double> partition_profits(
    const Partition& partition,
    const std::vector<data_impact::FirmProfile>& profiles, double gamma) {
    const auto id_to_index = validate_profiles(profiles, gamma);
    const auto blocks = partition_to_masks(partition, id_to_index);
    return index_profits(profiles, blocks, gamma);
}

GameResult sequential_game_solve(
    const std::vector<data_impact::FirmProfile>& profiles, double gamma) {
    validate_profiles(profiles, gamma);
    if (profiles.size() > 8)
        throw SizeLimitExceeded(static_cast<int>(profiles.size()), 8,
                                "sequential game supports at most 8 firms");
    ensure_all_partitions_feasible(profiles, gamma);
    SequentialSolver solver;
    solver.ctx.init(profiles, gamma);
    const Mask full = static_cast<Mask>((1u << profiles.size()) - 1);
    GameResult result;
    result.partition = blocks_to_partition(solver.ctx, solver.solve(full));
    result.profits = partition_profits(result.partition, profiles, gamma);
    result.solver = GameSolver::BackwardInduction;
    return result;
}

GameResult brute_force_game_solve(
    const std::vector<data_impact::FirmProfile>& profiles, double gamma) {
    validate_profiles(profiles, gamma);
    if (profiles.size() > 4)
        throw SizeLimitExceeded(static_cast<int>(profiles.size()), 4,
                                "brute-force game supports at most 4 firms");
    ensure_all_partitions_feasible(profiles, gamma);
    BruteForceSolver solver;
    solver.ctx.init(profiles, gamma);
    const Mask full = static_cast<Mask>((1u << profiles.size()) - 1);
    GameResult result;
    result.partition = blocks_to_partition(solver.ctx, solver.solve(full));
    result.profits = partition_profits(result.partition, profiles, gamma);
    result.solver = GameSolver::BruteForce;
    return result;
}

bool alpha_core_membership(
    const Partition& partition,
    const std::vector<data_impact::FirmProfile>& profiles, double gamma) {
    const auto id_to_index = validate_profiles(profiles, gamma);
    const int m = static_cast<int>(profiles.size());
    if (m > 6)
        throw SizeLimitExceeded(m, 6,
                                "alpha-core check supports at most 6 firms");
    const auto base_blocks = partition_to_masks(partition, id_to_index);
    ensure_all_partitions_feasible(profiles, gamma);
    const std::vector<double> base = index_profits(profiles, base_blocks, gamma);

    const Mask everyone = static_cast<Mask>((1u << m) - 1);
    for (Mask s = 1; s <= everyone; ++s) {
        std::vector<int> outside;
        for (int i = 0; i < m; ++i)
            if (!(s & bit(i))) outside.push_back(i);

        bool blocks_everywhere = true;
        for_each_assignment(static_cast<int>(outside.size()),
                            [&](const std::vector<int>& assign) {
            if (!blocks_everywhere) return;
            std::array<Mask, 8> counter{};
            int nblocks = 0;
            for (std::size_t j = 0; j < outside.size(); ++j) {
                counter[assign[j]] |= bit(outside[j]);
                nblocks = std::max(nblocks, assign[j] + 1);
            }
            std::vector<Mask> candidate(counter.begin(),
                                        counter.begin() + nblocks);
            candidate.push_back(s);
            const auto profits = index_profits(profiles, candidate, gamma);
            for (int i = 0; i < m; ++i) {
                if ((s & bit(i)) && profits[i] <= base[i]) {
                    blocks_everywhere = false;
                    break;
                }
            }
        });
        if (blocks_everywhere) return false;
    }
    return true;
}

Partition best_prefix_partition(
    const std::vector<data_impact::FirmProfile>& profiles, double gamma) {
    validate_profiles(profiles, gamma);
    const auto order = sorted_order(profiles);
    const int m = static_cast<int>(profiles.size());
    const int leader = order[0];

    double best_profit = 0.0;
    int best_i = 0;
    std::vector<Mask> best_blocks;
    for (int i = 1; i <= m; ++i) {
        Mask prefix = 0;
        for (int k = 0; k < i; ++k) prefix |= bit(order[k]);
        std::vector<Mask> blocks{prefix};
        const Mask rest = static_cast<Mask>((1u << m) - 1) & ~prefix;
        if (rest) blocks.push_back(rest);
        const auto profits = index_profits(profiles, blocks, gamma);
        if (best_i == 0 || profits[leader] > best_profit) {
            best_profit = profits[leader];
            best_i = i;
            best_blocks = blocks;
        }
    }

    Partition out;
    for (Mask b : best_blocks) {
        std::vector<int> ids;
        for (int i = 0; i < m; ++i)
            if (b & bit(i)) ids.push_back(profiles[i].id);
        out.push_back(std::move(ids));
    }
    return canonical_partition(std::move(out));
}

bool universal_treaty_is_equilibrium(
    const std::vector<data_impact::FirmProfile>& profiles, double gamma) {
    validate_profiles(profiles, gamma);
    require_common_model(profiles);
    const int m = static_cast<int>(profiles.size());
    const int leader = sorted_order(profiles)[0];

    const Mask everyone = static_cast<Mask>((1u << m) - 1);
    std::vector<Mask> singles;
    for (int i = 0; i < m; ++i) singles.push_back(bit(i));
    const auto grand = index_profits(profiles, {everyone}, gamma);
    const auto alone = index_profits(profiles, singles, gamma);
    return grand[leader] > alone[leader];
}

std::vector<std::vector<int>> treaty_equilibria(
    const std::vector<data_impact::FirmProfile>& profiles, double gamma) {
    validate_profiles(profiles, gamma);
    const auto order = sorted_order(profiles);
    const int m = static_cast<int>(profiles.size());

    std::map<Mask, std::vector<double>> profit_cache;
    const auto outcome_profits = [&](Mask yes) -> const std::vector<double>& {
        const Mask effective = (popcount(yes) >= 2) ? yes : Mask{0};
        auto it = profit_cache.find(effective);
        if (it != profit_cache.end()) return it->second;
        std::vector<Mask> blocks;
        if (effective) blocks.push_back(effective);
        for (int i = 0; i < m; ++i)
            if (!(effective & bit(i))) blocks.push_back(bit(i));
        return profit_cache
            .emplace(effective, index_profits(profiles, blocks, gamma))
            .first->second;
    };

    const auto is_equilibrium = [&](Mask yes) {
        const std::vector<double>& stay = outcome_profits(yes);
        for (int i = 0; i < m; ++i) {
            const Mask flipped = yes ^ bit(i);
            const std::vector<double>& deviate = outcome_profits(flipped);
            if (deviate[i] > stay[i]) return false;
        }
        return true;
    };

    std::vector<std::vector<int>> result;
    const auto append = [&](Mask yes) {
        std::vector<int> ids;
        for (int i = 0; i < m; ++i)
            if (yes & bit(i)) ids.push_back(profiles[i].id);
        std::sort(ids.begin(), ids.end());
        result.push_back(std::move(ids));
    };

    for (int i = 0; i < m; ++i) {  // suffix sets, largest first
        Mask yes = 0;
        for (int k = i; k < m; ++k) yes |= bit(order[k]);
        if (is_equilibrium(yes)) append(yes);
    }
    if (is_equilibrium(0)) append(0);  // provably always passes
    return result;
}

}  // namespace oligoshare::coalition
