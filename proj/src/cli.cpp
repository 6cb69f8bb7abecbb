#include "oligoshare/cli.hpp"

#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "oligoshare/coalition.hpp"
#include "oligoshare/data_impact.hpp"
#include "oligoshare/errors.hpp"
#include "oligoshare/experiment.hpp"
#include "oligoshare/market.hpp"
#include "oligoshare/sharing.hpp"

namespace oligoshare::cli {

namespace {

using nlohmann::ordered_json;

// Bad files, malformed JSON, missing required pieces: exit code 2.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

void emit_error(std::ostream& err, const std::string& type,
                const std::string& message) {
    ordered_json diagnostic;
    diagnostic["error"] = type;
    diagnostic["message"] = message;
    err << diagnostic.dump() << "\n";
}

market::Mode parse_mode(const std::string& text) {
    if (text == "cournot") return market::Mode::Cournot;
    if (text == "bertrand") return market::Mode::Bertrand;
    throw UsageError("mode must be cournot or bertrand, got: " + text);
}

std::vector<data_impact::FirmProfile> load_profiles(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw UsageError("cannot open profiles file: " + path);
    nlohmann::json doc;
    try {
        file >> doc;
    } catch (const std::exception& e) {
        throw UsageError("profiles file is not valid JSON: " +
                         std::string(e.what()));
    }
    if (!doc.is_array() || doc.empty()) {
        throw UsageError("profiles file must hold a non-empty JSON array");
    }
    std::vector<data_impact::FirmProfile> profiles;
    profiles.reserve(doc.size());
    for (const auto& item : doc) {
        if (!item.is_object()) {
            throw UsageError("each profile must be a JSON object");
        }
        for (const auto& [key, value] : item.items()) {
            (void)value;
            if (key != "id" && key != "n" && key != "a" && key != "b" &&
                key != "beta" && key != "consent") {
                throw UsageError("unknown profile key: " + key);
            }
        }
        if (!item.contains("id") || !item.contains("n")) {
            throw UsageError("every profile requires 'id' and 'n'");
        }
        data_impact::FirmProfile profile;
        try {
            profile.id = item.at("id").get<int>();
            profile.n = item.at("n").get<long long>();
            profile.cost_model.a = item.value("a", 0.1);
            profile.cost_model.b = item.value("b", 0.1);
            profile.cost_model.beta = item.value("beta", 0.9);
            profile.consent_fraction = item.value("consent", 1.0);
        } catch (const nlohmann::json::exception& e) {
            throw UsageError("profile field has the wrong type: " +
                             std::string(e.what()));
        }
        profiles.push_back(profile);
    }
    return profiles;
}

std::pair<data_impact::FirmProfile, data_impact::FirmProfile> load_two_profiles(
    const std::string& path) {
    const auto profiles = load_profiles(path);
    if (profiles.size() != 2) {
        throw UsageError("this command needs exactly 2 profiles, got " +
                         std::to_string(profiles.size()));
    }
    return {profiles[0], profiles[1]};
}

ordered_json outcome_to_json(const market::EquilibriumOutcome& outcome) {
    ordered_json json;
    json["quantities"] = outcome.quantities;
    json["prices"] = outcome.prices;
    json["profits"] = outcome.profits;
    json["feasible"] = outcome.feasible;
    json["boundary"] = outcome.boundary;
    return json;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
    CLI::App app{
        "Market equilibria, data-sharing decisions, bargaining, coalition "
        "games, and Monte Carlo sweeps for competing firms"};
    app.require_subcommand(1);

    std::function<int()> action;

    // --- equilibrium ---------------------------------------------------
    std::vector<double> eq_costs;
    double eq_gamma = 0.0;
    std::string eq_mode = "cournot";
    double eq_budget = 0.0;
    auto* eq_cmd = app.add_subcommand(
        "equilibrium", "Static market equilibrium from marginal costs");
    eq_cmd->add_option("--costs", eq_costs,
                       "Comma-separated marginal costs, one per firm")
        ->required()
        ->delimiter(',');
    eq_cmd->add_option("--gamma", eq_gamma, "Product substitutability")
        ->required();
    eq_cmd->add_option("--mode", eq_mode, "cournot or bertrand")
        ->check(CLI::IsMember({"cournot", "bertrand"}));
    auto* eq_budget_opt = eq_cmd->add_option(
        "--budget", eq_budget, "Consumer budget (default: firm count + 1)");
    eq_cmd->callback([&]() {
        action = [&]() {
            market::MarketParams params;
            params.m = static_cast<int>(eq_costs.size());
            params.gamma = eq_gamma;
            params.mode = parse_mode(eq_mode);
            params.budget = eq_budget_opt->count() > 0
                                ? eq_budget
                                : static_cast<double>(params.m) + 1.0;
            const market::EquilibriumOutcome outcome =
                params.mode == market::Mode::Cournot
                    ? market::cournot_equilibrium(eq_costs, params)
                    : market::bertrand_equilibrium(eq_costs, params);
            out << outcome_to_json(outcome).dump(2) << "\n";
            return 0;
        };
    });

    // --- share2 ---------------------------------------------------------
    std::string sh_profiles;
    double sh_gamma = 0.0;
    std::string sh_mode = "cournot";
    auto* sh_cmd = app.add_subcommand(
        "share2", "Mutual full-sharing decision for two firms");
    sh_cmd->add_option("--profiles", sh_profiles,
                       "JSON file with exactly two firm profiles")
        ->required();
    sh_cmd->add_option("--gamma", sh_gamma, "Product substitutability")
        ->required();
    sh_cmd->add_option("--mode", sh_mode, "cournot or bertrand")
        ->check(CLI::IsMember({"cournot", "bertrand"}));
    sh_cmd->callback([&]() {
        action = [&]() {
            const auto [p1, p2] = load_two_profiles(sh_profiles);
            const sharing::ShareDecision decision =
                sharing::full_share_decision(p1, p2, sh_gamma,
                                             parse_mode(sh_mode));
            ordered_json json;
            json["firm1_gains"] = decision.firm1_gains;
            json["firm2_gains"] = decision.firm2_gains;
            json["both_share"] = decision.both_share;
            json["profit_deltas"] = {decision.profit_deltas.first,
                                     decision.profit_deltas.second};
            out << json.dump(2) << "\n";
            return 0;
        };
    });

    // --- threshold -------------------------------------------------------
    double th_gamma = 0.0;
    double th_beta = 0.0;
    std::string th_mode = "cournot";
    auto* th_cmd = app.add_subcommand(
        "threshold", "Break-even rival data share for profitable pooling");
    th_cmd->add_option("--gamma", th_gamma, "Product substitutability")
        ->required();
    th_cmd->add_option("--beta", th_beta, "Learning-curve exponent")
        ->required();
    th_cmd->add_option("--mode", th_mode, "cournot or bertrand")
        ->check(CLI::IsMember({"cournot", "bertrand"}));
    th_cmd->callback([&]() {
        action = [&]() {
            const double root =
                sharing::share_threshold(th_gamma, th_beta, parse_mode(th_mode));
            char buffer[32];
            std::snprintf(buffer, sizeof(buffer), "%.6f", root);
            out << buffer << "\n";
            return 0;
        };
    });

    // --- bargain ----------------------------------------------------------
    std::string bg_profiles;
    double bg_gamma = 0.0;
    bool bg_exact = false;
    bool bg_closed = false;
    auto* bg_cmd = app.add_subcommand(
        "bargain", "Nash-bargained partial-sharing fractions for two firms");
    bg_cmd->add_option("--profiles", bg_profiles,
                       "JSON file with exactly two firm profiles")
        ->required();
    bg_cmd->add_option("--gamma", bg_gamma, "Product substitutability")
        ->required();
    auto* bg_exact_flag =
        bg_cmd->add_flag("--exact", bg_exact, "Numeric Nash-product maximizer");
    auto* bg_closed_flag = bg_cmd->add_flag(
        "--closed-form", bg_closed, "Size-ratio closed form (default)");
    bg_exact_flag->excludes(bg_closed_flag);
    bg_closed_flag->excludes(bg_exact_flag);
    bg_cmd->callback([&]() {
        action = [&]() {
            const auto [p1, p2] = load_two_profiles(bg_profiles);
            const sharing::BargainingOutcome outcome =
                bg_exact ? sharing::bargaining_exact(p1, p2, bg_gamma)
                         : sharing::bargaining_closed_form(p1, p2, bg_gamma);
            ordered_json json;
            json["lambda1"] = outcome.lambda1;
            json["lambda2"] = outcome.lambda2;
            json["nash_product"] = outcome.nash_product;
            json["method"] = outcome.method == sharing::BargainMethod::ClosedForm
                                 ? "closed_form"
                                 : "exact_numeric";
            json["clamped"] = outcome.clamped;
            json["at_disagreement"] = outcome.at_disagreement;
            out << json.dump(2) << "\n";
            return 0;
        };
    });

    // --- coalition ---------------------------------------------------------
    std::string co_profiles;
    double co_gamma = 0.0;
    std::string co_partition;
    bool co_universal = false;
    auto* co_cmd = app.add_subcommand(
        "coalition", "m-firm coalition formation and treaty analysis");
    co_cmd->require_subcommand(1);

    auto* co_solve = co_cmd->add_subcommand(
        "solve", "Equilibrium partition of the sequential proposal game");
    co_solve
        ->add_option("--profiles", co_profiles, "JSON file with firm profiles")
        ->required();
    co_solve->add_option("--gamma", co_gamma, "Product substitutability")
        ->required();
    co_solve->callback([&]() {
        action = [&]() {
            const auto profiles = load_profiles(co_profiles);
            const coalition::GameResult result =
                coalition::sequential_game_solve(profiles, co_gamma);
            ordered_json json;
            json["partition"] = result.partition;
            ordered_json profits = ordered_json::array();
            for (std::size_t i = 0; i < profiles.size(); ++i) {
                ordered_json entry;
                entry["id"] = profiles[i].id;
                entry["profit"] = result.profits[i];
                profits.push_back(std::move(entry));
            }
            json["profits"] = std::move(profits);
            json["solver"] = "backward_induction";
            out << json.dump(2) << "\n";
            return 0;
        };
    });

    auto* co_core = co_cmd->add_subcommand(
        "core-check", "Test a partition for alpha-core membership");
    co_core
        ->add_option("--profiles", co_profiles, "JSON file with firm profiles")
        ->required();
    co_core->add_option("--gamma", co_gamma, "Product substitutability")
        ->required();
    co_core
        ->add_option("--partition", co_partition,
                     "Partition as JSON, e.g. '[[1,2],[3]]'")
        ->required();
    co_core->callback([&]() {
        action = [&]() {
            const auto profiles = load_profiles(co_profiles);
            coalition::Partition partition;
            try {
                partition = nlohmann::json::parse(co_partition)
                                .get<coalition::Partition>();
            } catch (const nlohmann::json::exception& e) {
                throw UsageError("--partition is not a JSON list of id lists: " +
                                 std::string(e.what()));
            }
            ordered_json json;
            json["in_core"] =
                coalition::alpha_core_membership(partition, profiles, co_gamma);
            out << json.dump(2) << "\n";
            return 0;
        };
    });

    auto* co_treaty = co_cmd->add_subcommand(
        "treaty", "Opt-in treaty equilibria (or --universal consensus check)");
    co_treaty
        ->add_option("--profiles", co_profiles, "JSON file with firm profiles")
        ->required();
    co_treaty->add_option("--gamma", co_gamma, "Product substitutability")
        ->required();
    co_treaty->add_flag("--universal", co_universal,
                        "Check the unanimous everyone-shares treaty instead");
    co_treaty->callback([&]() {
        action = [&]() {
            const auto profiles = load_profiles(co_profiles);
            ordered_json json;
            if (co_universal) {
                json["is_equilibrium"] =
                    coalition::universal_treaty_is_equilibrium(profiles,
                                                               co_gamma);
            } else {
                json["equilibria"] =
                    coalition::treaty_equilibria(profiles, co_gamma);
            }
            out << json.dump(2) << "\n";
            return 0;
        };
    });

    // --- sweep --------------------------------------------------------------
    std::string sw_config;
    std::uint64_t sw_seed = 0;
    std::string sw_output;
    std::string sw_format;
    auto* sw_cmd = app.add_subcommand(
        "sweep", "Monte Carlo sweep over (gamma, beta) grid cells");
    sw_cmd->add_option("--config", sw_config, "Key = value config file")
        ->required();
    auto* sw_seed_opt = sw_cmd->add_option(
        "--seed", sw_seed, "Random seed (required unless the config sets one)");
    auto* sw_output_opt = sw_cmd->add_option(
        "--output", sw_output, "Output file (default: config value or stdout)");
    auto* sw_format_opt =
        sw_cmd->add_option("--format", sw_format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
    sw_cmd->callback([&]() {
        action = [&]() {
            experiment::ParsedConfig parsed;
            try {
                parsed = experiment::load_config(sw_config);
            } catch (const std::exception& e) {
                throw UsageError(e.what());
            }
            if (sw_seed_opt->count() > 0) {
                parsed.config.seed = sw_seed;
            } else if (!parsed.has_seed) {
                throw UsageError(
                    "sweep needs --seed because the config file sets none");
            }
            if (sw_output_opt->count() > 0) parsed.config.output = sw_output;
            if (sw_format_opt->count() > 0) {
                parsed.config.format =
                    sw_format == "json" ? experiment::ExperimentConfig::Format::Json
                                        : experiment::ExperimentConfig::Format::Csv;
            }
            const std::vector<experiment::SweepRow> rows =
                experiment::run_sweep(parsed.config);
            const std::string text =
                parsed.config.format == experiment::ExperimentConfig::Format::Csv
                    ? experiment::to_csv(rows)
                    : experiment::to_json(rows);
            if (parsed.config.output.empty()) {
                out << text;
            } else {
                std::ofstream file(parsed.config.output,
                                   std::ios::binary | std::ios::trunc);
                if (!file) {
                    throw UsageError("cannot open output file: " +
                                     parsed.config.output);
                }
                file << text;
                if (!file) {
                    throw UsageError("failed writing output file: " +
                                     parsed.config.output);
                }
            }
            return 0;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::ParseError& e) {
        emit_error(err, "usage", e.what());
        return 2;
    }

    if (!action) {
        emit_error(err, "usage", "no subcommand selected");
        return 2;
    }

    try {
        return action();
    } catch (const UsageError& e) {
        emit_error(err, "usage", e.what());
        return 2;
    } catch (const nlohmann::json::exception& e) {
        emit_error(err, "usage", e.what());
        return 2;
    } catch (const InfeasibleCosts& e) {
        emit_error(err, "infeasible_costs", e.what());
        return 1;
    } catch (const InfeasibleDemand& e) {
        emit_error(err, "infeasible_demand", e.what());
        return 1;
    } catch (const NoConvergence& e) {
        emit_error(err, "no_convergence", e.what());
        return 1;
    } catch (const SizeLimitExceeded& e) {
        emit_error(err, "size_limit_exceeded", e.what());
        return 1;
    } catch (const BetaMismatch& e) {
        emit_error(err, "beta_mismatch", e.what());
        return 1;
    } catch (const ZeroCost& e) {
        emit_error(err, "zero_cost", e.what());
        return 1;
    } catch (const std::domain_error& e) {
        emit_error(err, "domain_error", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        emit_error(err, "invalid_argument", e.what());
        return 1;
    } catch (const std::exception& e) {
        emit_error(err, "error", e.what());
        return 1;
    }
}

}  // namespace oligoshare::cli
