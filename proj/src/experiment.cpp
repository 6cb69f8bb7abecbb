#include "oligoshare/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "oligoshare/data_impact.hpp"
#include "oligoshare/errors.hpp"
#include "oligoshare/market.hpp"

namespace oligoshare::experiment {

namespace {

constexpr int kMaxAttempts = 1000;

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.9g", value);
    return buffer;
}

std::string trim(const std::string& text) {
    std::size_t first = 0;
    std::size_t last = text.size();
    while (first < last && std::isspace(static_cast<unsigned char>(text[first]))) ++first;
    while (last > first && std::isspace(static_cast<unsigned char>(text[last - 1]))) --last;
    return text.substr(first, last - first);
}

std::string strip_quotes(const std::string& text) {
    if (text.size() >= 2) {
        const char front = text.front();
        const char back = text.back();
        if ((front == '"' && back == '"') || (front == '\'' && back == '\'')) {
            return text.substr(1, text.size() - 2);
        }
    }
    return text;
}

double parse_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "' has a non-numeric value: " + text);
    }
}

long long parse_integer(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const long long value = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "' has a non-integer value: " + text);
    }
}

std::uint64_t parse_seed(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const unsigned long long value = std::stoull(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return static_cast<std::uint64_t>(value);
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key +
                                 "' has a non-integer value: " + text);
    }
}

std::vector<double> parse_grid(const std::string& key, std::string text) {
    text = trim(text);
    if (text.size() >= 2 && text.front() == '[' && text.back() == ']') {
        text = trim(text.substr(1, text.size() - 2));
    }
    if (text.empty()) {
        throw std::runtime_error("config key '" + key + "' has an empty value");
    }
    std::vector<double> values;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        values.push_back(parse_double(key, trim(item)));
    }
    return values;
}

struct TrialOutcome {
    double value = 0.0;
    long long resamples = 0;
    std::exception_ptr error;
};

TrialOutcome run_trial(const ExperimentConfig& config, double gamma, double beta,
                       long long trial) {
    TrialOutcome outcome;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        rng::Stream stream = rng::Stream(config.seed)
                                 .child(static_cast<std::uint64_t>(trial))
                                 .child(static_cast<std::uint64_t>(attempt));
        const std::vector<long long> sizes =
            sample_sizes(config.m, config.mu, config.sigma, stream);
        std::vector<data_impact::FirmProfile> profiles(sizes.size());
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            profiles[i].id = static_cast<int>(i) + 1;
            profiles[i].n = sizes[i];
            profiles[i].cost_model = {config.cost_a, config.cost_b, beta};
            profiles[i].consent_fraction = 1.0;
        }
        try {
            const coalition::GameResult result =
                coalition::sequential_game_solve(profiles, gamma);
            outcome.value = avg_coalition_size(result.partition);
            outcome.resamples = attempt;
            return outcome;
        } catch (const InfeasibleCosts&) {
            continue;  // redraw the market
        } catch (...) {
            outcome.error = std::current_exception();
            return outcome;
        }
    }
    outcome.error = std::make_exception_ptr(NoConvergence(
        kMaxAttempts, "sampled market stayed infeasible after " +
                          std::to_string(kMaxAttempts) + " redraws"));
    return outcome;
}

SweepRow summarize_cell(const ExperimentConfig& config, double gamma, double beta,
                        const std::vector<TrialOutcome>& outcomes) {
    SweepRow row;
    row.gamma = gamma;
    row.beta = beta;
    row.m = config.m;
    row.mu = config.mu;
    row.sigma = config.sigma;
    row.trials = config.trials;
    row.seed = config.seed;
    for (const TrialOutcome& outcome : outcomes) {
        row.resamples += outcome.resamples;
    }
    const double first = outcomes.front().value;
    bool all_equal = true;
    for (const TrialOutcome& outcome : outcomes) {
        if (outcome.value != first) {
            all_equal = false;
            break;
        }
    }
    if (all_equal) {
        row.mean_avg_coalition_size = first;
        row.std_error = 0.0;
        return row;
    }
    double sum = 0.0;
    for (const TrialOutcome& outcome : outcomes) sum += outcome.value;
    const double mean = sum / static_cast<double>(outcomes.size());
    double squared = 0.0;
    for (const TrialOutcome& outcome : outcomes) {
        const double delta = outcome.value - mean;
        squared += delta * delta;
    }
    const double variance = squared / static_cast<double>(outcomes.size() - 1);
    row.mean_avg_coalition_size = mean;
    row.std_error = std::sqrt(variance / static_cast<double>(outcomes.size()));
    return row;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (m < 2 || m > 8) {
        throw std::invalid_argument("m must be between 2 and 8");
    }
    if (gamma_grid.empty()) throw std::invalid_argument("gamma_grid is empty");
    if (beta_grid.empty()) throw std::invalid_argument("beta_grid is empty");
    for (const double gamma : gamma_grid) {
        market::MarketParams params;
        params.m = m;
        params.gamma = gamma;
        params.mode = market::Mode::Cournot;
        params.budget = static_cast<double>(m) + 1.0;
        params.validate();
    }
    for (const double beta : beta_grid) {
        data_impact::CostModel model{cost_a, cost_b, beta};
        model.validate();
    }
    if (!std::isfinite(mu)) throw std::invalid_argument("mu must be finite");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("sigma must be a finite non-negative number");
    }
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
}

std::vector<long long> sample_sizes(int m, double mu, double sigma,
                                    rng::Stream& stream) {
    std::vector<long long> sizes(static_cast<std::size_t>(m));
    for (auto& size : sizes) {
        const double draw = mu + sigma * stream.next_normal();
        size = std::max<long long>(1, std::llround(draw));
    }
    return sizes;
}

double avg_coalition_size(const coalition::Partition& partition) {
    if (partition.empty()) {
        throw std::invalid_argument("partition has no blocks");
    }
    std::size_t firms = 0;
    for (const auto& block : partition) firms += block.size();
    return static_cast<double>(firms) / static_cast<double>(partition.size());
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config) {
    config.validate();
    std::vector<SweepRow> rows;
    rows.reserve(config.gamma_grid.size() * config.beta_grid.size());
    const int workers = std::min<long long>(worker_count(), config.trials);
    for (const double gamma : config.gamma_grid) {
        for (const double beta : config.beta_grid) {
            std::vector<TrialOutcome> outcomes(
                static_cast<std::size_t>(config.trials));
            std::atomic<long long> next{0};
            auto work = [&]() {
                for (;;) {
                    const long long trial = next.fetch_add(1);
                    if (trial >= config.trials) break;
                    outcomes[static_cast<std::size_t>(trial)] =
                        run_trial(config, gamma, beta, trial);
                }
            };
            if (workers <= 1) {
                work();
            } else {
                std::vector<std::thread> pool;
                pool.reserve(static_cast<std::size_t>(workers));
                for (int w = 0; w < workers; ++w) pool.emplace_back(work);
                for (auto& thread : pool) thread.join();
            }
            for (const TrialOutcome& outcome : outcomes) {
                if (outcome.error) std::rethrow_exception(outcome.error);
            }
            rows.push_back(summarize_cell(config, gamma, beta, outcomes));
        }
    }
    return rows;
}

std::string to_csv(const std::vector<SweepRow>& rows) {
    std::string text =
        "gamma,beta,m,mu,sigma,trials,mean_avg_coalition_size,std_error,seed,"
        "resamples\n";
    for (const SweepRow& row : rows) {
        text += format_double(row.gamma);
        text += ',';
        text += format_double(row.beta);
        text += ',';
        text += std::to_string(row.m);
        text += ',';
        text += format_double(row.mu);
        text += ',';
        text += format_double(row.sigma);
        text += ',';
        text += std::to_string(row.trials);
        text += ',';
        text += format_double(row.mean_avg_coalition_size);
        text += ',';
        text += format_double(row.std_error);
        text += ',';
        text += std::to_string(row.seed);
        text += ',';
        text += std::to_string(row.resamples);
        text += '\n';
    }
    return text;
}

std::string to_json(const std::vector<SweepRow>& rows) {
    nlohmann::ordered_json array = nlohmann::ordered_json::array();
    for (const SweepRow& row : rows) {
        nlohmann::ordered_json item;
        item["gamma"] = row.gamma;
        item["beta"] = row.beta;
        item["m"] = row.m;
        item["mu"] = row.mu;
        item["sigma"] = row.sigma;
        item["trials"] = row.trials;
        item["mean_avg_coalition_size"] = row.mean_avg_coalition_size;
        item["std_error"] = row.std_error;
        item["seed"] = row.seed;
        item["resamples"] = row.resamples;
        array.push_back(std::move(item));
    }
    return array.dump(2) + "\n";
}

ParsedConfig load_config(const std::string& path) {
    std::ifstream file(path);
    if (!file) {
        throw std::runtime_error("cannot open config file: " + path);
    }
    ParsedConfig parsed;
    std::string line;
    int line_number = 0;
    while (std::getline(file, line)) {
        ++line_number;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t equals = line.find('=');
        if (equals == std::string::npos) {
            throw std::runtime_error("config line " + std::to_string(line_number) +
                                     " is not 'key = value'");
        }
        const std::string key = trim(line.substr(0, equals));
        const std::string value = strip_quotes(trim(line.substr(equals + 1)));
        if (key.empty() || value.empty()) {
            throw std::runtime_error("config line " + std::to_string(line_number) +
                                     " is missing a key or value");
        }
        if (key == "m") {
            parsed.config.m = static_cast<int>(parse_integer(key, value));
        } else if (key == "gamma_grid") {
            parsed.config.gamma_grid = parse_grid(key, value);
        } else if (key == "beta_grid") {
            parsed.config.beta_grid = parse_grid(key, value);
        } else if (key == "mu") {
            parsed.config.mu = parse_double(key, value);
        } else if (key == "sigma") {
            parsed.config.sigma = parse_double(key, value);
        } else if (key == "trials") {
            parsed.config.trials = parse_integer(key, value);
        } else if (key == "seed") {
            parsed.config.seed = parse_seed(key, value);
            parsed.has_seed = true;
        } else if (key == "cost_a") {
            parsed.config.cost_a = parse_double(key, value);
        } else if (key == "cost_b") {
            parsed.config.cost_b = parse_double(key, value);
        } else if (key == "output") {
            parsed.config.output = value;
        } else if (key == "format") {
            std::string lowered = value;
            std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                           [](unsigned char c) { return std::tolower(c); });
            if (lowered == "csv") {
                parsed.config.format = ExperimentConfig::Format::Csv;
            } else if (lowered == "json") {
                parsed.config.format = ExperimentConfig::Format::Json;
            } else {
                throw std::runtime_error("config key 'format' must be csv or json");
            }
        } else {
            throw std::runtime_error("unknown config key: " + key);
        }
    }
    return parsed;
}

int worker_count() {
    int count = static_cast<int>(std::thread::hardware_concurrency());
    if (count < 1) count = 1;
    if (const char* env = std::getenv("OLIGOSHARE_THREADS")) {
        char* end = nullptr;
        const long requested = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && requested >= 1) {
            count = std::min<long>(count, requested);
        }
    }
    return count;
}

}  // namespace oligoshare::experiment
