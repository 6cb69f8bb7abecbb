#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oligoshare/coalition.hpp"
#include "oligoshare/rng.hpp"

namespace oligoshare::experiment {

struct ExperimentConfig {
    int m = 3;
    std::vector<double> gamma_grid{0.8};
    std::vector<double> beta_grid{0.9};
    double mu = 1000.0;    // size-distribution mean (samples)
    double sigma = 300.0;  // size-distribution standard deviation
    long long trials = 1000;
    std::uint64_t seed = 0;
    double cost_a = 0.1;  // cost floor shared by all sampled firms
    double cost_b = 0.1;  // data-starved premium
    std::string output;   // file path; empty writes to stdout
    enum class Format { Csv, Json };
    Format format = Format::Csv;

    // m in [2, 8]; every gamma inside (-1/(m-1), 1); every beta in (0, 1];
    // trials >= 1; sigma >= 0; mu finite; valid (a, b).
    void validate() const;
};

struct SweepRow {
    double gamma = 0.0;
    double beta = 0.0;
    int m = 0;
    double mu = 0.0;
    double sigma = 0.0;
    long long trials = 0;
    double mean_avg_coalition_size = 0.0;
    double std_error = 0.0;  // sample standard deviation / sqrt(trials)
    std::uint64_t seed = 0;
    long long resamples = 0;  // infeasible draws replaced in this cell
};

// m dataset sizes: independent normal(mu, sigma) draws rounded to the
// nearest integer and clipped to a minimum of 1.
std::vector<long long> sample_sizes(int m, double mu, double sigma,
                                    rng::Stream& stream);

// Number of firms divided by the number of blocks.
double avg_coalition_size(const coalition::Partition& partition);

// One row per (gamma, beta) grid cell (gamma outer): mean and standard error
// of the average equilibrium-coalition size over `trials` sampled markets,
// solved by sequential_game_solve. Trial t draws from stream
// seed -> child(t) -> child(attempt); the attempt index advances only when a
// draw is market-infeasible and must be resampled (counted per cell). The
// stream key deliberately excludes the cell, so all cells see common random
// draws — differences across cells are then driven by (gamma, beta), not by
// sampling noise. Trials run on min(worker_count(), trials) threads; results
// land in per-trial slots, so output is byte-identical for any thread count.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config);

// Header plus one line per row, fields in SweepRow order, decimals printed
// with 9 significant digits.
std::string to_csv(const std::vector<SweepRow>& rows);

// JSON array of row objects, keys in SweepRow order.
std::string to_json(const std::vector<SweepRow>& rows);

struct ParsedConfig {
    ExperimentConfig config;
    bool has_seed = false;  // seed must then come from the command line
};

// Flat key = value text config (# comments). Keys: m, gamma_grid, beta_grid,
// mu, sigma, trials, seed, cost_a, cost_b, output, format. Grid values are
// comma-separated, optionally in [brackets]; strings may be quoted. Unknown
// keys are rejected.
ParsedConfig load_config(const std::string& path);

// Worker cap: OLIGOSHARE_THREADS when set to a positive integer caps the
// hardware concurrency; otherwise hardware concurrency (at least 1).
int worker_count();

}  // namespace oligoshare::experiment
