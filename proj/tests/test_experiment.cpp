#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oligoshare/errors.hpp"
#include "oligoshare/experiment.hpp"
#include "oligoshare/rng.hpp"

using oligoshare::NoConvergence;
using oligoshare::coalition::Partition;
using oligoshare::experiment::avg_coalition_size;
using oligoshare::experiment::ExperimentConfig;
using oligoshare::experiment::load_config;
using oligoshare::experiment::run_sweep;
using oligoshare::experiment::sample_sizes;
using oligoshare::experiment::SweepRow;
using oligoshare::experiment::to_csv;
using oligoshare::experiment::to_json;
using oligoshare::experiment::worker_count;
using oligoshare::rng::Stream;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
    const std::string path = "/tmp/oligoshare_test_" + name;
    std::ofstream out(path, std::ios::trunc);
    out << body;
    out.close();
    return path;
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.m = 3;
    cfg.gamma_grid = {0.2, 0.8};
    cfg.beta_grid = {0.5, 0.9};
    cfg.mu = 500.0;
    cfg.sigma = 150.0;
    cfg.trials = 24;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("random streams: reproducible, key-splittable, sensible ranges") {
    Stream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    // Children derived from the same parent key are reproducible and differ
    // from each other and from the parent.
    Stream parent(42);
    Stream c0 = parent.child(0);
    Stream c0_again = Stream(42).child(0);
    CHECK(c0.next_u64() == c0_again.next_u64());
    std::set<std::uint64_t> firsts;
    firsts.insert(Stream(42).next_u64());
    for (int k = 0; k < 50; ++k) firsts.insert(Stream(42).child(k).next_u64());
    CHECK(firsts.size() == 51);  // no collisions among parent and children

    Stream u(9);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.next_unit();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
    Stream g(10);
    double sum = 0.0, sumsq = 0.0;
    const int kDraws = 20000;
    for (int i = 0; i < kDraws; ++i) {
        const double z = g.next_normal();
        sum += z;
        sumsq += z * z;
    }
    CHECK(sum / kDraws == doctest::Approx(0.0).epsilon(0.05).scale(1.0));
    CHECK(sumsq / kDraws == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("size sampling: rounding, clipping, determinism") {
    Stream s1(3), s2(3);
    const auto first = sample_sizes(4, 1000.0, 300.0, s1);
    const auto again = sample_sizes(4, 1000.0, 300.0, s2);
    CHECK(first == again);
    CHECK(first.size() == 4);

    // Zero spread pins every draw to the rounded mean.
    Stream s3(3);
    const auto fixed = sample_sizes(3, 899.6, 0.0, s3);
    for (long long n : fixed) CHECK(n == 900);

    // A mean far below zero still yields legal sizes.
    Stream s4(3);
    for (long long n : sample_sizes(5, -50.0, 10.0, s4)) CHECK(n >= 1);
    Stream s5(11);
    long long clipped = 0;
    for (int rep = 0; rep < 200; ++rep) {
        for (long long n : sample_sizes(3, 2.0, 40.0, s5)) {
            CHECK(n >= 1);
            if (n == 1) ++clipped;
        }
    }
    CHECK(clipped > 0);  // the floor actually engages
}

TEST_CASE("average coalition size") {
    const Partition grand{{1, 2, 3, 4}};
    const Partition apart{{1}, {2}, {3}};
    const Partition mixed{{1, 2}, {3}};
    CHECK(avg_coalition_size(grand) == 4.0);
    CHECK(avg_coalition_size(apart) == 1.0);
    CHECK(avg_coalition_size(mixed) == 1.5);
}

TEST_CASE("config validation") {
    CHECK_NOTHROW(small_config().validate());
    ExperimentConfig cfg;

    cfg = small_config();
    cfg.m = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.m = 9;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.gamma_grid = {0.2, 1.0};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.gamma_grid = {-0.6};  // below -1/(m-1) for m = 3
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.beta_grid = {0.0};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.beta_grid = {1.2};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.trials = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.sigma = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.mu = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.cost_a = -0.1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.cost_b = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    // A cost ceiling above 1 stays legal: draws that price a firm out are
    // resampled at run time rather than rejected up front.
    cfg = small_config();
    cfg.cost_a = 0.6;
    cfg.cost_b = 0.5;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("sweep rows: shape, bounds, and grid order") {
    const auto rows = run_sweep(small_config());
    REQUIRE(rows.size() == 4);  // gamma outer, beta inner
    CHECK(rows[0].gamma == 0.2);
    CHECK(rows[0].beta == 0.5);
    CHECK(rows[1].gamma == 0.2);
    CHECK(rows[1].beta == 0.9);
    CHECK(rows[2].gamma == 0.8);
    CHECK(rows[3].beta == 0.9);
    for (const auto& row : rows) {
        CHECK(row.m == 3);
        CHECK(row.mu == 500.0);
        CHECK(row.sigma == 150.0);
        CHECK(row.trials == 24);
        CHECK(row.seed == 7);
        CHECK(row.mean_avg_coalition_size >= 1.0);
        CHECK(row.mean_avg_coalition_size <= 3.0);
        CHECK(row.std_error >= 0.0);
        CHECK(row.resamples >= 0);
    }
}

TEST_CASE("sweep is byte-identical across reruns and thread counts") {
    const auto cfg = small_config();
    const std::string once = to_csv(run_sweep(cfg));

    setenv("OLIGOSHARE_THREADS", "1", 1);
    const std::string serial = to_csv(run_sweep(cfg));
    setenv("OLIGOSHARE_THREADS", "3", 1);
    const std::string threaded = to_csv(run_sweep(cfg));
    unsetenv("OLIGOSHARE_THREADS");

    CHECK(once == serial);
    CHECK(once == threaded);
}

TEST_CASE("cells share common random draws: duplicate cells give equal rows") {
    ExperimentConfig cfg = small_config();
    cfg.gamma_grid = {0.5, 0.5};
    cfg.beta_grid = {0.7};
    const auto rows = run_sweep(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].mean_avg_coalition_size == rows[1].mean_avg_coalition_size);
    CHECK(rows[0].std_error == rows[1].std_error);
    CHECK(rows[0].resamples == rows[1].resamples);
}

TEST_CASE("zero size spread collapses the standard error to exactly zero") {
    ExperimentConfig cfg = small_config();
    cfg.sigma = 0.0;
    cfg.gamma_grid = {0.4};
    cfg.beta_grid = {0.9};
    cfg.trials = 10;
    const auto rows = run_sweep(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].std_error == 0.0);
    // All firms equal => the game outcome is one fixed partition.
    const double mean = rows[0].mean_avg_coalition_size;
    CHECK((mean == 1.0 || mean == 1.5 || mean == 3.0));
}

TEST_CASE("standard error shrinks like one over the square root of trials") {
    ExperimentConfig cfg = small_config();
    cfg.gamma_grid = {0.5};
    cfg.beta_grid = {0.9};
    cfg.trials = 100;
    const double se100 = run_sweep(cfg)[0].std_error;
    cfg.trials = 400;
    const double se400 = run_sweep(cfg)[0].std_error;
    REQUIRE(se400 > 0.0);
    CHECK(se100 / se400 > 1.3);
    CHECK(se100 / se400 < 3.0);
}

TEST_CASE("stronger substitution shrinks equilibrium coalitions") {
    ExperimentConfig cfg = small_config();
    cfg.mu = 1000.0;
    cfg.sigma = 300.0;
    cfg.gamma_grid = {0.1, 0.9};
    cfg.beta_grid = {0.9};
    cfg.trials = 60;
    const auto rows = run_sweep(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].mean_avg_coalition_size > rows[1].mean_avg_coalition_size);
}

TEST_CASE("infeasible draws are resampled and counted") {
    ExperimentConfig cfg;
    cfg.m = 3;
    cfg.gamma_grid = {0.85};
    cfg.beta_grid = {1.0};
    cfg.mu = 40.0;
    cfg.sigma = 60.0;
    cfg.trials = 30;
    cfg.seed = 5;
    cfg.cost_a = 0.05;
    cfg.cost_b = 0.6;  // a data-starved firm prices itself out of the market
    const auto rows = run_sweep(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].resamples > 0);
    CHECK(rows[0].mean_avg_coalition_size >= 1.0);
    CHECK(rows[0].mean_avg_coalition_size <= 3.0);
}

TEST_CASE("permanently infeasible cells give up with a convergence error") {
    ExperimentConfig cfg;
    cfg.m = 3;
    cfg.gamma_grid = {0.85};
    cfg.beta_grid = {1.0};
    cfg.mu = 1.0;
    cfg.sigma = 0.0;  // every attempt redraws the same impossible sizes
    cfg.trials = 2;
    cfg.seed = 5;
    cfg.cost_a = 0.05;
    cfg.cost_b = 0.6;
    CHECK_THROWS_AS(run_sweep(cfg), NoConvergence);
}

TEST_CASE("csv output: exact header, one line per row, parseable numbers") {
    const auto rows = run_sweep(small_config());
    const std::string csv = to_csv(rows);
    std::istringstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line ==
          "gamma,beta,m,mu,sigma,trials,mean_avg_coalition_size,std_error,"
          "seed,resamples");
    int count = 0;
    while (std::getline(in, line)) {
        std::istringstream fields(line);
        std::string field;
        std::vector<std::string> values;
        while (std::getline(fields, field, ',')) values.push_back(field);
        REQUIRE(values.size() == 10);
        CHECK(std::stod(values[0]) == rows[count].gamma);
        CHECK(std::stod(values[1]) == rows[count].beta);
        CHECK(std::stoi(values[2]) == rows[count].m);
        CHECK(std::stoll(values[5]) == rows[count].trials);
        CHECK(std::stod(values[6]) ==
              doctest::Approx(rows[count].mean_avg_coalition_size)
                  .epsilon(1e-8));
        CHECK(std::stoull(values[8]) == rows[count].seed);
        CHECK(std::stoll(values[9]) == rows[count].resamples);
        ++count;
    }
    CHECK(count == 4);
}

TEST_CASE("json output mirrors the rows") {
    const auto rows = run_sweep(small_config());
    const auto parsed = nlohmann::json::parse(to_json(rows));
    REQUIRE(parsed.is_array());
    REQUIRE(parsed.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(parsed[i]["gamma"].get<double>() == rows[i].gamma);
        CHECK(parsed[i]["beta"].get<double>() == rows[i].beta);
        CHECK(parsed[i]["m"].get<int>() == rows[i].m);
        CHECK(parsed[i]["mu"].get<double>() == rows[i].mu);
        CHECK(parsed[i]["sigma"].get<double>() == rows[i].sigma);
        CHECK(parsed[i]["trials"].get<long long>() == rows[i].trials);
        CHECK(parsed[i]["mean_avg_coalition_size"].get<double>() ==
              rows[i].mean_avg_coalition_size);
        CHECK(parsed[i]["std_error"].get<double>() == rows[i].std_error);
        CHECK(parsed[i]["seed"].get<std::uint64_t>() == rows[i].seed);
        CHECK(parsed[i]["resamples"].get<long long>() == rows[i].resamples);
    }
}

TEST_CASE("config files: comments, brackets, quotes, and strict keys") {
    const std::string path = write_temp("ok.conf",
                                        "# sweep configuration\n"
                                        "m = 4\n"
                                        "gamma_grid = [0.1, 0.5, 0.9]\n"
                                        "beta_grid = 0.3,0.7\n"
                                        "mu = 800\n"
                                        "sigma = 250.5\n"
                                        "trials = 42\n"
                                        "seed = 99\n"
                                        "cost_a = 0.05\n"
                                        "cost_b = 0.2\n"
                                        "output = \"rows.csv\"\n"
                                        "format = JSON\n");
    const auto parsed = load_config(path);
    CHECK(parsed.has_seed);
    const auto& cfg = parsed.config;
    CHECK(cfg.m == 4);
    const std::vector<double> gammas{0.1, 0.5, 0.9};
    const std::vector<double> betas{0.3, 0.7};
    CHECK(cfg.gamma_grid == gammas);
    CHECK(cfg.beta_grid == betas);
    CHECK(cfg.mu == 800.0);
    CHECK(cfg.sigma == 250.5);
    CHECK(cfg.trials == 42);
    CHECK(cfg.seed == 99);
    CHECK(cfg.cost_a == 0.05);
    CHECK(cfg.cost_b == 0.2);
    CHECK(cfg.output == "rows.csv");
    CHECK(cfg.format == ExperimentConfig::Format::Json);

    const std::string no_seed = write_temp("noseed.conf", "m = 3\ntrials = 5\n");
    CHECK_FALSE(load_config(no_seed).has_seed);

    const std::string unknown =
        write_temp("unknown.conf", "m = 3\nwidth = 2\n");
    CHECK_THROWS_AS(load_config(unknown), std::runtime_error);
    const std::string bad_value =
        write_temp("badvalue.conf", "m = 3\ntrials = soon\n");
    CHECK_THROWS_AS(load_config(bad_value), std::runtime_error);
    const std::string bad_grid =
        write_temp("badgrid.conf", "gamma_grid = [0.1; 0.2]\n");
    CHECK_THROWS_AS(load_config(bad_grid), std::runtime_error);
    CHECK_THROWS_AS(load_config("/tmp/oligoshare_test_does_not_exist.conf"),
                    std::runtime_error);
}

TEST_CASE("worker count respects the environment cap") {
    unsetenv("OLIGOSHARE_THREADS");
    const int natural = worker_count();
    CHECK(natural >= 1);

    setenv("OLIGOSHARE_THREADS", "1", 1);
    CHECK(worker_count() == 1);
    setenv("OLIGOSHARE_THREADS", "999999", 1);
    CHECK(worker_count() == natural);  // cap never raises concurrency
    setenv("OLIGOSHARE_THREADS", "not-a-number", 1);
    CHECK(worker_count() == natural);
    setenv("OLIGOSHARE_THREADS", "0", 1);
    CHECK(worker_count() == natural);
    unsetenv("OLIGOSHARE_THREADS");
}
