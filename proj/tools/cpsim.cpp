/*
   Copyright 2026 The cpsim Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// cpsim command line: simulate, estimate, test, oracle, plotdata.
// Exit status: 0 ok, 1 a statistical test failed, 2 usage or config error,
// 3 insufficient data, 4 other runtime error.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpsim/config.hpp"
#include "cpsim/engine.hpp"
#include "cpsim/error.hpp"
#include "cpsim/experiment.hpp"
#include "cpsim/oracle.hpp"
#include "cpsim/process.hpp"

using namespace cpsim;
using json = nlohmann::json;

namespace {

enum Status { kOk = 0, kTestFailed = 1, kUsage = 2, kInsufficient = 3, kRuntime = 4 };

struct RunArgs {
    std::string config;
    std::string out;
    int threads = 1;
    bool keep_raw = false;
};

std::string output_dir(const RunArgs &a, const ExperimentConfig &c)
{
    if (!a.out.empty())
        return a.out;
    if (!c.output_dir.empty())
        return c.output_dir;
    if (const char *env = std::getenv("CPSIM_OUTPUT_DIR"); env && *env)
        return (std::filesystem::path(env) / c.name).string();
    return (std::filesystem::path("cpsim-out") / c.name).string();
}

std::string utc_now()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int run(const RunArgs &a, bool print_table)
{
    const auto config = ExperimentConfig::load(a.config);
    const auto result = run_experiment(config, {a.threads, a.keep_raw});
    const auto dir = output_dir(a, config);
    write_artifacts(result, dir,
                    {{"timestamp", utc_now()},
                     {"config_file", a.config},
                     {"threads", a.threads},
                     {"keep_raw", a.keep_raw}});
    if (print_table)
        std::cout << summary_table(result.tests);
    std::cout << config.name << ": " << (result.passed() ? "all tests passed" : "some tests failed")
              << " (" << result.tests.size() << " tests), artifacts in " << dir << '\n';
    return result.passed() ? kOk : kTestFailed;
}

struct SimulateArgs {
    int dim = 1;
    int window = 50;
    double lambda = 1.0;
    std::uint64_t seed = 1;
    std::uint64_t replica = 0;
    std::string initial = "origin";
    std::vector<double> times{1.0};
};

int simulate(const SimulateArgs &a)
{
    const auto lat = Lattice::box(a.dim, a.window);
    std::vector<SiteIndex> init;
    if (a.initial == "full") {
        init.resize(static_cast<std::size_t>(lat.size()));
        std::iota(init.begin(), init.end(), 0);
    } else {
        init = lat.ball(Site{}, ExperimentConfig::initial_radius(a.initial));
        std::sort(init.begin(), init.end());
    }
    auto times = a.times;
    std::sort(times.begin(), times.end());
    ReplicaSimulator sim(lat, a.lambda);
    const auto out = sim.run(a.seed, a.replica, {init, times, times.back(), false});
    json snaps = json::array();
    for (std::size_t k = 0; k < times.size(); ++k)
        snaps.push_back({{"t", times[k]},
                         {"config", to_json(Configuration::from_indices(lat, out.snapshots[k]))}});
    const json j{{"dimension", a.dim},
                 {"window_radius", a.window},
                 {"lambda", a.lambda},
                 {"seed", a.seed},
                 {"replica", a.replica},
                 {"initial", a.initial},
                 {"absorption_time",
                  out.absorption_time ? json(*out.absorption_time) : json(nullptr)},
                 {"touched_boundary", out.touched_boundary},
                 {"snapshots", snaps}};
    std::cout << j.dump(2) << '\n';
    return kOk;
}

struct OracleArgs {
    int n = 6;
    double lambda = 0.5;
    bool full = false;
    std::vector<double> cdf_times;
};

int oracle(const OracleArgs &a)
{
    const auto chain = build_chain(a.n, a.lambda, !a.full);
    const auto s = spectral_summary(chain, a.cdf_times);
    auto j = to_json(chain, s);
    j["qsd_law"] = qsd_law(chain, s).to_json();
    std::cout << j.dump(2) << '\n';
    return kOk;
}

int plotdata(const std::string &results_path, const std::string &kind, const std::string &out)
{
    std::ifstream in(results_path);
    if (!in)
        throw UsageError("missing results file " + results_path);
    json results;
    try {
        results = json::parse(in);
    } catch (const json::exception &e) {
        throw UsageError(results_path + ": not a results document: " + e.what());
    }
    const auto k = parse_plot_kind(kind);
    if (out.empty()) {
        emit_plotdata(results, k, std::cout);
        return kOk;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f)
        throw UsageError("cannot write " + out);
    emit_plotdata(results, k, f);
    return kOk;
}

void add_run_options(CLI::App *cmd, RunArgs &a)
{
    cmd->add_option("config", a.config, "experiment config (INI)")->required()->check(
        CLI::ExistingFile);
    cmd->add_option("--out", a.out,
                    "output directory (default: config output_dir, then $CPSIM_OUTPUT_DIR/<name>)");
    cmd->add_option("--threads", a.threads, "worker threads")->check(CLI::Range(1, 1024));
    cmd->add_flag("--keep-raw", a.keep_raw, "also write per-replica records to raw.jsonl");
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"cpsim: contact process simulation and verification"};
    app.require_subcommand(1);

    RunArgs est, tst;
    auto *estimate = app.add_subcommand("estimate", "run an experiment and write its artifacts");
    add_run_options(estimate, est);
    auto *test = app.add_subcommand("test", "run an experiment and print its test reports");
    add_run_options(test, tst);

    SimulateArgs sa;
    auto *sim = app.add_subcommand("simulate", "run one replica and print its snapshots as JSON");
    sim->add_option("--dim", sa.dim)->check(CLI::Range(1, kMaxDim));
    sim->add_option("--window", sa.window, "window radius W of [-W, W]^d")->check(
        CLI::PositiveNumber);
    sim->add_option("--lambda", sa.lambda)->check(CLI::PositiveNumber);
    sim->add_option("--seed", sa.seed);
    sim->add_option("--replica", sa.replica);
    sim->add_option("--initial", sa.initial, "origin, ball:r or full");
    sim->add_option("--times", sa.times, "snapshot times")->delimiter(',');

    OracleArgs oa;
    auto *orc = app.add_subcommand("oracle", "exact finite-ring chain summary as JSON");
    orc->add_option("--n", oa.n, "ring size")->check(CLI::Range(2, 12));
    orc->add_option("--lambda", oa.lambda)->check(CLI::PositiveNumber);
    orc->add_flag("--full-state-space", oa.full, "do not quotient by rotations");
    orc->add_option("--cdf-times", oa.cdf_times, "times for the absorption CDF from {0}")
        ->delimiter(',');

    std::string results_path, kind, plot_out;
    auto *plot = app.add_subcommand("plotdata", "tidy CSV from a results.json");
    plot->add_option("results", results_path, "results.json")->required();
    plot->add_option("--kind", kind, "survival, tv, void, scatter, duality, goodpoints")
        ->required();
    plot->add_option("--out", plot_out, "CSV file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*estimate)
            return run(est, false);
        if (*test)
            return run(tst, true);
        if (*sim)
            return simulate(sa);
        if (*orc)
            return oracle(oa);
        if (*plot)
            return plotdata(results_path, kind, plot_out);
    } catch (const InsufficientData &e) {
        std::cerr << "insufficient data: " << e.what() << '\n';
        return kInsufficient;
    } catch (const ParameterError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const UsageError &e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kUsage;
}
