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

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpsim/config.hpp"
#include "cpsim/stats.hpp"

namespace cpsim {

struct RunOptions {
    int threads = 1;
    bool keep_raw = false;
};

struct ExperimentResult {
    nlohmann::json results;       // everything written to results.json
    std::vector<TestReport> tests; // final attempt
    std::vector<std::string> raw;  // JSON lines, filled with keep_raw
    bool passed() const;
};

/// Runs one experiment. A failing statistical verdict is retried once with
/// experiment.alternate_seed when that is set; both attempts are recorded.
/// Throws ParameterError on bad configs and InsufficientData when the
/// replicas cannot support an estimate.
ExperimentResult run_experiment(const ExperimentConfig &config, const RunOptions &options = {});

/// The plot tables a results document supports.
enum class PlotKind { Survival, Tv, Void, Scatter, Duality, GoodPoints };
PlotKind parse_plot_kind(const std::string &name);
std::string to_string(PlotKind kind);
/// Kinds with data in `results` (survival curves, TV pairs, ...).
std::vector<PlotKind> plot_kinds(const nlohmann::json &results);

/// Tidy CSV for one kind; header only when the results hold no such data.
void emit_plotdata(const nlohmann::json &results, PlotKind kind, std::ostream &os);

/// Writes results.json, every CSV in plot_kinds() as <kind>.csv, raw.jsonl
/// when present, and run_info.json (the only file with a timestamp).
void write_artifacts(const ExperimentResult &result, const std::string &dir,
                     const nlohmann::json &run_info);

} // namespace cpsim
