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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace cpsim {

/// R(t) = c * t^k, written "c*t^k" (also "t^k", "c*t", "c").
struct RadiusRule {
    double c = 1.0;
    double k = 1.0;

    static RadiusRule parse(const std::string &text);
    std::string to_string() const;
    /// floor(c t^k), at least 1.
    int operator()(double t) const;
    bool operator==(const RadiusRule &) const = default;
};

/// Every key of the INI file, with its default. See docs/config.md.
struct ExperimentConfig {
    // [experiment]
    std::string name;
    std::uint64_t seed = 1;
    std::uint64_t alternate_seed = 0; // 0: no retry
    std::uint64_t replicas = 0;
    double level = 0.01;
    std::string output_dir;

    // [model]
    int dimension = 1;
    double lambda = 1.0;
    int window_radius = 0; // 0: derived from beta, t and margin
    double beta = 1.0;
    int margin = -1; // -1: 2 ceil(beta t)

    // [time]
    double horizon = 0.0;
    std::string grid; // "start:step:end" or comma list
    std::vector<double> times;

    // [estimate]
    std::string initial = "origin"; // "origin" or "ball:r"
    std::string compare_initial;     // optional second initial set
    std::uint64_t survival_replicas = 0; // 0: same as replicas
    std::uint64_t yaglom_replicas = 0;   // 0: same as replicas
    double fit_start_below = 0.5;
    double min_survivors = 100.0;
    int bootstrap = 200;
    int width_cap = 20;
    double tv_max = 0.1;
    double k_sigma = 3.0;

    // [clusters]
    std::string rt_rule = "1*t^2";
    double K = 0.0; // 0: derived from boxes
    int boxes = 20;
    std::string norm = "sup";
    double max_diameter_fraction = 0.1;

    // [oracle]
    int ring_n = 6;
    bool quotient = true;
    double cdf_dt = 0.005;

    static const std::vector<std::string> &experiment_names();

    /// Parses and validates; throws ParameterError naming the offending key.
    static ExperimentConfig parse(std::istream &is);
    static ExperimentConfig load(const std::string &path);
    /// Full INI text with every key; parse(serialize()) reproduces *this.
    std::string serialize() const;
    nlohmann::json to_json() const;

    /// Checks ranges and the keys the experiment needs.
    void validate() const;

    std::vector<double> time_grid() const;
    RadiusRule radius_rule() const { return RadiusRule::parse(rt_rule); }
    std::uint64_t survival_count() const { return survival_replicas ? survival_replicas : replicas; }
    std::uint64_t yaglom_count() const { return yaglom_replicas ? yaglom_replicas : replicas; }
    /// Ball radius named by "origin" (0) or "ball:r".
    static int initial_radius(const std::string &spec);

    bool operator==(const ExperimentConfig &) const = default;
};

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

} // namespace cpsim
