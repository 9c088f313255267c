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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "cpsim/config.hpp"
#include "cpsim/error.hpp"
#include "cpsim/experiment.hpp"

using namespace cpsim;

namespace {

ExperimentConfig parse(const std::string &text)
{
    std::istringstream is(text);
    return ExperimentConfig::parse(is);
}

std::size_t lines(const std::string &s)
{
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

const char *kSurvival = R"(; small survival run
[experiment]
name = survival
seed = 4
replicas = 400
[model]
lambda = 1.0
[time]
horizon = 12
grid = 0:0.5:12
[estimate]
min_survivors = 20
bootstrap = 20
)";

} // namespace

TEST_CASE("radius rule grammar")
{
    CHECK(RadiusRule::parse("1*t^2")(8.0) == 64);
    CHECK(RadiusRule::parse("t^3")(2.0) == 8);
    CHECK(RadiusRule::parse("0.5*t")(7.0) == 3);
    CHECK(RadiusRule::parse("3")(100.0) == 3);
    CHECK(RadiusRule::parse(" 2 * t ^ 1.5 ")(4.0) == 16);
    CHECK(RadiusRule::parse("0.01*t")(1.0) == 1);
    for (const char *bad : {"", "t*2", "exp(t)", "1*t^", "2*x^2", "t^-1", "-1*t"})
        CHECK_THROWS_AS(RadiusRule::parse(bad), ParameterError);
    const auto r = RadiusRule::parse("2.5*t^2");
    CHECK(RadiusRule::parse(r.to_string()) == r);
}

TEST_CASE("config parse, serialize, parse is the identity")
{
    const auto a = parse(kSurvival);
    CHECK(a.name == "survival");
    CHECK(a.seed == 4);
    CHECK(a.time_grid().size() == 25);
    const auto b = parse(a.serialize());
    CHECK(a == b);
    CHECK(b.serialize() == a.serialize());

    auto c = a;
    c.name = "box-law";
    c.times = {8.0, 12.0};
    c.rt_rule = "0.3*t^1.5";
    c.lambda = 0.1 + 0.2; // not exactly representable in short decimal
    c.compare_initial = "ball:2";
    c.quotient = false;
    CHECK(parse(c.serialize()) == c);
}

TEST_CASE("config rejects unknown keys and bad values")
{
    CHECK_THROWS_AS(parse("[experiment]\nname = survival\nbogus = 1\n"), ParameterError);
    CHECK_THROWS_AS(parse("[experimnt]\nname = survival\n"), ParameterError);
    CHECK_THROWS_AS(parse("[experiment]\nseed = 3\n"), ParameterError); // no name
    CHECK_THROWS_AS(parse("[experiment]\nname = nothing\n"), ParameterError);
    const std::string base = kSurvival;
    CHECK_THROWS_AS(parse(base + "[model]\nlambda = abc\n"), ParameterError);
    CHECK_THROWS_AS(parse(base + "[model]\nlambda = 2.0\n"), ParameterError); // supercritical
    CHECK_THROWS_AS(parse(base + "[model]\ndimension = 0\n"), ParameterError);
    CHECK_THROWS_AS(parse(base + "[clusters]\nrt_rule = t^t\n"), ParameterError);
    CHECK_THROWS_AS(parse(base + "[estimate]\ninitial = ball:x\n"), ParameterError);
    CHECK_THROWS_AS(parse(base + "[time]\nhorizon = 5\n"), ParameterError); // grid not covered
    CHECK_THROWS_AS(parse("[experiment]\nname = yaglom\nreplicas = 10\n[time]\ntimes = 3\n"),
                    ParameterError);
    CHECK_THROWS_AS(parse("[experiment]\nname = survival\nreplicas = -4\n"), ParameterError);
}

TEST_CASE("survival with no replicas is insufficient data")
{
    auto c = parse(kSurvival);
    c.replicas = 0;
    CHECK_THROWS_AS(run_experiment(c), InsufficientData);
}

TEST_CASE("survival experiment is deterministic and thread independent")
{
    const auto c = parse(kSurvival);
    const auto a = run_experiment(c);
    const auto b = run_experiment(c, {3, false});
    CHECK(a.results.dump() == b.results.dump());
    CHECK(a.results["estimates"]["survival"]["alpha"]["alpha"].get<double>() > 0.0);

    std::ostringstream os;
    emit_plotdata(a.results, PlotKind::Survival, os);
    CHECK(os.str().rfind("curve,t,p_hat,ci_lo,ci_hi,n_surviving\n", 0) == 0);
    CHECK(lines(os.str()) == 1 + c.time_grid().size());
}

TEST_CASE("empty results give header-only CSV")
{
    const nlohmann::json empty = nlohmann::json::object();
    for (auto k : {PlotKind::Survival, PlotKind::Tv, PlotKind::Void, PlotKind::Scatter,
                   PlotKind::Duality, PlotKind::GoodPoints}) {
        std::ostringstream os;
        emit_plotdata(empty, k, os);
        CHECK(lines(os.str()) == 1);
        CHECK(parse_plot_kind(to_string(k)) == k);
    }
    CHECK(plot_kinds(empty).empty());
    CHECK_THROWS_AS(parse_plot_kind("histogram"), UsageError);
}

TEST_CASE("clusters scatter has one row per point of the measure")
{
    const auto c = parse(R"([experiment]
name = clusters
replicas = 6
[model]
lambda = 1.0
window_radius = 40
[time]
times = 3
[clusters]
rt_rule = 1*t
)");
    const auto r = run_experiment(c, {2, true});
    std::ostringstream os;
    emit_plotdata(r.results, PlotKind::Scatter, os);
    CHECK(os.str().rfind("replica,x0,mark_size\n", 0) == 0);
    CHECK(lines(os.str()) == 1 + r.results["measure"].size());
    // keep_raw writes one measure per replica; the scatter holds the first
    REQUIRE(r.raw.size() == 6);
    const auto first = nlohmann::json::parse(r.raw[0]);
    CHECK(first["points"].size() == r.results["measure"].size());
    CHECK(r.tests.size() == 1);
}

TEST_CASE("small runs of the remaining experiments")
{
    const auto yag = run_experiment(parse(R"([experiment]
name = yaglom
replicas = 600
[time]
times = 2, 4, 6
)"));
    CHECK(yag.results["tv"].size() == 2);

    const auto dual = run_experiment(parse(R"([experiment]
name = duality
replicas = 2000
[time]
times = 2
)"));
    CHECK(dual.tests.size() == 1);
    CHECK(dual.results["duality"].size() == 1);

    const auto good = run_experiment(parse(R"([experiment]
name = goodpoints
replicas = 200
[model]
beta = 3.5
margin = 2
[time]
times = 2, 4
)"));
    CHECK(good.results["goodpoints"].size() == 2);

    const auto orc = run_experiment(parse(R"([experiment]
name = oracle-check
replicas = 2000
[model]
lambda = 0.5
[time]
horizon = 12
grid = 0:0.25:12
times = 3
[estimate]
fit_start_below = 0.2
min_survivors = 30
bootstrap = 50
tv_max = 0.2
)"));
    CHECK(orc.tests.size() == 4);
    CHECK(orc.results["estimates"]["oracle"].contains("alpha"));

    const auto box = run_experiment(parse(R"([experiment]
name = box-law
replicas = 200
[model]
lambda = 1.0
margin = 4
[time]
horizon = 16
grid = 0:0.5:16
times = 2, 3
[estimate]
survival_replicas = 3000
yaglom_replicas = 3000
min_survivors = 30
bootstrap = 30
[clusters]
rt_rule = 2*t
)"));
    CHECK(box.results["tv"].size() == 2);
    CHECK(box.tests.size() == 5);

    const auto poi = run_experiment(parse(R"([experiment]
name = poisson
replicas = 600
[model]
lambda = 1.0
margin = 12
[time]
horizon = 16
grid = 0:0.5:16
times = 3
[estimate]
survival_replicas = 3000
yaglom_replicas = 3000
min_survivors = 30
bootstrap = 30
[clusters]
rt_rule = 1*t
boxes = 5
)"));
    CHECK(poi.results["void"].size() == 5);
    CHECK(poi.tests.size() >= 3);
}

TEST_CASE("write_artifacts lays out the output directory")
{
    const auto dir = std::filesystem::temp_directory_path() / "cpsim_artifacts_test";
    std::filesystem::remove_all(dir);
    const auto r = run_experiment(parse(kSurvival), {1, true});
    write_artifacts(r, dir.string(), {{"timestamp", "now"}});
    for (const char *f : {"results.json", "survival.csv", "raw.jsonl", "run_info.json"})
        CHECK(std::filesystem::exists(dir / f));
    std::ifstream in(dir / "results.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(!j.contains("timestamp"));
    std::filesystem::remove_all(dir);
}
