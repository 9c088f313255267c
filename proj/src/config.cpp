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

#include "cpsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <regex>
#include <set>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cpsim/error.hpp"
#include "cpsim/graphical.hpp"
#include "cpsim/lattice.hpp"

namespace cpsim {

std::string format_double(double x)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

namespace {

double to_double(const std::string &key, const std::string &v)
{
    double x = 0.0;
    const auto s = boost::algorithm::trim_copy(v);
    const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(x))
        throw ParameterError(key + ": not a number: '" + v + "'");
    return x;
}

std::uint64_t to_u64(const std::string &key, const std::string &v)
{
    std::uint64_t x = 0;
    const auto s = boost::algorithm::trim_copy(v);
    const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ParameterError(key + ": not a non-negative integer: '" + v + "'");
    return x;
}

int to_int(const std::string &key, const std::string &v)
{
    int x = 0;
    const auto s = boost::algorithm::trim_copy(v);
    const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ParameterError(key + ": not an integer: '" + v + "'");
    return x;
}

bool to_bool(const std::string &key, const std::string &v)
{
    const auto s = boost::algorithm::trim_copy(v);
    if (s == "true")
        return true;
    if (s == "false")
        return false;
    throw ParameterError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string &key, const std::string &v)
{
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!boost::algorithm::trim_copy(item).empty())
            out.push_back(to_double(key, item));
    return out;
}

std::string from_list(const std::vector<double> &v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? ", " : "") + format_double(v[i]);
    return s;
}

struct Key {
    std::string section, name;
    std::function<void(ExperimentConfig &, const std::string &)> set;
    std::function<std::string(const ExperimentConfig &)> get;
    std::string path() const { return section + "." + name; }
};

template <class T>
Key key_of(std::string section, std::string name, T ExperimentConfig::*m)
{
    const std::string path = section + "." + name;
    Key k{std::move(section), std::move(name), {}, {}};
    k.set = [m, path](ExperimentConfig &c, const std::string &v) {
        if constexpr (std::is_same_v<T, std::string>)
            c.*m = boost::algorithm::trim_copy(v);
        else if constexpr (std::is_same_v<T, double>)
            c.*m = to_double(path, v);
        else if constexpr (std::is_same_v<T, std::uint64_t>)
            c.*m = to_u64(path, v);
        else if constexpr (std::is_same_v<T, int>)
            c.*m = to_int(path, v);
        else if constexpr (std::is_same_v<T, bool>)
            c.*m = to_bool(path, v);
        else
            c.*m = to_list(path, v);
    };
    k.get = [m](const ExperimentConfig &c) -> std::string {
        if constexpr (std::is_same_v<T, std::string>)
            return c.*m;
        else if constexpr (std::is_same_v<T, double>)
            return format_double(c.*m);
        else if constexpr (std::is_same_v<T, bool>)
            return c.*m ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::vector<double>>)
            return from_list(c.*m);
        else
            return std::to_string(c.*m);
    };
    return k;
}

const std::vector<Key> &keys()
{
    using C = ExperimentConfig;
    static const std::vector<Key> table = {
        key_of("experiment", "name", &C::name),
        key_of("experiment", "seed", &C::seed),
        key_of("experiment", "alternate_seed", &C::alternate_seed),
        key_of("experiment", "replicas", &C::replicas),
        key_of("experiment", "level", &C::level),
        key_of("experiment", "output_dir", &C::output_dir),
        key_of("model", "dimension", &C::dimension),
        key_of("model", "lambda", &C::lambda),
        key_of("model", "window_radius", &C::window_radius),
        key_of("model", "beta", &C::beta),
        key_of("model", "margin", &C::margin),
        key_of("time", "horizon", &C::horizon),
        key_of("time", "grid", &C::grid),
        key_of("time", "times", &C::times),
        key_of("estimate", "initial", &C::initial),
        key_of("estimate", "compare_initial", &C::compare_initial),
        key_of("estimate", "survival_replicas", &C::survival_replicas),
        key_of("estimate", "yaglom_replicas", &C::yaglom_replicas),
        key_of("estimate", "fit_start_below", &C::fit_start_below),
        key_of("estimate", "min_survivors", &C::min_survivors),
        key_of("estimate", "bootstrap", &C::bootstrap),
        key_of("estimate", "width_cap", &C::width_cap),
        key_of("estimate", "tv_max", &C::tv_max),
        key_of("estimate", "k_sigma", &C::k_sigma),
        key_of("clusters", "rt_rule", &C::rt_rule),
        key_of("clusters", "K", &C::K),
        key_of("clusters", "boxes", &C::boxes),
        key_of("clusters", "norm", &C::norm),
        key_of("clusters", "max_diameter_fraction", &C::max_diameter_fraction),
        key_of("oracle", "ring_n", &C::ring_n),
        key_of("oracle", "quotient", &C::quotient),
        key_of("oracle", "cdf_dt", &C::cdf_dt),
    };
    return table;
}

void require(bool ok, const std::string &what)
{
    if (!ok)
        throw ParameterError(what);
}

} // namespace

RadiusRule RadiusRule::parse(const std::string &text)
{
    static const std::regex re(
        R"(\s*(?:([0-9]+(?:\.[0-9]*)?(?:[eE][-+]?[0-9]+)?)\s*(\*\s*)?)?(t(?:\s*\^\s*([0-9]+(?:\.[0-9]*)?))?)?\s*)");
    std::smatch m;
    if (!std::regex_match(text, m, re) || (!m[1].matched && !m[3].matched) ||
        (m[1].matched && m[3].matched && !m[2].matched) || (m[2].matched && !m[3].matched))
        throw ParameterError("clusters.rt_rule: expected c*t^k, got '" + text + "'");
    RadiusRule r;
    r.c = m[1].matched ? to_double("clusters.rt_rule", m[1].str()) : 1.0;
    r.k = m[3].matched ? (m[4].matched ? to_double("clusters.rt_rule", m[4].str()) : 1.0) : 0.0;
    if (!(r.c > 0.0))
        throw ParameterError("clusters.rt_rule: coefficient must be positive");
    return r;
}

std::string RadiusRule::to_string() const
{
    return format_double(c) + "*t^" + format_double(k);
}

int RadiusRule::operator()(double t) const
{
    const double r = std::floor(c * std::pow(t, k) + 1e-9);
    return std::max(1, static_cast<int>(std::min(r, 1e9)));
}

const std::vector<std::string> &ExperimentConfig::experiment_names()
{
    static const std::vector<std::string> names = {"survival", "yaglom",       "box-law",
                                                   "clusters", "poisson",      "oracle-check",
                                                   "duality",  "goodpoints"};
    return names;
}

ExperimentConfig ExperimentConfig::parse(std::istream &is)
{
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error &e) {
        throw ParameterError(std::string("config syntax: ") + e.what());
    }
    ExperimentConfig c;
    std::set<std::string> seen;
    for (const auto &[section, body] : tree) {
        if (body.empty())
            throw ParameterError("key outside any section: " + section);
        for (const auto &[name, value] : body) {
            const auto it = std::find_if(keys().begin(), keys().end(), [&](const Key &k) {
                return k.section == section && k.name == name;
            });
            if (it == keys().end())
                throw ParameterError("unknown key: " + section + "." + name);
            it->set(c, value.data());
            seen.insert(it->path());
        }
    }
    require(seen.count("experiment.name") > 0, "missing key: experiment.name");
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string &path)
{
    std::ifstream f(path);
    if (!f)
        throw ParameterError("cannot open config file " + path);
    return parse(f);
}

std::string ExperimentConfig::serialize() const
{
    std::ostringstream os;
    std::string section;
    for (const auto &k : keys()) {
        if (k.section != section) {
            os << (section.empty() ? "" : "\n") << '[' << k.section << "]\n";
            section = k.section;
        }
        os << k.name << " = " << k.get(*this) << '\n';
    }
    return os.str();
}

nlohmann::json ExperimentConfig::to_json() const
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto &k : keys())
        j[k.section][k.name] = k.get(*this);
    return j;
}

int ExperimentConfig::initial_radius(const std::string &spec)
{
    if (spec == "origin")
        return 0;
    if (spec.rfind("ball:", 0) == 0) {
        const int r = to_int("estimate.initial", spec.substr(5));
        if (r >= 0)
            return r;
    }
    throw ParameterError("initial set must be 'origin' or 'ball:r', got '" + spec + "'");
}

std::vector<double> ExperimentConfig::time_grid() const
{
    if (grid.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(grid);
        std::string item;
        while (std::getline(ss, item, ':'))
            parts.push_back(to_double("time.grid", item));
        require(parts.size() == 3 && parts[1] > 0.0 && parts[2] >= parts[0],
                "time.grid: expected start:step:end with step > 0");
        std::vector<double> g;
        const auto n = static_cast<long>(std::floor((parts[2] - parts[0]) / parts[1] + 1e-9));
        for (long i = 0; i <= n; ++i)
            g.push_back(parts[0] + static_cast<double>(i) * parts[1]);
        return g;
    }
    auto g = to_list("time.grid", grid);
    require(std::is_sorted(g.begin(), g.end()), "time.grid must be ascending");
    return g;
}

void ExperimentConfig::validate() const
{
    const auto &names = experiment_names();
    require(std::find(names.begin(), names.end(), name) != names.end(),
            "experiment.name: unknown experiment '" + name + "'");
    require(level > 0.0 && level < 1.0, "experiment.level must be in (0, 1)");
    require(dimension >= 1 && dimension <= kMaxDim, "model.dimension out of range");
    require(lambda > 0.0, "model.lambda must be positive");
    require(window_radius >= 0, "model.window_radius must be >= 0");
    require(beta > 0.0, "model.beta must be positive");
    require(margin >= -1, "model.margin must be >= -1");
    require(horizon >= 0.0, "time.horizon must be >= 0");
    require(std::is_sorted(times.begin(), times.end()), "time.times must be ascending");
    for (double t : times)
        require(t >= 0.0, "time.times must be non-negative");
    initial_radius(initial);
    if (!compare_initial.empty())
        initial_radius(compare_initial);
    require(fit_start_below > 0.0 && fit_start_below <= 1.0,
            "estimate.fit_start_below must be in (0, 1]");
    require(min_survivors >= 1.0, "estimate.min_survivors must be >= 1");
    require(bootstrap >= 0, "estimate.bootstrap must be >= 0");
    require(width_cap >= 0, "estimate.width_cap must be >= 0");
    require(tv_max > 0.0 && tv_max <= 1.0, "estimate.tv_max must be in (0, 1]");
    require(k_sigma > 0.0, "estimate.k_sigma must be positive");
    radius_rule();
    require(K >= 0.0, "clusters.K must be >= 0");
    require(boxes >= 1, "clusters.boxes must be >= 1");
    require(norm == "sup" || norm == "l1", "clusters.norm must be sup or l1");
    require(max_diameter_fraction > 0.0, "clusters.max_diameter_fraction must be positive");
    require(ring_n >= 2 && ring_n <= 12, "oracle.ring_n must be in [2, 12]");
    require(cdf_dt > 0.0, "oracle.cdf_dt must be positive");
    if (!grid.empty())
        time_grid();

    // keys each experiment needs
    const bool needs_grid = name == "survival" || name == "box-law" || name == "poisson" ||
                            name == "oracle-check";
    if (needs_grid) {
        require(!grid.empty(), name + " needs time.grid");
        require(horizon >= time_grid().back(), "time.horizon must cover time.grid");
    }
    const bool needs_times = name != "survival";
    if (needs_times && name != "oracle-check")
        require(!times.empty(), name + " needs time.times");
    if (name == "oracle-check")
        require(times.size() == 1, "oracle-check needs exactly one time in time.times");
    if (name == "poisson" || name == "clusters")
        require(times.size() == 1, name + " needs exactly one time in time.times");
    if (name == "yaglom")
        require(times.size() >= 2, "yaglom needs at least two times");
    if (dimension > 1)
        require(name != "oracle-check", "oracle-check runs on a ring (dimension 1)");
    if (name != "oracle-check")
        require(lambda < lambda_c_reference(dimension),
                "model.lambda must be below the critical value " +
                    format_double(lambda_c_reference(dimension)));
}

} // namespace cpsim
