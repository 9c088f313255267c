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

#include "cpsim/graphical.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <string>

#include <json.hpp>

#include "cpsim/error.hpp"
#include "cpsim/rng.hpp"

namespace cpsim {

using nlohmann::json;

double lambda_c_reference(int dim)
{
    switch (dim) {
    case 1:
        return 1.6489;
    case 2:
        return 0.4122;
    case 3:
        return 0.2216;
    default:
        throw ParameterError("no reference critical value for d = " + std::to_string(dim));
    }
}

void SimParams::validate() const
{
    if (dimension < 1 || dimension > kMaxDim)
        throw ParameterError("dimension must be in [1, 4]");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw ParameterError("lambda must be positive and finite");
    if (!(horizon >= 0.0) || !std::isfinite(horizon))
        throw ParameterError("horizon must be non-negative and finite");
    if (window_radius <= 0)
        throw ParameterError("window_radius must be positive");
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw ParameterError("beta must be positive and finite");
}

void SimParams::validate_subcritical(int margin) const
{
    validate();
    if (!(lambda < lambda_c_reference(dimension)))
        throw ParameterError("lambda must be strictly below the critical reference value");
    const int need = static_cast<int>(std::ceil(beta * horizon)) + margin;
    if (window_radius < need)
        throw ParameterError("window_radius " + std::to_string(window_radius) +
                             " below ceil(beta t) + margin = " + std::to_string(need));
}

int SimParams::jump_budget() const { return static_cast<int>(std::floor(beta * horizon)); }

int default_window_radius(double beta, double t)
{
    const int bt = static_cast<int>(std::ceil(beta * t));
    return std::max(1, 3 * bt);
}

GraphicalEvents::GraphicalEvents(Lattice lattice, double lambda, double horizon)
    : lattice_(std::move(lattice)), lambda_(lambda), horizon_(horizon),
      recoveries_(lattice_.size()),
      arrows_(static_cast<std::size_t>(lattice_.size()) * lattice_.degree())
{
}

GraphicalEvents GraphicalEvents::generate(const SimParams &params)
{
    params.validate();
    return generate(Lattice::box(params.dimension, params.window_radius), params.lambda,
                    params.horizon, params.seed, params.replica_index);
}

GraphicalEvents GraphicalEvents::generate(const Lattice &lattice, double lambda, double horizon,
                                          std::uint64_t seed, std::uint64_t replica)
{
    if (!(horizon >= 0.0))
        throw ParameterError("horizon must be non-negative");
    GraphicalEvents ev(lattice, lambda, horizon);
    const LaneStreams streams(seed, replica);
    const int deg = lattice.degree();
    for (SiteIndex x = 0; x < lattice.size(); ++x) {
        const Site sx = lattice.site(x);
        streams.lane_events(lane_id(sx, kRecoveryLane), horizon, 1.0, ev.recoveries_[x]);
        for (int dir = 0; dir < deg; ++dir) {
            if (lattice.neighbor(x, dir) == kNoSite)
                continue;
            streams.lane_events(lane_id(sx, arrow_lane(dir)), horizon, lambda,
                                ev.arrows_[static_cast<std::size_t>(x) * deg + dir]);
        }
    }
    ev.finalize();
    return ev;
}

GraphicalEvents GraphicalEvents::from_specs(const Lattice &lattice, double lambda,
                                            double horizon, const std::vector<EventSpec> &specs)
{
    GraphicalEvents ev(lattice, lambda, horizon);
    for (const auto &s : specs)
        ev.add(s);
    ev.finalize();
    return ev;
}

void GraphicalEvents::add(const EventSpec &spec)
{
    if (!(spec.time >= 0.0 && spec.time <= horizon_))
        throw UsageError("event time outside [0, horizon]");
    const auto x = lattice_.index(spec.site);
    if (!x)
        throw UsageError("event site outside the window: " + to_string(spec.site, lattice_.dim()));
    if (spec.kind == EventKind::Recovery) {
        recoveries_[*x].push_back(spec.time);
        return;
    }
    const auto y = lattice_.index(spec.target);
    if (!y)
        throw UsageError("arrow target outside the window");
    for (int dir = 0; dir < lattice_.degree(); ++dir) {
        if (lattice_.neighbor(*x, dir) == *y) {
            arrows_[static_cast<std::size_t>(*x) * lattice_.degree() + dir].push_back(spec.time);
            return;
        }
    }
    throw UsageError("arrow endpoints are not nearest neighbours");
}

void GraphicalEvents::finalize()
{
    auto check_lane = [](std::vector<double> &lane) {
        std::sort(lane.begin(), lane.end());
        if (std::adjacent_find(lane.begin(), lane.end()) != lane.end())
            throw UsageError("two events share a time on one lane");
    };
    const int deg = lattice_.degree();
    timeline_.clear();
    for (SiteIndex x = 0; x < lattice_.size(); ++x) {
        check_lane(recoveries_[x]);
        for (double t : recoveries_[x])
            timeline_.push_back({t, EventKind::Recovery, x, kNoSite, -1, 0});
        for (int dir = 0; dir < deg; ++dir) {
            auto &lane = arrows_[static_cast<std::size_t>(x) * deg + dir];
            check_lane(lane);
            for (double t : lane)
                timeline_.push_back({t, EventKind::Arrow, x, lattice_.neighbor(x, dir),
                                     static_cast<std::int8_t>(dir), 0});
        }
    }
    std::sort(timeline_.begin(), timeline_.end(), [](const Event &a, const Event &b) {
        if (a.time != b.time)
            return a.time < b.time;
        if (a.kind != b.kind)
            return a.kind < b.kind;
        if (a.site != b.site)
            return a.site < b.site;
        return a.dir < b.dir;
    });
    for (std::size_t i = 0; i < timeline_.size(); ++i)
        timeline_[i].index = static_cast<std::uint32_t>(i);
}

std::vector<EventSpec> GraphicalEvents::specs() const
{
    std::vector<EventSpec> out;
    out.reserve(timeline_.size());
    for (const auto &e : timeline_) {
        EventSpec s{e.kind, lattice_.site(e.site), {}, e.time};
        if (e.kind == EventKind::Arrow)
            s.target = lattice_.site(e.target);
        out.push_back(s);
    }
    return out;
}

GraphicalEvents GraphicalEvents::with_event(const EventSpec &spec) const
{
    GraphicalEvents ev = *this;
    ev.add(spec);
    ev.finalize();
    return ev;
}

namespace {

json site_json(const Site &x, int dim) { return std::vector<int>(x.begin(), x.begin() + dim); }

Site site_from_json(const json &j)
{
    Site x{};
    const auto v = j.get<std::vector<int>>();
    if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDim))
        throw UsageError("bad site in event dump");
    std::copy(v.begin(), v.end(), x.begin());
    return x;
}

} // namespace

void GraphicalEvents::write_jsonl(std::ostream &os) const
{
    const int dim = lattice_.dim();
    json header = {{"kind", "header"},
                   {"topology", lattice_.periodic() ? "ring" : "box"},
                   {"dimension", dim},
                   {"window_radius", lattice_.radius()},
                   {"lambda", lambda_},
                   {"horizon", horizon_}};
    os << header.dump() << '\n';
    for (const auto &e : timeline_) {
        json j;
        if (e.kind == EventKind::Recovery) {
            j = {{"kind", "recovery"}, {"site", site_json(lattice_.site(e.site), dim)}};
        } else {
            j = {{"kind", "arrow"},
                 {"site", site_json(lattice_.site(e.site), dim)},
                 {"target", site_json(lattice_.site(e.target), dim)}};
        }
        j["time"] = e.time;
        j["index"] = e.index;
        os << j.dump(-1, ' ', false, json::error_handler_t::strict) << '\n';
    }
}

GraphicalEvents GraphicalEvents::read_jsonl(std::istream &is)
{
    std::string line;
    if (!std::getline(is, line))
        throw UsageError("empty event dump");
    const json header = json::parse(line);
    if (header.at("kind") != "header")
        throw UsageError("event dump must start with a header line");
    const Lattice lattice = header.at("topology") == "ring"
                                ? Lattice::ring(header.at("window_radius").get<int>())
                                : Lattice::box(header.at("dimension").get<int>(),
                                               header.at("window_radius").get<int>());
    std::vector<EventSpec> specs;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        const json j = json::parse(line);
        const auto kind = j.at("kind").get<std::string>();
        EventSpec s{EventKind::Recovery, site_from_json(j.at("site")), {},
                    j.at("time").get<double>()};
        if (kind == "arrow") {
            s.kind = EventKind::Arrow;
            s.target = site_from_json(j.at("target"));
        } else if (kind != "recovery") {
            throw UsageError("unknown event kind '" + kind + "'");
        }
        specs.push_back(s);
    }
    return from_specs(lattice, header.at("lambda").get<double>(),
                      header.at("horizon").get<double>(), specs);
}

bool open_path_exists(const GraphicalEvents &events, const SpaceTimePoint &from,
                      const SpaceTimePoint &to)
{
    if (from.time > to.time)
        throw UsageError("open_path_exists: from.time > to.time");
    const Lattice &lat = events.lattice();
    const auto fx = lat.index(from.site);
    const auto tx = lat.index(to.site);
    if (!fx || !tx)
        throw UsageError("open_path_exists: point outside the window");

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<std::pair<SiteIndex, double>> stack{{*fx, from.time}};
    std::set<std::pair<SiteIndex, double>> seen{{*fx, from.time}};
    while (!stack.empty()) {
        const auto [x, tau] = stack.back();
        stack.pop_back();
        const auto rec = events.recoveries(x);
        const auto it = std::upper_bound(rec.begin(), rec.end(), tau);
        const double next_recovery = it == rec.end() ? kInf : *it;
        if (x == *tx && next_recovery > to.time)
            return true;
        for (int dir = 0; dir < lat.degree(); ++dir) {
            const SiteIndex y = lat.neighbor(x, dir);
            if (y == kNoSite)
                continue;
            const auto lane = events.arrows(x, dir);
            for (auto a = std::lower_bound(lane.begin(), lane.end(), tau); a != lane.end(); ++a) {
                if (*a > to.time || *a >= next_recovery)
                    break;
                if (seen.insert({y, *a}).second)
                    stack.emplace_back(y, *a);
            }
        }
    }
    return false;
}

ReachabilityIndex::ReachabilityIndex(const GraphicalEvents &events,
                                     std::vector<SiteIndex> target_sites, double target_time)
    : events_(&events), target_sites_(std::move(target_sites)), target_time_(target_time)
{
    if (target_time > events.horizon())
        throw UsageError("reachability target beyond the horizon");
    std::sort(target_sites_.begin(), target_sites_.end());
    target_sites_.erase(std::unique(target_sites_.begin(), target_sites_.end()),
                        target_sites_.end());
    const SiteIndex n = events.lattice().size();
    in_target_.assign(n, 0);
    for (auto x : target_sites_) {
        if (x < 0 || x >= n)
            throw UsageError("reachability target outside the window");
        in_target_[x] = 1;
    }
    records_.assign(n, {});

    std::vector<char> reach = in_target_;
    std::vector<char> at_value(n, 0);
    std::vector<SiteIndex> involved;
    const auto &tl = events.timeline();
    auto hi = std::upper_bound(tl.begin(), tl.end(), target_time,
                               [](double t, const Event &e) { return t < e.time; });
    std::ptrdiff_t i = (hi - tl.begin()) - 1;
    while (i >= 0) {
        const double sigma = tl[i].time;
        std::ptrdiff_t j = i;
        while (j > 0 && tl[j - 1].time == sigma)
            --j;
        // Value at exactly sigma: closure over the simultaneous arrows.
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::ptrdiff_t k = j; k <= i; ++k) {
                const Event &e = tl[k];
                if (e.kind == EventKind::Arrow && !reach[e.site] && reach[e.target]) {
                    reach[e.site] = 1;
                    changed = true;
                }
            }
        }
        involved.clear();
        for (std::ptrdiff_t k = j; k <= i; ++k)
            involved.push_back(tl[k].site);
        std::sort(involved.begin(), involved.end());
        involved.erase(std::unique(involved.begin(), involved.end()), involved.end());
        for (auto x : involved)
            at_value[x] = reach[x];
        // Just below sigma, a recovery mark at sigma blocks the vertical segment.
        for (std::ptrdiff_t k = j; k <= i; ++k)
            if (tl[k].kind == EventKind::Recovery)
                reach[tl[k].site] = 0;
        for (auto x : involved)
            records_[x].push_back({sigma, at_value[x] != 0, reach[x] != 0});
        i = j - 1;
    }
    for (auto &r : records_)
        std::reverse(r.begin(), r.end());
}

bool ReachabilityIndex::reachable(SiteIndex x, double s) const
{
    if (s > target_time_)
        throw UsageError("reachability query after the target time");
    const auto &r = records_[x];
    auto it = std::lower_bound(r.begin(), r.end(), s,
                               [](const Record &a, double t) { return a.time < t; });
    if (it == r.end())
        return in_target_[x] != 0;
    return it->time == s ? it->at : it->below;
}

bool ReachabilityIndex::reachable_after(SiteIndex x, double s) const
{
    if (s > target_time_)
        throw UsageError("reachability query after the target time");
    const auto &r = records_[x];
    auto it = std::upper_bound(r.begin(), r.end(), s,
                               [](double t, const Record &a) { return t < a.time; });
    if (it == r.end())
        return in_target_[x] != 0;
    return it->below;
}

bool ReachabilityIndex::targets(const std::vector<SiteIndex> &sites, double time) const
{
    std::vector<SiteIndex> s = sites;
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return time == target_time_ && s == target_sites_;
}

bool ReachabilityIndex::touches_boundary() const
{
    const Lattice &lat = events_->lattice();
    for (SiteIndex x = 0; x < lat.size(); ++x) {
        if (!lat.on_boundary(x))
            continue;
        if (in_target_[x])
            return true;
        for (const auto &r : records_[x])
            if (r.at || r.below)
                return true;
    }
    return false;
}

int max_lambda_path_jumps(const GraphicalEvents &events, const SpaceTimePoint &from,
                          double duration)
{
    if (!(duration >= 0.0))
        throw UsageError("negative duration");
    const Lattice &lat = events.lattice();
    const auto z = lat.index(from.site);
    if (!z)
        throw UsageError("start point outside the window");
    const double end = from.time + duration;
    if (end > events.horizon())
        throw UsageError("lambda-path window exceeds the event horizon");
    if (lat.on_boundary(*z))
        throw WindowOverflow("lambda-path start lies on the window boundary");
    std::vector<int> jumps(lat.size(), -1);
    jumps[*z] = 0;
    int best = 0;
    const auto &tl = events.timeline();
    auto it = std::lower_bound(tl.begin(), tl.end(), from.time,
                               [](const Event &e, double t) { return e.time < t; });
    for (; it != tl.end() && it->time <= end; ++it) {
        if (it->kind != EventKind::Arrow || jumps[it->site] < 0)
            continue;
        const int candidate = jumps[it->site] + 1;
        if (candidate > jumps[it->target]) {
            jumps[it->target] = candidate;
            best = std::max(best, candidate);
            if (lat.on_boundary(it->target))
                throw WindowOverflow("lambda-path reached the window boundary");
        }
    }
    return best;
}

} // namespace cpsim
