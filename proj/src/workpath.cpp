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

#include "cpsim/workpath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cpsim/error.hpp"

namespace cpsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<SiteIndex> center_out_sequence(const Lattice &lattice)
{
    std::vector<SiteIndex> seq(lattice.size());
    std::iota(seq.begin(), seq.end(), 0);
    std::stable_sort(seq.begin(), seq.end(), [&](SiteIndex a, SiteIndex b) {
        const Site sa = lattice.site(a), sb = lattice.site(b);
        const auto na = sup_norm(sa), nb = sup_norm(sb);
        if (na != nb)
            return na < nb;
        return sa < sb;
    });
    return seq;
}

std::vector<int> ranks_of(const std::vector<SiteIndex> &seq)
{
    std::vector<int> rank(seq.size());
    for (std::size_t k = 0; k < seq.size(); ++k)
        rank[seq[k]] = static_cast<int>(k);
    return rank;
}

double next_recovery(const GraphicalEvents &events, SiteIndex x, double after)
{
    const auto r = events.recoveries(x);
    const auto it = std::upper_bound(r.begin(), r.end(), after);
    return it == r.end() ? kInf : *it;
}

} // namespace

PriorityOrder PriorityOrder::center_out(const Lattice &lattice)
{
    return PriorityOrder(ranks_of(center_out_sequence(lattice)));
}

PriorityOrder PriorityOrder::lexicographic(const Lattice &lattice)
{
    // Box indices already follow the lexicographic order.
    std::vector<SiteIndex> seq(lattice.size());
    std::iota(seq.begin(), seq.end(), 0);
    return PriorityOrder(ranks_of(seq));
}

PriorityOrder PriorityOrder::from_ranking(const Lattice &lattice, const std::vector<Site> &first)
{
    std::vector<SiteIndex> seq;
    std::vector<char> used(lattice.size(), 0);
    for (const auto &s : first) {
        const auto i = lattice.index(s);
        if (!i)
            throw UsageError("ranked site outside the window");
        if (used[*i])
            throw UsageError("site ranked twice");
        used[*i] = 1;
        seq.push_back(*i);
    }
    for (auto i : center_out_sequence(lattice))
        if (!used[i])
            seq.push_back(i);
    return PriorityOrder(ranks_of(seq));
}

SiteIndex PriorityOrder::minimum(const std::vector<SiteIndex> &sites) const
{
    if (sites.empty())
        throw UsageError("minimum of an empty set");
    return *std::min_element(sites.begin(), sites.end(),
                             [&](SiteIndex a, SiteIndex b) { return precedes(a, b); });
}

std::string to_string(StepCase c)
{
    switch (c) {
    case StepCase::Start:
        return "start";
    case StepCase::A:
        return "a";
    case StepCase::B:
        return "b";
    case StepCase::C:
        return "c";
    case StepCase::D:
        return "d";
    case StepCase::Terminal:
        return "terminal";
    }
    return "?";
}

SiteIndex WorkPath::at(double s) const
{
    auto it = std::upper_bound(steps.begin(), steps.end(), s,
                               [](double v, const PathStep &p) { return v < p.time; });
    if (it == steps.begin())
        return steps.front().site;
    return std::prev(it)->site;
}

std::vector<double> WorkPath::jump_times() const
{
    std::vector<double> out;
    for (std::size_t k = 1; k < steps.size(); ++k)
        if (steps[k].site != steps[k - 1].site)
            out.push_back(steps[k].time);
    return out;
}

WorkPath WorkPath::from_points(const Lattice &lattice, const std::vector<PathStep> &points)
{
    if (points.empty())
        throw UsageError("empty path");
    WorkPath p;
    p.lattice = &lattice;
    p.steps = points;
    p.steps.front().label = StepCase::Start;
    for (std::size_t k = 1; k < p.steps.size(); ++k) {
        if (p.steps[k].time < p.steps[k - 1].time)
            throw UsageError("path times must be non-decreasing");
        p.steps[k].label = p.steps[k].site != p.steps[k - 1].site ? StepCase::D : StepCase::C;
    }
    if (p.steps.size() > 1)
        p.steps.back().label = StepCase::Terminal;
    p.target_sites = {p.steps.back().site};
    p.target_time = p.steps.back().time;
    return p;
}

nlohmann::json to_json(const WorkPath &path)
{
    auto j = nlohmann::json::array();
    const int d = path.lattice->dim();
    for (const auto &s : path.steps) {
        const Site x = path.lattice->site(s.site);
        auto coords = nlohmann::json::array();
        for (int k = 0; k < d; ++k)
            coords.push_back(x[k]);
        j.push_back({coords, s.time, to_string(s.label)});
    }
    return j;
}

std::optional<WorkPath> minimal_path(const GraphicalEvents &events,
                                     const std::vector<SiteIndex> &initial,
                                     const std::vector<SiteIndex> &target_sites,
                                     double target_time, const PriorityOrder &order,
                                     const ReachabilityIndex &index)
{
    if (initial.empty())
        throw UsageError("minimal_path needs a non-empty initial set");
    if (index.events() != &events || !index.targets(target_sites, target_time))
        throw UsageError("reachability index was built for a different target");
    const Lattice &lat = events.lattice();

    std::vector<SiteIndex> live;
    for (auto x : initial)
        if (index.reachable(x, 0.0))
            live.push_back(x);
    if (live.empty())
        return std::nullopt;

    std::vector<char> in_target(lat.size(), 0);
    for (auto x : target_sites)
        in_target[x] = 1;

    WorkPath path;
    path.lattice = &lat;
    path.target_sites = target_sites;
    path.target_time = target_time;
    SiteIndex x = order.minimum(live);
    double t = 0.0;
    path.steps.push_back({x, 0.0, StepCase::Start});

    auto check = [](bool ok) {
        if (!ok)
            throw Error("minimal path: chosen branch does not reach the target");
    };

    while (true) {
        double tau = kInf;
        SiteIndex y = kNoSite;
        for (int dir = 0; dir < lat.degree(); ++dir) {
            const auto a = events.arrows(x, dir);
            const auto it = std::upper_bound(a.begin(), a.end(), t);
            if (it != a.end() && *it < tau) {
                tau = *it;
                y = lat.neighbor(x, dir);
            }
        }
        if (tau >= target_time) {
            check(in_target[x] && next_recovery(events, x, t) > target_time);
            path.steps.push_back({x, target_time, StepCase::Terminal});
            return path;
        }
        StepCase label;
        if (order.precedes(y, x)) {
            if (index.reachable(y, tau)) {
                label = StepCase::A;
                x = y;
            } else {
                label = StepCase::B;
            }
        } else if (index.reachable_after(x, tau)) {
            label = StepCase::C;
        } else {
            label = StepCase::D;
            x = y;
        }
        if (label == StepCase::A || label == StepCase::D)
            check(index.reachable(x, tau));
        else
            check(index.reachable_after(x, tau));
        t = tau;
        path.steps.push_back({x, t, label});
    }
}

bool is_open(const GraphicalEvents &events, const WorkPath &path)
{
    const Lattice &lat = events.lattice();
    for (std::size_t k = 1; k < path.steps.size(); ++k) {
        const auto &prev = path.steps[k - 1];
        const auto &cur = path.steps[k];
        if (cur.time < prev.time)
            return false;
        if (next_recovery(events, prev.site, prev.time) <= cur.time)
            return false;
        if (cur.site == prev.site)
            continue;
        bool rides = false;
        for (int dir = 0; dir < lat.degree() && !rides; ++dir) {
            if (lat.neighbor(prev.site, dir) != cur.site)
                continue;
            const auto a = events.arrows(prev.site, dir);
            rides = std::binary_search(a.begin(), a.end(), cur.time);
        }
        if (!rides)
            return false;
    }
    return true;
}

int break_radius(double beta, double t)
{
    return 2 * static_cast<int>(std::floor(beta * t));
}

bool is_break_point(const Lattice &lattice, const std::vector<char> &occupancy, SiteIndex y,
                    int radius)
{
    if (!occupancy[y])
        return false;
    for (auto x : lattice.ball(lattice.site(y), radius))
        if (x != y && occupancy[x])
            return false;
    return true;
}

BreakPoint break_point(const GraphicalEvents &events, const WorkPath &path,
                       const Trajectory &full_occupancy, double beta, double t)
{
    const Lattice &lat = events.lattice();
    if (full_occupancy.events != &events)
        throw UsageError("trajectory was recorded on different events");
    if (full_occupancy.start != 0.0 ||
        full_occupancy.initial.size() != static_cast<std::size_t>(lat.size()))
        throw UsageError("break points need the full-window trajectory from time 0");
    if (path.steps.empty() || path.lattice == nullptr || !(*path.lattice == lat))
        throw UsageError("path does not belong to these events");
    const double end = path.end_time();
    if (full_occupancy.end < end)
        throw UsageError("trajectory ends before the path");

    const int r = break_radius(beta, t);
    std::vector<double> when = {0.0};
    for (const auto &c : full_occupancy.changes)
        if (c.time <= end)
            when.push_back(c.time);
    for (const auto &s : path.steps)
        when.push_back(s.time);
    std::sort(when.begin(), when.end());
    when.erase(std::unique(when.begin(), when.end()), when.end());

    std::vector<char> occ(lat.size(), 0);
    for (auto x : full_occupancy.initial)
        occ[x] = 1;
    std::size_t next = 0;
    for (double s : when) {
        while (next < full_occupancy.changes.size() && full_occupancy.changes[next].time <= s) {
            occ[full_occupancy.changes[next].site] = full_occupancy.changes[next].infected;
            ++next;
        }
        const SiteIndex y = path.at(s);
        if (s < end && is_break_point(lat, occ, y, r))
            return {y, s, true};
    }
    return {path.steps.back().site, end, false};
}

GoodPointReport classify_good(const GraphicalEvents &events, const Site &z, double s,
                              double beta, double t, bool composite)
{
    if (s + t > events.horizon())
        throw UsageError("good-point window extends past the horizon");
    const Lattice &lat = events.lattice();
    if (!lat.index(z))
        throw WindowOverflow("good-point site outside the window");
    GoodPointReport rep;
    rep.point = {z, s};
    rep.beta = beta;
    rep.t = t;
    rep.budget = static_cast<int>(std::floor(beta * t));
    rep.max_jumps = max_lambda_path_jumps(events, {z, s}, t);
    rep.is_good = rep.max_jumps < rep.budget;
    if (composite) {
        const int r = 2 * rep.budget;
        auto inside = lat.ball(z, r);
        // A clipped ball means part of the sphere lies outside.
        std::size_t full = 1;
        for (int k = 0; k < lat.dim(); ++k)
            full *= static_cast<std::size_t>(2 * r + 1);
        if (inside.size() != full)
            throw WindowOverflow("sphere around the good point leaves the window");
        bool all = true;
        for (auto x : inside) {
            if (sup_distance(lat.site(x), z) != r)
                continue;
            if (max_lambda_path_jumps(events, {lat.site(x), s}, t) >= rep.budget) {
                all = false;
                break;
            }
        }
        rep.sphere_good = all;
        rep.hat_good = all && rep.is_good;
    }
    return rep;
}

bool is_favorable(const std::vector<double> &jump_times, double s, double length, double beta)
{
    const double u0 = s - length;
    // The worst u for a given jump count is the jump time itself.
    auto lo = std::lower_bound(jump_times.begin(), jump_times.end(), u0);
    auto hi = std::lower_bound(jump_times.begin(), jump_times.end(), s);
    for (auto it = lo; it != hi; ++it) {
        const auto count = static_cast<double>(hi - it);
        if (count > 4.0 * beta * (s - *it))
            return false;
    }
    return true;
}

std::vector<TimeInterval> favorable_intervals(const WorkPath &path, double beta, double t)
{
    const double len = std::sqrt(t);
    const double last = t / 2.0;
    auto jumps = path.jump_times();
    std::sort(jumps.begin(), jumps.end());

    // The predicate can only turn true at s_min, at j + c/(4 beta), or just
    // after a jump leaves the window at j + sqrt(t).
    std::vector<double> cand;
    for (std::size_t k = 0; k < jumps.size(); ++k) {
        const double j = jumps[k];
        const std::size_t after = jumps.size() - k;
        for (std::size_t c = 1; c <= after; ++c)
            cand.push_back(j + static_cast<double>(c) / (4.0 * beta));
        cand.push_back(std::nextafter(j + len, kInf));
        cand.push_back(std::nextafter(j, kInf));
    }
    std::sort(cand.begin(), cand.end());

    std::vector<TimeInterval> out;
    double s_min = len;
    while (s_min <= last) {
        double chosen = kInf;
        if (is_favorable(jumps, s_min, len, beta)) {
            chosen = s_min;
        } else {
            for (auto it = std::lower_bound(cand.begin(), cand.end(), s_min);
                 it != cand.end() && *it <= last; ++it) {
                if (is_favorable(jumps, *it, len, beta)) {
                    chosen = *it;
                    break;
                }
            }
        }
        if (chosen > last)
            break;
        out.push_back({chosen - len, chosen});
        s_min = chosen + len;
        while (s_min - len < chosen)
            s_min = std::nextafter(s_min, kInf);
    }
    return out;
}

} // namespace cpsim
