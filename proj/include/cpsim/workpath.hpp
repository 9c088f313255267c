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

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpsim/graphical.hpp"
#include "cpsim/process.hpp"

namespace cpsim {

/// Total order on the window's sites; `precedes(a, b)` reads "a has higher
/// priority than b".
class PriorityOrder {
public:
    /// (||x||_inf, then lexicographic): centre-first.
    static PriorityOrder center_out(const Lattice &lattice);
    static PriorityOrder lexicographic(const Lattice &lattice);
    /// The listed sites first, in the given order, then the rest centre-first.
    static PriorityOrder from_ranking(const Lattice &lattice, const std::vector<Site> &first);

    bool precedes(SiteIndex a, SiteIndex b) const { return rank_[a] < rank_[b]; }
    int rank(SiteIndex x) const { return rank_[x]; }
    /// Highest-priority element of a non-empty set.
    SiteIndex minimum(const std::vector<SiteIndex> &sites) const;

private:
    explicit PriorityOrder(std::vector<int> rank) : rank_(std::move(rank)) {}
    std::vector<int> rank_;
};

/// How a step of the minimal path was decided at an outgoing arrow
/// x_k -> y_k: (a) jump to higher-priority y that connects, (b) stay because
/// the higher-priority y does not connect, (c) stay because x_k still
/// connects, (d) jump because x_k no longer connects.
enum class StepCase { Start, A, B, C, D, Terminal };

std::string to_string(StepCase c);

struct PathStep {
    SiteIndex site;
    double time;
    StepCase label;
};

/// Piecewise-constant path (x_0, t_0) ... (x_n, t_n) with Gamma(s) = x_k on
/// [t_k, t_{k+1}).
struct WorkPath {
    const Lattice *lattice = nullptr;
    std::vector<PathStep> steps;
    std::vector<SiteIndex> target_sites;
    double target_time = 0.0;

    SiteIndex start() const { return steps.front().site; }
    double end_time() const { return steps.back().time; }
    SiteIndex at(double s) const;
    std::vector<double> jump_times() const;
    int jumps() const { return static_cast<int>(jump_times().size()); }

    /// Build a path from (site, time) points; consecutive equal sites are
    /// vertical continuations, differing sites are jumps.
    static WorkPath from_points(const Lattice &lattice, const std::vector<PathStep> &points);
};

nlohmann::json to_json(const WorkPath &path);

/// The minimal path Gamma^{A -> D} for D = target_sites x {target_time}, or
/// nullopt if A x {0} does not reach D. `index` must be the reachability
/// index of exactly this target on these events.
std::optional<WorkPath> minimal_path(const GraphicalEvents &events,
                                     const std::vector<SiteIndex> &initial,
                                     const std::vector<SiteIndex> &target_sites,
                                     double target_time, const PriorityOrder &order,
                                     const ReachabilityIndex &index);

/// Replays the path against the events: every vertical segment avoids
/// recovery marks on (t_{i-1}, t_i] and every jump rides an arrow.
bool is_open(const GraphicalEvents &events, const WorkPath &path);

struct BreakPoint {
    SiteIndex site = kNoSite;
    double time = 0.0;
    bool found = false;
};

/// Radius of the break-point ball, 2 * floor(beta t).
int break_radius(double beta, double t);

/// True iff (y, s) is a break point given the full-occupancy occupancy at s:
/// y is the only occupied site of its ball.
bool is_break_point(const Lattice &lattice, const std::vector<char> &occupancy, SiteIndex y,
                    int radius);

/// First break point along the path. The trajectory must be the evolution
/// of the full window from time 0 on the same events.
BreakPoint break_point(const GraphicalEvents &events, const WorkPath &path,
                       const Trajectory &full_occupancy, double beta, double t);

struct GoodPointReport {
    SpaceTimePoint point;
    double beta = 0.0;
    double t = 0.0;
    int budget = 0; // floor(beta t)
    int max_jumps = 0;
    bool is_good = false;
    std::optional<bool> sphere_good; // every point of D_{2 beta t}^z x {s} is good
    std::optional<bool> hat_good;    // is_good and sphere_good
};

GoodPointReport classify_good(const GraphicalEvents &events, const Site &z, double s,
                              double beta, double t, bool composite = false);

struct TimeInterval {
    double start;
    double end;
};

/// Greedy left-to-right disjoint intervals [s - sqrt t, s) inside [0, t/2]
/// on which the path jumps at most 4 beta (s - u) times during [u, s) for
/// every u in the interval.
std::vector<TimeInterval> favorable_intervals(const WorkPath &path, double beta, double t);

/// The favorable-interval predicate for a single right end point s.
bool is_favorable(const std::vector<double> &jump_times, double s, double length, double beta);

} // namespace cpsim
