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
#include <optional>
#include <span>
#include <vector>

#include "cpsim/lattice.hpp"

namespace cpsim {

/// Critical infection rate of the nearest-neighbour contact process on Z^d
/// (numerical literature values). Subcritical experiments require lambda
/// strictly below it.
double lambda_c_reference(int dim);

struct SimParams {
    int dimension = 1;
    double lambda = 1.0;
    double horizon = 1.0;
    int window_radius = 1;
    double beta = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t replica_index = 0;

    /// Positive window, non-negative finite horizon, positive rates.
    void validate() const;
    /// Additionally requires W >= ceil(beta t) + margin and lambda < lambda_c.
    void validate_subcritical(int margin) const;

    /// The integer jump budget floor(beta * t).
    int jump_budget() const;
};

/// ceil(beta t) + 2 ceil(beta t): the default window for a horizon t.
int default_window_radius(double beta, double t);

enum class EventKind : std::uint8_t { Recovery = 0, Arrow = 1 };

struct Event {
    double time;
    EventKind kind;
    SiteIndex site;   // recovering site, or arrow source
    SiteIndex target; // arrow destination, kNoSite for recoveries
    std::int8_t dir;  // arrow direction, -1 for recoveries
    std::uint32_t index;
};

struct SpaceTimePoint {
    Site site{};
    double time = 0.0;
};

/// Hand-specified event used to build fixtures and for event injection.
struct EventSpec {
    EventKind kind;
    Site site{};
    Site target{}; // arrows only
    double time;
};

/// Realized Harris construction on a finite window: recovery marks (rate 1)
/// per site and infection arrows (rate lambda) per directed edge, on
/// [0, horizon]. Immutable after construction.
///
/// The timeline orders all events by time, recoveries before arrows at equal
/// times, then by (site, direction); an event's index is its position.
class GraphicalEvents {
public:
    static GraphicalEvents generate(const SimParams &params);
    static GraphicalEvents generate(const Lattice &lattice, double lambda, double horizon,
                                    std::uint64_t seed, std::uint64_t replica);
    static GraphicalEvents from_specs(const Lattice &lattice, double lambda, double horizon,
                                      const std::vector<EventSpec> &specs);

    const Lattice &lattice() const { return lattice_; }
    double lambda() const { return lambda_; }
    double horizon() const { return horizon_; }

    std::span<const double> recoveries(SiteIndex x) const { return recoveries_[x]; }
    std::span<const double> arrows(SiteIndex x, int dir) const
    {
        return arrows_[static_cast<std::size_t>(x) * lattice_.degree() + dir];
    }
    const std::vector<Event> &timeline() const { return timeline_; }
    std::size_t size() const { return timeline_.size(); }

    std::vector<EventSpec> specs() const;
    /// Copy of these events with one more event injected.
    GraphicalEvents with_event(const EventSpec &spec) const;

    /// JSON-lines dump: one header line, then one line per event.
    void write_jsonl(std::ostream &os) const;
    static GraphicalEvents read_jsonl(std::istream &is);

private:
    GraphicalEvents(Lattice lattice, double lambda, double horizon);
    void add(const EventSpec &spec);
    void finalize();

    Lattice lattice_;
    double lambda_;
    double horizon_;
    std::vector<std::vector<double>> recoveries_;
    std::vector<std::vector<double>> arrows_;
    std::vector<Event> timeline_;
};

/// Direct depth-first search for an open path from `from` to `to`: vertical
/// segments (t_{i-1}, t_i] free of recovery marks, jumps along arrows.
bool open_path_exists(const GraphicalEvents &events, const SpaceTimePoint &from,
                      const SpaceTimePoint &to);

/// Answers "(x, s) ~> target_sites x {target_time}" for all s <= target_time.
///
/// Built by one backward sweep. Whether (x, s) connects only changes at
/// events on x's own lanes, so each site keeps a short sorted record list
/// and queries are a binary search.
class ReachabilityIndex {
public:
    ReachabilityIndex(const GraphicalEvents &events, std::vector<SiteIndex> target_sites,
                      double target_time);

    bool reachable(SiteIndex x, double s) const;
    /// Value on (s, s + epsilon): the point (x, s^+).
    bool reachable_after(SiteIndex x, double s) const;

    const std::vector<SiteIndex> &target_sites() const { return target_sites_; }
    double target_time() const { return target_time_; }
    bool targets(const std::vector<SiteIndex> &sites, double time) const;
    const GraphicalEvents *events() const { return events_; }

    /// True when some boundary site connects to the target at some time in
    /// [0, target_time], i.e. the target could feel the outside of the window.
    bool touches_boundary() const;

private:
    struct Record {
        double time;
        bool at;    // value at exactly `time`
        bool below; // value just before `time`
    };

    const GraphicalEvents *events_;
    std::vector<SiteIndex> target_sites_;
    double target_time_;
    std::vector<char> in_target_;
    std::vector<std::vector<Record>> records_;
};

/// Largest number of jumps over all lambda-paths (recovery marks ignored)
/// started at `from` within [from.time, from.time + duration]. Arrows with
/// equal times are taken in timeline order. Throws WindowOverflow when such a
/// path reaches the window boundary.
int max_lambda_path_jumps(const GraphicalEvents &events, const SpaceTimePoint &from,
                          double duration);

} // namespace cpsim
