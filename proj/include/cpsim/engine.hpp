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
#include <optional>
#include <vector>

#include "cpsim/lattice.hpp"
#include "cpsim/rng.hpp"

namespace cpsim {

struct ReplicaRequest {
    std::vector<SiteIndex> initial;
    /// Ascending times at which the infected set is recorded.
    std::vector<double> snapshot_times;
    double horizon = 0.0;
    /// Also follow the set of sites an open path from the window boundary
    /// (at any time) can reach. A site outside that set has the same state
    /// in the window process and in the process on all of Z^d.
    bool track_boundary_influence = false;
};

struct ReplicaOutcome {
    std::optional<double> absorption_time;
    bool touched_boundary = false;
    std::vector<std::vector<SiteIndex>> snapshots;
    /// Boundary-influenced sites at each snapshot (only when tracked).
    std::vector<std::vector<SiteIndex>> influenced;
};

/// Event-driven contact process that draws lane events on demand from the
/// same counter-based streams GraphicalEvents::generate materializes, so a
/// replica here and a materialized replica with equal (seed, replica) agree
/// exactly. Only lanes of infected (or influenced) sites are ever drawn.
///
/// Not thread-safe: holds per-replica scratch state. Use one per thread.
class ReplicaSimulator {
public:
    ReplicaSimulator(Lattice lattice, double lambda);

    const Lattice &lattice() const { return lattice_; }
    double lambda() const { return lambda_; }

    ReplicaOutcome run(std::uint64_t seed, std::uint64_t replica, const ReplicaRequest &request);

private:
    struct Cursor {
        std::int64_t block = -1;
        std::uint32_t pos = 0;
        std::vector<double> times;
    };
    struct Pending {
        double time;
        std::uint32_t lane;
        std::uint32_t epoch;
        bool operator>(const Pending &o) const
        {
            return time != o.time ? time > o.time : lane > o.lane;
        }
    };

    double next_after(const LaneStreams &streams, std::uint32_t lane, double s, double horizon);
    void activate(const LaneStreams &streams, SiteIndex x, double s, double horizon);
    void schedule(const LaneStreams &streams, std::uint32_t lane, double s, double horizon);
    void reset();

    Lattice lattice_;
    double lambda_;
    int lanes_per_site_;
    std::vector<std::uint64_t> lane_ids_;
    std::vector<double> lane_rates_;
    std::vector<Cursor> cursors_;
    std::vector<std::uint32_t> touched_lanes_;
    std::vector<char> infected_;
    std::vector<char> influenced_;
    std::vector<std::uint32_t> epoch_;
    std::vector<SiteIndex> touched_sites_;
    std::vector<char> site_touched_;
    std::vector<Pending> heap_;
};

} // namespace cpsim
