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

#include "cpsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "cpsim/error.hpp"

namespace cpsim {

namespace {
constexpr double kNever = std::numeric_limits<double>::infinity();
}

ReplicaSimulator::ReplicaSimulator(Lattice lattice, double lambda)
    : lattice_(std::move(lattice)), lambda_(lambda), lanes_per_site_(1 + lattice_.degree())
{
    const auto n = static_cast<std::size_t>(lattice_.size());
    lane_ids_.resize(n * lanes_per_site_);
    lane_rates_.assign(n * lanes_per_site_, 0.0);
    for (SiteIndex x = 0; x < lattice_.size(); ++x) {
        const Site sx = lattice_.site(x);
        const std::size_t base = static_cast<std::size_t>(x) * lanes_per_site_;
        lane_ids_[base] = lane_id(sx, kRecoveryLane);
        lane_rates_[base] = 1.0;
        for (int dir = 0; dir < lattice_.degree(); ++dir) {
            lane_ids_[base + 1 + dir] = lane_id(sx, arrow_lane(dir));
            if (lattice_.neighbor(x, dir) != kNoSite)
                lane_rates_[base + 1 + dir] = lambda_;
        }
    }
    cursors_.resize(n * lanes_per_site_);
    infected_.assign(n, 0);
    influenced_.assign(n, 0);
    epoch_.assign(n, 0);
    site_touched_.assign(n, 0);
}

void ReplicaSimulator::reset()
{
    for (auto l : touched_lanes_) {
        cursors_[l].block = -1;
        cursors_[l].times.clear();
    }
    touched_lanes_.clear();
    for (auto x : touched_sites_) {
        infected_[x] = 0;
        influenced_[x] = 0;
        site_touched_[x] = 0;
    }
    touched_sites_.clear();
    heap_.clear();
}

double ReplicaSimulator::next_after(const LaneStreams &streams, std::uint32_t lane, double s,
                                    double horizon)
{
    const double rate = lane_rates_[lane];
    if (rate <= 0.0)
        return kNever;
    Cursor &c = cursors_[lane];
    if (c.block < 0)
        touched_lanes_.push_back(lane);
    const auto wanted = static_cast<std::int64_t>(std::floor(s / kLaneBlock));
    auto load = [&](std::int64_t b) {
        c.block = b;
        c.pos = 0;
        c.times.clear();
        streams.block_events(lane_ids_[lane], b, rate, c.times);
    };
    if (c.block < wanted)
        load(wanted);
    while (true) {
        while (c.pos < c.times.size() && c.times[c.pos] <= s)
            ++c.pos;
        if (c.pos < c.times.size())
            return c.times[c.pos];
        if (static_cast<double>(c.block + 1) * kLaneBlock > horizon)
            return kNever;
        load(c.block + 1);
    }
}

void ReplicaSimulator::schedule(const LaneStreams &streams, std::uint32_t lane, double s,
                                double horizon)
{
    const double t = next_after(streams, lane, s, horizon);
    if (t > horizon)
        return;
    const auto x = static_cast<SiteIndex>(lane / lanes_per_site_);
    heap_.push_back({t, lane, epoch_[x]});
    std::push_heap(heap_.begin(), heap_.end(), std::greater<>{});
}

void ReplicaSimulator::activate(const LaneStreams &streams, SiteIndex x, double s, double horizon)
{
    if (!site_touched_[x]) {
        site_touched_[x] = 1;
        touched_sites_.push_back(x);
    }
    const auto base = static_cast<std::uint32_t>(x) * lanes_per_site_;
    for (int k = 0; k < lanes_per_site_; ++k)
        schedule(streams, base + k, s, horizon);
}

ReplicaOutcome ReplicaSimulator::run(std::uint64_t seed, std::uint64_t replica,
                                     const ReplicaRequest &request)
{
    if (!std::is_sorted(request.snapshot_times.begin(), request.snapshot_times.end()))
        throw UsageError("snapshot times must be ascending");
    if (!request.snapshot_times.empty() && request.snapshot_times.back() > request.horizon)
        throw UsageError("snapshot after the horizon");
    reset();
    const LaneStreams streams(seed, replica);
    const double horizon = request.horizon;
    const bool track = request.track_boundary_influence;
    ReplicaOutcome out;

    std::size_t infected_count = 0;
    for (auto x : request.initial) {
        if (x < 0 || x >= lattice_.size())
            throw UsageError("initial site outside the window");
        if (infected_[x])
            continue;
        if (!site_touched_[x]) {
            site_touched_[x] = 1;
            touched_sites_.push_back(x);
        }
        infected_[x] = 1;
        ++infected_count;
        if (lattice_.on_boundary(x))
            out.touched_boundary = true;
    }
    if (track) {
        for (SiteIndex x = 0; x < lattice_.size(); ++x) {
            if (!lattice_.on_boundary(x))
                continue;
            if (!site_touched_[x]) {
                site_touched_[x] = 1;
                touched_sites_.push_back(x);
            }
            influenced_[x] = 1;
        }
    }
    for (auto x : touched_sites_)
        activate(streams, x, 0.0, horizon);
    if (infected_count == 0)
        out.absorption_time = 0.0;

    std::size_t next_snapshot = 0;
    auto take_snapshots = [&](double upto) {
        while (next_snapshot < request.snapshot_times.size() &&
               request.snapshot_times[next_snapshot] < upto) {
            std::vector<SiteIndex> snap, infl;
            for (auto x : touched_sites_) {
                if (infected_[x])
                    snap.push_back(x);
                if (track && influenced_[x])
                    infl.push_back(x);
            }
            std::sort(snap.begin(), snap.end());
            std::sort(infl.begin(), infl.end());
            out.snapshots.push_back(std::move(snap));
            if (track)
                out.influenced.push_back(std::move(infl));
            ++next_snapshot;
        }
    };

    const int lps = lanes_per_site_;
    while (!heap_.empty()) {
        if (infected_count == 0 && !track)
            break;
        std::pop_heap(heap_.begin(), heap_.end(), std::greater<>{});
        const Pending ev = heap_.back();
        heap_.pop_back();
        const auto x = static_cast<SiteIndex>(ev.lane / lps);
        if (ev.epoch != epoch_[x])
            continue;
        take_snapshots(ev.time);
        const int kind = static_cast<int>(ev.lane % lps);
        if (kind == kRecoveryLane) {
            if (infected_[x]) {
                infected_[x] = 0;
                if (--infected_count == 0)
                    out.absorption_time = ev.time;
            }
            if (!lattice_.on_boundary(x))
                influenced_[x] = 0;
            if (!infected_[x] && !influenced_[x])
                ++epoch_[x];
            else
                schedule(streams, ev.lane, ev.time, horizon);
            continue;
        }
        const SiteIndex y = lattice_.neighbor(x, kind - 1);
        const bool was_active = infected_[y] || influenced_[y];
        if (infected_[x] && !infected_[y]) {
            infected_[y] = 1;
            ++infected_count;
            if (lattice_.on_boundary(y))
                out.touched_boundary = true;
        }
        if (influenced_[x] && !influenced_[y])
            influenced_[y] = 1;
        if (!was_active && (infected_[y] || influenced_[y]))
            activate(streams, y, ev.time, horizon);
        schedule(streams, ev.lane, ev.time, horizon);
    }
    take_snapshots(kNever);
    return out;
}

} // namespace cpsim
