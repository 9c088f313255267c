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

#include <array>
#include <cstdint>
#include <vector>

#include "cpsim/lattice.hpp"

namespace cpsim {

// Salmon et al. SC 2011. Parallel random numbers: as easy as 1, 2, 3.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter apply(Counter ctr, Key key);
};

std::uint64_t splitmix64(std::uint64_t x);

/// Lane kinds: 0 is the recovery lane of a site, 1 + dir the arrow lane
/// leaving the site in direction dir.
inline constexpr int kRecoveryLane = 0;
inline int arrow_lane(int dir) { return 1 + dir; }

/// Packs (lane kind, absolute site coordinates) into 64 bits. Coordinates
/// must lie in [-2^14, 2^14). The id does not depend on the window, so
/// enlarging a window leaves existing lanes untouched.
std::uint64_t lane_id(const Site &x, int kind);

/// Width of the time blocks a lane is cut into. Each block is an independent
/// counter stream, which gives O(1) access to the events near any time.
inline constexpr double kLaneBlock = 1.0;

/// Counter-based source of Poisson lanes. The k-th draw of block b of lane
/// l is Philox(counter = {k, b, l_lo, l_hi}, key = mix(seed, replica)), so
/// every event is a pure function of (seed, replica, lane, block).
class LaneStreams {
public:
    LaneStreams(std::uint64_t seed, std::uint64_t replica);

    /// Appends the event times of the lane falling in [b, b+1) for a Poisson
    /// process of the given rate, ascending, built from exponential spacings.
    void block_events(std::uint64_t lane, std::int64_t block, double rate,
                      std::vector<double> &out) const;

    /// Appends all events of the lane in [0, horizon].
    void lane_events(std::uint64_t lane, double horizon, double rate,
                     std::vector<double> &out) const;

private:
    Philox4x32::Key key_;
};

} // namespace cpsim
