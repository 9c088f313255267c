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

#include "cpsim/rng.hpp"

#include <cmath>

#include "cpsim/error.hpp"

namespace cpsim {

namespace {

constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85;
constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53;
constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t &lo, std::uint32_t &hi)
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo)
{
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
    return static_cast<double>(bits) * 0x1.0p-53;
}

} // namespace

Philox4x32::Counter Philox4x32::apply(Counter ctr, Key key)
{
    for (int round = 0; round < 10; ++round) {
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kPhiloxM4x32A, ctr[0], lo0, hi0);
        mulhilo(kPhiloxM4x32B, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW32A;
        key[1] += kPhiloxW32B;
    }
    return ctr;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t lane_id(const Site &x, int kind)
{
    constexpr std::int32_t kOffset = 1 << 14;
    std::uint64_t id = static_cast<std::uint64_t>(kind) & 0xF;
    for (int k = 0; k < kMaxDim; ++k) {
        const std::int32_t c = x[k] + kOffset;
        if (c < 0 || c >= (1 << 15))
            throw ParameterError("site coordinate out of lane-id range");
        id |= static_cast<std::uint64_t>(c) << (4 + 15 * k);
    }
    return id;
}

LaneStreams::LaneStreams(std::uint64_t seed, std::uint64_t replica)
{
    const std::uint64_t k = splitmix64(seed ^ splitmix64(replica + 0x632BE59BD9B4E019ULL));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

void LaneStreams::block_events(std::uint64_t lane, std::int64_t block, double rate,
                               std::vector<double> &out) const
{
    if (rate <= 0.0)
        return;
    const double start = static_cast<double>(block) * kLaneBlock;
    const double end = start + kLaneBlock;
    double t = start;
    std::uint32_t draw = 0;
    while (true) {
        const auto r = Philox4x32::apply({draw++, static_cast<std::uint32_t>(block),
                                          static_cast<std::uint32_t>(lane),
                                          static_cast<std::uint32_t>(lane >> 32)},
                                         key_);
        for (int half = 0; half < 2; ++half) {
            const double u = to_unit(r[2 * half], r[2 * half + 1]);
            t += -std::log1p(-u) / rate;
            if (t >= end)
                return;
            out.push_back(t);
        }
    }
}

void LaneStreams::lane_events(std::uint64_t lane, double horizon, double rate,
                              std::vector<double> &out) const
{
    if (horizon <= 0.0)
        return;
    const auto blocks = static_cast<std::int64_t>(std::ceil(horizon / kLaneBlock));
    for (std::int64_t b = 0; b < blocks; ++b)
        block_events(lane, b, rate, out);
    while (!out.empty() && out.back() > horizon)
        out.pop_back();
}

} // namespace cpsim
