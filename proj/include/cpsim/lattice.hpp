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
#include <optional>
#include <string>
#include <vector>

namespace cpsim {

inline constexpr int kMaxDim = 4;

/// A point of Z^d. Coordinates beyond the lattice dimension are zero, so the
/// default array ordering is the lexicographic order on Z^d.
using Site = std::array<std::int32_t, kMaxDim>;
using SiteIndex = std::int32_t;
inline constexpr SiteIndex kNoSite = -1;

std::int32_t sup_norm(const Site &x);
std::int32_t sup_distance(const Site &x, const Site &y);
std::int32_t l1_distance(const Site &x, const Site &y);
Site operator+(const Site &x, const Site &y);
Site operator-(const Site &x, const Site &y);
std::string to_string(const Site &x, int dim);

/// Finite simulation domain: either the box B_W = [-W, W]^d cut out of Z^d,
/// or a periodic ring of n sites (used by the exact finite-chain oracle).
///
/// Sites carry a dense index in [0, size()). Directions are numbered
/// 2*axis + {0: +e_axis, 1: -e_axis}. A box has no neighbour across its
/// border; on a ring of two sites both directions point at the other site.
class Lattice {
public:
    static Lattice box(int dim, int radius);
    static Lattice ring(int n);

    int dim() const { return dim_; }
    int radius() const { return radius_; }
    bool periodic() const { return periodic_; }
    SiteIndex size() const { return size_; }
    int degree() const { return 2 * dim_; }

    Site site(SiteIndex i) const;
    std::optional<SiteIndex> index(const Site &x) const;
    bool contains(const Site &x) const { return index(x).has_value(); }

    SiteIndex neighbor(SiteIndex i, int dir) const
    {
        return neighbors_[static_cast<std::size_t>(i) * degree() + dir];
    }
    /// True when some lattice neighbour of the site lies outside the window.
    bool on_boundary(SiteIndex i) const { return boundary_[i] != 0; }

    /// Indices of all sites x with ||x - center||_inf <= r, clipped to the window.
    std::vector<SiteIndex> ball(const Site &center, int r) const;

    bool operator==(const Lattice &other) const
    {
        return dim_ == other.dim_ && radius_ == other.radius_ && periodic_ == other.periodic_ &&
               size_ == other.size_;
    }

private:
    Lattice() = default;
    void build_tables();

    int dim_ = 1;
    int radius_ = 0;
    bool periodic_ = false;
    SiteIndex size_ = 0;
    std::vector<SiteIndex> neighbors_;
    std::vector<std::uint8_t> boundary_;
};

} // namespace cpsim
