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

#include "cpsim/lattice.hpp"

#include <algorithm>
#include <cstdlib>

#include "cpsim/error.hpp"

namespace cpsim {

std::int32_t sup_norm(const Site &x)
{
    std::int32_t m = 0;
    for (auto c : x)
        m = std::max(m, std::abs(c));
    return m;
}

std::int32_t sup_distance(const Site &x, const Site &y) { return sup_norm(x - y); }

std::int32_t l1_distance(const Site &x, const Site &y)
{
    std::int32_t s = 0;
    for (int k = 0; k < kMaxDim; ++k)
        s += std::abs(x[k] - y[k]);
    return s;
}

Site operator+(const Site &x, const Site &y)
{
    Site r{};
    for (int k = 0; k < kMaxDim; ++k)
        r[k] = x[k] + y[k];
    return r;
}

Site operator-(const Site &x, const Site &y)
{
    Site r{};
    for (int k = 0; k < kMaxDim; ++k)
        r[k] = x[k] - y[k];
    return r;
}

std::string to_string(const Site &x, int dim)
{
    std::string s = "(";
    for (int k = 0; k < dim; ++k) {
        if (k)
            s += ",";
        s += std::to_string(x[k]);
    }
    return s + ")";
}

Lattice Lattice::box(int dim, int radius)
{
    if (dim < 1 || dim > kMaxDim)
        throw ParameterError("lattice dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    if (radius <= 0)
        throw ParameterError("window radius must be positive");
    long long side = 2LL * radius + 1;
    long long n = 1;
    for (int k = 0; k < dim; ++k) {
        n *= side;
        if (n > (1LL << 30))
            throw ParameterError("window too large");
    }
    Lattice l;
    l.dim_ = dim;
    l.radius_ = radius;
    l.periodic_ = false;
    l.size_ = static_cast<SiteIndex>(n);
    l.build_tables();
    return l;
}

Lattice Lattice::ring(int n)
{
    if (n < 2)
        throw ParameterError("ring needs at least two sites");
    Lattice l;
    l.dim_ = 1;
    l.radius_ = n;
    l.periodic_ = true;
    l.size_ = n;
    l.build_tables();
    return l;
}

// Box indices put axis 0 in the most significant position, so increasing
// index is lexicographic order of sites.
Site Lattice::site(SiteIndex i) const
{
    Site x{};
    if (periodic_) {
        x[0] = i;
        return x;
    }
    const SiteIndex side = 2 * radius_ + 1;
    for (int k = dim_ - 1; k >= 0; --k) {
        x[k] = i % side - radius_;
        i /= side;
    }
    return x;
}

std::optional<SiteIndex> Lattice::index(const Site &x) const
{
    for (int k = dim_; k < kMaxDim; ++k)
        if (x[k] != 0)
            return std::nullopt;
    if (periodic_) {
        if (x[0] < 0 || x[0] >= size_)
            return std::nullopt;
        return x[0];
    }
    const SiteIndex side = 2 * radius_ + 1;
    SiteIndex idx = 0;
    for (int k = 0; k < dim_; ++k) {
        if (x[k] < -radius_ || x[k] > radius_)
            return std::nullopt;
        idx = idx * side + (x[k] + radius_);
    }
    return idx;
}

void Lattice::build_tables()
{
    const int deg = degree();
    neighbors_.assign(static_cast<std::size_t>(size_) * deg, kNoSite);
    boundary_.assign(size_, 0);
    for (SiteIndex i = 0; i < size_; ++i) {
        if (periodic_) {
            neighbors_[static_cast<std::size_t>(i) * deg + 0] = (i + 1) % size_;
            neighbors_[static_cast<std::size_t>(i) * deg + 1] = (i + size_ - 1) % size_;
            continue;
        }
        const Site x = site(i);
        for (int axis = 0; axis < dim_; ++axis) {
            for (int sign = 0; sign < 2; ++sign) {
                Site y = x;
                y[axis] += sign == 0 ? 1 : -1;
                auto j = index(y);
                neighbors_[static_cast<std::size_t>(i) * deg + 2 * axis + sign] = j ? *j : kNoSite;
                if (!j)
                    boundary_[i] = 1;
            }
        }
    }
}

std::vector<SiteIndex> Lattice::ball(const Site &center, int r) const
{
    std::vector<SiteIndex> out;
    if (r < 0)
        return out;
    if (periodic_) {
        for (SiteIndex i = 0; i < size_; ++i) {
            int d = std::abs(i - center[0]);
            d = std::min(d, size_ - d);
            if (d <= r)
                out.push_back(i);
        }
        return out;
    }
    // Odometer over the clipped box.
    Site lo{}, hi{};
    for (int k = 0; k < dim_; ++k) {
        lo[k] = std::max(center[k] - r, -radius_);
        hi[k] = std::min(center[k] + r, radius_);
        if (lo[k] > hi[k])
            return out;
    }
    Site x = lo;
    while (true) {
        out.push_back(*index(x));
        int k = dim_ - 1;
        while (k >= 0 && x[k] == hi[k]) {
            x[k] = lo[k];
            --k;
        }
        if (k < 0)
            break;
        ++x[k];
    }
    return out;
}

} // namespace cpsim
