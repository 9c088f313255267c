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

#include "cpsim/clusters.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

#include "cpsim/error.hpp"

namespace cpsim {

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;

    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t a)
    {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
    void join(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a != b)
            parent[std::max(a, b)] = std::min(a, b);
    }
};

std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
    return a >= 0 ? a / b : -((-a + b - 1) / b);
}

} // namespace

Configuration Cluster::sites() const
{
    return Configuration(mark.dim(), mark.sites()).translated(anchor);
}

ClusterSet extract_clusters(const Configuration &eta, int radius, ClusterNorm norm)
{
    if (radius < 1)
        throw ParameterError("cluster radius must be positive");
    ClusterSet out;
    out.dim = eta.dim();
    out.radius = radius;
    out.norm = norm;
    const auto &s = eta.sites();
    const std::size_t n = s.size();
    if (n == 0)
        return out;
    const int d = eta.dim();
    auto close = [&](const Site &a, const Site &b) {
        const auto dist = norm == ClusterNorm::Sup ? sup_distance(a, b) : l1_distance(a, b);
        return dist < radius;
    };

    UnionFind uf(n);
    if (d == 1) {
        // Sorted sites: only consecutive gaps matter.
        for (std::size_t k = 1; k < n; ++k)
            if (close(s[k - 1], s[k]))
                uf.join(k - 1, k);
    } else {
        // Both norms: distance < R forces sup distance < R, so the partner
        // lies in the same or an adjacent cell of side R.
        std::map<Site, std::vector<std::size_t>> cells;
        auto cell_of = [&](const Site &x) {
            Site c{};
            for (int k = 0; k < d; ++k)
                c[k] = static_cast<std::int32_t>(floor_div(x[k], radius));
            return c;
        };
        for (std::size_t k = 0; k < n; ++k)
            cells[cell_of(s[k])].push_back(k);
        int offsets = 1;
        for (int k = 0; k < d; ++k)
            offsets *= 3;
        for (const auto &[cell, members] : cells) {
            for (int code = 0; code < offsets; ++code) {
                Site nb = cell;
                int rest = code;
                for (int k = 0; k < d; ++k) {
                    nb[k] += rest % 3 - 1;
                    rest /= 3;
                }
                if (nb < cell)
                    continue; // each unordered cell pair once
                const auto it = cells.find(nb);
                if (it == cells.end())
                    continue;
                for (auto a : members)
                    for (auto b : it->second)
                        if ((nb != cell || a < b) && close(s[a], s[b]))
                            uf.join(a, b);
            }
        }
    }

    // Roots are component minima and sites are sorted, so each root is the
    // lexicographic minimum of its component.
    std::vector<std::vector<Site>> groups;
    std::vector<std::size_t> slot(n, static_cast<std::size_t>(-1));
    for (std::size_t k = 0; k < n; ++k) {
        const auto r = uf.find(k);
        if (slot[r] == static_cast<std::size_t>(-1)) {
            slot[r] = groups.size();
            groups.emplace_back();
        }
        groups[slot[r]].push_back(s[k]);
    }
    out.components.reserve(groups.size());
    for (auto &g : groups) {
        const Site anchor = g.front();
        out.components.push_back({anchor, canonical_form(Configuration(d, std::move(g)))});
    }
    return out;
}

MarkedMeasure marked_measure_scaled(const ClusterSet &clusters, double scale, double K)
{
    MarkedMeasure m;
    m.dim = clusters.dim;
    m.scale = scale;
    m.half_width = K;
    for (const auto &c : clusters.components) {
        MarkedPoint p;
        p.anchor = c.anchor;
        p.mark = c.mark;
        bool inside = true;
        for (int k = 0; k < clusters.dim; ++k) {
            p.location[k] = scale * c.anchor[k];
            inside = inside && std::abs(p.location[k]) <= K;
        }
        if (inside)
            m.points.push_back(std::move(p));
    }
    return m;
}

MarkedMeasure marked_measure(const ClusterSet &clusters, double alpha_hat, double t, double K)
{
    if (!(alpha_hat > 0.0))
        throw ParameterError("alpha_hat must be positive");
    if (t < 0.0)
        throw ParameterError("t must be non-negative");
    return marked_measure_scaled(clusters, std::exp(-alpha_hat * t / clusters.dim), K);
}

void write_jsonl(std::ostream &os, const MarkedMeasure &m)
{
    for (const auto &p : m.points) {
        nlohmann::json loc = nlohmann::json::array();
        for (int k = 0; k < m.dim; ++k)
            loc.push_back(p.location[k]);
        os << nlohmann::json{{"location", loc}, {"mark", to_json(p.mark)}}.dump() << '\n';
    }
}

MesoGrid::MesoGrid(int dim, int box_radius, double scale, double K)
    : dim_(dim), radius_(box_radius)
{
    if (box_radius < 0 || !(scale > 0.0) || K < 0.0)
        throw ParameterError("invalid grid parameters");
    // Microscopic half-width of the viewing window.
    const double m = K / scale;
    half_ = static_cast<int>(std::floor((m + radius_) / spacing()));
    const int side = 2 * half_ + 1;
    std::size_t total = 1;
    for (int k = 0; k < dim; ++k)
        total *= static_cast<std::size_t>(side);
    boxes_.reserve(total);
    for (std::size_t code = 0; code < total; ++code) {
        Site j{};
        auto rest = code;
        for (int k = dim - 1; k >= 0; --k) {
            j[k] = static_cast<std::int32_t>(rest % side) - half_;
            rest /= side;
        }
        boxes_.push_back(j);
    }
}

std::optional<std::size_t> MesoGrid::box_of(const Site &x) const
{
    const int side = 2 * half_ + 1;
    std::size_t code = 0;
    for (int k = 0; k < dim_; ++k) {
        const auto j = floor_div(static_cast<std::int64_t>(x[k]) + radius_, spacing());
        if (j < -half_ || j > half_)
            return std::nullopt;
        code = code * side + static_cast<std::size_t>(j + half_);
    }
    return code;
}

int BoxCounts::total() const
{
    return std::accumulate(counts.begin(), counts.end(), 0);
}

int BoxCounts::rectangle(const MesoGrid &grid, const Site &lo, const Site &hi) const
{
    int sum = 0;
    for (std::size_t b = 0; b < grid.count(); ++b) {
        const Site &j = grid.boxes()[b];
        bool in = true;
        for (int k = 0; k < grid.dim(); ++k)
            in = in && j[k] >= lo[k] && j[k] <= hi[k];
        if (in)
            sum += counts[b];
    }
    return sum;
}

BoxCounts box_statistics(const MarkedMeasure &measure, const MesoGrid &grid,
                         const MarkClass &mark_class)
{
    if (measure.dim != grid.dim())
        throw UsageError("grid and measure dimensions differ");
    BoxCounts out;
    out.counts.assign(grid.count(), 0);
    for (const auto &p : measure.points) {
        if (!mark_class.contains(p.mark))
            continue;
        if (const auto b = grid.box_of(p.anchor))
            ++out.counts[*b];
        else
            ++out.outside;
    }
    return out;
}

nlohmann::json to_json(const ClusterSet &c)
{
    nlohmann::json comps = nlohmann::json::array();
    for (const auto &k : c.components) {
        nlohmann::json a = nlohmann::json::array();
        for (int i = 0; i < c.dim; ++i)
            a.push_back(k.anchor[i]);
        comps.push_back({{"anchor", a}, {"mark", to_json(k.mark)}});
    }
    return {{"radius", c.radius},
            {"norm", c.norm == ClusterNorm::Sup ? "sup" : "l1"},
            {"components", comps}};
}

} // namespace cpsim
