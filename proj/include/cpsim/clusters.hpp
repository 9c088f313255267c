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
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <vector>

#include <json.hpp>

#include "cpsim/process.hpp"

namespace cpsim {

enum class ClusterNorm { Sup, L1 };

struct Cluster {
    Site anchor{}; // lexicographic minimum of the component
    CanonicalConfig mark;

    Configuration sites() const;
};

/// Components of the graph on eta joining sites at distance < radius.
struct ClusterSet {
    int dim = 1;
    int radius = 1;
    ClusterNorm norm = ClusterNorm::Sup;
    std::vector<Cluster> components; // sorted by anchor

    bool empty() const { return components.empty(); }
    std::size_t size() const { return components.size(); }
};

/// Union-find over sites bucketed on a grid of cell side `radius`, so only
/// neighbouring cells are compared.
ClusterSet extract_clusters(const Configuration &eta, int radius,
                            ClusterNorm norm = ClusterNorm::Sup);

using Location = std::array<double, kMaxDim>;

struct MarkedPoint {
    Location location{}; // scale * anchor
    Site anchor{};
    CanonicalConfig mark;
};

struct MarkedMeasure {
    int dim = 1;
    double scale = 1.0;      // e^{-alpha t / d}
    double half_width = 0.0; // K
    std::vector<MarkedPoint> points;
};

/// Rescales anchors by e^{-alpha t / d} and keeps those inside [-K, K]^d.
MarkedMeasure marked_measure(const ClusterSet &clusters, double alpha_hat, double t, double K);

/// Same with an explicit scale factor (1 keeps microscopic coordinates).
MarkedMeasure marked_measure_scaled(const ClusterSet &clusters, double scale, double K);

/// JSON lines, one {"location": [...], "mark": [[...], ...]} per point.
void write_jsonl(std::ostream &os, const MarkedMeasure &m);

/// Boxes B^{(j)} = j (2R + 1) + [-R, R]^d of the microscopic lattice that
/// meet the rescaled viewing window [-K, K]^d.
class MesoGrid {
public:
    MesoGrid(int dim, int box_radius, double scale, double K);

    int dim() const { return dim_; }
    int box_radius() const { return radius_; }
    int spacing() const { return 2 * radius_ + 1; }
    /// Boxes per axis on each side of the centre box.
    int half_count() const { return half_; }
    std::size_t count() const { return boxes_.size(); }
    const std::vector<Site> &boxes() const { return boxes_; }
    /// Box holding a microscopic site, if it is one of the grid's boxes.
    std::optional<std::size_t> box_of(const Site &x) const;
    /// Half-width of the microscopic region the boxes cover.
    int micro_extent() const { return half_ * spacing() + radius_; }

private:
    int dim_;
    int radius_;
    int half_;
    std::vector<Site> boxes_; // box labels j, lexicographic
};

/// Set of marks to count; an empty set with `all` counts every point.
struct MarkClass {
    bool all = true;
    std::set<CanonicalConfig> classes;

    bool contains(const CanonicalConfig &c) const { return all || classes.count(c) > 0; }
};

struct BoxCounts {
    std::vector<int> counts; // per box, in grid order
    int outside = 0;         // matching points not in any grid box

    bool is_void(std::size_t box) const { return counts[box] == 0; }
    int total() const;
    /// Count over the rectangle of boxes with labels lo <= j <= hi.
    int rectangle(const MesoGrid &grid, const Site &lo, const Site &hi) const;
};

BoxCounts box_statistics(const MarkedMeasure &measure, const MesoGrid &grid,
                         const MarkClass &mark_class);

nlohmann::json to_json(const ClusterSet &c);

} // namespace cpsim
