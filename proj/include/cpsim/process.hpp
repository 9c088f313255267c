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

#include <compare>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cpsim/graphical.hpp"
#include "cpsim/lattice.hpp"

namespace cpsim {

/// Finite set of infected sites, kept sorted lexicographically.
class Configuration {
public:
    explicit Configuration(int dim = 1, std::vector<Site> sites = {});

    static Configuration from_indices(const Lattice &lattice, const std::vector<SiteIndex> &idx);

    int dim() const { return dim_; }
    const std::vector<Site> &sites() const { return sites_; }
    bool empty() const { return sites_.empty(); }
    std::size_t size() const { return sites_.size(); }
    bool contains(const Site &x) const;
    bool subset_of(const Configuration &other) const;

    Configuration translated(const Site &shift) const;
    Configuration united(const Configuration &other) const;
    /// Indices of the sites within `lattice`; throws UsageError if a site is outside.
    std::vector<SiteIndex> indices(const Lattice &lattice) const;

    bool operator==(const Configuration &) const = default;

private:
    int dim_;
    std::vector<Site> sites_;
};

/// Representative of a configuration modulo translations: the sites shifted
/// so the lexicographic minimum sits at the origin. The empty configuration
/// is its own class.
class CanonicalConfig {
public:
    CanonicalConfig() = default;
    static CanonicalConfig empty_class(int dim) { return CanonicalConfig(dim, {}); }
    /// Builds a class from already-canonical sites (checked).
    static CanonicalConfig from_sites(int dim, std::vector<Site> sites);

    int dim() const { return dim_; }
    bool empty() const { return sites_.empty(); }
    std::size_t size() const { return sites_.size(); }
    const std::vector<Site> &sites() const { return sites_; }
    /// Largest sup-norm distance between two sites; 0 for empty or singletons.
    int diameter() const;

    auto operator<=>(const CanonicalConfig &) const = default;
    bool operator==(const CanonicalConfig &) const = default;

private:
    friend CanonicalConfig canonical_form(const Configuration &c);
    CanonicalConfig(int dim, std::vector<Site> sites) : dim_(dim), sites_(std::move(sites)) {}

    int dim_ = 1;
    std::vector<Site> sites_;
};

CanonicalConfig canonical_form(const Configuration &c);

/// Sites where the occupancy flipped, in event order. Together with the
/// initial set this determines the configuration at every time.
struct Trajectory {
    struct Change {
        double time;
        SiteIndex site;
        bool infected;
    };

    const GraphicalEvents *events = nullptr;
    double start = 0.0;
    double end = 0.0;
    std::vector<SiteIndex> initial;
    std::vector<Change> changes;

    /// Occupancy indicator over the lattice at time s (right-continuous).
    std::vector<char> occupancy_at(double s) const;
};

struct EvolveResult {
    Configuration config;
    /// The infection touched a boundary site of the window at some time.
    bool boundary_contaminated = false;
    std::optional<Trajectory> trajectory;
};

/// Exact event-driven evolution of eta_{s,t}^A on the realized events.
/// Events at one instant are applied recoveries first, then arrows until no
/// more sites change; a recovery at exactly s does not act.
EvolveResult evolve(const GraphicalEvents &events, const Configuration &initial, double s,
                    double t, bool record_trajectory = false);

/// Index-level core of `evolve`: returns the sorted infected indices.
std::vector<SiteIndex> evolve_indices(const GraphicalEvents &events,
                                      const std::vector<SiteIndex> &initial, double s, double t,
                                      bool *boundary_contaminated = nullptr,
                                      Trajectory *trajectory = nullptr);

/// (eta_{s,t}^A, eta_{s,t}^B) on the same realization; requires A subset of B.
std::pair<Configuration, Configuration> coupled_evolve(const GraphicalEvents &events,
                                                       const Configuration &a,
                                                       const Configuration &b, double s,
                                                       double t);

/// First time >= s at which eta_{s,.}^A is empty; nullopt if it survives the horizon.
std::optional<double> absorption_time(const GraphicalEvents &events, const Configuration &initial,
                                      double s);

nlohmann::json to_json(const Configuration &c);
nlohmann::json to_json(const CanonicalConfig &c);
Configuration configuration_from_json(const nlohmann::json &j, int dim);

} // namespace cpsim
