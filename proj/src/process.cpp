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

#include "cpsim/process.hpp"

#include <algorithm>

#include "cpsim/error.hpp"

namespace cpsim {

Configuration::Configuration(int dim, std::vector<Site> sites) : dim_(dim), sites_(std::move(sites))
{
    std::sort(sites_.begin(), sites_.end());
    sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
}

Configuration Configuration::from_indices(const Lattice &lattice, const std::vector<SiteIndex> &idx)
{
    std::vector<Site> s;
    s.reserve(idx.size());
    for (auto i : idx)
        s.push_back(lattice.site(i));
    return Configuration(lattice.dim(), std::move(s));
}

bool Configuration::contains(const Site &x) const
{
    return std::binary_search(sites_.begin(), sites_.end(), x);
}

bool Configuration::subset_of(const Configuration &other) const
{
    return std::includes(other.sites_.begin(), other.sites_.end(), sites_.begin(), sites_.end());
}

Configuration Configuration::translated(const Site &shift) const
{
    std::vector<Site> s;
    s.reserve(sites_.size());
    for (const auto &x : sites_)
        s.push_back(x + shift);
    return Configuration(dim_, std::move(s));
}

Configuration Configuration::united(const Configuration &other) const
{
    std::vector<Site> s = sites_;
    s.insert(s.end(), other.sites_.begin(), other.sites_.end());
    return Configuration(dim_, std::move(s));
}

std::vector<SiteIndex> Configuration::indices(const Lattice &lattice) const
{
    std::vector<SiteIndex> out;
    out.reserve(sites_.size());
    for (const auto &x : sites_) {
        auto i = lattice.index(x);
        if (!i)
            throw UsageError("configuration site outside the window: " + to_string(x, dim_));
        out.push_back(*i);
    }
    return out;
}

CanonicalConfig CanonicalConfig::from_sites(int dim, std::vector<Site> sites)
{
    Configuration c(dim, std::move(sites));
    CanonicalConfig k = canonical_form(c);
    if (k.sites() != c.sites())
        throw UsageError("sites are not in canonical position");
    return k;
}

int CanonicalConfig::diameter() const
{
    int d = 0;
    for (std::size_t i = 0; i < sites_.size(); ++i)
        for (std::size_t j = i + 1; j < sites_.size(); ++j)
            d = std::max(d, sup_distance(sites_[i], sites_[j]));
    return d;
}

CanonicalConfig canonical_form(const Configuration &c)
{
    if (c.empty())
        return CanonicalConfig(c.dim(), {});
    const Site origin = c.sites().front();
    std::vector<Site> s;
    s.reserve(c.size());
    for (const auto &x : c.sites())
        s.push_back(x - origin);
    return CanonicalConfig(c.dim(), std::move(s));
}

std::vector<char> Trajectory::occupancy_at(double s) const
{
    if (events == nullptr)
        throw UsageError("empty trajectory");
    if (s < start || s > end)
        throw UsageError("trajectory queried outside its time range");
    std::vector<char> occ(events->lattice().size(), 0);
    for (auto x : initial)
        occ[x] = 1;
    for (const auto &c : changes) {
        if (c.time > s)
            break;
        occ[c.site] = c.infected ? 1 : 0;
    }
    return occ;
}

namespace {

template <class OnGroup>
void sweep(const GraphicalEvents &events, std::vector<char> &occ, std::size_t &count, double s,
           double t, bool *contaminated, Trajectory *traj, OnGroup &&after_group)
{
    const Lattice &lat = events.lattice();
    const auto &tl = events.timeline();
    auto it = std::lower_bound(tl.begin(), tl.end(), s,
                               [](const Event &e, double v) { return e.time < v; });
    while (it != tl.end() && it->time <= t && count > 0) {
        const double sigma = it->time;
        auto group_end = it;
        while (group_end != tl.end() && group_end->time == sigma)
            ++group_end;
        for (auto e = it; e != group_end; ++e) {
            if (e->kind != EventKind::Recovery || sigma == s || !occ[e->site])
                continue;
            occ[e->site] = 0;
            --count;
            if (traj)
                traj->changes.push_back({sigma, e->site, false});
        }
        bool changed = true;
        while (changed) {
            changed = false;
            for (auto e = it; e != group_end; ++e) {
                if (e->kind != EventKind::Arrow || !occ[e->site] || occ[e->target])
                    continue;
                occ[e->target] = 1;
                ++count;
                changed = true;
                if (contaminated && lat.on_boundary(e->target))
                    *contaminated = true;
                if (traj)
                    traj->changes.push_back({sigma, e->target, true});
            }
            if (group_end - it == 1)
                break;
        }
        if (after_group(sigma))
            return;
        it = group_end;
    }
}

} // namespace

std::vector<SiteIndex> evolve_indices(const GraphicalEvents &events,
                                      const std::vector<SiteIndex> &initial, double s, double t,
                                      bool *boundary_contaminated, Trajectory *trajectory)
{
    if (s > t)
        throw UsageError("evolve: s > t");
    if (t > events.horizon())
        throw UsageError("evolve: t beyond the event horizon");
    const Lattice &lat = events.lattice();
    std::vector<char> occ(lat.size(), 0);
    std::size_t count = 0;
    bool contaminated = false;
    for (auto x : initial) {
        if (x < 0 || x >= lat.size())
            throw UsageError("evolve: initial site outside the window");
        if (!occ[x]) {
            occ[x] = 1;
            ++count;
            contaminated = contaminated || lat.on_boundary(x);
        }
    }
    if (trajectory) {
        *trajectory = Trajectory{&events, s, t, {}, {}};
        for (SiteIndex x = 0; x < lat.size(); ++x)
            if (occ[x])
                trajectory->initial.push_back(x);
    }
    sweep(events, occ, count, s, t, &contaminated, trajectory, [](double) { return false; });
    if (boundary_contaminated)
        *boundary_contaminated = contaminated;
    std::vector<SiteIndex> out;
    out.reserve(count);
    for (SiteIndex x = 0; x < lat.size(); ++x)
        if (occ[x])
            out.push_back(x);
    return out;
}

EvolveResult evolve(const GraphicalEvents &events, const Configuration &initial, double s,
                    double t, bool record_trajectory)
{
    EvolveResult r;
    Trajectory traj;
    const auto idx = evolve_indices(events, initial.indices(events.lattice()), s, t,
                                    &r.boundary_contaminated,
                                    record_trajectory ? &traj : nullptr);
    r.config = Configuration::from_indices(events.lattice(), idx);
    if (record_trajectory)
        r.trajectory = std::move(traj);
    return r;
}

std::pair<Configuration, Configuration> coupled_evolve(const GraphicalEvents &events,
                                                       const Configuration &a,
                                                       const Configuration &b, double s,
                                                       double t)
{
    if (!a.subset_of(b))
        throw UsageError("coupled_evolve requires A to be a subset of B");
    return {evolve(events, a, s, t).config, evolve(events, b, s, t).config};
}

std::optional<double> absorption_time(const GraphicalEvents &events, const Configuration &initial,
                                      double s)
{
    const Lattice &lat = events.lattice();
    std::vector<char> occ(lat.size(), 0);
    std::size_t count = 0;
    for (auto x : initial.indices(lat)) {
        if (!occ[x]) {
            occ[x] = 1;
            ++count;
        }
    }
    if (count == 0)
        return s;
    std::optional<double> died;
    sweep(events, occ, count, s, events.horizon(), nullptr, nullptr, [&](double sigma) {
        if (count == 0)
            died = sigma;
        return count == 0;
    });
    return died;
}

nlohmann::json to_json(const Configuration &c)
{
    auto j = nlohmann::json::array();
    for (const auto &x : c.sites())
        j.push_back(std::vector<int>(x.begin(), x.begin() + c.dim()));
    return j;
}

nlohmann::json to_json(const CanonicalConfig &c)
{
    auto j = nlohmann::json::array();
    for (const auto &x : c.sites())
        j.push_back(std::vector<int>(x.begin(), x.begin() + c.dim()));
    return j;
}

Configuration configuration_from_json(const nlohmann::json &j, int dim)
{
    std::vector<Site> sites;
    for (const auto &e : j) {
        const auto v = e.get<std::vector<int>>();
        if (static_cast<int>(v.size()) != dim)
            throw UsageError("configuration site has the wrong dimension");
        Site x{};
        std::copy(v.begin(), v.end(), x.begin());
        sites.push_back(x);
    }
    return Configuration(dim, std::move(sites));
}

} // namespace cpsim
