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

#include <random>

#include <doctest.h>

#include "cpsim/engine.hpp"
#include "cpsim/error.hpp"
#include "cpsim/process.hpp"
#include "oracles.hpp"

using namespace cpsim;
using cpsim::testing::s1;

namespace {

Configuration conf1(std::initializer_list<int> xs)
{
    std::vector<Site> s;
    for (int x : xs)
        s.push_back(s1(x));
    return Configuration(1, s);
}

Configuration random_subset(std::mt19937_64 &rng, const Lattice &lat, int max_size)
{
    std::vector<Site> s;
    const int n = 1 + static_cast<int>(rng() % max_size);
    for (int k = 0; k < n; ++k)
        s.push_back(lat.site(static_cast<SiteIndex>(rng() % lat.size())));
    return Configuration(lat.dim(), s);
}

} // namespace

TEST_CASE("evolve: examples")
{
    const auto lat = Lattice::box(1, 4);
    const auto none = GraphicalEvents::from_specs(lat, 1.0, 5.0, {});
    CHECK(evolve(none, conf1({0}), 0.0, 3.0).config == conf1({0}));

    const auto rec =
        GraphicalEvents::from_specs(lat, 1.0, 5.0, {{EventKind::Recovery, s1(0), {}, 1.0}});
    CHECK(evolve(rec, conf1({0}), 0.0, 2.0).config.empty());
    CHECK_THROWS_AS(evolve(rec, conf1({0}), 3.0, 2.0), UsageError);
}

TEST_CASE("evolve equals the open-path scan on random instances")
{
    std::mt19937_64 rng(3);
    const auto lat = Lattice::box(1, 3);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto specs = cpsim::testing::random_specs(rng, 3, 3.0, 6);
        const auto ev = GraphicalEvents::from_specs(lat, 1.0, 3.0, specs);
        const auto a = random_subset(rng, lat, 3);
        const double t = 0.5 + (rng() % 250) / 100.0;
        std::vector<Site> expect;
        for (SiteIndex x = 0; x < lat.size(); ++x) {
            bool hit = false;
            for (const auto &y : a.sites())
                hit = hit || open_path_exists(ev, {y, 0.0}, {lat.site(x), t});
            if (hit)
                expect.push_back(lat.site(x));
        }
        CHECK(evolve(ev, a, 0.0, t).config == Configuration(1, expect));
    }
}

TEST_CASE("canonical_form: translation quotient")
{
    CHECK(canonical_form(conf1({3, 5, 6})) == canonical_form(conf1({0, 2, 3})));
    CHECK(canonical_form(conf1({3, 5, 6})).sites() == conf1({0, 2, 3}).sites());
    CHECK(canonical_form(conf1({0})).sites() == conf1({0}).sites());
    CHECK(canonical_form(Configuration(1)).empty());

    std::mt19937_64 rng(8);
    const auto lat = Lattice::box(2, 6);
    std::uniform_int_distribution<int> shift(-50, 50);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto c = random_subset(rng, lat, 6);
        Site x{};
        x[0] = shift(rng);
        x[1] = shift(rng);
        const auto k = canonical_form(c);
        CHECK(canonical_form(c.translated(x)) == k);
        CHECK(k.sites().front() == Site{});
        // anchor + canonical sites reproduce the configuration
        CHECK(Configuration(2, k.sites()).translated(c.sites().front()) == c);
    }
}

TEST_CASE("absorption_time: examples")
{
    const auto lat = Lattice::box(1, 4);
    const auto rec =
        GraphicalEvents::from_specs(lat, 1.0, 5.0, {{EventKind::Recovery, s1(0), {}, 1.5}});
    CHECK(*absorption_time(rec, Configuration(1), 0.7) == 0.7);
    CHECK(*absorption_time(rec, conf1({0}), 0.0) == 1.5);
    CHECK_FALSE(absorption_time(rec, conf1({1}), 0.0).has_value());
}

TEST_CASE("structural properties: flow, additivity, monotone coupling")
{
    std::mt19937_64 rng(21);
    SimParams p;
    p.lambda = 1.2;
    p.horizon = 4.0;
    p.window_radius = 6;
    const auto lat = Lattice::box(1, 6);
    for (int trial = 0; trial < 200; ++trial) {
        p.replica_index = trial;
        const auto ev = GraphicalEvents::generate(p);
        const auto a = random_subset(rng, lat, 4);
        const auto b = random_subset(rng, lat, 4);
        const double s = (rng() % 100) / 100.0, u = s + (rng() % 150) / 100.0,
                     t = u + (rng() % 150) / 100.0;
        const auto direct = evolve(ev, a, s, t).config;
        CHECK(evolve(ev, evolve(ev, a, s, u).config, u, t).config == direct);
        CHECK(evolve(ev, a.united(b), s, t).config ==
              direct.united(evolve(ev, b, s, t).config));
        const auto [small, large] = coupled_evolve(ev, a, a.united(b), s, t);
        CHECK(small.subset_of(large));
        const auto [same1, same2] = coupled_evolve(ev, a, a, s, t);
        CHECK(same1 == same2);
        CHECK(coupled_evolve(ev, Configuration(1), a, s, t).first.empty());

        // Injected arrows never shrink, injected recoveries never grow eta_t.
        const Site x = lat.site(static_cast<SiteIndex>(1 + rng() % (lat.size() - 2)));
        Site y = x;
        y[0] += 1;
        const double when = s + (t - s) * ((rng() % 97) + 1) / 99.0;
        const auto more = ev.with_event({EventKind::Arrow, x, y, when});
        CHECK(direct.subset_of(evolve(more, a, s, t).config));
        const auto fewer = ev.with_event({EventKind::Recovery, x, {}, when});
        CHECK(evolve(fewer, a, s, t).config.subset_of(direct));
    }
    CHECK_THROWS_AS(coupled_evolve(GraphicalEvents::from_specs(lat, 1.0, 1.0, {}), conf1({1}),
                                   conf1({2}), 0.0, 1.0),
                    UsageError);
}

TEST_CASE("evolve: trajectory reproduces occupancy at every time")
{
    SimParams p;
    p.lambda = 1.0;
    p.horizon = 3.0;
    p.window_radius = 5;
    p.seed = 4;
    const auto ev = GraphicalEvents::generate(p);
    std::vector<Site> all;
    for (SiteIndex x = 0; x < ev.lattice().size(); ++x)
        all.push_back(ev.lattice().site(x));
    const Configuration full(1, all);
    const auto r = evolve(ev, full, 0.0, 3.0, true);
    REQUIRE(r.trajectory.has_value());
    CHECK(r.boundary_contaminated);
    for (double s : {0.0, 0.3, 1.1, 2.0, 3.0}) {
        const auto occ = r.trajectory->occupancy_at(s);
        const auto direct = evolve(ev, full, 0.0, s).config;
        for (SiteIndex x = 0; x < ev.lattice().size(); ++x)
            CHECK((occ[x] != 0) == direct.contains(ev.lattice().site(x)));
    }
}

TEST_CASE("replica simulator matches materialized events exactly")
{
    struct Case {
        Lattice lat;
        double lambda;
    };
    const std::vector<Case> cases = {{Lattice::box(1, 12), 1.0},
                                     {Lattice::box(2, 5), 0.35},
                                     {Lattice::ring(6), 0.5},
                                     {Lattice::ring(2), 0.8}};
    for (const auto &c : cases) {
        ReplicaSimulator sim(c.lat, c.lambda);
        const SiteIndex o = c.lat.periodic() ? 0 : *c.lat.index(Site{});
        std::vector<SiteIndex> all(c.lat.size());
        for (SiteIndex x = 0; x < c.lat.size(); ++x)
            all[x] = x;
        for (std::uint64_t r = 0; r < 60; ++r) {
            const double horizon = 5.0;
            const auto ev = GraphicalEvents::generate(c.lat, c.lambda, horizon, 77, r);
            for (const auto &initial : {std::vector<SiteIndex>{o}, all}) {
                ReplicaRequest req{initial, {0.5, 1.0, 2.5, 5.0}, horizon, false};
                const auto out = sim.run(77, r, req);
                for (std::size_t k = 0; k < req.snapshot_times.size(); ++k)
                    CHECK(out.snapshots[k] ==
                          evolve_indices(ev, initial, 0.0, req.snapshot_times[k]));
                const auto abs = absorption_time(ev, Configuration::from_indices(c.lat, initial), 0.0);
                CHECK(abs.has_value() == out.absorption_time.has_value());
                if (abs && out.absorption_time)
                    CHECK(*abs == *out.absorption_time);
            }
        }
    }
}

TEST_CASE("replica simulator boundary influence equals backward reachability from the boundary")
{
    const auto lat = Lattice::box(1, 8);
    ReplicaSimulator sim(lat, 1.3);
    std::vector<SiteIndex> all(lat.size());
    for (SiteIndex x = 0; x < lat.size(); ++x)
        all[x] = x;
    for (std::uint64_t r = 0; r < 40; ++r) {
        const double t = 3.0;
        const auto ev = GraphicalEvents::generate(lat, 1.3, t, 5, r);
        ReplicaRequest req{all, {t}, t, true};
        const auto out = sim.run(5, r, req);
        REQUIRE(out.influenced.size() == 1);
        const auto &infl = out.influenced[0];
        for (SiteIndex x = 0; x < lat.size(); ++x) {
            const ReachabilityIndex ri(ev, {x}, t);
            const bool expected = ri.touches_boundary();
            CHECK(std::binary_search(infl.begin(), infl.end(), x) == expected);
        }
        // Without influence tracking the infected sets agree.
        ReplicaRequest plain{all, {t}, t, false};
        CHECK(sim.run(5, r, plain).snapshots[0] == out.snapshots[0]);
    }
}

TEST_CASE("configuration JSON round trip")
{
    const auto c = conf1({4, -2, 7});
    CHECK(configuration_from_json(to_json(c), 1) == c);
}
