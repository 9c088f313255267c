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

#include <cmath>

#include <doctest.h>

#include "cpsim/engine.hpp"
#include "cpsim/error.hpp"
#include "cpsim/oracle.hpp"
#include "cpsim/stats.hpp"

using namespace cpsim;

TEST_CASE("build_chain: two-site fixture")
{
    // States {0} = 1, {1} = 2, {0,1} = 3. From {0}: heal at rate 1, the other
    // site sees site 0 as both neighbours and is infected at rate 2 lambda.
    const double lambda = 0.3;
    const auto c = build_chain(2, lambda);
    REQUIRE(c.size() == 3);
    const Eigen::Matrix3d want{{-1.0 - 2 * lambda, 0.0, 2 * lambda},
                               {0.0, -1.0 - 2 * lambda, 2 * lambda},
                               {1.0, 1.0, -2.0}};
    CHECK((c.Q - want).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK_THROWS_AS(build_chain(1, 0.5), ParameterError);
    CHECK_THROWS_AS(build_chain(13, 0.5), ParameterError);
    CHECK_THROWS_AS(build_chain(4, -1.0), ParameterError);
}

TEST_CASE("build_chain: generator structure")
{
    for (int n = 2; n <= 8; ++n)
        for (bool q : {false, true}) {
            const auto c = build_chain(n, 0.7, q);
            for (Eigen::Index i = 0; i < c.Q.rows(); ++i) {
                for (Eigen::Index j = 0; j < c.Q.cols(); ++j)
                    if (i != j)
                        CHECK(c.Q(i, j) >= 0.0);
                CHECK(c.Q.row(i).sum() <= 1e-12);
            }
        }
    // Full state: only healing moves, each to a state with one site fewer.
    const auto c = build_chain(5, 0.9);
    const int full = c.state_of(0b11111);
    CHECK(c.Q(full, full) == -5.0);
    for (Eigen::Index j = 0; j < c.Q.cols(); ++j)
        if (j != full && c.Q(full, j) != 0.0) {
            CHECK(c.Q(full, j) == 1.0);
            CHECK(__builtin_popcount(c.states[j]) == 4);
        }
}

TEST_CASE("ring classes")
{
    CHECK(min_rotation(6, 0b100100) == 0b001001);
    CHECK(ring_class(6, 0b000110) == ring_class(6, 0b110000));
    CHECK(ring_class(6, 0b100001).sites().size() == 2);
    CHECK(build_chain(6, 0.5, true).size() == 13); // necklaces of 6 beads minus the empty one
    CHECK(mask_of({0, 3}) == 0b1001);
}

TEST_CASE("spectral_summary: pure death on two sites")
{
    const auto c = build_chain(2, 0.0);
    const auto s = spectral_summary(c);
    CHECK(s.alpha == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.qsd(2) == doctest::Approx(0.0));
    CHECK(s.qsd(0) + s.qsd(1) == doctest::Approx(1.0));
    CHECK(s.qsd.dot(s.h) == doctest::Approx(1.0));
}

TEST_CASE("spectral_summary: residuals, quotient consistency, stationarity")
{
    for (auto [n, lambda] : {std::pair{6, 0.5}, std::pair{8, 1.2}, std::pair{3, 2.0}}) {
        const auto full = build_chain(n, lambda);
        const auto quot = build_chain(n, lambda, true);
        const auto sf = spectral_summary(full);
        const auto sq = spectral_summary(quot);
        CHECK(sf.left_residual < 1e-10);
        CHECK(sf.right_residual < 1e-10);
        CHECK(sq.left_residual < 1e-10);
        CHECK(sf.alpha > 0.0);
        CHECK(sq.alpha == doctest::Approx(sf.alpha).epsilon(1e-10));
        CHECK((sf.qsd.array() >= 0.0).all());
        CHECK(sf.qsd.sum() == doctest::Approx(1.0));
        CHECK((sf.h.array() > 0.0).all());
        // qsd laws agree once projected on rotation classes
        CHECK(tv_distance(qsd_law(full, sf), qsd_law(quot, sq)) < 1e-10);
        // h is constant on rotation classes
        for (std::size_t i = 0; i < full.size(); ++i)
            CHECK(sf.h(static_cast<Eigen::Index>(i)) ==
                  doctest::Approx(sq.h(quot.state_of(full.states[i]))).epsilon(1e-9));

        for (double t : {0.5, 1.0, 2.0}) {
            Eigen::VectorXd mu = evolve_law(full, sf.qsd, t);
            CHECK(mu.sum() == doctest::Approx(std::exp(-sf.alpha * t)).epsilon(1e-10));
            mu /= mu.sum();
            CHECK((mu - sf.qsd).lpNorm<Eigen::Infinity>() < 1e-8);
        }
    }
}

TEST_CASE("absorption law: dense, uniformized and tabulated agree; e^{alpha t} P -> h")
{
    const auto c = build_chain(6, 0.5);
    const auto s = spectral_summary(c, {0.5, 2.0, 8.0});
    const AbsorptionCdfTable table(c, 1, 0.01, 30.0);
    for (std::size_t k = 0; k < s.cdf_times.size(); ++k) {
        const double t = s.cdf_times[k];
        CHECK(absorption_cdf(c, 1, t, 0) == doctest::Approx(s.absorption_cdf[k]).epsilon(1e-10));
        CHECK(table(t) == doctest::Approx(s.absorption_cdf[k]).epsilon(1e-6));
    }
    CHECK(absorption_cdf(c, 1, 0.0) == 0.0);
    const double t = 40.0;
    const double surv = 1.0 - absorption_cdf(c, 0b1, t, 0);
    CHECK(std::exp(s.alpha * t) * surv == doctest::Approx(s.h(c.state_of(1))).epsilon(1e-6));

    // Larger quotient chain through uniformization.
    const auto big = build_chain(12, 1.0, true);
    const auto sb = spectral_summary(big);
    CHECK(sb.left_residual < 1e-10);
    const double u = absorption_cdf(big, 1, 3.0, 0);
    const double d = absorption_cdf(big, 1, 3.0);
    CHECK(u == doctest::Approx(d).epsilon(1e-9));
}

TEST_CASE("simulated ring absorption times match the oracle CDF")
{
    const auto c = build_chain(6, 0.5);
    const AbsorptionCdfTable cdf(c, 1, 0.005, 200.0);
    ReplicaSimulator sim(Lattice::ring(6), 0.5);
    std::vector<double> times;
    for (std::uint64_t r = 0; r < 10000; ++r) {
        const auto out = sim.run(2024, r, {{0}, {}, 200.0, false});
        REQUIRE(out.absorption_time.has_value());
        times.push_back(*out.absorption_time);
    }
    const auto rep = ks_test(times, [&](double t) { return cdf(t); });
    MESSAGE("KS D = " << rep.statistic << ", p = " << *rep.p_value);
    CHECK(*rep.p_value > 0.01);
}

TEST_CASE("oracle JSON")
{
    const auto c = build_chain(3, 0.4, true);
    const auto s = spectral_summary(c, {1.0});
    const auto j = to_json(c, s);
    CHECK(j["states"].size() == c.size());
    CHECK(j["alpha"].get<double>() == s.alpha);
    CHECK(j["absorption_cdf"][0]["t"] == 1.0);
}
