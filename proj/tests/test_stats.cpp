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
#include <random>

#include <doctest.h>

#include "cpsim/error.hpp"
#include "cpsim/stats.hpp"
#include "oracles.hpp"

using namespace cpsim;
using cpsim::testing::s1;

namespace {

CanonicalConfig cls(std::initializer_list<int> xs)
{
    std::vector<Site> s;
    for (int x : xs)
        s.push_back(s1(x));
    return canonical_form(Configuration(1, s));
}

// Random law on the fixed support {o}, {0,1}, ..., {0,k}.
EmpiricalLaw random_law(std::mt19937_64 &rng, int support)
{
    EmpiricalLaw law(20);
    std::uniform_real_distribution<double> w(0.0, 1.0);
    law.add(cls({0}), w(rng));
    for (int k = 1; k < support; ++k)
        law.add(cls({0, k}), w(rng));
    return law;
}

std::vector<std::vector<int>> poisson_counts(std::mt19937_64 &rng, int reps, int boxes,
                                             double mu, int multiplicity = 1)
{
    std::poisson_distribution<int> pois(mu);
    std::vector<std::vector<int>> c(reps, std::vector<int>(boxes));
    for (auto &row : c)
        for (auto &x : row)
            x = multiplicity * pois(rng);
    return c;
}

} // namespace

TEST_CASE("tv_distance: examples")
{
    EmpiricalLaw p(20), q(20);
    p.add(cls({0}), 0.5);
    p.add(cls({0, 1}), 0.5);
    q.add(cls({0}), 0.75);
    q.add(cls({0, 1}), 0.25);
    CHECK(tv_distance(p, p) == 0.0);
    CHECK(tv_distance(p, q) == doctest::Approx(0.25));

    EmpiricalLaw a(20), b(20);
    a.add(cls({0}));
    b.add(cls({0, 2}));
    CHECK(tv_distance(a, b) == 1.0);

    // overflow buckets take part
    EmpiricalLaw wide(2), narrow(2);
    wide.add(cls({0, 5}));
    wide.add(cls({0}));
    narrow.add(cls({0}));
    CHECK(wide.overflow_mass() == 0.5);
    CHECK(tv_distance(wide, narrow) == doctest::Approx(0.5));
    CHECK(wide.mean_size() == doctest::Approx(1.5));
    CHECK_THROWS_AS(tv_distance(wide, p), UsageError);
    CHECK_THROWS_AS(tv_distance(EmpiricalLaw(20), p), InsufficientData);
}

TEST_CASE("tv_distance is a metric on fixed-support laws")
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto p = random_law(rng, 5), q = random_law(rng, 5), r = random_law(rng, 5);
        const double pq = tv_distance(p, q);
        CHECK(pq >= 0.0);
        CHECK(pq <= 1.0);
        CHECK(pq == doctest::Approx(tv_distance(q, p)).epsilon(1e-12));
        CHECK(pq <= tv_distance(p, r) + tv_distance(r, q) + 1e-12);
        CHECK(tv_distance(p, p) == 0.0);
    }
}

TEST_CASE("EmpiricalLaw merge is order independent")
{
    EmpiricalLaw a(3), b(3), ab(3), ba(3);
    a.add(cls({0}));
    a.add(cls({0, 1, 2}));
    b.add(cls({0, 9}));
    b.add(cls({0}));
    ab.merge(a);
    ab.merge(b);
    ba.merge(b);
    ba.merge(a);
    CHECK(ab.to_json() == ba.to_json());
    CHECK(ab.total() == 4.0);
    CHECK(ab.probability(cls({0})) == 0.5);
}

TEST_CASE("wilson_interval")
{
    const auto w = wilson_interval(50, 100);
    CHECK(w.lo == doctest::Approx(0.4038).epsilon(1e-3));
    CHECK(w.hi == doctest::Approx(0.5962).epsilon(1e-3));
    const auto z = wilson_interval(0, 100);
    CHECK(z.lo == 0.0);
    CHECK(z.hi > 0.0);
    CHECK(wilson_interval(100, 100).hi == doctest::Approx(1.0));
}

TEST_CASE("ks_test: self-sampling gives uniform p-values")
{
    std::mt19937_64 rng(7);
    std::exponential_distribution<double> ex(1.3);
    const auto cdf = [](double x) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-1.3 * x); };
    double sum = 0.0;
    int reject = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> s(200);
        for (auto &x : s)
            x = ex(rng);
        const auto r = ks_test(s, cdf);
        sum += *r.p_value;
        reject += !r.passed;
    }
    MESSAGE("mean KS p-value " << sum / 200 << ", rejections " << reject);
    CHECK(std::abs(sum / 200 - 0.5) <= 0.05);
    CHECK(reject <= 4);
}

TEST_CASE("ks_test: fixtures")
{
    const auto cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
    const auto c = ks_test(std::vector<double>(100, 0.5), cdf);
    CHECK(*c.p_value < 1e-10);
    CHECK_FALSE(c.passed);

    const int n = 80;
    std::vector<double> grid;
    for (int i = 1; i <= n; ++i)
        grid.push_back((i - 0.5) / n);
    const auto g = ks_test(grid, cdf);
    CHECK(g.statistic == doctest::Approx(1.0 / (2 * n)));
    CHECK(*g.p_value > 0.999);

    CHECK_THROWS_AS(ks_test({}, cdf), InsufficientData);
    CHECK(kolmogorov_upper(0.0) == 1.0);
    CHECK(kolmogorov_upper(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(kolmogorov_upper(1.6276) == doctest::Approx(0.01).epsilon(2e-3));
    // both series branches agree where they meet
    CHECK(kolmogorov_upper(1.1799) == doctest::Approx(kolmogorov_upper(1.1801)).epsilon(1e-3));
}

TEST_CASE("agreement_test")
{
    CHECK(agreement_test("x", 1.0, 0.1, 1.2, 0.1).passed);
    CHECK_FALSE(agreement_test("x", 1.0, 0.1, 1.5, 0.1).passed);
    CHECK(agreement_test("x", 1.0, 0.0, 1.0, 0.0).passed);
}

TEST_CASE("poisson_suite: true Poisson data")
{
    std::mt19937_64 rng(99);
    int rej[3] = {0, 0, 0};
    const int trials = 1000, boxes = 20;
    for (int trial = 0; trial < trials; ++trial) {
        const auto c = poisson_counts(rng, 500, boxes, 0.7);
        const auto reports = poisson_suite(c, std::vector<double>(boxes, 0.7));
        REQUIRE(reports.size() == 3);
        for (int k = 0; k < 3; ++k) {
            CHECK(*reports[k].p_value >= 0.0);
            CHECK(*reports[k].p_value <= 1.0);
            rej[k] += !reports[k].passed;
        }
    }
    MESSAGE("rejections void/dispersion/independence: " << rej[0] << " " << rej[1] << " "
                                                        << rej[2]);
    // level 0.01: at most twice the nominal rate, i.e. >= 98% passing
    for (int k = 0; k < 3; ++k)
        CHECK(rej[k] <= 2 * trials / 100);
}

TEST_CASE("poisson_suite: non-Poisson data")
{
    std::mt19937_64 rng(100);
    int dispersion_rejects = 0;
    for (int trial = 0; trial < 50; ++trial) {
        // every point doubled: variance / mean = 2
        const auto c = poisson_counts(rng, 500, 20, 0.35, 2);
        const auto reports = poisson_suite(c, std::vector<double>(20, 0.7));
        dispersion_rejects += !reports[1].passed;
        CHECK(reports[1].statistic == doctest::Approx(2.0).epsilon(0.1));
    }
    CHECK(dispersion_rejects == 50);

    // perfectly correlated neighbours
    auto c = poisson_counts(rng, 500, 20, 0.7);
    for (auto &row : c)
        for (std::size_t b = 1; b < row.size(); b += 2)
            row[b] = row[b - 1];
    CHECK_FALSE(poisson_suite(c, std::vector<double>(20, 0.7))[2].passed);

    // wrong intensity
    const auto low = poisson_counts(rng, 500, 20, 0.5);
    CHECK_FALSE(poisson_suite(low, std::vector<double>(20, 0.7))[0].passed);
}

TEST_CASE("poisson_suite: degenerate inputs")
{
    const std::vector<std::vector<int>> zeros(600, std::vector<int>(10, 0));
    const auto r = poisson_suite(zeros, std::vector<double>(10, 0.0));
    for (const auto &t : r)
        CHECK(t.passed);
    CHECK(r[0].parameters["empirical_void"] == 1.0);
    CHECK_THROWS_AS(poisson_suite(std::vector<std::vector<int>>(10, std::vector<int>(3)),
                                  std::vector<double>(3, 1.0)),
                    InsufficientData);
    const auto table = summary_table(r);
    CHECK(table.find("poisson_dispersion") != std::string::npos);
    CHECK(to_json(r[0])["passed"] == true);
}
