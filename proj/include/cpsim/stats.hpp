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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpsim/law.hpp"

namespace cpsim {

struct TestReport {
    std::string name;
    double statistic = 0.0;
    std::optional<double> p_value;
    double level = 0.01;
    bool passed = false;
    std::size_t sample_size = 0;
    nlohmann::json parameters = nlohmann::json::object();
    std::string note;
};

nlohmann::json to_json(const TestReport &r);
/// Plain-text table, one row per report.
std::string summary_table(const std::vector<TestReport> &reports);

struct Interval {
    double lo;
    double hi;
};

/// Wilson score interval for k successes out of n at normal quantile z.
Interval wilson_interval(double k, double n, double z = 1.96);

/// Two-sided normal tail probability P(|Z| >= |z|).
double normal_two_sided_p(double z);
double normal_quantile(double p);
/// Upper tail of chi-square with `dof` degrees of freedom.
double chi2_upper(double x, double dof);

/// Half the l1 distance between two laws with the same width cap, overflow
/// buckets included.
double tv_distance(const EmpiricalLaw &p, const EmpiricalLaw &q);

/// P(K > x) for the limiting Kolmogorov distribution.
double kolmogorov_upper(double x);

/// Two-sided one-sample KS test with Stephens' finite-n correction.
TestReport ks_test(std::vector<double> samples, const std::function<double(double)> &cdf,
                   double level = 0.01, const std::string &name = "ks");

/// z-test that two estimates with independent standard errors agree;
/// passes when |a - b| <= k sigma_joint.
TestReport agreement_test(const std::string &name, double a, double se_a, double b, double se_b,
                          double k = 3.0);

struct PoissonSuiteOptions {
    double level = 0.01;
    /// Standard error of each predicted box intensity (0 = exact intensities).
    std::vector<double> intensity_se;
};

/// Void-probability, dispersion and adjacent-box independence tests on
/// counts[replica][box] against expected Poisson intensities per box.
/// Boxes are taken as a line: box b and b+1 are neighbours.
std::vector<TestReport> poisson_suite(const std::vector<std::vector<int>> &counts,
                                      const std::vector<double> &intensity,
                                      const PoissonSuiteOptions &options = {});

} // namespace cpsim
