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

#include "cpsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "cpsim/error.hpp"

namespace cpsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

TestReport make_report(std::string name, double stat, double p, double level, std::size_t n)
{
    TestReport r;
    r.name = std::move(name);
    r.statistic = stat;
    r.p_value = std::clamp(p, 0.0, 1.0);
    r.level = level;
    r.passed = *r.p_value >= level;
    r.sample_size = n;
    return r;
}

} // namespace

nlohmann::json to_json(const TestReport &r)
{
    nlohmann::json j = {{"name", r.name},        {"statistic", r.statistic},
                        {"level", r.level},      {"passed", r.passed},
                        {"sample_size", r.sample_size}, {"parameters", r.parameters}};
    j["p_value"] = r.p_value ? nlohmann::json(*r.p_value) : nlohmann::json(nullptr);
    if (!r.note.empty())
        j["note"] = r.note;
    return j;
}

std::string summary_table(const std::vector<TestReport> &reports)
{
    std::ostringstream os;
    os << std::left << std::setw(36) << "test" << std::setw(14) << "statistic" << std::setw(12)
       << "p-value" << std::setw(8) << "n" << "verdict\n";
    for (const auto &r : reports) {
        std::ostringstream p;
        if (r.p_value)
            p << std::setprecision(4) << *r.p_value;
        else
            p << "-";
        os << std::left << std::setw(36) << r.name << std::setw(14) << std::setprecision(6)
           << r.statistic << std::setw(12) << p.str() << std::setw(8) << r.sample_size
           << (r.passed ? "pass" : "FAIL");
        if (!r.note.empty())
            os << "  (" << r.note << ")";
        os << '\n';
    }
    return os.str();
}

Interval wilson_interval(double k, double n, double z)
{
    if (n <= 0.0)
        return {0.0, 1.0};
    const double p = k / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double normal_two_sided_p(double z)
{
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

double normal_quantile(double p)
{
    return boost::math::quantile(boost::math::normal(), p);
}

double chi2_upper(double x, double dof)
{
    if (x <= 0.0)
        return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), x));
}

double tv_distance(const EmpiricalLaw &p, const EmpiricalLaw &q)
{
    if (p.width_cap() != q.width_cap())
        throw UsageError("laws with different width caps");
    if (p.total() <= 0.0 || q.total() <= 0.0)
        throw InsufficientData("total variation of an empty law");
    double sum = std::abs(p.overflow_mass() - q.overflow_mass());
    auto a = p.weights().begin(), b = q.weights().begin();
    const auto ae = p.weights().end(), be = q.weights().end();
    while (a != ae || b != be) {
        if (b == be || (a != ae && a->first < b->first)) {
            sum += a->second / p.total();
            ++a;
        } else if (a == ae || b->first < a->first) {
            sum += b->second / q.total();
            ++b;
        } else {
            sum += std::abs(a->second / p.total() - b->second / q.total());
            ++a;
            ++b;
        }
    }
    return std::min(1.0, 0.5 * sum);
}

double kolmogorov_upper(double x)
{
    if (x <= 0.0)
        return 1.0;
    if (x < 1.18) {
        // P(K <= x) = sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2 / (8 x^2))
        double s = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double m = 2.0 * k - 1.0;
            s += std::exp(-m * m * kPi * kPi / (8.0 * x * x));
        }
        return std::clamp(1.0 - std::sqrt(2.0 * kPi) / x * s, 0.0, 1.0);
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        s += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-18)
            break;
    }
    return std::clamp(s, 0.0, 1.0);
}

TestReport ks_test(std::vector<double> samples, const std::function<double(double)> &cdf,
                   double level, const std::string &name)
{
    if (samples.empty())
        throw InsufficientData("KS test on an empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    const double sn = std::sqrt(n);
    const double p = kolmogorov_upper((sn + 0.12 + 0.11 / sn) * d);
    auto r = make_report(name, d, p, level, samples.size());
    return r;
}

TestReport agreement_test(const std::string &name, double a, double se_a, double b, double se_b,
                          double k)
{
    const double se = std::sqrt(se_a * se_a + se_b * se_b);
    TestReport r;
    r.name = name;
    r.sample_size = 0;
    r.parameters = {{"a", a}, {"se_a", se_a}, {"b", b}, {"se_b", se_b}, {"k_sigma", k}};
    if (se <= 0.0) {
        r.statistic = a == b ? 0.0 : std::numeric_limits<double>::infinity();
        r.passed = a == b;
        r.p_value = a == b ? 1.0 : 0.0;
        r.note = "zero joint standard error";
        return r;
    }
    r.statistic = (a - b) / se;
    r.p_value = normal_two_sided_p(r.statistic);
    r.level = normal_two_sided_p(k);
    r.passed = std::abs(r.statistic) <= k;
    return r;
}

std::vector<TestReport> poisson_suite(const std::vector<std::vector<int>> &counts,
                                      const std::vector<double> &intensity,
                                      const PoissonSuiteOptions &options)
{
    const std::size_t n = counts.size();
    if (n < 500)
        throw InsufficientData("Poisson suite needs at least 500 replicas");
    const std::size_t boxes = intensity.size();
    for (const auto &row : counts)
        if (row.size() != boxes)
            throw UsageError("every replica needs one count per box");
    if (!options.intensity_se.empty() && options.intensity_se.size() != boxes)
        throw UsageError("one intensity standard error per box");
    const double level = options.level;
    const double dn = static_cast<double>(n);
    std::vector<TestReport> out;

    // (i) pooled void probability over boxes.
    {
        double emp = 0.0, pred = 0.0, var = 0.0, pred_sd = 0.0;
        for (std::size_t b = 0; b < boxes; ++b) {
            double voids = 0.0;
            for (const auto &row : counts)
                voids += row[b] == 0;
            const double p0 = std::exp(-intensity[b]);
            emp += voids / dn;
            pred += p0;
            var += p0 * (1.0 - p0) / dn;
            if (!options.intensity_se.empty())
                pred_sd += p0 * options.intensity_se[b]; // fully correlated errors
        }
        const double db = static_cast<double>(boxes);
        emp /= db;
        pred /= db;
        const double se = std::sqrt(var / (db * db) + (pred_sd / db) * (pred_sd / db));
        TestReport r;
        if (se <= 0.0) {
            r = make_report("poisson_void", 0.0, emp == pred ? 1.0 : 0.0, level, n);
            r.note = "degenerate intensity, void probability 1";
        } else {
            const double z = (emp - pred) / se;
            r = make_report("poisson_void", z, normal_two_sided_p(z), level, n);
        }
        r.parameters = {{"empirical_void", emp}, {"predicted_void", pred}, {"boxes", boxes}};
        out.push_back(r);
    }

    // (ii) index of dispersion, summed over boxes with positive mean.
    std::vector<double> mean(boxes, 0.0), sd(boxes, 0.0);
    for (std::size_t b = 0; b < boxes; ++b) {
        double s = 0.0, s2 = 0.0;
        for (const auto &row : counts) {
            s += row[b];
            s2 += static_cast<double>(row[b]) * row[b];
        }
        mean[b] = s / dn;
        sd[b] = std::sqrt(std::max(0.0, s2 / dn - mean[b] * mean[b]));
    }
    {
        double stat = 0.0, dof = 0.0;
        for (std::size_t b = 0; b < boxes; ++b) {
            if (mean[b] <= 0.0)
                continue;
            double ss = 0.0;
            for (const auto &row : counts)
                ss += (row[b] - mean[b]) * (row[b] - mean[b]);
            stat += ss / mean[b];
            dof += dn - 1.0;
        }
        TestReport r;
        if (dof == 0.0) {
            r = make_report("poisson_dispersion", 1.0, 1.0, level, n);
            r.note = "all boxes empty, skipped";
        } else {
            const double upper = chi2_upper(stat, dof);
            const double p = 2.0 * std::min(upper, 1.0 - upper);
            r = make_report("poisson_dispersion", stat / dof, p, level, n);
        }
        r.parameters = {{"chi2", stat}, {"dof", dof}};
        out.push_back(r);
    }

    // (iii) correlation of neighbouring boxes.
    {
        double sum_r = 0.0;
        int pairs = 0;
        for (std::size_t b = 0; b + 1 < boxes; ++b) {
            if (sd[b] <= 0.0 || sd[b + 1] <= 0.0)
                continue;
            double c = 0.0;
            for (const auto &row : counts)
                c += (row[b] - mean[b]) * (row[b + 1] - mean[b + 1]);
            sum_r += c / dn / (sd[b] * sd[b + 1]);
            ++pairs;
        }
        TestReport r;
        if (pairs == 0) {
            r = make_report("poisson_independence", 0.0, 1.0, level, n);
            r.note = "no box pair with varying counts, skipped";
        } else {
            const double z = sum_r * std::sqrt(dn / pairs);
            r = make_report("poisson_independence", z, normal_two_sided_p(z), level, n);
            r.parameters = {{"mean_correlation", sum_r / pairs}, {"pairs", pairs}};
        }
        out.push_back(r);
    }
    return out;
}

} // namespace cpsim
