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

#include "cpsim/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "cpsim/error.hpp"
#include "cpsim/oracle.hpp"

namespace cpsim {

namespace {

nlohmann::json interval_json(const Interval &i)
{
    return nlohmann::json::array({i.lo, i.hi});
}

std::vector<double> survivors_at(const std::vector<double> &times, std::vector<double> sorted)
{
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
        // alive at t iff absorbed strictly after t
        const auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
        out.push_back(static_cast<double>(sorted.end() - it));
    }
    return out;
}

struct Wls {
    double alpha, se, r2;
};

Wls weighted_fit(const std::vector<double> &t, const std::vector<double> &alive, double n,
                 std::size_t first, std::size_t last)
{
    double sw = 0, st = 0, sy = 0;
    std::vector<double> w, y;
    for (std::size_t i = first; i <= last; ++i) {
        const double p = alive[i] / n;
        const double wi = p > 0.0 && p < 1.0 ? n * p / (1.0 - p) : 0.0;
        w.push_back(wi);
        y.push_back(p > 0.0 ? std::log(p) : 0.0);
        sw += wi;
        st += wi * t[i];
        sy += wi * y.back();
    }
    if (sw <= 0.0)
        throw InsufficientData("no usable points in the tail window");
    const double tm = st / sw, ym = sy / sw;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double dt = t[first + k] - tm, dy = y[k] - ym;
        sxx += w[k] * dt * dt;
        sxy += w[k] * dt * dy;
        syy += w[k] * dy * dy;
    }
    if (sxx <= 0.0)
        throw InsufficientData("tail window has no spread in time");
    const double slope = sxy / sxx;
    const double r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return {-slope, std::sqrt(1.0 / sxx), r2};
}

double tail_h(const std::vector<double> &t, const std::vector<double> &alive, double n,
              std::size_t first, std::size_t last, double alpha)
{
    double s = 0.0;
    for (std::size_t i = first; i <= last; ++i)
        s += std::exp(alpha * t[i]) * alive[i] / n;
    return s / static_cast<double>(last - first + 1);
}

// Bootstrap replicates of (alpha, h) over the fit window; deterministic in
// options.seed so alpha and h see the same resamples.
std::vector<std::pair<double, double>> bootstrap(const SurvivalCurve &c, std::size_t first,
                                                 std::size_t last, const FitOptions &options)
{
    std::mt19937_64 rng(options.seed);
    const auto n = c.samples.size();
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> resample(n);
    std::vector<std::pair<double, double>> out;
    for (int b = 0; b < options.bootstrap; ++b) {
        for (auto &x : resample)
            x = c.samples[pick(rng)];
        const auto alive = survivors_at(c.times, resample);
        try {
            const auto f = weighted_fit(c.times, alive, static_cast<double>(n), first, last);
            out.emplace_back(f.alpha,
                             tail_h(c.times, alive, static_cast<double>(n), first, last, f.alpha));
        } catch (const InsufficientData &) {
            // a degenerate resample carries no information; skip it
        }
    }
    return out;
}

double sd(const std::vector<double> &x)
{
    if (x.size() < 2)
        return 0.0;
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x)
        s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

Estimate mean_of(double mean, double mean_sq, double n)
{
    const double var = std::max(0.0, mean_sq - mean * mean);
    return {mean, n > 1.0 ? std::sqrt(var / n) : 0.0};
}

Estimate proportion(double k, double n)
{
    if (n <= 0.0)
        return {0.0, 0.0};
    const double p = k / n;
    return {p, std::sqrt(p * (1.0 - p) / n)};
}

} // namespace

CanonicalConfig class_of(const Lattice &lattice, const std::vector<SiteIndex> &sites)
{
    if (lattice.periodic())
        return ring_class(lattice.size(), mask_of(sites));
    return canonical_form(Configuration::from_indices(lattice, sites));
}

std::vector<double> absorption_samples(const SimSetup &setup, const std::vector<SiteIndex> &initial,
                                       double horizon, std::uint64_t replicas,
                                       std::uint64_t *contaminated)
{
    struct Out {
        double tau = kSurvived;
        bool touched = false;
    };
    const ReplicaRequest req{initial, {}, horizon, false};
    const auto res = map_replicas<Out>(setup, replicas, [&](ReplicaSimulator &sim, std::uint64_t r) {
        const auto o = sim.run(setup.seed, r, req);
        return Out{o.absorption_time.value_or(kSurvived), o.touched_boundary};
    });
    std::vector<double> taus;
    taus.reserve(res.size());
    std::uint64_t touched = 0;
    for (const auto &o : res) {
        taus.push_back(o.tau);
        touched += o.touched;
    }
    if (contaminated)
        *contaminated = touched;
    return taus;
}

SurvivalCurve SurvivalCurve::from_samples(std::vector<double> times, std::vector<double> samples,
                                          std::string initial)
{
    SurvivalCurve c;
    c.initial = std::move(initial);
    c.replicas = static_cast<double>(samples.size());
    c.survivors = survivors_at(times, samples);
    c.times = std::move(times);
    c.samples = std::move(samples);
    for (double k : c.survivors)
        c.ci.push_back(wilson_interval(k, c.replicas));
    return c;
}

SurvivalCurve SurvivalCurve::from_probabilities(std::vector<double> times,
                                                const std::vector<double> &p, double replicas,
                                                std::string initial)
{
    if (p.size() != times.size())
        throw UsageError("one probability per time");
    SurvivalCurve c;
    c.initial = std::move(initial);
    c.times = std::move(times);
    c.replicas = replicas;
    for (double x : p) {
        c.survivors.push_back(x * replicas);
        c.ci.push_back(wilson_interval(x * replicas, replicas));
    }
    return c;
}

nlohmann::json SurvivalCurve::to_json() const
{
    nlohmann::json pts = nlohmann::json::array();
    for (std::size_t i = 0; i < times.size(); ++i)
        pts.push_back({{"t", times[i]},
                       {"p_hat", p(i)},
                       {"ci", interval_json(ci[i])},
                       {"n_surviving", survivors[i]}});
    return {{"initial", initial},
            {"replicas", replicas},
            {"boundary_contaminated", contaminated},
            {"points", pts}};
}

void SurvivalCurve::write_csv(std::ostream &os) const
{
    os << "t,p_hat,ci_lo,ci_hi,n_surviving\n";
    os.precision(10);
    for (std::size_t i = 0; i < times.size(); ++i)
        os << times[i] << ',' << p(i) << ',' << ci[i].lo << ',' << ci[i].hi << ','
           << survivors[i] << '\n';
}

nlohmann::json AlphaFit::to_json() const
{
    return {{"alpha", alpha}, {"se", se},       {"ci", interval_json(ci)},
            {"r2", r2},       {"first", first}, {"last", last},
            {"bootstrap", bootstrap}};
}

nlohmann::json Estimate::to_json() const
{
    return {{"value", value}, {"se", se}, {"ci", interval_json(ci())}};
}

std::pair<std::size_t, std::size_t> tail_window(const SurvivalCurve &curve,
                                                const TailWindowRule &rule)
{
    std::size_t first = curve.size();
    for (std::size_t i = 0; i < curve.size(); ++i)
        if (curve.p(i) < rule.start_below && curve.times[i] >= rule.start_time) {
            first = i;
            break;
        }
    std::size_t end = first;
    while (end < curve.size() && curve.survivors[end] >= rule.min_survivors &&
           curve.times[end] <= rule.end_time)
        ++end;
    if (first >= curve.size() || end < first + 3)
        throw InsufficientData("fewer than 3 tail points with enough survivors");
    return {first, end - 1};
}

AlphaFit estimate_alpha(const SurvivalCurve &curve, const FitOptions &options)
{
    const auto [first, last] = tail_window(curve, options.window);
    const auto f = weighted_fit(curve.times, curve.survivors, curve.replicas, first, last);
    AlphaFit out;
    out.alpha = f.alpha;
    out.r2 = f.r2;
    out.first = first;
    out.last = last;
    out.se = f.se;
    if (!curve.samples.empty() && options.bootstrap > 1) {
        const auto reps = bootstrap(curve, first, last, options);
        std::vector<double> a;
        for (const auto &r : reps)
            a.push_back(r.first);
        out.se = sd(a);
        out.bootstrap = static_cast<int>(a.size());
    }
    out.ci = {out.alpha - 1.96 * out.se, out.alpha + 1.96 * out.se};
    return out;
}

Estimate estimate_h(const SurvivalCurve &curve, const AlphaFit &fit, const FitOptions &options)
{
    Estimate h;
    h.value = tail_h(curve.times, curve.survivors, curve.replicas, fit.first, fit.last, fit.alpha);
    if (!curve.samples.empty() && options.bootstrap > 1) {
        const auto reps = bootstrap(curve, fit.first, fit.last, options);
        std::vector<double> v;
        for (const auto &r : reps)
            v.push_back(r.second);
        h.se = sd(v);
        return h;
    }
    double se_p = 0.0, dh = 0.0;
    const double k = static_cast<double>(fit.last - fit.first + 1);
    for (std::size_t i = fit.first; i <= fit.last; ++i) {
        const double p = curve.p(i), e = std::exp(fit.alpha * curve.times[i]);
        se_p += e * std::sqrt(p * (1.0 - p) / curve.replicas) / k;
        dh += curve.times[i] * e * p / k;
    }
    h.se = std::hypot(se_p, dh * fit.se);
    return h;
}

nlohmann::json LawEstimate::to_json() const
{
    return {{"replicas", replicas},
            {"survivors", survivors},
            {"boundary_contaminated", contaminated},
            {"mean_size", mean_size.to_json()},
            {"law", law.to_json()}};
}

std::vector<LawEstimate> yaglom_laws(const SimSetup &setup, const std::vector<SiteIndex> &initial,
                                     const std::vector<double> &times, std::uint64_t replicas,
                                     int width_cap)
{
    if (times.empty() || !std::is_sorted(times.begin(), times.end()))
        throw UsageError("yaglom times must be non-empty and ascending");
    const ReplicaRequest req{initial, times, times.back(), false};
    const auto res = map_replicas<ReplicaOutcome>(
        setup, replicas, [&](ReplicaSimulator &sim, std::uint64_t r) {
            return sim.run(setup.seed, r, req);
        });
    std::vector<LawEstimate> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        auto &e = out[k];
        e.law = EmpiricalLaw(width_cap, "eta_t^A nonempty, t = " + std::to_string(times[k]));
        e.replicas = static_cast<double>(replicas);
    }
    for (const auto &o : res)
        for (std::size_t k = 0; k < times.size(); ++k) {
            out[k].contaminated += o.touched_boundary;
            if (o.snapshots[k].empty())
                continue;
            out[k].law.add(class_of(setup.lattice, o.snapshots[k]));
            out[k].survivors += 1.0;
        }
    for (auto &e : out) {
        if (e.survivors == 0.0)
            throw InsufficientData("no replica survived to a Yaglom time");
        e.mean_size = mean_of(e.law.mean_size(), e.law.mean_size_sq(), e.survivors);
    }
    return out;
}

nlohmann::json BoxLawEstimate::to_json() const
{
    return {{"t", t},
            {"box_radius", box_radius},
            {"ball_size", ball_size},
            {"clean_replicas", clean_replicas},
            {"nonempty", nonempty},
            {"p_nonempty", p_nonempty.to_json()},
            {"conditioned", conditioned.to_json()}};
}

BoxLawEstimate conditioned_box_law(const SimSetup &setup, double t, int box_radius,
                                   std::uint64_t replicas, int width_cap)
{
    const Lattice &lat = setup.lattice;
    if (box_radius < 0 || box_radius > lat.radius() || lat.periodic())
        throw ParameterError("box radius must fit inside the window");
    std::vector<char> in_box(static_cast<std::size_t>(lat.size()), 0);
    for (auto i : lat.ball(Site{}, box_radius))
        in_box[i] = 1;
    std::vector<SiteIndex> all(static_cast<std::size_t>(lat.size()));
    std::iota(all.begin(), all.end(), 0);

    struct Out {
        bool contaminated = false;
        std::vector<SiteIndex> inside;
    };
    const ReplicaRequest req{all, {t}, t, true};
    const auto res = map_replicas<Out>(setup, replicas, [&](ReplicaSimulator &sim, std::uint64_t r) {
        const auto o = sim.run(setup.seed, r, req);
        Out x;
        for (auto i : o.influenced[0])
            x.contaminated = x.contaminated || in_box[i];
        for (auto i : o.snapshots[0])
            if (in_box[i])
                x.inside.push_back(i);
        return x;
    });

    BoxLawEstimate out;
    out.t = t;
    out.box_radius = box_radius;
    out.ball_size = std::pow(2.0 * box_radius + 1.0, lat.dim());
    auto &c = out.conditioned;
    c.law = EmpiricalLaw(width_cap, "eta_t cap B_R nonempty, full-window start");
    c.replicas = static_cast<double>(replicas);
    for (const auto &o : res) {
        if (o.contaminated) {
            ++c.contaminated;
            continue;
        }
        out.clean_replicas += 1.0;
        if (o.inside.empty())
            continue;
        out.nonempty += 1.0;
        c.law.add(canonical_form(Configuration::from_indices(lat, o.inside)));
    }
    c.survivors = out.nonempty;
    if (out.nonempty == 0.0)
        throw InsufficientData("eta_t never met the box");
    c.mean_size = mean_of(c.law.mean_size(), c.law.mean_size_sq(), out.nonempty);
    out.p_nonempty = proportion(out.nonempty, out.clean_replicas);
    return out;
}

nlohmann::json RhoEstimate::to_json() const
{
    return {{"rho_hat", rho_hat.to_json()}, {"rho_tilde", rho_tilde.to_json()}};
}

RhoEstimate estimate_rho(const Estimate &h0, const Estimate &mean_size, const AlphaFit &alpha,
                         const BoxLawEstimate &box)
{
    RhoEstimate r;
    if (mean_size.value > 0.0 && h0.value > 0.0) {
        r.rho_hat.value = h0.value / mean_size.value;
        r.rho_hat.se =
            r.rho_hat.value * std::hypot(h0.se / h0.value, mean_size.se / mean_size.value);
    }
    const double p = box.p_nonempty.value;
    r.rho_tilde.value = p * std::exp(alpha.alpha * box.t) / box.ball_size;
    if (p > 0.0)
        r.rho_tilde.se =
            r.rho_tilde.value * std::hypot(box.p_nonempty.se / p, box.t * alpha.se);
    return r;
}

nlohmann::json DualityEstimate::to_json() const
{
    return {{"t", t},
            {"p_window", p_window.to_json()},
            {"p_single", p_single.to_json()},
            {"boundary_contaminated", contaminated},
            {"test", cpsim::to_json(report)}};
}

DualityEstimate duality_check(const SimSetup &window, const SimSetup &single, double t,
                              std::uint64_t replicas, double k_sigma)
{
    const auto origin_w = window.lattice.index(Site{});
    const auto origin_s = single.lattice.index(Site{});
    if (!origin_w || !origin_s)
        throw ParameterError("origin outside the window");
    std::vector<SiteIndex> all(static_cast<std::size_t>(window.lattice.size()));
    std::iota(all.begin(), all.end(), 0);

    struct Out {
        bool hit = false;
        bool contaminated = false;
    };
    const ReplicaRequest full{all, {t}, t, true};
    const auto w = map_replicas<Out>(window, replicas, [&](ReplicaSimulator &sim, std::uint64_t r) {
        const auto o = sim.run(window.seed, r, full);
        const auto &s = o.snapshots[0];
        const auto &inf = o.influenced[0];
        return Out{std::binary_search(s.begin(), s.end(), *origin_w),
                   std::find(inf.begin(), inf.end(), *origin_w) != inf.end()};
    });
    const ReplicaRequest one{{*origin_s}, {}, t, false};
    const auto s = map_replicas<Out>(single, replicas, [&](ReplicaSimulator &sim, std::uint64_t r) {
        const auto o = sim.run(single.seed, r + replicas, one);
        return Out{!o.absorption_time.has_value(), o.touched_boundary};
    });

    DualityEstimate d;
    d.t = t;
    double hw = 0, hs = 0;
    for (const auto &o : w) {
        hw += o.hit;
        d.contaminated += o.contaminated;
    }
    for (const auto &o : s) {
        hs += o.hit;
        d.contaminated += o.contaminated;
    }
    const double n = static_cast<double>(replicas);
    d.p_window = proportion(hw, n);
    d.p_single = proportion(hs, n);
    d.report = agreement_test("duality t=" + std::to_string(t).substr(0, 4), d.p_window.value,
                              d.p_window.se, d.p_single.value, d.p_single.se, k_sigma);
    d.report.sample_size = static_cast<std::size_t>(2 * replicas);
    return d;
}

} // namespace cpsim
