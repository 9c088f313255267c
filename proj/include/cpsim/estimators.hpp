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

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <iosfwd>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cpsim/engine.hpp"
#include "cpsim/law.hpp"
#include "cpsim/stats.hpp"

namespace cpsim {

/// Where replicas run: lattice, rate, base seed and worker count.
struct SimSetup {
    Lattice lattice = Lattice::box(1, 1);
    double lambda = 1.0;
    std::uint64_t seed = 0;
    int threads = 1;
};

/// Calls fn(simulator, r) for r in [0, n) on `threads` workers, each with its
/// own simulator, and returns the results in replica order. The output does
/// not depend on the number of threads.
template <class R>
std::vector<R> map_replicas(const SimSetup &setup, std::uint64_t n,
                            const std::function<R(ReplicaSimulator &, std::uint64_t)> &fn)
{
    std::vector<R> out(n);
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        ReplicaSimulator sim(setup.lattice, setup.lambda);
        for (std::uint64_t r = next++; r < n; r = next++) {
            try {
                out[r] = fn(sim, r);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = n;
            }
        }
    };
    const int workers = std::max(1, std::min<int>(setup.threads, static_cast<int>(n)));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < workers; ++i)
            pool.emplace_back(work);
    }
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

/// Class of a configuration: translation class on a box, rotation class on
/// a ring (matching the oracle's state space).
CanonicalConfig class_of(const Lattice &lattice, const std::vector<SiteIndex> &sites);

inline constexpr double kSurvived = std::numeric_limits<double>::infinity();

/// Absorption times of eta^A on independent replicas; kSurvived when the
/// process outlives the horizon. `contaminated` counts replicas that touched
/// the window boundary.
std::vector<double> absorption_samples(const SimSetup &setup, const std::vector<SiteIndex> &initial,
                                       double horizon, std::uint64_t replicas,
                                       std::uint64_t *contaminated = nullptr);

struct SurvivalCurve {
    std::string initial; // descriptor of A
    std::vector<double> times;
    std::vector<double> survivors; // replicas alive at each time
    double replicas = 0.0;
    std::vector<Interval> ci; // Wilson, 95%
    /// Per-replica absorption times; empty for curves built from probabilities.
    std::vector<double> samples;
    std::uint64_t contaminated = 0;

    double p(std::size_t i) const { return replicas > 0 ? survivors[i] / replicas : 0.0; }
    std::size_t size() const { return times.size(); }

    static SurvivalCurve from_samples(std::vector<double> times, std::vector<double> samples,
                                      std::string initial = {});
    /// Exact or injected curve with a nominal replica count.
    static SurvivalCurve from_probabilities(std::vector<double> times, const std::vector<double> &p,
                                            double replicas, std::string initial = {});

    nlohmann::json to_json() const;
    /// Columns t, p_hat, ci_lo, ci_hi, n_surviving.
    void write_csv(std::ostream &os) const;
};

struct TailWindowRule {
    double start_below = 0.5;     // first time with survival under this
    double min_survivors = 100.0; // last time with at least this many survivors
    double start_time = 0.0;      // and not before this time
    double end_time = std::numeric_limits<double>::infinity(); // nor after this one
};

struct AlphaFit {
    double alpha = 0.0;
    double se = 0.0;
    Interval ci{0.0, 0.0};
    double r2 = 0.0;
    std::size_t first = 0, last = 0; // tail window, inclusive indices
    int bootstrap = 0;               // resamples behind se (0: weighted LS formula)
    nlohmann::json to_json() const;
};

struct FitOptions {
    TailWindowRule window;
    int bootstrap = 200;
    std::uint64_t seed = 1;
};

/// Tail window per `rule`; throws InsufficientData with fewer than 3 points.
std::pair<std::size_t, std::size_t> tail_window(const SurvivalCurve &curve,
                                                const TailWindowRule &rule = {});

/// Weighted least squares of log p(t) on t over the tail window, weights
/// n p / (1 - p). The standard error comes from a bootstrap over replicas
/// when the curve carries samples.
AlphaFit estimate_alpha(const SurvivalCurve &curve, const FitOptions &options = {});

struct Estimate {
    double value = 0.0;
    double se = 0.0;
    Interval ci() const { return {value - 1.96 * se, value + 1.96 * se}; }
    nlohmann::json to_json() const;
};

/// Mean of e^{alpha t} p(t) over the fit's tail window. With samples the
/// error is bootstrapped jointly with alpha (same resamples as the fit);
/// otherwise the binomial and alpha errors are combined.
Estimate estimate_h(const SurvivalCurve &curve, const AlphaFit &fit, const FitOptions &options = {});

struct LawEstimate {
    EmpiricalLaw law{};
    double replicas = 0.0;
    double survivors = 0.0; // replicas counted in the law
    std::uint64_t contaminated = 0;
    Estimate mean_size;

    nlohmann::json to_json() const;
};

/// Law of <eta_t^A> given eta_t^A nonempty, one law per time (shared
/// replicas). Throws InsufficientData when nothing survives at some time.
std::vector<LawEstimate> yaglom_laws(const SimSetup &setup, const std::vector<SiteIndex> &initial,
                                     const std::vector<double> &times, std::uint64_t replicas,
                                     int width_cap = 20);

struct BoxLawEstimate {
    double t = 0.0;
    int box_radius = 0;
    double ball_size = 0.0; // |B_R|
    LawEstimate conditioned;
    double clean_replicas = 0.0; // replicas with no boundary influence in B_R
    double nonempty = 0.0;       // of those, eta_t meets B_R
    Estimate p_nonempty;

    nlohmann::json to_json() const;
};

/// Full-window start; conditions on eta_t cap B_R nonempty and returns the law
/// of its class and its mean size. Replicas where B_R is reachable from the
/// window boundary are dropped and counted as contaminated.
BoxLawEstimate conditioned_box_law(const SimSetup &setup, double t, int box_radius,
                                   std::uint64_t replicas, int width_cap = 20);

struct RhoEstimate {
    Estimate rho_hat;   // h({o}) / E|zeta|
    Estimate rho_tilde; // P(eta_t cap B_R nonempty) / (e^{-alpha t} |B_R|)
    nlohmann::json to_json() const;
};

/// Ratio estimates with delta-method errors. `mean_size` and `h0` are
/// treated as independent.
RhoEstimate estimate_rho(const Estimate &h0, const Estimate &mean_size, const AlphaFit &alpha,
                         const BoxLawEstimate &box);

struct DualityEstimate {
    double t = 0.0;
    Estimate p_window; // x in eta_t started from the window
    Estimate p_single; // eta_t^{x} nonempty
    std::uint64_t contaminated = 0;
    TestReport report;
    nlohmann::json to_json() const;
};

/// Both sides of P(eta_t^x nonempty) = P(x in eta_t^{Z^d}) for x the origin,
/// on independent replica sets (replica indices offset by `replicas`).
DualityEstimate duality_check(const SimSetup &window, const SimSetup &single, double t,
                              std::uint64_t replicas, double k_sigma = 3.0);

} // namespace cpsim
