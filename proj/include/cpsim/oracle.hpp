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

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cpsim/law.hpp"
#include "cpsim/process.hpp"

namespace cpsim {

using RingMask = std::uint32_t;

/// Smallest integer among the rotations of a ring configuration.
RingMask min_rotation(int n, RingMask mask);

/// A ring configuration as a translation class: the sites of its minimal
/// rotation (which always contains site 0).
CanonicalConfig ring_class(int n, RingMask mask);

RingMask mask_of(const std::vector<SiteIndex> &sites);

/// Contact process on a ring of n sites restricted to non-empty states.
/// Healing at rate 1, infection at rate lambda times the number of infected
/// ring neighbours; on a 2-ring both neighbours are the same site, which
/// therefore counts twice.
struct FiniteChain {
    int n = 0;
    double lambda = 0.0;
    bool quotient = false;
    std::vector<RingMask> states; // masks, or minimal rotations when quotiented
    Eigen::MatrixXd Q;            // sub-generator on `states`

    /// State index of any non-empty mask (its rotation class when quotiented).
    int state_of(RingMask mask) const;
    CanonicalConfig config_of(int state) const { return ring_class(n, states[state]); }
    std::size_t size() const { return states.size(); }
};

FiniteChain build_chain(int n, double lambda, bool rotation_quotient = false);

struct SpectralSummary {
    double alpha = 0.0;
    Eigen::VectorXd qsd; // left eigenvector, sums to 1
    Eigen::VectorXd h;   // right eigenvector, qsd . h = 1
    double left_residual = 0.0;  // ||nu Q + alpha nu||_inf
    double right_residual = 0.0; // ||Q h + alpha h||_inf
    std::vector<double> cdf_times;
    std::vector<double> absorption_cdf; // P(absorbed by t) from cdf_initial
    RingMask cdf_initial = 1;
};

/// Principal eigen-triple by inverse iteration (the eigenvalue of Q nearest
/// 0 is -alpha), refined with a shift; absorption CDF via the matrix
/// exponential. Throws NumericError when the residual exceeds `tolerance`.
SpectralSummary spectral_summary(const FiniteChain &chain, const std::vector<double> &cdf_times = {},
                                 RingMask cdf_initial = 1, double tolerance = 1e-10);

/// P(absorbed by t) from a state: scaling-and-squaring exponential for up to
/// `dense_limit` states, uniformization above.
double absorption_cdf(const FiniteChain &chain, RingMask initial, double t,
                      std::size_t dense_limit = 1024);

/// P(absorbed by t) tabulated on a grid of step dt by repeated
/// multiplication with e^{Q dt}; linear interpolation in between.
class AbsorptionCdfTable {
public:
    AbsorptionCdfTable(const FiniteChain &chain, RingMask initial, double dt, double t_max);
    double operator()(double t) const;

private:
    double dt_;
    std::vector<double> values_;
};

/// Row vector mu e^{Qt} (sub-probability).
Eigen::VectorXd evolve_law(const FiniteChain &chain, const Eigen::VectorXd &mu, double t);

/// The qsd as a law over translation classes.
EmpiricalLaw qsd_law(const FiniteChain &chain, const SpectralSummary &s, int width_cap = 20);

nlohmann::json to_json(const FiniteChain &chain, const SpectralSummary &s);

} // namespace cpsim
