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

#include "cpsim/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

#include "cpsim/error.hpp"

namespace cpsim {

namespace {

RingMask rotate(int n, RingMask m)
{
    const RingMask full = (RingMask{1} << n) - 1;
    return ((m >> 1) | (m << (n - 1))) & full;
}

// Non-zero transitions out of a full-space mask.
template <class F>
void transitions(int n, double lambda, RingMask m, F &&emit)
{
    for (int i = 0; i < n; ++i) {
        const RingMask bit = RingMask{1} << i;
        if (m & bit) {
            emit(m & ~bit, 1.0);
            continue;
        }
        const int left = (i + n - 1) % n, right = (i + 1) % n;
        const int k = ((m >> left) & 1) + ((m >> right) & 1);
        if (k > 0 && lambda > 0.0)
            emit(m | bit, lambda * k);
    }
}

using Sparse = Eigen::SparseMatrix<double>;

Sparse uniformized(const Eigen::MatrixXd &Q, double &rate)
{
    rate = 0.0;
    for (Eigen::Index i = 0; i < Q.rows(); ++i)
        rate = std::max(rate, -Q(i, i));
    if (rate <= 0.0)
        rate = 1.0;
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(Q.rows(), Q.cols()) + Q / rate;
    return P.sparseView();
}

// sum_k Poisson(k; rate t) P^k v, or the row-vector version when `left`.
Eigen::VectorXd uniformization(const Eigen::MatrixXd &Q, const Eigen::VectorXd &v, double t,
                               bool left)
{
    double rate;
    const Sparse P = uniformized(Q, rate);
    const Sparse Pt = P.transpose();
    const double m = rate * t;
    Eigen::VectorXd term = v, out = Eigen::VectorXd::Zero(v.size());
    double logw = -m, mass = 0.0;
    for (int k = 0; k < 100000; ++k) {
        const double w = std::exp(logw);
        out += w * term;
        mass += w;
        if (k > m && 1.0 - mass < 1e-16)
            break;
        term = left ? Eigen::VectorXd(Pt * term) : Eigen::VectorXd(P * term);
        logw += std::log(m) - std::log(k + 1.0);
    }
    return out;
}

} // namespace

RingMask min_rotation(int n, RingMask mask)
{
    RingMask best = mask, m = mask;
    for (int k = 1; k < n; ++k) {
        m = rotate(n, m);
        best = std::min(best, m);
    }
    return best;
}

CanonicalConfig ring_class(int n, RingMask mask)
{
    const RingMask r = min_rotation(n, mask);
    std::vector<Site> sites;
    for (int i = 0; i < n; ++i)
        if ((r >> i) & 1) {
            Site x{};
            x[0] = i;
            sites.push_back(x);
        }
    return canonical_form(Configuration(1, sites));
}

RingMask mask_of(const std::vector<SiteIndex> &sites)
{
    RingMask m = 0;
    for (auto x : sites)
        m |= RingMask{1} << x;
    return m;
}

int FiniteChain::state_of(RingMask mask) const
{
    if (mask == 0 || mask >= (RingMask{1} << n))
        throw UsageError("mask is not a non-empty ring state");
    if (!quotient)
        return static_cast<int>(mask) - 1;
    const auto r = min_rotation(n, mask);
    const auto it = std::lower_bound(states.begin(), states.end(), r);
    return static_cast<int>(it - states.begin());
}

FiniteChain build_chain(int n, double lambda, bool rotation_quotient)
{
    if (n < 2 || n > 12)
        throw ParameterError("ring size must be in [2, 12]");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw ParameterError("lambda must be non-negative");
    FiniteChain c;
    c.n = n;
    c.lambda = lambda;
    c.quotient = rotation_quotient;
    const RingMask top = RingMask{1} << n;
    for (RingMask m = 1; m < top; ++m)
        if (!rotation_quotient || min_rotation(n, m) == m)
            c.states.push_back(m);
    const auto s = static_cast<Eigen::Index>(c.states.size());
    c.Q = Eigen::MatrixXd::Zero(s, s);
    for (Eigen::Index i = 0; i < s; ++i) {
        transitions(n, lambda, c.states[i], [&](RingMask to, double rate) {
            c.Q(i, i) -= rate;
            if (to != 0)
                c.Q(i, c.state_of(to)) += rate;
        });
    }
    return c;
}

Eigen::VectorXd evolve_law(const FiniteChain &chain, const Eigen::VectorXd &mu, double t)
{
    if (chain.size() <= 1024)
        return ((chain.Q * t).exp().transpose() * mu).eval();
    return uniformization(chain.Q, mu, t, true);
}

double absorption_cdf(const FiniteChain &chain, RingMask initial, double t,
                      std::size_t dense_limit)
{
    if (t < 0.0)
        throw UsageError("negative time");
    const int a = chain.state_of(initial);
    const auto s = static_cast<Eigen::Index>(chain.size());
    double survive;
    if (chain.size() <= dense_limit) {
        const Eigen::MatrixXd E = (chain.Q * t).exp();
        survive = E.row(a).sum();
    } else {
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(s);
        survive = uniformization(chain.Q, ones, t, false)(a);
    }
    return std::clamp(1.0 - survive, 0.0, 1.0);
}

AbsorptionCdfTable::AbsorptionCdfTable(const FiniteChain &chain, RingMask initial, double dt,
                                       double t_max)
    : dt_(dt)
{
    if (!(dt > 0.0) || t_max < 0.0)
        throw UsageError("invalid CDF grid");
    const int a = chain.state_of(initial);
    const Eigen::MatrixXd E = (chain.Q * dt).exp();
    Eigen::VectorXd u = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(chain.size()));
    const auto steps = static_cast<std::size_t>(std::ceil(t_max / dt));
    values_.reserve(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        values_.push_back(std::clamp(1.0 - u(a), 0.0, 1.0));
        u = E * u;
    }
}

double AbsorptionCdfTable::operator()(double t) const
{
    if (t <= 0.0)
        return 0.0;
    const double x = t / dt_;
    const auto k = static_cast<std::size_t>(x);
    if (k + 1 >= values_.size())
        return values_.back();
    const double f = x - static_cast<double>(k);
    return (1.0 - f) * values_[k] + f * values_[k + 1];
}

SpectralSummary spectral_summary(const FiniteChain &chain, const std::vector<double> &cdf_times,
                                 RingMask cdf_initial, double tolerance)
{
    const Sparse Q = chain.Q.sparseView();
    const Sparse Qt = Q.transpose();
    const auto s = static_cast<Eigen::Index>(chain.size());

    // -Q^{-1} has principal eigenvalue 1/alpha, the largest in modulus.
    auto principal = [&](const Sparse &A) {
        Eigen::SparseLU<Sparse> lu;
        lu.compute(A);
        if (lu.info() != Eigen::Success)
            throw NumericError("sub-generator factorization failed", 0.0);
        Eigen::VectorXd x = Eigen::VectorXd::Ones(s) / static_cast<double>(s);
        for (int it = 0; it < 20000; ++it) {
            Eigen::VectorXd y = -lu.solve(x);
            y /= y.sum();
            const double change = (y - x).lpNorm<Eigen::Infinity>();
            x = y;
            if (change < 1e-15)
                break;
        }
        return x;
    };

    SpectralSummary out;
    out.qsd = principal(Qt);
    out.qsd = out.qsd.cwiseMax(0.0);
    out.qsd /= out.qsd.sum();
    const Eigen::VectorXd exit = chain.Q.transpose() * out.qsd;
    out.alpha = -exit.sum();

    out.h = principal(Q);
    out.h /= out.qsd.dot(out.h);

    out.left_residual = (chain.Q.transpose() * out.qsd + out.alpha * out.qsd).lpNorm<Eigen::Infinity>();
    out.right_residual = (chain.Q * out.h + out.alpha * out.h).lpNorm<Eigen::Infinity>();
    const double worst = std::max(out.left_residual, out.right_residual);
    if (!(worst < tolerance))
        throw NumericError("principal eigenvector did not converge", worst);

    out.cdf_times = cdf_times;
    out.cdf_initial = cdf_initial;
    for (double t : cdf_times)
        out.absorption_cdf.push_back(absorption_cdf(chain, cdf_initial, t));
    return out;
}

EmpiricalLaw qsd_law(const FiniteChain &chain, const SpectralSummary &s, int width_cap)
{
    EmpiricalLaw law(width_cap, "oracle qsd");
    for (std::size_t i = 0; i < chain.size(); ++i)
        law.add(chain.config_of(static_cast<int>(i)), s.qsd(static_cast<Eigen::Index>(i)));
    return law;
}

nlohmann::json to_json(const FiniteChain &chain, const SpectralSummary &s)
{
    nlohmann::json states = nlohmann::json::array();
    for (std::size_t i = 0; i < chain.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        states.push_back({{"mask", chain.states[i]},
                          {"config", to_json(chain.config_of(static_cast<int>(i)))},
                          {"qsd", s.qsd(k)},
                          {"h", s.h(k)}});
    }
    nlohmann::json cdf = nlohmann::json::array();
    for (std::size_t i = 0; i < s.cdf_times.size(); ++i)
        cdf.push_back({{"t", s.cdf_times[i]}, {"F", s.absorption_cdf[i]}});
    return {{"n", chain.n},
            {"lambda", chain.lambda},
            {"rotation_quotient", chain.quotient},
            {"alpha", s.alpha},
            {"left_residual", s.left_residual},
            {"right_residual", s.right_residual},
            {"cdf_initial_mask", s.cdf_initial},
            {"absorption_cdf", cdf},
            {"states", states},
            {"note", "exact finite-ring chain; validates the estimators, not Z^d constants"}};
}

} // namespace cpsim
