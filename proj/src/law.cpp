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

#include "cpsim/law.hpp"

#include "cpsim/error.hpp"

namespace cpsim {

void EmpiricalLaw::add(const CanonicalConfig &c, double weight)
{
    if (weight < 0.0)
        throw UsageError("negative weight");
    const double size = static_cast<double>(c.size());
    total_ += weight;
    size_sum_ += weight * size;
    size_sq_sum_ += weight * size * size;
    if (c.diameter() > width_cap_)
        overflow_ += weight;
    else
        weights_[c] += weight;
}

void EmpiricalLaw::merge(const EmpiricalLaw &other)
{
    if (other.width_cap_ != width_cap_)
        throw UsageError("merging laws with different width caps");
    for (const auto &[c, w] : other.weights_)
        weights_[c] += w;
    overflow_ += other.overflow_;
    total_ += other.total_;
    size_sum_ += other.size_sum_;
    size_sq_sum_ += other.size_sq_sum_;
}

double EmpiricalLaw::probability(const CanonicalConfig &c) const
{
    if (total_ <= 0.0)
        return 0.0;
    const auto it = weights_.find(c);
    return it == weights_.end() ? 0.0 : it->second / total_;
}

nlohmann::json EmpiricalLaw::to_json() const
{
    nlohmann::json support = nlohmann::json::array();
    for (const auto &[c, w] : weights_)
        support.push_back({{"config", cpsim::to_json(c)}, {"p", w / total_}, {"weight", w}});
    return {{"width_cap", width_cap_},
            {"conditioning", conditioning_},
            {"total", total_},
            {"overflow_mass", overflow_mass()},
            {"mean_size", mean_size()},
            {"support", support}};
}

} // namespace cpsim
