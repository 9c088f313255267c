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

#include <map>
#include <string>

#include <json.hpp>

#include "cpsim/process.hpp"

namespace cpsim {

/// Law on configuration classes. Classes wider than the width cap are pooled
/// into one overflow bucket. Weights are sample counts for empirical laws
/// and probabilities for exact ones.
class EmpiricalLaw {
public:
    explicit EmpiricalLaw(int width_cap = 20, std::string conditioning = {})
        : width_cap_(width_cap), conditioning_(std::move(conditioning))
    {
    }

    void add(const CanonicalConfig &c, double weight = 1.0);
    /// Order-independent: adds weights and size sums.
    void merge(const EmpiricalLaw &other);

    int width_cap() const { return width_cap_; }
    const std::string &conditioning() const { return conditioning_; }
    double total() const { return total_; }
    double overflow_weight() const { return overflow_; }
    const std::map<CanonicalConfig, double> &weights() const { return weights_; }

    double probability(const CanonicalConfig &c) const;
    double overflow_mass() const { return total_ > 0 ? overflow_ / total_ : 0.0; }
    /// sum |zeta| nu(zeta), overflow classes included at their true size.
    double mean_size() const { return total_ > 0 ? size_sum_ / total_ : 0.0; }
    /// Second moment of the size, for standard errors.
    double mean_size_sq() const { return total_ > 0 ? size_sq_sum_ / total_ : 0.0; }

    nlohmann::json to_json() const;

private:
    int width_cap_;
    std::string conditioning_;
    std::map<CanonicalConfig, double> weights_;
    double overflow_ = 0.0;
    double total_ = 0.0;
    double size_sum_ = 0.0;
    double size_sq_sum_ = 0.0;
};

} // namespace cpsim
