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

#include <stdexcept>
#include <string>

namespace cpsim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid simulation or experiment parameters.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A call violated an API precondition (wrong ordering, mismatched inputs).
class UsageError : public Error {
public:
    using Error::Error;
};

/// A λ-path left the simulation window; the caller must enlarge it.
class WindowOverflow : public Error {
public:
    using Error::Error;
};

/// Too few samples for an estimate to be meaningful.
class InsufficientData : public Error {
public:
    using Error::Error;
};

/// An iterative numerical routine failed to converge.
class NumericError : public Error {
public:
    NumericError(const std::string &what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual)
    {
    }
    double residual() const { return residual_; }

private:
    double residual_;
};

} // namespace cpsim
