/*
   Copyright 2026 The hetavg Authors

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

namespace hetavg {

/// Input outside the mathematical domain of an operation (nonpositive rate,
/// unstable queue, invalid CDF, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A linear solve or integration produced an untrustworthy result.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double condition_estimate)
        : std::runtime_error(what), condition_(condition_estimate) {}

    double condition_estimate() const noexcept { return condition_; }

private:
    double condition_;
};

/// Requested problem exceeds a state-count guard.
class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Iterative solver failed to converge.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An internal accuracy estimate (finite-difference or quadrature error)
/// failed its threshold.
class DiagnosticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fewer or degenerate data than a fit requires.
class RankError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace hetavg
