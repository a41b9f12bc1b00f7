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

#include <array>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>
#include <vector>

#include "hetavg/core/errors.hpp"

namespace hetavg::queue {

/// Largest server count accepted by the full-state exact solver.
inline constexpr int kMaxExactServers = 14;

/// Direction of the 8-server benchmark: base rate 5, lambda 28, rates
/// 5 + eps * h. Sums to 0; squares sum to 71.
inline constexpr std::array<double, 8> kEightServerDirection{1, 1.5, 2, 3, 3.5, -2.5, -4, -4.5};

/// M/M/k queue with heterogeneous exponential servers. Rates are in events
/// per unit time.
struct MMkParams {
    double lambda = 0.0;
    std::vector<double> rates;

    MMkParams() = default;
    MMkParams(double arrival_rate, std::vector<double> service_rates)
        : lambda(arrival_rate), rates(std::move(service_rates)) {}

    int k() const noexcept { return static_cast<int>(rates.size()); }
    double total_rate() const { return std::accumulate(rates.begin(), rates.end(), 0.0); }
    /// rho = lambda / sum(mu_i); ratio of the geometric tail.
    double traffic_intensity() const { return lambda / total_rate(); }

    /// Throws DomainError unless lambda > 0, all rates > 0, k >= 1 and
    /// lambda < sum(mu_i).
    void validate() const {
        if (rates.empty()) throw DomainError("queue needs at least one server");
        if (!(lambda > 0.0) || !std::isfinite(lambda)) {
            throw DomainError("arrival rate must be positive and finite");
        }
        for (std::size_t i = 0; i < rates.size(); ++i) {
            if (!(rates[i] > 0.0) || !std::isfinite(rates[i])) {
                std::ostringstream msg;
                msg << "service rate mu_" << (i + 1) << " = " << rates[i] << " must be positive";
                throw DomainError(msg.str());
            }
        }
        if (!(lambda < total_rate())) {
            std::ostringstream msg;
            msg << "unstable queue: lambda = " << lambda << " >= sum(mu) = " << total_rate();
            throw DomainError(msg.str());
        }
    }
};

}  // namespace hetavg::queue
