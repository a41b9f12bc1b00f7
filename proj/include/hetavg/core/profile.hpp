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

#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hetavg/core/errors.hpp"

namespace hetavg {

/// A parameter vector written as base + scale * direction.
///
/// The admissible domain belongs to the consuming model, so it is checked
/// when the vector is materialized rather than at construction.
class HeterogeneityProfile {
public:
    HeterogeneityProfile(double base, std::vector<double> direction, double scale = 1.0)
        : base_(base), direction_(std::move(direction)), scale_(scale) {
        if (direction_.size() < 2) throw DomainError("heterogeneity profile needs k >= 2");
        if (!(base_ > 0.0) || !std::isfinite(base_)) {
            throw DomainError("heterogeneity profile base must be positive");
        }
        if (!(scale_ >= 0.0) || !std::isfinite(scale_)) {
            throw DomainError("heterogeneity profile scale must be nonnegative");
        }
    }

    double base() const noexcept { return base_; }
    double scale() const noexcept { return scale_; }
    const std::vector<double>& direction() const noexcept { return direction_; }
    std::size_t size() const noexcept { return direction_.size(); }

    HeterogeneityProfile with_scale(double scale) const {
        return HeterogeneityProfile(base_, direction_, scale);
    }

    double direction_sum() const {
        return std::accumulate(direction_.begin(), direction_.end(), 0.0);
    }

    double direction_norm2() const {
        double s = 0.0;
        for (double h : direction_) s += h * h;
        return s;
    }

    std::vector<double> materialize() const {
        std::vector<double> out(direction_.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = base_ + scale_ * direction_[i];
        return out;
    }

    /// Materializes and rejects the result unless every entry satisfies
    /// `admissible`. The error names the offending scale and coordinate.
    template <class Pred>
    std::vector<double> materialize(Pred&& admissible, const std::string& what) const {
        auto out = materialize();
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (!admissible(out[i])) {
                std::ostringstream msg;
                msg << what << ": entry " << i << " = " << out[i]
                    << " is outside the admissible domain at epsilon = " << scale_;
                throw DomainError(msg.str());
            }
        }
        return out;
    }

private:
    double base_;
    std::vector<double> direction_;
    double scale_;
};

}  // namespace hetavg
