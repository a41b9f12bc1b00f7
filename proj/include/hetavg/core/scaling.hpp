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
#include <set>
#include <span>
#include <vector>

#include "hetavg/core/errors.hpp"

namespace hetavg {

struct ScalingPoint {
    double scale = 0.0;  // epsilon
    double error = 0.0;
};

/// log(error) = intercept + slope * log(scale), fitted by ordinary least squares.
struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

inline ScalingFit fit_scaling(std::span<const ScalingPoint> points) {
    if (points.size() < 4) throw RankError("scaling fit needs at least 4 points");
    std::set<double> distinct;
    for (const auto& p : points) {
        if (!(p.scale > 0.0) || !(p.error > 0.0) || !std::isfinite(p.scale) ||
            !std::isfinite(p.error)) {
            throw DomainError("scaling fit needs positive finite scale and error");
        }
        distinct.insert(p.scale);
    }
    if (distinct.size() < 4) throw RankError("scaling fit needs 4 distinct abscissae");

    const auto n = static_cast<double>(points.size());
    double sx = 0, sy = 0;
    for (const auto& p : points) {
        sx += std::log(p.scale);
        sy += std::log(p.error);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& p : points) {
        const double dx = std::log(p.scale) - mx, dy = std::log(p.error) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    ScalingFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? std::min(1.0, (sxy * sxy) / (sxx * syy)) : 1.0;
    return fit;
}

inline ScalingFit fit_scaling(const std::vector<ScalingPoint>& points) {
    return fit_scaling(std::span<const ScalingPoint>(points));
}

}  // namespace hetavg
