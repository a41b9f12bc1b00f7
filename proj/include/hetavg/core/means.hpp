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

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "hetavg/core/errors.hpp"

namespace hetavg {

enum class MeanKind { arithmetic, geometric, harmonic };

inline const char* to_string(MeanKind kind) {
    switch (kind) {
        case MeanKind::arithmetic: return "arithmetic";
        case MeanKind::geometric: return "geometric";
        case MeanKind::harmonic: return "harmonic";
    }
    return "?";
}

inline MeanKind parse_mean_kind(const std::string& name) {
    if (name == "arithmetic") return MeanKind::arithmetic;
    if (name == "geometric") return MeanKind::geometric;
    if (name == "harmonic") return MeanKind::harmonic;
    throw DomainError("unknown mean kind '" + name + "'");
}

/// Arithmetic, geometric or harmonic mean. Geometric and harmonic means
/// require strictly positive entries.
inline double mean(std::span<const double> values, MeanKind kind = MeanKind::arithmetic) {
    if (values.empty()) throw DomainError("mean of an empty vector");
    const auto n = static_cast<double>(values.size());
    if (kind != MeanKind::arithmetic) {
        for (double v : values) {
            if (!(v > 0.0)) {
                throw DomainError(std::string(to_string(kind)) +
                                  " mean requires positive entries");
            }
        }
    }
    double acc = 0.0;
    switch (kind) {
        case MeanKind::arithmetic:
            for (double v : values) acc += v;
            return acc / n;
        case MeanKind::geometric:
            for (double v : values) acc += std::log(v);
            return std::exp(acc / n);
        case MeanKind::harmonic:
            for (double v : values) acc += 1.0 / v;
            return n / acc;
    }
    return acc;
}

/// max_i |mu_i - center| / |center|. The center is supplied by the caller so
/// that any of the three means can serve as the reference point.
inline double heterogeneity_level(std::span<const double> mu, double center) {
    if (center == 0.0 || !std::isfinite(center)) {
        throw DomainError("heterogeneity level needs a finite nonzero mean");
    }
    double worst = 0.0;
    for (double m : mu) worst = std::max(worst, std::abs(m - center));
    return worst / std::abs(center);
}

}  // namespace hetavg
