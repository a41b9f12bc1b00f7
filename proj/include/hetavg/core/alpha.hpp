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
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hetavg/core/errors.hpp"

namespace hetavg {

/// Probe with heterogeneity restricted to the first coordinate:
/// (mu_1, mu_bar) -> F(mu_1, mu_bar, ..., mu_bar).
template <class P>
concept SingleCoordinateProbe = requires(P probe, double mu1, double mu_bar) {
    { probe(mu1, mu_bar) } -> std::convertible_to<double>;
};

/// Homogeneous outcome mu -> F(mu, ..., mu).
template <class P>
concept HomogeneousProbe = requires(P probe, double mu) {
    { probe(mu) } -> std::convertible_to<double>;
};

/// Full outcome on a parameter vector. Probes are called sequentially; the
/// engine never evaluates one probe from two threads.
template <class P>
concept OutcomeProbe = requires(P probe, std::span<const double> mu) {
    { probe(mu) } -> std::convertible_to<double>;
};

struct AlphaEstimate {
    double alpha = 0.0;
    double step = 0.0;
    /// |alpha(step) - alpha(step/2)| before extrapolation.
    double richardson_residual = 0.0;
};

inline double default_fd_step(double mean) {
    return std::max(1e-3 * std::abs(mean), 1e-6);
}

namespace detail {

inline void check_step(double mean, double step) {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw DiagnosticsError("finite-difference step must be positive and finite");
    }
    const double half = 0.5 * step;
    if ((mean + half) - mean == 0.0 || (mean - half) - mean == 0.0) {
        throw DiagnosticsError("finite-difference step underflows against the mean");
    }
}

template <class F>
double central_second(F&& f, double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

inline double richardson(double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; }

inline AlphaEstimate finish(double coarse, double fine, double step) {
    const double extrapolated = richardson(coarse, fine);
    if (!std::isfinite(extrapolated) || !std::isfinite(coarse) || !std::isfinite(fine)) {
        throw DiagnosticsError("second-difference estimate is not finite");
    }
    return {extrapolated, step, std::abs(coarse - fine)};
}

}  // namespace detail

/// Second-order coefficient from the single-coordinate and homogeneous
/// outcomes only:
///
///   alpha = k / (2(k-1)) * (d^2F/dmu_1^2 - F_homog''(mu_bar) / k^2)
///
/// Both second derivatives use 3-point central differences at `step` and
/// `step/2`, combined with one Richardson level.
template <SingleCoordinateProbe Single, HomogeneousProbe Homog>
AlphaEstimate alpha_from_probes(Single&& single_coord, Homog&& homog, double mean, int k,
                                std::optional<double> step = std::nullopt) {
    if (k < 2) throw DomainError("alpha_from_probes needs k >= 2");
    const double h = step.value_or(default_fd_step(mean));
    detail::check_step(mean, h);

    auto single = [&](double mu1) { return static_cast<double>(single_coord(mu1, mean)); };
    auto hom = [&](double mu) { return static_cast<double>(homog(mu)); };
    const double kd = static_cast<double>(k);
    auto alpha_at = [&](double hh) {
        const double d_single = detail::central_second(single, mean, hh);
        const double d_homog = detail::central_second(hom, mean, hh);
        return kd / (2.0 * (kd - 1.0)) * (d_single - d_homog / (kd * kd));
    };
    return detail::finish(alpha_at(h), alpha_at(0.5 * h), h);
}

/// alpha = (F_11 - F_12) / 2 evaluated on the diagonal of a full probe. Used
/// as an independent cross-check of alpha_from_probes.
template <OutcomeProbe Probe>
AlphaEstimate alpha_from_hessian(Probe&& probe, double mean, int k,
                                 std::optional<double> step = std::nullopt) {
    if (k < 2) throw DomainError("alpha_from_hessian needs k >= 2");
    const double h = step.value_or(default_fd_step(mean));
    detail::check_step(mean, h);

    std::vector<double> mu(static_cast<std::size_t>(k), mean);
    auto eval = [&](double d1, double d2) {
        mu[0] = mean + d1;
        mu[1] = mean + d2;
        const double v = static_cast<double>(probe(std::span<const double>(mu)));
        mu[0] = mu[1] = mean;
        return v;
    };
    auto alpha_at = [&](double hh) {
        const double f11 = (eval(hh, 0) - 2.0 * eval(0, 0) + eval(-hh, 0)) / (hh * hh);
        const double f12 =
            (eval(hh, hh) - eval(hh, -hh) - eval(-hh, hh) + eval(-hh, -hh)) / (4.0 * hh * hh);
        return 0.5 * (f11 - f12);
    };
    return detail::finish(alpha_at(h), alpha_at(0.5 * h), h);
}

/// F_homog(mean) + alpha * sum_i (mu_i - mean)^2.
inline double improved_approx(double homog_value, double alpha, std::span<const double> mu,
                              double mean) {
    double s = 0.0;
    for (double m : mu) s += (m - mean) * (m - mean);
    return homog_value + alpha * s;
}

}  // namespace hetavg
