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
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "hetavg/auction/valuation.hpp"
#include "hetavg/core/errors.hpp"
#include "hetavg/core/scaling.hpp"

namespace hetavg::auction {

inline constexpr int kMaxAsymmetricBidders = 5;

enum class RevenueMethod { symmetric_closed_form, asymmetric_numeric };

struct RevenueReport {
    double revenue = 0.0;
    RevenueMethod method = RevenueMethod::symmetric_closed_form;
};

namespace detail {

/// Adaptive Gauss-Kronrod on [a, b] to relative tolerance 1e-10.
template <class F>
double integrate(F&& f, double a, double b) {
    if (b <= a) return 0.0;
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0;
    return gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-10, &err);
}

}  // namespace detail

/// Symmetric equilibrium bid b(v) = v - int_0^v F^{k-1} / F^{k-1}(v).
inline double symmetric_bid(const ValuationCDF& f, int k, double v) {
    if (k < 2) throw DomainError("symmetric_bid needs k >= 2");
    if (v < 0.0 || v > 1.0) throw DomainError("valuation must lie in [0, 1]");
    if (v == 0.0) return 0.0;
    const double top = std::pow(f.cdf(v), k - 1);
    if (!(top > 0.0)) throw DomainError("symmetric_bid needs F(v) > 0");
    const double area = detail::integrate([&](double s) { return std::pow(f.cdf(s), k - 1); }, 0.0, v);
    return v - area / top;
}

/// R = 1 + (k-1) int_0^1 F^k - k int_0^1 F^{k-1}.
inline RevenueReport symmetric_revenue(const ValuationCDF& f, int k) {
    if (k < 2) throw DomainError("symmetric_revenue needs k >= 2");
    const double ik = detail::integrate([&](double v) { return std::pow(f.cdf(v), k); }, 0.0, 1.0);
    const double ik1 = detail::integrate([&](double v) { return std::pow(f.cdf(v), k - 1); }, 0.0, 1.0);
    return {1.0 + (k - 1) * ik - k * ik1, RevenueMethod::symmetric_closed_form};
}

struct ShootingOptions {
    /// Bisection continues past this width until the bracket stops shrinking
    /// in floating point; the near-zero part of the trajectory needs it.
    double bisection_tolerance = 1e-10;
    int max_bisections = 200;
    /// Grid points where the two bracketing trajectories differ by more than
    /// this are replaced by the linear continuation v_i(b) ~ c_i b to v_i(0) = 0.
    double trajectory_agreement = 1e-7;
    double rtol = 1e-12;
    double atol = 1e-14;
    /// v_i(b) - b below this counts as meeting the diagonal (b_max too large).
    double diagonal_tolerance = 1e-9;
    /// Integration stops here; v_i above `bounded_away` means b_max too small.
    double stop_bid = 1e-8;
    double bounded_away = 1e-6;
    long max_steps = 2'000'000;
};

/// Inverse bid functions v_i on a uniform grid 0 = b_0 < ... < b_M = b_max.
struct EquilibriumSolution {
    double b_max = 0.0;
    std::vector<double> grid;
    /// v[i][j] = v_i(grid[j])
    std::vector<std::vector<double>> v;
    int bisections = 0;
    double bracket_width = 0.0;
    /// Smallest grid bid sampled directly from the shooting trajectory.
    double trusted_from = 0.0;

    int bidders() const noexcept { return static_cast<int>(v.size()); }
};

namespace detail {

enum class Outcome { reached_bottom, met_diagonal };

struct Shot {
    Outcome outcome = Outcome::reached_bottom;
    double stopped_at = 0.0;
    std::vector<double> last_state;
};

using State = std::vector<double>;

/// Right-hand side of the inverse-bid system
///   v_i' = F_i(v_i)/f_i(v_i) * ( sum_j 1/(v_j - b) / (k-1) - 1/(v_i - b) ).
/// States off the admissible region (v_i <= b) yield NaN so the caller
/// classifies the trajectory as having met the diagonal.
struct InverseBidSystem {
    std::span<const ValuationCDF> cdfs;

    void operator()(const State& v, State& dv, double b) const {
        const std::size_t k = v.size();
        double inv_sum = 0.0;
        bool off = false;
        for (std::size_t i = 0; i < k; ++i) {
            const double gap = v[i] - b;
            if (!(gap > 0.0) || !(v[i] <= 1.0 + 1e-9)) off = true;
            inv_sum += 1.0 / gap;
        }
        if (off) {
            std::fill(dv.begin(), dv.end(), std::numeric_limits<double>::quiet_NaN());
            return;
        }
        const double share = inv_sum / static_cast<double>(k - 1);
        for (std::size_t i = 0; i < k; ++i) {
            const double dens = cdfs[i].density(v[i]);
            if (!(dens > 0.0)) {
                std::ostringstream msg;
                msg << "density of bidder " << (i + 1) << " vanishes at v = " << v[i]
                    << " on the equilibrium path (b = " << b << ")";
                throw DomainError(msg.str());
            }
            dv[i] = cdfs[i].cdf(v[i]) / dens * (share - 1.0 / (v[i] - b));
        }
    }
};

/// Integrates backward from v_i(b_max) = 1. When `grid` is non-empty the
/// trajectory is sampled there through the stepper's dense output.
inline Shot shoot(std::span<const ValuationCDF> cdfs, double b_max, const ShootingOptions& opt,
                  const std::vector<double>* grid = nullptr, std::vector<std::vector<double>>* samples = nullptr) {
    namespace ode = boost::numeric::odeint;
    const std::size_t k = cdfs.size();
    InverseBidSystem sys{cdfs};
    Shot shot;
    State x(k, 1.0);

    auto stepper = ode::make_dense_output(opt.atol, opt.rtol, ode::runge_kutta_dopri5<State>());
    stepper.initialize(x, b_max, -1e-3 * b_max);

    auto off_diagonal = [&](const State& s, double b) {
        for (double vi : s) {
            if (!std::isfinite(vi) || vi - b < opt.diagonal_tolerance) return false;
        }
        return true;
    };

    std::ptrdiff_t next_sample = grid ? static_cast<std::ptrdiff_t>(grid->size()) - 1 : -1;
    State tmp(k);
    auto record = [&](double t_low, double t_high) {
        while (next_sample >= 0 && (*grid)[static_cast<std::size_t>(next_sample)] >= t_low) {
            const double b = (*grid)[static_cast<std::size_t>(next_sample)];
            if (b <= t_high) {
                stepper.calc_state(b, tmp);
                for (std::size_t i = 0; i < k; ++i) (*samples)[i][static_cast<std::size_t>(next_sample)] = tmp[i];
            }
            --next_sample;
        }
    };

    for (long step = 0;; ++step) {
        if (step >= opt.max_steps) {
            shot.outcome = Outcome::met_diagonal;
            shot.stopped_at = stepper.current_time();
            break;
        }
        std::pair<double, double> span;
        try {
            span = stepper.do_step(sys);
        } catch (const ode::step_adjustment_error&) {
            shot.outcome = Outcome::met_diagonal;
            shot.stopped_at = stepper.current_time();
            break;
        }
        const double t_new = span.second;
        const State& cur = stepper.current_state();
        if (!off_diagonal(cur, t_new)) {
            shot.outcome = Outcome::met_diagonal;
            shot.stopped_at = t_new;
            break;
        }
        if (t_new <= opt.stop_bid) {
            stepper.calc_state(opt.stop_bid, tmp);
            if (!off_diagonal(tmp, opt.stop_bid)) {
                shot.outcome = Outcome::met_diagonal;
                shot.stopped_at = opt.stop_bid;
                break;
            }
            if (grid) record(opt.stop_bid, span.first);
            shot.outcome = Outcome::reached_bottom;
            shot.stopped_at = opt.stop_bid;
            shot.last_state = tmp;
            return shot;
        }
        if (grid) record(t_new, span.first);
    }
    shot.last_state.assign(stepper.current_state().begin(), stepper.current_state().end());
    return shot;
}

}  // namespace detail

/// Asymmetric first-price equilibrium by backward shooting on the common top
/// bid b_max. A trajectory that meets the diagonal v = b before b = 0 means
/// b_max is too large; one that reaches b = stop_bid means it is too small
/// (or converged). Bisection narrows b_max to `bisection_tolerance`, and the
/// last trajectory that reached the bottom is resampled on `grid_size`
/// uniform intervals.
inline EquilibriumSolution solve_asymmetric(std::span<const ValuationCDF> cdfs, int grid_size = 4096,
                                            const ShootingOptions& opt = {}) {
    const int k = static_cast<int>(cdfs.size());
    if (k < 2) throw DomainError("solve_asymmetric needs k >= 2");
    if (k > kMaxAsymmetricBidders) throw CapacityError("solve_asymmetric supports at most 5 bidders");
    if (grid_size < 2 || grid_size % 2 != 0) throw DomainError("grid_size must be an even integer >= 2");
    for (const auto& f : cdfs) f.validate();

    double lo = 0.0, hi = 1.0;
    int iterations = 0;
    bool have_low = false;
    while (true) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= opt.bisection_tolerance && (mid <= lo || mid >= hi)) break;
        if (++iterations > opt.max_bisections) {
            if (hi - lo <= opt.bisection_tolerance) break;
            std::ostringstream msg;
            msg << "b_max bisection did not converge: bracket [" << lo << ", " << hi << "]";
            throw SolverError(msg.str());
        }
        const auto shot = detail::shoot(cdfs, mid, opt);
        if (shot.outcome == detail::Outcome::met_diagonal) {
            hi = mid;
        } else {
            lo = mid;
            have_low = true;
        }
    }
    if (!have_low) {
        throw SolverError("no trial b_max produced a trajectory reaching b = 0; bracket [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }

    EquilibriumSolution sol;
    sol.b_max = lo;
    sol.bisections = iterations;
    sol.bracket_width = hi - lo;
    sol.grid.resize(static_cast<std::size_t>(grid_size) + 1);
    for (int j = 0; j <= grid_size; ++j) sol.grid[static_cast<std::size_t>(j)] = lo * j / grid_size;
    sol.grid.back() = lo;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    sol.v.assign(static_cast<std::size_t>(k), std::vector<double>(sol.grid.size(), nan));
    const auto final_shot = detail::shoot(cdfs, lo, opt, &sol.grid, &sol.v);
    if (final_shot.outcome != detail::Outcome::reached_bottom) {
        throw SolverError("converged b_max trajectory failed to reach b = 0");
    }

    // The upper trajectory shares the grid (scaled to its own b_max) and
    // crashes into the diagonal; the true solution lies between the two.
    std::vector<double> upper_grid(sol.grid.size());
    for (std::size_t j = 0; j < upper_grid.size(); ++j) upper_grid[j] = sol.grid[j] * (hi / lo);
    std::vector<std::vector<double>> upper(static_cast<std::size_t>(k), std::vector<double>(sol.grid.size(), nan));
    if (hi < 1.0) detail::shoot(cdfs, hi, opt, &upper_grid, &upper);

    std::size_t trusted = sol.grid.size() - 1;
    while (trusted > 1) {
        const std::size_t j = trusted - 1;
        bool agree = true;
        for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
            const double d = std::abs(sol.v[i][j] - upper[i][j]);
            if (!(d <= opt.trajectory_agreement)) agree = false;
        }
        if (!agree) break;
        trusted = j;
    }
    const double b_trust = sol.grid[trusted];
    for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
        const double slope = sol.v[i][trusted] / b_trust;
        for (std::size_t j = 0; j < trusted; ++j) sol.v[i][j] = slope * sol.grid[j];
        sol.v[i].back() = 1.0;
    }
    sol.trusted_from = b_trust;
    return sol;
}

inline EquilibriumSolution solve_asymmetric(const std::vector<ValuationCDF>& cdfs, int grid_size = 4096,
                                            const ShootingOptions& opt = {}) {
    return solve_asymmetric(std::span<const ValuationCDF>(cdfs), grid_size, opt);
}

/// Threshold on the trapezoid error estimate.
inline constexpr double kRevenueQuadratureLimit = 1e-5;

/// R = b_max - int_0^{b_max} prod_i F_i(v_i(b)) db, trapezoid rule on the
/// solution grid. The error estimate compares against the half-resolution
/// grid.
inline RevenueReport asymmetric_revenue(const EquilibriumSolution& sol, std::span<const ValuationCDF> cdfs) {
    if (static_cast<int>(cdfs.size()) != sol.bidders()) {
        throw DomainError("asymmetric_revenue: CDF count does not match the solution");
    }
    const std::size_t n = sol.grid.size();
    std::vector<double> g(n, 1.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < cdfs.size(); ++i) g[j] *= cdfs[i].cdf(sol.v[i][j]);

    auto trapezoid = [&](std::size_t stride) {
        double s = 0.0;
        for (std::size_t j = stride; j < n; j += stride) {
            s += 0.5 * (g[j] + g[j - stride]) * (sol.grid[j] - sol.grid[j - stride]);
        }
        return s;
    };
    const double fine = trapezoid(1);
    const double coarse = trapezoid(2);
    const double err = std::abs(fine - coarse) / 3.0;
    if (err > kRevenueQuadratureLimit) {
        std::ostringstream msg;
        msg << "revenue quadrature error estimate " << err << " exceeds " << kRevenueQuadratureLimit
            << "; refine the grid";
        throw DiagnosticsError(msg.str());
    }
    return {sol.b_max - fine, RevenueMethod::asymmetric_numeric};
}

inline RevenueReport asymmetric_revenue(const EquilibriumSolution& sol, const std::vector<ValuationCDF>& cdfs) {
    return asymmetric_revenue(sol, std::span<const ValuationCDF>(cdfs));
}

/// Builds F_i = F + eps H_i.
inline std::vector<ValuationCDF> perturbed_family(const ValuationCDF& base, std::span<const Perturbation> hs,
                                                  double eps) {
    std::vector<ValuationCDF> out;
    out.reserve(hs.size());
    for (const auto& h : hs) out.push_back(ValuationCDF::perturbed(base, h, eps));
    return out;
}

/// Revenue of the asymmetric equilibrium for F_i = F + eps H_i.
inline double perturbed_revenue(const ValuationCDF& base, std::span<const Perturbation> hs, double eps,
                                int grid_size = 4096) {
    const auto cdfs = perturbed_family(base, hs, eps);
    return asymmetric_revenue(solve_asymmetric(cdfs, grid_size), cdfs).revenue;
}

/// dR/d(eps) at eps = 0 to first order:
///   -(k-1) int_0^1 (1 - F) F^{k-2} sum_i H_i dv.
inline double first_order_coefficient(const ValuationCDF& base, std::span<const Perturbation> hs) {
    const int k = static_cast<int>(hs.size());
    if (k < 2) throw DomainError("first-order coefficient needs k >= 2");
    const double integral = detail::integrate(
        [&](double v) {
            double sum_h = 0.0;
            for (const auto& h : hs) sum_h += h(v);
            const double f = base.cdf(v);
            return (1.0 - f) * std::pow(f, k - 2) * sum_h;
        },
        0.0, 1.0);
    return -(k - 1) * integral;
}

/// Central difference of eps -> perturbed_revenue at 0 with one Richardson
/// level; the independent numeric route to the first-order coefficient.
inline double revenue_slope_fd(const ValuationCDF& base, std::span<const Perturbation> hs, double delta = 0.02,
                               int grid_size = 4096) {
    auto central = [&](double d) {
        return (perturbed_revenue(base, hs, d, grid_size) - perturbed_revenue(base, hs, -d, grid_size)) / (2.0 * d);
    };
    const double coarse = central(delta);
    const double fine = central(0.5 * delta);
    return (4.0 * fine - coarse) / 3.0;
}

struct FirstOrderRow {
    double epsilon = 0.0;
    double r_numeric = std::numeric_limits<double>::quiet_NaN();
    double r_first_order = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN();
    bool valid = true;
    std::string note;
};

struct FirstOrderReport {
    double r_homog = 0.0;
    double coefficient = 0.0;
    std::vector<FirstOrderRow> rows;
    /// Fit of |residual| against eps over valid rows with eps > 0; empty
    /// with fewer than four usable rows.
    std::optional<ScalingFit> residual_fit;
};

/// Compares the numeric revenue with R_homog[F] + eps * coefficient across
/// an eps sweep. Rows whose perturbed CDF is invalid are flagged, not dropped.
inline FirstOrderReport first_order_check(const ValuationCDF& base, std::span<const Perturbation> hs, int k,
                                          std::span<const double> epsilons, int grid_size = 4096) {
    if (static_cast<int>(hs.size()) != k) throw DomainError("first_order_check: need one perturbation per bidder");
    FirstOrderReport report;
    report.r_homog = symmetric_revenue(base, k).revenue;
    report.coefficient = first_order_coefficient(base, hs);
    std::vector<ScalingPoint> pts;
    for (double eps : epsilons) {
        FirstOrderRow row;
        row.epsilon = eps;
        row.r_first_order = report.r_homog + eps * report.coefficient;
        try {
            row.r_numeric = perturbed_revenue(base, hs, eps, grid_size);
            row.residual = row.r_numeric - row.r_first_order;
            if (eps > 0.0 && std::abs(row.residual) > 0.0) pts.push_back({eps, std::abs(row.residual)});
        } catch (const DomainError& e) {
            row.valid = false;
            row.note = e.what();
        }
        report.rows.push_back(std::move(row));
    }
    if (pts.size() >= 4) report.residual_fit = fit_scaling(pts);
    return report;
}

struct AveragingGap {
    double r_asym = 0.0;
    double r_homog_at_mean = 0.0;
    /// r_asym - r_homog_at_mean
    double gap = 0.0;
};

/// Asymmetric revenue against the symmetric revenue at the pointwise mean CDF.
inline AveragingGap averaging_check(std::span<const ValuationCDF> cdfs, int grid_size = 4096) {
    const int k = static_cast<int>(cdfs.size());
    AveragingGap out;
    out.r_asym = asymmetric_revenue(solve_asymmetric(cdfs, grid_size), cdfs).revenue;
    out.r_homog_at_mean = symmetric_revenue(ValuationCDF::mean(cdfs), k).revenue;
    out.gap = out.r_asym - out.r_homog_at_mean;
    return out;
}

inline AveragingGap averaging_check(const std::vector<ValuationCDF>& cdfs, int grid_size = 4096) {
    return averaging_check(std::span<const ValuationCDF>(cdfs), grid_size);
}

}  // namespace hetavg::auction
