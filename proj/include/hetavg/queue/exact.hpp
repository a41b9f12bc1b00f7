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
#include <bit>
#include <cstdint>
#include <limits>
#include <string>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "hetavg/core/alpha.hpp"
#include "hetavg/core/errors.hpp"
#include "hetavg/queue/params.hpp"
#include "hetavg/queue/state_space.hpp"

namespace hetavg::queue {

/// Solves exceeding this condition estimate are rejected.
inline constexpr double kConditionLimit = 1e12;

/// Global-balance equations over the subset states with the seed p_k fixed
/// to 1 and moved to the right-hand side.
struct BalanceSystem {
    BusyStateSpace space;
    Eigen::MatrixXd matrix;
    Eigen::VectorXd rhs;
};

/// Arrivals go to a uniformly chosen free server (rate lambda/#free each);
/// busy server i completes at rate mu_i.
inline BalanceSystem build_balance_system(const MMkParams& params) {
    params.validate();
    if (params.k() > kMaxExactServers) {
        throw CapacityError("exact solver supports at most 14 servers");
    }
    const int k = params.k();
    BusyStateSpace space(k);
    const auto n = static_cast<Eigen::Index>(space.subset_count());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    const auto full = space.full_mask();

    for (Eigen::Index row = 0; row < n; ++row) {
        const auto s = space.mask(static_cast<std::size_t>(row));
        const int busy = BusyStateSpace::busy_count(s);
        double out = params.lambda;
        for (int i = 0; i < k; ++i) {
            const BusyStateSpace::Mask bit = BusyStateSpace::Mask{1} << i;
            if (s & bit) {
                out += params.rates[i];
                // arrival into server i from S \ {i}, which has k - busy + 1 free servers
                const auto from = static_cast<Eigen::Index>(space.ordinal(s & ~bit));
                a(row, from) -= params.lambda / static_cast<double>(k - busy + 1);
            } else {
                const auto up = s | bit;
                if (up == full) {
                    rhs(row) += params.rates[i];
                } else {
                    a(row, static_cast<Eigen::Index>(space.ordinal(up))) -= params.rates[i];
                }
            }
        }
        a(row, row) += out;
    }
    return {std::move(space), std::move(a), std::move(rhs)};
}

struct SteadyStateSummary {
    int servers = 0;
    /// Probability of each subset state, in BusyStateSpace ordinal order.
    std::vector<double> p_subsets;
    std::vector<std::uint32_t> subset_masks;
    /// Probability of exactly k customers.
    double p_full_seed = 0.0;
    /// rho; p_n = rho^(n-k) p_k for n >= k.
    double tail_ratio = 0.0;
    double expected_customers = 0.0;

    /// Subset probabilities plus the closed-form geometric tail.
    double total_probability() const {
        double s = 0.0;
        for (double p : p_subsets) s += p;
        return s + p_full_seed / (1.0 - tail_ratio);
    }

    /// Distribution of the number in system, p_0 .. p_{n_max}.
    std::vector<double> occupancy(int n_max) const {
        std::vector<double> p(static_cast<std::size_t>(n_max) + 1, 0.0);
        for (std::size_t i = 0; i < p_subsets.size(); ++i) {
            const int n = std::popcount(subset_masks[i]);
            if (n <= n_max) p[static_cast<std::size_t>(n)] += p_subsets[i];
        }
        double tail = p_full_seed;
        for (int n = servers; n <= n_max; ++n, tail *= tail_ratio) p[static_cast<std::size_t>(n)] = tail;
        return p;
    }
};

namespace detail {

/// Dense LU solve guarded by the reciprocal condition estimate.
inline Eigen::VectorXd guarded_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs,
                                     const char* what) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const double rcond = lu.rcond();
    const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(cond <= kConditionLimit)) {
        std::ostringstream msg;
        msg << what << ": balance matrix is ill-conditioned (condition estimate " << cond
            << ", limit " << kConditionLimit << ")";
        throw NumericalError(msg.str(), cond);
    }
    Eigen::VectorXd x = lu.solve(rhs);
    if (!x.allFinite()) throw NumericalError(std::string(what) + ": non-finite solution", cond);
    return x;
}

/// sum_{n>=k} n rho^(n-k), closed form.
inline double tail_moment(int k, double rho) {
    const double q = 1.0 - rho;
    return static_cast<double>(k) / q + rho / (q * q);
}

}  // namespace detail

/// Full CTMC steady state. The seed is fixed to 1 during the solve and the
/// result is rescaled so that subsets plus tail sum to one.
inline SteadyStateSummary solve_steady_state(const MMkParams& params) {
    const BalanceSystem sys = build_balance_system(params);
    const Eigen::VectorXd x = detail::guarded_solve(sys.matrix, sys.rhs, "solve_steady_state");

    const int k = params.k();
    const double rho = params.traffic_intensity();
    double mass = 1.0 / (1.0 - rho);
    double moment = detail::tail_moment(k, rho);
    SteadyStateSummary out;
    out.servers = k;
    out.tail_ratio = rho;
    out.p_subsets.resize(static_cast<std::size_t>(x.size()));
    out.subset_masks.resize(out.p_subsets.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const auto m = sys.space.mask(static_cast<std::size_t>(i));
        out.subset_masks[static_cast<std::size_t>(i)] = m;
        mass += x(i);
        moment += BusyStateSpace::busy_count(m) * x(i);
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) out.p_subsets[static_cast<std::size_t>(i)] = x(i) / mass;
    out.p_full_seed = 1.0 / mass;
    out.expected_customers = moment / mass;
    return out;
}

inline double expected_customers(const MMkParams& params) {
    return solve_steady_state(params).expected_customers;
}

/// Closed form for two heterogeneous servers.
inline double mm2_closed_form(double lambda, double mu1, double mu2) {
    MMkParams{lambda, {mu1, mu2}}.validate();
    const double total = mu1 + mu2;
    const double rho = lambda / total;
    const double q = 1.0 - rho;
    return 1.0 / (q * q) / ((1.0 / rho) * 2.0 * mu1 * mu2 / (total * total) + 1.0 / q);
}

/// Expected number in system for k identical servers (Erlang-C form).
inline double homog_closed_form(double lambda, double mu, int k) {
    if (k < 1) throw DomainError("homog_closed_form needs k >= 1");
    if (!(mu > 0.0) || !(lambda > 0.0)) throw DomainError("rates must be positive");
    const double a = lambda / mu;
    const double r = a / static_cast<double>(k);
    if (!(r < 1.0)) {
        std::ostringstream msg;
        msg << "unstable queue: lambda = " << lambda << " >= k mu = " << k * mu;
        throw DomainError(msg.str());
    }
    double term = 1.0;  // a^n / n!
    double head = 0.0;
    for (int n = 0; n < k; ++n) {
        head += term;
        term *= a / static_cast<double>(n + 1);
    }
    const double q = 1.0 - r;
    const double waiting = term * (r / q) / (head + term / q) / q;
    return waiting + a;
}

/// Expected customers with one distinguished server (rate mu1) and k-1
/// identical servers (rate mu). States are (b, n): b flags the distinguished
/// server busy, n counts busy identical servers, b + n <= k-1; 2k-1 unknowns
/// plus the all-busy seed.
inline double single_coordinate_L(double lambda, double mu1, double mu, int k) {
    if (k < 2) throw DomainError("single_coordinate_L needs k >= 2");
    std::vector<double> rates(static_cast<std::size_t>(k), mu);
    rates[0] = mu1;
    const MMkParams params{lambda, rates};
    params.validate();

    const int n_states = 2 * k - 1;
    auto index = [k](int b, int n) { return b == 0 ? n : k + n; };
    auto exists = [k](int b, int n) { return n >= 0 && b + n <= k - 1; };
    auto is_seed = [k](int b, int n) { return b + n == k && n <= k - 1; };

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_states, n_states);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_states);
    for (int b = 0; b <= 1; ++b) {
        for (int n = 0; exists(b, n); ++n) {
            const int row = index(b, n);
            const int free = k - b - n;
            a(row, row) = lambda + b * mu1 + n * mu;
            // arrival to an idle identical server from (b, n-1)
            if (n >= 1) a(row, index(b, n - 1)) -= lambda * (k - n) / static_cast<double>(free + 1);
            // arrival to the distinguished server from (0, n)
            if (b == 1) a(row, index(0, n)) -= lambda / static_cast<double>(k - n);
            // an identical server finishes in (b, n+1)
            if (is_seed(b, n + 1)) {
                rhs(row) += (n + 1) * mu;
            } else if (exists(b, n + 1)) {
                a(row, index(b, n + 1)) -= (n + 1) * mu;
            }
            // the distinguished server finishes in (1, n)
            if (b == 0) {
                if (is_seed(1, n)) {
                    rhs(row) += mu1;
                } else if (exists(1, n)) {
                    a(row, index(1, n)) -= mu1;
                }
            }
        }
    }
    const Eigen::VectorXd x = detail::guarded_solve(a, rhs, "single_coordinate_L");
    const double rho = params.traffic_intensity();
    double mass = 1.0 / (1.0 - rho);
    double moment = detail::tail_moment(k, rho);
    for (int b = 0; b <= 1; ++b) {
        for (int n = 0; exists(b, n); ++n) {
            mass += x(index(b, n));
            moment += (b + n) * x(index(b, n));
        }
    }
    return moment / mass;
}

/// Numerator (c, degree 12) and denominator (b, degree 7) coefficients of the
/// rational k = 8 second-order coefficient.
struct AlphaK8Coefficients {
    std::array<double, 13> c;
    std::array<double, 8> b;
};

inline constexpr AlphaK8Coefficients kAlphaK8Table{
    {1, 45, 999, 14280, 144720, 1088640, 6249600, 27941760, 97977600, 263390400, 514382400,
     653184000, 406425600},
    {1, 14, 126, 840, 4200, 15120, 35280, 40320}};

/// alpha(k=8) = 1/(2 lambda mu_bar) * C(x) / B(x)^2 with x = mu_bar / lambda.
inline double alpha_k8_published(double lambda, double mu_bar,
                                 const AlphaK8Coefficients& table = kAlphaK8Table) {
    if (!(lambda > 0.0) || !(mu_bar > 0.0) || !std::isfinite(lambda) || !std::isfinite(mu_bar)) {
        throw DomainError("alpha_k8_published needs positive finite lambda and mu_bar");
    }
    const double x = mu_bar / lambda;
    double num = 0.0, den = 0.0;
    for (auto it = table.c.rbegin(); it != table.c.rend(); ++it) num = num * x + *it;
    for (auto it = table.b.rbegin(); it != table.b.rend(); ++it) den = den * x + *it;
    return num / (den * den) / (2.0 * lambda * mu_bar);
}

/// Second-order coefficient for k servers from the single-coordinate and
/// homogeneous solvers.
inline AlphaEstimate alpha_numeric(double lambda, double mu_bar, int k,
                                   std::optional<double> step = std::nullopt) {
    return alpha_from_probes(
        [&](double mu1, double mu) { return single_coordinate_L(lambda, mu1, mu, k); },
        [&](double mu) { return homog_closed_form(lambda, mu, k); }, mu_bar, k, step);
}

}  // namespace hetavg::queue
