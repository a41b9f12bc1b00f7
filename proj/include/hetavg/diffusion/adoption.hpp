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
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "hetavg/core/errors.hpp"
#include "hetavg/core/means.hpp"
#include "hetavg/core/parallel.hpp"
#include "hetavg/core/profile.hpp"
#include "hetavg/core/rng.hpp"
#include "hetavg/core/scaling.hpp"
#include "hetavg/diffusion/network.hpp"

namespace hetavg::diffusion {

/// Largest population handled by the subset master equation (2^16 states).
inline constexpr int kMaxExactAgents = 16;

struct AgentParams {
    std::vector<double> p;  // external adoption rate per agent
    std::vector<double> q;  // word-of-mouth rate per agent

    static AgentParams homogeneous(int m, double p, double q) {
        return {std::vector<double>(static_cast<std::size_t>(m), p),
                std::vector<double>(static_cast<std::size_t>(m), q)};
    }

    int size() const noexcept { return static_cast<int>(p.size()); }

    void validate(int m) const {
        if (static_cast<int>(p.size()) != m || static_cast<int>(q.size()) != m) {
            throw DomainError("agent parameter vectors must have one entry per network vertex");
        }
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (!(p[j] > 0.0) || !std::isfinite(p[j])) {
                std::ostringstream msg;
                msg << "p_" << (j + 1) << " = " << p[j] << " must be positive";
                throw DomainError(msg.str());
            }
            if (!(q[j] >= 0.0) || !std::isfinite(q[j])) {
                std::ostringstream msg;
                msg << "q_" << (j + 1) << " = " << q[j] << " must be nonnegative";
                throw DomainError(msg.str());
            }
        }
    }
};

struct AdoptionCurve {
    std::vector<double> times;
    std::vector<double> expected_adopters;
    /// Monte Carlo standard errors; all zero on the exact path.
    std::vector<double> std_errors;
    /// Total master-equation probability at each time; empty for simulation.
    std::vector<double> probability_mass;
};

namespace detail {

inline void check_times(const std::vector<double>& times) {
    if (times.empty()) throw DomainError("time grid must not be empty");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0) || !std::isfinite(times[i])) {
            throw DomainError("time grid entries must be finite and nonnegative");
        }
        if (i > 0 && !(times[i] > times[i - 1])) throw DomainError("time grid must be strictly increasing");
    }
}

/// Adoption hazard of agent j given adopter set `adopted`.
inline double hazard(const NetworkTopology& net, const AgentParams& a, std::uint64_t adopted, int j) {
    const auto ju = static_cast<std::size_t>(j);
    if (net.degree() == 0 || a.q[ju] == 0.0) return a.p[ju];
    const int n = std::popcount(adopted & net.neighbor_mask(j));
    return a.p[ju] + a.q[ju] * n / net.degree();
}

/// dP/dt = Q^T P over adopter subsets, with transition rates stored densely
/// as rate[S * M + j] for j not in S.
class MasterEquation {
public:
    MasterEquation(const NetworkTopology& net, const AgentParams& a)
        : m_(net.size()), states_(std::size_t{1} << m_),
          rate_(states_ * static_cast<std::size_t>(m_), 0.0), out_(states_, 0.0) {
        for (std::size_t s = 0; s < states_; ++s) {
            double total = 0.0;
            for (int j = 0; j < m_; ++j) {
                if (s >> j & 1u) continue;
                const double r = hazard(net, a, s, j);
                rate_[s * static_cast<std::size_t>(m_) + static_cast<std::size_t>(j)] = r;
                total += r;
            }
            out_[s] = total;
        }
    }

    std::size_t states() const noexcept { return states_; }

    void operator()(const std::vector<double>& prob, std::vector<double>& dprob, double /*t*/) const {
        for (std::size_t s = 0; s < states_; ++s) dprob[s] = -out_[s] * prob[s];
        for (std::size_t s = 0; s < states_; ++s) {
            const double ps = prob[s];
            if (ps == 0.0) continue;
            const double* r = &rate_[s * static_cast<std::size_t>(m_)];
            for (int j = 0; j < m_; ++j) {
                if (s >> j & 1u) continue;
                dprob[s | (std::size_t{1} << j)] += r[j] * ps;
            }
        }
    }

private:
    int m_;
    std::size_t states_;
    std::vector<double> rate_;
    std::vector<double> out_;
};

}  // namespace detail

inline constexpr double kExactRelTol = 1e-10;
inline constexpr double kExactAbsTol = 1e-12;

/// E[N(t)] from the subset master equation, started from no adopters.
inline AdoptionCurve exact_curve(const NetworkTopology& net, const AgentParams& agents,
                                 const std::vector<double>& times) {
    const int m = net.size();
    if (m > kMaxExactAgents) {
        throw CapacityError("exact diffusion solve supports M <= " + std::to_string(kMaxExactAgents) +
                            " (got M = " + std::to_string(m) + ")");
    }
    agents.validate(m);
    detail::check_times(times);

    const detail::MasterEquation system(net, agents);
    std::vector<double> prob(system.states(), 0.0);
    prob[0] = 1.0;

    // Integration always starts at t = 0 where P(empty set) = 1.
    std::vector<double> grid;
    grid.reserve(times.size() + 1);
    const bool prepend = times.front() > 0.0;
    if (prepend) grid.push_back(0.0);
    grid.insert(grid.end(), times.begin(), times.end());

    AdoptionCurve curve;
    curve.times = times;
    curve.std_errors.assign(times.size(), 0.0);
    std::size_t seen = 0;
    auto observe = [&](const std::vector<double>& x, double) {
        if (seen++ == 0 && prepend) return;
        double expected = 0.0, mass = 0.0;
        for (std::size_t s = 0; s < x.size(); ++s) {
            expected += std::popcount(s) * x[s];
            mass += x[s];
        }
        curve.expected_adopters.push_back(expected);
        curve.probability_mass.push_back(mass);
    };

    namespace ode = boost::numeric::odeint;
    using stepper_t = ode::runge_kutta_dopri5<std::vector<double>>;
    try {
        auto stepper = ode::make_dense_output(kExactAbsTol, kExactRelTol, stepper_t());
        const double span = grid.back() - grid.front();
        const double first_step = span > 0.0 ? std::min(1e-3, span / 100.0) : 1e-3;
        ode::integrate_times(stepper, std::cref(system), prob, grid.begin(), grid.end(), first_step, observe,
                             ode::max_step_checker(1'000'000));
    } catch (const ode::odeint_error& e) {
        throw SolverError(std::string("master equation integration failed: ") + e.what());
    }
    if (curve.expected_adopters.size() != times.size()) {
        throw SolverError("master equation integration did not reach every output time");
    }
    return curve;
}

struct SimulationOptions {
    int replications = 2000;
    std::uint64_t seed = 20260101;
};

namespace detail {

inline constexpr std::uint32_t kDiffusionStreamTag = 0xd1ff;

/// One Gillespie path; writes N(t) for each grid time into `counts`.
inline void simulate_path(const NetworkTopology& net, const AgentParams& a, const std::vector<double>& times,
                          ReplicationStream& rng, std::vector<double>& counts) {
    const int m = net.size();
    std::vector<int> influenced(static_cast<std::size_t>(m), 0);
    std::vector<char> adopted(static_cast<std::size_t>(m), 0);
    std::vector<double> rate(static_cast<std::size_t>(m));
    const double degree = net.degree();
    auto hazard_of = [&](int j) {
        const auto ju = static_cast<std::size_t>(j);
        if (adopted[ju]) return 0.0;
        if (degree == 0.0) return a.p[ju];
        return a.p[ju] + a.q[ju] * influenced[ju] / degree;
    };
    double total = 0.0;
    for (int j = 0; j < m; ++j) total += rate[static_cast<std::size_t>(j)] = hazard_of(j);

    double t = 0.0;
    int adopters = 0;
    std::size_t g = 0;
    while (adopters < m) {
        t += rng.exponential(total);
        while (g < times.size() && times[g] < t) counts[g++] = adopters;
        if (g == times.size()) return;

        double u = rng.uniform() * total;
        int chosen = -1;
        for (int j = 0; j < m; ++j) {
            const double r = rate[static_cast<std::size_t>(j)];
            if (r <= 0.0) continue;
            chosen = j;
            if (u < r) break;
            u -= r;
        }
        adopted[static_cast<std::size_t>(chosen)] = 1;
        ++adopters;
        for (int n : net.neighbors(chosen)) ++influenced[static_cast<std::size_t>(n)];
        rate[static_cast<std::size_t>(chosen)] = 0.0;
        for (int n : net.neighbors(chosen)) rate[static_cast<std::size_t>(n)] = hazard_of(n);
        // Re-summing avoids drift from repeated subtraction.
        total = 0.0;
        for (double r : rate) total += r;
    }
    while (g < times.size()) counts[g++] = m;
}

}  // namespace detail

/// Monte Carlo estimate of E[N(t)] by exact stochastic simulation.
inline AdoptionCurve simulate_curve(const NetworkTopology& net, const AgentParams& agents,
                                    const std::vector<double>& times, const SimulationOptions& opt = {}) {
    agents.validate(net.size());
    detail::check_times(times);
    if (opt.replications < 1) throw DomainError("replications must be >= 1");

    const auto reps = static_cast<std::size_t>(opt.replications);
    std::vector<std::vector<double>> paths(reps, std::vector<double>(times.size(), 0.0));
    parallel_for(reps, [&](std::size_t r) {
        ReplicationStream rng(opt.seed, r, detail::kDiffusionStreamTag);
        detail::simulate_path(net, agents, times, rng, paths[r]);
    });

    AdoptionCurve curve;
    curve.times = times;
    curve.expected_adopters.assign(times.size(), 0.0);
    curve.std_errors.assign(times.size(), 0.0);
    const auto n = static_cast<double>(reps);
    for (std::size_t g = 0; g < times.size(); ++g) {
        double sum = 0.0;
        for (const auto& path : paths) sum += path[g];
        const double avg = sum / n;
        double ss = 0.0;
        for (const auto& path : paths) ss += (path[g] - avg) * (path[g] - avg);
        curve.expected_adopters[g] = avg;
        curve.std_errors[g] = reps > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    }
    return curve;
}

/// Places one agent with (p_tilde, q_tilde) at every vertex in turn, the rest
/// having (p, q), and returns the largest spread of E[N(t)] across placements.
inline double weak_interchangeability_check(const NetworkTopology& net, double p, double q, double p_tilde,
                                            double q_tilde, const std::vector<double>& times) {
    const int m = net.size();
    if (m > kMaxExactAgents) throw CapacityError("weak interchangeability check needs M <= 16");
    std::vector<AdoptionCurve> curves(static_cast<std::size_t>(m));
    parallel_for(curves.size(), [&](std::size_t j) {
        AgentParams a = AgentParams::homogeneous(m, p, q);
        a.p[j] = p_tilde;
        a.q[j] = q_tilde;
        curves[j] = exact_curve(net, a, times);
    });
    double deviation = 0.0;
    for (std::size_t g = 0; g < times.size(); ++g) {
        double lo = curves[0].expected_adopters[g], hi = lo;
        for (const auto& c : curves) {
            lo = std::min(lo, c.expected_adopters[g]);
            hi = std::max(hi, c.expected_adopters[g]);
        }
        deviation = std::max(deviation, hi - lo);
    }
    return deviation;
}

struct DiffusionGapRow {
    double scale = 0.0;
    /// max of the heterogeneity levels of p and q
    double level = 0.0;
    double max_gap = 0.0;
    /// max over t > 0 of gap(t) / E_homog[N(t)]
    double max_rel_gap = 0.0;
};

struct DiffusionAveragingReport {
    AdoptionCurve homogeneous;
    std::vector<DiffusionGapRow> rows;
    /// Fit of max_gap against level over rows with a positive gap; absent
    /// when fewer than four such rows exist.
    std::optional<ScalingFit> fit;
};

/// Compares heterogeneous curves at p_base + eps*h_p, q_base + eps*h_q with
/// the homogeneous curve at the bases, for each eps in `epsilons`.
inline DiffusionAveragingReport averaging_check(const NetworkTopology& net, const HeterogeneityProfile& profile_p,
                                                const HeterogeneityProfile& profile_q,
                                                const std::vector<double>& times,
                                                const std::vector<double>& epsilons) {
    const int m = net.size();
    if (static_cast<int>(profile_p.size()) != m || static_cast<int>(profile_q.size()) != m) {
        throw DomainError("profile length must equal network size");
    }
    for (const auto* prof : {&profile_p, &profile_q}) {
        if (std::abs(prof->direction_sum()) > 1e-12 * (1.0 + std::sqrt(prof->direction_norm2()))) {
            throw DomainError("averaging check needs direction vectors summing to zero");
        }
    }
    for (double eps : epsilons) {
        profile_p.with_scale(eps).materialize([](double v) { return v > 0.0; }, "averaging_check p");
        profile_q.with_scale(eps).materialize([](double v) { return v >= 0.0; }, "averaging_check q");
    }

    DiffusionAveragingReport report;
    report.homogeneous = exact_curve(net, AgentParams::homogeneous(m, profile_p.base(), profile_q.base()), times);
    const auto& e0 = report.homogeneous.expected_adopters;
    const double floor = 1e-9 * m;

    report.rows.resize(epsilons.size());
    parallel_for(epsilons.size(), [&](std::size_t i) {
        const double eps = epsilons[i];
        AgentParams a{profile_p.with_scale(eps).materialize(), profile_q.with_scale(eps).materialize()};
        const auto curve = exact_curve(net, a, times);
        DiffusionGapRow& row = report.rows[i];
        row.scale = eps;
        row.level = std::max(heterogeneity_level(a.p, profile_p.base()), heterogeneity_level(a.q, profile_q.base()));
        for (std::size_t g = 0; g < times.size(); ++g) {
            const double gap = std::abs(curve.expected_adopters[g] - e0[g]);
            row.max_gap = std::max(row.max_gap, gap);
            if (e0[g] > floor) row.max_rel_gap = std::max(row.max_rel_gap, gap / e0[g]);
        }
    });

    std::vector<ScalingPoint> points;
    for (const auto& row : report.rows)
        if (row.level > 0.0 && row.max_gap > 0.0) points.push_back({row.level, row.max_gap});
    std::vector<double> abscissae;
    for (const auto& pt : points) abscissae.push_back(pt.scale);
    std::sort(abscissae.begin(), abscissae.end());
    if (std::unique(abscissae.begin(), abscissae.end()) - abscissae.begin() >= 4) report.fit = fit_scaling(points);
    return report;
}

}  // namespace hetavg::diffusion
