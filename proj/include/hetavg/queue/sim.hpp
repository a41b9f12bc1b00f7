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
#include <cstdint>
#include <deque>
#include <limits>
#include <sstream>
#include <vector>

#include "hetavg/core/alpha.hpp"
#include "hetavg/core/errors.hpp"
#include "hetavg/core/means.hpp"
#include "hetavg/core/parallel.hpp"
#include "hetavg/core/rng.hpp"
#include "hetavg/queue/exact.hpp"
#include "hetavg/queue/params.hpp"

namespace hetavg::queue {

struct SimConfig {
    MMkParams params;
    double horizon = 2e5;
    double warmup = 1e4;
    int replications = 32;
    std::uint64_t seed = 20260101;

    void validate() const {
        params.validate();
        if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be positive");
        if (!(warmup >= 0.0) || !(warmup < horizon)) {
            throw DomainError("warmup must satisfy 0 <= warmup < horizon");
        }
        if (replications < 1) throw DomainError("replications must be >= 1");
    }
};

struct SimResult {
    /// Time-average number in system over (warmup, horizon], averaged over
    /// replications.
    double mean_customers = 0.0;
    double std_error = 0.0;
    std::vector<double> per_replication;
    /// Mean sojourn of customers arriving after warmup and leaving before the
    /// horizon; used for Little's-law checks.
    double mean_sojourn = 0.0;
    double sojourn_std_error = 0.0;
    std::vector<double> per_replication_sojourn;
};

namespace detail {

struct ReplicationOutput {
    double time_average = 0.0;
    double mean_sojourn = 0.0;
};

inline ReplicationOutput run_replication(const SimConfig& cfg, std::uint64_t index) {
    ReplicationStream rng(cfg.seed, index);
    const auto& mu = cfg.params.rates;
    const std::size_t k = mu.size();
    constexpr double never = std::numeric_limits<double>::infinity();

    std::vector<double> departure(k, never);
    std::vector<double> arrived_at(k, 0.0);
    std::vector<std::size_t> free_servers(k);
    for (std::size_t i = 0; i < k; ++i) free_servers[i] = i;
    std::deque<double> waiting;  // arrival times, FIFO

    double now = 0.0;
    double next_arrival = rng.exponential(cfg.params.lambda);
    std::size_t in_system = 0;
    double area = 0.0;
    double sojourn_sum = 0.0;
    std::size_t sojourn_count = 0;

    auto advance = [&](double t) {
        const double from = std::max(now, cfg.warmup);
        if (t > from) area += static_cast<double>(in_system) * (t - from);
        now = t;
    };
    auto start_service = [&](std::size_t server, double arrival_time) {
        arrived_at[server] = arrival_time;
        departure[server] = now + rng.exponential(mu[server]);
    };

    while (true) {
        std::size_t next_server = k;
        double next_departure = never;
        for (std::size_t i = 0; i < k; ++i) {
            if (departure[i] < next_departure) {
                next_departure = departure[i];
                next_server = i;
            }
        }
        const double t = std::min(next_arrival, next_departure);
        if (t > cfg.horizon) {
            advance(cfg.horizon);
            break;
        }
        advance(t);
        if (next_arrival <= next_departure) {
            ++in_system;
            if (!free_servers.empty()) {
                const std::size_t pick = rng.index(free_servers.size());
                const std::size_t server = free_servers[pick];
                free_servers[pick] = free_servers.back();
                free_servers.pop_back();
                start_service(server, now);
            } else {
                waiting.push_back(now);
            }
            next_arrival = now + rng.exponential(cfg.params.lambda);
        } else {
            --in_system;
            if (arrived_at[next_server] >= cfg.warmup) {
                sojourn_sum += now - arrived_at[next_server];
                ++sojourn_count;
            }
            departure[next_server] = never;
            if (!waiting.empty()) {
                const double arrival_time = waiting.front();
                waiting.pop_front();
                start_service(next_server, arrival_time);
            } else {
                free_servers.push_back(next_server);
            }
        }
    }
    ReplicationOutput out;
    out.time_average = area / (cfg.horizon - cfg.warmup);
    out.mean_sojourn = sojourn_count > 0 ? sojourn_sum / static_cast<double>(sojourn_count) : 0.0;
    return out;
}

inline void mean_and_error(const std::vector<double>& xs, double& mean_out, double& se_out) {
    const auto n = static_cast<double>(xs.size());
    double s = 0.0;
    for (double x : xs) s += x;
    mean_out = s / n;
    if (xs.size() < 2) {
        se_out = 0.0;
        return;
    }
    double ss = 0.0;
    for (double x : xs) ss += (x - mean_out) * (x - mean_out);
    se_out = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

}  // namespace detail

/// Event-driven simulation of the heterogeneous M/M/k queue. Replication r
/// draws from the stream (seed, r), so results do not depend on how
/// replications are scheduled across threads.
inline SimResult simulate(const SimConfig& config) {
    config.validate();
    const auto reps = static_cast<std::size_t>(config.replications);
    std::vector<detail::ReplicationOutput> outputs(reps);
    parallel_for(reps, [&](std::size_t r) { outputs[r] = detail::run_replication(config, r); });

    SimResult result;
    result.per_replication.reserve(reps);
    result.per_replication_sojourn.reserve(reps);
    for (const auto& o : outputs) {
        result.per_replication.push_back(o.time_average);
        result.per_replication_sojourn.push_back(o.mean_sojourn);
    }
    detail::mean_and_error(result.per_replication, result.mean_customers, result.std_error);
    detail::mean_and_error(result.per_replication_sojourn, result.mean_sojourn,
                           result.sojourn_std_error);
    return result;
}

struct Fig1Row {
    double epsilon = 0.0;
    /// (L_sim - L_homog) / L_sim
    double rel_error = 0.0;
    /// (L_sim - L_improved) / L_sim
    double improved_rel_error = 0.0;
    double simulated = 0.0;
    double std_error = 0.0;
    double homogeneous = 0.0;
    double improved = 0.0;
};

/// Relative error of the homogeneous and improved approximations against
/// simulation, for mu_i = mu_bar + epsilon h_i. mu_bar is the mean of the
/// base configuration's rates; alpha comes from the exact single-coordinate
/// solver.
inline std::vector<Fig1Row> fig1_sweep(const SimConfig& base, const std::vector<double>& h,
                                       const std::vector<double>& epsilons) {
    const int k = base.params.k();
    if (static_cast<int>(h.size()) != k) throw DomainError("direction vector length must equal k");
    const double mu_bar = mean(base.params.rates);

    std::vector<SimConfig> configs;
    configs.reserve(epsilons.size());
    for (double eps : epsilons) {
        SimConfig cfg = base;
        for (int i = 0; i < k; ++i) {
            cfg.params.rates[static_cast<std::size_t>(i)] = mu_bar + eps * h[static_cast<std::size_t>(i)];
            if (!(cfg.params.rates[static_cast<std::size_t>(i)] > 0.0)) {
                std::ostringstream msg;
                msg << "fig1_sweep: rate mu_" << (i + 1) << " = " << cfg.params.rates[static_cast<std::size_t>(i)]
                    << " is not positive at epsilon = " << eps;
                throw DomainError(msg.str());
            }
        }
        cfg.validate();
        configs.push_back(std::move(cfg));
    }

    const double homogeneous = homog_closed_form(base.params.lambda, mu_bar, k);
    const double alpha = alpha_numeric(base.params.lambda, mu_bar, k).alpha;
    std::vector<Fig1Row> rows(epsilons.size());
    for (std::size_t j = 0; j < epsilons.size(); ++j) {
        const SimResult sim = simulate(configs[j]);
        Fig1Row& row = rows[j];
        row.epsilon = epsilons[j];
        row.simulated = sim.mean_customers;
        row.std_error = sim.std_error;
        row.homogeneous = homogeneous;
        row.improved = improved_approx(homogeneous, alpha, configs[j].params.rates, mu_bar);
        row.rel_error = (row.simulated - homogeneous) / row.simulated;
        row.improved_rel_error = (row.simulated - row.improved) / row.simulated;
    }
    return rows;
}

}  // namespace hetavg::queue
