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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hetavg/auction/equilibrium.hpp"
#include "hetavg/auction/valuation.hpp"
#include "hetavg/core/means.hpp"
#include "hetavg/core/profile.hpp"
#include "hetavg/core/scaling.hpp"
#include "hetavg/diffusion/adoption.hpp"
#include "hetavg/diffusion/network.hpp"
#include "hetavg/queue/exact.hpp"
#include "hetavg/queue/params.hpp"
#include "hetavg/queue/sim.hpp"

namespace hetavg::acceptance {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double expected = 0.0;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    std::uint64_t seed = 20260101;
    /// Coefficient table for the rational-form alpha path; replaced in
    /// mutation tests.
    queue::AlphaK8Coefficients alpha_table = queue::kAlphaK8Table;
};

namespace detail {

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

inline std::vector<double> eight_server_direction() {
    return {queue::kEightServerDirection.begin(), queue::kEightServerDirection.end()};
}

/// Names table entries that differ from the built-in coefficients.
inline std::string table_differences(const queue::AlphaK8Coefficients& t) {
    std::string out;
    for (std::size_t i = 0; i < t.c.size(); ++i)
        if (t.c[i] != queue::kAlphaK8Table.c[i]) out += " numerator[" + std::to_string(i) + "]";
    for (std::size_t i = 0; i < t.b.size(); ++i)
        if (t.b[i] != queue::kAlphaK8Table.b[i]) out += " denominator[" + std::to_string(i) + "]";
    return out;
}

inline double residual_slope(const std::vector<ScalingPoint>& pts) { return fit_scaling(pts).slope; }

/// Zero-sum cosine pattern scaled to `amplitude`.
inline std::vector<double> cosine_direction(int m, double amplitude, double phase) {
    std::vector<double> h(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) h[static_cast<std::size_t>(i)] = amplitude * std::cos(2.0 * M_PI * i / m + phase);
    return h;
}

inline std::vector<double> uniform_grid(double t_max, int n) {
    std::vector<double> t(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) t[static_cast<std::size_t>(i)] = t_max * i / n;
    return t;
}

}  // namespace detail

inline CriterionResult homogeneous_eight_servers() {
    CriterionResult r{1, "homogeneous M/M/8 closed form", false, 0.0, 6.2314, ""};
    r.measured = queue::homog_closed_form(28.0, 5.0, 8);
    const double ctmc = queue::expected_customers({28.0, std::vector<double>(8, 5.0)});
    r.passed = std::abs(r.measured - r.expected) <= 5e-4;
    r.detail = "closed form " + detail::fmt(r.measured) + ", CTMC " + detail::fmt(ctmc) + ", tolerance 5e-4";
    return r;
}

inline CriterionResult alpha_eight_servers(const AcceptanceOptions& opt) {
    CriterionResult r{2, "alpha(k=8): numeric vs coefficient-table paths", false, 0.0, 0.00837, ""};
    const double numeric = queue::alpha_numeric(28.0, 5.0, 8).alpha;
    const double table = queue::alpha_k8_published(28.0, 5.0, opt.alpha_table);
    r.measured = numeric;
    double worst = 0.0;
    std::string worst_at;
    for (double mu_bar : {1.0, 5.0}) {
        for (double load : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const double lam = load * 8.0 * mu_bar;
            const double d = detail::rel_diff(queue::alpha_k8_published(lam, mu_bar, opt.alpha_table),
                                              queue::alpha_numeric(lam, mu_bar, 8).alpha);
            if (d > worst) {
                worst = d;
                worst_at = "(lambda " + detail::fmt(lam) + ", mu_bar " + detail::fmt(mu_bar) + ")";
            }
        }
    }
    const bool numeric_ok = std::abs(numeric - r.expected) <= 1e-4;
    const bool table_ok = std::abs(table - r.expected) <= 1e-4;
    const bool agree = worst <= 1e-5 && detail::rel_diff(table, numeric) <= 1e-5;
    r.passed = numeric_ok && table_ok && agree;
    std::ostringstream d;
    d << "numeric " << detail::fmt(numeric) << ", coefficient table " << detail::fmt(table)
      << ", max grid rel diff " << detail::fmt(worst) << " at " << worst_at;
    if (!table_ok || !agree) {
        d << "; coefficient-table path disagrees";
        const auto changed = detail::table_differences(opt.alpha_table);
        if (!changed.empty()) d << " (modified entries:" << changed << ")";
    }
    r.detail = d.str();
    return r;
}

inline CriterionResult solid_line_coefficient(const AcceptanceOptions& opt) {
    CriterionResult r{3, "leading error coefficient alpha * sum h^2", false, 0.0, 0.594, ""};
    const auto h = detail::eight_server_direction();
    const double norm2 = std::inner_product(h.begin(), h.end(), h.begin(), 0.0);
    const double numeric = queue::alpha_numeric(28.0, 5.0, 8).alpha * norm2;
    const double table = queue::alpha_k8_published(28.0, 5.0, opt.alpha_table) * norm2;
    r.measured = numeric;
    r.passed = std::abs(numeric - r.expected) <= 0.01 && std::abs(table - r.expected) <= 0.01 && norm2 == 71.0;
    r.detail = "sum h^2 = " + detail::fmt(norm2) + ", numeric " + detail::fmt(numeric) + ", coefficient table " +
               detail::fmt(table) + ", tolerance 0.01";
    return r;
}

inline CriterionResult two_server_oracles() {
    CriterionResult r{4, "M/M/2 and homogeneous CTMC vs closed forms", false, 0.0, 1e-10, ""};
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> rate(0.2, 5.0), load(0.02, 0.98);
    double worst2 = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double mu1 = rate(gen), mu2 = rate(gen);
        const double lam = load(gen) * (mu1 + mu2);
        worst2 = std::max(worst2, detail::rel_diff(queue::expected_customers({lam, {mu1, mu2}}),
                                                   queue::mm2_closed_form(lam, mu1, mu2)));
    }
    double worst_k = 0.0;
    for (int k = 2; k <= 10; ++k) {
        for (double load : {0.2, 0.6, 0.95}) {
            const double mu = 1.7, lam = load * k * mu;
            worst_k = std::max(worst_k, detail::rel_diff(queue::expected_customers(
                                                             {lam, std::vector<double>(static_cast<std::size_t>(k), mu)}),
                                                         queue::homog_closed_form(lam, mu, k)));
        }
    }
    r.measured = std::max(worst2, worst_k);
    r.passed = r.measured <= r.expected;
    r.detail = "M/M/2 50-point max rel " + detail::fmt(worst2) + ", homogeneous k=2..10 max rel " + detail::fmt(worst_k);
    return r;
}

inline CriterionResult queue_averaging_slopes() {
    CriterionResult r{5, "queue averaging slope 2 and improved residual slope 3", false, 0.0, 2.0, ""};
    const std::vector<double> h4{1.0, -1.5, 2.0, -1.5};
    const std::vector<double> eps{0.0125, 0.025, 0.05, 0.1};
    std::ostringstream d;
    bool ok = true;
    double worst_slope_dev = 0.0;
    for (const auto& [h, lam] : {std::pair{h4, 14.0}, std::pair{detail::eight_server_direction(), 28.0}}) {
        const int k = static_cast<int>(h.size());
        const double base = queue::homog_closed_form(lam, 5.0, k);
        const double alpha = queue::alpha_numeric(lam, 5.0, k).alpha;
        std::vector<ScalingPoint> gap, improved;
        for (double e : eps) {
            const auto mu = HeterogeneityProfile(5.0, h, e).materialize();
            const double exact = queue::expected_customers({lam, mu});
            gap.push_back({e, std::abs(exact - base)});
            improved.push_back({e, std::abs(exact - improved_approx(base, alpha, mu, 5.0))});
        }
        const double s2 = detail::residual_slope(gap), s3 = detail::residual_slope(improved);
        ok = ok && std::abs(s2 - 2.0) <= 0.05 && std::abs(s3 - 3.0) <= 0.15;
        if (std::abs(s2 - 2.0) >= worst_slope_dev) {
            worst_slope_dev = std::abs(s2 - 2.0);
            r.measured = s2;
        }
        d << "k=" << k << ": slope " << detail::fmt(s2) << ", improved slope " << detail::fmt(s3) << "; ";
    }
    // Qualitative bound on the eps^3 remainder for the 8-server benchmark.
    const auto h = detail::eight_server_direction();
    const double base = queue::homog_closed_form(28.0, 5.0, 8);
    const double alpha = queue::alpha_numeric(28.0, 5.0, 8).alpha;
    double worst_ratio = 0.0;
    for (int i = 1; i <= 20; ++i) {
        const double e = 0.05 * i;
        const auto mu = HeterogeneityProfile(5.0, h, e).materialize();
        const double exact = queue::expected_customers({28.0, mu});
        worst_ratio = std::max(worst_ratio, std::abs(exact - improved_approx(base, alpha, mu, 5.0)) /
                                                (e * e * e * exact));
    }
    ok = ok && worst_ratio <= 0.2;
    d << "max |L - improved| / (eps^3 L) over eps <= 1: " << detail::fmt(worst_ratio) << " (limit 0.2)";
    r.passed = ok;
    r.detail = d.str();
    return r;
}

inline CriterionResult simulated_magnitudes(const AcceptanceOptions& opt) {
    CriterionResult r{6, "simulated relative error at eps 0.5 and 1.0", false, 0.0, 0.02, ""};
    const queue::SimConfig base{{28.0, std::vector<double>(8, 5.0)}, 1e5, 5e3, 32, opt.seed};
    const auto rows = queue::fig1_sweep(base, detail::eight_server_direction(), {0.5, 1.0});
    r.measured = rows[0].rel_error;
    r.passed = std::abs(rows[0].rel_error - 0.02) <= 0.01 && rows[1].rel_error < 0.10;
    r.detail = "eps 0.5: " + detail::fmt(rows[0].rel_error) + " (L " + detail::fmt(rows[0].simulated) + " +- " +
               detail::fmt(rows[0].std_error) + "), eps 1.0: " + detail::fmt(rows[1].rel_error) + " (limit 0.10)";
    return r;
}

inline CriterionResult auction_symmetric_forms() {
    CriterionResult r{7, "auction symmetric revenue and identical-bidder equilibrium", false, 0.0, 1e-4, ""};
    const auto u = auction::ValuationCDF::uniform();
    double worst_rev = 0.0;
    for (int k = 2; k <= 6; ++k) {
        const double exact = (k - 1.0) / (k + 1.0);
        worst_rev = std::max(worst_rev, std::abs(auction::symmetric_revenue(u, k).revenue - exact));
    }
    double worst_bid = 0.0;
    for (int k = 2; k <= 3; ++k) {
        const std::vector<auction::ValuationCDF> cdfs(static_cast<std::size_t>(k), u);
        const auto sol = auction::solve_asymmetric(cdfs);
        for (const auto& vi : sol.v)
            for (std::size_t j = 0; j < sol.grid.size(); ++j)
                worst_bid = std::max(worst_bid, std::abs(sol.grid[j] - (k - 1.0) * vi[j] / k));
    }
    r.measured = worst_bid;
    r.passed = worst_rev <= 1e-6 && worst_bid <= 1e-4;
    r.detail = "max revenue error k=2..6 " + detail::fmt(worst_rev) + " (limit 1e-6), sup bid error k=2,3 " +
               detail::fmt(worst_bid) + " (limit 1e-4)";
    return r;
}

inline CriterionResult auction_first_order() {
    CriterionResult r{8, "auction first-order revenue term", false, 0.0, 1e-3, ""};
    using auction::Perturbation;
    const auto u = auction::ValuationCDF::uniform();
    const std::vector<std::pair<std::string, std::vector<Perturbation>>> fixtures{
        {"common bump", {Perturbation::bump(), Perturbation::bump()}},
        {"mixed sign", {Perturbation::bump(), Perturbation::skewed_bump(-0.5)}}};
    const std::vector<double> eps{0.025, 0.05, 0.1, 0.2};
    std::ostringstream d;
    bool ok = true;
    double worst_rel = 0.0;
    for (const auto& [name, hs] : fixtures) {
        const double coef = auction::first_order_coefficient(u, hs);
        const double fd = auction::revenue_slope_fd(u, hs);
        const double rel = detail::rel_diff(fd, coef);
        worst_rel = std::max(worst_rel, rel);
        const auto report = auction::first_order_check(u, hs, 2, eps);
        const bool fit_ok = report.residual_fit && std::abs(report.residual_fit->slope - 2.0) <= 0.1;
        ok = ok && rel <= 1e-3 && fit_ok;
        d << name << ": integral " << detail::fmt(coef) << ", finite difference " << detail::fmt(fd)
          << ", residual slope " << (report.residual_fit ? detail::fmt(report.residual_fit->slope) : "n/a");
        if (&hs != &fixtures.back().second) d << "; ";
    }
    r.measured = worst_rel;
    r.passed = ok;
    r.detail = d.str();
    return r;
}

inline CriterionResult auction_averaging() {
    CriterionResult r{9, "auction averaging gap scales as eps^2", false, 0.0, 2.0, ""};
    const auto u = auction::ValuationCDF::uniform();
    const auto bump = auction::Perturbation::bump();
    std::vector<ScalingPoint> pts;
    double rel_at_max = 0.0;
    for (double e : {0.05, 0.1, 0.2, 0.3, 0.4}) {
        const std::vector<auction::ValuationCDF> cdfs{auction::ValuationCDF::perturbed(u, bump, e), u};
        const auto gap = auction::averaging_check(cdfs);
        pts.push_back({e, std::abs(gap.gap)});
        rel_at_max = std::abs(gap.gap) / gap.r_asym;
    }
    const auto fit = fit_scaling(pts);
    r.measured = fit.slope;
    r.passed = std::abs(fit.slope - 2.0) <= 0.1 && rel_at_max < 0.01;
    r.detail = "one bidder F + eps v(1-v), one uniform; slope " + detail::fmt(fit.slope) +
               ", relative gap at eps 0.4 " + detail::fmt(rel_at_max) + " (limit 0.01)";
    return r;
}

inline CriterionResult diffusion_weak_interchangeability() {
    CriterionResult r{10, "diffusion weak interchangeability", false, 0.0, 1e-10, ""};
    using diffusion::NetworkTopology;
    const auto times = detail::uniform_grid(40.0, 20);
    const double a = diffusion::weak_interchangeability_check(NetworkTopology::circle_deg2(8), 0.05, 0.4, 0.09, 0.1, times);
    const double b = diffusion::weak_interchangeability_check(NetworkTopology::torus(3), 0.05, 0.4, 0.09, 0.1, times);
    const double c = diffusion::weak_interchangeability_check(NetworkTopology::complete(8), 0.05, 0.4, 0.09, 0.1, times);
    r.measured = std::max({a, b, c});
    r.passed = r.measured <= r.expected;
    r.detail = "circle_deg2(8) " + detail::fmt(a) + ", torus 3x3 " + detail::fmt(b) + ", complete(8) " + detail::fmt(c);
    return r;
}

inline CriterionResult diffusion_averaging(const AcceptanceOptions& opt) {
    CriterionResult r{11, "diffusion averaging slope and simulation agreement", false, 0.0, 2.0, ""};
    using diffusion::NetworkTopology;
    const auto times = detail::uniform_grid(40.0, 40);
    const HeterogeneityProfile hp(0.05, detail::cosine_direction(8, 0.05, 0.2));
    const HeterogeneityProfile hq(0.4, detail::cosine_direction(8, 0.4, 1.3));
    const auto report =
        diffusion::averaging_check(NetworkTopology::circle_deg2(8), hp, hq, times, {0.0125, 0.025, 0.05, 0.1});
    const double slope = report.fit ? report.fit->slope : std::nan("");

    const auto net = NetworkTopology::circle_deg4(12);
    diffusion::AgentParams agents{detail::cosine_direction(12, 0.015, 0.0), detail::cosine_direction(12, 0.15, 0.7)};
    for (auto& p : agents.p) p += 0.05;
    for (auto& q : agents.q) q += 0.4;
    const auto grid = detail::uniform_grid(30.0, 10);
    const auto exact = diffusion::exact_curve(net, agents, grid);
    const auto sim = diffusion::simulate_curve(net, agents, grid, {4000, opt.seed});
    double worst_z = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        worst_z = std::max(worst_z, std::abs(sim.expected_adopters[i] - exact.expected_adopters[i]) / sim.std_errors[i]);
    }
    r.measured = slope;
    r.passed = std::abs(slope - 2.0) <= 0.1 && worst_z <= 3.0;
    r.detail = "circle_deg2(8) slope " + detail::fmt(slope) + "; circle_deg4(12) max |sim - exact| / SE " +
               detail::fmt(worst_z) + " (limit 3)";
    return r;
}

inline CriterionResult property_suites(const AcceptanceOptions& opt) {
    CriterionResult r{12, "property suites", false, 0.0, 0.0, ""};
    std::mt19937_64 gen(opt.seed);
    std::uniform_int_distribution<int> size(2, 7);
    std::uniform_real_distribution<double> rate(0.2, 3.0), load(0.05, 0.95);
    double worst_perm = 0.0, worst_norm = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> mu(static_cast<std::size_t>(size(gen)));
        for (double& m : mu) m = rate(gen);
        const double lam = load(gen) * std::accumulate(mu.begin(), mu.end(), 0.0);
        const auto s = queue::solve_steady_state({lam, mu});
        worst_norm = std::max(worst_norm, std::abs(s.total_probability() - 1.0));
        for (int rep = 0; rep < 3; ++rep) {
            std::shuffle(mu.begin(), mu.end(), gen);
            worst_perm = std::max(worst_perm, detail::rel_diff(queue::expected_customers({lam, mu}), s.expected_customers));
        }
    }

    diffusion::AgentParams torus_agents{detail::cosine_direction(9, 0.01, 0.4), std::vector<double>(9, 0.3)};
    for (auto& p : torus_agents.p) p += 0.05;
    const auto curve =
        diffusion::exact_curve(diffusion::NetworkTopology::torus(3), torus_agents, detail::uniform_grid(20.0, 10));
    double worst_diff_norm = 0.0;
    for (double m : curve.probability_mass) worst_diff_norm = std::max(worst_diff_norm, std::abs(m - 1.0));

    bool ordered = true;
    std::uniform_real_distribution<double> positive(0.01, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(static_cast<std::size_t>(size(gen)));
        for (double& v : x) v = positive(gen);
        const double h = mean(x, MeanKind::harmonic), g = mean(x, MeanKind::geometric), a = mean(x, MeanKind::arithmetic);
        ordered = ordered && h <= g * (1 + 1e-14) && g <= a * (1 + 1e-14);
    }

    const std::vector<double> dir{1.0, -0.5, 0.25, -0.75};
    std::vector<ScalingPoint> pts;
    double worst_c = 0.0;
    for (double e : {0.0125, 0.025, 0.05, 0.1, 0.2}) {
        const auto x = HeterogeneityProfile(1.0, dir, e).materialize();
        const double gap = std::abs(mean(x, MeanKind::geometric) - mean(x, MeanKind::arithmetic));
        pts.push_back({e, gap});
        worst_c = std::max(worst_c, gap / (e * e));
    }
    const double lemma_slope = fit_scaling(pts).slope;

    const queue::SimConfig cfg{{3.0, {1.0, 1.5, 2.0}}, 5e3, 5e2, 4, opt.seed};
    const auto s1 = queue::simulate(cfg), s2 = queue::simulate(cfg);
    const auto net = diffusion::NetworkTopology::circle_deg2(6);
    const auto agents = diffusion::AgentParams::homogeneous(6, 0.1, 0.3);
    const auto grid = detail::uniform_grid(10.0, 5);
    const auto d1 = diffusion::simulate_curve(net, agents, grid, {100, opt.seed});
    const auto d2 = diffusion::simulate_curve(net, agents, grid, {100, opt.seed});
    const bool deterministic = s1.per_replication == s2.per_replication && d1.expected_adopters == d2.expected_adopters;

    r.passed = worst_perm <= 1e-10 && worst_norm <= 1e-12 && worst_diff_norm <= 1e-9 && ordered &&
               std::abs(lemma_slope - 2.0) <= 0.1 && deterministic;
    r.measured = worst_perm;
    r.expected = 1e-10;
    std::ostringstream d;
    d << "permutation " << detail::fmt(worst_perm) << ", queue normalization " << detail::fmt(worst_norm)
      << ", diffusion normalization " << detail::fmt(worst_diff_norm) << ", H<=G<=A " << (ordered ? "yes" : "no")
      << ", |G-A| slope " << detail::fmt(lemma_slope) << " (C = " << detail::fmt(worst_c) << ")"
      << ", bit-identical reruns " << (deterministic ? "yes" : "no");
    r.detail = d.str();
    return r;
}

/// Runs every criterion; failures, including exceptions, are recorded rather
/// than stopping the run.
inline std::vector<CriterionResult> run_all(const AcceptanceOptions& opt = {}) {
    const std::vector<std::pair<std::string, std::function<CriterionResult()>>> suite{
        {"homogeneous M/M/8 closed form", [] { return homogeneous_eight_servers(); }},
        {"alpha(k=8): numeric vs coefficient-table paths", [&] { return alpha_eight_servers(opt); }},
        {"leading error coefficient alpha * sum h^2", [&] { return solid_line_coefficient(opt); }},
        {"M/M/2 and homogeneous CTMC vs closed forms", [] { return two_server_oracles(); }},
        {"queue averaging slope 2 and improved residual slope 3", [] { return queue_averaging_slopes(); }},
        {"simulated relative error at eps 0.5 and 1.0", [&] { return simulated_magnitudes(opt); }},
        {"auction symmetric revenue and identical-bidder equilibrium", [] { return auction_symmetric_forms(); }},
        {"auction first-order revenue term", [] { return auction_first_order(); }},
        {"auction averaging gap scales as eps^2", [] { return auction_averaging(); }},
        {"diffusion weak interchangeability", [] { return diffusion_weak_interchangeability(); }},
        {"diffusion averaging slope and simulation agreement", [&] { return diffusion_averaging(opt); }},
        {"property suites", [&] { return property_suites(opt); }},
    };
    std::vector<CriterionResult> results;
    for (std::size_t i = 0; i < suite.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = suite[i].second();
        } catch (const std::exception& e) {
            r = CriterionResult{static_cast<int>(i) + 1, suite[i].first, false, std::nan(""), std::nan(""),
                                std::string("exception: ") + e.what()};
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        results.push_back(std::move(r));
    }
    return results;
}

inline std::string format_line(const CriterionResult& r) {
    char head[160];
    std::snprintf(head, sizeof head, "[%s] %2d %-58s measured %-12s expected %-10s %6.1fs  ", r.passed ? "PASS" : "FAIL",
                  r.id, r.name.c_str(), detail::fmt(r.measured).c_str(), detail::fmt(r.expected).c_str(), r.seconds);
    return head + r.detail;
}

}  // namespace hetavg::acceptance
