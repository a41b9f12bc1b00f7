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


// hetavg command-line experiment runner.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetavg/acceptance.hpp"
#include "hetavg/auction/equilibrium.hpp"
#include "hetavg/auction/valuation.hpp"
#include "hetavg/core/alpha.hpp"
#include "hetavg/core/means.hpp"
#include "hetavg/core/parallel.hpp"
#include "hetavg/core/profile.hpp"
#include "hetavg/core/scaling.hpp"
#include "hetavg/diffusion/adoption.hpp"
#include "hetavg/diffusion/network.hpp"
#include "hetavg/queue/exact.hpp"
#include "hetavg/queue/sim.hpp"
#include "hetavg/report.hpp"

namespace {

using nlohmann::ordered_json;
using hetavg::ResultTable;
namespace queue = hetavg::queue;
namespace auction = hetavg::auction;
namespace diffusion = hetavg::diffusion;

const std::vector<std::string> kSubcommands{"queue-exact", "queue-sim",      "queue-alpha", "auction",
                                            "diffusion",   "averaging-sweep", "verify"};

// ---------------------------------------------------------------------------
// --config support: JSON keys become option tokens placed before the command
// line arguments; an option given on the command line replaces the config one.

std::string json_token(const ordered_json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        std::string out;
        for (const auto& e : v) {
            if (e.is_array() || e.is_object()) throw CLI::ValidationError("config", "nested arrays are not supported");
            if (!out.empty()) out += ',';
            out += json_token(e);
        }
        return out;
    }
    if (v.is_number() || v.is_boolean()) return v.dump();
    throw CLI::ValidationError("config", "unsupported value " + v.dump());
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::string path;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 == args.size()) throw CLI::ValidationError("--config", "missing path");
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (path.empty()) return rest;

    std::ifstream is(path);
    if (!is) throw CLI::ValidationError("--config", "cannot open " + path);
    ordered_json cfg;
    try {
        cfg = ordered_json::parse(is);
    } catch (const std::exception& e) {
        throw CLI::ValidationError("--config", std::string("invalid JSON: ") + e.what());
    }
    if (!cfg.is_object()) throw CLI::ValidationError("--config", "top level must be an object");

    std::string sub;
    std::vector<std::string> tail;
    std::set<std::string> given;
    for (const auto& a : rest) {
        if (sub.empty() && std::find(kSubcommands.begin(), kSubcommands.end(), a) != kSubcommands.end()) {
            sub = a;
            continue;
        }
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos
                                                                                             : a.find('=') - 2));
        tail.push_back(a);
    }
    if (cfg.contains("experiment")) {
        const auto kind = cfg["experiment"].get<std::string>();
        if (!sub.empty() && sub != kind) {
            throw CLI::ValidationError("--config", "experiment '" + kind + "' conflicts with subcommand '" + sub + "'");
        }
        sub = kind;
    }
    if (sub.empty()) throw CLI::ValidationError("--config", "no experiment named in config or on the command line");

    std::vector<std::string> out{sub};
    for (const auto& [key, value] : cfg.items()) {
        if (key == "experiment" || given.count(key)) continue;
        if (value.is_boolean()) {
            out.push_back("--" + key + "=" + (value.get<bool>() ? "true" : "false"));
        } else {
            out.push_back("--" + key);
            out.push_back(json_token(value));
        }
    }
    out.insert(out.end(), tail.begin(), tail.end());
    return out;
}

// ---------------------------------------------------------------------------
// Shared option plumbing.

struct Common {
    std::string out;
    std::uint64_t seed = 20260101;
};

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help, Common& common) {
    auto* sub = app.add_subcommand(name, help);
    sub->option_defaults()->always_capture_default();
    sub->add_option("--out", common.out, "output prefix; writes <prefix>.csv and <prefix>.json")
        ->default_str("hetavg_" + name);
    sub->add_option("--seed", common.seed, "random seed for simulation experiments");
    return sub;
}

ordered_json parse_scalar(const std::string& s) {
    if (s.empty()) return s;
    char* end = nullptr;
    const long long i = std::strtoll(s.c_str(), &end, 10);
    if (end && *end == '\0' && s.find_first_of(".eE") == std::string::npos) return i;
    if (s[0] != '-' && s.find_first_not_of("0123456789") == std::string::npos) return std::stoull(s);
    end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end && *end == '\0') return v;
    if (s == "true") return true;
    if (s == "false") return false;
    return s;
}

/// Every option of the subcommand with its effective value, defaults included.
ordered_json echo_options(const CLI::App& sub) {
    ordered_json j = ordered_json::object();
    j["experiment"] = sub.get_name();
    for (const CLI::Option* opt : sub.get_options()) {
        const std::string name = opt->get_lnames().empty() ? opt->get_name() : opt->get_lnames().front();
        if (name == "help" || name.empty()) continue;
        std::vector<std::string> values;
        if (opt->count() > 0) {
            for (const auto& r : opt->results()) {
                std::stringstream ss(r);
                for (std::string part; std::getline(ss, part, ',');) values.push_back(part);
            }
        } else if (!opt->get_default_str().empty()) {
            std::string d = opt->get_default_str();
            if (d.size() >= 2 && d.front() == '[' && d.back() == ']') d = d.substr(1, d.size() - 2);
            std::stringstream ss(d);
            for (std::string part; std::getline(ss, part, ',');)
                if (part != "{}" && !part.empty()) values.push_back(part);
        }
        if (opt->get_expected_max() > 1) {
            ordered_json arr = ordered_json::array();
            for (const auto& v : values) arr.push_back(parse_scalar(v));
            j[name] = arr;
        } else if (opt->get_type_size() == 0) {
            j[name] = opt->as<bool>();
        } else {
            j[name] = values.empty() ? ordered_json(nullptr) : parse_scalar(values.back());
        }
    }
    return j;
}

std::vector<double> default_direction(int k, double base) {
    if (k == 8) return {queue::kEightServerDirection.begin(), queue::kEightServerDirection.end()};
    std::vector<double> h(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) h[static_cast<std::size_t>(i)] = 0.5 * base * std::cos(2.0 * M_PI * i / k + 0.3);
    return h;
}

std::vector<double> default_sweep() { return {0.0125, 0.025, 0.05, 0.1}; }

std::vector<double> time_grid(double t_max, int steps) {
    if (!(t_max > 0.0) || steps < 1) throw hetavg::DomainError("time grid needs t-max > 0 and steps >= 1");
    std::vector<double> t(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i) t[static_cast<std::size_t>(i)] = t_max * i / steps;
    return t;
}

std::vector<double> broadcast(const std::vector<double>& v, int m, const char* what) {
    if (static_cast<int>(v.size()) == m) return v;
    if (v.size() == 1) return std::vector<double>(static_cast<std::size_t>(m), v.front());
    throw hetavg::DomainError(std::string(what) + " needs 1 or M = " + std::to_string(m) + " values");
}

auction::ValuationCDF parse_base(const std::string& s) {
    if (s == "uniform") return auction::ValuationCDF::uniform();
    if (s.rfind("power:", 0) == 0) return auction::ValuationCDF::power_law(std::stod(s.substr(6)));
    throw hetavg::DomainError("unknown base distribution '" + s + "' (use uniform or power:<a>)");
}

auction::Perturbation parse_perturbation(const std::string& s) {
    const auto colon = s.find(':');
    const std::string kind = s.substr(0, colon);
    const double c = colon == std::string::npos ? 1.0 : std::stod(s.substr(colon + 1));
    if (kind == "bump") return auction::Perturbation::bump(c);
    if (kind == "skewed") return auction::Perturbation::skewed_bump(c);
    if (kind == "zero") return auction::Perturbation::zero();
    throw hetavg::DomainError("unknown perturbation '" + s + "' (use bump[:c], skewed[:c] or zero)");
}

std::vector<auction::Perturbation> parse_perturbations(const std::vector<std::string>& specs) {
    std::vector<auction::Perturbation> hs;
    for (const auto& s : specs) hs.push_back(parse_perturbation(s));
    return hs;
}

diffusion::NetworkTopology parse_network(const std::string& name, int m) {
    for (auto g : {diffusion::Generator::complete, diffusion::Generator::circle_deg2, diffusion::Generator::circle_deg4,
                   diffusion::Generator::torus_4nbr}) {
        if (name == diffusion::to_string(g)) return diffusion::NetworkTopology::make(g, m);
    }
    throw hetavg::DomainError("unknown network '" + name + "'");
}

// ---------------------------------------------------------------------------
// Experiments. Each validates its inputs, computes, and returns the table;
// nothing touches the disk until the table is complete.

struct QueueExactArgs {
    double lambda = 28.0;
    std::vector<double> mu{6, 6.5, 7, 8, 8.5, 2.5, 1, 0.5};
};

ResultTable run_queue_exact(const QueueExactArgs& a) {
    const queue::MMkParams params{a.lambda, a.mu};
    params.validate();
    const auto s = queue::solve_steady_state(params);
    const double mu_bar = hetavg::mean(a.mu);
    const int k = params.k();
    const double homog = queue::homog_closed_form(a.lambda, mu_bar, k);
    const double alpha = queue::alpha_numeric(a.lambda, mu_bar, k).alpha;
    const double improved = hetavg::improved_approx(homog, alpha, a.mu, mu_bar);

    ResultTable t({"servers", "lambda", "traffic_intensity", "heterogeneity_level", "expected_customers",
                   "homogeneous_at_mean", "relative_gap", "alpha", "improved", "total_probability"});
    t.add_row({double(k), a.lambda, params.traffic_intensity(), hetavg::heterogeneity_level(a.mu, mu_bar),
               s.expected_customers, homog, (s.expected_customers - homog) / s.expected_customers, alpha, improved,
               s.total_probability()});
    t.summary["expected_customers"] = s.expected_customers;
    t.summary["homogeneous_at_mean"] = homog;
    t.summary["improved"] = improved;
    return t;
}

struct QueueSimArgs {
    double lambda = 28.0;
    std::vector<double> mu{5, 5, 5, 5, 5, 5, 5, 5};
    double horizon = 2e5, warmup = 1e4;
    int replications = 32;
    bool fig1 = false;
    std::vector<double> epsilons;
    double mu_bar = 5.0;
};

ResultTable run_queue_sim(const QueueSimArgs& a, std::uint64_t seed) {
    if (a.fig1) {
        std::vector<double> eps = a.epsilons;
        if (eps.empty())
            for (int i = 0; i <= 20; ++i) eps.push_back(0.05 * i);
        const auto h = default_direction(8, a.mu_bar);
        queue::SimConfig base{{a.lambda, std::vector<double>(8, a.mu_bar)}, a.horizon, a.warmup, a.replications, seed};
        base.validate();
        const auto rows = queue::fig1_sweep(base, h, eps);
        ResultTable t({"epsilon", "rel_error", "improved_rel_error", "simulated", "std_error", "homogeneous",
                       "improved", "exact"});
        for (const auto& r : rows) {
            const auto mu = hetavg::HeterogeneityProfile(a.mu_bar, h, r.epsilon).materialize();
            t.add_row({r.epsilon, r.rel_error, r.improved_rel_error, r.simulated, r.std_error, r.homogeneous,
                       r.improved, queue::expected_customers({a.lambda, mu})});
        }
        t.summary["alpha_sum_h2"] = queue::alpha_numeric(a.lambda, a.mu_bar, 8).alpha * 71.0;
        t.summary["rows"] = rows.size();
        return t;
    }
    const queue::SimConfig cfg{{a.lambda, a.mu}, a.horizon, a.warmup, a.replications, seed};
    cfg.validate();
    const auto r = queue::simulate(cfg);
    const double exact = cfg.params.k() <= queue::kMaxExactServers ? queue::expected_customers(cfg.params) : NAN;
    ResultTable t({"replication", "mean_customers", "mean_sojourn"});
    for (std::size_t i = 0; i < r.per_replication.size(); ++i) {
        t.add_row({double(i), r.per_replication[i], r.per_replication_sojourn[i]});
    }
    t.summary["mean_customers"] = r.mean_customers;
    t.summary["std_error"] = r.std_error;
    t.summary["mean_sojourn"] = r.mean_sojourn;
    t.summary["exact"] = exact;
    return t;
}

struct QueueAlphaArgs {
    int k = 8;
    double lambda = 28.0, mu_bar = 5.0;
};

ResultTable run_queue_alpha(const QueueAlphaArgs& a) {
    queue::MMkParams{a.lambda, std::vector<double>(static_cast<std::size_t>(a.k), a.mu_bar)}.validate();
    const auto numeric = queue::alpha_numeric(a.lambda, a.mu_bar, a.k);
    const double table = a.k == 8 ? queue::alpha_k8_published(a.lambda, a.mu_bar) : NAN;
    ResultTable t({"k", "lambda", "mu_bar", "alpha_numeric", "alpha_table", "richardson_residual"});
    t.add_row({double(a.k), a.lambda, a.mu_bar, numeric.alpha, table, numeric.richardson_residual});
    t.summary["alpha_numeric"] = numeric.alpha;
    t.summary["alpha_table"] = a.k == 8 ? ordered_json(table) : ordered_json(nullptr);
    if (a.k == 8) t.summary["relative_difference"] = std::abs(numeric.alpha - table) / std::abs(table);
    return t;
}

struct AuctionArgs {
    std::string base = "uniform";
    std::vector<std::string> perturbations{"bump", "zero"};
    double epsilon = 0.2;
    int grid = 4096;
};

ResultTable run_auction(const AuctionArgs& a) {
    const auto base = parse_base(a.base);
    const auto hs = parse_perturbations(a.perturbations);
    const auto cdfs = auction::perturbed_family(base, hs, a.epsilon);
    const auto sol = auction::solve_asymmetric(cdfs, a.grid);
    const auto rev = auction::asymmetric_revenue(sol, cdfs);
    const double homog = auction::symmetric_revenue(auction::ValuationCDF::mean(cdfs), sol.bidders()).revenue;

    std::vector<std::string> cols{"bid"};
    for (int i = 1; i <= sol.bidders(); ++i) cols.push_back("v" + std::to_string(i));
    ResultTable t(cols);
    for (std::size_t j = 0; j < sol.grid.size(); ++j) {
        std::vector<double> row{sol.grid[j]};
        for (const auto& vi : sol.v) row.push_back(vi[j]);
        t.add_row(std::move(row));
    }
    t.summary["b_max"] = sol.b_max;
    t.summary["revenue"] = rev.revenue;
    t.summary["revenue_homogeneous_at_mean"] = homog;
    t.summary["first_order_coefficient"] = auction::first_order_coefficient(base, hs);
    return t;
}

struct DiffusionArgs {
    std::string network = "circle_deg2";
    int agents = 8;
    std::vector<double> p{0.05}, q{0.4};
    double t_max = 40.0;
    int steps = 40;
    std::string method = "exact";
    int replications = 2000;
};

ResultTable run_diffusion(const DiffusionArgs& a, std::uint64_t seed) {
    const auto net = parse_network(a.network, a.agents);
    const diffusion::AgentParams params{broadcast(a.p, net.size(), "--p"), broadcast(a.q, net.size(), "--q")};
    params.validate(net.size());
    const auto times = time_grid(a.t_max, a.steps);
    diffusion::AdoptionCurve c;
    if (a.method == "exact") {
        c = diffusion::exact_curve(net, params, times);
    } else if (a.method == "sim") {
        c = diffusion::simulate_curve(net, params, times, {a.replications, seed});
        c.probability_mass.assign(times.size(), NAN);
    } else {
        throw hetavg::DomainError("--method must be exact or sim");
    }
    ResultTable t({"time", "expected_adopters", "std_error", "probability_mass"});
    for (std::size_t i = 0; i < times.size(); ++i) {
        t.add_row({times[i], c.expected_adopters[i], c.std_errors[i], c.probability_mass[i]});
    }
    t.summary["network"] = net.describe();
    t.summary["final_expected_adopters"] = c.expected_adopters.back();
    return t;
}

struct SweepArgs {
    std::string model = "queue-exact";
    std::vector<double> epsilons = default_sweep();
    // queue-exact
    int k = 4;
    double lambda = -1.0, mu_bar = 5.0;
    std::vector<double> direction;
    // auction
    std::string base = "uniform";
    std::vector<std::string> perturbations{"bump", "zero"};
    int grid = 4096;
    // diffusion
    std::string network = "circle_deg2";
    int agents = 8;
    double p_bar = 0.05, q_bar = 0.4, t_max = 40.0;
    int steps = 40;
};

void put_fit(ResultTable& t, const char* key, const std::vector<hetavg::ScalingPoint>& pts) {
    if (pts.size() < 4) {
        t.summary[key] = nullptr;
        return;
    }
    const auto fit = hetavg::fit_scaling(pts);
    t.summary[key] = fit.slope;
    t.summary[std::string(key) + "_r_squared"] = fit.r_squared;
}

ResultTable sweep_queue(const SweepArgs& a) {
    const int k = a.k;
    if (k < 2 || k > queue::kMaxExactServers) throw hetavg::DomainError("--k must be in [2, 14]");
    const double lambda = a.lambda > 0.0 ? a.lambda : 0.7 * k * a.mu_bar;
    const auto h = a.direction.empty() ? default_direction(k, a.mu_bar) : a.direction;
    const hetavg::HeterogeneityProfile profile(a.mu_bar, h);
    if (std::abs(profile.direction_sum()) > 1e-12 * (1.0 + std::sqrt(profile.direction_norm2()))) {
        throw hetavg::DomainError("--direction must sum to zero");
    }
    std::vector<std::vector<double>> rates;
    for (double e : a.epsilons) {
        rates.push_back(profile.with_scale(e).materialize([](double x) { return x > 0.0; }, "averaging-sweep rate"));
        queue::MMkParams{lambda, rates.back()}.validate();
    }
    const double homog = queue::homog_closed_form(lambda, a.mu_bar, k);
    const double alpha = queue::alpha_numeric(lambda, a.mu_bar, k).alpha;
    std::vector<double> exact(a.epsilons.size());
    hetavg::parallel_for(exact.size(), [&](std::size_t i) { exact[i] = queue::expected_customers({lambda, rates[i]}); });

    ResultTable t({"epsilon", "level", "expected_customers", "homogeneous", "gap", "improved_residual"});
    std::vector<hetavg::ScalingPoint> gap, improved;
    for (std::size_t i = 0; i < exact.size(); ++i) {
        const double e = a.epsilons[i];
        const double g = std::abs(exact[i] - homog);
        const double res = std::abs(exact[i] - hetavg::improved_approx(homog, alpha, rates[i], a.mu_bar));
        t.add_row({e, hetavg::heterogeneity_level(rates[i], a.mu_bar), exact[i], homog, g, res});
        if (e > 0.0 && g > 0.0) gap.push_back({e, g});
        if (e > 0.0 && res > 0.0) improved.push_back({e, res});
    }
    t.summary["lambda"] = lambda;
    t.summary["direction"] = h;
    t.summary["alpha"] = alpha;
    put_fit(t, "slope", gap);
    put_fit(t, "improved_slope", improved);
    return t;
}

ResultTable sweep_auction(const SweepArgs& a) {
    const auto base = parse_base(a.base);
    const auto hs = parse_perturbations(a.perturbations);
    for (double e : a.epsilons) auction::perturbed_family(base, hs, e);
    std::vector<auction::AveragingGap> gaps(a.epsilons.size());
    hetavg::parallel_for(gaps.size(), [&](std::size_t i) {
        gaps[i] = auction::averaging_check(auction::perturbed_family(base, hs, a.epsilons[i]), a.grid);
    });
    ResultTable t({"epsilon", "revenue_asymmetric", "revenue_homogeneous_at_mean", "gap", "relative_gap"});
    std::vector<hetavg::ScalingPoint> pts;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        const auto& g = gaps[i];
        t.add_row({a.epsilons[i], g.r_asym, g.r_homog_at_mean, g.gap, std::abs(g.gap) / g.r_asym});
        if (a.epsilons[i] > 0.0 && g.gap != 0.0) pts.push_back({a.epsilons[i], std::abs(g.gap)});
    }
    put_fit(t, "slope", pts);
    return t;
}

ResultTable sweep_diffusion(const SweepArgs& a) {
    const auto net = parse_network(a.network, a.agents);
    const int m = net.size();
    std::vector<double> hp(static_cast<std::size_t>(m)), hq(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        hp[static_cast<std::size_t>(i)] = a.p_bar * std::cos(2.0 * M_PI * i / m + 0.2);
        hq[static_cast<std::size_t>(i)] = a.q_bar * std::cos(2.0 * M_PI * i / m + 1.3);
    }
    const auto report = diffusion::averaging_check(net, hetavg::HeterogeneityProfile(a.p_bar, hp),
                                                   hetavg::HeterogeneityProfile(a.q_bar, hq),
                                                   time_grid(a.t_max, a.steps), a.epsilons);
    ResultTable t({"epsilon", "level", "max_gap", "max_relative_gap"});
    for (const auto& r : report.rows) t.add_row({r.scale, r.level, r.max_gap, r.max_rel_gap});
    t.summary["network"] = net.describe();
    t.summary["slope"] = report.fit ? ordered_json(report.fit->slope) : ordered_json(nullptr);
    return t;
}

ResultTable run_sweep(const SweepArgs& a) {
    if (a.epsilons.empty()) throw hetavg::DomainError("--epsilons must not be empty");
    for (double e : a.epsilons)
        if (!(e >= 0.0) || !std::isfinite(e)) throw hetavg::DomainError("epsilons must be finite and nonnegative");
    if (a.model == "queue-exact") return sweep_queue(a);
    if (a.model == "auction") return sweep_auction(a);
    if (a.model == "diffusion") return sweep_diffusion(a);
    throw hetavg::DomainError("--model must be queue-exact, auction or diffusion");
}

int run_verify(std::uint64_t seed, const std::string& out, bool write) {
    hetavg::acceptance::AcceptanceOptions opt;
    opt.seed = seed;
    const auto start = std::chrono::steady_clock::now();
    const auto results = hetavg::acceptance::run_all(opt);
    int failed = 0;
    ResultTable t({"criterion", "passed", "measured", "expected", "seconds"});
    for (const auto& r : results) {
        std::cout << hetavg::acceptance::format_line(r) << "\n";
        if (!r.passed) ++failed;
        t.add_row({double(r.id), r.passed ? 1.0 : 0.0, r.measured, r.expected, r.seconds});
        t.summary["criterion_" + std::to_string(r.id)] = {{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}};
    }
    std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed\n";
    if (write) {
        t.metadata = {{"experiment", "verify"}, {"seed", seed}, {"out", out}};
        hetavg::write_results(t, out, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hetavg: averaging-principle experiments for heterogeneous queues, auctions and diffusion"};
    app.set_version_flag("--version", std::string(hetavg::kVersion));
    app.require_subcommand(1);
    app.footer("Any subcommand accepts --config <file.json>; its keys are option names, "
               "and an \"experiment\" key may name the subcommand. HETAVG_THREADS caps worker threads.");
    Common common;

    QueueExactArgs qe;
    auto* cmd_qe = add_command(app, "queue-exact", "exact expected customers of a heterogeneous M/M/k queue", common);
    cmd_qe->add_option("--lambda", qe.lambda, "arrival rate");
    cmd_qe->add_option("--mu", qe.mu, "service rates, comma separated")->delimiter(',');

    QueueSimArgs qs;
    auto* cmd_qs = add_command(app, "queue-sim", "discrete-event simulation of a heterogeneous M/M/k queue", common);
    cmd_qs->add_option("--lambda", qs.lambda, "arrival rate");
    cmd_qs->add_option("--mu", qs.mu, "service rates, comma separated")->delimiter(',');
    cmd_qs->add_option("--horizon", qs.horizon, "simulated time per replication");
    cmd_qs->add_option("--warmup", qs.warmup, "discarded initial time");
    cmd_qs->add_option("--replications", qs.replications, "independent replications");
    cmd_qs->add_flag("--fig1", qs.fig1, "8-server relative-error sweep (mu_bar, lambda; rates mu_bar + eps h)");
    cmd_qs->add_option("--epsilons", qs.epsilons, "sweep values for --fig1 (default 0, 0.05, ..., 1)")->delimiter(',');
    cmd_qs->add_option("--mu-bar", qs.mu_bar, "base rate for --fig1");

    QueueAlphaArgs qa;
    auto* cmd_qa = add_command(app, "queue-alpha", "second-order coefficient alpha of the M/M/k queue", common);
    cmd_qa->add_option("--k", qa.k, "servers")->check(CLI::Range(1, queue::kMaxExactServers));
    cmd_qa->add_option("--lambda", qa.lambda, "arrival rate");
    cmd_qa->add_option("--mu-bar", qa.mu_bar, "mean service rate");

    AuctionArgs au;
    auto* cmd_au = add_command(app, "auction", "asymmetric first-price auction equilibrium and revenue", common);
    cmd_au->add_option("--base", au.base, "base CDF: uniform or power:<a>");
    cmd_au->add_option("--perturbations", au.perturbations, "one per bidder: bump[:c], skewed[:c], zero")
        ->delimiter(',');
    cmd_au->add_option("--epsilon", au.epsilon, "perturbation size");
    cmd_au->add_option("--grid", au.grid, "even number of bid intervals");

    DiffusionArgs df;
    auto* cmd_df = add_command(app, "diffusion", "expected adoption curve on a translation-invariant network", common);
    cmd_df->add_option("--network", df.network, "complete, circle_deg2, circle_deg4 or torus_4nbr");
    cmd_df->add_option("--agents", df.agents, "population M (m^2 for the torus)");
    cmd_df->add_option("--p", df.p, "external rates: one value or M values")->delimiter(',');
    cmd_df->add_option("--q", df.q, "word-of-mouth rates: one value or M values")->delimiter(',');
    cmd_df->add_option("--t-max", df.t_max, "last output time");
    cmd_df->add_option("--steps", df.steps, "output intervals");
    cmd_df->add_option("--method", df.method, "exact or sim");
    cmd_df->add_option("--replications", df.replications, "replications for --method sim");

    SweepArgs sw;
    auto* cmd_sw = add_command(app, "averaging-sweep", "heterogeneity sweep with log-log slope fit", common);
    cmd_sw->add_option("--model", sw.model, "queue-exact, auction or diffusion");
    cmd_sw->add_option("--epsilons", sw.epsilons, "sweep values")->delimiter(',');
    cmd_sw->add_option("--k", sw.k, "queue: servers");
    cmd_sw->add_option("--lambda", sw.lambda, "queue: arrival rate (default 0.7 k mu_bar)");
    cmd_sw->add_option("--mu-bar", sw.mu_bar, "queue: base service rate");
    cmd_sw->add_option("--direction", sw.direction, "queue: zero-sum direction h")->delimiter(',');
    cmd_sw->add_option("--base", sw.base, "auction: base CDF");
    cmd_sw->add_option("--perturbations", sw.perturbations, "auction: one per bidder")->delimiter(',');
    cmd_sw->add_option("--grid", sw.grid, "auction: bid intervals");
    cmd_sw->add_option("--network", sw.network, "diffusion: network generator");
    cmd_sw->add_option("--agents", sw.agents, "diffusion: population");
    cmd_sw->add_option("--p-bar", sw.p_bar, "diffusion: base external rate");
    cmd_sw->add_option("--q-bar", sw.q_bar, "diffusion: base word-of-mouth rate");
    cmd_sw->add_option("--t-max", sw.t_max, "diffusion: last output time");
    cmd_sw->add_option("--steps", sw.steps, "diffusion: output intervals");

    auto* cmd_verify = app.add_subcommand("verify", "run the acceptance suite");
    std::uint64_t verify_seed = 20260101;
    std::string verify_out;
    cmd_verify->add_option("--seed", verify_seed, "seed for simulation-based criteria");
    cmd_verify->add_option("--out", verify_out, "optional output prefix for the report");

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = expand_config(args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (cmd_verify->parsed()) return run_verify(verify_seed, verify_out, !verify_out.empty());

        const auto start = std::chrono::steady_clock::now();
        CLI::App* sub = app.get_subcommands().front();
        ResultTable table;
        if (sub == cmd_qe) table = run_queue_exact(qe);
        else if (sub == cmd_qs) table = run_queue_sim(qs, common.seed);
        else if (sub == cmd_qa) table = run_queue_alpha(qa);
        else if (sub == cmd_au) table = run_auction(au);
        else if (sub == cmd_df) table = run_diffusion(df, common.seed);
        else table = run_sweep(sw);

        table.metadata = echo_options(*sub);
        const std::string prefix = common.out.empty() ? "hetavg_" + sub->get_name() : common.out;
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        hetavg::write_results(table, prefix, wall);
        std::cout << table.summary.dump(2) << "\n" << "wrote " << prefix << ".csv and " << prefix << ".json\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "hetavg: error: " << e.what() << "\n";
        return 2;
    }
}
