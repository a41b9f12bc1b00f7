#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "hetavg/diffusion/adoption.hpp"
#include "hetavg/diffusion/network.hpp"

namespace {

using namespace hetavg;
using namespace hetavg::diffusion;

std::vector<double> grid(double t_max, int n) {
    std::vector<double> t(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) t[static_cast<std::size_t>(i)] = t_max * i / n;
    return t;
}

// Alternating pattern with zero sum, scaled to the base value.
std::vector<double> zero_sum_direction(int m, double base, double shift) {
    std::vector<double> h(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) h[static_cast<std::size_t>(i)] = base * std::cos(2.0 * M_PI * i / m + shift);
    return h;
}

TEST(Network, GeneratorsHaveConstantDegree) {
    EXPECT_EQ(NetworkTopology::complete(8).degree(), 7);
    EXPECT_EQ(NetworkTopology::complete(1).degree(), 0);
    EXPECT_EQ(NetworkTopology::circle_deg2(8).degree(), 2);
    EXPECT_EQ(NetworkTopology::circle_deg4(12).degree(), 4);
    const auto torus = NetworkTopology::torus(3);
    EXPECT_EQ(torus.size(), 9);
    EXPECT_EQ(torus.degree(), 4);
    EXPECT_TRUE(torus.adjacent(0, 2));  // wraps around
    EXPECT_TRUE(torus.adjacent(0, 6));
    EXPECT_FALSE(torus.adjacent(0, 4));
    for (int v = 0; v < 8; ++v) {
        EXPECT_FALSE(NetworkTopology::circle_deg2(8).adjacent(v, v));
        for (int u = 0; u < 8; ++u) {
            EXPECT_EQ(NetworkTopology::circle_deg4(8).adjacent(u, v), NetworkTopology::circle_deg4(8).adjacent(v, u));
        }
    }
    EXPECT_EQ(NetworkTopology::make(Generator::torus_4nbr, 16).torus_side(), 4);
}

TEST(Network, RejectsInvalidSizes) {
    EXPECT_THROW(NetworkTopology::torus(2), DomainError);
    EXPECT_THROW(NetworkTopology::make(Generator::torus_4nbr, 10), DomainError);
    EXPECT_THROW(NetworkTopology::circle_deg4(4), DomainError);
    EXPECT_THROW(NetworkTopology::complete(0), DomainError);
}

TEST(ExactCurve, SingleAgentIsExponential) {
    const auto net = NetworkTopology::complete(1);
    const auto c = exact_curve(net, AgentParams::homogeneous(1, 0.7, 0.3), {0.5, 1.0, 2.0});
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(c.expected_adopters[i], 1.0 - std::exp(-0.7 * c.times[i]), 1e-9);
    }
}

TEST(ExactCurve, TwoAgentChainByHand) {
    const double p = 0.3, q = 0.9, r = p + q;
    const auto c = exact_curve(NetworkTopology::complete(2), AgentParams::homogeneous(2, p, q), grid(6.0, 12));
    for (std::size_t i = 0; i < c.times.size(); ++i) {
        const double t = c.times[i];
        const double p0 = std::exp(-2 * p * t);
        const double p1 = 2 * p * (std::exp(-2 * p * t) - std::exp(-r * t)) / (r - 2 * p);
        const double p2 = 1.0 - p0 - p1;
        EXPECT_NEAR(c.expected_adopters[i], p1 + 2 * p2, 1e-9) << "t = " << t;
    }
}

TEST(ExactCurve, CurveInvariants) {
    const auto net = NetworkTopology::circle_deg4(10);
    AgentParams a{zero_sum_direction(10, 0.02, 0.3), zero_sum_direction(10, 0.1, 1.1)};
    for (auto& v : a.p) v += 0.05;
    for (auto& v : a.q) v += 0.4;
    const double t_end = 50.0 / *std::min_element(a.p.begin(), a.p.end());
    auto times = grid(40.0, 40);
    times.push_back(t_end);
    const auto c = exact_curve(net, a, times);
    EXPECT_EQ(c.expected_adopters.front(), 0.0);
    for (std::size_t i = 0; i < c.times.size(); ++i) {
        EXPECT_NEAR(c.probability_mass[i], 1.0, 1e-9);
        if (i > 0) {
            EXPECT_GE(c.expected_adopters[i], c.expected_adopters[i - 1] - 1e-12);
        }
    }
    EXPECT_NEAR(c.expected_adopters.back(), 10.0, 1e-3 * 10.0);
}

TEST(ExactCurve, RotationInvariance) {
    const auto net = NetworkTopology::circle_deg2(8);
    const auto base = exact_curve(net, AgentParams::homogeneous(8, 0.05, 0.4), grid(30.0, 15));
    AgentParams a = AgentParams::homogeneous(8, 0.05, 0.4);
    std::rotate(a.p.begin(), a.p.begin() + 3, a.p.end());
    const auto rotated = exact_curve(net, a, grid(30.0, 15));
    for (std::size_t i = 0; i < base.times.size(); ++i) {
        EXPECT_NEAR(base.expected_adopters[i], rotated.expected_adopters[i], 1e-12);
    }
}

TEST(ExactCurve, ErrorPaths) {
    EXPECT_THROW(exact_curve(NetworkTopology::complete(17), AgentParams::homogeneous(17, 0.1, 0.1), {1.0}),
                 CapacityError);
    EXPECT_THROW(exact_curve(NetworkTopology::complete(3), AgentParams::homogeneous(3, 0.0, 0.1), {1.0}),
                 DomainError);
    EXPECT_THROW(exact_curve(NetworkTopology::complete(3), AgentParams::homogeneous(3, 0.1, -0.1), {1.0}),
                 DomainError);
    EXPECT_THROW(exact_curve(NetworkTopology::complete(3), AgentParams::homogeneous(3, 0.1, 0.1), {1.0, 0.5}),
                 DomainError);
    EXPECT_THROW(exact_curve(NetworkTopology::complete(3), AgentParams::homogeneous(2, 0.1, 0.1), {1.0}),
                 DomainError);
}

TEST(SimulateCurve, SingleAgent) {
    const auto times = grid(4.0, 8);
    const auto c = simulate_curve(NetworkTopology::complete(1), AgentParams::homogeneous(1, 0.5, 0.0), times,
                                  {4000, 17});
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double exact = 1.0 - std::exp(-0.5 * times[i]);
        EXPECT_LE(std::abs(c.expected_adopters[i] - exact), 3 * c.std_errors[i] + 1e-12) << "t = " << times[i];
    }
}

TEST(SimulateCurve, NoWordOfMouthDecouples) {
    const int m = 20;
    AgentParams a = AgentParams::homogeneous(m, 0.1, 0.0);
    for (int j = 0; j < m; ++j) a.p[static_cast<std::size_t>(j)] = 0.05 + 0.01 * j;
    const auto times = grid(20.0, 10);
    const auto c = simulate_curve(NetworkTopology::circle_deg4(m), a, times, {3000, 3});
    for (std::size_t i = 0; i < times.size(); ++i) {
        double exact = 0.0;
        for (double p : a.p) exact += 1.0 - std::exp(-p * times[i]);
        EXPECT_LE(std::abs(c.expected_adopters[i] - exact), 3 * c.std_errors[i] + 1e-12) << "t = " << times[i];
    }
}

TEST(SimulateCurve, AgreesWithMasterEquation) {
    const auto net = NetworkTopology::circle_deg4(12);
    AgentParams a{zero_sum_direction(12, 0.015, 0.0), zero_sum_direction(12, 0.15, 0.7)};
    for (auto& v : a.p) v += 0.05;
    for (auto& v : a.q) v += 0.4;
    const auto times = grid(30.0, 10);
    const auto exact = exact_curve(net, a, times);
    const auto sim = simulate_curve(net, a, times, {4000, 11});
    for (std::size_t i = 1; i < times.size(); ++i) {
        EXPECT_LE(std::abs(sim.expected_adopters[i] - exact.expected_adopters[i]), 3 * sim.std_errors[i])
            << "t = " << times[i];
    }
}

TEST(SimulateCurve, DeterministicPerSeed) {
    const auto net = NetworkTopology::torus(3);
    const auto a = AgentParams::homogeneous(9, 0.1, 0.3);
    const auto times = grid(10.0, 5);
    const auto x = simulate_curve(net, a, times, {200, 42});
    const auto y = simulate_curve(net, a, times, {200, 42});
    const auto z = simulate_curve(net, a, times, {200, 43});
    EXPECT_EQ(x.expected_adopters, y.expected_adopters);
    EXPECT_NE(x.expected_adopters, z.expected_adopters);
    EXPECT_THROW(simulate_curve(net, a, times, {0, 1}), DomainError);
}

TEST(WeakInterchangeability, TranslationInvariantFamilies) {
    const auto times = grid(30.0, 15);
    EXPECT_LE(weak_interchangeability_check(NetworkTopology::circle_deg2(8), 0.05, 0.4, 0.09, 0.1, times), 1e-10);
    EXPECT_LE(weak_interchangeability_check(NetworkTopology::torus(3), 0.05, 0.4, 0.09, 0.1, times), 1e-10);
    EXPECT_LE(weak_interchangeability_check(NetworkTopology::complete(8), 0.05, 0.4, 0.09, 0.1, times), 1e-10);
}

TEST(DiffusionAveraging, GapIsSecondOrder) {
    const auto net = NetworkTopology::circle_deg2(8);
    const HeterogeneityProfile hp(0.05, zero_sum_direction(8, 0.05, 0.2));
    const HeterogeneityProfile hq(0.4, zero_sum_direction(8, 0.4, 1.3));
    const auto report = averaging_check(net, hp, hq, grid(40.0, 40), {0.0, 0.0125, 0.025, 0.05, 0.1});
    EXPECT_LE(report.rows[0].max_gap, 1e-10);
    ASSERT_TRUE(report.fit.has_value());
    EXPECT_NEAR(report.fit->slope, 2.0, 0.1);
}

TEST(DiffusionAveraging, TwentyPercentIsNearlyIndistinguishable) {
    const auto net = NetworkTopology::circle_deg2(8);
    const HeterogeneityProfile hp(0.05, zero_sum_direction(8, 0.05, 0.2));
    const HeterogeneityProfile hq(0.4, zero_sum_direction(8, 0.4, 1.3));
    const auto report = averaging_check(net, hp, hq, grid(40.0, 40), {0.2});
    EXPECT_NEAR(report.rows[0].level, 0.2, 1e-12 + 0.05);
    EXPECT_LT(report.rows[0].max_rel_gap, 0.02);
}

TEST(DiffusionAveraging, RejectsBadProfiles) {
    const auto net = NetworkTopology::circle_deg2(4);
    const HeterogeneityProfile p_ok(0.05, {0.05, -0.05, 0.05, -0.05});
    const HeterogeneityProfile q_ok(0.4, {0.1, -0.1, 0.1, -0.1});
    const HeterogeneityProfile p_biased(0.05, {0.05, 0.05, 0.05, -0.05});
    EXPECT_THROW(averaging_check(net, p_biased, q_ok, {1.0}, {0.1}), DomainError);
    try {
        averaging_check(net, p_ok, q_ok, {1.0}, {0.5, 2.0});
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("epsilon = 2"), std::string::npos) << e.what();
    }
}

}  // namespace
