#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "hetavg/core/alpha.hpp"
#include "hetavg/core/means.hpp"
#include "hetavg/core/parallel.hpp"
#include "hetavg/core/profile.hpp"
#include "hetavg/core/rng.hpp"
#include "hetavg/core/scaling.hpp"

namespace {

using namespace hetavg;

const std::vector<double> kPaperDirection{1, 1.5, 2, 3, 3.5, -2.5, -4, -4.5};

TEST(HeterogeneityLevel, Examples) {
    EXPECT_DOUBLE_EQ(heterogeneity_level(std::vector<double>{5, 5, 5}, 5.0), 0.0);
    EXPECT_NEAR(heterogeneity_level(std::vector<double>{4.5, 5.5}, 5.0), 0.1, 1e-15);
    const HeterogeneityProfile profile(5.0, kPaperDirection, 1.0);
    EXPECT_NEAR(heterogeneity_level(profile.materialize(), 5.0), 0.9, 1e-15);
}

TEST(HeterogeneityLevel, ZeroMeanIsDomainError) {
    EXPECT_THROW(heterogeneity_level(std::vector<double>{1, -1}, 0.0), DomainError);
}

TEST(Mean, ThreeKinds) {
    const std::vector<double> v{2, 8};
    EXPECT_DOUBLE_EQ(mean(v, MeanKind::arithmetic), 5.0);
    EXPECT_NEAR(mean(v, MeanKind::geometric), 4.0, 1e-14);
    EXPECT_NEAR(mean(v, MeanKind::harmonic), 3.2, 1e-14);
    const std::vector<double> same(6, 1.7);
    for (auto kind : {MeanKind::arithmetic, MeanKind::geometric, MeanKind::harmonic}) {
        EXPECT_NEAR(mean(same, kind), 1.7, 1e-14);
    }
}

TEST(Mean, GeometricAndArithmeticAgreeToSecondOrder) {
    const std::vector<double> v{1.1, 0.9};
    const double gap = std::abs(mean(v, MeanKind::geometric) - mean(v, MeanKind::arithmetic));
    EXPECT_NEAR(gap, 0.00501, 1e-5);
    EXPECT_LE(gap, 0.1 * 0.1);
}

TEST(Mean, NonpositiveEntriesRejected) {
    const std::vector<double> v{1.0, 0.0};
    EXPECT_THROW(mean(v, MeanKind::geometric), DomainError);
    EXPECT_THROW(mean(v, MeanKind::harmonic), DomainError);
    EXPECT_DOUBLE_EQ(mean(v, MeanKind::arithmetic), 0.5);
}

TEST(Mean, OrderingProperty) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> value(0.01, 10.0);
    std::uniform_int_distribution<int> size(2, 12);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> v(static_cast<std::size_t>(size(gen)));
        for (double& x : v) x = value(gen);
        const double a = mean(v, MeanKind::arithmetic);
        const double g = mean(v, MeanKind::geometric);
        const double h = mean(v, MeanKind::harmonic);
        EXPECT_LT(h, g);
        EXPECT_LT(g, a);
    }
}

TEST(Profile, MaterializeRejectsInadmissibleEntries) {
    const HeterogeneityProfile profile(5.0, kPaperDirection, 1.2);
    try {
        profile.materialize([](double mu) { return mu > 0.0; }, "rates");
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("epsilon = 1.2"), std::string::npos);
    }
    EXPECT_NO_THROW(profile.with_scale(1.0).materialize([](double mu) { return mu > 0.0; }, "rates"));
    EXPECT_THROW(HeterogeneityProfile(5.0, {1.0}), DomainError);
    EXPECT_DOUBLE_EQ(HeterogeneityProfile(5.0, kPaperDirection).direction_norm2(), 71.0);
}

double sum_of_squares(std::span<const double> mu) {
    double s = 0;
    for (double m : mu) s += m * m;
    return s;
}

double pair_products(std::span<const double> mu) {
    double s = 0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = i + 1; j < mu.size(); ++j) s += mu[i] * mu[j];
    return s;
}

/// Single-coordinate and homogeneous restrictions of a full probe.
template <class Full>
auto restrict(Full full, int k) {
    auto single = [full, k](double mu1, double mu_bar) {
        std::vector<double> mu(static_cast<std::size_t>(k), mu_bar);
        mu[0] = mu1;
        return full(std::span<const double>(mu));
    };
    auto homog = [full, k](double mu) {
        std::vector<double> v(static_cast<std::size_t>(k), mu);
        return full(std::span<const double>(v));
    };
    return std::pair{single, homog};
}

TEST(AlphaFromProbes, QuadraticProbesAreExact) {
    for (double mu_bar : {0.5, 3.0, 17.0}) {
        auto [single, homog] = restrict(sum_of_squares, 4);
        const auto est = alpha_from_probes(single, homog, mu_bar, 4);
        EXPECT_NEAR(est.alpha, 1.0, 1e-8);
        EXPECT_GE(est.richardson_residual, 0.0);

        auto [single8, homog8] = restrict(pair_products, 8);
        EXPECT_NEAR(alpha_from_probes(single8, homog8, mu_bar, 8).alpha, -0.5, 1e-8);
    }
}

TEST(AlphaFromProbes, AgreesWithMixedDerivativeDefinition) {
    auto [single, homog] = restrict(sum_of_squares, 4);
    const double lemma = alpha_from_probes(single, homog, 2.0, 4).alpha;
    const double direct = alpha_from_hessian(sum_of_squares, 2.0, 4).alpha;
    EXPECT_NEAR(lemma, direct, 1e-6 * std::abs(direct));

    auto [single8, homog8] = restrict(pair_products, 8);
    const double lemma8 = alpha_from_probes(single8, homog8, 2.0, 8).alpha;
    const double direct8 = alpha_from_hessian(pair_products, 2.0, 8).alpha;
    EXPECT_NEAR(lemma8, direct8, 1e-6 * std::abs(direct8));
}

TEST(AlphaFromProbes, SmoothNonQuadraticProbe) {
    auto probe = [](std::span<const double> mu) {
        double s = 0, p = 1;
        for (double m : mu) {
            s += std::exp(0.3 * m);
            p *= m;
        }
        return s + p;
    };
    auto [single, homog] = restrict(probe, 3);
    const auto lemma = alpha_from_probes(single, homog, 1.5, 3);
    const auto direct = alpha_from_hessian(probe, 1.5, 3);
    // F_11 = 0.09 e^{0.45}, F_12 = mu_bar^{k-2}
    const double exact = 0.5 * (0.09 * std::exp(0.45) - 1.5);
    EXPECT_NEAR(lemma.alpha, exact, 1e-7);
    EXPECT_NEAR(direct.alpha, exact, 1e-7);
}

TEST(AlphaFromProbes, ErrorPaths) {
    auto [single, homog] = restrict(sum_of_squares, 4);
    EXPECT_THROW(alpha_from_probes(single, homog, 1e10, 4, 1e-10), DiagnosticsError);
    EXPECT_THROW(alpha_from_probes(single, homog, 1.0, 1), DomainError);
    auto failing = [](double, double) -> double { throw std::runtime_error("probe failed"); };
    EXPECT_THROW(alpha_from_probes(failing, homog, 1.0, 4), std::runtime_error);
}

TEST(ImprovedApprox, Examples) {
    const std::vector<double> flat(8, 5.0);
    EXPECT_DOUBLE_EQ(improved_approx(6.2314, 0.00837, flat, 5.0), 6.2314);

    const HeterogeneityProfile profile(5.0, kPaperDirection, 1.0);
    EXPECT_NEAR(improved_approx(6.2314, 0.00837, profile.materialize(), 5.0), 6.2314 + 0.594, 1e-3);

    EXPECT_DOUBLE_EQ(improved_approx(10.0, -0.5, std::vector<double>{1, 3}, 2.0), 9.0);
}

std::vector<ScalingPoint> power_law(double coeff, double power) {
    std::vector<ScalingPoint> pts;
    for (double eps : {0.0125, 0.025, 0.05, 0.1, 0.2}) pts.push_back({eps, coeff * std::pow(eps, power)});
    return pts;
}

TEST(FitScaling, ExactPowerLaws) {
    const auto square = fit_scaling(power_law(0.594, 2.0));
    EXPECT_NEAR(square.slope, 2.0, 1e-9);
    EXPECT_NEAR(square.intercept, std::log(0.594), 1e-9);
    EXPECT_NEAR(square.r_squared, 1.0, 1e-12);
    EXPECT_NEAR(fit_scaling(power_law(0.074, 3.0)).slope, 3.0, 1e-9);
}

TEST(FitScaling, ErrorPaths) {
    std::vector<ScalingPoint> few{{0.1, 1}, {0.2, 2}, {0.3, 3}};
    EXPECT_THROW(fit_scaling(few), RankError);
    std::vector<ScalingPoint> repeated{{0.1, 1}, {0.1, 2}, {0.2, 3}, {0.2, 4}};
    EXPECT_THROW(fit_scaling(repeated), RankError);
    std::vector<ScalingPoint> negative{{0.1, 1}, {0.2, -2}, {0.3, 3}, {0.4, 4}};
    EXPECT_THROW(fit_scaling(negative), DomainError);
}

TEST(AveragingPrinciple, SmoothInterchangeableProbeScalesQuadratically) {
    auto probe = [](std::span<const double> mu) {
        double s = 0, p = 1;
        for (double m : mu) {
            s += std::log1p(m * m);
            p *= m;
        }
        return s + std::sqrt(p);
    };
    const std::vector<double> h{1.0, -0.5, 2.0, -2.5};
    const double mu_bar = 2.0;
    const HeterogeneityProfile profile(mu_bar, h);
    auto [single, homog] = restrict(probe, 4);
    const double alpha = alpha_from_probes(single, homog, mu_bar, 4).alpha;
    const double base = homog(mu_bar);

    std::vector<ScalingPoint> plain, improved;
    for (double eps : {0.0125, 0.025, 0.05, 0.1}) {
        const auto mu = profile.with_scale(eps).materialize();
        const double f = probe(mu);
        plain.push_back({eps, std::abs(f - base)});
        improved.push_back({eps, std::abs(f - improved_approx(base, alpha, mu, mu_bar))});
    }
    EXPECT_NEAR(fit_scaling(plain).slope, 2.0, 0.1);
    EXPECT_NEAR(fit_scaling(improved).slope, 3.0, 0.15);
}

TEST(AveragingPrinciple, GeometricMeanWithinSecondOrderOfArithmetic) {
    const std::vector<double> h{1, -1, 0.5, -0.5};
    std::vector<ScalingPoint> pts;
    for (double eps : {0.0125, 0.025, 0.05, 0.1}) {
        const auto mu = HeterogeneityProfile(1.0, h, eps).materialize();
        const double gap = std::abs(mean(mu, MeanKind::geometric) - mean(mu, MeanKind::arithmetic));
        EXPECT_LE(gap, eps * eps);
        pts.push_back({eps, gap});
    }
    EXPECT_NEAR(fit_scaling(pts).slope, 2.0, 0.1);
}

TEST(ReplicationStream, DependsOnlyOnSeedAndIndex) {
    ReplicationStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform();
        EXPECT_EQ(x, b.uniform());
        EXPECT_NE(x, c.uniform());
        EXPECT_NE(x, d.uniform());
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, 1.0);
    }
}

TEST(ParallelFor, FillsEverySlotAndPropagatesErrors) {
    std::vector<int> out(100, 0);
    parallel_for(out.size(), [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
    EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                     if (i == 7) throw std::runtime_error("boom");
                 }),
                 std::runtime_error);
}

}  // namespace
