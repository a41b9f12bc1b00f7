#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "hetavg/auction/equilibrium.hpp"
#include "hetavg/auction/valuation.hpp"

namespace {

using namespace hetavg;
using namespace hetavg::auction;

/// Inverse of v -> symmetric_bid(F, k, v) by bisection.
double inverse_symmetric_bid(const ValuationCDF& f, int k, double b) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (symmetric_bid(f, k, mid) < b ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double sup_error_vs_symmetric(const EquilibriumSolution& sol, const ValuationCDF& f, int k) {
    double worst = 0.0;
    for (std::size_t j = 1; j < sol.grid.size(); j += 16) {
        const double exact = inverse_symmetric_bid(f, k, sol.grid[j]);
        for (const auto& vi : sol.v) worst = std::max(worst, std::abs(vi[j] - exact));
    }
    return worst;
}

TEST(ValuationCDF, FamiliesAndValidation) {
    const auto u = ValuationCDF::uniform();
    EXPECT_EQ(u.family(), ValuationCDF::Family::uniform);
    EXPECT_DOUBLE_EQ(u.cdf(0.3), 0.3);
    EXPECT_DOUBLE_EQ(ValuationCDF::power_law(2.0).density(0.5), 1.0);
    EXPECT_NO_THROW(ValuationCDF::power_law(50.0).validate());

    const auto p = ValuationCDF::perturbed(u, Perturbation::bump(), 0.4);
    EXPECT_EQ(p.family(), ValuationCDF::Family::perturbed);
    EXPECT_DOUBLE_EQ(p.cdf(0.0), 0.0);
    EXPECT_DOUBLE_EQ(p.cdf(1.0), 1.0);
    EXPECT_NEAR(p.cdf(0.5), 0.5 + 0.4 * 0.25, 1e-15);
    EXPECT_THROW(ValuationCDF::perturbed(u, Perturbation::bump(), 1.5), DomainError);
    EXPECT_THROW(ValuationCDF::power_law(0.0), DomainError);
    EXPECT_THROW(Perturbation([](double v) { return v; }, [](double) { return 1.0; }, "bad"), DomainError);

    const std::vector<ValuationCDF> pair{ValuationCDF::perturbed(u, Perturbation::bump(), 0.2),
                                         ValuationCDF::perturbed(u, Perturbation::bump(-1.0), 0.2)};
    const auto m = ValuationCDF::mean(pair);
    for (double v : {0.1, 0.5, 0.9}) EXPECT_NEAR(m.cdf(v), v, 1e-15);
}

TEST(SymmetricBid, ClosedForms) {
    const auto u = ValuationCDF::uniform();
    for (double v : {0.25, 0.5, 1.0}) {
        EXPECT_NEAR(symmetric_bid(u, 2, v), v / 2, 1e-12);
        for (int k = 3; k <= 6; ++k) EXPECT_NEAR(symmetric_bid(u, k, v), (k - 1) * v / k, 1e-12);
        EXPECT_NEAR(symmetric_bid(ValuationCDF::power_law(2.0), 3, v), 0.8 * v, 1e-12);
    }
    EXPECT_EQ(symmetric_bid(ValuationCDF::power_law(3.0), 4, 0.0), 0.0);
    EXPECT_THROW(symmetric_bid(u, 1, 0.5), DomainError);
}

TEST(SymmetricRevenue, ClosedForms) {
    for (int k = 2; k <= 6; ++k) {
        EXPECT_NEAR(symmetric_revenue(ValuationCDF::uniform(), k).revenue, (k - 1.0) / (k + 1.0), 1e-10);
    }
    const double steep = symmetric_revenue(ValuationCDF::power_law(50.0), 3).revenue;
    EXPECT_GE(steep, 0.0);
    EXPECT_LE(steep, 1.0);
    EXPECT_GT(steep, 0.9);
    EXPECT_THROW(symmetric_revenue(ValuationCDF::uniform(), 1), DomainError);
}

TEST(SolveAsymmetric, UniformPairIsLinear) {
    const std::vector<ValuationCDF> cdfs(2, ValuationCDF::uniform());
    const auto sol = solve_asymmetric(cdfs);
    EXPECT_NEAR(sol.b_max, 0.5, 1e-9);
    double worst = 0.0;
    for (std::size_t j = 0; j < sol.grid.size(); ++j)
        for (const auto& vi : sol.v) worst = std::max(worst, std::abs(vi[j] - 2 * sol.grid[j]));
    EXPECT_LE(worst, 1e-4);
    EXPECT_NEAR(asymmetric_revenue(sol, cdfs).revenue, 1.0 / 3.0, 1e-5);
}

TEST(SolveAsymmetric, IdenticalPowerBiddersMatchSymmetricBid) {
    const auto f = ValuationCDF::power_law(2.0);
    const std::vector<ValuationCDF> cdfs(3, f);
    const auto sol = solve_asymmetric(cdfs);
    EXPECT_NEAR(sol.b_max, 0.8, 1e-9);
    EXPECT_LE(sup_error_vs_symmetric(sol, f, 3), 1e-4);
    for (std::size_t j = 0; j < sol.grid.size(); ++j) EXPECT_NEAR(sol.v[0][j], 1.25 * sol.grid[j], 1e-4);
}

TEST(SolveAsymmetric, PerturbedPairIsAsymmetricWithCommonEndpoint) {
    const auto u = ValuationCDF::uniform();
    const std::vector<ValuationCDF> cdfs{ValuationCDF::perturbed(u, Perturbation::bump(), 0.1),
                                         ValuationCDF::perturbed(u, Perturbation::bump(-1.0), 0.1)};
    const auto sol = solve_asymmetric(cdfs);
    EXPECT_LT(sol.b_max, 1.0);
    for (std::size_t j = 1; j + 1 < sol.grid.size(); ++j) {
        EXPECT_NE(sol.v[0][j], sol.v[1][j]);
    }
    for (const auto& vi : sol.v) {
        EXPECT_DOUBLE_EQ(vi.back(), 1.0);
        EXPECT_DOUBLE_EQ(vi.front(), 0.0);
        for (std::size_t j = 1; j < vi.size(); ++j) {
            EXPECT_GT(vi[j], sol.grid[j]);
            EXPECT_GE(vi[j], vi[j - 1]);
        }
    }
}

TEST(SolveAsymmetric, ErrorPaths) {
    const std::vector<ValuationCDF> one(1, ValuationCDF::uniform());
    EXPECT_THROW(solve_asymmetric(one), DomainError);
    const std::vector<ValuationCDF> many(6, ValuationCDF::uniform());
    EXPECT_THROW(solve_asymmetric(many), CapacityError);
    const std::vector<ValuationCDF> two(2, ValuationCDF::uniform());
    const auto coarse = solve_asymmetric(two, 2);
    EXPECT_THROW(asymmetric_revenue(coarse, two), DiagnosticsError);
}

TEST(AsymmetricRevenue, ReducesToSymmetricClosedForm) {
    for (int k : {2, 3}) {
        const auto f = ValuationCDF::power_law(2.0);
        const std::vector<ValuationCDF> cdfs(static_cast<std::size_t>(k), f);
        EXPECT_NEAR(asymmetric_revenue(solve_asymmetric(cdfs), cdfs).revenue, symmetric_revenue(f, k).revenue, 1e-4);
    }
    const auto u = ValuationCDF::uniform();
    const std::vector<ValuationCDF> flat{ValuationCDF::perturbed(u, Perturbation::bump(), 0.0),
                                         ValuationCDF::perturbed(u, Perturbation::bump(-1.0), 0.0)};
    EXPECT_NEAR(asymmetric_revenue(solve_asymmetric(flat), flat).revenue, symmetric_revenue(u, 2).revenue, 1e-6);
}

TEST(AsymmetricRevenue, InvariantUnderRelabelingBidders) {
    const auto u = ValuationCDF::uniform();
    std::vector<ValuationCDF> cdfs{ValuationCDF::perturbed(u, Perturbation::bump(), 0.3),
                                   ValuationCDF::perturbed(u, Perturbation::skewed_bump(-1.0), 0.3),
                                   ValuationCDF::power_law(1.5)};
    const double base = asymmetric_revenue(solve_asymmetric(cdfs), cdfs).revenue;
    EXPECT_GE(base, 0.0);
    EXPECT_LE(base, 1.0);
    std::rotate(cdfs.begin(), cdfs.begin() + 1, cdfs.end());
    EXPECT_NEAR(asymmetric_revenue(solve_asymmetric(cdfs), cdfs).revenue, base, 1e-6);
    std::swap(cdfs[0], cdfs[2]);
    EXPECT_NEAR(asymmetric_revenue(solve_asymmetric(cdfs), cdfs).revenue, base, 1e-6);
}

TEST(FirstOrder, CoefficientByHand) {
    const auto u = ValuationCDF::uniform();
    // -(1) int (1-v) 2 v(1-v) dv = -1/6
    const std::vector<Perturbation> common{Perturbation::bump(), Perturbation::bump()};
    EXPECT_NEAR(first_order_coefficient(u, common), -1.0 / 6.0, 1e-12);
    // -int (1-v) (v(1-v) - v^2(1-v)/2) dv = -(1/12 - 1/60)
    const std::vector<Perturbation> mixed{Perturbation::bump(), Perturbation::skewed_bump(-0.5)};
    EXPECT_NEAR(first_order_coefficient(u, mixed), -1.0 / 15.0, 1e-12);
    const std::vector<Perturbation> balanced{Perturbation::bump(), Perturbation::bump(-1.0)};
    EXPECT_NEAR(first_order_coefficient(u, balanced), 0.0, 1e-14);
}

TEST(FirstOrder, BalancedPerturbationResidualIsSecondOrder) {
    const auto u = ValuationCDF::uniform();
    const std::vector<Perturbation> balanced{Perturbation::bump(), Perturbation::bump(-1.0)};
    const std::vector<double> eps{0.0, 0.0125, 0.025, 0.05, 0.1, 1.5};
    const auto report = first_order_check(u, balanced, 2, eps);
    ASSERT_EQ(report.rows.size(), eps.size());
    EXPECT_NEAR(report.rows[0].r_numeric, report.r_homog, 1e-8);
    EXPECT_NEAR(report.rows[0].r_first_order, report.r_homog, 1e-15);
    EXPECT_FALSE(report.rows.back().valid);
    EXPECT_NE(report.rows.back().note.find("epsilon = 1.5"), std::string::npos);
    ASSERT_TRUE(report.residual_fit.has_value());
    EXPECT_NEAR(report.residual_fit->slope, 2.0, 0.1);
}

TEST(AuctionAveraging, IdenticalBiddersHaveNoGap) {
    const std::vector<ValuationCDF> cdfs(3, ValuationCDF::power_law(1.5));
    EXPECT_NEAR(averaging_check(cdfs).gap, 0.0, 1e-5);
}

}  // namespace
