#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mblaser/dynamics.hpp"
#include "mblaser/model.hpp"
#include "oracles.hpp"

using namespace mblaser;

TEST(Nondimensionalize, DirectArithmetic)
{
    const PhysicalParams p{.n_atoms = 100, .coupling = 1, .cavity_decay = 50, .gamma_10 = 2,
                           .gamma_21 = 6, .gamma_02 = 8, .gamma_col = 0};
    const auto d = nondimensionalize(p);
    EXPECT_DOUBLE_EQ(d.lam, 2.0);
    EXPECT_DOUBLE_EQ(d.sat, 1.0);
    EXPECT_DOUBLE_EQ(d.alpha1, 3.0);
    EXPECT_DOUBLE_EQ(d.alpha2, 4.0);
    EXPECT_DOUBLE_EQ(d.eta, 0.0);
}

TEST(Nondimensionalize, UnitCase)
{
    const PhysicalParams p{.n_atoms = 1, .coupling = 0.5, .cavity_decay = 0.5, .gamma_10 = 1,
                           .gamma_21 = 0, .gamma_02 = 0, .gamma_col = 0};
    EXPECT_EQ(nondimensionalize(p), (DimensionlessParams{1, 1, 0, 0, 0}));
}

TEST(Nondimensionalize, StrongCouplingApproachesIdealCavity)
{
    PhysicalParams p{.n_atoms = 10, .coupling = 1, .cavity_decay = 1, .gamma_10 = 1,
                     .gamma_21 = 1, .gamma_02 = 2, .gamma_col = 0};
    double previous = nondimensionalize(p).sat;
    for (double g : {1e2, 1e4, 1e8}) {
        p.coupling = g;
        const double s = nondimensionalize(p).sat;
        EXPECT_LT(s, previous);
        previous = s;
    }
    EXPECT_LT(previous, 1e-16);
}

TEST(Nondimensionalize, RejectsZeroRates)
{
    PhysicalParams p;
    p.gamma_10 = 0.0;
    EXPECT_THROW(nondimensionalize(p), invalid_parameter);
    p = PhysicalParams{};
    p.coupling = 0.0;
    EXPECT_THROW(nondimensionalize(p), invalid_parameter);
}

TEST(Nondimensionalize, RealizeRoundTrip)
{
    const DimensionlessParams d{123.5, 0.75, 2.5, 7.0, 0.3};
    for (auto [g10, kappa] : {std::pair{1.0, 1.0}, std::pair{3.0, 0.2}, std::pair{1e6, 4e7}}) {
        const PhysicalParams p = realize(d, g10, kappa);
        EXPECT_DOUBLE_EQ(p.gamma_10, g10);
        EXPECT_DOUBLE_EQ(p.cavity_decay, kappa);
        const auto back = nondimensionalize(p);
        EXPECT_NEAR(back.lam, d.lam, 1e-13 * d.lam);
        EXPECT_NEAR(back.sat, d.sat, 1e-13 * d.sat);
        EXPECT_NEAR(back.alpha1, d.alpha1, 1e-13 * d.alpha1);
        EXPECT_NEAR(back.alpha2, d.alpha2, 1e-13 * d.alpha2);
        EXPECT_NEAR(back.eta, d.eta, 1e-13 * d.eta);
    }
    EXPECT_THROW(realize(DimensionlessParams{10, 0, 1, 2, 0}), invalid_parameter);
}

TEST(GammaPerp, Examples)
{
    PhysicalParams p;
    p.gamma_10 = 1, p.gamma_02 = 2, p.gamma_col = 3;
    EXPECT_DOUBLE_EQ(gamma_perp(p), 3.0);
    p.gamma_10 = 2, p.gamma_02 = 0, p.gamma_col = 0;
    EXPECT_DOUBLE_EQ(gamma_perp(p), 1.0);
}

TEST(GammaPerp, PumpDependenceOfVScheme)
{
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        const double g10 = oracle::log_uniform(rng, 1e-3, 1e3);
        const double p2 = oracle::log_uniform(rng, 1e-3, 1e3);
        const double eta = oracle::uniform(rng, 0.0, 10.0);
        PhysicalParams p;
        p.gamma_10 = g10;
        p.gamma_02 = p2 * g10;
        p.gamma_col = eta * g10;
        EXPECT_NEAR(gamma_perp(p), 0.5 * g10 * (1.0 + p2 + eta), 1e-14 * gamma_perp(p));
        EXPECT_NEAR(gamma_perp(nondimensionalize(p)) * g10, gamma_perp(p), 1e-14 * gamma_perp(p));
    }
}

TEST(BcCoefficients, HandEvaluated)
{
    const auto [b, c] = bc_coefficients({100, 0, 1, 10, 0});
    EXPECT_NEAR(b, 889.0 / 12.0, 1e-12);
    EXPECT_NEAR(c, 1000.0 / 12.0, 1e-12);
}

TEST(BcCoefficients, ZeroGainCases)
{
    EXPECT_EQ(bc_coefficients({37, 2, 0, 5, 1}).c, 0.0);
    const auto [b, c] = bc_coefficients({0, 0, 1, 1, 0});
    EXPECT_NEAR(b, -2.0 / 3.0, 1e-15);
    EXPECT_EQ(c, 0.0);
    EXPECT_THROW(bc_coefficients({10, 1, 0, 0, 0}), invalid_parameter);
}

TEST(PhotonSteady, Examples)
{
    EXPECT_DOUBLE_EQ(positive_root(3.0, 4.0), 4.0);
    EXPECT_EQ(positive_root(-2.0 / 3.0, 0.0), 0.0);
    EXPECT_EQ(photon_steady({0, 0, 1, 1, 0}), 0.0);

    const DimensionlessParams d{100, 0, 1, 10, 0};
    const double n = photon_steady(d);
    EXPECT_NEAR(n, 75.19, 5e-3);
    EXPECT_NEAR(n, oracle::photon_number(d), 1e-12 * n);
}

TEST(PhotonSteady, NoCancellationForLargeNegativeB)
{
    // n = c / |b| to leading order when |b| >> sqrt(c)
    const double n = positive_root(-1e9, 2.0);
    EXPECT_NEAR(n, 2e-9, 1e-22);
    EXPECT_GT(positive_root(-1e12, 1e-3), 0.0);
}

TEST(PhotonSteady, MatchesIndependentBalanceRoot)
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 500; ++i) {
        DimensionlessParams d;
        d.lam = oracle::log_uniform(rng, 1e-1, 1e6);
        d.sat = oracle::log_uniform(rng, 1e-4, 1e4);
        d.alpha1 = oracle::log_uniform(rng, 1e-3, 1e3);
        d.alpha2 = oracle::log_uniform(rng, 1e-2, 1e3);
        d.eta = oracle::uniform(rng, 0.0, 10.0);
        const double n = photon_steady(d);
        const double ref = oracle::photon_number(d);
        ASSERT_GE(n, 0.0);
        EXPECT_NEAR(n, ref, 1e-9 * std::max(ref, 1e-12)) << "lam=" << d.lam << " S=" << d.sat;
    }
}

TEST(PhotonSteady, ZeroCGivesPositivePartOfB)
{
    for (const DimensionlessParams& d :
         {DimensionlessParams{50, 0.1, 0, 3, 0}, DimensionlessParams{50, 0.1, 2, 0, 0}, DimensionlessParams{0, 1, 2, 3, 1}}) {
        const auto [b, c] = bc_coefficients(d);
        EXPECT_EQ(c, 0.0);
        EXPECT_EQ(photon_steady(d), std::max(b, 0.0));
    }
}

TEST(PhotonSteady, ScaleInvariance)
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        PhysicalParams p{.n_atoms = oracle::log_uniform(rng, 1, 1e6),
                         .coupling = oracle::log_uniform(rng, 1e-2, 1e2),
                         .cavity_decay = oracle::log_uniform(rng, 1e-2, 1e2),
                         .gamma_10 = oracle::log_uniform(rng, 1e-2, 1e2),
                         .gamma_21 = oracle::log_uniform(rng, 1e-3, 1e3),
                         .gamma_02 = oracle::log_uniform(rng, 1e-3, 1e3),
                         .gamma_col = oracle::uniform(rng, 0, 5)};
        const double k = oracle::log_uniform(rng, 1e-6, 1e6);
        PhysicalParams q = p;
        q.coupling *= k, q.cavity_decay *= k, q.gamma_10 *= k, q.gamma_21 *= k, q.gamma_02 *= k, q.gamma_col *= k;
        const double n1 = photon_steady(nondimensionalize(p));
        const double n2 = photon_steady(nondimensionalize(q));
        EXPECT_NEAR(n1, n2, 1e-11 * std::max(n1, 1e-300));
    }
}

TEST(SteadyStateFull, ReferenceCaseSatisfiesRateEquations)
{
    const DimensionlessParams d{100, 0, 1, 10, 0};
    const SteadyState ss = steady_state_full(d);
    EXPECT_TRUE(ss.physical);
    EXPECT_NEAR(ss.state.trace(), 1.0, 1e-15);
    EXPECT_LT(ss.residual, 1e-10);
}

TEST(SteadyStateFull, PhysicalRhsVanishes)
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        DimensionlessParams d;
        d.lam = oracle::log_uniform(rng, 1, 1e3);
        d.sat = oracle::log_uniform(rng, 1e-3, 1e2);
        d.alpha1 = oracle::log_uniform(rng, 1e-2, 1e2);
        d.alpha2 = oracle::log_uniform(rng, 1e-2, 1e2);
        d.eta = oracle::uniform(rng, 0, 5);
        const SteadyState ss = steady_state_full(d);
        ASSERT_TRUE(ss.physical);
        const PhysicalParams p = realize(d, 1.0, 1.0);
        const auto r = rhs(ss.state, p);
        const double scale = std::max(1.0, ss.state.photons);
        EXPECT_LT(std::abs(r.photons) / scale, 1e-9);
        EXPECT_LT(std::abs(r.polarization) / scale, 1e-9);
        EXPECT_LT(std::abs(r.pop1), 1e-9);
        EXPECT_LT(std::abs(r.pop0), 1e-9);
        EXPECT_GE(ss.state.inversion(), -1.0);
        EXPECT_LE(ss.state.inversion(), 1.0);
    }
}

TEST(SteadyStateFull, UnpumpedRootOfTheMisprintedCoefficientIsSpurious)
{
    // With alpha1 = 0 and the gain term written without its alpha1 factor,
    // b > 0 and the root back-substitutes to rho11 = -g x / gamma_10 < 0.
    const DimensionlessParams d{100, 0.1, 0, 10, 0};
    const double b_misprint =
        (d.lam * (d.alpha2 - 1) - d.sat * (d.alpha2 + 1 + d.eta) * d.alpha2 - d.alpha2) / d.alpha2;
    ASSERT_GT(b_misprint, 0.0);
    const SteadyState ss = steady_state_at(b_misprint, d);
    EXPECT_FALSE(ss.physical);
    EXPECT_LT(ss.state.pop1, 0.0);
    EXPECT_NEAR(ss.state.pop1, -b_misprint / d.lam, 1e-12);

    // The actual closed form stays on the physical branch: nothing pumps, n = 0.
    const SteadyState real = steady_state_full(d);
    EXPECT_TRUE(real.physical);
    EXPECT_EQ(real.state.photons, 0.0);
    EXPECT_DOUBLE_EQ(real.state.pop2, 1.0);
}

TEST(SteadyStateFull, IdealCavityLimitIsFinite)
{
    const SteadyState ss = steady_state_full(DimensionlessParams{1e4, 0, 0.5, 20, 1});
    EXPECT_TRUE(ss.physical);
    EXPECT_EQ(ss.state.polarization, 0.0);
    EXPECT_LT(ss.residual, 1e-10);
}

TEST(GroundState, PumpEntryLevel)
{
    EXPECT_EQ(ground_state(Scheme::lambda).pop2, 1.0);
    EXPECT_EQ(ground_state(Scheme::v).pop0, 1.0);
    EXPECT_EQ(ground_state(Scheme::v).photons, 0.0);
}
