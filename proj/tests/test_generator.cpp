#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace tfx;

TEST(Generator, ConstantHasNoDerivatives) {
    const auto g = Metric::flat_torus(1, 1);
    const auto lam = FourierGenerator::constant(0.7);
    const auto d = eval_lambda(g, *lam, TorusTangent{0.1, 0.2, 0.3});
    EXPECT_EQ(d.lambda, 0.7);
    EXPECT_EQ(d.vlam, 0.0);
    EXPECT_EQ(d.hlam, 0.0);
    EXPECT_EQ(d.fvlam, 0.0);
    EXPECT_NEAR(thermostat_curvature(g, *lam, TorusTangent{0.1, 0.2, 0.3}), 0.49, 1e-15);
    EXPECT_NEAR(damped_curvature(g, *lam, TorusTangent{0.1, 0.2, 0.3}), 0.49, 1e-15);
}

TEST(Generator, ZeroGeneratorGivesGaussianCurvature) {
    const auto g = mixed_torus();
    const TorusTangent v{0.3, 0.8, 2.0};
    EXPECT_DOUBLE_EQ(thermostat_curvature(g, *FourierGenerator::zero(), v), gaussian_curvature(g, 0.3, 0.8));
    EXPECT_DOUBLE_EQ(damped_curvature(g, *FourierGenerator::zero(), v), gaussian_curvature(g, 0.3, 0.8));
}

TEST(Generator, SinThetaFiberDerivativesAndCurvature) {
    const auto g = Metric::flat_torus(1, 1);
    const auto lam = sin_theta();
    for (double th = 0; th < two_pi; th += 0.3) {
        const TorusTangent v{0.4, 0.1, th};
        const auto d = eval_lambda(g, *lam, v);
        EXPECT_NEAR(d.lambda, std::sin(th), 1e-15);
        EXPECT_NEAR(d.vlam, std::cos(th), 1e-15);
        EXPECT_NEAR(d.vvlam, -std::sin(th), 1e-15);
        // KK = sin^2 + F(cos) = sin^2 + sin * (-sin) on the flat torus
        const double kk = std::sin(th) * std::sin(th) + std::sin(th) * (-std::sin(th));
        EXPECT_NEAR(thermostat_curvature(g, *lam, v), kk, 1e-10);
        // kappa_tilde = KK - F(cos)/2 - cos^2/4 term by term
        const double fv = -std::sin(th) * std::sin(th);
        EXPECT_NEAR(damped_curvature(g, *lam, v), kk - 0.5 * fv - 0.25 * std::cos(th) * std::cos(th), 1e-10);
    }
}

TEST(Generator, HorizontalDerivativeMatchesFiniteDifferenceAlongH) {
    const auto lam = cos_q1_cos_theta();
    for (const auto& g : {Metric::flat_torus(1, 1), mixed_torus()}) {
        for (double th : {0.0, 0.7, 2.5}) {
            const Eigen::Vector3d x(0.23, 0.41, th);
            const auto d = eval_lambda_at(g, *lam, x);
            // second-order Taylor step along the H integral curve
            const double h = 1e-4;
            auto along = [&](double s) {
                const Eigen::VectorXd y = x + s * frame_at(g, x).H;
                const Eigen::VectorXd y2 = x + s * 0.5 * (frame_at(g, x).H + frame_at(g, y).H);
                return lam->chart_jet(y2[0], y2[1], y2[2]).value;
            };
            EXPECT_NEAR((along(h) - along(-h)) / (2 * h), d.hlam, 1e-6);
        }
    }
}

TEST(Generator, FVlambdaMatchesDerivativeAlongOrbit) {
    const auto g = mixed_torus();
    std::mt19937_64 rng(5);
    const auto lam = random_generator(rng, false);
    const TorusTangent v{0.1, 0.6, 0.9};
    const auto traj = integrate_flow(g, lam, v, -0.02, 0.02, {1e-12, 1e-14});
    const double h = 2e-3;
    auto vl = [&](double t) { return traj->at(t).vlam; };
    const double fd = (8 * (vl(h) - vl(-h)) - (vl(2 * h) - vl(-2 * h))) / (12 * h);
    EXPECT_NEAR(fd, eval_lambda(g, *lam, v).fvlam, 1e-6);
}

TEST(Generator, MirrorModeSigns) {
    const auto g = Metric::flat_torus(1, 1);
    const auto c = FourierGenerator::constant(0.8)->mirrored();
    EXPECT_EQ(c->constant_value().value(), -0.8);
    EXPECT_EQ(eval_lambda(g, *c, TorusTangent{0.2, 0.2, 1.0}).lambda, -0.8);
    const auto s = sin_theta()->mirrored();
    for (double th = 0; th < two_pi; th += 0.5)
        EXPECT_NEAR(s->chart_jet(0.1, 0.2, th).value, std::sin(th), 1e-15);
    // generic mirror against the defining formula -lambda(q, theta + pi)
    std::mt19937_64 rng(9);
    const auto lam = random_generator(rng, false);
    const auto mir = mirror_lambda(lam);
    for (double th = 0; th < two_pi; th += 0.4)
        EXPECT_NEAR(mir->chart_jet(0.3, 0.7, th).value, -lam->chart_jet(0.3, 0.7, th + pi()).value, 1e-13);
    const auto generic = std::make_shared<MirroredGenerator>(lam);
    EXPECT_NEAR(generic->chart_jet(0.3, 0.7, 1.0).dth, mir->chart_jet(0.3, 0.7, 1.0).dth, 1e-13);
}

TEST(Generator, ReversibilityReport) {
    const auto g = Metric::flat_torus(1, 1);
    const auto s = reversibility_report(g, *sin_theta());
    EXPECT_TRUE(s.is_reversible);
    EXPECT_LT(s.max_even_mode_mass, 1e-12);
    const auto c = reversibility_report(g, *FourierGenerator::constant(0.3));
    EXPECT_FALSE(c.is_reversible);
    EXPECT_NEAR(c.max_even_mode_mass, 0.3, 1e-14);
}

TEST(Generator, ParityVerdictMatchesCoefficientMirror) {
    const auto g = mixed_torus();
    std::mt19937_64 rng(21);
    for (int i = 0; i < 10; ++i) {
        for (bool rev : {true, false}) {
            const auto lam = random_generator(rng, rev);
            const bool parity = reversibility_report(g, *lam).is_reversible;
            EXPECT_EQ(parity, rev);
            EXPECT_EQ(parity, mirror_coefficient_defect(g, *lam) < 1e-12);
        }
    }
}

TEST(Generator, RejectsMalformedModes) {
    EXPECT_THROW(FourierGenerator({{-1, [](double, double) { return CJet1{}; }}}), DomainError);
    EXPECT_THROW(FourierGenerator({{1, [](double, double) { return CJet1{}; }},
                                   {1, [](double, double) { return CJet1{}; }}}),
                 DomainError);
    EXPECT_THROW(eval_lambda(Metric::round_sphere(1), *sin_theta(), SphereTangent{}), DomainError);
}
