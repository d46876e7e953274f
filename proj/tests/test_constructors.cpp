#include <gtest/gtest.h>

#include "support.hpp"

using namespace tfx;

TEST(Constructors, GaussianOnFlatTorusVanishes) {
    const auto gt = gaussian_from_curvature(Metric::flat_torus(1, 1), 16, 4);
    EXPECT_LT(gt.max_abs_KK, 1e-14);
    for (double th : {0.0, 1.0}) EXPECT_EQ(gt.lambda->chart_jet(0.3, 0.4, th).value, 0.0);
}

TEST(Constructors, GaussianOnConformalTorus) {
    const auto gt = gaussian_from_curvature(cosine_torus(), 64, 8);
    EXPECT_LT(gt.max_abs_KK, 1e-6);
    EXPECT_TRUE(gt.reversibility.is_reversible);
    EXPECT_LT(std::abs(gt.rhs_mean), 1e-9);
    EXPECT_LT(gt.hodge_mode_residual, 1e-9);
    EXPECT_LT(gt.hodge_grid_residual, 1e-9);
    const auto mixed = gaussian_from_curvature(mixed_torus(), 64, 8);
    EXPECT_LT(mixed.max_abs_KK, 1e-6);
    EXPECT_THROW(gaussian_from_curvature(Metric::round_sphere(1)), DomainError);
}

TEST(Constructors, MagneticCounterexample) {
    EXPECT_NEAR(magnetic_counterexample(1).conjugate_time(), pi(), 1e-15);
    EXPECT_NEAR(magnetic_counterexample(2).period(), pi(), 1e-15);
    EXPECT_THROW(magnetic_counterexample(0), DomainError);
    const auto mc = magnetic_counterexample(1);
    EXPECT_NEAR(thermostat_curvature(mc.metric, *mc.lambda, TorusTangent{0.1, 0.1, 0.1}), 1.0, 1e-15);
}

TEST(Constructors, Bump) {
    EXPECT_EQ(bump(0.0), 1.0);
    EXPECT_EQ(bump(0.5), 1.0);
    EXPECT_EQ(bump(-0.5), 1.0);
    EXPECT_EQ(bump(1.0), 0.0);
    EXPECT_GT(bump(0.75), 0.0);
    EXPECT_LT(bump(0.75), 1.0);
    EXPECT_NEAR(bump(0.75), 0.5, 1e-15);
}

namespace {

struct Box {
    Metric g = Metric::flat_torus(4, 1);
    TorusTangent v{0.0, 0.5, 0.0};
    std::shared_ptr<FlowboxPerturbation> make(double eps, double delta = 0.1) const {
        return flowbox_perturbation(g, FourierGenerator::zero(), v, 2.0, delta, eps, 1);
    }
};

} // namespace

TEST(Constructors, FlowboxValuesOnAndOffCore) {
    const Box b;
    const auto fb = b.make(0.04);
    for (double t : {-1.0, -0.4, 0.0, 0.3, 1.0})
        EXPECT_NEAR(fb->phi(t, 0.5, 0.0), 0.2, 1e-15) << t;
    EXPECT_EQ(fb->phi(0.0, 0.5 + 0.15, 0.0), 0.0);
    EXPECT_EQ(fb->phi(0.0, 0.5, 0.2), 0.0);
    EXPECT_EQ(fb->phi(1.0, 0.0, 3.0), 0.0);
    EXPECT_GT(fb->phi(0.0, 0.5 + 0.07, 0.0), 0.0);
    EXPECT_LT(fb->phi(0.0, 0.5 + 0.07, 0.0), 0.2);
    // H phi = d/dq2 and V phi = d/dtheta on the flat geodesic core
    for (double t : {-1.5, -0.2, 0.9}) {
        const auto j = fb->perturbation_jet(t, 0.5, 0.0);
        EXPECT_LT(std::abs(j.d2), 1e-6);
        EXPECT_LT(std::abs(j.dth), 1e-6);
        EXPECT_NEAR(j.value, 0.2 * bump(t / 2.0), 1e-12);
    }
    EXPECT_EQ(fb->chart_jet(2.0, 0.0, 3.0).value, 0.0);
}

TEST(Constructors, FlowboxRejectsWideTube) {
    const Box b;
    EXPECT_THROW(b.make(0.01, 5.0), DomainError);
    EXPECT_GT(b.make(0.01)->injectivity_bound(), 0.1);
}

TEST(Constructors, FlowboxC2NormDecreasesWithEps) {
    const Box b;
    const double n1 = b.make(0.1)->c2_norm_estimate(), n2 = b.make(0.01)->c2_norm_estimate(),
                 n3 = b.make(0.001)->c2_norm_estimate();
    EXPECT_GT(n1, n2);
    EXPECT_GT(n2, n3);
}

TEST(Constructors, ClosedOrbitIndexExperiment) {
    const auto rep = closed_orbit_experiment({});
    EXPECT_NEAR(rep.I_unperturbed, 0.2, 1e-8);
    EXPECT_NEAR(rep.identity, 0.2, 1e-8);
    EXPECT_NEAR(rep.I_unperturbed, rep.identity, 1e-8);
    EXPECT_LT(rep.I_perturbed, 0.0);
    EXPECT_LT(rep.core_contribution, 0.0);
    EXPECT_TRUE(rep.core_bound_holds);
    ASSERT_TRUE(rep.conjugate.first_conjugate_time);
    EXPECT_EQ(rep.status, "NEGATIVE_INDEX");

    PerturbationParams off;
    off.eps = 0;
    const auto r0 = closed_orbit_experiment(off);
    EXPECT_NEAR(r0.I_perturbed, 0.2, 1e-8);
    EXPECT_FALSE(r0.conjugate.first_conjugate_time);
    EXPECT_EQ(r0.status, "INCONCLUSIVE");
}
