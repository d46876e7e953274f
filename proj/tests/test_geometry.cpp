#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace tfx;

TEST(Geometry, CurvatureOfBackends) {
    EXPECT_EQ(gaussian_curvature(Metric::flat_torus(1, 2), 0.3, 0.7), 0.0);
    EXPECT_EQ(gaussian_curvature(Metric::round_sphere(1), ChartPoint{Eigen::Vector3d(0, 0, 1)}), 1.0);
    EXPECT_DOUBLE_EQ(gaussian_curvature(Metric::round_sphere(2), ChartPoint{Eigen::Vector3d(2, 0, 0)}), 0.25);
}

TEST(Geometry, ConformalCurvatureMatchesFiniteDifferenceLaplacian) {
    const double L1 = 1.0, a = 0.1;
    const auto g = cosine_torus(a, L1);
    auto u = [&](double q1, double) { return a * std::cos(two_pi * q1 / L1); };
    const double h = 1e-4;
    for (auto [q1, q2] : {std::pair{0.0, 0.0}, std::pair{0.31, 0.77}, std::pair{0.5, 0.1}}) {
        const double lap = (u(q1 + h, q2) + u(q1 - h, q2) + u(q1, q2 + h) + u(q1, q2 - h) - 4 * u(q1, q2)) / (h * h);
        EXPECT_NEAR(gaussian_curvature(g, q1, q2), -std::exp(-2 * u(q1, q2)) * lap, 1e-6);
    }
}

TEST(Geometry, SpectralConformalFactorAgreesWithClosedForm) {
    const auto exact = mixed_torus();
    const auto grid = sample_grid(32, 32, 1.0, 1.0, [&](double a, double b) { return exact.u(a, b).v; });
    const auto g = Metric::conformal_torus(1.0, 1.0, ConformalFactor::from_grid(grid));
    for (auto [q1, q2] : {std::pair{0.13, 0.4}, std::pair{0.77, 0.91}})
        EXPECT_NEAR(gaussian_curvature(g, q1, q2), gaussian_curvature(exact, q1, q2), 1e-9);
    EXPECT_THROW(ConformalFactor::from_grid(sample_grid(24, 32, 1.0, 1.0, [](double, double) { return 0.0; })),
                 DomainError);
}

TEST(Geometry, FlatFrame) {
    const auto g = Metric::flat_torus(1, 1);
    const auto f = frame_vectors(g, TorusTangent{0.2, 0.3, 0.0});
    EXPECT_TRUE(f.X.isApprox(Eigen::Vector3d(1, 0, 0)));
    EXPECT_TRUE(f.H.isApprox(Eigen::Vector3d(0, 1, 0)));
    EXPECT_TRUE(f.V.isApprox(Eigen::Vector3d(0, 0, 1)));
    const auto r = frame_vectors(g, TorusTangent{0.2, 0.3, pi() / 2});
    EXPECT_NEAR((r.X - Eigen::Vector3d(0, 1, 0)).norm(), 0.0, 1e-15);
}

TEST(Geometry, StructureResidualsOnAllBackends) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0, 1);
    const auto flat = Metric::flat_torus(1, 1.5);
    const auto conf = mixed_torus();
    const auto sph = Metric::round_sphere(1);
    for (int i = 0; i < 10; ++i) {
        const TorusTangent v{U(rng), U(rng), two_pi * U(rng)};
        EXPECT_LT(structure_residuals(flat, v, 1e-4).max(), 1e-7);
        EXPECT_LT(structure_residuals(conf, v, 1e-4).max(), 1e-5);
        const Eigen::Vector3d p(U(rng) - 0.5, U(rng) - 0.5, U(rng) - 0.5), d(U(rng), U(rng), U(rng));
        const auto s = sphere_tangent(sph, p, d);
        EXPECT_LT(structure_residuals(sph, s, 1e-4).xh_minus_kv, 1e-5);
        EXPECT_LT(structure_residuals(sph, s, 1e-4).max(), 1e-5);
    }
}

TEST(Geometry, StructureResidualsDecaySecondOrder) {
    const auto conf = mixed_torus(0.3, 0.2);
    const auto c = structure_convergence(conf, TorusTangent{0.21, 0.64, 1.1});
    EXPECT_TRUE(c.second_order);
    const auto sph = Metric::round_sphere(1.5);
    const auto s = structure_convergence(sph, sphere_tangent(sph, {0.3, -0.2, 1.0}, {1.0, 0.4, 0.0}));
    EXPECT_TRUE(s.second_order);
    EXPECT_LT(s.residuals[2].max(), s.residuals[0].max());
}

TEST(Geometry, GaussBonnetOnConformalTorus) {
    EXPECT_NEAR(gauss_bonnet_integral(cosine_torus()), 0.0, 1e-8);
    EXPECT_NEAR(gauss_bonnet_integral(mixed_torus(0.2, 0.1)), 0.0, 1e-8);
    EXPECT_GT(torus_area(mixed_torus()), 0.0);
}

TEST(Geometry, NormalizationIsIdempotentAndShiftsByPeriods) {
    const auto g = Metric::flat_torus(1.0, 2.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-20, 20);
    for (int i = 0; i < 200; ++i) {
        const TorusTangent v{U(rng), U(rng), U(rng)};
        const auto n1 = std::get<TorusTangent>(normalize(g, v));
        const auto n2 = std::get<TorusTangent>(normalize(g, n1));
        EXPECT_EQ(n1.q1, n2.q1);
        EXPECT_EQ(n1.q2, n2.q2);
        EXPECT_EQ(n1.theta, n2.theta);
        EXPECT_GE(n1.q1, 0.0);
        EXPECT_LT(n1.q1, 1.0);
        EXPECT_LT(n1.theta, two_pi);
        EXPECT_NEAR(std::remainder(v.q1 - n1.q1, 1.0), 0.0, 1e-12);
        EXPECT_NEAR(std::remainder(v.q2 - n1.q2, 2.0), 0.0, 1e-12);
    }
    const auto s = Metric::round_sphere(2);
    const auto a = normalize(s, SphereTangent{{1, 1, 1}, {1, 0, 0}});
    EXPECT_NO_THROW(validate(s, a));
    EXPECT_LT((coords(normalize(s, a)) - coords(a)).norm(), 1e-15);
}

TEST(Geometry, RejectsInvalidInput) {
    EXPECT_THROW(Metric::flat_torus(-1, 1), DomainError);
    EXPECT_THROW(Metric::round_sphere(0), DomainError);
    EXPECT_THROW(validate(Metric::round_sphere(1), TorusTangent{}), DomainError);
    EXPECT_THROW(structure_residuals(Metric::flat_torus(1, 1), TorusTangent{}, 0.1), DomainError);
    const auto bad = Metric::conformal_torus(1, 1, ConformalFactor::closed_form([](double, double) {
        Jet2 j;
        j.v = std::nan("");
        return j;
    }));
    EXPECT_THROW(gaussian_curvature(bad, 0.1, 0.1), DomainError);
}

TEST(Geometry, FlipIsAnInvolution) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0, 1);
    const auto g = Metric::flat_torus(1, 1);
    for (int i = 0; i < 1000; ++i) {
        const TorusTangent v{U(rng), U(rng), two_pi * U(rng)};
        EXPECT_LT(state_distance(g, flip(flip(v)), v), 1e-14);
    }
}
