#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace tfx;

TEST(Jacobi, DampingFactor) {
    const auto g = Metric::flat_torus(1, 1);
    const auto tr = integrate_flow(g, FourierGenerator::constant(0.5), TorusTangent{0, 0, 0}, 0, 3);
    for (double t : {0.0, 1.0, 3.0}) EXPECT_EQ(tr->damping(t), 1.0);
    const auto s = std::make_shared<SyntheticPath>([](double) { return 0.0; }, [](double) { return 2.0; });
    EXPECT_NEAR(damping_factor(*s, 1.7), std::exp(-1.7), 1e-10);
}

TEST(Jacobi, DampingFactorMatchesQuadratureOracle) {
    const auto g = Metric::flat_torus(1, 1);
    const auto tr = integrate_flow(g, sin_theta(), TorusTangent{0.1, 0.2, 0.3}, 0, 4, {1e-12, 1e-14});
    // composite Simpson of V lambda = cos(theta(t)) along the orbit
    for (double T : {1.0, 2.5, 4.0}) {
        const int n = 4000;
        double s = 0;
        for (int i = 0; i <= n; ++i) {
            const double t = T * i / n, w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
            s += w * std::cos(tr->coordinates(t)[2]);
        }
        s *= T / n / 3;
        EXPECT_NEAR(tr->damping(T), std::exp(-0.5 * s), 1e-9);
    }
}

TEST(Jacobi, ClosedFormDampedSolutions) {
    const auto one = SyntheticPath::constant(1.0);
    const auto s = damped_solve(one, 0, 1, 0, 10);
    for (double t = 0; t <= 10; t += 0.25) EXPECT_NEAR(s.z(t), std::sin(t), 1e-8);
    const auto zero = damped_solve(SyntheticPath::constant(0.0), 1, 0, 0, 10);
    for (double t = 0; t <= 10; t += 0.5) EXPECT_NEAR(zero.z(t), 1.0, 1e-12);
    const auto hyp = damped_solve(SyntheticPath::constant(-1.0), 1, -1, 0, 10);
    for (double t = 0; t <= 10; t += 0.5) EXPECT_NEAR(hyp.z(t), std::exp(-t), 1e-8);
}

TEST(Jacobi, MagneticClosedForms) {
    for (double l0 : {0.5, 1.0, 2.0}) {
        const auto mc = magnetic_counterexample(l0);
        const double P = mc.period();
        const auto tr = integrate_flow(mc.metric, mc.lambda, TorusTangent{0.1, 0.1, 0.2}, 0, P);
        for (auto [x0, y0] : {std::pair{0.0, 1.0}, std::pair{1.0, 0.0}, std::pair{0.3, -0.7}}) {
            // x = -y' - (V lambda) y with V lambda = 0
            const auto y = jacobi_solve(tr, y0, -x0, 0, P);
            for (double t = 0; t <= P; t += P / 50) {
                EXPECT_NEAR(y.y(t), mc.jacobi_y(x0, y0, t), 1e-8);
                EXPECT_NEAR(-y.dy(t), mc.jacobi_x(x0, y0, t), 1e-8);
            }
        }
    }
}

TEST(Jacobi, FlatLinearSolution) {
    const auto g = Metric::flat_torus(1, 1);
    const auto tr = integrate_flow(g, FourierGenerator::zero(), TorusTangent{0, 0, 0.4}, 0, 5);
    const auto y = jacobi_solve(tr, 0.3, -0.2, 0, 5);
    for (double t = 0; t <= 5; t += 0.5) EXPECT_NEAR(y.y(t), 0.3 - 0.2 * t, 1e-10);
}

TEST(Jacobi, DampingIdentityOnRandomReversibleSystems) {
    const auto g = mixed_torus();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(0, 1);
    for (int i = 0; i < 5; ++i) {
        const auto lam = random_generator(rng, true);
        const auto tr = integrate_flow(g, lam, TorusTangent{U(rng), U(rng), two_pi * U(rng)}, 0, 5);
        const double y0 = U(rng), dy0 = U(rng) - 0.5;
        const auto [z0, dz0] = damped_initial_data(*tr, y0, dy0);
        const auto y = jacobi_solve(tr, y0, dy0, 0, 5);
        const auto z = damped_solve(tr, z0, dz0, 0, 5);
        for (double t = 0; t <= 5; t += 0.05) {
            EXPECT_NEAR(y.y(t), tr->damping(t) * z.z(t), 1e-8);
            EXPECT_NEAR(y.dy(t), z.dy(t), 1e-8);
        }
    }
}

TEST(Jacobi, LinearityAndWronskian) {
    const auto g = mixed_torus();
    std::mt19937_64 rng(8);
    const auto lam = random_generator(rng, false);
    const auto tr = integrate_flow(g, lam, TorusTangent{0.2, 0.3, 0.4}, 0, 6);
    const auto a = damped_solve(tr, 1, 0, 0, 6), b = damped_solve(tr, 0, 1, 0, 6);
    const auto c = damped_solve(tr, 2, -3, 0, 6);
    const double w0 = a.z(0) * b.dz(0) - b.z(0) * a.dz(0);
    for (double t = 0; t <= 6; t += 0.1) {
        EXPECT_NEAR(c.z(t), 2 * a.z(t) - 3 * b.z(t), 1e-10 * std::max(1.0, std::abs(c.z(t))));
        // relative to the size of the products, which grow with the solutions
        const double scale = std::max(std::abs(w0), std::abs(a.z(t) * b.dz(t)) + std::abs(b.z(t) * a.dz(t)));
        EXPECT_NEAR(a.z(t) * b.dz(t) - b.z(t) * a.dz(t), w0, 1e-8 * scale);
    }
    // residual of z'' + kt z = 0 at midpoints of the accepted steps
    const auto grid = a.grid();
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double t = 0.5 * (grid[i] + grid[i + 1]), h = 0.25 * (grid[i + 1] - grid[i]);
        const double zpp = (8 * (a.dz(t + h) - a.dz(t - h)) - (a.dz(t + 2 * h) - a.dz(t - 2 * h))) / (12 * h);
        EXPECT_LT(std::abs(zpp + tr->kappa_tilde(t) * a.z(t)), 1e-7 * std::max(1.0, std::abs(a.z(t)))) << t;
    }
}

TEST(Jacobi, ConjugateScanOracles) {
    const auto sph = Metric::round_sphere(1);
    const auto rs = conjugate_scan(sph, FourierGenerator::zero(), sphere_tangent(sph, {0, 0, 1}, {1, 0, 0}), 4);
    ASSERT_TRUE(rs.first_conjugate_time);
    EXPECT_NEAR(*rs.first_conjugate_time, pi(), 1e-6);
    for (double l0 : {0.5, 1.0, 2.0}) {
        const auto mc = magnetic_counterexample(l0);
        const auto r = conjugate_scan(mc.metric, mc.lambda, TorusTangent{0.3, 0.1, 0.0}, mc.period());
        ASSERT_TRUE(r.first_conjugate_time);
        EXPECT_NEAR(*r.first_conjugate_time, pi() / l0, 1e-6);
        // Sturm: consecutive zeros pi / l0 apart, z of one sign between them
        ASSERT_GE(r.zeros.size(), 1u);
    }
    const auto flat = conjugate_scan(Metric::flat_torus(1, 1), FourierGenerator::zero(), TorusTangent{0, 0, 0.3}, 100);
    EXPECT_FALSE(flat.first_conjugate_time);
    EXPECT_TRUE(flat.zeros.empty());
}

TEST(Jacobi, ZerosOfYAndZCoincide) {
    const auto g = Metric::flat_torus(1, 1);
    const auto tr = integrate_flow(g, sin_theta(), TorusTangent{0.2, 0.2, 0.5}, 0, 20);
    const auto z = damped_solve(tr, 0, 1, 0, 20);
    const auto zeros = detail::sign_changes(z, 0, 20, 1e-10);
    for (double t : zeros) EXPECT_LT(std::abs(z.y(t)), 1e-9);
    // one sign between consecutive zeros
    for (std::size_t i = 0; i + 1 < zeros.size(); ++i) {
        const double s = z.z(0.5 * (zeros[i] + zeros[i + 1]));
        for (int k = 1; k < 20; ++k) {
            const double t = zeros[i] + (zeros[i + 1] - zeros[i]) * k / 20.0;
            EXPECT_GT(z.z(t) * s, 0.0);
        }
    }
}

TEST(Jacobi, ExpMapDeterminantBracketsConjugateTime) {
    const auto sph = Metric::round_sphere(1);
    const auto rs = exp_det_conjugate_time(sph, FourierGenerator::zero(), ChartPoint{Eigen::Vector3d(0, 0, 1)}, 0.3, 4);
    ASSERT_TRUE(rs.sign_change_time);
    EXPECT_NEAR(*rs.sign_change_time, pi(), 1e-4);
    const auto mc = magnetic_counterexample(2);
    const auto rm = exp_det_conjugate_time(mc.metric, mc.lambda, ChartPoint{TorusPoint{0.1, 0.2}}, 0.7, 2.5);
    ASSERT_TRUE(rm.sign_change_time);
    EXPECT_NEAR(*rm.sign_change_time, pi() / 2, 1e-4);
    const auto rf = exp_det_conjugate_time(Metric::flat_torus(1, 1), FourierGenerator::zero(),
                                           ChartPoint{TorusPoint{0.1, 0.2}}, 0.7, 10, 0.25);
    EXPECT_FALSE(rf.sign_change_time);
}

TEST(Jacobi, ExpMap) {
    const auto g = Metric::flat_torus(1, 1);
    const auto p = std::get<TorusPoint>(exp_map(g, FourierGenerator::zero(), TorusPoint{0.1, 0.1}, Eigen::Vector2d(0.3, 0.4)));
    EXPECT_NEAR(p.q1, 0.4, 1e-10);
    EXPECT_NEAR(p.q2, 0.5, 1e-10);
    EXPECT_THROW(exp_map(g, FourierGenerator::zero(), TorusPoint{0, 0}, Eigen::Vector2d(0, 0)), DomainError);
    EXPECT_THROW(exp_jacobian_det(g, FourierGenerator::zero(), TorusPoint{0, 0}, 1.0, 0.0, 1e-2), DomainError);
}
