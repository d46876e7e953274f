#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "thermoflow/ode.hpp"

using namespace thermoflow;

namespace {

Eigen::VectorXd harmonic(double, const Eigen::VectorXd& y) {
    Eigen::VectorXd d(2);
    d << y[1], -y[0];
    return d;
}

} // namespace

TEST(Ode, HarmonicOscillatorDenseOutput) {
    Eigen::VectorXd y0(2);
    y0 << 0, 1;
    const auto dense = integrate_span(harmonic, 0.0, y0, -3.0, 10.0, OdeOptions{1e-11, 1e-13},
                                      [](double, Eigen::VectorXd&) {});
    for (double t = -3; t <= 10; t += 0.137) {
        EXPECT_NEAR(dense(t)[0], std::sin(t), 1e-9) << t;
        EXPECT_NEAR(dense(t)[1], std::cos(t), 1e-9) << t;
    }
    EXPECT_DOUBLE_EQ(dense.t_min(), -3.0);
    EXPECT_DOUBLE_EQ(dense.t_max(), 10.0);
}

TEST(Ode, FixedStepFallback) {
    OdeOptions o;
    o.method = OdeMethod::Rk4Fixed;
    o.fixed_step = 1e-3;
    Eigen::VectorXd y0(2);
    y0 << 1, 0;
    const auto r = integrate(harmonic, 0.0, y0, 2.0, o);
    EXPECT_NEAR(r.final_state[0], std::cos(2.0), 1e-10);
}

TEST(Ode, SpanMustContainStart) {
    Eigen::VectorXd y0(2);
    y0 << 1, 0;
    EXPECT_THROW(integrate_span(harmonic, 0.0, y0, 1.0, 2.0, {}, [](double, Eigen::VectorXd&) {}), DomainError);
    EXPECT_THROW(integrate_span(harmonic, 0.0, y0, 0.0, 0.0, {}, [](double, Eigen::VectorXd&) {}), DomainError);
}

TEST(Ode, StepUnderflowRaisesWithLastGoodTime) {
    auto blowup = [](double, const Eigen::VectorXd& y) {
        Eigen::VectorXd d(1);
        d << y[0] * y[0];
        return d;
    };
    Eigen::VectorXd y0(1);
    y0 << 1;
    try {
        integrate(blowup, 0.0, y0, 2.0, OdeOptions{});
        FAIL() << "expected an integration error";
    } catch (const IntegrationError& e) {
        EXPECT_GT(e.last_good_time(), 0.9);
        EXPECT_LT(e.last_good_time(), 1.0);
    }
}
