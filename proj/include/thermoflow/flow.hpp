#pragma once

// Thermostat flow F = X + lambda V, coefficient traces along orbits, and the
// mirror/reversibility residuals.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include <boost/math/interpolators/makima.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "thermoflow/errors.hpp"
#include "thermoflow/generator.hpp"
#include "thermoflow/geometry.hpp"
#include "thermoflow/ode.hpp"

namespace thermoflow {

/// Jacobi-equation coefficients at one time along an orbit.
struct Coefficients {
    double lambda = 0;
    double vlam = 0;         // V lambda
    double fvlam = 0;        // F V lambda = d/dt (V lambda)
    double kk = 0;           // thermostat curvature
    double kappa_tilde = 0;  // damped curvature
};

/// Anything that supplies kappa_tilde, V lambda and the damping factor as functions
/// of time: an integrated orbit or a synthetic coefficient path.
class CoefficientPath {
public:
    virtual ~CoefficientPath() = default;
    virtual double t_min() const = 0;
    virtual double t_max() const = 0;
    virtual Coefficients at(double t) const = 0;
    /// m(t) = exp(-1/2 int_0^t V lambda); m(0) = 1.
    virtual double damping(double t) const = 0;

    double kappa_tilde(double t) const { return at(t).kappa_tilde; }
    bool covers(double a, double b) const {
        const double slack = 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
        return a >= t_min() - slack && b <= t_max() + slack;
    }
};
using PathPtr = std::shared_ptr<const CoefficientPath>;

/// Samples of the coefficients on the accepted-step grid.
struct CoefficientTrace {
    std::vector<double> t;
    std::vector<UnitTangent> states;
    std::vector<double> vlam, fvlam, kk, kt, m;
};

class Trajectory final : public CoefficientPath {
public:
    Trajectory(Metric g, GeneratorPtr lam, UnitTangent initial, double ta, double tb, OdeOptions opt,
               DenseOutput<Eigen::VectorXd> dense, OdeStats stats)
        : g_(std::move(g)), lam_(std::move(lam)), initial_(std::move(initial)), ta_(ta), tb_(tb),
          opt_(opt), dense_(std::move(dense)), stats_(stats) {
        for (double t : dense_.grid()) {
            const auto c = at(t);
            trace_.t.push_back(t);
            trace_.states.push_back(state(t));
            trace_.vlam.push_back(c.vlam);
            trace_.fvlam.push_back(c.fvlam);
            trace_.kk.push_back(c.kk);
            trace_.kt.push_back(c.kappa_tilde);
            trace_.m.push_back(damping(t));
        }
    }

    double t_min() const override { return ta_; }
    double t_max() const override { return tb_; }

    /// Raw integrator state (unreduced coordinates followed by w = int V lambda).
    Eigen::VectorXd raw(double t) const {
        check_time(t);
        return dense_(t);
    }

    /// Unreduced coordinates at t (continuous in t, useful for finite differences).
    Eigen::VectorXd coordinates(double t) const { return raw(t).head(g_.state_dim()); }

    UnitTangent state(double t) const {
        return normalize(g_, tangent_from_coords(g_, coordinates(t)));
    }

    Coefficients at(double t) const override {
        const Eigen::VectorXd x = coordinates(t);
        const auto d = eval_lambda_at(g_, *lam_, x);
        Coefficients c;
        c.lambda = d.lambda;
        c.vlam = d.vlam;
        c.fvlam = d.fvlam;
        c.kk = gaussian_curvature_at(g_, x) - d.hlam + d.lambda * d.lambda + d.fvlam;
        c.kappa_tilde = c.kk - 0.5 * d.fvlam - 0.25 * d.vlam * d.vlam;
        return c;
    }

    double damping(double t) const override { return std::exp(-0.5 * raw(t)[g_.state_dim()]); }

    const Metric& metric() const { return g_; }
    const GeneratorPtr& generator() const { return lam_; }
    const UnitTangent& initial() const { return initial_; }
    const CoefficientTrace& trace() const { return trace_; }
    const OdeStats& stats() const { return stats_; }
    const OdeOptions& options() const { return opt_; }
    const DenseOutput<Eigen::VectorXd>& dense() const { return dense_; }

private:
    void check_time(double t) const {
        if (!covers(t, t)) throw DomainError("time outside the trajectory span");
    }

    Metric g_;
    GeneratorPtr lam_;
    UnitTangent initial_;
    double ta_, tb_;
    OdeOptions opt_;
    DenseOutput<Eigen::VectorXd> dense_;
    OdeStats stats_;
    CoefficientTrace trace_;
};
using TrajectoryPtr = std::shared_ptr<const Trajectory>;

/// Integrate the flow of F = X + lambda V over [ta, tb] (ta <= 0 <= tb), starting at v0 at time 0.
inline TrajectoryPtr integrate_flow(const Metric& g, const GeneratorPtr& lam, const UnitTangent& v0, double ta,
                                    double tb, const OdeOptions& opt = {}) {
    if (!lam) throw DomainError("generator is empty");
    validate(g, v0);
    if (!g.is_torus() && !lam->constant_value())
        throw DomainError("the sphere backend supports constant generators only");
    const int n = g.state_dim();
    Eigen::VectorXd y0(n + 1);
    y0.head(n) = coords(v0);
    y0[n] = 0;

    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> rhs;
    if (g.is_torus()) {
        rhs = [&g, lam](double, const Eigen::VectorXd& y) {
            const Jet2 u = g.u(y[0], y[1]);
            const double s = std::exp(-u.v), c = std::cos(y[2]), sn = std::sin(y[2]);
            const LambdaChartJet j = lam->chart_jet(y[0], y[1], y[2]);
            Eigen::VectorXd dy(4);
            dy << s * c, s * sn, s * (-u.d1 * sn + u.d2 * c) + j.value, j.dth;
            return dy;
        };
    } else {
        const double l0 = *lam->constant_value();
        rhs = [l0](double, const Eigen::VectorXd& y) {
            const Eigen::Vector3d p = y.head<3>(), v = y.segment<3>(3);
            const Eigen::Vector3d n = p / p.norm();
            Eigen::VectorXd dy(7);
            dy << v, -v.squaredNorm() * p / p.squaredNorm() + l0 * n.cross(v), 0.0;
            return dy;
        };
    }
    auto project = [&g](double, Eigen::VectorXd& y) {
        if (g.is_torus()) return;
        Eigen::Vector3d p = y.head<3>();
        p *= g.radius() / p.norm();
        const Eigen::Vector3d n = p / g.radius();
        Eigen::Vector3d v = y.segment<3>(3);
        v -= n * n.dot(v);
        v.normalize();
        y.head<3>() = p;
        y.segment<3>(3) = v;
    };
    OdeStats stats;
    auto dense = integrate_span(rhs, 0.0, y0, ta, tb, opt, project, &stats);
    return std::make_shared<Trajectory>(g, lam, v0, ta, tb, opt, std::move(dense), stats);
}

/// Coefficients prescribed as functions of time, with no geometry attached.
class SyntheticPath final : public CoefficientPath {
public:
    using Fn = std::function<double(double)>;

    /// kappa(t) with optional V lambda (t) and its time derivative; the damping factor
    /// is computed by adaptive Gauss-Kronrod quadrature unless `damping` is supplied.
    SyntheticPath(Fn kappa, Fn vlam = {}, Fn vlam_dot = {}, Fn damping = {},
                  double t_lo = -std::numeric_limits<double>::infinity(),
                  double t_hi = std::numeric_limits<double>::infinity())
        : kappa_(std::move(kappa)), vlam_(std::move(vlam)), vlam_dot_(std::move(vlam_dot)),
          damping_(std::move(damping)), lo_(t_lo), hi_(t_hi) {
        if (!kappa_) throw DomainError("synthetic path needs kappa(t)");
        if (!(lo_ <= 0 && hi_ >= 0)) throw DomainError("synthetic span must contain 0");
    }

    /// kappa_tilde and V lambda constant.
    static std::shared_ptr<SyntheticPath> constant(double kappa, double vlam = 0.0) {
        return std::make_shared<SyntheticPath>([kappa](double) { return kappa; },
                                               [vlam](double) { return vlam; }, [](double) { return 0.0; },
                                               [vlam](double t) { return std::exp(-0.5 * vlam * t); });
    }

    double t_min() const override { return lo_; }
    double t_max() const override { return hi_; }

    Coefficients at(double t) const override {
        if (!covers(t, t)) throw DomainError("time outside the synthetic span");
        Coefficients c;
        c.kappa_tilde = kappa_(t);
        c.vlam = vlam_ ? vlam_(t) : 0.0;
        c.fvlam = vlam_dot_ ? vlam_dot_(t) : 0.0;
        c.kk = c.kappa_tilde + 0.5 * c.fvlam + 0.25 * c.vlam * c.vlam;
        return c;
    }

    double damping(double t) const override {
        if (damping_) return damping_(t);
        if (!vlam_ || t == 0.0) return 1.0;
        const double integral =
            boost::math::quadrature::gauss_kronrod<double, 61>::integrate(vlam_, 0.0, t, 15, 1e-14);
        return std::exp(-0.5 * integral);
    }

private:
    Fn kappa_, vlam_, vlam_dot_, damping_;
    double lo_, hi_;
};

/// kappa_tilde from tabulated (t, kappa) samples, modified Akima interpolation, V lambda = 0.
class TabulatedPath final : public CoefficientPath {
public:
    TabulatedPath(std::vector<double> t, std::vector<double> kappa) {
        if (t.size() != kappa.size() || t.size() < 4) throw DomainError("tabulated path needs >= 4 samples");
        for (std::size_t i = 1; i < t.size(); ++i)
            if (!(t[i] > t[i - 1])) throw DomainError("tabulated times must be strictly increasing");
        if (!(t.front() <= 0 && t.back() >= 0)) throw DomainError("tabulated span must contain 0");
        lo_ = t.front();
        hi_ = t.back();
        spline_ = std::make_shared<Spline>(std::move(t), std::move(kappa));
    }

    double t_min() const override { return lo_; }
    double t_max() const override { return hi_; }
    Coefficients at(double t) const override {
        if (!covers(t, t)) throw DomainError("time outside the tabulated span");
        Coefficients c;
        c.kappa_tilde = (*spline_)(std::clamp(t, lo_, hi_));
        c.kk = c.kappa_tilde;
        return c;
    }
    double damping(double) const override { return 1.0; }

private:
    using Spline = boost::math::interpolators::makima<std::vector<double>>;
    std::shared_ptr<Spline> spline_;
    double lo_ = 0, hi_ = 0;
};

/// max over a uniform grid on [0, T] of dist(phi^{lambda_F}_t(flip v), flip(phi^lambda_{-t} v)),
/// where lambda_F is the supplied comparison generator.
inline double conjugacy_residual(const Metric& g, const GeneratorPtr& lam, const GeneratorPtr& lam_f,
                                 const UnitTangent& v, double T, std::size_t samples = 200,
                                 const OdeOptions& opt = {1e-11, 1e-13}) {
    if (!(T > 0)) throw DomainError("conjugacy residual needs T > 0");
    const auto fw = integrate_flow(g, lam_f, flip(v), 0.0, T, opt);
    const auto bw = integrate_flow(g, lam, v, -T, 0.0, opt);
    double r = 0;
    for (std::size_t i = 0; i <= samples; ++i) {
        const double t = T * static_cast<double>(i) / static_cast<double>(samples);
        r = std::max(r, state_distance(g, fw->state(t), flip(bw->state(-t))));
    }
    return r;
}

/// Residual of the mirror conjugacy F o phi^lambda_{-t} o F = phi^{lambda^F}_t.
inline double mirror_conjugacy_residual(const Metric& g, const GeneratorPtr& lam, const UnitTangent& v, double T,
                                        std::size_t samples = 200) {
    return conjugacy_residual(g, lam, mirror_lambda(lam), v, T, samples);
}

/// Direct reversibility test: F o phi_{-t} o F against phi_t for the same lambda.
inline double reversibility_residual(const Metric& g, const GeneratorPtr& lam, const UnitTangent& v, double T,
                                     std::size_t samples = 200) {
    return conjugacy_residual(g, lam, lam, v, T, samples);
}

} // namespace thermoflow
