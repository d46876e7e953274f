#pragma once

// Jacobi equation y'' + (V lambda) y' + KK y = 0 and its damped form
// z'' + kappa_tilde z = 0 (y = m z) along coefficient paths; conjugate points
// and the finite-difference differential of the thermostat exponential map.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "thermoflow/errors.hpp"
#include "thermoflow/flow.hpp"
#include "thermoflow/ode.hpp"

namespace thermoflow {

/// Tolerances for the linear second-order solves.
inline OdeOptions linear_ode_options() {
    OdeOptions o;
    o.rtol = 1e-11;
    o.atol = 1e-13;
    return o;
}

inline double damping_factor(const CoefficientPath& path, double t) { return path.damping(t); }

/// Solution of a linear second-order equation on [ta, tb], initial data posed at t0.
class SecondOrderSolution {
public:
    SecondOrderSolution(PathPtr path, double t0, double ta, double tb, DenseOutput<Eigen::VectorXd> dense)
        : path_(std::move(path)), t0_(t0), ta_(ta), tb_(tb), dense_(std::move(dense)) {}

    double t0() const { return t0_; }
    double t_min() const { return ta_; }
    double t_max() const { return tb_; }
    const CoefficientPath& path() const { return *path_; }
    const PathPtr& path_ptr() const { return path_; }
    std::vector<double> grid() const { return dense_.grid(); }
    const DenseOutput<Eigen::VectorXd>& dense() const { return dense_; }

protected:
    Eigen::VectorXd eval(double t) const {
        const double slack = 1e-12 * std::max({1.0, std::abs(ta_), std::abs(tb_)});
        if (t < ta_ - slack || t > tb_ + slack) throw DomainError("time outside the solution span");
        return dense_(t);
    }

    PathPtr path_;
    double t0_, ta_, tb_;
    DenseOutput<Eigen::VectorXd> dense_;
};

/// z'' + kappa_tilde z = 0.
class DampedSolution final : public SecondOrderSolution {
public:
    using SecondOrderSolution::SecondOrderSolution;
    double z(double t) const { return eval(t)[0]; }
    double dz(double t) const { return eval(t)[1]; }
    /// y = m z.
    double y(double t) const { return path_->damping(t) * z(t); }
    /// y' = m (z' - (V lambda) z / 2).
    double dy(double t) const {
        const auto s = eval(t);
        return path_->damping(t) * (s[1] - 0.5 * path_->at(t).vlam * s[0]);
    }
};

/// y'' + (V lambda) y' + KK y = 0.
class JacobiSolution final : public SecondOrderSolution {
public:
    using SecondOrderSolution::SecondOrderSolution;
    double y(double t) const { return eval(t)[0]; }
    double dy(double t) const { return eval(t)[1]; }
};

inline DampedSolution damped_solve(const PathPtr& path, double z0, double dz0, double ta, double tb,
                                   double t0 = 0.0, const OdeOptions& opt = linear_ode_options()) {
    if (!path) throw DomainError("coefficient path is empty");
    if (!path->covers(ta, tb)) throw DomainError("solve span exceeds the coefficient path");
    auto rhs = [&path](double t, const Eigen::VectorXd& s) {
        Eigen::VectorXd d(2);
        d << s[1], -path->kappa_tilde(t) * s[0];
        return d;
    };
    Eigen::VectorXd s0(2);
    s0 << z0, dz0;
    auto dense = integrate_span(rhs, t0, s0, ta, tb, opt, [](double, Eigen::VectorXd&) {});
    return DampedSolution(path, t0, ta, tb, std::move(dense));
}

inline JacobiSolution jacobi_solve(const PathPtr& path, double y0, double dy0, double ta, double tb,
                                   double t0 = 0.0, const OdeOptions& opt = linear_ode_options()) {
    if (!path) throw DomainError("coefficient path is empty");
    if (!path->covers(ta, tb)) throw DomainError("solve span exceeds the coefficient path");
    auto rhs = [&path](double t, const Eigen::VectorXd& s) {
        const auto c = path->at(t);
        Eigen::VectorXd d(2);
        d << s[1], -c.vlam * s[1] - c.kk * s[0];
        return d;
    };
    Eigen::VectorXd s0(2);
    s0 << y0, dy0;
    auto dense = integrate_span(rhs, t0, s0, ta, tb, opt, [](double, Eigen::VectorXd&) {});
    return JacobiSolution(path, t0, ta, tb, std::move(dense));
}

/// Damped initial data equivalent to Jacobi data (y0, dy0) at time t0.
inline std::pair<double, double> damped_initial_data(const CoefficientPath& path, double y0, double dy0,
                                                     double t0 = 0.0) {
    const double m = path.damping(t0);
    return {y0 / m, (dy0 + 0.5 * y0 * path.at(t0).vlam) / m};
}

struct ConjugateReport {
    std::optional<double> first_conjugate_time;
    std::vector<double> zeros;         // all sign changes of z found in the scan
    double tolerance = 1e-10;          // bisection tolerance in t
    double start = 0;                  // t0
    double horizon = 0;                // signed scan length
    double reached = 0;                // last time actually scanned
    std::string error;                 // integration failure message, empty on success
};

namespace detail {

/// Sign changes of z on a dense solution, scanning away from t0; each refined by
/// bisection to tol and one Newton step.
inline std::vector<double> sign_changes(const DampedSolution& s, double t0, double t1, double tol,
                                        std::size_t max_zeros = 64) {
    std::vector<double> times;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    std::vector<double> nodes;
    for (double t : s.grid()) {
        if (dir * (t - t0) > 0 && dir * (t1 - t) >= 0) nodes.push_back(t);
    }
    if (dir < 0) std::reverse(nodes.begin(), nodes.end());
    // sub-sample every step so that two zeros inside one step are not missed
    std::vector<double> ts;
    double prev = t0;
    for (double t : nodes) {
        for (int k = 1; k <= 4; ++k) ts.push_back(prev + (t - prev) * k / 4.0);
        prev = t;
    }
    if (ts.empty()) return times;
    // skip the trivial zero at t0: start after the first sample where |z| is clearly nonzero
    double tl = ts.front();
    double zl = s.z(tl);
    for (std::size_t i = 1; i < ts.size() && times.size() < max_zeros; ++i) {
        const double tr = ts[i];
        const double zr = s.z(tr);
        if (zl == 0.0) {
            times.push_back(tl);
        } else if ((zl < 0) != (zr < 0) && zr != 0.0) {
            double a = tl, b = tr, za = zl;
            while (std::abs(b - a) > tol) {
                const double mid = 0.5 * (a + b);
                const double zm = s.z(mid);
                if ((zm < 0) == (za < 0)) {
                    a = mid;
                    za = zm;
                } else {
                    b = mid;
                }
            }
            double root = 0.5 * (a + b);
            const double dz = s.dz(root);
            if (dz != 0.0) {
                const double polished = root - s.z(root) / dz;
                if (std::abs(polished - root) <= std::abs(b - a)) root = polished;
            }
            times.push_back(root);
        }
        tl = tr;
        zl = zr;
    }
    return times;
}

} // namespace detail

/// Integrate z(t0) = 0, z'(t0) = 1 over [t0, t0 + T] (T may be negative) and report zeros.
inline ConjugateReport conjugate_scan(const PathPtr& path, double T, double t0 = 0.0,
                                      const OdeOptions& opt = linear_ode_options()) {
    if (T == 0.0 || !std::isfinite(T)) throw DomainError("conjugate scan needs a nonzero horizon");
    ConjugateReport rep;
    rep.start = t0;
    rep.horizon = T;
    const double t1 = t0 + T;
    try {
        const auto sol = damped_solve(path, 0.0, 1.0, std::min(t0, t1), std::max(t0, t1), t0, opt);
        rep.zeros = detail::sign_changes(sol, t0, t1, rep.tolerance);
        rep.reached = t1;
    } catch (const IntegrationError& e) {
        rep.error = e.what();
        rep.reached = e.last_good_time();
        return rep;
    }
    if (!rep.zeros.empty()) rep.first_conjugate_time = std::abs(rep.zeros.front() - t0);
    return rep;
}

/// Conjugate scan along the orbit of v over [0, T].
inline ConjugateReport conjugate_scan(const Metric& g, const GeneratorPtr& lam, const UnitTangent& v, double T,
                                      const OdeOptions& flow_opt = {}) {
    if (!(T > 0)) throw DomainError("conjugate scan needs T > 0");
    ConjugateReport rep;
    rep.horizon = T;
    TrajectoryPtr traj;
    try {
        traj = integrate_flow(g, lam, v, 0.0, T, flow_opt);
    } catch (const IntegrationError& e) {
        rep.error = e.what();
        rep.reached = e.last_good_time();
        return rep;
    }
    return conjugate_scan(traj, T);
}

/// Orthonormal basis of the tangent plane at a sphere point.
inline std::pair<Eigen::Vector3d, Eigen::Vector3d> sphere_tangent_basis(const Eigen::Vector3d& p) {
    const Eigen::Vector3d n = p.normalized();
    const Eigen::Vector3d a = std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
    const Eigen::Vector3d e1 = (a - n * n.dot(a)).normalized();
    return {e1, n.cross(e1)};
}

inline OdeOptions exp_map_options() {
    OdeOptions o;
    o.rtol = 1e-12;
    o.atol = 1e-14;
    return o;
}

/// Unit tangent at x in polar direction alpha (torus: chart angle; sphere: angle in the tangent basis).
inline UnitTangent polar_direction(const Metric& g, const ChartPoint& x, double alpha) {
    if (const auto* t = std::get_if<TorusPoint>(&x)) {
        if (!g.is_torus()) throw DomainError("torus point given for a sphere metric");
        return TorusTangent{t->q1, t->q2, alpha};
    }
    if (g.is_torus()) throw DomainError("sphere point given for a torus metric");
    Eigen::Vector3d p = std::get<Eigen::Vector3d>(x);
    p *= g.radius() / p.norm();
    const auto [e1, e2] = sphere_tangent_basis(p);
    return SphereTangent{p, std::cos(alpha) * e1 + std::sin(alpha) * e2};
}

/// Base point of phi_r(x, alpha) in unreduced coordinates (torus (q1, q2), sphere p).
inline Eigen::VectorXd exp_polar(const Metric& g, const GeneratorPtr& lam, const ChartPoint& x, double r,
                                 double alpha, const OdeOptions& opt = exp_map_options()) {
    const auto v = polar_direction(g, x, alpha);
    const auto traj = integrate_flow(g, lam, v, std::min(0.0, r), std::max(0.0, r), opt);
    const Eigen::VectorXd c = traj->coordinates(r);
    return g.is_torus() ? Eigen::VectorXd(c.head(2)) : Eigen::VectorXd(c.head(3));
}

/// exp^lambda_x(w) with w in chart components (torus: (w1, w2); sphere: ambient 3-vector).
inline ChartPoint exp_map(const Metric& g, const GeneratorPtr& lam, const ChartPoint& x, const Eigen::VectorXd& w) {
    if (g.is_torus()) {
        if (w.size() != 2) throw DomainError("torus tangent vector needs two components");
        const auto& p = std::get<TorusPoint>(x);
        const double len = std::exp(g.u(p.q1, p.q2).v) * w.norm();
        if (!(len > 0)) throw DomainError("exp map needs a nonzero tangent vector");
        const Eigen::VectorXd q = exp_polar(g, lam, x, len, std::atan2(w[1], w[0]));
        return TorusPoint{wrap_periodic(q[0], g.period1()), wrap_periodic(q[1], g.period2())};
    }
    if (w.size() != 3) throw DomainError("sphere tangent vector needs three components");
    Eigen::Vector3d p = std::get<Eigen::Vector3d>(x);
    p *= g.radius() / p.norm();
    const Eigen::Vector3d wt = Eigen::Vector3d(w) - p.normalized() * p.normalized().dot(Eigen::Vector3d(w));
    const double len = wt.norm();
    if (!(len > 0)) throw DomainError("exp map needs a nonzero tangent vector");
    const auto [e1, e2] = sphere_tangent_basis(p);
    const Eigen::VectorXd q = exp_polar(g, lam, ChartPoint{p}, len, std::atan2(wt.dot(e2), wt.dot(e1)));
    return Eigen::Vector3d(q);
}

/// Central-difference Jacobian determinant of (r, alpha) -> exp(r, alpha);
/// step h_rel * r in r and h_rel in alpha.
inline double exp_jacobian_det(const Metric& g, const GeneratorPtr& lam, const ChartPoint& x, double r, double alpha,
                               double h_rel = 1e-5) {
    if (!(h_rel > 0) || h_rel > 1e-3) throw DomainError("exp-map difference step must lie in (0, 1e-3]");
    if (!(r > 0)) throw DomainError("exp-map determinant needs r > 0");
    const double hr = h_rel * r, ha = h_rel;
    const Eigen::VectorXd dr = (exp_polar(g, lam, x, r + hr, alpha) - exp_polar(g, lam, x, r - hr, alpha)) / (2 * hr);
    const Eigen::VectorXd da = (exp_polar(g, lam, x, r, alpha + ha) - exp_polar(g, lam, x, r, alpha - ha)) / (2 * ha);
    if (g.is_torus()) return dr[0] * da[1] - dr[1] * da[0];
    const Eigen::Vector3d n = exp_polar(g, lam, x, r, alpha).normalized();
    return Eigen::Vector3d(dr).cross(Eigen::Vector3d(da)).dot(n);
}

struct ExpDeterminantReport {
    std::optional<double> sign_change_time;  // midpoint of the final bracket
    double bracket_lo = 0, bracket_hi = 0;
    bool accuracy_warning = false;            // determinant changes noticeably with the step
};

/// Scan det d exp along t v (t in [t_start, T]) for a sign change and bisect it to `tol`.
inline ExpDeterminantReport exp_det_conjugate_time(const Metric& g, const GeneratorPtr& lam, const ChartPoint& x,
                                                   double alpha, double T, double dt = 0.05, double h_rel = 1e-5,
                                                   double tol = 1e-7, double t_start = 1e-3) {
    ExpDeterminantReport rep;
    auto det = [&](double r) { return exp_jacobian_det(g, lam, x, r, alpha, h_rel); };
    {
        // step sensitivity probe at the first sample
        const double a = det(std::max(t_start, dt)), b = exp_jacobian_det(g, lam, x, std::max(t_start, dt), alpha, 2 * h_rel);
        rep.accuracy_warning = std::abs(a - b) > 1e-3 * std::max(std::abs(a), 1e-12);
    }
    double lo = t_start, dlo = det(lo);
    for (double hi = t_start + dt; lo < T; hi = std::min(T, hi + dt)) {
        const double dhi = det(hi);
        if ((dlo < 0) != (dhi < 0)) {
            double a = lo, b = hi, da = dlo;
            while (b - a > tol) {
                const double mid = 0.5 * (a + b);
                const double dm = det(mid);
                if ((dm < 0) == (da < 0)) {
                    a = mid;
                    da = dm;
                } else {
                    b = mid;
                }
            }
            rep.bracket_lo = a;
            rep.bracket_hi = b;
            rep.sign_change_time = 0.5 * (a + b);
            return rep;
        }
        lo = hi;
        dlo = dhi;
        if (hi >= T) break;
    }
    return rep;
}

} // namespace thermoflow
