#pragma once

// Metric backends (flat torus, conformal torus, round sphere), Gaussian
// curvature and the moving frame {X, H, V} on the unit tangent bundle.
//
// Conventions: J rotates tangent vectors by +pi/2 counterclockwise in the
// chart, theta is measured from d/dq1, H = [V, X].  Torus states are
// (q1, q2, theta); sphere states are embedded (p, v) in R^6.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <variant>

#include <Eigen/Dense>

#include "thermoflow/errors.hpp"
#include "thermoflow/spectral.hpp"

namespace thermoflow {

inline constexpr double two_pi = 2 * std::numbers::pi;

/// Reduce x into [0, period).
inline double wrap_periodic(double x, double period) {
    double r = x - period * std::floor(x / period);
    if (r >= period || r < 0) r = 0;
    return r;
}

/// Signed representative of x in [-period/2, period/2).
inline double wrap_centered(double x, double period) {
    return wrap_periodic(x + 0.5 * period, period) - 0.5 * period;
}

/// Conformal exponent u of g = exp(2u)(dq1^2 + dq2^2). Exactly one derivative
/// source: a closed-form evaluator or a real Fourier series (possibly built from a grid).
class ConformalFactor {
public:
    using Evaluator = std::function<Jet2(double, double)>;

    static ConformalFactor closed_form(Evaluator fn) {
        if (!fn) throw DomainError("conformal evaluator is empty");
        ConformalFactor c;
        c.eval_ = std::move(fn);
        return c;
    }

    static ConformalFactor from_series(FourierSeries2D s) {
        ConformalFactor c;
        c.series_ = std::make_shared<FourierSeries2D>(std::move(s));
        return c;
    }

    /// Grid samples differentiated spectrally.
    static ConformalFactor from_grid(const PeriodicGrid& g) { return from_series(series_from_grid(g)); }

    Jet2 operator()(double q1, double q2) const {
        if (series_) return real_part(series_->jet(q1, q2));
        Jet2 j = eval_(q1, q2);
        if (!std::isfinite(j.v) || !std::isfinite(j.d11) || !std::isfinite(j.d22) ||
            !std::isfinite(j.d1) || !std::isfinite(j.d2))
            throw DomainError("conformal factor evaluation is not finite");
        return j;
    }

    bool spectral() const { return static_cast<bool>(series_); }
    const FourierSeries2D* series() const { return series_.get(); }

private:
    ConformalFactor() = default;
    Evaluator eval_;
    std::shared_ptr<const FourierSeries2D> series_;
};

enum class MetricKind { FlatTorus, ConformalTorus, RoundSphere };

class Metric {
public:
    static Metric flat_torus(double L1, double L2) {
        check_periods(L1, L2);
        Metric m;
        m.kind_ = MetricKind::FlatTorus;
        m.L1_ = L1;
        m.L2_ = L2;
        return m;
    }

    static Metric conformal_torus(double L1, double L2, ConformalFactor u) {
        check_periods(L1, L2);
        if (const auto* s = u.series()) {
            if (std::abs(s->period1() - L1) > 1e-14 * L1 || std::abs(s->period2() - L2) > 1e-14 * L2)
                throw DomainError("conformal series periods differ from the torus periods");
        }
        Metric m;
        m.kind_ = MetricKind::ConformalTorus;
        m.L1_ = L1;
        m.L2_ = L2;
        m.u_ = std::make_shared<ConformalFactor>(std::move(u));
        return m;
    }

    static Metric round_sphere(double R) {
        if (!(R > 0) || !std::isfinite(R)) throw DomainError("sphere radius must be positive");
        Metric m;
        m.kind_ = MetricKind::RoundSphere;
        m.R_ = R;
        return m;
    }

    MetricKind kind() const { return kind_; }
    bool is_torus() const { return kind_ != MetricKind::RoundSphere; }
    double period1() const { return L1_; }
    double period2() const { return L2_; }
    double radius() const { return R_; }
    int state_dim() const { return is_torus() ? 3 : 6; }
    int euler_characteristic() const { return is_torus() ? 0 : 2; }
    const ConformalFactor* conformal_factor() const { return u_.get(); }

    /// Jet of u (zero for the flat torus).
    Jet2 u(double q1, double q2) const {
        if (kind_ == MetricKind::ConformalTorus) return (*u_)(q1, q2);
        return {};
    }

private:
    Metric() = default;
    static void check_periods(double L1, double L2) {
        if (!(L1 > 0) || !(L2 > 0) || !std::isfinite(L1) || !std::isfinite(L2))
            throw DomainError("torus periods must be positive");
    }

    MetricKind kind_ = MetricKind::FlatTorus;
    double L1_ = 1, L2_ = 1, R_ = 1;
    std::shared_ptr<const ConformalFactor> u_;
};

struct TorusPoint {
    double q1 = 0, q2 = 0;
};
using ChartPoint = std::variant<TorusPoint, Eigen::Vector3d>;

struct TorusTangent {
    double q1 = 0, q2 = 0, theta = 0;
};
struct SphereTangent {
    Eigen::Vector3d p = Eigen::Vector3d::UnitZ();
    Eigen::Vector3d v = Eigen::Vector3d::UnitX();
};
using UnitTangent = std::variant<TorusTangent, SphereTangent>;

inline bool is_torus_tangent(const UnitTangent& v) { return std::holds_alternative<TorusTangent>(v); }

inline void check_backend(const Metric& g, const UnitTangent& v) {
    if (g.is_torus() != is_torus_tangent(v)) throw DomainError("unit tangent does not match the metric backend");
}

/// Flat coordinate vector of a state: (q1, q2, theta) or (p, v).
inline Eigen::VectorXd coords(const UnitTangent& v) {
    if (const auto* t = std::get_if<TorusTangent>(&v)) return Eigen::Vector3d(t->q1, t->q2, t->theta);
    const auto& s = std::get<SphereTangent>(v);
    Eigen::VectorXd x(6);
    x << s.p, s.v;
    return x;
}

/// Inverse of coords, without normalization.
inline UnitTangent tangent_from_coords(const Metric& g, const Eigen::VectorXd& x) {
    if (g.is_torus()) return TorusTangent{x[0], x[1], x[2]};
    return SphereTangent{x.head<3>(), x.segment<3>(3)};
}

/// Reduce torus states to the fundamental domain and theta to [0, 2 pi); project
/// sphere states to |p| = R, |v| = 1, p.v = 0.
inline UnitTangent normalize(const Metric& g, const UnitTangent& v) {
    check_backend(g, v);
    if (const auto* t = std::get_if<TorusTangent>(&v))
        return TorusTangent{wrap_periodic(t->q1, g.period1()), wrap_periodic(t->q2, g.period2()),
                            wrap_periodic(t->theta, two_pi)};
    const auto& s = std::get<SphereTangent>(v);
    const double np = s.p.norm();
    if (!(np > 0)) throw DomainError("sphere point at the origin");
    SphereTangent out;
    out.p = s.p * (g.radius() / np);
    const Eigen::Vector3d n = out.p / g.radius();
    Eigen::Vector3d w = s.v - n * n.dot(s.v);
    const double nw = w.norm();
    if (!(nw > 0)) throw DomainError("sphere tangent is normal to the surface");
    out.v = w / nw;
    return out;
}

/// Throws unless v is a valid state for g (sphere: |p| = R, |v| = 1, p.v = 0 within 1e-12 relative).
inline void validate(const Metric& g, const UnitTangent& v) {
    check_backend(g, v);
    if (const auto* t = std::get_if<TorusTangent>(&v)) {
        if (!std::isfinite(t->q1) || !std::isfinite(t->q2) || !std::isfinite(t->theta))
            throw DomainError("non-finite torus state");
        return;
    }
    const auto& s = std::get<SphereTangent>(v);
    const double R = g.radius();
    if (std::abs(s.p.norm() - R) > 1e-12 * R || std::abs(s.v.norm() - 1) > 1e-12 ||
        std::abs(s.p.dot(s.v)) > 1e-12 * R)
        throw DomainError("sphere state is not a unit tangent vector");
}

/// Unit tangent at a chart point in chart direction theta (torus) or along a tangent vector (sphere).
inline TorusTangent torus_tangent(double q1, double q2, double theta) { return {q1, q2, theta}; }

inline SphereTangent sphere_tangent(const Metric& g, const Eigen::Vector3d& p, const Eigen::Vector3d& dir) {
    return std::get<SphereTangent>(normalize(g, SphereTangent{p, dir}));
}

inline double gaussian_curvature(const Metric& g, double q1, double q2) {
    switch (g.kind()) {
    case MetricKind::FlatTorus:
        return 0.0;
    case MetricKind::ConformalTorus: {
        const Jet2 u = g.u(q1, q2);
        return -std::exp(-2 * u.v) * (u.d11 + u.d22);
    }
    case MetricKind::RoundSphere:
        return 1.0 / (g.radius() * g.radius());
    }
    return 0.0;
}

inline double gaussian_curvature(const Metric& g, const ChartPoint& p) {
    if (const auto* t = std::get_if<TorusPoint>(&p)) {
        if (!g.is_torus()) throw DomainError("torus point given for a sphere metric");
        return gaussian_curvature(g, t->q1, t->q2);
    }
    if (g.is_torus()) throw DomainError("sphere point given for a torus metric");
    return 1.0 / (g.radius() * g.radius());
}

/// Gaussian curvature at a raw state vector.
inline double gaussian_curvature_at(const Metric& g, const Eigen::VectorXd& x) {
    if (g.is_torus()) return gaussian_curvature(g, x[0], x[1]);
    return 1.0 / (g.radius() * g.radius());
}

struct Frame {
    Eigen::VectorXd X, H, V;
};

/// Frame components at a raw state vector; the sphere formulas extend off SM through n = p/|p|.
inline Frame frame_at(const Metric& g, const Eigen::VectorXd& x) {
    Frame f;
    if (g.is_torus()) {
        const Jet2 u = g.u(x[0], x[1]);
        const double s = std::exp(-u.v), c = std::cos(x[2]), sn = std::sin(x[2]);
        f.X = Eigen::Vector3d(s * c, s * sn, s * (-u.d1 * sn + u.d2 * c));
        f.H = Eigen::Vector3d(-s * sn, s * c, s * (-u.d1 * c - u.d2 * sn));
        f.V = Eigen::Vector3d(0, 0, 1);
        return f;
    }
    const Eigen::Vector3d p = x.head<3>(), v = x.segment<3>(3);
    const Eigen::Vector3d n = p / p.norm();
    const Eigen::Vector3d jv = n.cross(v);
    f.X.resize(6);
    f.H.resize(6);
    f.V.resize(6);
    f.X << v, -v.squaredNorm() * p / p.squaredNorm();
    f.H << jv, Eigen::Vector3d::Zero();
    f.V << Eigen::Vector3d::Zero(), jv;
    return f;
}

inline Frame frame_vectors(const Metric& g, const UnitTangent& v) {
    check_backend(g, v);
    return frame_at(g, coords(v));
}

struct StructureResiduals {
    double vx_minus_h = 0;  // |[V,X] - H|
    double xh_minus_kv = 0; // |[X,H] - K V|
    double vh_plus_x = 0;   // |[V,H] + X|
    double max() const { return std::max({vx_minus_h, xh_minus_kv, vh_plus_x}); }
};

namespace detail {

/// Sasaki norm of a vector given in state coordinates: frame coefficients from a
/// least-squares solve, plus the Euclidean size of any part off the frame span.
inline double sasaki_norm(const Frame& f, const Eigen::VectorXd& r) {
    Eigen::MatrixXd B(r.size(), 3);
    B.col(0) = f.X;
    B.col(1) = f.H;
    B.col(2) = f.V;
    const Eigen::Vector3d c = B.colPivHouseholderQr().solve(r);
    const double off = (B * c - r).norm();
    return std::sqrt(c.squaredNorm() + off * off);
}

} // namespace detail

/// Central-difference Lie brackets [A,B] = D_A B - D_B A of the frame fields.
inline StructureResiduals structure_residuals(const Metric& g, const UnitTangent& v, double h) {
    if (!(h > 0) || h > 1e-2) throw DomainError("structure residual step must lie in (0, 1e-2]");
    check_backend(g, v);
    const Eigen::VectorXd x = coords(v);
    using Field = Eigen::VectorXd (*)(const Frame&);
    const Field fX = [](const Frame& f) { return f.X; };
    const Field fH = [](const Frame& f) { return f.H; };
    const Field fV = [](const Frame& f) { return f.V; };
    auto dir = [&](Field along, Field of) {
        const Eigen::VectorXd a = along(frame_at(g, x));
        return Eigen::VectorXd((of(frame_at(g, x + h * a)) - of(frame_at(g, x - h * a))) / (2 * h));
    };
    auto bracket = [&](Field A, Field B) { return Eigen::VectorXd(dir(A, B) - dir(B, A)); };
    const Frame f = frame_at(g, x);
    const double K = gaussian_curvature_at(g, x);
    StructureResiduals r;
    r.vx_minus_h = detail::sasaki_norm(f, bracket(fV, fX) - f.H);
    r.xh_minus_kv = detail::sasaki_norm(f, bracket(fX, fH) - K * f.V);
    r.vh_plus_x = detail::sasaki_norm(f, bracket(fV, fH) + f.X);
    return r;
}

struct ConvergenceCheck {
    std::array<StructureResiduals, 3> residuals;  // at h = 1e-3, 5e-4, 2.5e-4
    std::array<double, 3> min_ratio{};            // per residual, min over the two halvings
    bool second_order = false;                    // every ratio near 4 or below the noise floor
};

/// Richardson check that the residuals decay at rate O(h^2).
inline ConvergenceCheck structure_convergence(const Metric& g, const UnitTangent& v, double noise_floor = 1e-12) {
    ConvergenceCheck c;
    const double hs[3] = {1e-3, 5e-4, 2.5e-4};
    for (int i = 0; i < 3; ++i) c.residuals[i] = structure_residuals(g, v, hs[i]);
    auto pick = [](const StructureResiduals& r, int k) {
        return k == 0 ? r.vx_minus_h : (k == 1 ? r.xh_minus_kv : r.vh_plus_x);
    };
    c.second_order = true;
    for (int k = 0; k < 3; ++k) {
        double mr = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 2; ++i) {
            const double a = pick(c.residuals[i], k), b = pick(c.residuals[i + 1], k);
            // both halvings must stay above the floor for a meaningful ratio
            if (b <= noise_floor * 10 || a <= noise_floor * 10) continue;
            mr = std::min(mr, a / b);
            if (a / b < 3.0 || a / b > 5.0) c.second_order = false;
        }
        c.min_ratio[k] = mr;
    }
    return c;
}

/// Area of a torus by trapezoidal quadrature of exp(2u) on an n x n grid.
inline double torus_area(const Metric& g, std::size_t n = 64) {
    if (!g.is_torus()) throw DomainError("torus area requested for a sphere");
    const auto grid = sample_grid(n, n, g.period1(), g.period2(),
                                  [&](double a, double b) { return std::exp(2 * g.u(a, b).v); });
    return grid_mean(grid) * g.period1() * g.period2();
}

/// Integral of K dA over the torus (spectral trapezoid); zero by Gauss-Bonnet.
inline double gauss_bonnet_integral(const Metric& g, std::size_t n = 64) {
    if (!g.is_torus()) throw DomainError("Gauss-Bonnet quadrature is implemented for tori");
    const auto grid = sample_grid(n, n, g.period1(), g.period2(), [&](double a, double b) {
        return gaussian_curvature(g, a, b) * std::exp(2 * g.u(a, b).v);
    });
    return grid_mean(grid) * g.period1() * g.period2();
}

/// Distance between states, periodic in (q1, q2, theta) on the torus, Euclidean in (p, v) on the sphere.
inline double state_distance(const Metric& g, const UnitTangent& a, const UnitTangent& b) {
    check_backend(g, a);
    check_backend(g, b);
    if (g.is_torus()) {
        const auto& x = std::get<TorusTangent>(a);
        const auto& y = std::get<TorusTangent>(b);
        const double d1 = wrap_centered(x.q1 - y.q1, g.period1());
        const double d2 = wrap_centered(x.q2 - y.q2, g.period2());
        const double d3 = wrap_centered(x.theta - y.theta, two_pi);
        return std::sqrt(d1 * d1 + d2 * d2 + d3 * d3);
    }
    return (coords(a) - coords(b)).norm();
}

/// theta -> theta + pi (torus), v -> -v (sphere).
inline UnitTangent flip(const UnitTangent& v) {
    if (const auto* t = std::get_if<TorusTangent>(&v))
        return TorusTangent{t->q1, t->q2, wrap_periodic(t->theta + std::numbers::pi, two_pi)};
    const auto& s = std::get<SphereTangent>(v);
    return SphereTangent{s.p, -s.v};
}

} // namespace thermoflow
