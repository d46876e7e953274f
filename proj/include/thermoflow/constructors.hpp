#pragma once

// Named systems: the Gaussian thermostat with KK = 2 pi chi = 0 on the torus,
// the flat magnetic counterexample with its closed-form oracles, and the
// flow-box bump perturbation used in the closed-orbit index experiment.

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "thermoflow/errors.hpp"
#include "thermoflow/flow.hpp"
#include "thermoflow/generator.hpp"
#include "thermoflow/green.hpp"
#include "thermoflow/index_form.hpp"
#include "thermoflow/jacobi.hpp"
#include "thermoflow/spectral.hpp"

namespace thermoflow {

// ---------------------------------------------------------------- Gaussian

struct GaussianThermostat {
    std::shared_ptr<FourierGenerator> lambda;
    FourierSeries2D potential;       // G with Lap G = exp(2u)(K - 2 pi chi / Area), flat Laplacian
    double area = 0;
    double rhs_mean = 0;             // solvability defect (Gauss-Bonnet)
    double hodge_mode_residual = 0;  // max_k | -|k|^2 G_k - rhs_k |
    double hodge_grid_residual = 0;  // max over the grid of | Lap G - rhs |
    double max_abs_KK = 0;           // over the diagnostic grid
    ReversibilityReport reversibility;
};

/// lambda(x, v) = g(E, Jv) with E = grad_g G; only the k = 1 fiber mode is present.
inline GaussianThermostat gaussian_from_curvature(const Metric& g, std::size_t n = 64, std::size_t n_theta = 8) {
    if (!g.is_torus()) throw DomainError("the Gaussian construction is implemented for tori (chi = 0)");
    GaussianThermostat out;
    out.area = torus_area(g, n);
    const double target = two_pi * g.euler_characteristic() / out.area;
    const auto rhs = sample_grid(n, n, g.period1(), g.period2(), [&](double a, double b) {
        return std::exp(2 * g.u(a, b).v) * (gaussian_curvature(g, a, b) - target);
    });
    const auto sol = solve_poisson(rhs);
    out.potential = sol.potential;
    out.rhs_mean = sol.rhs_mean;
    out.hodge_mode_residual = std::max(sol.max_mode_residual, std::abs(sol.rhs_mean));
    const auto lap = sol.potential.laplacian();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.hodge_grid_residual = std::max(
                out.hodge_grid_residual, std::abs(lap(rhs.q1(i), rhs.q2(j)).real() - (rhs.at(i, j) - sol.rhs_mean)));

    auto G = std::make_shared<FourierSeries2D>(sol.potential);
    const Metric metric = g;
    // c_1 = s (G_2 + i G_1) / 2 with s = exp(-u)
    CoefficientFn c1 = [G, metric](double a, double b) {
        const Jet2 u = metric.u(a, b);
        const Jet2 p = real_part(G->jet(a, b));
        const double s = std::exp(-u.v);
        const cplx w(p.d2, p.d1), w1(p.d12, p.d11), w2(p.d22, p.d12);
        return CJet1{0.5 * s * w, 0.5 * s * (w1 - u.d1 * w), 0.5 * s * (w2 - u.d2 * w)};
    };
    out.lambda = std::make_shared<FourierGenerator>(std::vector<FourierGenerator::Mode>{{1, c1}});

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n_theta; ++k) {
                const TorusTangent v{rhs.q1(i), rhs.q2(j), two_pi * k / n_theta};
                out.max_abs_KK = std::max(out.max_abs_KK, std::abs(thermostat_curvature(g, *out.lambda, v)));
            }
    out.reversibility = reversibility_report(g, *out.lambda);
    return out;
}

// ---------------------------------------------------------------- magnetic

/// Flat torus with constant lambda_0 != 0, plus closed forms.
struct MagneticCounterexample {
    Metric metric;
    std::shared_ptr<FourierGenerator> lambda;
    double lambda0 = 1;

    double conjugate_time() const { return std::numbers::pi / std::abs(lambda0); }
    double period() const { return two_pi / std::abs(lambda0); }

    /// Orbit through v0: theta = theta0 + lambda0 t on a circle of radius 1/|lambda0| (unreduced).
    TorusTangent orbit(const TorusTangent& v0, double t) const {
        const double th = v0.theta + lambda0 * t;
        return {v0.q1 + (std::sin(th) - std::sin(v0.theta)) / lambda0,
                v0.q2 - (std::cos(th) - std::cos(v0.theta)) / lambda0, th};
    }
    /// Jacobi pair: x = x0 cos(l t) + y0 l sin(l t), y = y0 cos(l t) - x0 sin(l t) / l.
    double jacobi_x(double x0, double y0, double t) const {
        return x0 * std::cos(lambda0 * t) + y0 * lambda0 * std::sin(lambda0 * t);
    }
    double jacobi_y(double x0, double y0, double t) const {
        return y0 * std::cos(lambda0 * t) - x0 / lambda0 * std::sin(lambda0 * t);
    }
    /// Slope x/y of the invariant form lambda0 (c1 cos + c2 sin) beta + (c2 cos - c1 sin) psi.
    double section_slope(double c1, double c2, double theta) const {
        const double y = c2 * std::cos(theta) - c1 * std::sin(theta);
        if (y == 0.0) return std::numeric_limits<double>::infinity();
        return lambda0 * (c1 * std::cos(theta) + c2 * std::sin(theta)) / y;
    }
};

inline MagneticCounterexample magnetic_counterexample(double lambda0, double L1 = 1.0, double L2 = 1.0) {
    if (lambda0 == 0.0 || !std::isfinite(lambda0))
        throw DomainError("the magnetic counterexample needs lambda0 != 0");
    return {Metric::flat_torus(L1, L2), FourierGenerator::constant(lambda0), lambda0};
}

// ---------------------------------------------------------------- flow box

/// chi(s): smooth, supported in [-1, 1], equal to 1 on [-1/2, 1/2].
inline double bump(double s) {
    auto psi = [](double x) { return x > 0 ? std::exp(-1 / x) : 0.0; };
    const double a = std::abs(s);
    if (a >= 1) return 0.0;
    if (a <= 0.5) return 1.0;
    const double p = psi(1 - a), q = psi(a - 0.5);
    return p / (p + q);
}

struct TubeCoordinates {
    double x1 = 0, x2 = 0, x3 = 0;
    bool in_range = false;  // projection landed inside the core segment
};

/// sign * sqrt(eps) chi(x1 / C) chi(|(x2, x3)| / delta) in tubular coordinates
/// around the core segment {phi_t(v) : |t| <= C} of a torus system.
class FlowboxPerturbation final : public Generator {
public:
    struct Params {
        double C = 1, delta = 0.1, eps = 0.01;
        int sign = 1;
        std::size_t core_samples = 256;
    };

    FlowboxPerturbation(Metric g, GeneratorPtr base, const UnitTangent& v, Params p)
        : g_(std::move(g)), base_(std::move(base)), p_(p) {
        if (!g_.is_torus()) throw DomainError("flow-box perturbation is implemented on torus backends");
        if (!(p_.C > 0) || !(p_.delta > 0) || !(p_.eps > 0)) throw DomainError("flow-box needs C, delta, eps > 0");
        if (p_.sign != 1 && p_.sign != -1) throw DomainError("flow-box sign must be +1 or -1");
        core_ = integrate_flow(g_, base_, v, -p_.C, p_.C, {1e-12, 1e-14});
        for (std::size_t i = 0; i <= p_.core_samples; ++i) {
            const double t = -p_.C + 2 * p_.C * static_cast<double>(i) / static_cast<double>(p_.core_samples);
            ts_.push_back(t);
            xs_.push_back(core_->coordinates(t));
        }
        injectivity_bound_ = measure_injectivity();
        if (p_.delta > injectivity_bound_)
            throw DomainError("delta exceeds the tube injectivity bound " + std::to_string(injectivity_bound_));
        h_ = 1e-3 * p_.delta;
    }

    double injectivity_bound() const { return injectivity_bound_; }
    const Params& params() const { return p_; }
    const TrajectoryPtr& core() const { return core_; }

    TubeCoordinates tube_coordinates(double q1, double q2, double theta) const {
        const Eigen::Vector3d x(q1, q2, theta);
        // coarse nearest sample, then Newton on the flow-time component
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < xs_.size(); ++i) {
            const double d = wrapped(x, xs_[i]).squaredNorm();
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        TubeCoordinates tc;
        double t = ts_[best];
        Eigen::Vector3d c = Eigen::Vector3d::Zero();
        for (int it = 0; it < 30; ++it) {
            const Eigen::VectorXd xc = core_->coordinates(t);
            const Frame f = frame_at(g_, xc);
            const double lam = base_->chart_jet(xc[0], xc[1], xc[2]).value;
            Eigen::Matrix3d B;
            B.col(0) = f.X + lam * f.V;
            B.col(1) = f.H;
            B.col(2) = f.V;
            c = B.lu().solve(wrapped(x, xc));
            const double tn = std::clamp(t + c[0], -p_.C, p_.C);
            const bool done = std::abs(tn - t) < 1e-13;
            t = tn;
            if (done) break;
        }
        tc.x1 = t;
        tc.x2 = c[1];
        tc.x3 = c[2];
        tc.in_range = std::abs(c[0]) < 1e-9;
        return tc;
    }

    double phi(double q1, double q2, double theta) const {
        const auto tc = tube_coordinates(q1, q2, theta);
        if (!tc.in_range) return 0.0;
        const double rho = std::hypot(tc.x2, tc.x3);
        return p_.sign * std::sqrt(p_.eps) * bump(tc.x1 / p_.C) * bump(rho / p_.delta);
    }

    /// Coarse test: outside a 2 delta neighbourhood of the core samples phi and its stencil vanish.
    bool far_from_core(double q1, double q2, double theta) const {
        const Eigen::Vector3d x(q1, q2, theta);
        const double spacing = 2 * p_.C / static_cast<double>(p_.core_samples) * max_speed_;
        double bd = std::numeric_limits<double>::infinity();
        for (const auto& xc : xs_) bd = std::min(bd, wrapped(x, xc).norm());
        return bd > 2 * p_.delta + spacing + 4 * h_;
    }

    /// Central-difference jet of phi.
    LambdaChartJet perturbation_jet(double q1, double q2, double th) const {
        LambdaChartJet j;
        if (far_from_core(q1, q2, th)) return j;
        const double h = h_;
        const double f0 = phi(q1, q2, th);
        const double f1p = phi(q1 + h, q2, th), f1m = phi(q1 - h, q2, th);
        const double f2p = phi(q1, q2 + h, th), f2m = phi(q1, q2 - h, th);
        const double ftp = phi(q1, q2, th + h), ftm = phi(q1, q2, th - h);
        j.value = f0;
        j.d1 = (f1p - f1m) / (2 * h);
        j.d2 = (f2p - f2m) / (2 * h);
        j.dth = (ftp - ftm) / (2 * h);
        j.dthth = (ftp - 2 * f0 + ftm) / (h * h);
        j.d1th = (phi(q1 + h, q2, th + h) - phi(q1 + h, q2, th - h) - phi(q1 - h, q2, th + h) +
                  phi(q1 - h, q2, th - h)) / (4 * h * h);
        j.d2th = (phi(q1, q2 + h, th + h) - phi(q1, q2 + h, th - h) - phi(q1, q2 - h, th + h) +
                  phi(q1, q2 - h, th - h)) / (4 * h * h);
        return j;
    }

    LambdaChartJet chart_jet(double q1, double q2, double th) const override {
        LambdaChartJet a = base_->chart_jet(q1, q2, th);
        const LambdaChartJet b = perturbation_jet(q1, q2, th);
        return {a.value + b.value, a.d1 + b.d1,       a.d2 + b.d2,      a.dth + b.dth,
                a.dthth + b.dthth, a.d1th + b.d1th, a.d2th + b.d2th};
    }

    /// Point of SM with tube coordinates (x1, x2, x3), to first order off the core.
    Eigen::Vector3d tube_point(double x1, double x2, double x3) const {
        const Eigen::VectorXd xc = core_->coordinates(x1);
        const Frame f = frame_at(g_, xc);
        return Eigen::Vector3d(xc) + x2 * Eigen::Vector3d(f.H) + x3 * Eigen::Vector3d(f.V);
    }

    /// max over sample points near the core of |phi| + |D phi| + |D^2 phi| (central differences).
    double c2_norm_estimate(std::size_t n1 = 24, std::size_t n2 = 6) const {
        double best = 0;
        const double h = h_;
        for (std::size_t i = 0; i <= n1; ++i) {
            const double x1 = -p_.C + 2 * p_.C * i / n1;
            for (std::size_t a = 0; a <= n2; ++a) {
                for (std::size_t b = 0; b <= n2; ++b) {
                    const double x2 = p_.delta * (-1 + 2.0 * a / n2), x3 = p_.delta * (-1 + 2.0 * b / n2);
                    const Eigen::Vector3d x = tube_point(x1, x2, x3);
                    auto F = [&](const Eigen::Vector3d& y) { return phi(y[0], y[1], y[2]); };
                    double s = std::abs(F(x));
                    Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
                    for (int k = 0; k < 3; ++k) {
                        s += std::abs((F(x + h * I.col(k)) - F(x - h * I.col(k))) / (2 * h));
                        for (int l = 0; l < 3; ++l) {
                            const double d = (F(x + h * I.col(k) + h * I.col(l)) - F(x + h * I.col(k) - h * I.col(l)) -
                                              F(x - h * I.col(k) + h * I.col(l)) + F(x - h * I.col(k) - h * I.col(l))) /
                                             (4 * h * h);
                            s += std::abs(d);
                        }
                    }
                    best = std::max(best, s);
                }
            }
        }
        return best;
    }

private:
    /// Periodic difference x - y in (q1, q2, theta).
    Eigen::Vector3d wrapped(const Eigen::Vector3d& x, const Eigen::VectorXd& y) const {
        return {wrap_centered(x[0] - y[0], g_.period1()), wrap_centered(x[1] - y[1], g_.period2()),
                wrap_centered(x[2] - y[2], two_pi)};
    }

    /// Half the shortest near-normal chord between core samples, over lattice shifts.
    double measure_injectivity() {
        max_speed_ = 0;
        for (std::size_t i = 0; i + 1 < xs_.size(); ++i)
            max_speed_ = std::max(max_speed_, (xs_[i + 1] - xs_[i]).norm() / (ts_[i + 1] - ts_[i]));
        const std::size_t stride = std::max<std::size_t>(1, xs_.size() / 96);
        std::vector<Eigen::Vector3d> dirs;
        for (std::size_t i = 0; i < xs_.size(); ++i) {
            const Eigen::VectorXd xc = xs_[i];
            const Frame f = frame_at(g_, xc);
            const double lam = base_->chart_jet(xc[0], xc[1], xc[2]).value;
            dirs.push_back(Eigen::Vector3d(f.X + lam * f.V).normalized());
        }
        double best = std::numeric_limits<double>::infinity();
        const double L[3] = {g_.period1(), g_.period2(), two_pi};
        for (std::size_t i = 0; i < xs_.size(); i += stride) {
            for (std::size_t j = 0; j < xs_.size(); j += stride) {
                for (int n1 = -1; n1 <= 1; ++n1)
                    for (int n2 = -1; n2 <= 1; ++n2)
                        for (int n3 = -1; n3 <= 1; ++n3) {
                            const Eigen::Vector3d chord =
                                Eigen::Vector3d(xs_[j]) - Eigen::Vector3d(xs_[i]) +
                                Eigen::Vector3d(n1 * L[0], n2 * L[1], n3 * L[2]);
                            const double len = chord.norm();
                            if (len < 1e-9) continue;
                            if (std::abs(chord.dot(dirs[i])) > 0.2 * len || std::abs(chord.dot(dirs[j])) > 0.2 * len)
                                continue;
                            best = std::min(best, len);
                        }
            }
        }
        return 0.5 * best;
    }

    Metric g_;
    GeneratorPtr base_;
    Params p_;
    TrajectoryPtr core_;
    std::vector<double> ts_;
    std::vector<Eigen::VectorXd> xs_;
    double injectivity_bound_ = 0;
    double max_speed_ = 1;
    double h_ = 1e-4;
};

inline std::shared_ptr<FlowboxPerturbation> flowbox_perturbation(const Metric& g, const GeneratorPtr& base,
                                                                 const UnitTangent& v, double C, double delta,
                                                                 double eps, int sign) {
    return std::make_shared<FlowboxPerturbation>(g, base, v, FlowboxPerturbation::Params{C, delta, eps, sign});
}

// ---------------------------------------------------------------- index experiment

/// Coefficients of a (perturbed) system evaluated along a fixed reference orbit.
class FrozenOrbitPath final : public CoefficientPath {
public:
    FrozenOrbitPath(TrajectoryPtr reference, Metric g, GeneratorPtr lam)
        : ref_(std::move(reference)), g_(std::move(g)), lam_(std::move(lam)) {}

    double t_min() const override { return ref_->t_min(); }
    double t_max() const override { return ref_->t_max(); }
    Coefficients at(double t) const override {
        const Eigen::VectorXd x = ref_->coordinates(t);
        const auto d = eval_lambda_at(g_, *lam_, x);
        Coefficients c;
        c.lambda = d.lambda;
        c.vlam = d.vlam;
        c.fvlam = d.fvlam;
        c.kk = gaussian_curvature_at(g_, x) - d.hlam + d.lambda * d.lambda + d.fvlam;
        c.kappa_tilde = c.kk - 0.5 * d.fvlam - 0.25 * d.vlam * d.vlam;
        return c;
    }
    double damping(double t) const override {
        if (t == 0.0) return 1.0;
        auto f = [this](double s) { return at(s).vlam; };
        return std::exp(-0.5 * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, t, 10, 1e-12));
    }

private:
    TrajectoryPtr ref_;
    Metric g_;
    GeneratorPtr lam_;
};

struct PerturbationParams {
    double T = 10;
    double eps = 0.04;
    double delta = 0.1;
    int k = 2;          // number of core passes: L1 = 2T/k, C = T/k
    double L2 = 1;
};

struct PerturbationReport {
    PerturbationParams params;
    double C = 0, L1 = 0;
    double injectivity_bound = 0;
    int sign = 1;
    double I_unperturbed = 0;            // quadrature of the tent
    double identity = 0;                 // z_{-T}'(0) - z_T'(0)
    double closed_form = 0;              // 2/T
    double C_prime = 0;                  // f_T > 1/2 on |t| <= C'
    bool tent_bound_holds = false;        // I(f_T) <= eps C'/4
    double core_contribution = 0;        // int_{-C}^{C} (kt - kt_bar) f_T^2
    double delta_contribution = 0;       // same over the other passes
    double delta_misalignment = 0;       // max |curvature change at t - at the core time t mod 2C|
    bool core_bound_holds = false;        // core_contribution <= -eps C'
    double I_perturbed = 0;              // bar I(f_T) along the core orbit
    double I_perturbed_true_orbit = 0;   // along the perturbed orbit
    double deviation_term = 0;           // difference of the two
    ConjugateReport conjugate;           // scan along the core orbit from -T
    ConjugateReport conjugate_true_orbit;
    std::string status;                  // NEGATIVE_INDEX or INCONCLUSIVE
    std::shared_ptr<const PiecewiseC2Fn> tent;
    PathPtr core, frozen;                // unperturbed orbit and perturbed coefficients along it
};

/// Closed-orbit index experiment on the flat torus: tent f_T along a closed geodesic of
/// period 2C (kC = T), bump perturbation, perturbed index and conjugate scan.
inline PerturbationReport closed_orbit_experiment(const PerturbationParams& prm) {
    if (!(prm.T > 0) || prm.k < 1 || !(prm.delta > 0) || prm.eps < 0 || !(prm.L2 > 0))
        throw DomainError("invalid experiment parameters");
    PerturbationReport rep;
    rep.params = prm;
    rep.C = prm.T / prm.k;
    rep.L1 = 2 * rep.C;
    const Metric g = Metric::flat_torus(rep.L1, prm.L2);
    const GeneratorPtr base = FourierGenerator::zero();
    const TorusTangent v{0.0, 0.5 * prm.L2, 0.0};
    const OdeOptions tight{1e-12, 1e-14};
    const auto core = integrate_flow(g, base, v, -prm.T, prm.T, tight);

    const auto tent = tent_fT(core, prm.T);
    rep.I_unperturbed = tent.quadrature;
    rep.identity = tent.identity;
    rep.closed_form = 2 / prm.T;
    {
        // largest C' <= C/2 with f_T > 1/2 on [-C', C']
        double cp = 0.5 * rep.C;
        const std::size_t n = 400;
        for (std::size_t i = 0; i <= n; ++i) {
            const double t = 0.5 * rep.C * i / n;
            if (tent.f(t) <= 0.5 || tent.f(-t) <= 0.5) {
                cp = 0.5 * rep.C * (i > 0 ? i - 1 : 0) / n;
                break;
            }
        }
        rep.C_prime = cp;
    }
    rep.tent_bound_holds = rep.I_unperturbed <= prm.eps * rep.C_prime / 4;

    GeneratorPtr perturbed = base;
    if (prm.eps > 0) {
        // on the core kt - kt_bar = -phi^2 - (2 lambda - V^2 lambda / 2) phi; pick the sign making
        // the linear part non-positive when integrated against f_T^2
        double lin = 0;
        for (int i = 0; i <= 400; ++i) {
            const double t = -prm.T + 2 * prm.T * i / 400.0;
            const auto d = eval_lambda(g, *base, core->state(t));
            lin += (2 * d.lambda - 0.5 * d.vvlam) * tent.f(t) * tent.f(t) * bump(wrap_centered(t, rep.L1) / rep.C);
        }
        rep.sign = lin >= 0 ? 1 : -1;
        auto fb = flowbox_perturbation(g, base, v, rep.C, prm.delta, prm.eps, rep.sign);
        rep.injectivity_bound = fb->injectivity_bound();
        perturbed = fb;
    }
    auto frozen = std::make_shared<FrozenOrbitPath>(core, g, perturbed);
    rep.I_perturbed = index_form(*frozen, tent.f);

    // per-pass split of int (kt - kt_bar) f_T^2: kt = 0 on the flat geodesic core
    auto diff = [&](double t) {
        const double ft = tent.f(t);
        return (core->kappa_tilde(t) - frozen->kappa_tilde(t)) * ft * ft;
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    rep.core_contribution = GK::integrate(diff, -rep.C, 0.0, 12, 1e-12) + GK::integrate(diff, 0.0, rep.C, 12, 1e-12);
    rep.delta_contribution = 0;
    for (double a = -prm.T; a < -rep.C - 1e-12; a += rep.C)
        rep.delta_contribution += GK::integrate(diff, a, a + rep.C, 12, 1e-12);
    for (double a = rep.C; a < prm.T - 1e-12; a += rep.C)
        rep.delta_contribution += GK::integrate(diff, a, a + rep.C, 12, 1e-12);
    // re-entries of the tube: the curvature change at t should repeat the one at t - 2jC
    for (int i = 0; i <= 2000; ++i) {
        const double t = -prm.T + 2 * prm.T * i / 2000.0;
        const double t_core = t - rep.L1 * std::round(t / rep.L1);
        const double dt = core->kappa_tilde(t) - frozen->kappa_tilde(t);
        const double dc = core->kappa_tilde(t_core) - frozen->kappa_tilde(t_core);
        rep.delta_misalignment = std::max(rep.delta_misalignment, std::abs(dt - dc));
    }
    rep.core_bound_holds = rep.core_contribution <= -prm.eps * rep.C_prime;

    rep.conjugate = conjugate_scan(frozen, 2 * prm.T, -prm.T);

    try {
        const auto true_orbit = integrate_flow(g, perturbed, v, -prm.T, prm.T);
        rep.I_perturbed_true_orbit = index_form(*true_orbit, tent.f);
        rep.deviation_term = rep.I_perturbed_true_orbit - rep.I_perturbed;
        rep.conjugate_true_orbit = conjugate_scan(true_orbit, 2 * prm.T, -prm.T);
    } catch (const Error& e) {
        rep.conjugate_true_orbit.error = e.what();
    }
    rep.tent = std::make_shared<PiecewiseC2Fn>(tent.f);
    rep.core = core;
    rep.frozen = frozen;
    rep.status = (rep.I_perturbed < -1e-10 && rep.conjugate.first_conjugate_time) ? "NEGATIVE_INDEX" : "INCONCLUSIVE";
    return rep;
}

} // namespace thermoflow
