#pragma once

// The thermostat generator lambda on SM, stored as a finite fiberwise Fourier sum
// lambda(q, theta) = sum_k c_k(q) e^{ik theta} with c_{-k} = conj(c_k).

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <vector>

#include <fftw3.h>

#include "thermoflow/errors.hpp"
#include "thermoflow/geometry.hpp"

namespace thermoflow {

/// Complex value with first partials in (q1, q2).
struct CJet1 {
    cplx v{}, d1{}, d2{};
};

using CoefficientFn = std::function<CJet1(double, double)>;

/// Chart derivatives of lambda at (q1, q2, theta) needed by the curvature formulas.
struct LambdaChartJet {
    double value = 0;
    double d1 = 0, d2 = 0, dth = 0;
    double dthth = 0, d1th = 0, d2th = 0;
};

/// lambda and its frame derivatives at a point of SM.
struct LambdaDerivatives {
    double lambda = 0;
    double vlam = 0;   // V lambda
    double hlam = 0;   // H lambda
    double xlam = 0;   // X lambda
    double vvlam = 0;  // V^2 lambda
    double xvlam = 0;  // X V lambda
    double fvlam = 0;  // F V lambda = X V lambda + lambda V^2 lambda
};

class Generator;
using GeneratorPtr = std::shared_ptr<const Generator>;

/// Interface for generators evaluated through torus chart jets. Sphere backends
/// accept only constant generators (the fiber angle is not global there).
class Generator {
public:
    virtual ~Generator() = default;
    virtual LambdaChartJet chart_jet(double q1, double q2, double theta) const = 0;
    /// Constant value when lambda does not depend on the point.
    virtual std::optional<double> constant_value() const { return std::nullopt; }
};

/// Truncated fiber Fourier series; modes k = 0..N with c_0 real-valued.
class FourierGenerator final : public Generator {
public:
    struct Mode {
        int k = 0;
        CoefficientFn c;
    };

    FourierGenerator() = default;
    explicit FourierGenerator(std::vector<Mode> modes) : modes_(std::move(modes)) {
        std::map<int, int> seen;
        for (const auto& m : modes_) {
            if (m.k < 0) throw DomainError("store generator modes with k >= 0; k < 0 follows by conjugation");
            if (!m.c) throw DomainError("generator mode has no coefficient function");
            if (seen[m.k]++) throw DomainError("duplicate generator mode");
        }
    }

    static std::shared_ptr<FourierGenerator> constant(double lambda0) {
        auto g = std::make_shared<FourierGenerator>(
            std::vector<Mode>{{0, [lambda0](double, double) { return CJet1{lambda0, 0, 0}; }}});
        g->constant_ = lambda0;
        return g;
    }

    static std::shared_ptr<FourierGenerator> zero() { return constant(0.0); }

    const std::vector<Mode>& modes() const { return modes_; }
    int order() const {
        int n = 0;
        for (const auto& m : modes_) n = std::max(n, m.k);
        return n;
    }

    LambdaChartJet chart_jet(double q1, double q2, double theta) const override {
        LambdaChartJet j;
        for (const auto& m : modes_) {
            const CJet1 c = m.c(q1, q2);
            if (m.k == 0) {
                // c_0 must be real: imaginary parts are ignored by construction of the real sum
                j.value += c.v.real();
                j.d1 += c.d1.real();
                j.d2 += c.d2.real();
                continue;
            }
            const double k = m.k;
            const cplx e(std::cos(k * theta), std::sin(k * theta));
            const cplx ik(0, k);
            // c_k e^{ik theta} + conj(...) = 2 Re(c_k e^{ik theta})
            j.value += 2 * (c.v * e).real();
            j.d1 += 2 * (c.d1 * e).real();
            j.d2 += 2 * (c.d2 * e).real();
            j.dth += 2 * (ik * c.v * e).real();
            j.dthth += 2 * (-k * k * c.v * e).real();
            j.d1th += 2 * (ik * c.d1 * e).real();
            j.d2th += 2 * (ik * c.d2 * e).real();
        }
        return j;
    }

    std::optional<double> constant_value() const override { return constant_; }

    /// Mirror generator lambda^F = -lambda o flip, mode-wise c_k -> e^{i(k+1)pi} c_k.
    std::shared_ptr<FourierGenerator> mirrored() const {
        std::vector<Mode> out;
        for (const auto& m : modes_) {
            const double sgn = (m.k % 2 == 0) ? -1.0 : 1.0;
            auto c = m.c;
            out.push_back({m.k, [c, sgn](double a, double b) {
                               CJet1 j = c(a, b);
                               return CJet1{sgn * j.v, sgn * j.d1, sgn * j.d2};
                           }});
        }
        auto g = std::make_shared<FourierGenerator>(std::move(out));
        if (constant_) g->constant_ = -*constant_;
        return g;
    }

private:
    std::vector<Mode> modes_;
    std::optional<double> constant_;
};

/// Mirror of an arbitrary generator: lambda^F(q, theta) = -lambda(q, theta + pi).
class MirroredGenerator final : public Generator {
public:
    explicit MirroredGenerator(GeneratorPtr base) : base_(std::move(base)) {
        if (!base_) throw DomainError("mirror of an empty generator");
    }
    LambdaChartJet chart_jet(double q1, double q2, double theta) const override {
        LambdaChartJet j = base_->chart_jet(q1, q2, theta + std::numbers::pi);
        for (double* x : {&j.value, &j.d1, &j.d2, &j.dth, &j.dthth, &j.d1th, &j.d2th}) *x = -*x;
        return j;
    }
    std::optional<double> constant_value() const override {
        if (auto c = base_->constant_value()) return -*c;
        return std::nullopt;
    }

private:
    GeneratorPtr base_;
};

/// Sum of a base generator and a perturbation given by its own chart jet.
class SumGenerator final : public Generator {
public:
    SumGenerator(GeneratorPtr a, GeneratorPtr b) : a_(std::move(a)), b_(std::move(b)) {}
    LambdaChartJet chart_jet(double q1, double q2, double theta) const override {
        const LambdaChartJet x = a_->chart_jet(q1, q2, theta), y = b_->chart_jet(q1, q2, theta);
        return {x.value + y.value, x.d1 + y.d1,       x.d2 + y.d2,      x.dth + y.dth,
                x.dthth + y.dthth, x.d1th + y.d1th, x.d2th + y.d2th};
    }

private:
    GeneratorPtr a_, b_;
};

inline GeneratorPtr mirror_lambda(const GeneratorPtr& g) {
    if (auto f = std::dynamic_pointer_cast<const FourierGenerator>(g)) return f->mirrored();
    return std::make_shared<MirroredGenerator>(g);
}

/// lambda and its frame derivatives at a raw state vector.
inline LambdaDerivatives eval_lambda_at(const Metric& g, const Generator& lam, const Eigen::VectorXd& x) {
    LambdaDerivatives d;
    if (!g.is_torus()) {
        const auto c = lam.constant_value();
        if (!c) throw DomainError("the sphere backend supports constant generators only");
        d.lambda = *c;
        return d;
    }
    const LambdaChartJet j = lam.chart_jet(x[0], x[1], x[2]);
    const Frame f = frame_at(g, x);
    d.lambda = j.value;
    d.vlam = j.dth;
    d.vvlam = j.dthth;
    d.xlam = f.X[0] * j.d1 + f.X[1] * j.d2 + f.X[2] * j.dth;
    d.hlam = f.H[0] * j.d1 + f.H[1] * j.d2 + f.H[2] * j.dth;
    d.xvlam = f.X[0] * j.d1th + f.X[1] * j.d2th + f.X[2] * j.dthth;
    d.fvlam = d.xvlam + d.lambda * d.vvlam;
    return d;
}

inline LambdaDerivatives eval_lambda(const Metric& g, const Generator& lam, const UnitTangent& v) {
    check_backend(g, v);
    return eval_lambda_at(g, lam, coords(v));
}

/// KK = K - H lambda + lambda^2 + F V lambda.
inline double thermostat_curvature(const Metric& g, const Generator& lam, const UnitTangent& v) {
    const auto d = eval_lambda(g, lam, v);
    return gaussian_curvature_at(g, coords(v)) - d.hlam + d.lambda * d.lambda + d.fvlam;
}

/// kappa_tilde = KK - F V lambda / 2 - (V lambda)^2 / 4.
inline double damped_curvature(const Metric& g, const Generator& lam, const UnitTangent& v) {
    const auto d = eval_lambda(g, lam, v);
    const double kk = gaussian_curvature_at(g, coords(v)) - d.hlam + d.lambda * d.lambda + d.fvlam;
    return kk - 0.5 * d.fvlam - 0.25 * d.vlam * d.vlam;
}

struct ReversibilityReport {
    bool is_reversible = false;
    double max_even_mode_mass = 0;  // sup over the grid of |c_k|, k even (k = 0 included)
};

/// Fiber DFT of lambda on an n_q x n_q base grid with n_theta fiber samples; lambda
/// is reversible iff every even fiber mode vanishes.
inline ReversibilityReport reversibility_report(const Metric& g, const Generator& lam, std::size_t n_q = 16,
                                                std::size_t n_theta = 64, double tol = 1e-12) {
    if (!g.is_torus()) {
        const auto c = lam.constant_value();
        if (!c) throw DomainError("the sphere backend supports constant generators only");
        return {std::abs(*c) < tol, std::abs(*c)};
    }
    std::vector<double> in(n_theta);
    std::vector<cplx> out(n_theta / 2 + 1);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n_theta), in.data(),
                                          reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
    ReversibilityReport r;
    for (std::size_t a = 0; a < n_q; ++a) {
        for (std::size_t b = 0; b < n_q; ++b) {
            const double q1 = g.period1() * a / n_q, q2 = g.period2() * b / n_q;
            for (std::size_t i = 0; i < n_theta; ++i)
                in[i] = lam.chart_jet(q1, q2, two_pi * i / n_theta).value;
            fftw_execute(plan);
            for (std::size_t k = 0; k < out.size(); k += 2)
                r.max_even_mode_mass = std::max(r.max_even_mode_mass, std::abs(out[k]) / n_theta);
        }
    }
    fftw_destroy_plan(plan);
    r.is_reversible = r.max_even_mode_mass < tol;
    return r;
}

/// Coefficient-wise comparison of lambda and its mirror on the base grid.
inline double mirror_coefficient_defect(const Metric& g, const FourierGenerator& lam, std::size_t n_q = 16) {
    const auto mir = lam.mirrored();
    double defect = 0;
    for (std::size_t i = 0; i < lam.modes().size(); ++i) {
        for (std::size_t a = 0; a < n_q; ++a) {
            for (std::size_t b = 0; b < n_q; ++b) {
                const double q1 = g.period1() * a / n_q, q2 = g.period2() * b / n_q;
                defect = std::max(defect, std::abs(lam.modes()[i].c(q1, q2).v - mir->modes()[i].c(q1, q2).v));
            }
        }
    }
    return defect;
}

} // namespace thermoflow
