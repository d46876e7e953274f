#pragma once

// Thermostat index form I(f) = int (f'^2 - kappa_tilde f^2) dt on piecewise C^2
// test functions, the tent f_T, and negative-index witnesses.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "thermoflow/errors.hpp"
#include "thermoflow/green.hpp"
#include "thermoflow/jacobi.hpp"

namespace thermoflow {

/// Continuous function, C^2 on each segment between breakpoints; each piece returns (f, f').
class PiecewiseC2Fn {
public:
    using Piece = std::function<std::pair<double, double>(double)>;

    PiecewiseC2Fn(std::vector<double> breakpoints, std::vector<Piece> pieces, double continuity_tol = 1e-12)
        : b_(std::move(breakpoints)), p_(std::move(pieces)) {
        if (b_.size() < 2 || p_.size() + 1 != b_.size())
            throw DomainError("piecewise function needs n + 1 breakpoints for n pieces");
        for (std::size_t i = 1; i < b_.size(); ++i)
            if (!(b_[i] > b_[i - 1])) throw DomainError("breakpoints must be strictly increasing");
        for (std::size_t i = 1; i + 1 < b_.size(); ++i) {
            const double l = p_[i - 1](b_[i]).first, r = p_[i](b_[i]).first;
            if (std::abs(l - r) > continuity_tol) throw DomainError("piecewise function is discontinuous");
        }
    }

    double t_a() const { return b_.front(); }
    double t_b() const { return b_.back(); }
    const std::vector<double>& breakpoints() const { return b_; }
    std::size_t segments() const { return p_.size(); }
    const Piece& piece(std::size_t i) const { return p_[i]; }

    /// (f, f') with the derivative taken from the right, except at t_b.
    std::pair<double, double> eval(double t) const {
        if (t < t_a() || t > t_b()) throw DomainError("evaluation outside the function's span");
        std::size_t i = std::upper_bound(b_.begin(), b_.end(), t) - b_.begin();
        i = std::min(std::max<std::size_t>(i, 1), p_.size());
        return p_[i - 1](t);
    }
    double operator()(double t) const { return eval(t).first; }

    struct Sample {
        double t, f, fdot;
    };

    /// n uniform subintervals per segment (breakpoints shared, left derivative at each end).
    std::vector<Sample> sample(std::size_t n) const {
        std::vector<Sample> out;
        for (std::size_t s = 0; s < p_.size(); ++s) {
            for (std::size_t k = (s == 0 ? 0 : 1); k <= n; ++k) {
                const double t = b_[s] + (b_[s + 1] - b_[s]) * static_cast<double>(k) / static_cast<double>(n);
                const auto [f, d] = p_[s](t);
                out.push_back({t, f, d});
            }
        }
        return out;
    }

    /// this + c * other, breakpoints merged (both must share the span).
    PiecewiseC2Fn plus(const PiecewiseC2Fn& other, double c) const {
        if (std::abs(other.t_a() - t_a()) > 1e-14 || std::abs(other.t_b() - t_b()) > 1e-14)
            throw DomainError("piecewise functions have different spans");
        std::vector<double> b = b_;
        b.insert(b.end(), other.b_.begin(), other.b_.end());
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end(), [](double x, double y) { return std::abs(x - y) < 1e-14; }), b.end());
        std::vector<Piece> pieces;
        for (std::size_t i = 0; i + 1 < b.size(); ++i) {
            const double mid = 0.5 * (b[i] + b[i + 1]);
            const std::size_t ia = index_of(mid), ib = other.index_of(mid);
            auto pa = p_[ia];
            auto pb = other.p_[ib];
            pieces.push_back([pa, pb, c](double t) {
                const auto x = pa(t), y = pb(t);
                return std::pair<double, double>{x.first + c * y.first, x.second + c * y.second};
            });
        }
        return PiecewiseC2Fn(std::move(b), std::move(pieces), 1e-9);
    }

    PiecewiseC2Fn scaled(double c) const {
        std::vector<Piece> pieces;
        for (const auto& p : p_)
            pieces.push_back([p, c](double t) {
                const auto x = p(t);
                return std::pair<double, double>{c * x.first, c * x.second};
            });
        return PiecewiseC2Fn(b_, std::move(pieces), 1e-9);
    }

    static PiecewiseC2Fn zero(double ta, double tb) {
        return PiecewiseC2Fn({ta, tb}, {[](double) { return std::pair<double, double>{0.0, 0.0}; }});
    }

private:
    std::size_t index_of(double t) const {
        std::size_t i = std::upper_bound(b_.begin(), b_.end(), t) - b_.begin();
        return std::min(std::max<std::size_t>(i, 1), p_.size()) - 1;
    }

    std::vector<double> b_;
    std::vector<Piece> p_;
};

struct IndexFormOptions {
    double tol = 1e-9;             // Cauchy tolerance on successive refinements (whole integral)
    std::size_t initial_n = 16;    // Simpson subintervals per segment
    std::size_t max_n = 1 << 16;
};

/// Composite Simpson per segment, refined by doubling until successive values differ < tol.
inline double index_form(const CoefficientPath& path, const PiecewiseC2Fn& f, const IndexFormOptions& opt = {}) {
    if (!path.covers(f.t_a(), f.t_b())) throw DomainError("test function span exceeds the coefficient path");
    double total = 0;
    const double seg_tol = opt.tol / static_cast<double>(f.segments());
    for (std::size_t s = 0; s < f.segments(); ++s) {
        const double a = f.breakpoints()[s], b = f.breakpoints()[s + 1];
        const auto& piece = f.piece(s);
        auto g = [&](double t) {
            const auto [v, d] = piece(t);
            return d * d - path.kappa_tilde(t) * v * v;
        };
        std::size_t n = opt.initial_n;
        double h = (b - a) / n;
        double ends = g(a) + g(b), odd = 0, even = 0;
        for (std::size_t k = 1; k < n; ++k) (k % 2 ? odd : even) += g(a + k * h);
        double prev = h / 3 * (ends + 4 * odd + 2 * even);
        bool converged = false;
        while (n < opt.max_n) {
            n *= 2;
            h = (b - a) / n;
            even += odd;
            odd = 0;
            for (std::size_t k = 1; k < n; k += 2) odd += g(a + k * h);
            const double cur = h / 3 * (ends + 4 * odd + 2 * even);
            const bool done = std::abs(cur - prev) < seg_tol;
            prev = cur;
            if (done) {
                converged = true;
                break;
            }
        }
        if (!converged) throw Error("index form quadrature did not converge");
        total += prev;
    }
    return total;
}

/// z on the span of a damped solution as a single-piece test function.
inline PiecewiseC2Fn as_test_function(const DampedSolution& z, double ta, double tb) {
    auto zp = std::make_shared<DampedSolution>(z);
    return PiecewiseC2Fn({ta, tb}, {[zp](double t) { return std::pair<double, double>{zp->z(t), zp->dz(t)}; }});
}

struct MinimizerCheck {
    double I_z = 0, I_f = 0;
    double max_diff = 0;  // sampled max |f - z|
    bool near_equal = false;  // |I_f - I_z| <= 1e-9
    bool ok = false;          // I_z <= I_f + 1e-9, and near-equality only for f close to z
};

/// Compare I(z) with I(f) for a Jacobi solution z and an admissible f on [-T, T]
/// with matching endpoint values.
inline MinimizerCheck minimizer_check(const PathPtr& path, const PiecewiseC2Fn& z, const PiecewiseC2Fn& f,
                                      bool verify_no_conjugate = true) {
    const double ta = z.t_a(), tb = z.t_b();
    if (std::abs(f.t_a() - ta) > 1e-12 || std::abs(f.t_b() - tb) > 1e-12)
        throw PreconditionError("z and f must share the span");
    if (std::abs(z(ta)) > 1e-10 || std::abs(f(ta)) > 1e-10)
        throw PreconditionError("z and f must vanish at the left end");
    if (std::abs(z(tb) - f(tb)) > 1e-10) throw PreconditionError("z and f must agree at the right end");
    if (verify_no_conjugate) {
        const auto fw = conjugate_scan(path, tb - ta, ta);
        const auto bw = conjugate_scan(path, ta - tb, tb);
        if (fw.first_conjugate_time || bw.first_conjugate_time)
            throw PreconditionError("the path has conjugate points on the span");
    }
    MinimizerCheck r;
    r.I_z = index_form(*path, z);
    r.I_f = index_form(*path, f);
    for (double t : {ta, tb}) r.max_diff = std::max(r.max_diff, std::abs(f(t) - z(t)));
    for (int k = 1; k < 2000; ++k) {
        const double t = ta + (tb - ta) * k / 2000.0;
        r.max_diff = std::max(r.max_diff, std::abs(f(t) - z(t)));
    }
    const bool le = r.I_z <= r.I_f + 1e-9;
    r.near_equal = std::abs(r.I_f - r.I_z) <= 1e-9;
    r.ok = le && (!r.near_equal || r.max_diff < 1e-7);
    return r;
}

struct TentResult {
    PiecewiseC2Fn f;
    double T = 0;
    double dz_forward = 0;   // z_T'(0)
    double dz_backward = 0;  // z_{-T}'(0)
    double identity = 0;     // z_{-T}'(0) - z_T'(0)
    double quadrature = 0;   // index_form(path, f)
};

/// Glue the backward and forward boundary solutions at t0 into the tent f_T on [t0 - T, t0 + T].
inline TentResult tent_fT(const PathPtr& path, double T, double t0 = 0.0) {
    if (!(T > 0)) throw DomainError("tent needs T > 0");
    auto fw = std::make_shared<ShootResult>(shoot_zT(path, T, t0));
    auto bw = std::make_shared<ShootResult>(shoot_zT(path, -T, t0));
    PiecewiseC2Fn f({t0 - T, t0, t0 + T},
                    {[bw](double t) { return std::pair<double, double>{bw->z(t), bw->dz(t)}; },
                     [fw](double t) { return std::pair<double, double>{fw->z(t), fw->dz(t)}; }},
                    1e-10);
    TentResult r{f, T, fw->slope, bw->slope, bw->slope - fw->slope, 0};
    r.quadrature = index_form(*path, f);
    return r;
}

struct WitnessResult {
    PiecewiseC2Fn f;       // the perturbed test function g = base + sign * eps * q
    PiecewiseC2Fn base;    // z on [a, b], zero elsewhere
    PiecewiseC2Fn q;       // perturbation direction
    double eps = 0;
    int sign = 0;
    int j = 0;             // eps = 2^-j
    double I = 0;          // index of f
    double I_base = 0;     // index of the extension by zero (vanishes)
    double corner_slope = 0;  // z'(b)
};

/// Negative-index witness from conjugate times a < b on the span [ta, tb] (ta <= a, b < tb).
inline WitnessResult negative_index_witness(const PathPtr& path, double a, double b, double ta, double tb,
                                            int max_j = 40) {
    if (!(ta <= a && a < b && b < tb)) throw PreconditionError("witness needs ta <= a < b < tb");
    if (!path->covers(ta, tb)) throw DomainError("witness span exceeds the coefficient path");
    auto z = std::make_shared<DampedSolution>(damped_solve(path, 0.0, 1.0, a, b, a));
    double zmax = 0;
    for (double t : z->grid()) zmax = std::max(zmax, std::abs(z->z(t)));
    const double zb = z->z(b);
    if (std::abs(zb) > 1e-6 * zmax) throw PreconditionError("z does not vanish at b: not a conjugate pair");
    const double dzb = z->dz(b);
    // remove the residual z(b) so the extension by zero is exactly continuous
    const double corr = zb / (b - a);
    auto zero = [](double) { return std::pair<double, double>{0.0, 0.0}; };
    auto inner = [z, a, corr](double t) {
        return std::pair<double, double>{z->z(t) - corr * (t - a), z->dz(t) - corr};
    };
    std::vector<double> bps;
    std::vector<PiecewiseC2Fn::Piece> fp, qp;
    if (ta < a) {
        bps.push_back(ta);
        fp.push_back(zero);
        qp.push_back(zero);
    }
    bps.push_back(a);
    bps.push_back(b);
    bps.push_back(tb);
    fp.push_back(inner);
    fp.push_back(zero);
    qp.push_back([a, b, dzb](double t) { return std::pair<double, double>{dzb * (t - a) / (b - a), dzb / (b - a)}; });
    qp.push_back([b, tb, dzb](double t) { return std::pair<double, double>{dzb * (tb - t) / (tb - b), -dzb / (tb - b)}; });
    PiecewiseC2Fn base(bps, fp), q(bps, qp);
    const double I0 = index_form(*path, base);
    for (int j = 0; j <= max_j; ++j) {
        const double eps = std::ldexp(1.0, -j);
        for (int sign : {+1, -1}) {
            auto g = base.plus(q, sign * eps);
            const double I = index_form(*path, g);
            if (I < -1e-10) return {g, base, q, eps, sign, j, I, I0, dzb};
        }
    }
    throw Error("no negative-index witness found down to eps = 2^-" + std::to_string(max_j));
}

} // namespace thermoflow
