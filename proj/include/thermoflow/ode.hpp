#pragma once

// Embedded Runge-Kutta 5(4) (Dormand-Prince) with continuous extension, plus a
// fixed-step RK4 fallback sharing the same dense-output representation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thermoflow/errors.hpp"

namespace thermoflow {

enum class OdeMethod { Dopri5, Rk4Fixed };

struct OdeOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    OdeMethod method = OdeMethod::Dopri5;
    double fixed_step = 1e-3;      // Rk4Fixed only
    double initial_step = 0.0;     // 0 selects automatically
    double max_step = 0.0;         // 0 means unbounded
    std::size_t max_steps = 5'000'000;
};

struct OdeStats {
    std::size_t steps = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
};

/// One accepted step, stored in the Hairer form
/// y(t0 + s h) = r1 + s (r2 + (1-s)(r3 + s (r4 + (1-s) r5))).
template <class State>
struct DenseSegment {
    double t0 = 0;
    double h = 0;
    State r1, r2, r3, r4, r5;

    double t_lo() const { return h >= 0 ? t0 : t0 + h; }
    double t_hi() const { return h >= 0 ? t0 + h : t0; }

    State eval(double t) const {
        const double s = (t - t0) / h;
        const double s1 = 1.0 - s;
        return r1 + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5)));
    }
};

/// Piecewise dense output over [t_min, t_max]; segments sorted by time.
template <class State>
class DenseOutput {
public:
    DenseOutput() = default;

    void append_forward(std::vector<DenseSegment<State>> segs) {
        for (auto& s : segs) segments_.push_back(std::move(s));
        sort();
    }

    bool empty() const { return segments_.empty(); }
    double t_min() const { return segments_.front().t_lo(); }
    double t_max() const { return segments_.back().t_hi(); }
    const std::vector<DenseSegment<State>>& segments() const { return segments_; }

    State operator()(double t) const {
        if (segments_.empty()) throw DomainError("dense output is empty");
        return locate(t).eval(t);
    }

    /// Sorted accepted-step grid, both directions merged.
    std::vector<double> grid() const {
        std::vector<double> g;
        g.reserve(segments_.size() + 1);
        for (const auto& s : segments_) g.push_back(s.t_lo());
        if (!segments_.empty()) g.push_back(segments_.back().t_hi());
        g.erase(std::unique(g.begin(), g.end()), g.end());
        return g;
    }

private:
    const DenseSegment<State>& locate(double t) const {
        // segments_ are contiguous and sorted by t_lo
        auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                                   [](double x, const DenseSegment<State>& s) { return x < s.t_lo(); });
        if (it == segments_.begin()) return segments_.front();
        return *(it - 1);
    }

    void sort() {
        std::sort(segments_.begin(), segments_.end(),
                  [](const auto& a, const auto& b) { return a.t_lo() < b.t_lo(); });
    }

    std::vector<DenseSegment<State>> segments_;
};

namespace detail {

template <class State>
double error_norm(const State& err, const State& y0, const State& y1, double rtol, double atol) {
    double acc = 0;
    const auto n = err.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double e = err[i] / sc;
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

} // namespace detail

/// Result of integrating from t0 to t1: the dense segments in the order they were
/// produced, plus statistics.
template <class State>
struct OdeResult {
    std::vector<DenseSegment<State>> segments;
    State final_state;
    OdeStats stats;
};

/// Integrate y' = rhs(t, y) from t0 to t1 (either direction). `on_accept(t, y)` may
/// modify the accepted state in place (projection onto an invariant manifold).
template <class State, class Rhs, class OnAccept>
OdeResult<State> integrate(Rhs&& rhs, double t0, State y0, double t1, const OdeOptions& opt,
                           OnAccept&& on_accept) {
    OdeResult<State> out;
    if (t1 == t0) {
        out.final_state = y0;
        return out;
    }
    const double dir = t1 > t0 ? 1.0 : -1.0;
    auto f = [&](double t, const State& y) {
        ++out.stats.rhs_evals;
        return State(rhs(t, y));
    };

    if (opt.method == OdeMethod::Rk4Fixed) {
        double t = t0;
        State y = y0;
        State k1 = f(t, y);
        while (dir * (t1 - t) > 0) {
            double h = dir * std::min(opt.fixed_step, std::abs(t1 - t));
            State k2 = f(t + 0.5 * h, State(y + 0.5 * h * k1));
            State k3 = f(t + 0.5 * h, State(y + 0.5 * h * k2));
            State k4 = f(t + h, State(y + h * k3));
            State y1 = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            on_accept(t + h, y1);
            State k1n = f(t + h, y1);
            DenseSegment<State> seg;
            seg.t0 = t;
            seg.h = h;
            seg.r1 = y;
            seg.r2 = y1 - y;
            seg.r3 = h * k1 - seg.r2;
            seg.r4 = seg.r2 - h * k1n - seg.r3;
            seg.r5 = State::Zero(y.size());
            out.segments.push_back(std::move(seg));
            ++out.stats.steps;
            t += h;
            y = y1;
            k1 = k1n;
            if (out.stats.steps > opt.max_steps) throw IntegrationError("step budget exhausted", t);
        }
        out.final_state = y;
        return out;
    }

    // Dormand-Prince 5(4) tableau
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                     a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                     d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                     d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

    double t = t0;
    State y = y0;
    State k1 = f(t, y);

    double h;
    if (opt.initial_step > 0) {
        h = opt.initial_step;
    } else {
        // Hairer's starting step heuristic
        const auto n = y.size();
        double d0 = 0, dd1 = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double sc = opt.atol + opt.rtol * std::abs(y[i]);
            d0 += (y[i] / sc) * (y[i] / sc);
            dd1 += (k1[i] / sc) * (k1[i] / sc);
        }
        d0 = std::sqrt(d0 / n);
        dd1 = std::sqrt(dd1 / n);
        h = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * d0 / dd1;
        h = std::min(h, std::abs(t1 - t0));
        State yt = y + dir * h * k1;
        State kt = f(t + dir * h, yt);
        double d2 = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double sc = opt.atol + opt.rtol * std::abs(y[i]);
            const double v = (kt[i] - k1[i]) / sc;
            d2 += v * v;
        }
        d2 = std::sqrt(d2 / n) / h;
        const double m = std::max(dd1, d2);
        const double h1 = m <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / m, 0.2);
        h = std::min(100 * h, h1);
    }
    if (opt.max_step > 0) h = std::min(h, opt.max_step);
    h = std::min(h, std::abs(t1 - t0));

    double err_prev = 1e-4;
    bool last_rejected = false;
    while (dir * (t1 - t) > 0) {
        if (out.stats.steps + out.stats.rejected > opt.max_steps)
            throw IntegrationError("step budget exhausted", t);
        const double hmin = 1e-14 * std::max(1.0, std::abs(t));
        if (h < hmin) throw IntegrationError("step size underflow", t);
        bool last = false;
        if (h >= std::abs(t1 - t)) {
            h = std::abs(t1 - t);
            last = true;
        }
        const double hs = dir * h;
        State k2 = f(t + c2 * hs, State(y + hs * (a21 * k1)));
        State k3 = f(t + c3 * hs, State(y + hs * (a31 * k1 + a32 * k2)));
        State k4 = f(t + c4 * hs, State(y + hs * (a41 * k1 + a42 * k2 + a43 * k3)));
        State k5 = f(t + c5 * hs, State(y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
        State k6 = f(t + hs, State(y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
        State y1 = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        State k7 = f(t + hs, y1);
        State errv = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double err = detail::error_norm(errv, y, y1, opt.rtol, opt.atol);

        if (!std::isfinite(err)) {
            ++out.stats.rejected;
            h *= 0.1;
            last_rejected = true;
            continue;
        }
        if (err <= 1.0) {
            DenseSegment<State> seg;
            seg.t0 = t;
            seg.h = hs;
            seg.r1 = y;
            seg.r2 = y1 - y;
            seg.r3 = hs * k1 - seg.r2;
            seg.r4 = seg.r2 - hs * k7 - seg.r3;
            seg.r5 = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            const double tn = last ? t1 : t + hs;
            on_accept(tn, y1);
            out.segments.push_back(std::move(seg));
            ++out.stats.steps;
            t = tn;
            y = y1;
            k1 = f(t, y);
            // PI step control
            double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5) * std::pow(err_prev, 0.4 / 5);
            fac = std::clamp(fac, 0.2, 10.0);
            if (last_rejected) fac = std::min(fac, 1.0);
            h *= fac;
            err_prev = std::max(err, 1e-4);
            last_rejected = false;
        } else {
            ++out.stats.rejected;
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            last_rejected = true;
        }
        if (opt.max_step > 0) h = std::min(h, opt.max_step);
    }
    out.final_state = y;
    return out;
}

template <class State, class Rhs>
OdeResult<State> integrate(Rhs&& rhs, double t0, State y0, double t1, const OdeOptions& opt) {
    return integrate(std::forward<Rhs>(rhs), t0, std::move(y0), t1, opt, [](double, State&) {});
}

/// Integrate both ways from t0 so that the dense output covers [ta, tb] with ta <= t0 <= tb.
template <class State, class Rhs, class OnAccept>
DenseOutput<State> integrate_span(Rhs&& rhs, double t0, const State& y0, double ta, double tb,
                                  const OdeOptions& opt, OnAccept&& on_accept, OdeStats* stats = nullptr) {
    if (ta > t0 || tb < t0) throw DomainError("integration span must contain the initial time");
    DenseOutput<State> dense;
    OdeStats total;
    if (tb > t0) {
        auto fw = integrate(rhs, t0, y0, tb, opt, on_accept);
        total.steps += fw.stats.steps;
        total.rejected += fw.stats.rejected;
        total.rhs_evals += fw.stats.rhs_evals;
        dense.append_forward(std::move(fw.segments));
    }
    if (ta < t0) {
        auto bw = integrate(rhs, t0, y0, ta, opt, on_accept);
        total.steps += bw.stats.steps;
        total.rejected += bw.stats.rejected;
        total.rhs_evals += bw.stats.rhs_evals;
        dense.append_forward(std::move(bw.segments));
    }
    if (dense.empty()) throw DomainError("empty integration span");
    if (stats) *stats = total;
    return dense;
}

} // namespace thermoflow
