#pragma once

// Line fields E* = R(r beta + psi_lambda) along curves in SM, the circle map
// m(r) = (1 + ir)/(1 - ir), winding degrees and the crossing count on closed orbits.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "thermoflow/errors.hpp"
#include "thermoflow/flow.hpp"
#include "thermoflow/jacobi.hpp"

namespace thermoflow {

inline constexpr double slope_infinity = std::numeric_limits<double>::infinity();

/// r = -z'/z - (V lambda)/2 (equivalently -y'/y - V lambda); infinite when z = 0.
inline double slope_from_damped(double z, double dz, double vlam) {
    if (z == 0.0 && dz == 0.0) throw DomainError("zero vector has no slope");
    if (z == 0.0) return slope_infinity;
    return -dz / z - 0.5 * vlam;
}

/// m(r) = (1 + ir)/(1 - ir) = ((1 - r^2) + 2ir)/(1 + r^2); m(inf) = -1.
inline std::complex<double> m_map(double r) {
    if (std::isinf(r)) return {-1.0, 0.0};
    std::complex<double> m;
    if (std::abs(r) <= 1) {
        m = {(1 - r * r) / (1 + r * r), 2 * r / (1 + r * r)};
    } else {
        const double s = 1 / r;  // continuous through infinity
        m = {(s * s - 1) / (s * s + 1), 2 * s / (s * s + 1)};
    }
    return m / std::abs(m);
}

/// Slope samples along a curve; `resample`, when set, evaluates r at any parameter
/// (used to refine where consecutive m-values are too far apart).
struct LineField {
    std::vector<double> t;
    std::vector<double> r;
    std::function<double(double)> resample;

    /// Same field along the reversed curve c^{-1}(t) = c(-t).
    LineField reversed() const {
        LineField out;
        for (std::size_t i = t.size(); i-- > 0;) {
            out.t.push_back(-t[i]);
            out.r.push_back(r[i]);
        }
        if (resample) {
            auto f = resample;
            out.resample = [f](double s) { return f(-s); };
        }
        return out;
    }
};

struct WindingResult {
    int degree = 0;
    double turns = 0;        // accumulated argument / 2 pi
    double residual = 0;     // |turns - degree|
    std::size_t samples = 0; // after refinement
};

/// deg(m o E* o c): accumulated argument of m over 2 pi, with the pi/2 density
/// contract enforced by refinement through `resample`.
inline WindingResult winding_degree(const LineField& field, double closure_tol = 1e-9, int max_depth = 20) {
    if (field.t.size() != field.r.size() || field.t.size() < 2) throw DomainError("line field needs >= 2 samples");
    for (std::size_t i = 1; i < field.t.size(); ++i)
        if (!(field.t[i] > field.t[i - 1])) throw DomainError("line field parameters must increase");
    const auto m0 = m_map(field.r.front()), m1 = m_map(field.r.back());
    if (std::abs(m0 - m1) > closure_tol) throw PreconditionError("line field is not closed");

    WindingResult res;
    double total = 0;
    std::size_t count = 1;
    // recursive bisection of intervals that violate the density contract
    std::function<void(double, double, std::complex<double>, std::complex<double>, int)> accumulate =
        [&](double ta, double tb, std::complex<double> ma, std::complex<double> mb, int depth) {
            const double d = std::arg(mb / ma);
            if (std::abs(d) < 0.5 * std::numbers::pi) {
                total += d;
                ++count;
                return;
            }
            if (!field.resample || depth >= max_depth)
                throw Error("winding refinement failed: samples violate the density contract");
            const double tm = 0.5 * (ta + tb);
            const auto mm = m_map(field.resample(tm));
            accumulate(ta, tm, ma, mm, depth + 1);
            accumulate(tm, tb, mm, mb, depth + 1);
        };
    for (std::size_t i = 0; i + 1 < field.t.size(); ++i)
        accumulate(field.t[i], field.t[i + 1], m_map(field.r[i]), m_map(field.r[i + 1]), 0);
    res.turns = total / (2 * std::numbers::pi);
    res.degree = static_cast<int>(std::lround(res.turns));
    res.residual = std::abs(res.turns - res.degree);
    res.samples = count;
    if (res.residual >= 0.05) throw Error("winding degree rounding residual too large");
    return res;
}

/// Curve in SM sampled at increasing parameters.
struct SampledCurve {
    std::vector<double> t;
    std::vector<UnitTangent> states;
};

/// c_bar(t) = flip(c(-t)).
inline SampledCurve mirrored_curve(const SampledCurve& c) {
    SampledCurve out;
    for (std::size_t i = c.t.size(); i-- > 0;) {
        out.t.push_back(-c.t[i]);
        out.states.push_back(flip(c.states[i]));
    }
    return out;
}

/// Sample an integrated orbit on a uniform grid of n + 1 points over [ta, tb].
inline SampledCurve sample_orbit(const Trajectory& traj, double ta, double tb, std::size_t n) {
    SampledCurve c;
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = ta + (tb - ta) * static_cast<double>(i) / static_cast<double>(n);
        c.t.push_back(t);
        c.states.push_back(traj.state(t));
    }
    return c;
}

/// max_i dist(phi_{t_{i+1} - t_i}(c_i), c_{i+1}): zero for flow orbits of (g, lambda).
inline double orbit_residual(const Metric& g, const GeneratorPtr& lam, const SampledCurve& c,
                             const OdeOptions& opt = {1e-12, 1e-14}) {
    double r = 0;
    for (std::size_t i = 0; i + 1 < c.t.size(); ++i) {
        const double dt = c.t[i + 1] - c.t[i];
        const auto tr = integrate_flow(g, lam, c.states[i], std::min(0.0, dt), std::max(0.0, dt), opt);
        r = std::max(r, state_distance(g, tr->state(dt), c.states[i + 1]));
    }
    return r;
}

/// Closed orbit of period P with marked intervals on which it is certified to be a flow orbit.
struct ClosedOrbitNearH {
    TrajectoryPtr orbit;                          // covers [0, P]
    double period = 0;
    std::vector<std::pair<double, double>> marked;
    double closure_defect = 0;                    // dist(phi_P v, v)
    double orbit_defect = 0;                      // orbit residual on the marked intervals
};

inline ClosedOrbitNearH closed_orbit(const Metric& g, const GeneratorPtr& lam, const UnitTangent& v, double period,
                                     double closure_tol = 1e-9) {
    if (!(period > 0)) throw DomainError("closed orbit needs a positive period");
    ClosedOrbitNearH c;
    c.orbit = integrate_flow(g, lam, v, 0.0, period, {1e-12, 1e-14});
    c.period = period;
    c.closure_defect = state_distance(g, c.orbit->state(period), normalize(g, v));
    if (c.closure_defect > closure_tol) throw PreconditionError("orbit does not close within tolerance");
    c.marked = {{0.0, period}};
    c.orbit_defect = orbit_residual(g, lam, sample_orbit(*c.orbit, 0.0, period, 16));
    if (c.orbit_defect > 1e-8) throw PreconditionError("curve is not a flow orbit on its marked interval");
    return c;
}

/// Line field of a damped Jacobi solution along a path, sampled uniformly on [0, P].
inline LineField section_from_solution(const std::shared_ptr<const DampedSolution>& z, double P, std::size_t n) {
    LineField f;
    auto eval = [z](double t) { return slope_from_damped(z->z(t), z->dz(t), z->path().at(t).vlam); };
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = P * static_cast<double>(i) / static_cast<double>(n);
        f.t.push_back(t);
        f.r.push_back(eval(t));
    }
    f.resample = eval;
    return f;
}

struct MaslovCount {
    int nu = 0;              // winding degree of the section
    int card_P = 0;          // infinity-crossings (transversal zeros of y) per period
    bool ok = false;         // nu == card_P and nu >= 0
    double invariance_defect = 0;
};

/// Counting identity nu = |P| for a flow-invariant section along a closed orbit.
inline MaslovCount maslov_counting_check(const ClosedOrbitNearH& orbit, const LineField& section,
                                         double invariance_tol = 1e-6) {
    const double P = orbit.period;
    if (section.t.empty() || std::abs(section.t.front()) > 1e-12 || std::abs(section.t.back() - P) > 1e-9)
        throw PreconditionError("section must be sampled on [0, P]");
    const double r0 = section.r.front();
    const double vl0 = orbit.orbit->at(0).vlam;
    const double z0 = std::isinf(r0) ? 0.0 : 1.0;
    const double dz0 = std::isinf(r0) ? 1.0 : -(r0 + 0.5 * vl0);
    auto z = std::make_shared<const DampedSolution>(damped_solve(orbit.orbit, z0, dz0, 0.0, P));
    MaslovCount out;
    for (std::size_t i = 0; i < section.t.size(); ++i) {
        const double t = section.t[i];
        const double r = slope_from_damped(z->z(t), z->dz(t), orbit.orbit->at(t).vlam);
        out.invariance_defect = std::max(out.invariance_defect, std::abs(m_map(r) - m_map(section.r[i])));
    }
    if (out.invariance_defect > invariance_tol) throw PreconditionError("section is not flow-invariant");

    LineField propagated = section;
    propagated.resample = [z](double t) { return slope_from_damped(z->z(t), z->dz(t), z->path().at(t).vlam); };
    out.nu = winding_degree(propagated).degree;

    const auto zeros = detail::sign_changes(*z, 0.0, P, 1e-10);
    for (double t : zeros) {
        if (t >= P - 1e-9) continue;  // the crossing at P is the one at 0
        bool inside = false;
        for (const auto& [a, b] : orbit.marked) inside = inside || (t >= a && t <= b);
        if (!inside) throw PreconditionError("section crossing lies outside the marked intervals");
        if (std::abs(z->dz(t)) < 1e-8) throw Error("tangential crossing of the cohorizontal direction");
        ++out.card_P;
    }
    if (z0 == 0.0) ++out.card_P;  // crossing at t = 0 itself
    out.ok = out.nu == out.card_P && out.nu >= 0;
    return out;
}

} // namespace thermoflow
