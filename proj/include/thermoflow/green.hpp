#pragma once

// Boundary-value shooting for z_T (z_T(0) = 1, z_T(T) = 0), Green-bundle
// limits of z_T'(0), and a finite-time domination heuristic.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "thermoflow/errors.hpp"
#include "thermoflow/jacobi.hpp"

namespace thermoflow {

/// z_T = z1 + slope z2 with z1 = (1, 0), z2 = (0, 1) at t0.
struct ShootResult {
    double T = 0;          // signed horizon
    double t0 = 0;
    double slope = 0;      // z_T'(t0)
    std::shared_ptr<const DampedSolution> z1, z2;

    double z(double t) const { return z1->z(t) + slope * z2->z(t); }
    double dz(double t) const { return z1->dz(t) + slope * z2->dz(t); }
};

/// Linear shooting for z(t0) = 1, z(t0 + T) = 0; T < 0 shoots backward.
inline ShootResult shoot_zT(const PathPtr& path, double T, double t0 = 0.0,
                            const OdeOptions& opt = linear_ode_options()) {
    if (T == 0.0 || !std::isfinite(T)) throw DomainError("shooting horizon must be nonzero");
    const double t1 = t0 + T, lo = std::min(t0, t1), hi = std::max(t0, t1);
    ShootResult r;
    r.T = T;
    r.t0 = t0;
    r.z1 = std::make_shared<DampedSolution>(damped_solve(path, 1.0, 0.0, lo, hi, t0, opt));
    r.z2 = std::make_shared<DampedSolution>(damped_solve(path, 0.0, 1.0, lo, hi, t0, opt));
    // z2 vanishing inside (t0, t1) is a conjugate point to t0
    const auto zeros = detail::sign_changes(*r.z2, t0, t1, 1e-10, 1);
    if (!zeros.empty() && std::abs(zeros.front() - t0) < std::abs(T) * (1 - 1e-9))
        throw ConjugatePointError("conjugate point inside the shooting interval", zeros.front());
    double zmax = 0;
    for (double t : r.z2->grid()) zmax = std::max(zmax, std::abs(r.z2->z(t)));
    const double z2T = r.z2->z(t1);
    if (std::abs(z2T) < 1e-8 * std::max(zmax, 1e-300))
        throw ConjugatePointError("conjugate point at the shooting horizon (singular combination)", t1);
    r.slope = -r.z1->z(t1) / z2T;
    return r;
}

struct GreenReport {
    std::vector<double> T_list;
    std::vector<double> dzT_forward;   // z_T'(0)
    std::vector<double> dzT_backward;  // z_{-T}'(0)
    double u_s = 0, u_u = 0, gap = 0;
    double cauchy_defect = 0;          // largest of the last tail increments
    bool monotone_forward = false, monotone_backward = false;
    bool divergent = false;            // tail increments not contracting
    bool valid = false;
    std::optional<double> offending_horizon;
    std::string message;
};

namespace detail {

struct Extrapolation {
    double value = 0;
    double defect = 0;
    bool divergent = false;
};

/// Aitken delta-squared on the last three terms; falls back to the last term when
/// the second difference is negligible.
inline Extrapolation aitken_tail(const std::vector<double>& x) {
    Extrapolation e;
    const std::size_t n = x.size();
    e.value = x.back();
    if (n < 2) return e;
    e.defect = std::abs(x[n - 1] - x[n - 2]);
    if (n < 3) return e;
    const double d1 = x[n - 2] - x[n - 3], d2 = x[n - 1] - x[n - 2];
    e.defect = std::max(std::abs(d1), std::abs(d2));
    const double dd = d2 - d1;
    const double scale = std::max({std::abs(x[n - 1]), std::abs(x[n - 2]), std::abs(x[n - 3]), 1e-300});
    if (std::abs(dd) <= 1e-13 * scale) return e;
    if (std::abs(d1) > 0 && std::abs(d2) / std::abs(d1) >= 1.0) e.divergent = true;
    e.value = x[n - 1] - d2 * d2 / dd;
    return e;
}

inline bool strictly_monotone(const std::vector<double>& x) {
    if (x.size() < 2) return false;
    bool inc = true, dec = true;
    for (std::size_t i = 1; i < x.size(); ++i) {
        inc = inc && x[i] > x[i - 1];
        dec = dec && x[i] < x[i - 1];
    }
    return inc || dec;
}

} // namespace detail

inline std::vector<double> default_green_horizons() { return {5, 10, 20, 40}; }

/// Shoot forward and backward over T_list and extrapolate the Green slopes.
inline GreenReport green_limits(const PathPtr& path, const std::vector<double>& T_list = default_green_horizons(),
                                double t0 = 0.0) {
    GreenReport rep;
    rep.T_list = T_list;
    for (std::size_t i = 0; i < T_list.size(); ++i) {
        if (!(T_list[i] > 0) || (i > 0 && !(T_list[i] > T_list[i - 1])))
            throw DomainError("green horizons must be positive and increasing");
    }
    if (T_list.empty()) throw DomainError("green horizons are empty");
    try {
        for (double T : T_list) {
            rep.dzT_forward.push_back(shoot_zT(path, T, t0).slope);
            rep.dzT_backward.push_back(shoot_zT(path, -T, t0).slope);
        }
    } catch (const ConjugatePointError& e) {
        rep.valid = false;
        rep.offending_horizon = e.horizon();
        rep.message = e.what();
        return rep;
    } catch (const IntegrationError& e) {
        rep.valid = false;
        rep.offending_horizon = e.last_good_time();
        rep.message = e.what();
        return rep;
    }
    const auto fw = detail::aitken_tail(rep.dzT_forward);
    const auto bw = detail::aitken_tail(rep.dzT_backward);
    rep.u_s = fw.value;
    rep.u_u = bw.value;
    rep.gap = std::abs(rep.u_s - rep.u_u);
    rep.cauchy_defect = std::max(fw.defect, bw.defect);
    rep.divergent = fw.divergent || bw.divergent;
    rep.monotone_forward = detail::strictly_monotone(rep.dzT_forward);
    rep.monotone_backward = detail::strictly_monotone(rep.dzT_backward);
    rep.valid = !rep.divergent;
    if (rep.divergent) rep.message = "extrapolated slopes do not converge";
    return rep;
}

/// Green limits along the orbit of v.
inline GreenReport green_limits(const Metric& g, const GeneratorPtr& lam, const UnitTangent& v,
                                const std::vector<double>& T_list = default_green_horizons()) {
    if (T_list.empty()) throw DomainError("green horizons are empty");
    const double Tm = T_list.back();
    return green_limits(integrate_flow(g, lam, v, -Tm, Tm), T_list);
}

enum class CertificateStatus { Positive, Negative, Inconclusive };

inline const char* to_string(CertificateStatus s) {
    switch (s) {
    case CertificateStatus::Positive: return "POSITIVE";
    case CertificateStatus::Negative: return "NEGATIVE";
    case CertificateStatus::Inconclusive: return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

struct CertificateRow {
    double q1 = 0, q2 = 0, theta = 0;
    double u_s = 0, u_u = 0, gap = 0;
    double rate = 0;  // max over {T/2, T} of log(product)/t
    CertificateStatus status = CertificateStatus::Inconclusive;
    GreenReport green;
};

struct DominationCertificate {
    std::vector<CertificateRow> rows;
    CertificateStatus status = CertificateStatus::Inconclusive;
    double T = 0, margin = 0;
    /// Finite-time numerical heuristic, not a proof of domination.
    static constexpr const char* disclaimer = "numerical heuristic, not a proof";
};

struct DominationOptions {
    double T = 10;
    double margin = 0.5;
    double gap_tolerance = 1e-6;
    std::vector<double> T_list = default_green_horizons();
};

namespace detail {

/// Sasaki size of the Jacobi field with damped data z at time t: y = m z,
/// y' = m (z' - (V lambda) z / 2), x = -y' - (V lambda) y.
inline double jacobi_norm(const DampedSolution& s, double t) {
    const auto c = s.path().at(t);
    const double y = s.y(t), dy = s.dy(t);
    const double x = -dy - c.vlam * y;
    return std::sqrt(x * x + (1 + c.lambda * c.lambda) * y * y);
}

} // namespace detail

/// Certificate row for one coefficient path (the path must cover [-max T_list, max(T_list, T)]).
inline CertificateRow certify_path(const PathPtr& path, const DominationOptions& opt) {
    if (!(opt.margin > 0) || !(opt.margin < 1)) throw DomainError("domination margin must lie in (0, 1)");
    CertificateRow row;
    row.green = green_limits(path, opt.T_list);
    row.u_s = row.green.u_s;
    row.u_u = row.green.u_u;
    row.gap = row.green.gap;
    if (!row.green.valid) {
        row.rate = std::numeric_limits<double>::quiet_NaN();
        row.status = CertificateStatus::Inconclusive;
        return row;
    }
    if (row.gap < opt.gap_tolerance) {
        row.rate = 0;
        row.status = CertificateStatus::Negative;
        return row;
    }
    const auto zs = damped_solve(path, 1.0, row.u_s, 0.0, opt.T);
    const auto zu = damped_solve(path, 1.0, row.u_u, 0.0, opt.T);
    const double ns0 = detail::jacobi_norm(zs, 0), nu0 = detail::jacobi_norm(zu, 0);
    double rate = -std::numeric_limits<double>::infinity();
    for (double t : {0.5 * opt.T, opt.T}) {
        const double prod = (detail::jacobi_norm(zs, t) / ns0) * (nu0 / detail::jacobi_norm(zu, t));
        rate = std::max(rate, std::log(prod) / t);
    }
    row.rate = rate;
    row.status = rate <= std::log(1 - opt.margin) ? CertificateStatus::Positive : CertificateStatus::Inconclusive;
    return row;
}

inline CertificateStatus combine(const std::vector<CertificateRow>& rows) {
    if (rows.empty()) return CertificateStatus::Inconclusive;
    bool all_pos = true;
    for (const auto& r : rows) {
        if (r.status == CertificateStatus::Negative) return CertificateStatus::Negative;
        all_pos = all_pos && r.status == CertificateStatus::Positive;
    }
    return all_pos ? CertificateStatus::Positive : CertificateStatus::Inconclusive;
}

/// Domination heuristic over sample unit tangents of a torus system.
inline DominationCertificate domination_certificate(const Metric& g, const GeneratorPtr& lam,
                                                    const std::vector<UnitTangent>& samples,
                                                    const DominationOptions& opt = {}) {
    DominationCertificate cert;
    cert.T = opt.T;
    cert.margin = opt.margin;
    if (opt.T_list.empty()) throw DomainError("green horizons are empty");
    const double Tm = opt.T_list.back();
    for (const auto& v : samples) {
        const auto traj = integrate_flow(g, lam, v, -Tm, std::max(Tm, opt.T));
        CertificateRow row = certify_path(traj, opt);
        const auto s = normalize(g, v);
        if (const auto* t = std::get_if<TorusTangent>(&s)) {
            row.q1 = t->q1;
            row.q2 = t->q2;
            row.theta = t->theta;
        }
        cert.rows.push_back(std::move(row));
    }
    cert.status = combine(cert.rows);
    return cert;
}

/// Same heuristic over synthetic coefficient paths.
inline DominationCertificate domination_certificate(const std::vector<PathPtr>& paths,
                                                    const DominationOptions& opt = {}) {
    DominationCertificate cert;
    cert.T = opt.T;
    cert.margin = opt.margin;
    for (const auto& p : paths) cert.rows.push_back(certify_path(p, opt));
    cert.status = combine(cert.rows);
    return cert;
}

} // namespace thermoflow
