#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "thermoflow/thermoflow.hpp"

namespace tfx {

using namespace thermoflow;

/// u = a cos(2 pi q1 / L1) with exact partials.
inline Metric cosine_torus(double a = 0.1, double L1 = 1.0, double L2 = 1.0) {
    const double k = two_pi / L1;
    return Metric::conformal_torus(L1, L2, ConformalFactor::closed_form([a, k](double q1, double) {
        Jet2 j;
        j.v = a * std::cos(k * q1);
        j.d1 = -a * k * std::sin(k * q1);
        j.d11 = -a * k * k * std::cos(k * q1);
        return j;
    }));
}

/// u = a cos(2 pi q1) + b sin(2 pi (q1 + q2)), depends on both coordinates.
inline Metric mixed_torus(double a = 0.1, double b = 0.05) {
    return Metric::conformal_torus(1.0, 1.0, ConformalFactor::closed_form([a, b](double q1, double q2) {
        const double k = two_pi;
        const double s = std::sin(k * (q1 + q2)), c = std::cos(k * (q1 + q2));
        Jet2 j;
        j.v = a * std::cos(k * q1) + b * s;
        j.d1 = -a * k * std::sin(k * q1) + b * k * c;
        j.d2 = b * k * c;
        j.d11 = -a * k * k * std::cos(k * q1) - b * k * k * s;
        j.d12 = -b * k * k * s;
        j.d22 = -b * k * k * s;
        return j;
    }));
}

/// Fiber mode k with coefficient amp * (1 + cos(2 pi (m1 q1 + m2 q2) + ph)) (complex amp).
inline FourierGenerator::Mode trig_mode(int k, std::complex<double> amp, int m1, int m2, double ph) {
    return {k, [=](double q1, double q2) {
                const double arg = two_pi * (m1 * q1 + m2 * q2) + ph;
                const double c = std::cos(arg), s = std::sin(arg);
                return CJet1{amp * (1 + 0.5 * c), amp * (-0.5 * two_pi * m1 * s), amp * (-0.5 * two_pi * m2 * s)};
            }};
}

/// Random generator with odd modes only (reversible) or with an even mode added.
inline std::shared_ptr<FourierGenerator> random_generator(std::mt19937_64& rng, bool reversible) {
    std::uniform_real_distribution<double> U(-0.3, 0.3), P(0, two_pi);
    std::uniform_int_distribution<int> M(-1, 1);
    std::vector<FourierGenerator::Mode> modes;
    modes.push_back(trig_mode(1, {U(rng), U(rng)}, M(rng), M(rng), P(rng)));
    modes.push_back(trig_mode(3, {0.3 * U(rng), 0.3 * U(rng)}, M(rng), M(rng), P(rng)));
    if (!reversible) {
        const double c0 = 0.2 + std::abs(U(rng));
        modes.push_back({0, [c0](double, double) { return CJet1{c0, 0, 0}; }});
        modes.push_back(trig_mode(2, {U(rng), U(rng)}, M(rng), M(rng), P(rng)));
    }
    return std::make_shared<FourierGenerator>(std::move(modes));
}

/// lambda = sin(theta) = c_1 e^{i theta} + conj with c_1 = -i/2.
inline std::shared_ptr<FourierGenerator> sin_theta() {
    return std::make_shared<FourierGenerator>(std::vector<FourierGenerator::Mode>{
        {1, [](double, double) { return CJet1{cplx(0, -0.5), 0, 0}; }}});
}

/// lambda = c(q1) cos(theta) with c = cos(2 pi q1): c_1 = c/2.
inline std::shared_ptr<FourierGenerator> cos_q1_cos_theta() {
    return std::make_shared<FourierGenerator>(std::vector<FourierGenerator::Mode>{
        {1, [](double q1, double) {
             return CJet1{0.5 * std::cos(two_pi * q1), -0.5 * two_pi * std::sin(two_pi * q1), 0};
         }}});
}

inline double pi() { return std::numbers::pi; }

} // namespace tfx
