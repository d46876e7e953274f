#pragma once

// Truncated double Fourier series on a periodic rectangle, grid <-> series
// transforms (FFTW) and the periodic Poisson solve used by the Gaussian
// thermostat constructor.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include <fftw3.h>

#include "thermoflow/errors.hpp"

namespace thermoflow {

using cplx = std::complex<double>;

/// Value and partial derivatives up to second order of a complex function of (q1, q2).
struct CJet2 {
    cplx v{}, d1{}, d2{}, d11{}, d12{}, d22{};
};

/// Real counterpart of CJet2.
struct Jet2 {
    double v = 0, d1 = 0, d2 = 0, d11 = 0, d12 = 0, d22 = 0;
};

inline Jet2 real_part(const CJet2& j) {
    return {j.v.real(), j.d1.real(), j.d2.real(), j.d11.real(), j.d12.real(), j.d22.real()};
}

struct FourierMode {
    int k1 = 0;
    int k2 = 0;
    cplx amplitude{};
};

/// f(q1, q2) = sum_m a_m exp(2 pi i (k1 q1 / L1 + k2 q2 / L2)).
class FourierSeries2D {
public:
    FourierSeries2D() = default;
    FourierSeries2D(double L1, double L2, std::vector<FourierMode> modes)
        : L1_(L1), L2_(L2), modes_(std::move(modes)) {
        if (!(L1 > 0) || !(L2 > 0)) throw DomainError("Fourier series periods must be positive");
    }

    double period1() const { return L1_; }
    double period2() const { return L2_; }
    const std::vector<FourierMode>& modes() const { return modes_; }

    CJet2 jet(double q1, double q2) const {
        CJet2 j;
        const double w1 = 2 * std::numbers::pi / L1_, w2 = 2 * std::numbers::pi / L2_;
        for (const auto& m : modes_) {
            const double a1 = w1 * m.k1, a2 = w2 * m.k2;
            const double ph = a1 * q1 + a2 * q2;
            const cplx e = m.amplitude * cplx(std::cos(ph), std::sin(ph));
            const cplx i{0, 1};
            j.v += e;
            j.d1 += i * a1 * e;
            j.d2 += i * a2 * e;
            j.d11 += -a1 * a1 * e;
            j.d12 += -a1 * a2 * e;
            j.d22 += -a2 * a2 * e;
        }
        return j;
    }

    cplx operator()(double q1, double q2) const { return jet(q1, q2).v; }

    /// Flat Laplacian applied mode-wise.
    FourierSeries2D laplacian() const {
        FourierSeries2D out(L1_, L2_, modes_);
        for (auto& m : out.modes_) m.amplitude *= -wavenumber_sq(m.k1, m.k2);
        return out;
    }

    double wavenumber_sq(int k1, int k2) const {
        const double a1 = 2 * std::numbers::pi * k1 / L1_, a2 = 2 * std::numbers::pi * k2 / L2_;
        return a1 * a1 + a2 * a2;
    }

private:
    double L1_ = 1, L2_ = 1;
    std::vector<FourierMode> modes_;
};

/// Periodic sample grid, row-major in (i1, i2) with q = (i1 L1 / n1, i2 L2 / n2).
struct PeriodicGrid {
    std::size_t n1 = 0, n2 = 0;
    double L1 = 1, L2 = 1;
    std::vector<double> values;

    double q1(std::size_t i) const { return L1 * static_cast<double>(i) / static_cast<double>(n1); }
    double q2(std::size_t j) const { return L2 * static_cast<double>(j) / static_cast<double>(n2); }
    double& at(std::size_t i, std::size_t j) { return values[i * n2 + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * n2 + j]; }
};

namespace detail {

inline bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

inline int signed_index(std::size_t k, std::size_t n) {
    return k <= n / 2 ? static_cast<int>(k) : static_cast<int>(k) - static_cast<int>(n);
}

/// Forward 2D DFT of real samples, normalized so that coefficients are Fourier amplitudes.
inline std::vector<cplx> forward_dft(const PeriodicGrid& g) {
    const std::size_t n = g.n1 * g.n2;
    std::vector<cplx> data(n);
    for (std::size_t i = 0; i < n; ++i) data[i] = g.values[i];
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(g.n1), static_cast<int>(g.n2), p, p,
                                      FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    for (auto& c : data) c /= static_cast<double>(n);
    return data;
}

} // namespace detail

/// Transform a real periodic grid into its trigonometric interpolant. Nyquist
/// modes are split symmetrically so the series stays real-valued; amplitudes
/// below `prune` (relative to the largest) are dropped.
inline FourierSeries2D series_from_grid(const PeriodicGrid& g, double prune = 1e-15) {
    if (!detail::is_power_of_two(g.n1) || !detail::is_power_of_two(g.n2))
        throw DomainError("spectral grid sizes must be powers of two");
    if (g.values.size() != g.n1 * g.n2) throw DomainError("grid value count does not match its shape");
    const auto coeffs = detail::forward_dft(g);
    double amax = 0;
    for (const auto& c : coeffs) amax = std::max(amax, std::abs(c));
    std::vector<FourierMode> modes;
    for (std::size_t a = 0; a < g.n1; ++a) {
        for (std::size_t b = 0; b < g.n2; ++b) {
            const cplx c = coeffs[a * g.n2 + b];
            if (std::abs(c) <= prune * amax) continue;
            const int k1 = detail::signed_index(a, g.n1), k2 = detail::signed_index(b, g.n2);
            const bool nyq1 = a == g.n1 / 2, nyq2 = b == g.n2 / 2;
            if (nyq1 || nyq2) {
                // cos(pi n q / L) sampled on the grid: split between +k and -k
                const double split = (nyq1 ? 0.5 : 1.0) * (nyq2 ? 0.5 : 1.0);
                for (int s1 : {1, -1}) {
                    if (!nyq1 && s1 == -1) continue;
                    for (int s2 : {1, -1}) {
                        if (!nyq2 && s2 == -1) continue;
                        modes.push_back({nyq1 ? s1 * k1 : k1, nyq2 ? s2 * k2 : k2, c * split});
                    }
                }
            } else {
                modes.push_back({k1, k2, c});
            }
        }
    }
    return FourierSeries2D(g.L1, g.L2, std::move(modes));
}

template <class Fn>
PeriodicGrid sample_grid(std::size_t n1, std::size_t n2, double L1, double L2, Fn&& fn) {
    PeriodicGrid g{n1, n2, L1, L2, std::vector<double>(n1 * n2)};
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) g.at(i, j) = fn(g.q1(i), g.q2(j));
    return g;
}

/// Trapezoidal (spectrally accurate for periodic integrands) mean over the grid.
inline double grid_mean(const PeriodicGrid& g) {
    double s = 0;
    for (double v : g.values) s += v;
    return s / static_cast<double>(g.values.size());
}

struct PoissonSolution {
    FourierSeries2D potential;      // zero-mean G with Lap G = rhs - mean(rhs)
    double rhs_mean = 0;            // removed mean (solvability defect)
    double max_mode_residual = 0;   // max_k | -|k|^2 G_k - rhs_k | over k != 0
};

/// Solve the flat periodic Poisson problem Lap G = rhs spectrally.
inline PoissonSolution solve_poisson(const PeriodicGrid& rhs) {
    if (!detail::is_power_of_two(rhs.n1) || !detail::is_power_of_two(rhs.n2))
        throw DomainError("spectral grid sizes must be powers of two");
    const auto coeffs = detail::forward_dft(rhs);
    FourierSeries2D probe(rhs.L1, rhs.L2, {});
    std::vector<FourierMode> modes;
    PoissonSolution sol;
    sol.rhs_mean = coeffs[0].real();
    for (std::size_t a = 0; a < rhs.n1; ++a) {
        for (std::size_t b = 0; b < rhs.n2; ++b) {
            if (a == 0 && b == 0) continue;
            const int k1 = detail::signed_index(a, rhs.n1), k2 = detail::signed_index(b, rhs.n2);
            const cplx c = coeffs[a * rhs.n2 + b];
            if (std::abs(c) == 0.0) continue;
            const double w = probe.wavenumber_sq(k1, k2);
            const cplx g = -c / w;
            sol.max_mode_residual = std::max(sol.max_mode_residual, std::abs(-w * g - c));
            const bool nyq1 = a == rhs.n1 / 2, nyq2 = b == rhs.n2 / 2;
            if (nyq1 || nyq2) {
                const double split = (nyq1 ? 0.5 : 1.0) * (nyq2 ? 0.5 : 1.0);
                for (int s1 : {1, -1}) {
                    if (!nyq1 && s1 == -1) continue;
                    for (int s2 : {1, -1}) {
                        if (!nyq2 && s2 == -1) continue;
                        modes.push_back({nyq1 ? s1 * k1 : k1, nyq2 ? s2 * k2 : k2, g * split});
                    }
                }
            } else {
                modes.push_back({k1, k2, g});
            }
        }
    }
    sol.potential = FourierSeries2D(rhs.L1, rhs.L2, std::move(modes));
    return sol;
}

} // namespace thermoflow
