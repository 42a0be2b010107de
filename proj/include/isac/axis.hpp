// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isac/types.hpp"

namespace isac
{
enum class AxisKind
{
    Angle,
    Delay,
    Doppler,
};

const char *axis_name(AxisKind k);

// Vandermonde manifold of one tensor axis. Entry i of the steering vector is
// exp(-j 2 pi i u) with the normalized frequency
//   Angle:   u = (d/lambda) sin(theta)   (theta in degrees)
//   Delay:   u = df * tau
//   Doppler: u = -Ts * nu
struct ManifoldAxis
{
    AxisKind kind = AxisKind::Angle;
    double scale = 0.5; // d/lambda, df or Ts

    static ManifoldAxis angle(double spacing_wavelengths) { return {AxisKind::Angle, spacing_wavelengths}; }
    static ManifoldAxis delay(double subcarrier_spacing_hz) { return {AxisKind::Delay, subcarrier_spacing_hz}; }
    static ManifoldAxis doppler(double symbol_period_s) { return {AxisKind::Doppler, symbol_period_s}; }

    double to_u(double param) const;
    // Principal-value inverse; returns NaN for u with no valid parameter (|sin| > 1).
    double from_u(double u) const;
    CVector steering(double param, Eigen::Index len) const;

    double domain_lo() const;
    double domain_hi() const;
    // Rayleigh cell of a len-element aperture, in parameter units (at broadside for angle).
    double resolution(Eigen::Index len) const;
    // Default search grid: 0.1 deg for angle, 1/(8 len) cells for delay and Doppler.
    std::vector<double> default_grid(Eigen::Index len) const;
};

std::vector<double> linspace(double lo, double hi, std::size_t n);
} // namespace isac
