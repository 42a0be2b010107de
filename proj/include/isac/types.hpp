// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace isac
{
using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 2.99792458e8;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Parameter outside its physical or unambiguous domain.
class DomainError : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

// Estimator could not produce the requested result (rank loss, too few roots, ...).
class EstimationError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};
} // namespace isac
