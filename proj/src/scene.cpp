// SPDX-License-Identifier: Apache-2.0
#include "isac/scene.hpp"
#include "isac/ofdm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace isac
{
void ArrayGeometry::validate() const
{
    if (num_elements < 2)
        throw std::invalid_argument("ArrayGeometry: need at least 2 elements");
    if (!(spacing_wavelengths > 0.0))
        throw std::invalid_argument("ArrayGeometry: spacing must be positive");
}

double ArrayGeometry::position(std::size_t m) const
{
    if (reference == ArrayReference::FirstElement)
        return static_cast<double>(m);
    return static_cast<double>(m) - 0.5 * static_cast<double>(num_elements - 1);
}

double ArrayGeometry::max_abs_position() const
{
    return std::max(std::abs(position(0)), std::abs(position(num_elements - 1)));
}

void Carrier::validate() const
{
    if (!(frequency_hz > 0.0))
        throw std::invalid_argument("Carrier: frequency must be positive");
}

CVector steer_far(const ArrayGeometry &geom, double angle_deg)
{
    geom.validate();
    if (!(std::abs(angle_deg) <= 90.0))
        throw DomainError("steer_far: angle outside [-90, 90] deg");
    const double u = geom.spacing_wavelengths * std::sin(deg2rad(angle_deg));
    CVector a(static_cast<Eigen::Index>(geom.num_elements));
    for (std::size_t m = 0; m < geom.num_elements; ++m)
        a(static_cast<Eigen::Index>(m)) = std::polar(1.0, -2.0 * kPi * geom.position(m) * u);
    return a;
}

CVector steer_near_exact(const ArrayGeometry &geom, const Carrier &carrier, double angle_deg, double range_m)
{
    geom.validate();
    carrier.validate();
    if (!(std::abs(angle_deg) <= 90.0))
        throw DomainError("steer_near_exact: angle outside [-90, 90] deg");
    const double lambda = carrier.wavelength();
    const double d = geom.spacing_wavelengths * lambda;
    if (!(range_m > geom.max_abs_position() * d))
        throw DomainError("steer_near_exact: range inside the array aperture");
    const double s = std::sin(deg2rad(angle_deg));
    const double k = 2.0 * kPi / lambda;
    CVector a(static_cast<Eigen::Index>(geom.num_elements));
    for (std::size_t m = 0; m < geom.num_elements; ++m)
    {
        const double ed = geom.position(m) * d;
        const double rm = std::sqrt(range_m * range_m - 2.0 * ed * range_m * s + ed * ed);
        // r_m - r without cancellation
        const double diff = (ed * ed - 2.0 * ed * range_m * s) / (rm + range_m);
        a(static_cast<Eigen::Index>(m)) = std::polar(1.0, k * diff);
    }
    return a;
}

CVector steer_near_fresnel(const ArrayGeometry &geom, double omega, double psi)
{
    geom.validate();
    CVector a(static_cast<Eigen::Index>(geom.num_elements));
    for (std::size_t m = 0; m < geom.num_elements; ++m)
    {
        const double e = geom.position(m);
        a(static_cast<Eigen::Index>(m)) = std::polar(1.0, omega * e + psi * e * e);
    }
    return a;
}

FresnelPhase fresnel_phase(const ArrayGeometry &geom, const Carrier &carrier, double angle_deg, double range_m)
{
    if (!(range_m > 0.0))
        throw DomainError("fresnel_phase: range must be positive");
    const double s = geom.spacing_wavelengths;
    const double th = deg2rad(angle_deg);
    const double c = std::cos(th);
    return {-2.0 * kPi * s * std::sin(th), kPi * s * s * carrier.wavelength() * c * c / range_m};
}

AngleRange fresnel_inverse(const ArrayGeometry &geom, const Carrier &carrier, double omega, double psi)
{
    const double s = geom.spacing_wavelengths;
    double x = -omega / (2.0 * kPi * s);
    x = std::clamp(x, -1.0, 1.0);
    const double th = std::asin(x);
    const double c = std::cos(th);
    const double r = psi > 0.0 ? kPi * s * s * carrier.wavelength() * c * c / psi
                               : std::numeric_limits<double>::infinity();
    return {rad2deg(th), r};
}

CVector steer(SteeringKind kind, const ArrayGeometry &geom, const Carrier &carrier, double angle_deg, double range_m)
{
    switch (kind)
    {
    case SteeringKind::FarField:
        return steer_far(geom, angle_deg);
    case SteeringKind::NearFieldExact:
        return steer_near_exact(geom, carrier, angle_deg, range_m);
    case SteeringKind::NearFieldFresnel: {
        const FresnelPhase f = fresnel_phase(geom, carrier, angle_deg, range_m);
        return steer_near_fresnel(geom, f.omega, f.psi);
    }
    }
    throw std::logic_error("steer: unknown model");
}

double rayleigh_distance(const ArrayGeometry &geom, const Carrier &carrier)
{
    const double lambda = carrier.wavelength();
    const double aperture = static_cast<double>(geom.num_elements - 1) * geom.spacing_wavelengths * lambda;
    return 2.0 * aperture * aperture / lambda;
}

double delay_from_range(double range_m) { return 2.0 * range_m / kSpeedOfLight; }
double range_from_delay(double tau_s) { return tau_s * kSpeedOfLight / 2.0; }

double doppler_from_velocity(double velocity_mps, const Carrier &carrier)
{
    return 2.0 * velocity_mps / carrier.wavelength();
}

double velocity_from_doppler(double doppler_hz, const Carrier &carrier)
{
    return doppler_hz * carrier.wavelength() / 2.0;
}

TargetUnits units(const Target &target, const Carrier &carrier, const OfdmConfig &ofdm)
{
    carrier.validate();
    const long double c = kSpeedOfLight;
    const long double lambda = c / static_cast<long double>(carrier.frequency_hz);
    TargetUnits u;
    u.tau_s = 2.0L * static_cast<long double>(target.range_m) / c;
    u.doppler_hz = 2.0L * static_cast<long double>(target.velocity_mps) / lambda;
    if (u.tau_s < 0.0L || u.tau_s >= 1.0L / static_cast<long double>(ofdm.subcarrier_spacing_hz))
        throw DomainError("units: delay outside the unambiguous range [0, 1/df)");
    if (std::fabs(u.doppler_hz) >= 1.0L / (2.0L * static_cast<long double>(ofdm.symbol_period())))
        throw DomainError("units: Doppler outside the unambiguous band");
    return u;
}

RangeVelocity units_inverse(const TargetUnits &u, const Carrier &carrier)
{
    const long double c = kSpeedOfLight;
    const long double lambda = c / static_cast<long double>(carrier.frequency_hz);
    return {static_cast<double>(u.tau_s * c / 2.0L), static_cast<double>(u.doppler_hz * lambda / 2.0L)};
}
} // namespace isac
