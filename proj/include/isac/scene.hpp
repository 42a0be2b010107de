// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isac/types.hpp"

namespace isac
{
enum class ArrayReference
{
    FirstElement,  // eps_m = m (0-based)
    CenterElement, // eps_m = m - (M-1)/2 (0-based)
};

struct ArrayGeometry
{
    std::size_t num_elements = 16;
    double spacing_wavelengths = 0.5; // d / lambda
    ArrayReference reference = ArrayReference::FirstElement;

    void validate() const;
    double position(std::size_t m) const; // eps_m in element units
    double max_abs_position() const;
};

struct Carrier
{
    double frequency_hz = 28e9;

    double wavelength() const { return kSpeedOfLight / frequency_hz; }
    void validate() const;
};

struct Target
{
    double angle_deg = 0.0;
    double range_m = 1.0;
    double velocity_mps = 0.0;
    cd gain{1.0, 0.0};
};

enum class SteeringKind
{
    FarField,
    NearFieldExact,
    NearFieldFresnel,
};

struct Scene
{
    ArrayGeometry array;
    Carrier carrier;
    std::vector<Target> targets;
};

CVector steer_far(const ArrayGeometry &geom, double angle_deg);
CVector steer_near_exact(const ArrayGeometry &geom, const Carrier &carrier, double angle_deg, double range_m);
CVector steer_near_fresnel(const ArrayGeometry &geom, double omega, double psi);

struct FresnelPhase
{
    double omega = 0.0;
    double psi = 0.0;
};

FresnelPhase fresnel_phase(const ArrayGeometry &geom, const Carrier &carrier, double angle_deg, double range_m);

struct AngleRange
{
    double angle_deg = 0.0;
    double range_m = 0.0;
};

// Inverse of fresnel_phase. psi <= 0 maps to an infinite range.
AngleRange fresnel_inverse(const ArrayGeometry &geom, const Carrier &carrier, double omega, double psi);

// Steering for a target under the given model (Fresnel built from the target's angle and range).
CVector steer(SteeringKind kind, const ArrayGeometry &geom, const Carrier &carrier, double angle_deg, double range_m);

double rayleigh_distance(const ArrayGeometry &geom, const Carrier &carrier);

// Two-way monostatic conversions.
double delay_from_range(double range_m);
double range_from_delay(double tau_s);
double doppler_from_velocity(double velocity_mps, const Carrier &carrier);
double velocity_from_doppler(double doppler_hz, const Carrier &carrier);

// Delay and Doppler of a target, kept in extended precision so the inverse
// reproduces range and velocity bit for bit.
struct TargetUnits
{
    long double tau_s = 0.0L;
    long double doppler_hz = 0.0L;
};

struct RangeVelocity
{
    double range_m = 0.0;
    double velocity_mps = 0.0;
};

struct OfdmConfig;

// Throws DomainError when tau >= 1/df or |doppler| >= 1/(2 Ts).
TargetUnits units(const Target &target, const Carrier &carrier, const OfdmConfig &ofdm);
RangeVelocity units_inverse(const TargetUnits &u, const Carrier &carrier);
} // namespace isac
