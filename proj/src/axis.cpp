// SPDX-License-Identifier: Apache-2.0
#include "isac/axis.hpp"

#include <cmath>
#include <limits>

namespace isac
{
const char *axis_name(AxisKind k)
{
    switch (k)
    {
    case AxisKind::Angle:
        return "angle";
    case AxisKind::Delay:
        return "delay";
    case AxisKind::Doppler:
        return "doppler";
    }
    return "?";
}

double ManifoldAxis::to_u(double param) const
{
    switch (kind)
    {
    case AxisKind::Angle:
        return scale * std::sin(deg2rad(param));
    case AxisKind::Delay:
        return scale * param;
    case AxisKind::Doppler:
        return -scale * param;
    }
    return 0.0;
}

double ManifoldAxis::from_u(double u) const
{
    switch (kind)
    {
    case AxisKind::Angle: {
        const double w = u - std::floor(u + 0.5); // [-0.5, 0.5)
        const double s = w / scale;
        if (std::abs(s) > 1.0)
            return std::numeric_limits<double>::quiet_NaN();
        return rad2deg(std::asin(s));
    }
    case AxisKind::Delay:
        return (u - std::floor(u)) / scale;
    case AxisKind::Doppler: {
        // nu in [-1/(2Ts), 1/(2Ts))
        const double w = -u;
        return (w - std::floor(w + 0.5)) / scale;
    }
    }
    return 0.0;
}

CVector ManifoldAxis::steering(double param, Eigen::Index len) const
{
    const double u = to_u(param);
    CVector a(len);
    for (Eigen::Index i = 0; i < len; ++i)
        a(i) = std::polar(1.0, -2.0 * kPi * static_cast<double>(i) * u);
    return a;
}

double ManifoldAxis::domain_lo() const
{
    switch (kind)
    {
    case AxisKind::Angle:
        return -90.0;
    case AxisKind::Delay:
        return 0.0;
    case AxisKind::Doppler:
        return -0.5 / scale;
    }
    return 0.0;
}

double ManifoldAxis::domain_hi() const
{
    switch (kind)
    {
    case AxisKind::Angle:
        return 90.0;
    case AxisKind::Delay:
        return 1.0 / scale;
    case AxisKind::Doppler:
        return 0.5 / scale;
    }
    return 0.0;
}

double ManifoldAxis::resolution(Eigen::Index len) const
{
    const double du = 1.0 / static_cast<double>(len);
    if (kind == AxisKind::Angle)
        return rad2deg(std::asin(std::min(1.0, du / scale)));
    return du / scale;
}

std::vector<double> ManifoldAxis::default_grid(Eigen::Index len) const
{
    if (kind == AxisKind::Angle)
        return linspace(-90.0, 90.0, 1801);
    const auto n = static_cast<std::size_t>(8 * len);
    const double step = (domain_hi() - domain_lo()) / static_cast<double>(n);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = domain_lo() + step * static_cast<double>(i);
    return g;
}

std::vector<double> linspace(double lo, double hi, std::size_t n)
{
    std::vector<double> g(n);
    if (n == 1)
        g[0] = lo;
    for (std::size_t i = 0; n > 1 && i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}
} // namespace isac
