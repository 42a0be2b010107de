// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isac/axis.hpp"

#include <array>
#include <string>

namespace isac
{
struct Spectrum1D
{
    std::vector<double> grid; // strictly increasing
    std::vector<double> power;
    AxisKind axis = AxisKind::Angle;
    std::string algorithm;
    bool rank_deficient = false;
};

struct Peak
{
    double param = 0.0;
    double power = 0.0;
    std::size_t index = 0;
};

struct PeakSet
{
    std::vector<Peak> peaks; // descending power
    bool shortfall = false;

    std::vector<double> params() const;
};

struct PeakOptions
{
    std::size_t exclusion_cells = 1;
    bool interpolate = true;
    // Drop local maxima below this fraction of the strongest one (0 keeps all).
    double min_relative_power = 0.0;
};

PeakSet find_peaks(const Spectrum1D &spec, std::size_t K, const PeakOptions &opt = {});

// Exclusion radius in grid cells equal to one Rayleigh cell of a len-element aperture.
std::size_t rayleigh_exclusion_cells(const ManifoldAxis &axis, Eigen::Index len, const std::vector<double> &grid);

// power[ix * ny + iy]
struct Spectrum2D
{
    std::vector<double> x, y;
    std::vector<double> power;
    std::string x_name, y_name, algorithm;

    double at(std::size_t ix, std::size_t iy) const { return power[ix * y.size() + iy]; }
};

// power[(ix * ny + iy) * nz + iz]
struct Spectrum3D
{
    std::vector<double> x, y, z;
    std::vector<double> power;
    std::string x_name, y_name, z_name, algorithm;

    double at(std::size_t ix, std::size_t iy, std::size_t iz) const
    {
        return power[(ix * y.size() + iy) * z.size() + iz];
    }
};

struct GridPeak
{
    std::vector<double> coords;
    std::vector<std::size_t> index;
    double power = 0.0;
};

// Greedy K largest local maxima (8/26-neighbourhood); two peaks must differ by at
// least excl[d] cells along some axis d.
std::vector<GridPeak> find_peaks_2d(const Spectrum2D &s, std::size_t K, std::size_t excl_x, std::size_t excl_y,
                                    double min_relative_power = 0.0, bool interpolate = true);
std::vector<GridPeak> find_peaks_3d(const Spectrum3D &s, std::size_t K, const std::array<std::size_t, 3> &excl,
                                    double min_relative_power = 0.0, bool interpolate = true);
} // namespace isac
