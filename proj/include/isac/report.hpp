// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isac/frameworks.hpp"
#include "isac/spectrum.hpp"

#include <json.hpp>
#include <ostream>
#include <string>

namespace isac
{
// param,power
void write_spectrum_csv(std::ostream &os, const Spectrum1D &s);
// rank,param,power
void write_peaks_csv(std::ostream &os, const PeakSet &p);
// target_idx,theta_deg,tau_s,doppler_hz,score,framework
void write_estimates_csv(std::ostream &os, const EstimateSet &e);
// x,y,power (long format, for small 2D grids)
void write_spectrum2d_csv(std::ostream &os, const Spectrum2D &s);

// Binary dump: "ISACSPEC", u32 ndim, then per axis u32 length, u32 name length,
// name bytes and float64 grid values; then float32 power in row-major order.
// Little-endian throughout.
void write_spectrum_dump(const std::string &path, const Spectrum2D &s);
void write_spectrum_dump(const std::string &path, const Spectrum3D &s);

struct SpectrumDump
{
    std::vector<std::string> names;
    std::vector<std::vector<double>> grids;
    std::vector<float> power;
};
SpectrumDump read_spectrum_dump(const std::string &path);

// Binary PPM raster of 10 log10(power / max) clipped to [-40, 0] dB. x runs
// down the rows, y along the columns; each cell is drawn as scale x scale pixels.
void write_heatmap_ppm(const std::string &path, const Spectrum2D &s, int scale = 0);

// Line plot of one or more series over a shared x grid, in dB re the global max.
void write_series_ppm(const std::string &path, const std::vector<double> &x,
                      const std::vector<std::vector<double>> &series, int width = 800, int height = 400);

const char *git_describe();

// Writes {"git": ..., "parameters": params} as indented JSON.
void write_manifest(const std::string &path, const nlohmann::json &params);

void ensure_directory(const std::string &path);
} // namespace isac
