// SPDX-License-Identifier: Apache-2.0
#include "isac/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>

#ifndef ISAC_GIT_DESCRIBE
#define ISAC_GIT_DESCRIBE "unknown"
#endif

namespace isac
{
namespace
{
constexpr char kMagic[8] = {'I', 'S', 'A', 'C', 'S', 'P', 'E', 'C'};

template <class T> void put(std::ofstream &f, T v)
{
    static_assert(std::is_trivially_copyable_v<T>);
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    f.write(b, sizeof(T));
}

template <class T> T take(std::ifstream &f)
{
    char b[sizeof(T)];
    if (!f.read(b, sizeof(T)))
        throw std::runtime_error("spectrum dump: truncated file");
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

void write_dump(const std::string &path, const std::vector<std::pair<std::string, const std::vector<double> *>> &axes,
                const std::vector<double> &power)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    f.write(kMagic, 8);
    put<std::uint32_t>(f, static_cast<std::uint32_t>(axes.size()));
    for (const auto &[name, grid] : axes)
    {
        put<std::uint32_t>(f, static_cast<std::uint32_t>(grid->size()));
        put<std::uint32_t>(f, static_cast<std::uint32_t>(name.size()));
        f.write(name.data(), static_cast<std::streamsize>(name.size()));
        for (double g : *grid)
            put<double>(f, g);
    }
    for (double p : power)
        put<float>(f, static_cast<float>(p));
}

std::array<std::uint8_t, 3> colormap(double t)
{
    // dark blue -> cyan -> yellow -> white
    static const double stops[4][3] = {{0.05, 0.03, 0.25}, {0.0, 0.6, 0.8}, {0.95, 0.85, 0.1}, {1.0, 1.0, 1.0}};
    t = std::clamp(t, 0.0, 1.0) * 3.0;
    const int i = std::min(2, static_cast<int>(t));
    const double f = t - i;
    std::array<std::uint8_t, 3> c{};
    for (int k = 0; k < 3; ++k)
        c[static_cast<std::size_t>(k)] =
            static_cast<std::uint8_t>(std::lround(255.0 * (stops[i][k] + f * (stops[i + 1][k] - stops[i][k]))));
    return c;
}

double to_db(double p, double pmax)
{
    if (!(p > 0.0) || !(pmax > 0.0))
        return -40.0;
    return std::max(-40.0, 10.0 * std::log10(p / pmax));
}
} // namespace

void write_spectrum_csv(std::ostream &os, const Spectrum1D &s)
{
    os << "param,power\n" << std::setprecision(12);
    for (std::size_t i = 0; i < s.grid.size(); ++i)
        os << s.grid[i] << ',' << s.power[i] << '\n';
}

void write_peaks_csv(std::ostream &os, const PeakSet &p)
{
    os << "rank,param,power\n" << std::setprecision(12);
    for (std::size_t i = 0; i < p.peaks.size(); ++i)
        os << i << ',' << p.peaks[i].param << ',' << p.peaks[i].power << '\n';
}

void write_estimates_csv(std::ostream &os, const EstimateSet &e)
{
    os << "target_idx,theta_deg,tau_s,doppler_hz,score,framework\n" << std::setprecision(12);
    for (std::size_t i = 0; i < e.triples.size(); ++i)
    {
        const TripleEstimate &t = e.triples[i];
        os << i << ',' << t.angle_deg << ',' << t.tau_s << ',' << t.doppler_hz << ',' << t.score << ',' << e.framework
           << '\n';
    }
}

void write_spectrum2d_csv(std::ostream &os, const Spectrum2D &s)
{
    os << s.x_name << ',' << s.y_name << ",power\n" << std::setprecision(12);
    for (std::size_t i = 0; i < s.x.size(); ++i)
        for (std::size_t j = 0; j < s.y.size(); ++j)
            os << s.x[i] << ',' << s.y[j] << ',' << s.at(i, j) << '\n';
}

void write_spectrum_dump(const std::string &path, const Spectrum2D &s)
{
    write_dump(path, {{s.x_name, &s.x}, {s.y_name, &s.y}}, s.power);
}

void write_spectrum_dump(const std::string &path, const Spectrum3D &s)
{
    write_dump(path, {{s.x_name, &s.x}, {s.y_name, &s.y}, {s.z_name, &s.z}}, s.power);
}

SpectrumDump read_spectrum_dump(const std::string &path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open " + path);
    char magic[8];
    if (!f.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("spectrum dump: bad magic");
    SpectrumDump d;
    const auto ndim = take<std::uint32_t>(f);
    std::size_t total = 1;
    for (std::uint32_t a = 0; a < ndim; ++a)
    {
        const auto len = take<std::uint32_t>(f);
        const auto nlen = take<std::uint32_t>(f);
        std::string name(nlen, '\0');
        f.read(name.data(), nlen);
        std::vector<double> g(len);
        for (auto &v : g)
            v = take<double>(f);
        d.names.push_back(name);
        d.grids.push_back(std::move(g));
        total *= len;
    }
    d.power.resize(total);
    for (auto &v : d.power)
        v = take<float>(f);
    return d;
}

void write_heatmap_ppm(const std::string &path, const Spectrum2D &s, int scale)
{
    const int nx = static_cast<int>(s.x.size()), ny = static_cast<int>(s.y.size());
    if (nx == 0 || ny == 0)
        throw std::invalid_argument("write_heatmap_ppm: empty spectrum");
    if (scale <= 0)
        scale = std::max(1, 512 / std::max(nx, ny));
    const double pmax = *std::max_element(s.power.begin(), s.power.end());
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    const int w = ny * scale, h = nx * scale;
    f << "P6\n" << w << ' ' << h << "\n255\n";
    std::vector<char> row(static_cast<std::size_t>(w) * 3);
    for (int i = 0; i < nx; ++i)
    {
        for (int j = 0; j < ny; ++j)
        {
            const auto c = colormap((to_db(s.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)), pmax) + 40.0) /
                                    40.0);
            for (int k = 0; k < scale; ++k)
                for (int ch = 0; ch < 3; ++ch)
                    row[static_cast<std::size_t>((j * scale + k) * 3 + ch)] = static_cast<char>(c[static_cast<std::size_t>(ch)]);
        }
        for (int k = 0; k < scale; ++k)
            f.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
}

void write_series_ppm(const std::string &path, const std::vector<double> &x,
                      const std::vector<std::vector<double>> &series, int width, int height)
{
    if (x.size() < 2 || series.empty())
        throw std::invalid_argument("write_series_ppm: need at least two points and one series");
    double pmax = 0.0;
    for (const auto &s : series)
        for (double v : s)
            pmax = std::max(pmax, v);
    std::vector<std::uint8_t> img(static_cast<std::size_t>(width * height * 3), 255);
    auto plot = [&](int px, int py, std::array<std::uint8_t, 3> c) {
        if (px < 0 || py < 0 || px >= width || py >= height)
            return;
        for (int ch = 0; ch < 3; ++ch)
            img[static_cast<std::size_t>((py * width + px) * 3 + ch)] = c[static_cast<std::size_t>(ch)];
    };
    // grid lines every 10 dB
    for (int db = 0; db >= -40; db -= 10)
    {
        const int py = static_cast<int>(std::lround((-db / 40.0) * (height - 1)));
        for (int px = 0; px < width; ++px)
            plot(px, py, {220, 220, 220});
    }
    const double x0 = x.front(), x1 = x.back();
    for (std::size_t k = 0; k < series.size(); ++k)
    {
        const auto c = colormap(series.size() == 1 ? 0.1 : 0.1 + 0.7 * static_cast<double>(k) / static_cast<double>(series.size() - 1));
        int prev_x = -1, prev_y = -1;
        for (std::size_t i = 0; i < x.size() && i < series[k].size(); ++i)
        {
            const int px = static_cast<int>(std::lround((x[i] - x0) / (x1 - x0) * (width - 1)));
            const int py = static_cast<int>(std::lround(-to_db(series[k][i], pmax) / 40.0 * (height - 1)));
            if (prev_x >= 0)
            {
                const int steps = std::max(std::abs(px - prev_x), std::abs(py - prev_y)) + 1;
                for (int t = 0; t <= steps; ++t)
                    plot(prev_x + (px - prev_x) * t / steps, prev_y + (py - prev_y) * t / steps, c);
            }
            prev_x = px;
            prev_y = py;
        }
    }
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    f << "P6\n" << width << ' ' << height << "\n255\n";
    f.write(reinterpret_cast<const char *>(img.data()), static_cast<std::streamsize>(img.size()));
}

const char *git_describe() { return ISAC_GIT_DESCRIBE; }

void write_manifest(const std::string &path, const nlohmann::json &params)
{
    nlohmann::json j;
    j["git"] = git_describe();
    j["parameters"] = params;
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    f << j.dump(2) << '\n';
}

void ensure_directory(const std::string &path)
{
    if (!path.empty())
        std::filesystem::create_directories(path);
}
} // namespace isac
