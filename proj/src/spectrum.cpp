// SPDX-License-Identifier: Apache-2.0
#include "isac/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace isac
{
namespace
{
struct Refined
{
    double offset = 0.0; // fractional cell offset in [-0.5, 0.5]
    double power = 0.0;
};

// 3-point parabola through log-power (linear power when a sample is not positive).
Refined parabolic(double lo, double mid, double hi)
{
    const bool logd = lo > 0.0 && mid > 0.0 && hi > 0.0;
    const double a = logd ? std::log(lo) : lo;
    const double b = logd ? std::log(mid) : mid;
    const double c = logd ? std::log(hi) : hi;
    const double den = a - 2.0 * b + c;
    if (!(den < 0.0))
        return {0.0, mid};
    const double d = std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
    const double y = b - 0.25 * (a - c) * d;
    return {d, logd ? std::exp(y) : y};
}

double coord_at(const std::vector<double> &g, std::size_t i, double offset)
{
    if (offset > 0.0 && i + 1 < g.size())
        return g[i] + offset * (g[i + 1] - g[i]);
    if (offset < 0.0 && i > 0)
        return g[i] + offset * (g[i] - g[i - 1]);
    return g[i];
}

// Generic N-d local maxima + greedy selection on a row-major array.
std::vector<GridPeak> nd_peaks(const std::vector<const std::vector<double> *> &grids, const std::vector<double> &power,
                               std::size_t K, const std::vector<std::size_t> &excl, double min_rel, bool interpolate)
{
    const std::size_t D = grids.size();
    std::vector<std::size_t> dims(D), stride(D);
    std::size_t total = 1;
    for (std::size_t d = 0; d < D; ++d)
        dims[d] = grids[d]->size();
    for (std::size_t d = D; d-- > 0;)
    {
        stride[d] = total;
        total *= dims[d];
    }
    if (total == 0 || K == 0 || power.size() != total)
        return {};

    std::vector<std::size_t> idx(D);
    std::vector<std::size_t> maxima;
    for (std::size_t f = 0; f < total; ++f)
    {
        std::size_t rem = f;
        for (std::size_t d = 0; d < D; ++d)
        {
            idx[d] = rem / stride[d];
            rem %= stride[d];
        }
        const double v = power[f];
        bool is_max = true;
        // walk the 3^D neighbourhood
        std::size_t combos = 1;
        for (std::size_t d = 0; d < D; ++d)
            combos *= 3;
        for (std::size_t c = 0; c < combos && is_max; ++c)
        {
            std::size_t cc = c;
            long off = 0;
            bool inside = true, self = true;
            for (std::size_t d = 0; d < D; ++d)
            {
                const int step = static_cast<int>(cc % 3) - 1;
                cc /= 3;
                if (step != 0)
                    self = false;
                const long j = static_cast<long>(idx[d]) + step;
                if (j < 0 || j >= static_cast<long>(dims[d]))
                {
                    inside = false;
                    break;
                }
                off += step * static_cast<long>(stride[d]);
            }
            if (!inside || self)
                continue;
            const std::size_t nb = static_cast<std::size_t>(static_cast<long>(f) + off);
            if (power[nb] > v || (power[nb] == v && nb < f))
                is_max = false;
        }
        if (is_max)
            maxima.push_back(f);
    }
    std::stable_sort(maxima.begin(), maxima.end(), [&](std::size_t a, std::size_t b) { return power[a] > power[b]; });

    std::vector<GridPeak> out;
    const double floor = maxima.empty() ? 0.0 : min_rel * power[maxima.front()];
    for (std::size_t f : maxima)
    {
        if (out.size() >= K)
            break;
        if (power[f] < floor)
            break;
        std::size_t rem = f;
        for (std::size_t d = 0; d < D; ++d)
        {
            idx[d] = rem / stride[d];
            rem %= stride[d];
        }
        bool clash = false;
        for (const GridPeak &p : out)
        {
            bool near = true;
            for (std::size_t d = 0; d < D; ++d)
            {
                const std::size_t gap = idx[d] > p.index[d] ? idx[d] - p.index[d] : p.index[d] - idx[d];
                if (gap >= std::max<std::size_t>(excl[d], 1))
                    near = false;
            }
            if (near)
            {
                clash = true;
                break;
            }
        }
        if (clash)
            continue;
        GridPeak pk;
        pk.index = idx;
        pk.power = power[f];
        pk.coords.resize(D);
        double best = power[f];
        for (std::size_t d = 0; d < D; ++d)
        {
            double offset = 0.0;
            if (interpolate && idx[d] > 0 && idx[d] + 1 < dims[d])
            {
                const Refined r = parabolic(power[f - stride[d]], power[f], power[f + stride[d]]);
                offset = r.offset;
                best = std::max(best, r.power);
            }
            pk.coords[d] = coord_at(*grids[d], idx[d], offset);
        }
        pk.power = best;
        out.push_back(std::move(pk));
    }
    return out;
}
} // namespace

std::vector<double> PeakSet::params() const
{
    std::vector<double> v;
    v.reserve(peaks.size());
    for (const Peak &p : peaks)
        v.push_back(p.param);
    return v;
}

PeakSet find_peaks(const Spectrum1D &spec, std::size_t K, const PeakOptions &opt)
{
    if (K < 1)
        throw std::invalid_argument("find_peaks: K must be at least 1");
    if (spec.grid.size() != spec.power.size())
        throw std::invalid_argument("find_peaks: grid/power length mismatch");
    const auto found = nd_peaks({&spec.grid}, spec.power, K, {opt.exclusion_cells}, opt.min_relative_power,
                                opt.interpolate);
    PeakSet out;
    for (const GridPeak &g : found)
        out.peaks.push_back({g.coords[0], g.power, g.index[0]});
    out.shortfall = out.peaks.size() < K;
    return out;
}

std::size_t rayleigh_exclusion_cells(const ManifoldAxis &axis, Eigen::Index len, const std::vector<double> &grid)
{
    if (grid.size() < 2)
        return 1;
    const double step = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
    const double cells = axis.resolution(len) / step;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cells)));
}

std::vector<GridPeak> find_peaks_2d(const Spectrum2D &s, std::size_t K, std::size_t excl_x, std::size_t excl_y,
                                    double min_relative_power, bool interpolate)
{
    return nd_peaks({&s.x, &s.y}, s.power, K, {excl_x, excl_y}, min_relative_power, interpolate);
}

std::vector<GridPeak> find_peaks_3d(const Spectrum3D &s, std::size_t K, const std::array<std::size_t, 3> &excl,
                                    double min_relative_power, bool interpolate)
{
    return nd_peaks({&s.x, &s.y, &s.z}, s.power, K, {excl[0], excl[1], excl[2]}, min_relative_power, interpolate);
}
} // namespace isac
