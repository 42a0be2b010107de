// SPDX-License-Identifier: Apache-2.0
#include "isac/nearfield.hpp"
#include "isac/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace isac::nearfield
{
namespace
{
using Objective = std::function<double(double)>;

std::size_t symmetric_half(const ArrayGeometry &geom, bool quarter_wave, const char *who)
{
    geom.validate();
    if (geom.num_elements % 2 == 0)
        throw std::invalid_argument(std::string(who) + ": needs an odd number of elements");
    if (geom.reference != ArrayReference::CenterElement)
        throw std::invalid_argument(std::string(who) + ": needs the centre element as reference");
    if (quarter_wave && geom.spacing_wavelengths > 0.25 + 1e-12)
        throw DomainError(std::string(who) + ": spacing above a quarter wavelength makes 2*omega ambiguous");
    return (geom.num_elements - 1) / 2;
}

double omega_of(const ArrayGeometry &geom, double angle_deg)
{
    return -2.0 * kPi * geom.spacing_wavelengths * std::sin(deg2rad(angle_deg));
}

double wrap(double x) { return std::remainder(x, 2.0 * kPi); }

std::pair<double, double> golden_max(const Objective &f, double a, double b)
{
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 80 && (b - a) > 1e-12 * std::max(1.0, std::abs(a) + std::abs(b)); ++it)
    {
        if (fc >= fd)
        {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        }
        else
        {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return fc >= fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
}

struct Line
{
    std::vector<double> x, score;
    bool shortfall = false;
};

// K best local maxima of a log-domain objective, optionally polished within
// the neighbouring grid cells. `spec` receives exp(f - max f).
Line search_1d(const Objective &f, const std::vector<double> &grid, std::size_t K, bool refine, Spectrum1D &spec,
               const std::string &algorithm, std::size_t &evals)
{
    if (grid.size() < 3)
        throw std::invalid_argument(algorithm + ": search grid needs at least 3 points");
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        v[i] = f(grid[i]);
    evals += grid.size();
    double vmax = -std::numeric_limits<double>::infinity();
    for (double x : v)
        if (std::isfinite(x))
            vmax = std::max(vmax, x);
    spec.grid = grid;
    spec.axis = AxisKind::Angle;
    spec.algorithm = algorithm;
    spec.power.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        spec.power[i] = std::isfinite(v[i]) ? std::max(std::exp(v[i] - vmax), 1e-300)
                                            : (v[i] > 0 ? 1.0 : 1e-300);
    const PeakSet ps = find_peaks(spec, K, {1, false, 0.0});
    Line out;
    out.shortfall = ps.shortfall;
    for (const Peak &p : ps.peaks)
    {
        double x = grid[p.index], s = v[p.index];
        if (refine && p.index > 0 && p.index + 1 < grid.size())
        {
            std::size_t calls = 0;
            const Objective counted = [&](double t) {
                ++calls;
                return f(t);
            };
            const auto [xr, sr] = golden_max(counted, grid[p.index - 1], grid[p.index + 1]);
            evals += calls;
            if (sr >= s)
            {
                x = xr;
                s = sr;
            }
        }
        out.x.push_back(x);
        out.score.push_back(s);
    }
    return out;
}

std::pair<double, double> best_range(const CovarianceBundle &b, const ArrayGeometry &geom, const Carrier &carrier,
                                     double angle_deg, const std::vector<double> &ranges, bool refine,
                                     std::size_t &evals)
{
    if (ranges.size() < 2)
        throw std::invalid_argument("range search: grid needs at least 2 points");
    const Objective f = [&](double r) {
        return -std::log(std::max(b.sub.noise_power(steer_near_exact(geom, carrier, angle_deg, r)),
                                  std::numeric_limits<double>::min()));
    };
    std::size_t best = 0;
    double bv = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ranges.size(); ++i)
    {
        const double v = f(ranges[i]);
        if (v > bv)
        {
            bv = v;
            best = i;
        }
    }
    evals += ranges.size();
    double r = ranges[best];
    if (refine)
    {
        const double lo = ranges[best == 0 ? 0 : best - 1];
        const double hi = ranges[std::min(best + 1, ranges.size() - 1)];
        std::size_t calls = 0;
        const Objective counted = [&](double t) {
            ++calls;
            return f(t);
        };
        const auto [rr, vr] = golden_max(counted, lo, hi);
        evals += calls;
        if (vr >= bv)
        {
            r = rr;
            bv = vr;
        }
    }
    return {r, bv};
}

// Forward-backward smoothed covariance of a single sequence.
CMatrix sequence_covariance(const CVector &r, Eigen::Index sub)
{
    const CMatrix W = smooth_snapshots(r, sub);
    CMatrix R = W * W.adjoint();
    const CMatrix Jc = W.conjugate().colwise().reverse();
    R += Jc * Jc.adjoint();
    R /= static_cast<double>(2 * W.cols());
    return R;
}

CVector exp_sequence(Eigen::Index n, double step)
{
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = std::polar(1.0, step * static_cast<double>(i));
    return v;
}

void sort_by_angle(NearFieldResult &r)
{
    std::sort(r.estimates.begin(), r.estimates.end(),
              [](const NearFieldEstimate &a, const NearFieldEstimate &b) { return a.angle_deg < b.angle_deg; });
}

// Pieces of Q(w) = D - B^H B with D = Gamma^H Gamma and B = Es^H Gamma.
struct QParts
{
    RVector D;  // J+1
    CMatrix B;  // K x (J+1)
    CMatrix S;  // I - B D^-1 B^H
};

QParts q_parts(double omega, const CovarianceBundle &b, std::size_t J)
{
    const Eigen::Index Jn = static_cast<Eigen::Index>(J);
    const CMatrix &Es = b.sub.signal;
    const Eigen::Index K = Es.cols();
    QParts q;
    q.D = RVector::Constant(Jn + 1, 2.0);
    q.D(Jn) = 1.0;
    q.B.resize(K, Jn + 1);
    for (Eigen::Index c = 0; c <= Jn; ++c)
    {
        const Eigen::Index e = Jn - c;
        const cd up = std::polar(1.0, static_cast<double>(e) * omega);
        if (e == 0)
        {
            q.B.col(c) = Es.row(Jn).adjoint();
        }
        else
        {
            q.B.col(c) = Es.row(Jn + e).adjoint() * up + Es.row(Jn - e).adjoint() * std::conj(up);
        }
    }
    q.S = CMatrix::Identity(K, K) - q.B * q.D.cwiseInverse().asDiagonal() * q.B.adjoint();
    return q;
}

double q_logdet(const QParts &q)
{
    return q.D.array().log().sum() + log_abs_det(q.S);
}

// Q^-1 e1 through the Woodbury identity; e1 picks the last (epsilon = 0) column.
CVector q_inverse_e1(const QParts &q)
{
    const Eigen::Index n = q.D.size();
    CVector e = CVector::Zero(n);
    e(n - 1) = 1.0;
    const CVector De = q.D.cwiseInverse().asDiagonal() * e;
    const CVector t = q.S.fullPivLu().solve(q.B * De);
    return De + q.D.cwiseInverse().asDiagonal() * (q.B.adjoint() * t);
}


void check_bundle(const CovarianceBundle &b, const ArrayGeometry &geom, const char *who)
{
    if (b.sub.dim() != static_cast<Eigen::Index>(geom.num_elements))
        throw std::invalid_argument(std::string(who) + ": covariance size does not match the array");
    if (b.K < 1)
        throw std::invalid_argument(std::string(who) + ": K must be at least 1");
}

NearFieldResult grid2d_estimate(const std::function<Spectrum2D(const NearFieldGrid &)> &eval, Eigen::Index K,
                                const GridSearch2D &search, const std::string &algorithm)
{
    search.coarse.validate();
    NearFieldResult res;
    const Spectrum2D coarse = eval(search.coarse);
    res.grid_evaluations += coarse.power.size();
    const auto peaks = find_peaks_2d(coarse, static_cast<std::size_t>(K), 1, 1, 0.0, false);
    if (peaks.size() < static_cast<std::size_t>(K))
    {
        res.flagged = true;
        res.note = algorithm + ": fewer local maxima than targets";
    }
    const auto &ax = search.coarse.angles_deg;
    const auto &rg = search.coarse.ranges_m;
    for (const GridPeak &p : peaks)
    {
        const std::size_t ix = p.index[0], iy = p.index[1];
        const double a0 = ax[ix == 0 ? 0 : ix - 1], a1 = ax[std::min(ix + 1, ax.size() - 1)];
        const double r0 = rg[iy == 0 ? 0 : iy - 1], r1 = rg[std::min(iy + 1, rg.size() - 1)];
        NearFieldGrid fine;
        const auto na = static_cast<std::size_t>(std::floor((a1 - a0) / search.fine_angle_step_deg + 1e-9)) + 1;
        const auto nr = static_cast<std::size_t>(std::floor((r1 - r0) / search.fine_range_step_m + 1e-9)) + 1;
        for (std::size_t i = 0; i < std::max<std::size_t>(na, 2); ++i)
            fine.angles_deg.push_back(na < 2 ? a0 + (a1 - a0) * static_cast<double>(i) : a0 + search.fine_angle_step_deg * static_cast<double>(i));
        for (std::size_t i = 0; i < std::max<std::size_t>(nr, 2); ++i)
            fine.ranges_m.push_back(nr < 2 ? r0 + (r1 - r0) * static_cast<double>(i) : r0 + search.fine_range_step_m * static_cast<double>(i));
        if (fine.angles_deg.back() <= fine.angles_deg.front())
            fine.angles_deg = {a0, a0 + search.fine_angle_step_deg};
        if (fine.ranges_m.back() <= fine.ranges_m.front())
            fine.ranges_m = {r0, r0 + search.fine_range_step_m};
        const Spectrum2D s = eval(fine);
        res.grid_evaluations += s.power.size();
        const auto it = std::max_element(s.power.begin(), s.power.end());
        const std::size_t k = static_cast<std::size_t>(it - s.power.begin());
        res.estimates.push_back({s.x[k / s.y.size()], s.y[k % s.y.size()], *it});
    }
    sort_by_angle(res);
    return res;
}
} // namespace

void NearFieldGrid::validate() const
{
    const auto increasing = [](const std::vector<double> &v) {
        return v.size() >= 2 && std::adjacent_find(v.begin(), v.end(), std::greater_equal<double>()) == v.end();
    };
    if (!increasing(angles_deg) || !increasing(ranges_m))
        throw std::invalid_argument("NearFieldGrid: grids must be strictly increasing with at least 2 points");
    if (angles_deg.front() < -90.0 || angles_deg.back() > 90.0)
        throw DomainError("NearFieldGrid: angles outside [-90, 90] deg");
    if (!(ranges_m.front() > 0.0))
        throw DomainError("NearFieldGrid: ranges must be positive");
}

std::vector<double> default_ranges(const ArrayGeometry &geom, const Carrier &carrier, std::size_t n)
{
    if (n < 2)
        throw std::invalid_argument("default_ranges: need at least 2 points");
    const double R = rayleigh_distance(geom, carrier);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = 0.1 * R * std::pow(10.0, static_cast<double>(i) / static_cast<double>(n - 1));
    return out;
}

CovarianceBundle make_bundle(const CMatrix &X, Eigen::Index K)
{
    if (X.cols() == 0)
        throw std::invalid_argument("make_bundle: no snapshots");
    return make_bundle_from_covariance(sample_covariance(X), K);
}

CovarianceBundle make_bundle_from_covariance(const CMatrix &R, Eigen::Index K)
{
    if (K < 1 || K >= R.rows())
        throw std::invalid_argument("make_bundle: K must satisfy 1 <= K < M");
    CovarianceBundle b;
    b.R = R;
    b.sub = eig_subspace(R, K);
    b.K = K;
    return b;
}

Spectrum2D bf2d(const CMatrix &R, const ArrayGeometry &geom, const Carrier &carrier, const NearFieldGrid &grid)
{
    grid.validate();
    const auto M = static_cast<Eigen::Index>(geom.num_elements);
    if (R.rows() != M || R.cols() != M)
        throw std::invalid_argument("bf2d: covariance size does not match the array");
    Spectrum2D s;
    s.x = grid.angles_deg;
    s.y = grid.ranges_m;
    s.x_name = "angle_deg";
    s.y_name = "range_m";
    s.algorithm = "bf2d";
    const std::size_t ny = s.y.size();
    s.power.resize(s.x.size() * ny);
    CMatrix A(M, static_cast<Eigen::Index>(ny));
    for (std::size_t ix = 0; ix < s.x.size(); ++ix)
    {
        for (std::size_t iy = 0; iy < ny; ++iy)
            A.col(static_cast<Eigen::Index>(iy)) = steer_near_exact(geom, carrier, s.x[ix], s.y[iy]);
        const CMatrix RA = R * A;
        for (std::size_t iy = 0; iy < ny; ++iy)
        {
            const auto c = static_cast<Eigen::Index>(iy);
            s.power[ix * ny + iy] = A.col(c).dot(RA.col(c)).real();
        }
    }
    return s;
}

Spectrum2D music2d_nf(const CovarianceBundle &b, const ArrayGeometry &geom, const Carrier &carrier,
                      const NearFieldGrid &grid)
{
    grid.validate();
    check_bundle(b, geom, "music2d_nf");
    const auto M = static_cast<Eigen::Index>(geom.num_elements);
    Spectrum2D s;
    s.x = grid.angles_deg;
    s.y = grid.ranges_m;
    s.x_name = "angle_deg";
    s.y_name = "range_m";
    s.algorithm = "music2d_nf";
    const std::size_t ny = s.y.size();
    s.power.resize(s.x.size() * ny);
    CMatrix A(M, static_cast<Eigen::Index>(ny));
    for (std::size_t ix = 0; ix < s.x.size(); ++ix)
    {
        for (std::size_t iy = 0; iy < ny; ++iy)
            A.col(static_cast<Eigen::Index>(iy)) = steer_near_exact(geom, carrier, s.x[ix], s.y[iy]);
        const RVector proj = (b.sub.signal.adjoint() * A).colwise().squaredNorm().transpose();
        for (std::size_t iy = 0; iy < ny; ++iy)
        {
            const double d = static_cast<double>(M) - proj(static_cast<Eigen::Index>(iy));
            s.power[ix * ny + iy] = 1.0 / std::max(d, 1e-300);
        }
    }
    return s;
}

NearFieldResult bf2d_estimate(const CMatrix &R, const ArrayGeometry &geom, const Carrier &carrier, Eigen::Index K,
                              const GridSearch2D &search)
{
    if (K < 1)
        throw std::invalid_argument("bf2d: K must be at least 1");
    return grid2d_estimate([&](const NearFieldGrid &g) { return bf2d(R, geom, carrier, g); }, K, search, "bf2d");
}

NearFieldResult music2d_estimate(const CovarianceBundle &b, const ArrayGeometry &geom, const Carrier &carrier,
                                 const GridSearch2D &search)
{
    return grid2d_estimate([&](const NearFieldGrid &g) { return music2d_nf(b, geom, carrier, g); }, b.K, search,
                           "music2d_nf");
}

MismatchReport farfield_mismatch_demo(const CMatrix &X, const ArrayGeometry &geom,
                                      const std::vector<double> &truth_angles_deg, Eigen::Index n_fft)
{
    MismatchReport rep;
    rep.spectrum = periodogram(X, ManifoldAxis::angle(geom.spacing_wavelengths), n_fft);
    const auto &g = rep.spectrum.grid;
    const auto &p = rep.spectrum.power;
    const double s = geom.spacing_wavelengths;
    const double lobe = 1.0 / static_cast<double>(geom.num_elements);
    for (double t : truth_angles_deg)
    {
        std::size_t lo = g.size(), hi = 0;
        double wmax = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (std::abs(g[i] - t) <= 5.0)
            {
                lo = std::min(lo, i);
                hi = std::max(hi, i);
                wmax = std::max(wmax, p[i]);
            }
        std::size_t count = 0;
        double inside = 0.0, outside = 0.0;
        const double u0 = s * std::sin(deg2rad(t));
        for (std::size_t i = lo; i <= hi && lo < g.size(); ++i)
        {
            const bool left = i == 0 || p[i] > p[i - 1];
            const bool right = i + 1 == g.size() || p[i] >= p[i + 1];
            if (left && right && p[i] >= 0.5 * wmax)
                ++count;
            const double u = s * std::sin(deg2rad(g[i]));
            (std::abs(u - u0) <= lobe ? inside : outside) += p[i];
        }
        rep.local_maxima.push_back(count);
        rep.spread.push_back(inside + outside > 0.0 ? outside / (inside + outside) : 0.0);
    }
    return rep;
}

SocSequences soc_sequences(const CMatrix &X, const ArrayGeometry &geom)
{
    const std::size_t J = symmetric_half(geom, true, "soc_sequences");
    if (X.rows() != static_cast<Eigen::Index>(geom.num_elements) || X.cols() == 0)
        throw std::invalid_argument("soc_sequences: data does not match the array");
    const auto Jn = static_cast<Eigen::Index>(J);
    const double inv_q = 1.0 / static_cast<double>(X.cols());
    SocSequences out;
    out.r1.resize(Jn + 1);
    out.r2.resize(Jn);
    for (Eigen::Index m = 0; m <= Jn; ++m)
        out.r1(m) = X.row(Jn - m).dot(X.row(Jn + m)) * inv_q; // mean X(-m) conj X(+m)
    for (Eigen::Index m = 0; m < Jn; ++m)
        out.r2(m) = X.row(Jn + m).dot(X.row(Jn + m + 1)) * inv_q; // mean X(m+1) conj X(m)
    // dot() conjugates its left operand, which is the wrong side for r1
    out.r1 = out.r1.conjugate().eval();
    return out;
}

NearFieldResult soc_estimate(const CMatrix &X, const ArrayGeometry &geom, const Carrier &carrier, Eigen::Index K,
                             const DecoupledOptions &opt)
{
    const std::size_t J = symmetric_half(geom, true, "soc_estimate");
    if (K < 1 || K > static_cast<Eigen::Index>(J))
        throw std::invalid_argument("soc_estimate: K must satisfy 1 <= K <= J");
    const SocSequences seq = soc_sequences(X, geom);
    const CovarianceBundle b = make_bundle(X, K);
    NearFieldResult res;

    // omega: MUSIC on the smoothed r1 model, steering e^{-2j omega i}
    const Eigen::Index sub1 = std::max<Eigen::Index>(K + 1, (seq.r1.size() + 1) / 2);
    const Subspace s1 = eig_subspace(sequence_covariance(seq.r1, sub1), K);
    const Objective f1 = [&](double th) {
        const CVector v = exp_sequence(s1.dim(), -2.0 * omega_of(geom, th));
        return -std::log(std::max(s1.noise_power(v), std::numeric_limits<double>::min()));
    };
    const Line om = search_1d(f1, opt.angles_deg, static_cast<std::size_t>(K), opt.refine, res.angle_spectrum,
                              "soc", res.grid_evaluations);
    if (om.shortfall)
    {
        res.flagged = true;
        res.note = "soc: fewer angle peaks than targets";
    }

    if (!opt.soc_psi_from_r2)
    {
        // range by a 1D search at each estimated angle; no pairing needed
        for (std::size_t i = 0; i < om.x.size(); ++i)
        {
            const auto [r, v] = best_range(b, geom, carrier, om.x[i], opt.ranges_m, opt.refine, res.grid_evaluations);
            res.estimates.push_back({om.x[i], r, v});
        }
        sort_by_angle(res);
        return res;
    }

    // psi: shift invariance of the smoothed r2 model, z = e^{2j psi}
    const Eigen::Index sub2 = std::max<Eigen::Index>(K + 1, (seq.r2.size() + 1) / 2);
    if (sub2 > seq.r2.size())
        throw std::invalid_argument("soc_estimate: sequence too short for K targets");
    const Subspace s2 = eig_subspace(sequence_covariance(seq.r2, sub2), K);
    const CMatrix &E = s2.signal;
    const CMatrix Phi = pinv(E.topRows(E.rows() - 1)) * E.bottomRows(E.rows() - 1);
    std::vector<double> psis;
    for (const cd &z : eigenvalues(Phi))
        psis.push_back(0.5 * std::arg(z));

    const std::size_t nw = om.x.size(), np = psis.size();
    std::vector<std::vector<double>> score(nw, std::vector<double>(np));
    for (std::size_t i = 0; i < nw; ++i)
        for (std::size_t j = 0; j < np; ++j)
            score[i][j] = 1.0 / std::max(b.sub.noise_power(steer_near_fresnel(geom, omega_of(geom, om.x[i]), psis[j])),
                                         1e-300);

    std::vector<std::size_t> assign(nw);
    if (nw == 1 || np == 1)
    {
        for (std::size_t i = 0; i < nw; ++i)
            assign[i] = static_cast<std::size_t>(
                std::max_element(score[i].begin(), score[i].end()) - score[i].begin());
    }
    else
    {
        // best one-to-one pairing by total log score
        std::vector<std::size_t> perm(np);
        std::iota(perm.begin(), perm.end(), 0);
        double best = -std::numeric_limits<double>::infinity();
        do
        {
            double tot = 0.0;
            for (std::size_t i = 0; i < std::min(nw, np); ++i)
                tot += std::log(score[i][perm[i]]);
            if (tot > best)
            {
                best = tot;
                std::copy(perm.begin(), perm.begin() + static_cast<long>(std::min(nw, np)), assign.begin());
            }
        } while (np <= 8 && std::next_permutation(perm.begin(), perm.end()));
        for (std::size_t i = 0; i < nw; ++i)
        {
            std::vector<double> row = score[i];
            std::sort(row.rbegin(), row.rend());
            if (row.size() > 1 && 10.0 * std::log10(row[0] / row[1]) < 1.0)
            {
                res.flagged = true;
                res.note = "soc: ambiguous (omega, psi) pairing";
            }
        }
    }
    for (std::size_t i = 0; i < nw; ++i)
    {
        const double w = omega_of(geom, om.x[i]);
        const AngleRange ar = fresnel_inverse(geom, carrier, w, psis[assign[i]]);
        if (!std::isfinite(ar.range_m))
        {
            res.flagged = true;
            res.note = "soc: non-positive psi, range unresolved";
        }
        res.estimates.push_back({om.x[i], ar.range_m, score[i][assign[i]]});
    }
    sort_by_angle(res);
    return res;
}

CMatrix gamma_matrix(double omega, std::size_t J)
{
    const auto Jn = static_cast<Eigen::Index>(J);
    CMatrix G = CMatrix::Zero(2 * Jn + 1, Jn + 1);
    for (Eigen::Index e = -Jn; e <= Jn; ++e)
        G(e + Jn, Jn - std::abs(e)) = std::polar(1.0, static_cast<double>(e) * omega);
    return G;
}

CVector xi_vector(double psi, std::size_t J)
{
    const auto Jn = static_cast<Eigen::Index>(J);
    CVector xi(Jn + 1);
    for (Eigen::Index c = 0; c <= Jn; ++c)
        xi(c) = std::polar(1.0, static_cast<double>((Jn - c) * (Jn - c)) * psi);
    return xi;
}

CMatrix rdrr_decompose(double omega, const CovarianceBundle &b, const ArrayGeometry &geom)
{
    const std::size_t J = symmetric_half(geom, false, "rdrr_decompose");
    check_bundle(b, geom, "rdrr_decompose");
    const CMatrix G = gamma_matrix(omega, J);
    if (b.sub.noise.cols() > 0)
    {
        const CMatrix B = b.sub.noise.adjoint() * G;
        return B.adjoint() * B;
    }
    const CMatrix B = b.sub.signal.adjoint() * G;
    return G.adjoint() * G - B.adjoint() * B;
}

Spectrum1D rr_spectrum(const CovarianceBundle &b, const ArrayGeometry &geom, const std::vector<double> &angles_deg)
{
    const std::size_t J = symmetric_half(geom, false, "rr");
    check_bundle(b, geom, "rr");
    Spectrum1D s;
    std::size_t ev = 0;
    const Objective f = [&](double th) { return -q_logdet(q_parts(omega_of(geom, th), b, J)); };
    search_1d(f, angles_deg, 1, false, s, "rr", ev);
    return s;
}

NearFieldResult rr_estimate(const CovarianceBundle &b, const ArrayGeometry &geom, const Carrier &carrier,
                            const DecoupledOptions &opt)
{
    const std::size_t J = symmetric_half(geom, false, "rr_estimate");
    check_bundle(b, geom, "rr_estimate");
    if (b.K > static_cast<Eigen::Index>(J))
        throw std::invalid_argument("rr_estimate: K must not exceed J");
    NearFieldResult res;
    const Objective f = [&](double th) { return -q_logdet(q_parts(omega_of(geom, th), b, J)); };
    const Line ln = search_1d(f, opt.angles_deg, static_cast<std::size_t>(b.K), opt.refine, res.angle_spectrum, "rr",
                              res.grid_evaluations);
    if (ln.shortfall)
    {
        res.flagged = true;
        res.note = "rr: fewer angle peaks than targets";
    }
    for (std::size_t k = 0; k < ln.x.size(); ++k)
    {
        const auto [r, v] = best_range(b, geom, carrier, ln.x[k], opt.ranges_m, opt.refine, res.grid_evaluations);
        res.estimates.push_back({ln.x[k], r, ln.score[k]});
    }
    sort_by_angle(res);
    return res;
}

PsiFit fit_psi(const CVector &xi_hat, std::size_t J)
{
    if (J < 2)
        throw std::invalid_argument("fit_psi: J < 2 leaves the phase fit without redundancy");
    const auto Jn = static_cast<Eigen::Index>(J);
    if (xi_hat.size() != Jn + 1)
        throw std::invalid_argument("fit_psi: vector length must be J+1");
    RVector g(Jn + 1);
    g(Jn) = std::arg(xi_hat(Jn));
    bool jump = false;
    for (Eigen::Index c = Jn - 1; c >= 0; --c)
    {
        const double raw = std::arg(xi_hat(c)) - std::arg(xi_hat(c + 1));
        const double step = wrap(raw);
        g(c) = g(c + 1) + step;
    }
    Eigen::MatrixXd P(Jn + 1, 2);
    RVector w(Jn + 1);
    for (Eigen::Index c = 0; c <= Jn; ++c)
    {
        P(c, 0) = 1.0;
        P(c, 1) = static_cast<double>((Jn - c) * (Jn - c));
        w(c) = std::abs(xi_hat(c));
    }
    const Eigen::MatrixXd Pw = w.asDiagonal() * P;
    const RVector gw = w.asDiagonal() * g;
    const Eigen::Vector2d coef = Pw.colPivHouseholderQr().solve(gw);
    PsiFit out;
    out.psi = coef(1);
    // the largest adjacent step of the fitted model must stay below pi for the unwrap to be trustworthy
    if (static_cast<double>(2 * Jn - 1) * std::abs(out.psi) >= kPi)
        jump = true;
    out.fallback = jump;
    return out;
}

Spectrum1D rd_spectrum(const CovarianceBundle &b, const ArrayGeometry &geom, const std::vector<double> &angles_deg)
{
    const std::size_t J = symmetric_half(geom, false, "rd");
    check_bundle(b, geom, "rd");
    Spectrum1D s;
    std::size_t ev = 0;
    const Objective f = [&](double th) {
        const CVector v = q_inverse_e1(q_parts(omega_of(geom, th), b, J));
        return std::log(std::max(std::abs(v(v.size() - 1)), 1e-300));
    };
    search_1d(f, angles_deg, 1, false, s, "rd", ev);
    return s;
}

NearFieldResult rd_estimate(const CovarianceBundle &b, const ArrayGeometry &geom, const Carrier &carrier,
                            const DecoupledOptions &opt)
{
    const std::size_t J = symmetric_half(geom, false, "rd_estimate");
    check_bundle(b, geom, "rd_estimate");
    if (b.K > static_cast<Eigen::Index>(J))
        throw std::invalid_argument("rd_estimate: K must not exceed J");
    NearFieldResult res;
    const Objective f = [&](double th) {
        const CVector v = q_inverse_e1(q_parts(omega_of(geom, th), b, J));
        return std::log(std::max(std::abs(v(v.size() - 1)), 1e-300));
    };
    const Line ln = search_1d(f, opt.angles_deg, static_cast<std::size_t>(b.K), opt.refine, res.angle_spectrum, "rd",
                              res.grid_evaluations);
    if (ln.shortfall)
    {
        res.flagged = true;
        res.note = "rd: fewer angle peaks than targets";
    }
    for (std::size_t k = 0; k < ln.x.size(); ++k)
    {
        const double w = omega_of(geom, ln.x[k]);
        const QParts q = q_parts(w, b, J);
        const CVector v = q_inverse_e1(q);
        const CVector xi = v / v(v.size() - 1);
        PsiFit fit = fit_psi(xi, J);
        double range = fresnel_inverse(geom, carrier, w, fit.psi).range_m;
        if (fit.fallback || !std::isfinite(range) || range <= 0.0)
        {
            // minimise xi(psi)^H Q xi(psi) over the psi values of the range grid
            const CMatrix Q = rdrr_decompose(w, b, geom);
            double best = std::numeric_limits<double>::infinity();
            for (double r : opt.ranges_m)
            {
                const double psi = fresnel_phase(geom, carrier, ln.x[k], r).psi;
                const CVector x = xi_vector(psi, J);
                const double val = x.dot(Q * x).real();
                if (val < best)
                {
                    best = val;
                    range = r;
                }
            }
            res.grid_evaluations += opt.ranges_m.size();
            res.flagged = true;
            res.note = "rd: phase unwrap unreliable, psi from grid search";
        }
        res.estimates.push_back({ln.x[k], range, ln.score[k]});
    }
    sort_by_angle(res);
    return res;
}

NearFieldResult fft_enhanced(const CovarianceBundle &b, const ArrayGeometry &geom, const Carrier &carrier,
                             const NearFieldGrid &grid, const FftEnhancedOptions &opt)
{
    grid.validate();
    check_bundle(b, geom, "fft_enhanced");
    const auto M = static_cast<Eigen::Index>(geom.num_elements);
    Eigen::Index S = opt.dft_size;
    if (S == 0)
    {
        S = 1;
        while (S < M)
            S *= 2;
        S *= 2;
    }
    if (S < M)
        throw std::invalid_argument("fft_enhanced: DFT size below the array size");
    NearFieldResult res;
    const double s = geom.spacing_wavelengths;

    // step 1: beam-space power over centred DFT bins
    RVector p(S);
    CMatrix W(M, S);
    for (Eigen::Index k = 0; k < S; ++k)
    {
        const double u = static_cast<double>(k - S / 2) / static_cast<double>(S);
        for (Eigen::Index m = 0; m < M; ++m)
            W(m, k) = std::polar(1.0, -2.0 * kPi * geom.position(static_cast<std::size_t>(m)) * u);
    }
    const CMatrix RW = b.R * W;
    for (Eigen::Index k = 0; k < S; ++k)
        p(k) = W.col(k).dot(RW.col(k)).real() / static_cast<double>(M);
    res.grid_evaluations += static_cast<std::size_t>(S);
    res.angle_spectrum.axis = AxisKind::Angle;
    res.angle_spectrum.algorithm = "fft_enhanced";
    for (Eigen::Index k = 0; k < S; ++k)
    {
        const double u = static_cast<double>(k - S / 2) / static_cast<double>(S);
        if (std::abs(u) <= s)
        {
            res.angle_spectrum.grid.push_back(rad2deg(std::asin(u / s)));
            res.angle_spectrum.power.push_back(std::max(p(k), 1e-300));
        }
    }
    const double thr = opt.angle_threshold * p.maxCoeff();
    struct Box
    {
        std::size_t a0, a1, r0 = 0, r1 = 0;
    };
    std::vector<Box> boxes;
    const auto &ag = grid.angles_deg;
    for (Eigen::Index k = 0; k < S;)
    {
        if (!(p(k) >= thr))
        {
            ++k;
            continue;
        }
        Eigen::Index e = k;
        while (e + 1 < S && p(e + 1) >= thr)
            ++e;
        const double du = 1.0 / static_cast<double>(S);
        const double ulo = std::max(static_cast<double>(k - S / 2) * du - du, -s);
        const double uhi = std::min(static_cast<double>(e - S / 2) * du + du, s);
        k = e + 1;
        if (ulo > uhi)
            continue;
        const double alo = rad2deg(std::asin(ulo / s)), ahi = rad2deg(std::asin(uhi / s));
        if (ahi < ag.front() || alo > ag.back())
            continue;
        Box bx{};
        bx.a0 = static_cast<std::size_t>(std::lower_bound(ag.begin(), ag.end(), alo) - ag.begin());
        bx.a1 = static_cast<std::size_t>(std::upper_bound(ag.begin(), ag.end(), ahi) - ag.begin());
        bx.a0 = std::min(bx.a0, ag.size() - 1);
        bx.a1 = std::max(bx.a1, bx.a0 + 1);
        boxes.push_back(bx);
    }

    // step 2: distance scans at the cluster edges and centre
    const auto &rg = grid.ranges_m;
    std::vector<std::vector<RVector>> scans(boxes.size());
    std::vector<double> all;
    for (std::size_t c = 0; c < boxes.size(); ++c)
    {
        const Box &bx = boxes[c];
        for (double a : {ag[bx.a0], ag[(bx.a0 + bx.a1 - 1) / 2], ag[bx.a1 - 1]})
        {
            RVector P(static_cast<Eigen::Index>(rg.size()));
            for (std::size_t i = 0; i < rg.size(); ++i)
            {
                const CVector v = steer_near_exact(geom, carrier, a, rg[i]);
                P(static_cast<Eigen::Index>(i)) = v.dot(b.R * v).real() / static_cast<double>(M);
                all.push_back(P(static_cast<Eigen::Index>(i)));
            }
            res.grid_evaluations += rg.size();
            scans[c].push_back(P);
        }
    }
    double gamma = 0.0;
    if (!all.empty() && std::isfinite(opt.gamma_db))
    {
        std::nth_element(all.begin(), all.begin() + static_cast<long>(all.size() / 2), all.end());
        gamma = all[all.size() / 2] * std::pow(10.0, opt.gamma_db / 10.0);
    }
    std::vector<Box> kept;
    for (std::size_t c = 0; c < boxes.size(); ++c)
    {
        std::size_t lo = rg.size(), hi = 0;
        for (const RVector &P : scans[c])
            for (std::size_t i = 0; i < rg.size(); ++i)
                if (P(static_cast<Eigen::Index>(i)) >= gamma)
                {
                    lo = std::min(lo, i);
                    hi = std::max(hi, i);
                }
        if (lo > hi)
            continue;
        Box bx = boxes[c];
        bx.r0 = lo == 0 ? 0 : lo - 1;
        bx.r1 = std::min(hi + 2, rg.size());
        kept.push_back(bx);
    }
    if (kept.empty())
        throw EstimationError("fft_enhanced: no angle-distance cluster passed the thresholds");

    // step 3: 2D MUSIC restricted to the boxes
    std::vector<NearFieldEstimate> cands;
    for (const Box &bx : kept)
    {
        NearFieldGrid sub;
        sub.angles_deg.assign(ag.begin() + static_cast<long>(bx.a0), ag.begin() + static_cast<long>(bx.a1));
        sub.ranges_m.assign(rg.begin() + static_cast<long>(bx.r0), rg.begin() + static_cast<long>(bx.r1));
        const auto widen = [](std::vector<double> &v, const std::vector<double> &full, std::size_t end) {
            if (v.size() < 2)
                v.push_back(end < full.size() ? full[end] : full[end - 2]);
        };
        widen(sub.angles_deg, ag, bx.a1);
        widen(sub.ranges_m, rg, bx.r1);
        std::sort(sub.angles_deg.begin(), sub.angles_deg.end());
        std::sort(sub.ranges_m.begin(), sub.ranges_m.end());
        const Spectrum2D sp = music2d_nf(b, geom, carrier, sub);
        res.grid_evaluations += sp.power.size();
        for (const GridPeak &g : find_peaks_2d(sp, static_cast<std::size_t>(b.K), 1, 1, 0.0, false))
            cands.push_back({g.coords[0], g.coords[1], g.power});
    }
    std::sort(cands.begin(), cands.end(),
              [](const NearFieldEstimate &a, const NearFieldEstimate &c) { return a.score > c.score; });
    for (const NearFieldEstimate &c : cands)
    {
        const bool dup = std::any_of(res.estimates.begin(), res.estimates.end(), [&](const NearFieldEstimate &e) {
            return e.angle_deg == c.angle_deg && e.range_m == c.range_m;
        });
        if (!dup)
            res.estimates.push_back(c);
        if (res.estimates.size() == static_cast<std::size_t>(b.K))
            break;
    }
    if (res.estimates.size() < static_cast<std::size_t>(b.K))
    {
        res.flagged = true;
        res.note = "fft_enhanced: fewer peaks than targets inside the clusters";
    }
    sort_by_angle(res);
    return res;
}

NearFieldResult modified_music(const CMatrix &X, const ArrayGeometry &geom, const Carrier &carrier, Eigen::Index K,
                               Eigen::Index L, const DecoupledOptions &opt)
{
    return modified_music_cov(make_bundle(X, K), geom, carrier, L, opt);
}

NearFieldResult modified_music_cov(const CovarianceBundle &b, const ArrayGeometry &geom, const Carrier &carrier,
                                   Eigen::Index L, const DecoupledOptions &opt)
{
    const std::size_t J = symmetric_half(geom, true, "modified_music");
    check_bundle(b, geom, "modified_music");
    const Eigen::Index K = b.K;
    if (!(K < L && L <= static_cast<Eigen::Index>(J)))
        throw std::invalid_argument("modified_music: need K < L <= J");
    const auto M = static_cast<Eigen::Index>(geom.num_elements);
    CVector y(M);
    for (Eigen::Index i = 0; i < M; ++i)
        y(i) = b.R(i, M - 1 - i);
    const Eigen::Index sub = M + 1 - L;
    const CMatrix Wn = smooth_snapshots(y, sub);
    const Subspace s = eig_subspace(Wn * Wn.adjoint() / static_cast<double>(Wn.cols()), K);
    NearFieldResult res;
    res.flagged = s.rank_deficient;
    const Objective f = [&](double th) {
        const CVector v = exp_sequence(sub, 2.0 * omega_of(geom, th));
        return -std::log(std::max(s.noise_power(v), std::numeric_limits<double>::min()));
    };
    const Line ln = search_1d(f, opt.angles_deg, static_cast<std::size_t>(K), opt.refine, res.angle_spectrum,
                              "mod_music", res.grid_evaluations);
    if (ln.shortfall)
    {
        res.flagged = true;
        res.note = "mod_music: fewer angle peaks than targets";
    }
    for (std::size_t k = 0; k < ln.x.size(); ++k)
    {
        const auto [r, v] = best_range(b, geom, carrier, ln.x[k], opt.ranges_m, opt.refine, res.grid_evaluations);
        res.estimates.push_back({ln.x[k], r, ln.score[k]});
    }
    sort_by_angle(res);
    return res;
}

namespace
{
double gen_esprit_value(const CMatrix &Es1, const CMatrix &Es2f, const CMatrix &W, const ArrayGeometry &geom,
                        double th)
{
    const double w = omega_of(geom, th);
    const Eigen::Index J = Es1.rows();
    CVector d(J);
    for (Eigen::Index i = 0; i < J; ++i)
        d(i) = std::polar(1.0, -2.0 * static_cast<double>(i - J) * w);
    const CMatrix F = Es2f - d.asDiagonal() * Es1;
    return -log_abs_det(W.adjoint() * F);
}

struct EspritParts
{
    CMatrix Es1, Es2f, W;
};

EspritParts esprit_parts(const CovarianceBundle &b, const ArrayGeometry &geom, const CMatrix &W)
{
    const std::size_t J = symmetric_half(geom, true, "generalized_esprit");
    check_bundle(b, geom, "generalized_esprit");
    const auto Jn = static_cast<Eigen::Index>(J);
    if (b.K > Jn)
        throw std::invalid_argument("generalized_esprit: K must not exceed J");
    EspritParts e;
    e.Es1 = b.sub.signal.topRows(Jn);
    e.Es2f = b.sub.signal.bottomRows(Jn).colwise().reverse();
    e.W = W.size() == 0 ? default_selection(Jn, b.K) : W;
    if (e.W.rows() != Jn || e.W.cols() != b.K)
        throw std::invalid_argument("generalized_esprit: selection must be J x K");
    if (!(e.W.adjoint() * e.W).isIdentity(1e-8))
        throw std::invalid_argument("generalized_esprit: selection must be semi-unitary");
    return e;
}
} // namespace

Spectrum1D gen_esprit_spectrum(const CovarianceBundle &b, const ArrayGeometry &geom,
                               const std::vector<double> &angles_deg, const CMatrix &W)
{
    const EspritParts e = esprit_parts(b, geom, W);
    Spectrum1D s;
    std::size_t ev = 0;
    search_1d([&](double th) { return gen_esprit_value(e.Es1, e.Es2f, e.W, geom, th); }, angles_deg, 1, false, s,
              "gen_esprit", ev);
    return s;
}

NearFieldResult generalized_esprit(const CovarianceBundle &b, const ArrayGeometry &geom, const Carrier &carrier,
                                   const DecoupledOptions &opt, const CMatrix &W)
{
    const EspritParts e = esprit_parts(b, geom, W);
    NearFieldResult res;
    const Objective f = [&](double th) { return gen_esprit_value(e.Es1, e.Es2f, e.W, geom, th); };
    const Line ln = search_1d(f, opt.angles_deg, static_cast<std::size_t>(b.K), opt.refine, res.angle_spectrum,
                              "gen_esprit", res.grid_evaluations);
    if (ln.shortfall)
    {
        res.flagged = true;
        res.note = "gen_esprit: fewer angle peaks than targets";
    }
    for (std::size_t k = 0; k < ln.x.size(); ++k)
    {
        const auto [r, v] = best_range(b, geom, carrier, ln.x[k], opt.ranges_m, opt.refine, res.grid_evaluations);
        res.estimates.push_back({ln.x[k], r, ln.score[k]});
    }
    sort_by_angle(res);
    return res;
}

CMatrix default_selection(Eigen::Index J, Eigen::Index K)
{
    CMatrix W = CMatrix::Zero(J, K);
    W.topLeftCorner(K, K).setIdentity();
    return W;
}

CMatrix dft_selection(Eigen::Index J, Eigen::Index K)
{
    if (K < 1 || K > J)
        throw std::invalid_argument("dft_selection: need 1 <= K <= J");
    CMatrix W(J, K);
    for (Eigen::Index i = 0; i < J; ++i)
        for (Eigen::Index k = 0; k < K; ++k)
            W(i, k) = std::polar(1.0 / std::sqrt(static_cast<double>(J)),
                                 2.0 * kPi * static_cast<double>(i * k) / static_cast<double>(J));
    return W;
}

double music_nf_value(const CovarianceBundle &b, const ArrayGeometry &geom, const Carrier &carrier, double angle_deg,
                      double range_m)
{
    return 1.0 / std::max(b.sub.noise_power(steer_near_exact(geom, carrier, angle_deg, range_m)), 1e-300);
}
} // namespace isac::nearfield
