// SPDX-License-Identifier: Apache-2.0
#include "isac/estimators1d.hpp"
#include "isac/fft.hpp"
#include "isac/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace isac
{
namespace
{
struct Bin
{
    Eigen::Index fft_index;
    double param;
};

FftSign axis_sign(const ManifoldAxis &axis)
{
    return axis.kind == AxisKind::Doppler ? FftSign::Forward : FftSign::Inverse;
}

// DFT bins of an n-point transform with their parameters, sorted by parameter.
// Angle and Doppler are centred on zero; delay runs over [0, n).
std::vector<Bin> fft_bins(const ManifoldAxis &axis, Eigen::Index n)
{
    std::vector<Bin> bins;
    bins.reserve(static_cast<std::size_t>(n));
    const bool centred = axis.kind != AxisKind::Delay;
    const Eigen::Index k0 = centred ? -(n / 2) : 0;
    for (Eigen::Index k = k0; k < k0 + n; ++k)
    {
        const double f = static_cast<double>(k) / static_cast<double>(n);
        const double u = axis.kind == AxisKind::Doppler ? -f : f;
        const double param = axis.from_u(u);
        if (std::isnan(param))
            continue;
        bins.push_back({((k % n) + n) % n, param});
    }
    std::stable_sort(bins.begin(), bins.end(), [](const Bin &a, const Bin &b) { return a.param < b.param; });
    return bins;
}

Spectrum1D make_spectrum(const std::vector<Bin> &bins, const RVector &values, AxisKind axis, const char *alg)
{
    Spectrum1D s;
    s.axis = axis;
    s.algorithm = alg;
    s.grid.reserve(bins.size());
    s.power.reserve(bins.size());
    for (const Bin &b : bins)
    {
        s.grid.push_back(b.param);
        s.power.push_back(values(b.fft_index));
    }
    return s;
}

// Sum of each diagonal of C: c[l + L - 1] = sum_{i - i' = l} C(i, i').
std::vector<cd> lag_sums(const CMatrix &C)
{
    const Eigen::Index L = C.rows();
    std::vector<cd> c(static_cast<std::size_t>(2 * L - 1), cd(0.0, 0.0));
    for (Eigen::Index j = 0; j < L; ++j)
        for (Eigen::Index i = 0; i < L; ++i)
            c[static_cast<std::size_t>(i - j + L - 1)] += C(i, j);
    return c;
}

// a^H C a on the FFT grid, a_i = exp(-j 2 pi i u).
RVector quadratic_form_fft(const CMatrix &C, const ManifoldAxis &axis, Eigen::Index n)
{
    const Eigen::Index L = C.rows();
    const std::vector<cd> c = lag_sums(C);
    CVector buf = CVector::Zero(n);
    for (Eigen::Index l = -(L - 1); l <= L - 1; ++l)
        buf(((l % n) + n) % n) += c[static_cast<std::size_t>(l + L - 1)];
    const CVector f = dft(buf, n, axis_sign(axis));
    return f.real();
}

void check_grid(const std::vector<double> &grid)
{
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("spectrum grid must be strictly increasing");
}

} // namespace

double Subspace::noise_power(const CVector &a) const
{
    if (noise.cols() > 0)
        return (noise.adjoint() * a).squaredNorm();
    return std::max(0.0, a.squaredNorm() - (signal.adjoint() * a).squaredNorm());
}

Subspace eig_subspace(const CMatrix &R, Eigen::Index K)
{
    const Eigen::Index L = R.rows();
    if (K < 0 || K >= L)
        throw std::invalid_argument("subspace: K must satisfy 0 <= K < rows");
    const HermitianEig e = hermitian_eig(R);
    Subspace s;
    s.eigenvalues = e.values;
    s.signal = e.vectors.leftCols(K);
    s.noise = e.vectors.rightCols(L - K);
    const double top = std::max(0.0, e.values(0));
    s.rank_deficient = K > 0 && (top == 0.0 || e.values(K - 1) <= 1e-10 * top);
    return s;
}

Spectrum1D periodogram(const CMatrix &X, const ManifoldAxis &axis, Eigen::Index n_fft)
{
    const Eigen::Index M = X.rows(), Q = X.cols();
    if (n_fft < M)
        throw std::invalid_argument("periodogram: n_fft below row count");
    if (Q == 0)
        throw std::invalid_argument("periodogram: no snapshots");
    RVector acc = RVector::Zero(n_fft);
    constexpr Eigen::Index kChunk = 256;
    for (Eigen::Index c0 = 0; c0 < Q; c0 += kChunk)
    {
        const Eigen::Index w = std::min(kChunk, Q - c0);
        const CMatrix F = dft_columns(X.middleCols(c0, w), n_fft, axis_sign(axis));
        acc += F.cwiseAbs2().rowwise().sum();
    }
    acc /= static_cast<double>(Q) * static_cast<double>(M);
    return make_spectrum(fft_bins(axis, n_fft), acc, axis.kind, "periodogram");
}

Spectrum1D periodogram_cov(const CMatrix &R, const ManifoldAxis &axis, Eigen::Index n_fft)
{
    if (n_fft < R.rows())
        throw std::invalid_argument("periodogram: n_fft below row count");
    RVector v = quadratic_form_fft(R, axis, n_fft) / static_cast<double>(R.rows());
    return make_spectrum(fft_bins(axis, n_fft), v, axis.kind, "periodogram");
}

Spectrum1D direct_spectrum(const CMatrix &X, const ManifoldAxis &axis, const std::vector<double> &grid)
{
    check_grid(grid);
    Spectrum1D s;
    s.axis = axis.kind;
    s.algorithm = "direct";
    s.grid = grid;
    s.power.resize(grid.size());
    const double scale = 1.0 / (static_cast<double>(X.rows()) * static_cast<double>(std::max<Eigen::Index>(X.cols(), 1)));
    for (std::size_t g = 0; g < grid.size(); ++g)
    {
        const CVector a = axis.steering(grid[g], X.rows());
        s.power[g] = (a.adjoint() * X).squaredNorm() * scale;
    }
    return s;
}

Spectrum1D music(const CMatrix &X, const ManifoldAxis &axis, Eigen::Index K, const std::vector<double> &grid)
{
    return music(eig_subspace(sample_covariance(X), K), axis, grid);
}

Spectrum1D music(const Subspace &S, const ManifoldAxis &axis, const std::vector<double> &grid)
{
    check_grid(grid);
    Spectrum1D s;
    s.axis = axis.kind;
    s.algorithm = "music";
    s.rank_deficient = S.rank_deficient;
    s.grid = grid;
    s.power.resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g)
    {
        const double d = S.noise_power(axis.steering(grid[g], S.dim()));
        s.power[g] = 1.0 / std::max(d, std::numeric_limits<double>::min());
    }
    return s;
}

Spectrum1D fft_music(const CMatrix &X, const ManifoldAxis &axis, Eigen::Index K, Eigen::Index n_fft)
{
    return fft_music(eig_subspace(sample_covariance(X), K), axis, n_fft);
}

Spectrum1D fft_music(const Subspace &S, const ManifoldAxis &axis, Eigen::Index n_fft)
{
    if (n_fft < S.dim())
        throw std::invalid_argument("fft_music: n_fft below row count");
    RVector den;
    if (S.noise.cols() > 0)
        den = dft_columns(S.noise, n_fft, axis_sign(axis)).cwiseAbs2().rowwise().sum();
    else
        den = RVector::Constant(n_fft, static_cast<double>(S.dim())) -
              dft_columns(S.signal, n_fft, axis_sign(axis)).cwiseAbs2().rowwise().sum();
    RVector v(n_fft);
    for (Eigen::Index i = 0; i < n_fft; ++i)
        v(i) = 1.0 / std::max(den(i), std::numeric_limits<double>::min());
    Spectrum1D s = make_spectrum(fft_bins(axis, n_fft), v, axis.kind, "fft-music");
    s.rank_deficient = S.rank_deficient;
    return s;
}

std::vector<double> root_music(const CMatrix &X, const ManifoldAxis &axis, Eigen::Index K)
{
    if (K == 0)
        return {};
    return root_music(eig_subspace(sample_covariance(X), K), axis, K);
}

std::vector<double> root_music(const Subspace &S, const ManifoldAxis &axis, Eigen::Index K)
{
    if (K == 0)
        return {};
    const Eigen::Index L = S.dim();
    const CMatrix C = S.noise.cols() > 0 ? CMatrix(S.noise * S.noise.adjoint())
                                         : CMatrix(CMatrix::Identity(L, L) - S.signal * S.signal.adjoint());
    // a^H C a = sum_l c_l z^l with z = exp(j 2 pi u); multiply through by z^(L-1).
    const std::vector<cd> coeffs = lag_sums(C);
    std::vector<cd> roots = polynomial_roots(coeffs);
    std::vector<cd> inside;
    for (const cd &z : roots)
        if (std::abs(z) < 1.0)
            inside.push_back(z);
    std::stable_sort(inside.begin(), inside.end(), [](const cd &a, const cd &b) { return std::abs(a) > std::abs(b); });
    std::vector<double> out;
    for (const cd &z : inside)
    {
        if (static_cast<Eigen::Index>(out.size()) == K)
            break;
        const double p = axis.from_u(std::arg(z) / (2.0 * kPi));
        if (!std::isnan(p))
            out.push_back(p);
    }
    if (static_cast<Eigen::Index>(out.size()) < K)
        throw EstimationError("root_music: fewer admissible roots than K");
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> esprit(const CMatrix &X, const ManifoldAxis &axis, Eigen::Index K, EspritVariant v)
{
    if (K < 1 || K > X.rows() - 1)
        throw std::invalid_argument("esprit: K must satisfy 1 <= K <= rows - 1");
    const Subspace S = eig_subspace(sample_covariance(X), K);
    return esprit_from_basis(S.signal, axis, v);
}

std::vector<double> esprit_from_basis(const CMatrix &Es, const ManifoldAxis &axis, EspritVariant v)
{
    const Eigen::Index L = Es.rows(), K = Es.cols();
    if (K < 1 || K > L - 1)
        throw std::invalid_argument("esprit: K must satisfy 1 <= K <= rows - 1");
    const CMatrix E1 = Es.topRows(L - 1);
    const CMatrix E2 = Es.bottomRows(L - 1);
    Eigen::JacobiSVD<CMatrix> sv(E1);
    const RVector &s = sv.singularValues();
    if (s(s.size() - 1) <= 1e-10 * s(0))
        throw EstimationError("esprit: rank-deficient subarray basis");

    CMatrix Psi;
    if (v == EspritVariant::LS)
    {
        Psi = E1.colPivHouseholderQr().solve(E2);
    }
    else
    {
        CMatrix stacked(L - 1, 2 * K);
        stacked << E1, E2;
        const HermitianEig e = hermitian_eig(stacked.adjoint() * stacked);
        const CMatrix V12 = e.vectors.block(0, K, K, K);
        const CMatrix V22 = e.vectors.block(K, K, K, K);
        Psi = -V12 * V22.inverse();
    }
    std::vector<double> out;
    for (const cd &lam : eigenvalues(Psi))
    {
        // lambda = exp(-j 2 pi u)
        const double p = axis.from_u(-std::arg(lam) / (2.0 * kPi));
        if (std::isnan(p))
            throw EstimationError("esprit: eigenvalue phase outside the parameter domain");
        out.push_back(p);
    }
    std::sort(out.begin(), out.end());
    return out;
}

Subspace pm_subspace(const CMatrix &R, Eigen::Index K)
{
    const Eigen::Index L = R.rows();
    if (K < 1 || K >= L)
        throw std::invalid_argument("pm_subspace: K must satisfy 1 <= K < rows");
    const CMatrix R1 = R.leftCols(K);
    const CMatrix R2 = R.rightCols(L - K);
    const CMatrix G = R1.adjoint() * R1;
    Eigen::JacobiSVD<CMatrix> sv(G);
    const RVector &s = sv.singularValues();
    if (!(s(0) > 0.0) || s(s.size() - 1) <= 1e-14 * s(0))
        throw EstimationError("pm_subspace: ill-conditioned R1^H R1");
    const CMatrix P = G.ldlt().solve(R1.adjoint() * R2); // K x (L-K)

    CMatrix noise(L, L - K);
    noise << P, -CMatrix::Identity(L - K, L - K);
    CMatrix signal(L, K);
    signal << CMatrix::Identity(K, K), P.adjoint();

    Subspace out;
    out.noise = orthonormalize(noise);
    out.signal = orthonormalize(signal);
    return out;
}

Spectrum1D pm_music(const CMatrix &X, const ManifoldAxis &axis, Eigen::Index K, const std::vector<double> &grid)
{
    Spectrum1D s = music(pm_subspace(sample_covariance(X), K), axis, grid);
    s.algorithm = "pm-music";
    return s;
}

std::vector<double> pm_esprit(const CMatrix &X, const ManifoldAxis &axis, Eigen::Index K)
{
    return esprit_from_basis(pm_subspace(sample_covariance(X), K).signal, axis, EspritVariant::LS);
}

OmpResult omp(const CMatrix &X, const ManifoldAxis &axis, Eigen::Index K, const std::vector<double> &grid)
{
    if (K < 0 || static_cast<std::size_t>(K) > grid.size())
        throw std::invalid_argument("omp: grid smaller than K");
    const Eigen::Index M = X.rows();
    const auto G = static_cast<Eigen::Index>(grid.size());
    CMatrix D(M, G);
    for (Eigen::Index g = 0; g < G; ++g)
        D.col(g) = axis.steering(grid[static_cast<std::size_t>(g)], M);

    // ||a^H Res||^2 = a^H (P Rxx P) a with P the residual projector, Rxx = X X^H.
    const CMatrix Rxx = X * X.adjoint();
    OmpResult out;
    CMatrix P = CMatrix::Identity(M, M);
    CMatrix As(M, 0);
    for (Eigen::Index it = 0; it < K; ++it)
    {
        const CMatrix Gm = P * Rxx * P;
        const CMatrix GD = Gm * D;
        Eigen::Index best = -1;
        double best_v = -1.0;
        for (Eigen::Index g = 0; g < G; ++g)
        {
            const double v = D.col(g).dot(GD.col(g)).real();
            if (v > best_v)
            {
                best_v = v;
                best = g;
            }
        }
        const auto bi = static_cast<std::size_t>(best);
        if (std::find(out.support.begin(), out.support.end(), bi) != out.support.end())
            throw EstimationError("omp: atom selected twice (degenerate dictionary)");
        out.support.push_back(bi);
        As.conservativeResize(Eigen::NoChange, As.cols() + 1);
        As.col(As.cols() - 1) = D.col(best);
        const CMatrix Api = pinv(As);
        P = CMatrix::Identity(M, M) - As * Api;
    }
    const CMatrix S = As.cols() > 0 ? CMatrix(pinv(As) * X) : CMatrix(0, X.cols());
    out.residual_norm = (X - As * S).norm();
    for (Eigen::Index k = 0; k < S.rows(); ++k)
    {
        out.params.push_back(grid[out.support[static_cast<std::size_t>(k)]]);
        out.gains.push_back(std::sqrt(S.row(k).squaredNorm() / static_cast<double>(std::max<Eigen::Index>(X.cols(), 1))));
    }
    return out;
}

Eigen::Index estimate_model_order(const RVector &ev)
{
    Eigen::Index best = 0;
    double best_ratio = 0.0;
    for (Eigen::Index i = 0; i + 1 < ev.size(); ++i)
    {
        const double lo = std::max(ev(i + 1), std::numeric_limits<double>::min());
        const double r = ev(i) / lo;
        if (r > best_ratio)
        {
            best_ratio = r;
            best = i + 1;
        }
    }
    return best;
}

CMatrix smooth_snapshots(const CMatrix &X, Eigen::Index sub)
{
    const Eigen::Index L = X.rows();
    if (sub < 1 || sub > L)
        throw std::invalid_argument("smooth_snapshots: window outside [1, rows]");
    const Eigen::Index shifts = L - sub + 1;
    CMatrix out(sub, shifts * X.cols());
    for (Eigen::Index q = 0; q < X.cols(); ++q)
        for (Eigen::Index s = 0; s < shifts; ++s)
            out.col(q * shifts + s) = X.col(q).segment(s, sub);
    return out;
}
} // namespace isac
