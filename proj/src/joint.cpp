// SPDX-License-Identifier: Apache-2.0
#include "isac/joint.hpp"
#include "isac/fft.hpp"
#include "isac/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>

namespace isac
{
namespace
{
struct AxisBins
{
    std::vector<Eigen::Index> index; // FFT output index
    std::vector<double> param;
};

AxisBins bins_for(const ManifoldAxis &axis, Eigen::Index n)
{
    AxisBins b;
    const bool centred = axis.kind != AxisKind::Delay;
    const Eigen::Index k0 = centred ? -(n / 2) : 0;
    for (Eigen::Index k = k0; k < k0 + n; ++k)
    {
        const double f = static_cast<double>(k) / static_cast<double>(n);
        const double p = axis.from_u(axis.kind == AxisKind::Doppler ? -f : f);
        if (std::isnan(p))
            continue;
        b.index.push_back(((k % n) + n) % n);
        b.param.push_back(p);
    }
    return b;
}

CMatrix steering_matrix(const ManifoldAxis &axis, const std::vector<double> &grid, Eigen::Index len)
{
    CMatrix A(len, static_cast<Eigen::Index>(grid.size()));
    for (std::size_t g = 0; g < grid.size(); ++g)
        A.col(static_cast<Eigen::Index>(g)) = axis.steering(grid[g], len);
    return A;
}

void check_window(const SmoothingWindow &w, Eigen::Index M, Eigen::Index N, Eigen::Index P, bool use_m)
{
    if (w.n_sub < 1 || w.n_sub > N || w.p_sub < 1 || w.p_sub > P)
        throw std::invalid_argument("mssp: window exceeds data dimensions");
    if (use_m && (w.m_sub < 1 || w.m_sub > M))
        throw std::invalid_argument("mssp: antenna window exceeds array size");
}

CMatrix append_backward(const CMatrix &Xs)
{
    CMatrix out(Xs.rows(), 2 * Xs.cols());
    out.leftCols(Xs.cols()) = Xs;
    out.rightCols(Xs.cols()) = Xs.conjugate().colwise().reverse();
    return out;
}

std::vector<double> uniform_grid(double lo, double hi, Eigen::Index n)
{
    std::vector<double> g(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
    return g;
}
} // namespace

JointAxes JointAxes::from(const ArrayGeometry &geom, const OfdmConfig &ofdm)
{
    return {ManifoldAxis::angle(geom.spacing_wavelengths), ManifoldAxis::delay(ofdm.subcarrier_spacing_hz),
            ManifoldAxis::doppler(ofdm.symbol_period())};
}

SmoothingWindow default_window_2d(Eigen::Index N, Eigen::Index P) { return {0, N / 2, P / 2, false}; }

SmoothingWindow default_window_3d(Eigen::Index M, Eigen::Index N, Eigen::Index P)
{
    return {std::max<Eigen::Index>(1, M / 4), std::max<Eigen::Index>(1, N / 4), std::max<Eigen::Index>(1, P / 4),
            false};
}

CMatrix mssp(const CMatrix &X, const SmoothingWindow &w)
{
    const Eigen::Index N = X.rows(), P = X.cols();
    check_window(w, 1, N, P, false);
    const Eigen::Index sn = N - w.n_sub + 1, sp = P - w.p_sub + 1;
    CMatrix out(w.n_sub * w.p_sub, sn * sp);
    for (Eigen::Index ps = 0; ps < sp; ++ps)
        for (Eigen::Index ns = 0; ns < sn; ++ns)
        {
            const Eigen::Index q = ns + ps * sn;
            for (Eigen::Index p = 0; p < w.p_sub; ++p)
                out.col(q).segment(p * w.n_sub, w.n_sub) = X.col(ps + p).segment(ns, w.n_sub);
        }
    return w.forward_backward ? append_backward(out) : out;
}

Eigen::Index mssp_count(const Tensor3 &Y, const SmoothingWindow &w)
{
    const auto M = static_cast<Eigen::Index>(Y.dim_m()), N = static_cast<Eigen::Index>(Y.dim_n()),
               P = static_cast<Eigen::Index>(Y.dim_p());
    check_window(w, M, N, P, true);
    const Eigen::Index q = (M - w.m_sub + 1) * (N - w.n_sub + 1) * (P - w.p_sub + 1);
    return w.forward_backward ? 2 * q : q;
}

void mssp_columns(const Tensor3 &Y, const SmoothingWindow &w, Eigen::Index c0, Eigen::Index count, CMatrix &out)
{
    const auto M = static_cast<Eigen::Index>(Y.dim_m()), N = static_cast<Eigen::Index>(Y.dim_n());
    const Eigen::Index total = mssp_count(Y, w);
    if (c0 < 0 || count < 0 || c0 + count > total)
        throw std::invalid_argument("mssp_columns: range outside the smoothed matrix");
    const Eigen::Index sm = M - w.m_sub + 1, sn = N - w.n_sub + 1;
    const Eigen::Index fwd = w.forward_backward ? total / 2 : total;
    const Eigen::Index D = w.m_sub * w.n_sub * w.p_sub;
    out.resize(D, count);
    for (Eigen::Index c = 0; c < count; ++c)
    {
        const Eigen::Index q = (c0 + c) % fwd;
        const Eigen::Index ms = q % sm, ns = (q / sm) % sn, ps = q / (sm * sn);
        Eigen::Index r = 0;
        for (Eigen::Index p = 0; p < w.p_sub; ++p)
            for (Eigen::Index n = 0; n < w.n_sub; ++n)
                for (Eigen::Index m = 0; m < w.m_sub; ++m)
                    out(r++, c) = Y(static_cast<std::size_t>(ms + m), static_cast<std::size_t>(ns + n),
                                    static_cast<std::size_t>(ps + p));
        if (c0 + c >= fwd)
            out.col(c) = out.col(c).conjugate().reverse().eval();
    }
}

CMatrix mssp(const Tensor3 &Y, const SmoothingWindow &w)
{
    CMatrix out;
    mssp_columns(Y, w, 0, mssp_count(Y, w), out);
    return out;
}

Spectrum2D periodogram2d(const CMatrix &X, const JointAxes &ax, Eigen::Index n_fft_tau, Eigen::Index n_fft_nu)
{
    const Eigen::Index N = X.rows(), P = X.cols();
    if (n_fft_tau < N || n_fft_nu < P)
        throw std::invalid_argument("periodogram2d: n_fft below data dimensions");
    const CMatrix F1 = dft_columns(X, n_fft_tau, FftSign::Inverse);                      // n_tau x P
    const CMatrix F2 = dft_columns(F1.transpose(), n_fft_nu, FftSign::Forward);           // n_nu x n_tau
    const AxisBins bt = bins_for(ax.delay, n_fft_tau), bv = bins_for(ax.doppler, n_fft_nu);
    Spectrum2D s;
    s.x = bt.param;
    s.y = bv.param;
    s.x_name = "delay_s";
    s.y_name = "doppler_hz";
    s.algorithm = "periodogram2d";
    s.power.resize(s.x.size() * s.y.size());
    const double scale = 1.0 / (static_cast<double>(N) * static_cast<double>(P));
    for (std::size_t i = 0; i < s.x.size(); ++i)
        for (std::size_t j = 0; j < s.y.size(); ++j)
            s.power[i * s.y.size() + j] = std::norm(F2(bv.index[j], bt.index[i])) * scale;
    return s;
}

Spectrum2D direct_periodogram2d(const CMatrix &X, const JointAxes &ax, const std::vector<double> &tau_grid,
                                const std::vector<double> &nu_grid)
{
    const Eigen::Index N = X.rows(), P = X.cols();
    const CMatrix At = steering_matrix(ax.delay, tau_grid, N);
    const CMatrix Av = steering_matrix(ax.doppler, nu_grid, P);
    // a_tau^H X conj(a_nu): a_nu for the Doppler axis already carries exp(+j 2 pi p Ts nu)
    const CMatrix Z = At.adjoint() * X * Av.conjugate();
    Spectrum2D s;
    s.x = tau_grid;
    s.y = nu_grid;
    s.x_name = "delay_s";
    s.y_name = "doppler_hz";
    s.algorithm = "direct2d";
    s.power.resize(tau_grid.size() * nu_grid.size());
    const double scale = 1.0 / (static_cast<double>(N) * static_cast<double>(P));
    for (std::size_t i = 0; i < tau_grid.size(); ++i)
        for (std::size_t j = 0; j < nu_grid.size(); ++j)
            s.power[i * nu_grid.size() + j] =
                std::norm(Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) * scale;
    return s;
}

Spectrum2D music2d(const CMatrix &X, Eigen::Index K, const SmoothingWindow &w, const JointAxes &ax,
                   const std::vector<double> &tau_grid, const std::vector<double> &nu_grid)
{
    const CMatrix Xs = mssp(X, w);
    const Eigen::Index D = Xs.rows();
    if (K < 1 || K >= D)
        throw std::invalid_argument("music2d: K must satisfy 1 <= K < N_sub P_sub");
    const HermitianEig e = hermitian_eig_top(sample_covariance(Xs), K);
    Subspace S;
    S.eigenvalues = e.values;
    S.signal = e.vectors;
    S.rank_deficient = e.values(K - 1) <= 1e-10 * std::max(e.values(0), 0.0);
    return music2d(S, w, ax, tau_grid, nu_grid);
}

Spectrum2D music2d(const Subspace &S, const SmoothingWindow &w, const JointAxes &ax,
                   const std::vector<double> &tau_grid, const std::vector<double> &nu_grid)
{
    const Eigen::Index D = w.n_sub * w.p_sub;
    if (S.dim() != D)
        throw std::invalid_argument("music2d: subspace dimension does not match window");
    const CMatrix At = steering_matrix(ax.delay, tau_grid, w.n_sub);
    const CMatrix Av = steering_matrix(ax.doppler, nu_grid, w.p_sub);
    const auto Gt = static_cast<Eigen::Index>(tau_grid.size()), Gv = static_cast<Eigen::Index>(nu_grid.size());
    Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(Gt, Gv);
    for (Eigen::Index k = 0; k < S.signal.cols(); ++k)
    {
        const CMatrix E = Eigen::Map<const CMatrix>(S.signal.col(k).data(), w.n_sub, w.p_sub);
        const CMatrix Z = At.transpose() * E.conjugate() * Av; // e^H (a_nu kron a_tau)
        proj += Z.cwiseAbs2();
    }
    Spectrum2D s;
    s.x = tau_grid;
    s.y = nu_grid;
    s.x_name = "delay_s";
    s.y_name = "doppler_hz";
    s.algorithm = "music2d";
    s.power.resize(static_cast<std::size_t>(Gt * Gv));
    for (Eigen::Index i = 0; i < Gt; ++i)
        for (Eigen::Index j = 0; j < Gv; ++j)
        {
            const double den = static_cast<double>(D) - proj(i, j);
            s.power[static_cast<std::size_t>(i * Gv + j)] = 1.0 / std::max(den, std::numeric_limits<double>::min());
        }
    return s;
}

Spectrum3D periodogram3d(const SensingTensor &y, const JointAxes &ax, const std::array<Eigen::Index, 3> &n_fft)
{
    if (y.kind != TensorKind::SymbolStripped)
        throw std::invalid_argument("periodogram3d: tensor must be symbol-stripped");
    const auto M = static_cast<Eigen::Index>(y.data.dim_m()), N = static_cast<Eigen::Index>(y.data.dim_n()),
               P = static_cast<Eigen::Index>(y.data.dim_p());
    const Eigen::Index n1 = n_fft[0], n2 = n_fft[1], n3 = n_fft[2];
    if (n1 < M || n2 < N || n3 < P)
        throw std::invalid_argument("periodogram3d: n_fft below data dimensions");

    const CMatrix A = Eigen::Map<const CMatrix>(y.data.data(), M, N * P);
    const CMatrix FA = dft_columns(A, n1, FftSign::Inverse); // (k1, n + N p)
    CMatrix B(N, n1 * P);
    for (Eigen::Index p = 0; p < P; ++p)
        for (Eigen::Index n = 0; n < N; ++n)
            for (Eigen::Index k1 = 0; k1 < n1; ++k1)
                B(n, k1 + n1 * p) = FA(k1, n + N * p);
    const CMatrix FB = dft_columns(B, n2, FftSign::Inverse); // (k2, k1 + n1 p)
    CMatrix C(P, n1 * n2);
    for (Eigen::Index p = 0; p < P; ++p)
        for (Eigen::Index k1 = 0; k1 < n1; ++k1)
            for (Eigen::Index k2 = 0; k2 < n2; ++k2)
                C(p, k1 + n1 * k2) = FB(k2, k1 + n1 * p);
    const CMatrix FC = dft_columns(C, n3, FftSign::Forward); // (k3, k1 + n1 k2)

    const AxisBins b1 = bins_for(ax.angle, n1), b2 = bins_for(ax.delay, n2), b3 = bins_for(ax.doppler, n3);
    Spectrum3D s;
    s.x = b1.param;
    s.y = b2.param;
    s.z = b3.param;
    s.x_name = "angle_deg";
    s.y_name = "delay_s";
    s.z_name = "doppler_hz";
    s.algorithm = "periodogram3d";
    s.power.resize(s.x.size() * s.y.size() * s.z.size());
    const double scale = 1.0 / (static_cast<double>(M) * static_cast<double>(N) * static_cast<double>(P));
    for (std::size_t i = 0; i < s.x.size(); ++i)
        for (std::size_t j = 0; j < s.y.size(); ++j)
        {
            const Eigen::Index col = b1.index[i] + n1 * b2.index[j];
            for (std::size_t l = 0; l < s.z.size(); ++l)
                s.power[(i * s.y.size() + j) * s.z.size() + l] = std::norm(FC(b3.index[l], col)) * scale;
        }
    return s;
}

double music3d_value(const Subspace &S, const SmoothingWindow &w, const JointAxes &ax, double angle_deg, double tau_s,
                     double nu_hz)
{
    const CVector ar = ax.angle.steering(angle_deg, w.m_sub);
    const CVector at = ax.delay.steering(tau_s, w.n_sub);
    const CVector av = ax.doppler.steering(nu_hz, w.p_sub);
    CVector a(w.m_sub * w.n_sub * w.p_sub);
    Eigen::Index r = 0;
    for (Eigen::Index p = 0; p < w.p_sub; ++p)
        for (Eigen::Index n = 0; n < w.n_sub; ++n)
            for (Eigen::Index m = 0; m < w.m_sub; ++m)
                a(r++) = av(p) * at(n) * ar(m);
    return 1.0 / std::max(S.noise_power(a), std::numeric_limits<double>::min());
}

Music3dResult music3d(const SensingTensor &y, Eigen::Index K, const SmoothingWindow &w, const JointAxes &ax,
                      const Music3dOptions &opt)
{
    if (y.kind != TensorKind::SymbolStripped)
        throw std::invalid_argument("music3d: tensor must be symbol-stripped");
    const Eigen::Index D = w.m_sub * w.n_sub * w.p_sub;
    if (D > opt.max_dim)
        throw std::length_error("music3d: subspace dimension " + std::to_string(D) + " exceeds cap " +
                                std::to_string(opt.max_dim));
    if (K < 1 || K >= D)
        throw std::invalid_argument("music3d: K must satisfy 1 <= K < window size");
    // the smoothed matrix can run to gigabytes, so it is generated in column blocks
    const Eigen::Index n_snap = mssp_count(y.data, w);
    const BlockSource block = [&](Eigen::Index c0, Eigen::Index n, CMatrix &out) {
        mssp_columns(y.data, w, c0, n, out);
    };
    HermitianEig e;
    if (D > 1024)
    {
        e = streamed_eig_top(D, n_snap, block, K);
    }
    else
    {
        CMatrix R = CMatrix::Zero(D, D), Xc;
        for (Eigen::Index c0 = 0; c0 < n_snap; c0 += 4096)
        {
            block(c0, std::min<Eigen::Index>(4096, n_snap - c0), Xc);
            R.selfadjointView<Eigen::Lower>().rankUpdate(Xc, 1.0 / static_cast<double>(n_snap));
        }
        R = R.selfadjointView<Eigen::Lower>();
        e = hermitian_eig_top(R, K);
    }

    Music3dResult res;
    res.subspace.eigenvalues = e.values;
    res.subspace.signal = e.vectors;
    res.subspace.rank_deficient = e.values(K - 1) <= 1e-10 * std::max(e.values(0), 0.0);
    const Subspace &S = res.subspace;

    // coarse grids: `coarse_oversample` points per Rayleigh cell of the window
    const Eigen::Index os = std::max<Eigen::Index>(1, opt.coarse_oversample);
    std::vector<double> gth;
    for (double u : uniform_grid(-0.5, 0.5, os * w.m_sub))
    {
        const double th = ax.angle.from_u(u);
        if (!std::isnan(th))
            gth.push_back(th);
    }
    std::sort(gth.begin(), gth.end());
    const std::vector<double> gtau = uniform_grid(ax.delay.domain_lo(), ax.delay.domain_hi(), os * w.n_sub);
    const std::vector<double> gnu = uniform_grid(ax.doppler.domain_lo(), ax.doppler.domain_hi(), os * w.p_sub);

    const CMatrix Ar = steering_matrix(ax.angle, gth, w.m_sub);
    const CMatrix At = steering_matrix(ax.delay, gtau, w.n_sub);
    const CMatrix Av = steering_matrix(ax.doppler, gnu, w.p_sub);
    const auto G1 = static_cast<Eigen::Index>(gth.size()), G2 = static_cast<Eigen::Index>(gtau.size()),
               G3 = static_cast<Eigen::Index>(gnu.size());
    std::vector<double> proj(static_cast<std::size_t>(G1 * G2 * G3), 0.0);
    for (Eigen::Index k = 0; k < S.signal.cols(); ++k)
    {
        const CMatrix E = Eigen::Map<const CMatrix>(S.signal.col(k).data(), w.m_sub, w.n_sub * w.p_sub).conjugate();
        const CMatrix T1 = Ar.transpose() * E; // G1 x (n_sub p_sub)
        for (Eigen::Index g = 0; g < G1; ++g)
        {
            CMatrix Mg(w.n_sub, w.p_sub);
            for (Eigen::Index p = 0; p < w.p_sub; ++p)
                for (Eigen::Index n = 0; n < w.n_sub; ++n)
                    Mg(n, p) = T1(g, n + w.n_sub * p);
            const CMatrix Z = At.transpose() * Mg * Av; // G2 x G3
            for (Eigen::Index i = 0; i < G2; ++i)
                for (Eigen::Index j = 0; j < G3; ++j)
                    proj[static_cast<std::size_t>((g * G2 + i) * G3 + j)] += std::norm(Z(i, j));
        }
    }
    res.coarse.x = gth;
    res.coarse.y = gtau;
    res.coarse.z = gnu;
    res.coarse.x_name = "angle_deg";
    res.coarse.y_name = "delay_s";
    res.coarse.z_name = "doppler_hz";
    res.coarse.algorithm = "music3d";
    res.coarse.power.resize(proj.size());
    for (std::size_t i = 0; i < proj.size(); ++i)
        res.coarse.power[i] = 1.0 / std::max(static_cast<double>(D) - proj[i], std::numeric_limits<double>::min());

    // local refinement in normalized-frequency units (one unit = one Rayleigh cell)
    // extra candidates: several coarse maxima can climb onto the same peak
    const auto coarse = find_peaks_3d(res.coarse, static_cast<std::size_t>(3 * K), {1, 1, 1}, 0.0, false);
    std::vector<std::array<double, 3>> found_u;
    std::vector<double> found_p;
    const double cell[3] = {1.0 / static_cast<double>(w.m_sub), 1.0 / static_cast<double>(w.n_sub),
                            1.0 / static_cast<double>(w.p_sub)};
    for (const GridPeak &pk : coarse)
    {
        double c[3] = {ax.angle.to_u(pk.coords[0]), ax.delay.to_u(pk.coords[1]), ax.doppler.to_u(pk.coords[2])};
        auto eval = [&](const double *v) {
            const double th = ax.angle.from_u(v[0]);
            if (std::isnan(th))
                return -1.0;
            return music3d_value(S, w, ax, th, ax.delay.from_u(v[1]), ax.doppler.from_u(v[2]));
        };
        double best = eval(c);
        double h = 0.5 / static_cast<double>(os);
        while (h > opt.refine_tol_cells)
        {
            double cand[3] = {c[0], c[1], c[2]};
            double cand_v = best;
            for (int i = -1; i <= 1; ++i)
                for (int j = -1; j <= 1; ++j)
                    for (int l = -1; l <= 1; ++l)
                    {
                        if (i == 0 && j == 0 && l == 0)
                            continue;
                        const double v[3] = {c[0] + i * h * cell[0], c[1] + j * h * cell[1], c[2] + l * h * cell[2]};
                        const double f = eval(v);
                        if (f > cand_v)
                        {
                            cand_v = f;
                            std::copy(v, v + 3, cand);
                        }
                    }
            if (cand_v > best)
            {
                best = cand_v;
                std::copy(cand, cand + 3, c);
            }
            else
            {
                h *= 0.5;
            }
        }
        found_u.push_back({c[0], c[1], c[2]});
        found_p.push_back(best);
    }
    std::vector<std::size_t> order(found_p.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return found_p[a] > found_p[b]; });
    std::vector<std::array<double, 3>> kept;
    for (std::size_t i : order)
    {
        const auto &u = found_u[i];
        const bool dup = std::any_of(kept.begin(), kept.end(), [&](const std::array<double, 3> &v) {
            bool same = true;
            for (int d = 0; d < 3; ++d)
            {
                // steering is 1-periodic in u on every axis
                const double du = std::remainder(u[d] - v[d], 1.0);
                same = same && std::abs(du) < 0.25 * cell[d];
            }
            return same;
        });
        if (dup)
            continue;
        kept.push_back(u);
        res.peaks.push_back({ax.angle.from_u(u[0]), ax.delay.from_u(u[1]), ax.doppler.from_u(u[2])});
        res.peak_power.push_back(found_p[i]);
        if (kept.size() == static_cast<std::size_t>(K))
            break;
    }
    return res;
}
} // namespace isac
