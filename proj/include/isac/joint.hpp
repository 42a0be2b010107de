// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isac/estimators1d.hpp"
#include "isac/ofdm.hpp"

#include <array>

namespace isac
{
struct JointAxes
{
    ManifoldAxis angle = ManifoldAxis::angle(0.5);
    ManifoldAxis delay = ManifoldAxis::delay(120e3);
    ManifoldAxis doppler = ManifoldAxis::doppler(1.25 / 120e3);

    static JointAxes from(const ArrayGeometry &geom, const OfdmConfig &ofdm);
};

struct SmoothingWindow
{
    Eigen::Index m_sub = 0; // 0: angle axis not smoothed (2D case)
    Eigen::Index n_sub = 0;
    Eigen::Index p_sub = 0;
    bool forward_backward = false;
};

// 2D: column q = n_s + p_s (N - N_sub + 1); vec with delay index fastest.
CMatrix mssp(const CMatrix &X, const SmoothingWindow &w);
// 3D: antenna fastest, then delay, then Doppler.
CMatrix mssp(const Tensor3 &Y, const SmoothingWindow &w);
// Column count of the 3D smoothed matrix and a block of its columns.
Eigen::Index mssp_count(const Tensor3 &Y, const SmoothingWindow &w);
void mssp_columns(const Tensor3 &Y, const SmoothingWindow &w, Eigen::Index c0, Eigen::Index count, CMatrix &out);

SmoothingWindow default_window_2d(Eigen::Index N, Eigen::Index P);
SmoothingWindow default_window_3d(Eigen::Index M, Eigen::Index N, Eigen::Index P);

// x = delay (s), y = Doppler (Hz). Power normalized by N P.
Spectrum2D periodogram2d(const CMatrix &X, const JointAxes &ax, Eigen::Index n_fft_tau, Eigen::Index n_fft_nu);
// Matched filter |a_tau^H X conj(a_nu)|^2 / (N P) on arbitrary grids.
Spectrum2D direct_periodogram2d(const CMatrix &X, const JointAxes &ax, const std::vector<double> &tau_grid,
                                const std::vector<double> &nu_grid);

Spectrum2D music2d(const CMatrix &X, Eigen::Index K, const SmoothingWindow &w, const JointAxes &ax,
                   const std::vector<double> &tau_grid, const std::vector<double> &nu_grid);
// Spectrum from a precomputed subspace of dimension n_sub * p_sub.
Spectrum2D music2d(const Subspace &S, const SmoothingWindow &w, const JointAxes &ax,
                   const std::vector<double> &tau_grid, const std::vector<double> &nu_grid);

// x = angle (deg), y = delay (s), z = Doppler (Hz). Power normalized by M N P.
Spectrum3D periodogram3d(const SensingTensor &y, const JointAxes &ax, const std::array<Eigen::Index, 3> &n_fft);

struct Music3dOptions
{
    Eigen::Index max_dim = 4096;
    Eigen::Index coarse_oversample = 4; // coarse grid points per Rayleigh cell
    double refine_tol_cells = 1e-4;
};

struct Music3dResult
{
    Spectrum3D coarse;
    std::vector<std::array<double, 3>> peaks; // refined (angle, delay, Doppler)
    std::vector<double> peak_power;
    Subspace subspace;
};

Music3dResult music3d(const SensingTensor &y, Eigen::Index K, const SmoothingWindow &w, const JointAxes &ax,
                      const Music3dOptions &opt = {});
// 1 / (a^H En En^H a) at a single point for the 3D manifold of the window.
double music3d_value(const Subspace &S, const SmoothingWindow &w, const JointAxes &ax, double angle_deg, double tau_s,
                     double nu_hz);
} // namespace isac
