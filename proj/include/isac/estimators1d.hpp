// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isac/spectrum.hpp"

namespace isac
{
// Signal/noise split of a covariance. `noise` may be empty when only the
// signal part was computed; projections then use I - Es Es^H.
struct Subspace
{
    RVector eigenvalues; // descending
    CMatrix signal;
    CMatrix noise;
    bool rank_deficient = false;

    Eigen::Index dim() const { return signal.rows(); }
    // ||En^H a||^2
    double noise_power(const CVector &a) const;
};

Subspace eig_subspace(const CMatrix &R, Eigen::Index K);

Spectrum1D periodogram(const CMatrix &X, const ManifoldAxis &axis, Eigen::Index n_fft);
// Same values as periodogram() evaluated from R = X X^H / Q via lag sums.
Spectrum1D periodogram_cov(const CMatrix &R, const ManifoldAxis &axis, Eigen::Index n_fft);
Spectrum1D direct_spectrum(const CMatrix &X, const ManifoldAxis &axis, const std::vector<double> &grid);

Spectrum1D music(const CMatrix &X, const ManifoldAxis &axis, Eigen::Index K, const std::vector<double> &grid);
Spectrum1D music(const Subspace &S, const ManifoldAxis &axis, const std::vector<double> &grid);

Spectrum1D fft_music(const CMatrix &X, const ManifoldAxis &axis, Eigen::Index K, Eigen::Index n_fft);
Spectrum1D fft_music(const Subspace &S, const ManifoldAxis &axis, Eigen::Index n_fft);

std::vector<double> root_music(const CMatrix &X, const ManifoldAxis &axis, Eigen::Index K);
std::vector<double> root_music(const Subspace &S, const ManifoldAxis &axis, Eigen::Index K);

enum class EspritVariant
{
    LS,
    TLS,
};

std::vector<double> esprit(const CMatrix &X, const ManifoldAxis &axis, Eigen::Index K, EspritVariant v);
// Shift invariance on a given signal basis (rows x K).
std::vector<double> esprit_from_basis(const CMatrix &Es, const ManifoldAxis &axis, EspritVariant v);

// Propagator split of R = [R1 | R2]; noise and signal bases are orthonormal.
Subspace pm_subspace(const CMatrix &R, Eigen::Index K);
Spectrum1D pm_music(const CMatrix &X, const ManifoldAxis &axis, Eigen::Index K, const std::vector<double> &grid);
std::vector<double> pm_esprit(const CMatrix &X, const ManifoldAxis &axis, Eigen::Index K);

struct OmpResult
{
    std::vector<double> params;
    std::vector<double> gains; // RMS amplitude of each support row
    std::vector<std::size_t> support;
    double residual_norm = 0.0;
};

OmpResult omp(const CMatrix &X, const ManifoldAxis &axis, Eigen::Index K, const std::vector<double> &grid);

// Index of the largest consecutive eigenvalue ratio; optional K estimate.
Eigen::Index estimate_model_order(const RVector &eigenvalues_desc);

// Forward spatial smoothing of a single snapshot into `sub`-long windows.
CMatrix smooth_snapshots(const CMatrix &X, Eigen::Index sub);
} // namespace isac
