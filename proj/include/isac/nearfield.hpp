// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isac/estimators1d.hpp"
#include "isac/scene.hpp"

#include <optional>

namespace isac::nearfield
{
struct NearFieldGrid
{
    std::vector<double> angles_deg;
    std::vector<double> ranges_m;

    void validate() const;
};

// `n` log-spaced ranges over [0.1, 1] x Rayleigh distance.
std::vector<double> default_ranges(const ArrayGeometry &geom, const Carrier &carrier, std::size_t n = 60);

struct CovarianceBundle
{
    CMatrix R;
    Subspace sub;
    Eigen::Index K = 0;
};

CovarianceBundle make_bundle(const CMatrix &X, Eigen::Index K);
CovarianceBundle make_bundle_from_covariance(const CMatrix &R, Eigen::Index K);

// Spectra with x = angle (deg), y = range (m); exact spherical steering.
Spectrum2D bf2d(const CMatrix &R, const ArrayGeometry &geom, const Carrier &carrier, const NearFieldGrid &grid);
Spectrum2D music2d_nf(const CovarianceBundle &b, const ArrayGeometry &geom, const Carrier &carrier,
                      const NearFieldGrid &grid);

struct NearFieldEstimate
{
    double angle_deg = 0.0;
    double range_m = 0.0;
    double score = 0.0;
};

struct NearFieldResult
{
    std::vector<NearFieldEstimate> estimates; // sorted by angle
    bool flagged = false;
    std::string note;
    std::size_t grid_evaluations = 0;
    Spectrum1D angle_spectrum; // 1D angle-stage spectrum where the algorithm has one
};

// Coarse 2D grid search followed by a finer grid around each coarse peak.
struct GridSearch2D
{
    NearFieldGrid coarse;
    double fine_angle_step_deg = 0.05;
    double fine_range_step_m = 0.1;
};

NearFieldResult bf2d_estimate(const CMatrix &R, const ArrayGeometry &geom, const Carrier &carrier, Eigen::Index K,
                              const GridSearch2D &search);
NearFieldResult music2d_estimate(const CovarianceBundle &b, const ArrayGeometry &geom, const Carrier &carrier,
                                 const GridSearch2D &search);

struct MismatchReport
{
    Spectrum1D spectrum;
    std::vector<std::size_t> local_maxima; // per truth, within +-5 deg and above -3 dB of the window max
    std::vector<double> spread;            // per truth, energy fraction outside the ideal main lobe
};

MismatchReport farfield_mismatch_demo(const CMatrix &X, const ArrayGeometry &geom,
                                      const std::vector<double> &truth_angles_deg, Eigen::Index n_fft = 4096);

struct SocSequences
{
    CVector r1; // length J+1
    CVector r2; // length J
};

SocSequences soc_sequences(const CMatrix &X, const ArrayGeometry &geom);

struct DecoupledOptions
{
    std::vector<double> angles_deg; // 1D angle search grid
    std::vector<double> ranges_m;   // 1D range search grid
    bool refine = true;             // golden-section polish of 1D peaks
    // SoC only: take psi from shift invariance of r2 and pair it with the
    // angles, instead of a range search per angle. Fails when the targets'
    // psi values are closer than the r2 resolution.
    bool soc_psi_from_r2 = false;
};

NearFieldResult soc_estimate(const CMatrix &X, const ArrayGeometry &geom, const Carrier &carrier, Eigen::Index K,
                             const DecoupledOptions &opt);

CMatrix gamma_matrix(double omega, std::size_t J);
CVector xi_vector(double psi, std::size_t J);
// Q(omega) = Gamma^H En En^H Gamma
CMatrix rdrr_decompose(double omega, const CovarianceBundle &b, const ArrayGeometry &geom);

NearFieldResult rr_estimate(const CovarianceBundle &b, const ArrayGeometry &geom, const Carrier &carrier,
                            const DecoupledOptions &opt);
NearFieldResult rd_estimate(const CovarianceBundle &b, const ArrayGeometry &geom, const Carrier &carrier,
                            const DecoupledOptions &opt);

struct PsiFit
{
    double psi = 0.0;
    bool fallback = false;
};
// Weighted LS of unwrapped phases g_c against [1, (J-c)^2], c = 0..J.
PsiFit fit_psi(const CVector &xi_hat, std::size_t J);

struct FftEnhancedOptions
{
    double angle_threshold = 0.1; // fraction of max(p)
    double gamma_db = 3.0;        // above the median distance-scan power
    Eigen::Index dft_size = 0;    // 0: 2 * next power of two >= M
};

NearFieldResult fft_enhanced(const CovarianceBundle &b, const ArrayGeometry &geom, const Carrier &carrier,
                             const NearFieldGrid &grid, const FftEnhancedOptions &opt = {});

NearFieldResult modified_music(const CMatrix &X, const ArrayGeometry &geom, const Carrier &carrier, Eigen::Index K,
                               Eigen::Index L, const DecoupledOptions &opt);
NearFieldResult modified_music_cov(const CovarianceBundle &b, const ArrayGeometry &geom, const Carrier &carrier,
                                   Eigen::Index L, const DecoupledOptions &opt);

// [I_K; 0]. With K = 1 the determinant reduces to one row pair and vanishes at
// J aliased angles, so noisy data can lock onto an alias.
CMatrix default_selection(Eigen::Index J, Eigen::Index K);
// First K columns of the unitary J-point DFT; mixes all row pairs.
CMatrix dft_selection(Eigen::Index J, Eigen::Index K);

// W: J x K semi-unitary selection; empty means default_selection.
NearFieldResult generalized_esprit(const CovarianceBundle &b, const ArrayGeometry &geom, const Carrier &carrier,
                                   const DecoupledOptions &opt, const CMatrix &W = CMatrix());

// Spectra of the 1D angle stages (for scans and tests).
Spectrum1D rr_spectrum(const CovarianceBundle &b, const ArrayGeometry &geom, const std::vector<double> &angles_deg);
Spectrum1D rd_spectrum(const CovarianceBundle &b, const ArrayGeometry &geom, const std::vector<double> &angles_deg);
Spectrum1D gen_esprit_spectrum(const CovarianceBundle &b, const ArrayGeometry &geom,
                               const std::vector<double> &angles_deg, const CMatrix &W = CMatrix());

// 1 / ||En^H a(r, theta)||^2 with exact steering.
double music_nf_value(const CovarianceBundle &b, const ArrayGeometry &geom, const Carrier &carrier, double angle_deg,
                      double range_m);
} // namespace isac::nearfield
