// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isac/joint.hpp"

#include <array>
#include <string>

namespace isac
{
enum class Framework
{
    Parallel1D,
    Sequential1D,
    Joint2D,
    Joint3D,
};

enum class Algorithm1D
{
    Periodogram,
    Music,
    FftMusic,
    RootMusic,
    EspritLS,
    EspritTLS,
    PmMusic,
    PmEsprit,
    Omp,
};

enum class AlgorithmJoint
{
    Periodogram,
    Music,
};

enum class Grouping
{
    Correlation,
    PowerDetection,
};

enum class BeamformerKind
{
    MRC,
    ZF,
    MMSE,
};

const char *framework_name(Framework f);
const char *algorithm_name(Algorithm1D a);
Framework parse_framework(const std::string &s);
Algorithm1D parse_algorithm(const std::string &s);
AlgorithmJoint parse_joint_algorithm(const std::string &s);
Grouping parse_grouping(const std::string &s);
BeamformerKind parse_beamformer(const std::string &s);

struct FrameworkConfig
{
    Framework framework = Framework::Parallel1D;
    std::array<Algorithm1D, 3> algorithms{Algorithm1D::Periodogram, Algorithm1D::Periodogram,
                                          Algorithm1D::Periodogram}; // indexed by AxisKind
    AlgorithmJoint joint_algorithm = AlgorithmJoint::Periodogram;
    Grouping grouping = Grouping::PowerDetection;
    BeamformerKind beamformer = BeamformerKind::ZF;
    std::array<AxisKind, 3> stage_order{AxisKind::Angle, AxisKind::Delay, AxisKind::Doppler};
    std::array<Eigen::Index, 3> n_fft{0, 0, 0}; // per AxisKind; 0 picks 16x the axis length
    // Peaks below this fraction of the strongest one on an axis are not counted as targets.
    double detection_threshold = 0.1;
    // Optional exact per-branch target counts for the second stage (sequential / joint2d).
    std::vector<Eigen::Index> branch_counts;
    SmoothingWindow window2d{}; // zero sizes pick the defaults
    SmoothingWindow window3d{};
    Music3dOptions music3d{};

    void validate() const;
};

struct TripleEstimate
{
    double angle_deg = 0.0;
    double tau_s = 0.0;
    double doppler_hz = 0.0;
    double score = 0.0;
};

struct EstimateSet
{
    std::vector<TripleEstimate> triples; // descending score
    std::string framework;
    std::vector<std::string> diagnostics;
};

// Unit-norm combiner for the `index`-th column of `A` (len x K_hat). `ratios` are
// per-column |alpha|^2 / sigma^2 and only used by MMSE.
CVector beamform_vector(BeamformerKind kind, const CMatrix &A, Eigen::Index index,
                        const std::vector<double> &ratios = {});

struct AxisEstimate
{
    std::vector<double> values;
    std::vector<double> power; // matched-filter power per value
};

// One-domain estimate along the rows of X with at most `cap` values.
AxisEstimate estimate_axis(const CMatrix &X, const ManifoldAxis &axis, Algorithm1D alg, Eigen::Index cap,
                           const FrameworkConfig &cfg, Eigen::Index exact_count = 0);

struct TripleScore
{
    std::array<std::size_t, 3> index; // into the per-axis value lists
    TripleEstimate triple;
};

// All candidate combinations scored by the configured grouping metric, descending.
std::vector<TripleScore> score_triples(const SensingTensor &y, const JointAxes &ax, const AxisEstimate &angles,
                                       const AxisEstimate &delays, const AxisEstimate &dopplers, Grouping g);

EstimateSet run_parallel(const SensingTensor &y, const JointAxes &ax, const FrameworkConfig &cfg, Eigen::Index K);
EstimateSet run_sequential(const SensingTensor &y, const JointAxes &ax, const FrameworkConfig &cfg, Eigen::Index K);
EstimateSet run_joint2d(const SensingTensor &y, const JointAxes &ax, const FrameworkConfig &cfg, Eigen::Index K);
EstimateSet run_joint3d(const SensingTensor &y, const JointAxes &ax, const FrameworkConfig &cfg, Eigen::Index K);
EstimateSet run_framework(const SensingTensor &y, const JointAxes &ax, const FrameworkConfig &cfg, Eigen::Index K);

// sum_i conj(w_i) y(..., i, ...) along `axis`; the remaining axes keep their order.
CMatrix contract_axis(const SensingTensor &y, AxisKind axis, const CVector &w);
} // namespace isac
