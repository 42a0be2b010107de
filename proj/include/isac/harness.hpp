// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isac/complexity.hpp"
#include "isac/config.hpp"
#include "isac/frameworks.hpp"
#include "isac/nearfield.hpp"

#include <array>
#include <json.hpp>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>

namespace isac
{
enum class ExperimentKind
{
    RmseSweep,
    ResolutionSweep,
    SpectrumDump,
    ComplexityBench,
    NearFieldSuite,
};

ExperimentKind parse_experiment(const std::string &s);
const char *experiment_name(ExperimentKind k);

struct ExperimentSpec
{
    ExperimentKind kind = ExperimentKind::RmseSweep;
    Scene scene = reference_scene();
    OfdmConfig ofdm = reference_ofdm();
    FrameworkConfig framework{};
    SteeringKind model = SteeringKind::FarField;

    double snr_start_db = -40.0;
    double snr_stop_db = 20.0;
    double snr_step_db = 5.0;
    std::size_t trials = 300;
    std::uint64_t seed = 1;
    unsigned threads = 1; // 0: hardware concurrency

    // One-domain mode estimates `axis` with `algorithm`; otherwise the full
    // framework runs and triples are matched.
    bool one_domain = true;
    AxisKind axis = AxisKind::Angle;
    Algorithm1D algorithm = Algorithm1D::Periodogram;

    // Resolution sweep: second target offset along `axis`, in axis units
    // (deg, s or Hz). A trial succeeds when two estimates exist and their RMSE
    // against the two truths is at most `gate`.
    std::vector<double> separations;
    double gate = 0.3;

    std::vector<double> snr_points() const;
    void validate() const;
};

ExperimentSpec experiment_from_config(const ConfigDocument &doc);
nlohmann::json spec_to_json(const ExperimentSpec &s);

struct ResultRow
{
    double x = 0.0; // SNR (dB) or separation
    std::array<double, 3> rmse{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                               std::numeric_limits<double>::quiet_NaN()}; // per AxisKind, axis units
    double probability = std::numeric_limits<double>::quiet_NaN();
    double match_rate = 0.0;
    std::size_t trials = 0;
    std::size_t failures = 0;
    bool valid = true;
    double wall_s = 0.0;
    std::string note;
};

struct ResultTable
{
    std::string x_name;
    std::string label;
    std::vector<ResultRow> rows;
};

// Columns: x,rmse_angle_deg,rmse_delay_s,rmse_doppler_hz,probability,match_rate,trials,failures,valid,label
void write_result_csv(std::ostream &os, const ResultTable &t, bool with_wall_time = false);

// The sensing tensor of one trial: fresh QPSK symbols and noise drawn from
// derive_seed(seed, stream), symbols removed.
SensingTensor trial_tensor(const Scene &scene, const OfdmConfig &ofdm, SteeringKind model, std::optional<double> snr_db,
                           std::uint64_t seed, std::uint64_t stream);

ResultTable run_rmse_sweep(const ExperimentSpec &spec);
ResultTable run_resolution_sweep(const ExperimentSpec &spec);

// Two-target scene for a resolution trial: the first two targets of `base`,
// the first moved to 0 along `axis` (angle) or kept (delay, Doppler), the
// second offset by `separation`.
Scene resolution_scene(const Scene &base, const Carrier &carrier, const OfdmConfig &ofdm, AxisKind axis,
                       double separation);

// Separation at which the success probability first crosses `level` for good
// (linear interpolation); NaN when it never does.
double transition_point(const ResultTable &t, double level = 0.5);

// Five targets at three angles and four delays.
Scene five_target_scene();
// Reference geometry with the Doppler spread widened so every axis resolves
// all three targets.
Scene rmse_scene();
// Reference targets all moved to 10 deg.
Scene equal_angle_scene();
// Reference targets moved to -5, 0 and 10 deg.
Scene close_angle_scene();

struct NearFieldSuiteSpec
{
    ArrayGeometry geom{65, 0.25, ArrayReference::CenterElement};
    Carrier carrier{10e9};
    double angle_deg = 10.2;
    double range_m = 5.64;
    OfdmConfig ofdm{256, 10, 120e3, 0.25}; // snapshots N P
    std::vector<double> snr_db{-15, -10, -5, 0, 5, 10};
    std::size_t trials = 200;
    std::uint64_t seed = 7;
    unsigned threads = 1;
    std::vector<std::string> algorithms{"bf2d", "music2d", "soc", "rd", "rr", "fft-enhanced", "mod-music", "gen-esprit"};
    double angle_step_deg = 0.1;      // 1D angle search grid
    double coarse_angle_step_deg = 1; // 2D coarse grid
    double angle_span_deg = 60;       // grids cover [-span, span]
    std::size_t range_points = 60;
    Eigen::Index mod_music_L = 0; // 0: J / 2
};

struct NearFieldRow
{
    std::string algorithm;
    double snr_db = 0.0;
    double rmse_angle_deg = 0.0;
    double rmse_range_m = 0.0;
    std::size_t trials = 0;
    std::size_t failures = 0;
    std::size_t flagged = 0;
    bool valid = true;
    double wall_s = 0.0;
};

// Runs one near-field algorithm on one snapshot matrix and returns its estimates.
nearfield::NearFieldResult run_nearfield_algorithm(const std::string &alg, const CMatrix &X, const ArrayGeometry &geom,
                                                   const Carrier &carrier, Eigen::Index K,
                                                   const NearFieldSuiteSpec &grids);

std::vector<NearFieldRow> run_nearfield_suite(const NearFieldSuiteSpec &spec);
// algorithm,snr_db,rmse_angle_deg,rmse_range_m,trials,failures,flagged,valid
void write_nearfield_csv(std::ostream &os, const std::vector<NearFieldRow> &rows, bool with_wall_time = false);

struct BenchRow
{
    std::string algorithm;
    double M = 0;
    std::optional<double> theoretical;
    double seconds = 0.0; // mean wall time, informational
};

// Theoretical operation counts with measured run times of the 1D angle
// estimators on the reference scene for each array size.
std::vector<BenchRow> bench_1d(const std::vector<double> &sizes, std::size_t repeats);
void write_bench_csv(std::ostream &os, const std::vector<BenchRow> &rows);

struct ReproduceOptions
{
    std::string out_dir = "out";
    std::size_t trials = 0; // 0: the recipe default
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

std::vector<std::string> figure_ids();
// Writes CSV, raster and manifest files for the bound scenario; returns the paths.
std::vector<std::string> reproduce(const std::string &figure_id, const ReproduceOptions &opt);

// Runs `fn(i)` for i in [0, n) on `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)> &fn);
} // namespace isac
