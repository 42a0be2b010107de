// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isac/frameworks.hpp"

#include <optional>
#include <ostream>
#include <string>

// Closed-form complex-multiplication counts of the estimators. These are the
// theoretical operation models, not measurements.
namespace isac::complexity
{
struct Params1D
{
    double M = 16;     // array (or axis) length
    double Q = 8192;   // snapshots, N P for angle estimation
    double K = 3;      // targets
    double Ns = 1801;  // spectrum search points, 180 deg / 0.1 deg + 1
    double Nfft = 1801; // FFT / IFFT points
};

// nullopt for ROOT-MUSIC: the rooting step has no closed form.
std::optional<double> ops_1d(Algorithm1D a, const Params1D &p);

enum class JointKind
{
    Periodogram2D,
    Music2D,
    Esprit2D,
    Periodogram3D,
    Music3D,
};

struct ParamsJoint
{
    double M = 16, N = 128, P = 64, K = 3;
    double nfft_theta = 1024, nfft_tau = 1024, nfft_nu = 512;
    double ns_theta = 1801, ns_tau = 1024, ns_nu = 512;
};

double ops_joint(JointKind k, const ParamsJoint &p);

enum class NearKind
{
    Bf2D,
    Music2D,
    Soc,
    ReducedRank,
    ReducedDimension,
    FftEnhanced,
    ModifiedMusic,
    GeneralizedEsprit,
};

struct ParamsNear
{
    double M = 64, K = 4, N = 256, P = 10;
    double ng = 3600; // angle grid, 180 / 0.05
    double nl = 900;  // range grid, 90 / 0.1
    double S = 0;     // DFT size; 0 means 2 * nextpow2(M)
    double L = 0;     // angle clusters; 0 means K
    double ng_sub = 0; // per-cluster angle grid; 0 means 2 ng / S
    double nl_sub = 0; // per-cluster range grid; 0 means nl / 10

    double J() const { return (M - 1.0) / 2.0; }
};

double ops_near(NearKind k, const ParamsNear &p);

const char *joint_name(JointKind k);
const char *near_name(NearKind k);

struct Row
{
    std::string table;
    std::string algorithm;
    double M = 0;
    std::optional<double> ops;
};

std::vector<Row> table_1d(const Params1D &base);
// The M = 16, 64, 256, 512, 1024 sweep at Q = 8192, K = 3.
std::vector<Row> table_1d_sweep(const Params1D &base = {});
std::vector<Row> table_joint(const ParamsJoint &p);
std::vector<Row> table_near(const ParamsNear &p);

// Four significant digits in the form 1.596e8; "/" for nullopt.
std::string format_ops(std::optional<double> v);

// Columns: table,algorithm,M,ops
void write_csv(std::ostream &os, const std::vector<Row> &rows);
} // namespace isac::complexity
