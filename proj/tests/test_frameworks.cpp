// SPDX-License-Identifier: Apache-2.0
#include "isac/frameworks.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

using namespace isac;

namespace
{
struct Fixture
{
    Scene scene = reference_scene();
    OfdmConfig ofdm = reference_ofdm();
    JointAxes ax = JointAxes::from(scene.array, ofdm);
    SensingTensor y;
    std::vector<TripleEstimate> truth;

    explicit Fixture(std::optional<double> snr = std::nullopt)
    {
        const SymbolGrid b = random_qpsk(ofdm, 7);
        y = strip_symbols(synthesize(scene, ofdm, b, SteeringKind::FarField, snr, 1), b);
        for (const Target &t : scene.targets)
        {
            const DelayDoppler dd = target_delay_doppler(t, scene.carrier, ofdm);
            truth.push_back({t.angle_deg, dd.tau_s, dd.doppler_hz, 0.0});
        }
    }
};

FrameworkConfig esprit_config(Framework f)
{
    FrameworkConfig c;
    c.framework = f;
    c.algorithms = {Algorithm1D::EspritLS, Algorithm1D::EspritLS, Algorithm1D::EspritLS};
    return c;
}

std::vector<TripleEstimate> by_angle(std::vector<TripleEstimate> v)
{
    std::sort(v.begin(), v.end(), [](const auto &a, const auto &b) { return a.angle_deg < b.angle_deg; });
    return v;
}
} // namespace

TEST_CASE("power detection ranks the true triples first", "[frameworks]")
{
    const Fixture f;
    const FrameworkConfig cfg = esprit_config(Framework::Parallel1D);
    const AxisEstimate a = estimate_axis(reshape_angle(f.y), f.ax.angle, Algorithm1D::EspritLS, 3, cfg, 3);
    const AxisEstimate d = estimate_axis(reshape_delay(f.y), f.ax.delay, Algorithm1D::EspritLS, 3, cfg, 3);
    const AxisEstimate n = estimate_axis(reshape_doppler(f.y), f.ax.doppler, Algorithm1D::EspritLS, 3, cfg, 3);
    const auto scores = score_triples(f.y, f.ax, a, d, n, Grouping::PowerDetection);
    REQUIRE(scores.size() == 27);
    auto is_true = [&](const TripleEstimate &t) {
        for (const auto &g : f.truth)
            if (std::abs(t.angle_deg - g.angle_deg) < 1e-3 && std::abs(t.tau_s - g.tau_s) < 1e-12 &&
                std::abs(t.doppler_hz - g.doppler_hz) < 1e-3)
                return true;
        return false;
    };
    for (std::size_t i = 0; i < 3; ++i)
        REQUIRE(is_true(scores[i].triple));
    for (std::size_t i = 3; i < 27; ++i)
        REQUIRE_FALSE(is_true(scores[i].triple));
    REQUIRE(scores[2].triple.score > scores[3].triple.score);
}

TEST_CASE("all four frameworks agree on the noise-free scene", "[frameworks]")
{
    const Fixture f;
    const double cell_a = 0.1, cell_t = f.ax.delay.resolution(128) / 8, cell_n = f.ax.doppler.resolution(64) / 8;
    const auto truth = by_angle(f.truth);
    for (Framework fw : {Framework::Parallel1D, Framework::Sequential1D, Framework::Joint2D, Framework::Joint3D})
    {
        INFO(framework_name(fw));
        const auto est = by_angle(run_framework(f.y, f.ax, esprit_config(fw), 3).triples);
        REQUIRE(est.size() == 3);
        for (std::size_t k = 0; k < 3; ++k)
        {
            REQUIRE(std::abs(est[k].angle_deg - truth[k].angle_deg) <= cell_a);
            REQUIRE(std::abs(est[k].tau_s - truth[k].tau_s) <= cell_t);
            REQUIRE(std::abs(est[k].doppler_hz - truth[k].doppler_hz) <= cell_n);
        }
    }
}

TEST_CASE("zero-forcing nulls the other targets", "[frameworks]")
{
    const ArrayGeometry g{16, 0.5, ArrayReference::FirstElement};
    const double angles[3] = {-20.0, 10.0, 45.0}; // well over two Rayleigh cells apart
    CMatrix A(16, 3);
    for (int k = 0; k < 3; ++k)
        A.col(k) = steer_far(g, angles[k]);
    for (Eigen::Index k = 0; k < 3; ++k)
    {
        const CVector w = beamform_vector(BeamformerKind::ZF, A, k);
        REQUIRE(w.norm() == Catch::Approx(1.0));
        const double in_beam = std::norm(w.dot(A.col(k)));
        for (Eigen::Index j = 0; j < 3; ++j)
            if (j != k)
                REQUIRE(10.0 * std::log10(std::norm(w.dot(A.col(j))) / in_beam) <= -60.0);
        const CVector mrc = beamform_vector(BeamformerKind::MRC, A, k);
        REQUIRE(mrc.norm() == Catch::Approx(1.0));
        const CVector mmse = beamform_vector(BeamformerKind::MMSE, A, k, {100.0, 100.0, 100.0});
        REQUIRE(mmse.norm() == Catch::Approx(1.0));
    }
}

TEST_CASE("framework outputs are deterministic", "[frameworks]")
{
    const Fixture f(0.0);
    for (Framework fw : {Framework::Parallel1D, Framework::Sequential1D, Framework::Joint2D, Framework::Joint3D})
    {
        FrameworkConfig c;
        c.framework = fw;
        const EstimateSet a = run_framework(f.y, f.ax, c, 3), b = run_framework(f.y, f.ax, c, 3);
        REQUIRE(a.triples.size() == b.triples.size());
        for (std::size_t i = 0; i < a.triples.size(); ++i)
        {
            REQUIRE(a.triples[i].angle_deg == b.triples[i].angle_deg);
            REQUIRE(a.triples[i].tau_s == b.triples[i].tau_s);
            REQUIRE(a.triples[i].doppler_hz == b.triples[i].doppler_hz);
            REQUIRE(a.triples[i].score == b.triples[i].score);
        }
        for (std::size_t i = 1; i < a.triples.size(); ++i)
            REQUIRE(a.triples[i - 1].score >= a.triples[i].score);
    }
}

TEST_CASE("estimates stay inside their domains and within K", "[frameworks]")
{
    const Fixture f(-10.0);
    for (Framework fw : {Framework::Parallel1D, Framework::Sequential1D, Framework::Joint2D})
    {
        FrameworkConfig c;
        c.framework = fw;
        const EstimateSet e = run_framework(f.y, f.ax, c, 3);
        REQUIRE(e.triples.size() <= 3);
        for (const auto &t : e.triples)
        {
            REQUIRE(std::abs(t.angle_deg) <= 90.0);
            REQUIRE(t.tau_s >= 0.0);
            REQUIRE(t.tau_s < f.ofdm.max_delay());
            REQUIRE(std::abs(t.doppler_hz) <= f.ofdm.max_doppler());
        }
    }
}

TEST_CASE("framework configuration is validated", "[frameworks]")
{
    FrameworkConfig c;
    c.stage_order = {AxisKind::Angle, AxisKind::Angle, AxisKind::Doppler};
    REQUIRE_THROWS(c.validate());
    REQUIRE(parse_framework("joint3d") == Framework::Joint3D);
    REQUIRE(parse_algorithm("esprit-tls") == Algorithm1D::EspritTLS);
    REQUIRE_THROWS(parse_algorithm("nope"));
}
