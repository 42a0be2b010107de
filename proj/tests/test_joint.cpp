// SPDX-License-Identifier: Apache-2.0
#include "isac/frameworks.hpp"
#include "isac/joint.hpp"
#include "isac/linalg.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace isac;

namespace
{
SensingTensor tensor(const Scene &s, const OfdmConfig &o, std::optional<double> snr, std::uint64_t seed = 1)
{
    const SymbolGrid b = random_qpsk(o, derive_seed(seed, 1));
    return strip_symbols(synthesize(s, o, b, SteeringKind::FarField, snr, derive_seed(seed, 2)), b);
}

// Delay-Doppler matrix of the beam at `deg`.
CMatrix beam(const SensingTensor &y, const ArrayGeometry &g, double deg)
{
    return contract_axis(y, AxisKind::Angle, steer_far(g, deg) / std::sqrt(static_cast<double>(g.num_elements)));
}

double parallel_ratio(const CVector &a, const CVector &b)
{
    // 1 - |<a,b>| / (|a||b|): zero iff a and b are parallel
    return 1.0 - std::abs(a.dot(b)) / (a.norm() * b.norm());
}

CVector kron(const CVector &a, const CVector &b)
{
    CVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

void same_peaks(const std::vector<GridPeak> &a, const std::vector<GridPeak> &b)
{
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        REQUIRE(a[i].index == b[i].index);
        for (std::size_t d = 0; d < a[i].coords.size(); ++d)
            REQUIRE(a[i].coords[d] == Catch::Approx(b[i].coords[d]).epsilon(1e-9).margin(1e-15));
    }
}
} // namespace

TEST_CASE("MSSP restores the rank of coherent targets", "[joint]")
{
    Scene s = reference_scene();
    s.targets = {{10.0, 30.0, 8.0}, {10.0, 60.0, 20.0}};
    const OfdmConfig o{32, 16, 120e3, 0.25};
    const SensingTensor y = tensor(s, o, std::nullopt);
    const CMatrix X = beam(y, s.array, 10.0);
    // One snapshot: vec(X).
    CMatrix v = Eigen::Map<const CMatrix>(X.data(), X.size(), 1);
    const RVector ev_unsmoothed = hermitian_eig_top(v * v.adjoint(), 2).values;
    REQUIRE(ev_unsmoothed(1) / ev_unsmoothed(0) < 1e-12);

    const SmoothingWindow w{0, 16, 8, false};
    const CMatrix Z = mssp(X, w);
    REQUIRE(Z.rows() == 16 * 8);
    REQUIRE(Z.cols() == (32 - 16 + 1) * (16 - 8 + 1));
    const RVector ev = hermitian_eig_top(sample_covariance(Z), 2).values;
    REQUIRE(ev(1) / ev(0) > 1e-3);
}

TEST_CASE("MSSP columns follow the Kronecker ordering", "[joint]")
{
    Scene s = reference_scene();
    s.targets = {{20.0, 40.0, 12.0, {0.3, -0.8}}};
    const OfdmConfig o = reference_ofdm();
    const SensingTensor y = tensor(s, o, std::nullopt);
    const JointAxes ax = JointAxes::from(s.array, o);
    const DelayDoppler dd = target_delay_doppler(s.targets[0], s.carrier, o);

    const SmoothingWindow w2{0, 10, 6, false};
    const CMatrix Z2 = mssp(beam(y, s.array, 20.0), w2);
    const CVector k2 = kron(ax.doppler.steering(dd.doppler_hz, 6), ax.delay.steering(dd.tau_s, 10));
    REQUIRE(parallel_ratio(Z2.col(0), k2) <= 1e-10);

    const SmoothingWindow w3{8, 10, 6, false};
    const CMatrix Z3 = mssp(y.data, w3);
    REQUIRE(Z3.rows() == 8 * 10 * 6);
    REQUIRE(Z3.cols() == mssp_count(y.data, w3));
    const CVector k3 = kron(ax.doppler.steering(dd.doppler_hz, 6),
                            kron(ax.delay.steering(dd.tau_s, 10), ax.angle.steering(20.0, 8)));
    REQUIRE(parallel_ratio(Z3.col(0), k3) <= 1e-10);

    CMatrix block;
    mssp_columns(y.data, w3, 5, 7, block);
    REQUIRE((block - Z3.middleCols(5, 7)).norm() <= 1e-12 * Z3.norm());
}

TEST_CASE("2D periodogram FFT path equals the direct matched filter", "[joint]")
{
    const Scene s = reference_scene();
    const OfdmConfig o = reference_ofdm();
    const SensingTensor y = tensor(s, o, 0.0);
    const JointAxes ax = JointAxes::from(s.array, o);
    const CMatrix X = beam(y, s.array, 10.0);
    const Spectrum2D f = periodogram2d(X, ax, 256, 128);
    const Spectrum2D d = direct_periodogram2d(X, ax, f.x, f.y);
    REQUIRE(f.power.size() == d.power.size());
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < f.power.size(); ++i)
    {
        err = std::max(err, std::abs(f.power[i] - d.power[i]));
        ref = std::max(ref, d.power[i]);
    }
    REQUIRE(err <= 1e-9 * ref);
}

TEST_CASE("2D and 3D peak locations are invariant under complex scaling", "[joint]")
{
    Scene s = reference_scene();
    for (Target &t : s.targets)
        t.angle_deg = 10.0;
    const OfdmConfig o = reference_ofdm();
    const SensingTensor y = tensor(s, o, 0.0, 9);
    const JointAxes ax = JointAxes::from(s.array, o);
    const cd c(0.2, -1.9);
    const CMatrix X = beam(y, s.array, 10.0);
    const CMatrix Xc = X * c;

    const Spectrum2D p1 = periodogram2d(X, ax, 512, 256), p2 = periodogram2d(Xc, ax, 512, 256);
    same_peaks(find_peaks_2d(p1, 3, 4, 4), find_peaks_2d(p2, 3, 4, 4));

    const SmoothingWindow w{0, 32, 16, false};
    const auto tg = linspace(0.0, 0.8e-6, 161);
    const auto ng = linspace(0.0, 5000.0, 101);
    const Spectrum2D m1 = music2d(X, 3, w, ax, tg, ng), m2 = music2d(Xc, 3, w, ax, tg, ng);
    same_peaks(find_peaks_2d(m1, 3, 2, 2), find_peaks_2d(m2, 3, 2, 2));

    OfdmConfig os{32, 16, 120e3, 0.25};
    const SensingTensor z = tensor(reference_scene(), os, 5.0, 2);
    SensingTensor zs = z;
    for (cd &v : zs.data.values())
        v *= c;
    const JointAxes axs = JointAxes::from(s.array, os);
    const Spectrum3D q1 = periodogram3d(z, axs, {64, 64, 32}), q2 = periodogram3d(zs, axs, {64, 64, 32});
    same_peaks(find_peaks_3d(q1, 3, {2, 2, 2}), find_peaks_3d(q2, 3, {2, 2, 2}));

    const SmoothingWindow w3{8, 8, 4, false};
    const Music3dResult r1 = music3d(z, 3, w3, axs), r2 = music3d(zs, 3, w3, axs);
    REQUIRE(r1.peaks.size() == r2.peaks.size());
    for (std::size_t i = 0; i < r1.peaks.size(); ++i)
        for (std::size_t d = 0; d < 3; ++d)
            REQUIRE(r1.peaks[i][d] == Catch::Approx(r2.peaks[i][d]).epsilon(1e-6).margin(1e-12));
}

TEST_CASE("default windows", "[joint]")
{
    const SmoothingWindow w = default_window_2d(128, 64);
    REQUIRE(w.n_sub == 64);
    REQUIRE(w.p_sub == 32);
    const SmoothingWindow w3 = default_window_3d(16, 128, 64);
    REQUIRE(w3.m_sub * w3.n_sub * w3.p_sub <= 4096);
}

TEST_CASE("2D MUSIC resolves the equal-angle targets noise-free", "[joint]")
{
    Scene s = reference_scene();
    for (Target &t : s.targets)
        t.angle_deg = 10.0;
    const OfdmConfig o = reference_ofdm();
    const SensingTensor y = tensor(s, o, std::nullopt);
    const JointAxes ax = JointAxes::from(s.array, o);
    const CMatrix X = beam(y, s.array, 10.0);
    const SmoothingWindow w{0, 32, 16, false};
    const auto tg = linspace(0.0, 0.8e-6, 321);
    const auto ng = linspace(0.0, 5000.0, 201);
    const auto peaks = find_peaks_2d(music2d(X, 3, w, ax, tg, ng), 3, 2, 2);
    REQUIRE(peaks.size() == 3);
    for (const Target &t : s.targets)
    {
        const DelayDoppler dd = target_delay_doppler(t, s.carrier, o);
        bool hit = false;
        for (const auto &p : peaks)
            hit = hit || (std::abs(p.coords[0] - dd.tau_s) < tg[1] - tg[0] && std::abs(p.coords[1] - dd.doppler_hz) < ng[1] - ng[0]);
        REQUIRE(hit);
    }
}
