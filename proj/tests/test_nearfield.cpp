// SPDX-License-Identifier: Apache-2.0
#include "isac/complexity.hpp"
#include "isac/linalg.hpp"
#include "isac/nearfield.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace isac;
using namespace isac::nearfield;

namespace
{
// Snapshots sum_k a_k s_k^T with mutually orthogonal unit-power DFT sequences s_k.
CMatrix orthogonal_snapshots(const std::vector<CVector> &steering, const std::vector<double> &powers, Eigen::Index Q)
{
    CMatrix X = CMatrix::Zero(steering.front().size(), Q);
    for (std::size_t k = 0; k < steering.size(); ++k)
        for (Eigen::Index q = 0; q < Q; ++q)
            X.col(q) += steering[k] * std::sqrt(powers[k]) *
                        std::polar(1.0, 2.0 * kPi * static_cast<double>((k + 1) * 37 * q) / static_cast<double>(Q));
    return X;
}

CMatrix noisy_snapshots(const CVector &a, double snr_db, Eigen::Index Q, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    const double sigma = std::pow(10.0, -snr_db / 20.0);
    CMatrix X(a.size(), Q);
    for (Eigen::Index q = 0; q < Q; ++q)
    {
        const cd s(n(rng), n(rng));
        for (Eigen::Index m = 0; m < a.size(); ++m)
            X(m, q) = a(m) * s + sigma * cd(n(rng), n(rng));
    }
    return X;
}

std::vector<double> grid(double lo, double hi, double step)
{
    std::vector<double> g;
    for (double v = lo; v <= hi + 1e-9; v += step)
        g.push_back(v);
    return g;
}

std::size_t argmax(const std::vector<double> &v)
{
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

const ArrayGeometry kSuiteArray{65, 0.25, ArrayReference::CenterElement};
const Carrier kSuiteCarrier{10e9};
// Semi-unitary J x K selection from Gaussian draws.
CMatrix random_selection(Eigen::Index J, Eigen::Index K, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    CMatrix R(J, K);
    for (Eigen::Index i = 0; i < J; ++i)
        for (Eigen::Index k = 0; k < K; ++k)
            R(i, k) = cd(n(rng), n(rng));
    return orthonormalize(R);
}
} // namespace

TEST_CASE("near-field steering factorizes as Gamma(omega) xi(psi)", "[nearfield]")
{
    const std::size_t J = 32;
    const ArrayGeometry g{2 * J + 1, 0.25, ArrayReference::CenterElement};
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
        {
            const double omega = -3.0 + 0.6 * i;
            const double psi = -0.05 + 0.011 * j;
            const CVector a = steer_near_fresnel(g, omega, psi);
            REQUIRE((a - gamma_matrix(omega, J) * xi_vector(psi, J)).cwiseAbs().maxCoeff() <= 1e-12);
        }
}

TEST_CASE("SoC sequences follow their noise-free models", "[nearfield]")
{
    const ArrayGeometry &g = kSuiteArray;
    const std::vector<std::pair<double, double>> tg{{10.2, 5.64}, {-30.0, 3.0}, {40.0, 9.0}};
    const std::vector<double> p{1.0, 0.5, 2.0};
    std::vector<CVector> a;
    std::vector<FresnelPhase> f;
    for (const auto &[th, r] : tg)
    {
        f.push_back(fresnel_phase(g, kSuiteCarrier, th, r));
        a.push_back(steer_near_fresnel(g, f.back().omega, f.back().psi));
    }
    const SocSequences s = soc_sequences(orthogonal_snapshots(a, p, 8192), g);
    const Eigen::Index J = 32;
    REQUIRE(s.r1.size() == J + 1);
    REQUIRE(s.r2.size() == J);
    double err1 = 0.0, err2 = 0.0;
    for (Eigen::Index m = 0; m <= J; ++m)
    {
        cd model1 = 0.0;
        for (std::size_t k = 0; k < 3; ++k)
            model1 += p[k] * std::polar(1.0, -2.0 * f[k].omega * static_cast<double>(m));
        err1 = std::max(err1, std::abs(s.r1(m) - model1));
    }
    for (Eigen::Index m = 0; m < J; ++m)
    {
        // r2(m) = mean X(m+1) conj X(m) = sum p_k exp(j (omega_k + (2m+1) psi_k))
        cd model2 = 0.0;
        for (std::size_t k = 0; k < 3; ++k)
            model2 += p[k] * std::polar(1.0, f[k].omega + static_cast<double>(2 * m + 1) * f[k].psi);
        err2 = std::max(err2, std::abs(s.r2(m) - model2));
    }
    REQUIRE(err1 <= 1e-8);
    REQUIRE(err2 <= 1e-8);
}

TEST_CASE("covariance bundle is Hermitian PSD with orthogonal subspaces", "[nearfield]")
{
    const CMatrix X = noisy_snapshots(steer_near_exact(kSuiteArray, kSuiteCarrier, 10.2, 5.64), 0.0, 500, 3);
    const CovarianceBundle b = make_bundle(X, 1);
    REQUIRE((b.R - b.R.adjoint()).norm() <= 1e-12 * b.R.norm());
    REQUIRE(hermitian_eig(b.R).values.minCoeff() >= -1e-12 * b.R.norm());
    REQUIRE((b.sub.signal.adjoint() * b.sub.noise).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("default range grid lies inside the Rayleigh distance", "[nearfield]")
{
    const auto r = default_ranges(kSuiteArray, kSuiteCarrier);
    const double ray = rayleigh_distance(kSuiteArray, kSuiteCarrier);
    REQUIRE(r.size() == 60);
    REQUIRE(r.front() > 0.0);
    REQUIRE(r.back() <= ray * (1 + 1e-12));
    REQUIRE(std::is_sorted(r.begin(), r.end()));
    REQUIRE(std::adjacent_find(r.begin(), r.end()) == r.end());
}

TEST_CASE("decoupled algorithms reject unsupported geometries", "[nearfield]")
{
    const ArrayGeometry even{64, 0.25, ArrayReference::CenterElement};
    const ArrayGeometry wide{65, 0.5, ArrayReference::CenterElement};
    DecoupledOptions o{grid(-60, 60, 1), default_ranges(kSuiteArray, kSuiteCarrier), true};
    const CMatrix X = noisy_snapshots(steer_near_exact(wide, kSuiteCarrier, 10.2, 5.64), 10.0, 50, 1);
    REQUIRE_THROWS_AS(soc_estimate(X, wide, kSuiteCarrier, 1, o), DomainError);
    REQUIRE_THROWS_AS(soc_sequences(CMatrix::Zero(64, 4), even), std::invalid_argument);
}

TEST_CASE("psi fit recovers the quadratic phase", "[nearfield]")
{
    for (double psi : {-0.02, 0.001, 0.0137, 0.04})
    {
        const PsiFit f = fit_psi(xi_vector(psi, 32) * std::polar(2.0, 0.4), 32);
        REQUIRE(f.psi == Catch::Approx(psi).margin(1e-10));
    }
}

TEST_CASE("decoupled estimators agree with 2D MUSIC on a noise-free two-target scene", "[nearfield]")
{
    // Two-target near-field scene at a quarter-wave 129-element aperture.
    const ArrayGeometry g{129, 0.25, ArrayReference::CenterElement};
    const Carrier c{28e9};
    const std::vector<std::pair<double, double>> truth{{10.0, 5.0}, {20.0, 10.0}};
    std::vector<CVector> a;
    for (const auto &[th, r] : truth)
        a.push_back(steer_near_exact(g, c, th, r));
    const CMatrix X = orthogonal_snapshots(a, {1.0, 1.0}, 2048);
    const CovarianceBundle b = make_bundle(X, 2);

    NearFieldGrid coarse{grid(0, 30, 1), grid(1, 20, 0.5)};
    const NearFieldResult ref = music2d_estimate(b, g, c, {coarse, 0.05, 0.1});
    REQUIRE(ref.estimates.size() == 2);
    for (std::size_t k = 0; k < 2; ++k)
    {
        REQUIRE(std::abs(ref.estimates[k].angle_deg - truth[k].first) <= 0.05);
        REQUIRE(std::abs(ref.estimates[k].range_m - truth[k].second) <= 0.1);
    }

    DecoupledOptions o{grid(0, 30, 0.1), default_ranges(g, c, 200), true};
    const std::vector<std::pair<std::string, NearFieldResult>> runs{
        {"rr", rr_estimate(b, g, c, o)},
        {"rd", rd_estimate(b, g, c, o)},
        {"soc", soc_estimate(X, g, c, 2, o)},
        {"mod-music", modified_music_cov(b, g, c, 32, o)},
        {"gen-esprit", generalized_esprit(b, g, c, o)},
        {"gen-esprit-random-w", generalized_esprit(b, g, c, o, random_selection(64, 2, 3))},
    };
    for (const auto &[name, r] : runs)
    {
        INFO(name);
        REQUIRE(r.estimates.size() == 2);
        for (std::size_t k = 0; k < 2; ++k)
        {
            // one cell: 0.1 deg in angle, 0.1 m in range (the fine 2D step)
            REQUIRE(std::abs(r.estimates[k].angle_deg - ref.estimates[k].angle_deg) <= 0.1);
            REQUIRE(std::abs(r.estimates[k].range_m - ref.estimates[k].range_m) <= 0.1 + 1e-9);
        }
    }
}

TEST_CASE("generalized ESPRIT is exact on Fresnel data for any selection", "[nearfield]")
{
    // On exact-model data a structured W (DFT columns) can pick up a spurious near-zero;
    // on Fresnel data every full-rank W vanishes only at the true angles.
    const ArrayGeometry g{129, 0.25, ArrayReference::CenterElement};
    const Carrier c{28e9};
    const std::vector<std::pair<double, double>> truth{{10.0, 5.0}, {20.0, 10.0}};
    std::vector<CVector> a;
    for (const auto &[th, r] : truth)
    {
        const FresnelPhase f = fresnel_phase(g, c, th, r);
        a.push_back(steer_near_fresnel(g, f.omega, f.psi));
    }
    const CovarianceBundle b = make_bundle(orthogonal_snapshots(a, {1.0, 1.0}, 2048), 2);
    const DecoupledOptions o{grid(0, 30, 0.1), default_ranges(g, c, 200), true};
    for (const CMatrix &W : {CMatrix(), dft_selection(64, 2), random_selection(64, 2, 9)})
    {
        const NearFieldResult r = generalized_esprit(b, g, c, o, W);
        REQUIRE(r.estimates.size() == 2);
        for (std::size_t k = 0; k < 2; ++k)
            REQUIRE(std::abs(r.estimates[k].angle_deg - truth[k].first) <= 0.01);
    }
}

TEST_CASE("SoC psi from r2 is exact on Fresnel data", "[nearfield]")
{
    const ArrayGeometry &g = kSuiteArray;
    const FresnelPhase f = fresnel_phase(g, kSuiteCarrier, 10.2, 5.64);
    const CMatrix X = orthogonal_snapshots({steer_near_fresnel(g, f.omega, f.psi)}, {1.0}, 1024);
    DecoupledOptions o{grid(-60, 60, 0.1), default_ranges(g, kSuiteCarrier), true, true};
    const NearFieldResult r = soc_estimate(X, g, kSuiteCarrier, 1, o);
    REQUIRE(r.estimates.size() == 1);
    REQUIRE(r.estimates[0].angle_deg == Catch::Approx(10.2).margin(1e-6));
    REQUIRE(r.estimates[0].range_m == Catch::Approx(5.64).margin(1e-6));
}

TEST_CASE("rank-deficiency spectra are invariant under scaling of the data", "[nearfield]")
{
    const CMatrix X = noisy_snapshots(steer_near_exact(kSuiteArray, kSuiteCarrier, 10.2, 5.64), 0.0, 300, 5);
    const auto angles = grid(-60, 60, 0.1);
    for (cd s : {cd(5.0, 0.0), cd(-0.01, 0.3)})
    {
        const CovarianceBundle b1 = make_bundle(X, 1), b2 = make_bundle(X * s, 1);
        REQUIRE(argmax(rr_spectrum(b1, kSuiteArray, angles).power) == argmax(rr_spectrum(b2, kSuiteArray, angles).power));
        REQUIRE(argmax(rd_spectrum(b1, kSuiteArray, angles).power) == argmax(rd_spectrum(b2, kSuiteArray, angles).power));
        const CMatrix W = dft_selection(32, 1);
        REQUIRE(argmax(gen_esprit_spectrum(b1, kSuiteArray, angles, W).power) ==
                argmax(gen_esprit_spectrum(b2, kSuiteArray, angles, W).power));
    }
}

TEST_CASE("near-field complexity formulas", "[nearfield][complexity]")
{
    using complexity::NearKind;
    const complexity::ParamsNear p; // M 64, K 4, N 256, P 10, ng 3600, nl 900
    const double M = 64, K = 4, NP = 2560, ng = 3600, nl = 900;
    REQUIRE(complexity::ops_near(NearKind::Music2D, p) == M * M * M + M * M * NP + ng * nl * (M - K) * (M + 1));
    REQUIRE(complexity::ops_near(NearKind::Bf2D, p) == M * M * NP + ng * nl * M * M);
    for (NearKind k : {NearKind::Bf2D, NearKind::Music2D, NearKind::Soc, NearKind::ReducedRank,
                       NearKind::ReducedDimension, NearKind::FftEnhanced, NearKind::ModifiedMusic,
                       NearKind::GeneralizedEsprit})
    {
        const double v = complexity::ops_near(k, p);
        REQUIRE(std::isfinite(v));
        REQUIRE(v > 0.0);
    }
    // 1D-search methods are orders of magnitude cheaper than the 2D grid
    REQUIRE(complexity::ops_near(NearKind::ReducedDimension, p) < complexity::ops_near(NearKind::Music2D, p) / 10);
}

TEST_CASE("far-field periodogram splits a target inside the Rayleigh distance", "[nearfield]")
{
    const ArrayGeometry g{256, 0.5, ArrayReference::CenterElement};
    const Carrier c{28e9};
    const CMatrix near_x = noisy_snapshots(steer_near_exact(g, c, 10.0, 30.0), 30.0, 64, 1);
    const CMatrix far_x = noisy_snapshots(steer_near_exact(g, c, 10.0, 1e5), 30.0, 64, 2);
    const MismatchReport mn = farfield_mismatch_demo(near_x, g, {10.0});
    const MismatchReport mf = farfield_mismatch_demo(far_x, g, {10.0});
    REQUIRE(mn.local_maxima[0] > 1);
    REQUIRE(mf.local_maxima[0] == 1);
    REQUIRE(mn.spread[0] > mf.spread[0]);
}
