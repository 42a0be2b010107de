// SPDX-License-Identifier: Apache-2.0
#include "isac/linalg.hpp"
#include "isac/ofdm.hpp"
#include "isac/tensor_io.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace isac;

namespace
{
double power(const Tensor3 &t)
{
    double s = 0.0;
    for (const cd &v : t.values())
        s += std::norm(v);
    return s / static_cast<double>(t.size());
}
} // namespace

TEST_CASE("SNR calibration within 0.2 dB over 100 seeds", "[ofdm]")
{
    const Scene s = reference_scene();
    const OfdmConfig o = reference_ofdm();
    for (double snr : {-20.0, 0.0, 10.0})
    {
        double sum_db = 0.0;
        for (std::uint64_t seed = 1; seed <= 100; ++seed)
        {
            const SymbolGrid b = random_qpsk(o, derive_seed(seed, 1));
            const SensingTensor clean = synthesize(s, o, b, SteeringKind::FarField, std::nullopt, derive_seed(seed, 2));
            const SensingTensor noisy = synthesize(s, o, b, SteeringKind::FarField, snr, derive_seed(seed, 2));
            Tensor3 noise = noisy.data;
            for (std::size_t i = 0; i < noise.size(); ++i)
                noise.values()[i] -= clean.data.values()[i];
            const double db = 10.0 * std::log10(power(clean.data) / power(noise));
            REQUIRE(std::abs(db - snr) <= 0.2);
            sum_db += db;
        }
        REQUIRE(std::abs(sum_db / 100.0 - snr) <= 0.2);
    }
}

TEST_CASE("synthesis is bit-deterministic", "[ofdm]")
{
    const Scene s = reference_scene();
    const OfdmConfig o = reference_ofdm();
    const SymbolGrid b1 = random_qpsk(o, 99), b2 = random_qpsk(o, 99);
    REQUIRE(b1.b == b2.b);
    for (std::optional<double> snr : {std::optional<double>{}, std::optional<double>{5.0}})
    {
        const SensingTensor a = synthesize(s, o, b1, SteeringKind::FarField, snr, 7);
        const SensingTensor c = synthesize(s, o, b2, SteeringKind::FarField, snr, 7);
        REQUIRE(a.data.values() == c.data.values());
    }
    REQUIRE(derive_seed(1, 0) != derive_seed(1, 1));
    REQUIRE(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("QPSK symbols are unit modulus", "[ofdm]")
{
    const SymbolGrid b = random_qpsk(reference_ofdm(), 3);
    REQUIRE(b.b.rows() == 128);
    REQUIRE(b.b.cols() == 64);
    REQUIRE((b.b.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-15);
}

TEST_CASE("noise-free spatial covariance has rank 3", "[ofdm]")
{
    const Scene s = reference_scene();
    const OfdmConfig o = reference_ofdm();
    const SymbolGrid b = random_qpsk(o, 5);
    const SensingTensor y = strip_symbols(synthesize(s, o, b, SteeringKind::FarField, std::nullopt, 1), b);
    const HermitianEig e = hermitian_eig(sample_covariance(reshape_angle(y)));
    int above = 0;
    for (Eigen::Index i = 0; i < e.values.size(); ++i)
        above += e.values(i) > 1e-9 * e.values(0);
    REQUIRE(above == 3);
}

TEST_CASE("symbol stripping equals synthesis with unit symbols", "[ofdm]")
{
    const Scene s = reference_scene();
    const OfdmConfig o = reference_ofdm();
    const SymbolGrid b = random_qpsk(o, 11);
    const SensingTensor stripped = strip_symbols(synthesize(s, o, b, SteeringKind::FarField, std::nullopt, 1), b);
    const SensingTensor ones = synthesize(s, o, unit_symbols(o), SteeringKind::FarField, std::nullopt, 1);
    REQUIRE(stripped.kind == TensorKind::SymbolStripped);
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < ones.data.size(); ++i)
    {
        err = std::max(err, std::abs(stripped.data.values()[i] - ones.data.values()[i]));
        ref = std::max(ref, std::abs(ones.data.values()[i]));
    }
    REQUIRE(err <= 1e-12 * ref);
}

TEST_CASE("reshapes index the same tensor element", "[ofdm]")
{
    Scene s = reference_scene();
    OfdmConfig o{8, 6, 120e3, 0.25};
    s.array.num_elements = 5;
    const SensingTensor y = strip_symbols(synthesize(s, o, unit_symbols(o), SteeringKind::FarField, 0.0, 3), unit_symbols(o));
    const CMatrix A = reshape_angle(y), D = reshape_delay(y), P = reshape_doppler(y);
    for (std::size_t m = 0; m < 5; ++m)
        for (std::size_t n = 0; n < 8; ++n)
            for (std::size_t p = 0; p < 6; ++p)
            {
                const cd v = y.data(m, n, p);
                REQUIRE(A(m, n + p * 8) == v);
                REQUIRE(D(n, m + p * 5) == v);
                REQUIRE(P(p, m + n * 5) == v);
            }
}

TEST_CASE("tensor files round trip", "[ofdm]")
{
    const Scene s = reference_scene();
    const OfdmConfig o{16, 8, 120e3, 0.25};
    const SymbolGrid b = random_qpsk(o, 1);
    const SensingTensor y = strip_symbols(synthesize(s, o, b, SteeringKind::FarField, 3.0, 2), b);
    const auto path = std::filesystem::temp_directory_path() / "isac_tensor_roundtrip.bin";
    write_tensor(path.string(), y);
    const SensingTensor z = read_tensor(path.string());
    std::filesystem::remove(path);
    REQUIRE(z.kind == y.kind);
    REQUIRE(z.data.dim_m() == 16);
    // complex64 payload
    for (std::size_t i = 0; i < y.data.size(); ++i)
        REQUIRE(std::abs(z.data.values()[i] - y.data.values()[i]) <= 1e-6 * std::abs(y.data.values()[i]) + 1e-30);
}

TEST_CASE("resolution identities", "[ofdm]")
{
    const OfdmConfig o = reference_ofdm();
    REQUIRE(o.bandwidth() == Catch::Approx(15.36e6));
    REQUIRE(o.cpi() == Catch::Approx(666.67e-6).epsilon(1e-4));
    REQUIRE(o.delay_resolution() * o.bandwidth() == Catch::Approx(1.0));
    REQUIRE(o.doppler_resolution() * o.cpi() == Catch::Approx(1.0));
    REQUIRE_THROWS(OfdmConfig{1, 4, 120e3, 0.25}.validate());
}
