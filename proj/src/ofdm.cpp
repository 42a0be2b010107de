// SPDX-License-Identifier: Apache-2.0
#include "isac/ofdm.hpp"

#include <cmath>
#include <random>
#include <string>

namespace isac
{
void OfdmConfig::validate() const
{
    if (num_subcarriers < 2 || num_symbols < 2)
        throw std::invalid_argument("OfdmConfig: N and P must be at least 2");
    if (!(subcarrier_spacing_hz > 0.0))
        throw std::invalid_argument("OfdmConfig: subcarrier spacing must be positive");
    if (!(cp_ratio >= 0.0))
        throw std::invalid_argument("OfdmConfig: negative CP ratio");
}

SymbolGrid unit_symbols(const OfdmConfig &ofdm)
{
    return {CMatrix::Ones(static_cast<Eigen::Index>(ofdm.num_subcarriers),
                          static_cast<Eigen::Index>(ofdm.num_symbols))};
}

SymbolGrid random_qpsk(const OfdmConfig &ofdm, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    SymbolGrid g{CMatrix(static_cast<Eigen::Index>(ofdm.num_subcarriers), static_cast<Eigen::Index>(ofdm.num_symbols))};
    const double h = std::sqrt(0.5);
    for (Eigen::Index p = 0; p < g.b.cols(); ++p)
        for (Eigen::Index n = 0; n < g.b.rows(); ++n)
        {
            const std::uint64_t bits = rng();
            g.b(n, p) = cd((bits & 1U) ? -h : h, (bits & 2U) ? -h : h);
        }
    return g;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream)
{
    // splitmix64 over (master, stream)
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

DelayDoppler target_delay_doppler(const Target &t, const Carrier &carrier, const OfdmConfig &ofdm)
{
    DelayDoppler dd{delay_from_range(t.range_m), doppler_from_velocity(t.velocity_mps, carrier)};
    if (dd.tau_s < 0.0 || dd.tau_s >= ofdm.max_delay())
        throw DomainError("delay outside [0, 1/df)");
    if (std::abs(dd.doppler_hz) >= ofdm.subcarrier_spacing_hz / 10.0)
        throw DomainError("Doppler violates the |v| < df/10 ICI guard");
    return dd;
}

SensingTensor synthesize(const Scene &scene, const OfdmConfig &ofdm, const SymbolGrid &symbols, SteeringKind model,
                         std::optional<double> snr_db, std::uint64_t seed)
{
    scene.array.validate();
    scene.carrier.validate();
    ofdm.validate();
    const std::size_t M = scene.array.num_elements, N = ofdm.num_subcarriers, P = ofdm.num_symbols;
    if (static_cast<std::size_t>(symbols.b.rows()) != N || static_cast<std::size_t>(symbols.b.cols()) != P)
        throw std::invalid_argument("synthesize: symbol grid shape mismatch");

    SensingTensor out;
    out.data = Tensor3(M, N, P);
    out.kind = TensorKind::WithSymbols;
    out.snr_db = snr_db;
    out.rng_seed = seed;

    const double ts = ofdm.symbol_period();
    for (std::size_t k = 0; k < scene.targets.size(); ++k)
    {
        const Target &t = scene.targets[k];
        DelayDoppler dd;
        try
        {
            dd = target_delay_doppler(t, scene.carrier, ofdm);
        }
        catch (const DomainError &e)
        {
            throw DomainError("synthesize: target " + std::to_string(k) + ": " + e.what());
        }
        const CVector a = steer(model, scene.array, scene.carrier, t.angle_deg, t.range_m);
        std::vector<cd> ad(N), av(P);
        for (std::size_t n = 0; n < N; ++n)
            ad[n] = std::polar(1.0, -2.0 * kPi * static_cast<double>(n) * ofdm.subcarrier_spacing_hz * dd.tau_s);
        for (std::size_t p = 0; p < P; ++p)
            av[p] = std::polar(1.0, 2.0 * kPi * static_cast<double>(p) * ts * dd.doppler_hz);
        for (std::size_t p = 0; p < P; ++p)
            for (std::size_t n = 0; n < N; ++n)
            {
                const cd c = t.gain * ad[n] * av[p];
                cd *col = &out.data(0, n, p);
                for (std::size_t m = 0; m < M; ++m)
                    col[m] += c * a(static_cast<Eigen::Index>(m));
            }
    }

    for (std::size_t p = 0; p < P; ++p)
        for (std::size_t n = 0; n < N; ++n)
        {
            const cd b = symbols.b(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
            cd *col = &out.data(0, n, p);
            for (std::size_t m = 0; m < M; ++m)
                col[m] *= b;
        }

    if (snr_db)
    {
        double power = 0.0;
        for (const cd &v : out.data.values())
            power += std::norm(v);
        power /= static_cast<double>(out.data.size());
        const double sigma2 = power / std::pow(10.0, *snr_db / 10.0);
        out.noise_variance = sigma2;
        std::mt19937_64 rng(derive_seed(seed, 0));
        std::normal_distribution<double> g(0.0, std::sqrt(sigma2 / 2.0));
        for (cd &v : out.data.values())
        {
            const double re = g(rng);
            const double im = g(rng);
            v += cd(re, im);
        }
    }
    return out;
}

SensingTensor strip_symbols(const SensingTensor &y, const SymbolGrid &symbols)
{
    if (y.kind != TensorKind::WithSymbols)
        throw std::invalid_argument("strip_symbols: tensor already stripped");
    const std::size_t M = y.data.dim_m(), N = y.data.dim_n(), P = y.data.dim_p();
    if (static_cast<std::size_t>(symbols.b.rows()) != N || static_cast<std::size_t>(symbols.b.cols()) != P)
        throw std::invalid_argument("strip_symbols: symbol grid shape mismatch");
    SensingTensor out = y;
    out.kind = TensorKind::SymbolStripped;
    for (std::size_t p = 0; p < P; ++p)
        for (std::size_t n = 0; n < N; ++n)
        {
            const cd b = symbols.b(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
            if (std::abs(b) < 1e-12)
                throw DomainError("strip_symbols: symbol magnitude below 1e-12");
            cd *col = &out.data(0, n, p);
            for (std::size_t m = 0; m < M; ++m)
                col[m] /= b;
        }
    return out;
}

CMatrix reshape_angle(const SensingTensor &y)
{
    const auto M = static_cast<Eigen::Index>(y.data.dim_m());
    const auto Q = static_cast<Eigen::Index>(y.data.dim_n() * y.data.dim_p());
    return Eigen::Map<const CMatrix>(y.data.data(), M, Q);
}

CMatrix reshape_delay(const SensingTensor &y)
{
    if (y.kind != TensorKind::SymbolStripped)
        throw std::invalid_argument("reshape_delay: tensor must be symbol-stripped");
    const std::size_t M = y.data.dim_m(), N = y.data.dim_n(), P = y.data.dim_p();
    CMatrix X(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(M * P));
    for (std::size_t p = 0; p < P; ++p)
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t m = 0; m < M; ++m)
                X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m + p * M)) = y.data(m, n, p);
    return X;
}

CMatrix reshape_doppler(const SensingTensor &y)
{
    if (y.kind != TensorKind::SymbolStripped)
        throw std::invalid_argument("reshape_doppler: tensor must be symbol-stripped");
    const std::size_t M = y.data.dim_m(), N = y.data.dim_n(), P = y.data.dim_p();
    CMatrix X(static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(M * N));
    for (std::size_t p = 0; p < P; ++p)
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t m = 0; m < M; ++m)
                X(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(m + n * M)) = y.data(m, n, p);
    return X;
}

Scene reference_scene()
{
    Scene s;
    s.array = {16, 0.5, ArrayReference::FirstElement};
    s.carrier = {28e9};
    s.targets = {{-20.0, 20.0, 8.0, {1.0, 0.0}}, {10.0, 80.0, 12.0, {1.0, 0.0}}, {45.0, 50.0, 20.0, {1.0, 0.0}}};
    return s;
}

OfdmConfig reference_ofdm() { return OfdmConfig{128, 64, 120e3, 0.25}; }
} // namespace isac
