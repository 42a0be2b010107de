// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isac/scene.hpp"

#include <cstdint>
#include <optional>

namespace isac
{
struct OfdmConfig
{
    std::size_t num_subcarriers = 128; // N
    std::size_t num_symbols = 64;      // P
    double subcarrier_spacing_hz = 120e3;
    double cp_ratio = 0.25;

    void validate() const;
    double symbol_duration() const { return 1.0 / subcarrier_spacing_hz; } // T
    double cp_duration() const { return cp_ratio * symbol_duration(); }
    double symbol_period() const { return symbol_duration() + cp_duration(); } // Ts
    double bandwidth() const { return static_cast<double>(num_subcarriers) * subcarrier_spacing_hz; }
    double cpi() const { return static_cast<double>(num_symbols) * symbol_period(); }
    double delay_resolution() const { return 1.0 / bandwidth(); }
    double doppler_resolution() const { return 1.0 / cpi(); }
    double max_delay() const { return 1.0 / subcarrier_spacing_hz; }
    double max_doppler() const { return 0.5 / symbol_period(); }
};

// Complex M x N x P array; antenna index fastest, then subcarrier, then symbol.
class Tensor3
{
  public:
    Tensor3() = default;
    Tensor3(std::size_t m, std::size_t n, std::size_t p) : m_(m), n_(n), p_(p), data_(m * n * p, cd(0.0, 0.0)) {}

    std::size_t dim_m() const { return m_; }
    std::size_t dim_n() const { return n_; }
    std::size_t dim_p() const { return p_; }
    std::size_t size() const { return data_.size(); }

    cd &operator()(std::size_t m, std::size_t n, std::size_t p) { return data_[m + m_ * (n + n_ * p)]; }
    const cd &operator()(std::size_t m, std::size_t n, std::size_t p) const { return data_[m + m_ * (n + n_ * p)]; }

    cd *data() { return data_.data(); }
    const cd *data() const { return data_.data(); }
    std::vector<cd> &values() { return data_; }
    const std::vector<cd> &values() const { return data_; }

  private:
    std::size_t m_ = 0, n_ = 0, p_ = 0;
    std::vector<cd> data_;
};

// N x P unit-modulus symbols.
struct SymbolGrid
{
    CMatrix b;
};

SymbolGrid unit_symbols(const OfdmConfig &ofdm);
SymbolGrid random_qpsk(const OfdmConfig &ofdm, std::uint64_t seed);

enum class TensorKind : std::uint8_t
{
    WithSymbols = 0,
    SymbolStripped = 1,
};

struct SensingTensor
{
    Tensor3 data;
    TensorKind kind = TensorKind::WithSymbols;
    std::optional<double> snr_db;
    std::uint64_t rng_seed = 0;
    double noise_variance = 0.0;
};

// Independent generator state for stream `stream` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

SensingTensor synthesize(const Scene &scene, const OfdmConfig &ofdm, const SymbolGrid &symbols, SteeringKind model,
                         std::optional<double> snr_db, std::uint64_t seed);

SensingTensor strip_symbols(const SensingTensor &y, const SymbolGrid &symbols);

CMatrix reshape_angle(const SensingTensor &y);   // M x (N P), column n + p N
CMatrix reshape_delay(const SensingTensor &y);   // N x (M P), column m + p M
CMatrix reshape_doppler(const SensingTensor &y); // P x (M N), column m + n M

// Target delay/Doppler checked against the OFDM ambiguity and ICI limits.
struct DelayDoppler
{
    double tau_s = 0.0;
    double doppler_hz = 0.0;
};
DelayDoppler target_delay_doppler(const Target &t, const Carrier &carrier, const OfdmConfig &ofdm);

// reference defaults.
Scene reference_scene();
OfdmConfig reference_ofdm();
} // namespace isac
