// SPDX-License-Identifier: Apache-2.0
#include "isac/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace isac
{
static_assert(std::endian::native == std::endian::little, "tensor dump assumes a little-endian host");

namespace
{
constexpr char kMagic[8] = {'I', 'S', 'A', 'C', 'T', 'N', 'S', 'R'};

template <typename T> void put(std::ofstream &os, T v) { os.write(reinterpret_cast<const char *>(&v), sizeof(T)); }

template <typename T> T get(std::ifstream &is)
{
    T v{};
    is.read(reinterpret_cast<char *>(&v), sizeof(T));
    if (!is)
        throw std::runtime_error("read_tensor: truncated file");
    return v;
}
} // namespace

void write_tensor(const std::string &path, const SensingTensor &t)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("write_tensor: cannot open " + path);
    os.write(kMagic, sizeof(kMagic));
    const std::size_t M = t.data.dim_m(), N = t.data.dim_n(), P = t.data.dim_p();
    put<std::uint32_t>(os, static_cast<std::uint32_t>(M));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(N));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(P));
    put<std::uint8_t>(os, static_cast<std::uint8_t>(t.kind));
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t p = 0; p < P; ++p)
            {
                const cd v = t.data(m, n, p);
                put<float>(os, static_cast<float>(v.real()));
                put<float>(os, static_cast<float>(v.imag()));
            }
}

SensingTensor read_tensor(const std::string &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("read_tensor: cannot open " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("read_tensor: bad magic");
    const auto M = get<std::uint32_t>(is);
    const auto N = get<std::uint32_t>(is);
    const auto P = get<std::uint32_t>(is);
    const auto kind = get<std::uint8_t>(is);
    if (kind > 1)
        throw std::runtime_error("read_tensor: unknown tensor kind");
    SensingTensor t;
    t.kind = static_cast<TensorKind>(kind);
    t.data = Tensor3(M, N, P);
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t p = 0; p < P; ++p)
            {
                const float re = get<float>(is);
                const float im = get<float>(is);
                t.data(m, n, p) = cd(re, im);
            }
    return t;
}
} // namespace isac
