// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isac/ofdm.hpp"

#include <string>

namespace isac
{
// Layout: "ISACTNSR", u32 M, u32 N, u32 P, u8 kind, then row-major (m, n, p)
// complex64 samples, all little-endian.
void write_tensor(const std::string &path, const SensingTensor &t);
SensingTensor read_tensor(const std::string &path);
} // namespace isac
