// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isac/types.hpp"

namespace isac
{
// Forward: X[k] = sum x[i] e^{-j 2 pi i k / n}. Inverse: same with e^{+j}. No scaling either way.
enum class FftSign
{
    Forward,
    Inverse
};

// Unnormalized DFT of each column of X after zero padding to n rows.
CMatrix dft_columns(const CMatrix &X, Eigen::Index n, FftSign sign);

CVector dft(const CVector &x, Eigen::Index n, FftSign sign);
} // namespace isac
