// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isac/types.hpp"

#include <functional>

namespace isac
{
// Eigenpairs of a Hermitian matrix, eigenvalues sorted descending.
struct HermitianEig
{
    RVector values;
    CMatrix vectors;
};

HermitianEig hermitian_eig(const CMatrix &R);

// Largest k eigenpairs only. Uses LAPACK zheevr for large matrices.
HermitianEig hermitian_eig_top(const CMatrix &R, Eigen::Index k);

// Top k eigenpairs of X X^H / cols(X) without forming the covariance:
// randomized block power iteration followed by Rayleigh-Ritz.
HermitianEig data_eig_top(const CMatrix &X, Eigen::Index k, int iterations = 8);

// Same, with snapshot columns [c0, c0 + count) written into `out` on demand.
using BlockSource = std::function<void(Eigen::Index c0, Eigen::Index count, CMatrix &out)>;
HermitianEig streamed_eig_top(Eigen::Index n, Eigen::Index snapshots, const BlockSource &block, Eigen::Index k,
                              int iterations = 8);

// R = X X^H / cols(X)
CMatrix sample_covariance(const CMatrix &X);

CMatrix pinv(const CMatrix &A, double rtol = 1e-12);

std::vector<cd> eigenvalues(const CMatrix &A);

// Roots of c[0] + c[1] z + ... + c[n] z^n via the companion matrix.
std::vector<cd> polynomial_roots(const std::vector<cd> &coeffs);

// log|det A| from an LU factorization; -inf for exactly singular input.
double log_abs_det(const CMatrix &A);

// Orthonormal basis for the column span of A (thin QR).
CMatrix orthonormalize(const CMatrix &A);
} // namespace isac
