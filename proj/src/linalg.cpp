// SPDX-License-Identifier: Apache-2.0
#include "isac/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace isac
{
namespace
{
constexpr Eigen::Index kDenseEigLimit = 256;

HermitianEig reverse_order(const RVector &ascending, const CMatrix &vecs)
{
    HermitianEig out;
    const Eigen::Index n = ascending.size();
    out.values = ascending.reverse();
    out.vectors.resize(vecs.rows(), n);
    for (Eigen::Index i = 0; i < n; ++i)
        out.vectors.col(i) = vecs.col(n - 1 - i);
    return out;
}
} // namespace

HermitianEig hermitian_eig(const CMatrix &R)
{
    if (R.rows() != R.cols())
        throw std::invalid_argument("hermitian_eig: matrix must be square");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(R);
    if (es.info() != Eigen::Success)
        throw EstimationError("hermitian_eig: eigendecomposition did not converge");
    return reverse_order(es.eigenvalues(), es.eigenvectors());
}

HermitianEig hermitian_eig_top(const CMatrix &R, Eigen::Index k)
{
    const Eigen::Index n = R.rows();
    if (R.cols() != n)
        throw std::invalid_argument("hermitian_eig_top: matrix must be square");
    if (k < 0 || k > n)
        throw std::invalid_argument("hermitian_eig_top: k out of range");
    if (n <= kDenseEigLimit || k == n)
    {
        HermitianEig full = hermitian_eig(R);
        full.values.conservativeResize(k);
        full.vectors.conservativeResize(Eigen::NoChange, k);
        return full;
    }
    if (k == 0)
        return {RVector(0), CMatrix(n, 0)};

    CMatrix a = R; // zheevr overwrites its input
    RVector w(n);
    CMatrix z(n, k);
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(k));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', static_cast<lapack_int>(n), a.data(),
                                           static_cast<lapack_int>(n), 0.0, 0.0, static_cast<lapack_int>(n - k + 1),
                                           static_cast<lapack_int>(n), 0.0, &found, w.data(), z.data(),
                                           static_cast<lapack_int>(n), isuppz.data());
    if (info != 0 || found != k)
        throw EstimationError("hermitian_eig_top: zheevr failed");
    return reverse_order(w.head(k), z);
}

HermitianEig streamed_eig_top(Eigen::Index n, Eigen::Index snapshots, const BlockSource &block, Eigen::Index k,
                              int iterations)
{
    if (snapshots < 1)
        throw std::invalid_argument("streamed_eig_top: no snapshots");
    if (k < 1 || k > n)
        throw std::invalid_argument("streamed_eig_top: k out of range");
    constexpr Eigen::Index kChunk = 1024;
    const Eigen::Index b = std::min(n, k + 10);
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix Q(n, b);
    for (Eigen::Index j = 0; j < b; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            Q(i, j) = cd(g(rng), g(rng));
    Q = orthonormalize(Q);
    CMatrix Xc;
    // one pass: X X^H Q, and optionally the Ritz matrix Q^H X X^H Q
    const auto apply = [&](const CMatrix &V, CMatrix *ritz) {
        CMatrix out = CMatrix::Zero(n, V.cols());
        for (Eigen::Index c0 = 0; c0 < snapshots; c0 += kChunk)
        {
            block(c0, std::min(kChunk, snapshots - c0), Xc);
            const CMatrix T = Xc.adjoint() * V;
            out.noalias() += Xc * T;
            if (ritz)
                ritz->noalias() += T.adjoint() * T;
        }
        return out;
    };
    for (int it = 0; it < iterations; ++it)
        Q = orthonormalize(apply(Q, nullptr));
    CMatrix T = CMatrix::Zero(b, b);
    apply(Q, &T);
    T /= static_cast<double>(snapshots);
    T = 0.5 * (T + T.adjoint()).eval();
    const HermitianEig small = hermitian_eig(T);
    HermitianEig out;
    out.values = small.values.head(k);
    out.vectors = Q * small.vectors.leftCols(k);
    return out;
}

HermitianEig data_eig_top(const CMatrix &X, Eigen::Index k, int iterations)
{
    return streamed_eig_top(
        X.rows(), X.cols(), [&](Eigen::Index c0, Eigen::Index count, CMatrix &out) { out = X.middleCols(c0, count); },
        k, iterations);
}

CMatrix sample_covariance(const CMatrix &X)
{
    if (X.cols() == 0)
        throw std::invalid_argument("sample_covariance: no snapshots");
    const Eigen::Index m = X.rows();
    CMatrix R = CMatrix::Zero(m, m);
    R.selfadjointView<Eigen::Lower>().rankUpdate(X, 1.0 / static_cast<double>(X.cols()));
    for (Eigen::Index c = 1; c < m; ++c)
        for (Eigen::Index r = 0; r < c; ++r)
            R(r, c) = std::conj(R(c, r));
    for (Eigen::Index i = 0; i < m; ++i)
        R(i, i) = cd(R(i, i).real(), 0.0);
    return R;
}

CMatrix pinv(const CMatrix &A, double rtol)
{
    Eigen::JacobiSVD<CMatrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector &s = svd.singularValues();
    const double cut = s.size() > 0 ? rtol * s(0) : 0.0;
    RVector inv = RVector::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > cut)
            inv(i) = 1.0 / s(i);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

std::vector<cd> eigenvalues(const CMatrix &A)
{
    Eigen::ComplexEigenSolver<CMatrix> es(A, false);
    if (es.info() != Eigen::Success)
        throw EstimationError("eigenvalues: did not converge");
    std::vector<cd> out(static_cast<std::size_t>(A.rows()));
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    return out;
}

std::vector<cd> polynomial_roots(const std::vector<cd> &coeffs)
{
    std::vector<cd> c = coeffs;
    while (!c.empty() && std::abs(c.back()) == 0.0)
        c.pop_back();
    if (c.size() < 2)
        return {};
    const auto deg = static_cast<Eigen::Index>(c.size() - 1);
    CMatrix comp = CMatrix::Zero(deg, deg);
    for (Eigen::Index i = 1; i < deg; ++i)
        comp(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < deg; ++i)
        comp(i, deg - 1) = -c[static_cast<std::size_t>(i)] / c.back();
    return eigenvalues(comp);
}

double log_abs_det(const CMatrix &A)
{
    Eigen::PartialPivLU<CMatrix> lu(A);
    const CMatrix &f = lu.matrixLU();
    double s = 0.0;
    for (Eigen::Index i = 0; i < f.rows(); ++i)
    {
        const double a = std::abs(f(i, i));
        if (a == 0.0)
            return -std::numeric_limits<double>::infinity();
        s += std::log(a);
    }
    return s;
}

CMatrix orthonormalize(const CMatrix &A)
{
    Eigen::HouseholderQR<CMatrix> qr(A);
    return qr.householderQ() * CMatrix::Identity(A.rows(), A.cols());
}
} // namespace isac
