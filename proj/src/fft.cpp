// SPDX-License-Identifier: Apache-2.0
#include "isac/fft.hpp"

#include <fftw3.h>
#include <mutex>

namespace isac
{
namespace
{
// fftw planning is not thread-safe; execution is.
std::mutex &planner_mutex()
{
    static std::mutex m;
    return m;
}
} // namespace

CMatrix dft_columns(const CMatrix &X, Eigen::Index n, FftSign sign)
{
    if (n < X.rows())
        throw std::invalid_argument("dft_columns: transform length below row count");
    const Eigen::Index cols = X.cols();
    CMatrix out = CMatrix::Zero(n, cols);
    if (n == 0 || cols == 0)
        return out;
    out.topRows(X.rows()) = X;

    auto *buf = reinterpret_cast<fftw_complex *>(out.data());
    int len = static_cast<int>(n);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_many_dft(1, &len, static_cast<int>(cols), buf, nullptr, 1, len, buf, nullptr, 1, len,
                                  sign == FftSign::Forward ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    if (plan == nullptr)
        throw std::runtime_error("dft_columns: fftw planning failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

CVector dft(const CVector &x, Eigen::Index n, FftSign sign)
{
    return dft_columns(x, n, sign).col(0);
}
} // namespace isac
