// SPDX-License-Identifier: Apache-2.0
#include "isac/matching.hpp"

#include <cmath>

namespace isac
{
namespace
{
// Shortest augmenting path assignment for rows <= cols (potentials u, v).
std::vector<long> assign_rows(const Eigen::MatrixXd &c)
{
    const long n = c.rows(), m = c.cols();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<long> p(m + 1, 0), way(m + 1, 0);
    for (long i = 1; i <= n; ++i)
    {
        p[0] = i;
        long j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do
        {
            used[j0] = 1;
            const long i0 = p[j0];
            double delta = inf;
            long j1 = 0;
            for (long j = 1; j <= m; ++j)
            {
                if (used[j])
                    continue;
                const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j])
                {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta)
                {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (long j = 0; j <= m; ++j)
            {
                if (used[j])
                {
                    u[p[j]] += delta;
                    v[j] -= delta;
                }
                else
                {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do
        {
            const long j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<long> row(n, -1);
    for (long j = 1; j <= m; ++j)
        if (p[j] != 0)
            row[p[j] - 1] = j - 1;
    return row;
}
} // namespace

std::vector<long> hungarian(const Eigen::MatrixXd &cost)
{
    if (cost.rows() == 0 || cost.cols() == 0)
        return std::vector<long>(static_cast<std::size_t>(cost.rows()), -1);
    if (!cost.allFinite())
        throw std::invalid_argument("hungarian: costs must be finite");
    if (cost.rows() <= cost.cols())
        return assign_rows(cost);
    const std::vector<long> col = assign_rows(cost.transpose());
    std::vector<long> row(static_cast<std::size_t>(cost.rows()), -1);
    for (std::size_t j = 0; j < col.size(); ++j)
        if (col[j] >= 0)
            row[static_cast<std::size_t>(col[j])] = static_cast<long>(j);
    return row;
}

double MatchResult::rmse(std::size_t d) const
{
    if (errors.empty())
        return std::numeric_limits<double>::quiet_NaN();
    double acc = 0.0;
    for (const auto &e : errors)
        acc += e.at(d) * e.at(d);
    return std::sqrt(acc / static_cast<double>(errors.size()));
}

MatchResult match_to_truth(const std::vector<std::vector<double>> &estimates,
                           const std::vector<std::vector<double>> &truth, const std::vector<double> &weights,
                           double gate)
{
    const std::size_t D = weights.size();
    for (double w : weights)
        if (!(w > 0.0))
            throw std::invalid_argument("match_to_truth: weights must be positive");
    const auto check = [D](const std::vector<std::vector<double>> &pts) {
        for (const auto &p : pts)
            if (p.size() != D)
                throw std::invalid_argument("match_to_truth: point dimension differs from weights");
    };
    check(estimates);
    check(truth);

    MatchResult res;
    Eigen::MatrixXd cost(static_cast<Eigen::Index>(estimates.size()), static_cast<Eigen::Index>(truth.size()));
    for (std::size_t i = 0; i < estimates.size(); ++i)
        for (std::size_t j = 0; j < truth.size(); ++j)
        {
            double acc = 0.0;
            for (std::size_t d = 0; d < D; ++d)
            {
                const double x = (estimates[i][d] - truth[j][d]) / weights[d];
                acc += x * x;
            }
            // non-finite estimates can never match
            cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::isfinite(acc) ? std::sqrt(acc) : std::numeric_limits<double>::max() / 4;
        }
    const std::vector<long> a = hungarian(cost);
    std::vector<char> truth_used(truth.size(), 0);
    for (std::size_t i = 0; i < estimates.size(); ++i)
    {
        const long j = a[i];
        const double c = j >= 0 ? cost(static_cast<Eigen::Index>(i), j) : 0.0;
        if (j < 0 || !(c <= gate) || c >= std::numeric_limits<double>::max() / 8)
        {
            res.unmatched_estimates.push_back(i);
            continue;
        }
        const auto ju = static_cast<std::size_t>(j);
        truth_used[ju] = 1;
        res.pairs.emplace_back(i, ju);
        std::vector<double> e(D);
        for (std::size_t d = 0; d < D; ++d)
            e[d] = estimates[i][d] - truth[ju][d];
        res.errors.push_back(std::move(e));
        res.total_cost += c;
    }
    for (std::size_t j = 0; j < truth.size(); ++j)
        if (!truth_used[j])
            res.unmatched_truths.push_back(j);
    res.match_rate = truth.empty() ? 1.0 : static_cast<double>(res.pairs.size()) / static_cast<double>(truth.size());
    return res;
}
} // namespace isac
