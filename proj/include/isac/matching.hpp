// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isac/types.hpp"

#include <limits>

namespace isac
{
// Minimum-cost rectangular assignment; returns, for each row, the assigned
// column or -1.
std::vector<long> hungarian(const Eigen::MatrixXd &cost);

struct MatchResult
{
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // (estimate, truth)
    std::vector<std::size_t> unmatched_estimates;
    std::vector<std::size_t> unmatched_truths;
    std::vector<std::vector<double>> errors; // per pair, estimate - truth per dimension
    double total_cost = 0.0;
    double match_rate = 0.0; // matched truths / truths

    // RMSE of dimension d over matched pairs (NaN when nothing matched).
    double rmse(std::size_t d) const;
};

// Points are equal-length parameter vectors. Distances are Euclidean after
// dividing each dimension by its weight. Pairs farther than `gate` are
// reported as unmatched.
MatchResult match_to_truth(const std::vector<std::vector<double>> &estimates,
                           const std::vector<std::vector<double>> &truth, const std::vector<double> &weights,
                           double gate = std::numeric_limits<double>::infinity());
} // namespace isac
