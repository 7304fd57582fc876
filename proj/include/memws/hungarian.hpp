#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "memws/errors.hpp"

namespace memws {

/// Minimal-cost assignment of n_rows tasks to n_cols >= n_rows agents
/// (Jonker-Volgenant style shortest augmenting paths, O(n^2 m)).
/// Returns match[row] = column. cost is row-major n_rows x n_cols.
inline std::vector<std::size_t> min_cost_assignment(const std::vector<double>& cost,
                                                    std::size_t n_rows, std::size_t n_cols) {
    if (n_rows == 0) return {};
    if (cost.size() != n_rows * n_cols)
        throw validation_error("min_cost_assignment: cost matrix size mismatch");
    if (n_cols < n_rows)
        throw validation_error("min_cost_assignment: need at least as many columns as rows");

    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based potentials over rows/columns; way[j] remembers the augmenting path.
    std::vector<double> u(n_rows + 1, 0.0), v(n_cols + 1, 0.0);
    std::vector<std::size_t> p(n_cols + 1, 0), way(n_cols + 1, 0);

    for (std::size_t i = 1; i <= n_rows; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n_cols + 1, inf);
        std::vector<bool> used(n_cols + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n_cols; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * n_cols + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n_cols; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> match(n_rows, 0);
    for (std::size_t j = 1; j <= n_cols; ++j)
        if (p[j] != 0) match[p[j] - 1] = j - 1;
    return match;
}

/// Greedy nearest-neighbor assignment: rows in order grab their cheapest
/// unclaimed column. Valid as a fast path only when gaps dominate noise;
/// tests assert it agrees with the optimal matching on such instances.
inline std::vector<std::size_t> greedy_assignment(const std::vector<double>& cost,
                                                  std::size_t n_rows, std::size_t n_cols) {
    if (cost.size() != n_rows * n_cols)
        throw validation_error("greedy_assignment: cost matrix size mismatch");
    std::vector<bool> taken(n_cols, false);
    std::vector<std::size_t> match(n_rows, 0);
    for (std::size_t i = 0; i < n_rows; ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_j = n_cols;
        for (std::size_t j = 0; j < n_cols; ++j) {
            if (taken[j]) continue;
            const double c = cost[i * n_cols + j];
            if (c < best) {
                best = c;
                best_j = j;
            }
        }
        if (best_j == n_cols)
            throw computation_error("greedy_assignment: ran out of columns");
        taken[best_j] = true;
        match[i] = best_j;
    }
    return match;
}

}  // namespace memws
