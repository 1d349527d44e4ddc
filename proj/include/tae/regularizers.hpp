#pragma once

#include "tae/graph.hpp"

#include <cstddef>
#include <memory>
#include <vector>

namespace tae {

/// Per-column ascending order of batch indices (0-based), stable on ties.
struct SortPermutation {
    std::vector<std::vector<std::size_t>> order;  ///< order[i][s] = batch row holding the s-th smallest value of column i
};

struct SortedColumns {
    Tensor sorted;
    SortPermutation perm;
};

/// Sorts each column of an S x d matrix independently.
SortedColumns sort_columns(const Tensor& values);

/// Circular spring energy of each angle column: squared gaps between
/// consecutive sorted angles plus the wrap gap (min + 2*pi - max), summed
/// over columns. The sort order is held fixed in the backward pass.
/// Throws std::domain_error for angles outside [-pi, pi] (1e-9 slack).
Var spring_loss(Graph& g, Var phi);

/// Minimum attainable spring loss for one column of S angles: 4*pi^2 / S.
double spring_loss_minimum(std::size_t batch);

/// Quantiles q_s = F^{-1}((s - 1/2) / S) of N(mu, sigma), s = 1..S.
struct QuantileTargets {
    std::vector<double> q;
    double mu = 1.0;
    double sigma = 0.1;
};

QuantileTargets quantile_targets(std::size_t batch, double mu, double sigma);

/// Memoized quantile_targets; the returned object is immutable and shareable.
std::shared_ptr<const QuantileTargets> cached_quantile_targets(std::size_t batch, double mu, double sigma);

/// Sum over columns of sum_s (sorted_s - q_s)^2, sort order held fixed in backward.
Var quantile_loss(Graph& g, Var rho, const QuantileTargets& targets);

}  // namespace tae
