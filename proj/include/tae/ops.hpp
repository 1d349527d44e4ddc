#pragma once

#include "tae/graph.hpp"

#include <cstddef>
#include <span>

namespace tae::nn {

enum class Padding { same, valid };

/// out[s,j] = sum_i x[s,i] * w[i,j] + b[j]
Var dense(Graph& g, Var x, Var w, Var b);

/// Stride-1 cross-correlation. x: S x C x H x W, kernels: K x C x kh x kw, bias: K.
/// "same" pads (k-1)/2 on the top/left and the remainder on the bottom/right.
Var conv2d(Graph& g, Var x, Var kernels, Var bias, Padding padding);

/// 2x2 max-pool, stride 2. Odd extents are padded with -inf on the bottom/right.
/// Gradient goes to the first maximal cell of each window in row-major order.
Var maxpool2(Graph& g, Var x);

/// Nearest-neighbour 2x up-sampling of the two trailing axes.
Var upsample2(Graph& g, Var x);

Var relu(Graph& g, Var x);
Var sigmoid(Graph& g, Var x);

/// Mean categorical cross-entropy of S x classes logits against class ids.
Var softmax_cross_entropy(Graph& g, Var logits, std::span<const int> labels);

/// Mean squared error against a constant target of the same shape.
Var mse(Graph& g, Var pred, const Tensor& target);

Var reshape(Graph& g, Var x, Shape shape);

/// Crops the two trailing axes of an N x C x H x W tensor to h x w around the centre.
Var center_crop(Graph& g, Var x, std::size_t h, std::size_t w);

/// [a | b] for two S x m and S x n matrices.
Var concat_columns(Graph& g, Var a, Var b);

Var add(Graph& g, Var a, Var b);
Var scale(Graph& g, Var x, double factor);
Var sum(Graph& g, Var x);

/// Number of rows in argmax(logits) == labels.
std::size_t count_correct(const Tensor& logits, std::span<const int> labels);

}  // namespace tae::nn
