#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trajnav/core/random.hpp"
#include "trajnav/nn/tensor.hpp"

// Differentiable operations. Everything works on the matrix view of a
// tensor (leading dimensions folded into rows) unless stated otherwise.
namespace trajnav::nn {

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> transpose(const Tensor<T>& x);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor);

// x[m,n] + bias[n] broadcast over rows.
template <typename T>
Tensor<T> add_bias(const Tensor<T>& x, const Tensor<T>& bias);

// Exact (erf-based) GELU.
template <typename T>
Tensor<T> gelu(const Tensor<T>& x);

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     T eps = T(1e-5));

// Softmax along `axis` of a matrix (-1 or 1: along each row, 0: along each
// column). Max-subtracted, so large logits do not overflow.
template <typename T>
Tensor<T> softmax(const Tensor<T>& x, int axis = -1);

// Row softmax where allowed[i*cols + j] == 0 gives weight exactly zero.
// Every row must allow at least one entry.
template <typename T>
Tensor<T> masked_softmax(const Tensor<T>& x, std::span<const std::uint8_t> allowed);

template <typename T>
Tensor<T> concat_rows(std::span<const Tensor<T>> parts);

template <typename T>
Tensor<T> concat_cols(std::span<const Tensor<T>> parts);

// Rows [begin, end) as a new [end-begin, cols] tensor.
template <typename T>
Tensor<T> slice_rows(const Tensor<T>& x, std::size_t begin, std::size_t end);

template <typename T>
Tensor<T> slice_cols(const Tensor<T>& x, std::size_t begin, std::size_t end);

// Embedding lookup: out[i] = table[ids[i]].
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& table, std::span<const std::int64_t> ids);

// -log softmax(logits)[target] for a single row of logits.
template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::size_t target);

template <typename T>
Tensor<T> sum(const Tensor<T>& x);

template <typename T>
Tensor<T> mean(const Tensor<T>& x);

// Inverted dropout; identity when p == 0.
template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double p, Rng& rng);

}  // namespace trajnav::nn
