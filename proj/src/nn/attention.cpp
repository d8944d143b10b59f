#include "trajnav/nn/attention.hpp"

#include <cmath>
#include <string>

#include "trajnav/nn/ops.hpp"

namespace trajnav::nn {

AttentionMask AttentionMask::causal(std::size_t n) {
  AttentionMask m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) m.set(i, j, true);
  return m;
}

AttentionMask AttentionMask::from_key_flags(std::size_t rows, std::span<const std::uint8_t> key_ok) {
  AttentionMask m(rows, key_ok.size());
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < key_ok.size(); ++j) m.set(i, j, key_ok[j] != 0);
  return m;
}

AttentionMask AttentionMask::slice_rows(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows_) {
    throw IndexError("AttentionMask::slice_rows: [" + std::to_string(begin) + "," +
                     std::to_string(end) + ") outside " + std::to_string(rows_) + " rows");
  }
  AttentionMask m(end - begin, cols_);
  std::copy(allowed_.begin() + begin * cols_, allowed_.begin() + end * cols_, m.allowed_.begin());
  return m;
}

void AttentionMask::validate() const {
  for (std::size_t i = 0; i < rows_; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < cols_ && !any; ++j) any = allows(i, j);
    if (!any) {
      throw InvariantError("attention mask: query row " + std::to_string(i) +
                           " has every key masked");
    }
  }
}

template <typename T>
Tensor<T> attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                    const AttentionMask& mask, std::size_t heads) {
  const std::size_t d = q.cols();
  if (heads == 0 || d % heads != 0) {
    throw DimensionError("attention: feature size " + std::to_string(d) +
                         " not divisible by " + std::to_string(heads) + " heads");
  }
  if (k.cols() != d || v.cols() != d || k.rows() != v.rows()) {
    throw DimensionError("attention: q " + to_string(q.shape()) + ", k " + to_string(k.shape()) +
                         ", v " + to_string(v.shape()) + " are inconsistent");
  }
  if (mask.rows() != q.rows() || mask.cols() != k.rows()) {
    throw DimensionError("attention: mask " + std::to_string(mask.rows()) + "x" +
                         std::to_string(mask.cols()) + " does not match " +
                         std::to_string(q.rows()) + " queries / " + std::to_string(k.rows()) +
                         " keys");
  }
  mask.validate();

  const std::size_t dh = d / heads;
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(dh));
  if (heads == 1) {
    auto scores = scale(matmul(q, transpose(k)), inv_sqrt);
    return matmul(masked_softmax(scores, mask.flags()), v);
  }
  std::vector<Tensor<T>> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    auto qh = slice_cols(q, h * dh, (h + 1) * dh);
    auto kh = slice_cols(k, h * dh, (h + 1) * dh);
    auto vh = slice_cols(v, h * dh, (h + 1) * dh);
    auto scores = scale(matmul(qh, transpose(kh)), inv_sqrt);
    outs.push_back(matmul(masked_softmax(scores, mask.flags()), vh));
  }
  return concat_cols<T>(outs);
}

template Tensor<float> attention(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&,
                                 const AttentionMask&, std::size_t);
template Tensor<double> attention(const Tensor<double>&, const Tensor<double>&,
                                  const Tensor<double>&, const AttentionMask&, std::size_t);

}  // namespace trajnav::nn
