#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trajnav/nn/tensor.hpp"

namespace trajnav::nn {

// Boolean query-by-key matrix; true means the query may attend the key.
class AttentionMask {
 public:
  AttentionMask() = default;
  AttentionMask(std::size_t rows, std::size_t cols, bool fill = false)
      : rows_(rows), cols_(cols), allowed_(rows * cols, fill ? 1 : 0) {}

  static AttentionMask full(std::size_t rows, std::size_t cols) { return {rows, cols, true}; }

  // Lower-triangular: query i sees keys 0..i.
  static AttentionMask causal(std::size_t n);

  // Every query sees exactly the keys whose flag is set.
  static AttentionMask from_key_flags(std::size_t rows, std::span<const std::uint8_t> key_ok);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  bool allows(std::size_t q, std::size_t k) const { return allowed_[q * cols_ + k] != 0; }
  void set(std::size_t q, std::size_t k, bool value) { allowed_[q * cols_ + k] = value ? 1 : 0; }

  // Rows [begin, end) of this mask.
  AttentionMask slice_rows(std::size_t begin, std::size_t end) const;

  std::span<const std::uint8_t> flags() const noexcept { return allowed_; }

  // Throws InvariantError naming the first query row with no allowed key.
  void validate() const;

  bool operator==(const AttentionMask&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> allowed_;
};

// Multi-head scaled dot-product attention on already-projected inputs:
// q [lq, d], k and v [lk, d]; d is split evenly across heads. Masked keys
// receive exactly zero weight.
template <typename T>
Tensor<T> attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                    const AttentionMask& mask, std::size_t heads);

}  // namespace trajnav::nn
