#pragma once

#include <cstdint>

// Runtime FLOP accounting. Only forward matrix products are counted, at
// 2*m*k*n per product; element-wise work and backward passes are excluded.
namespace trajnav::nn::flops {

namespace detail {
inline thread_local std::uint64_t counter = 0;
}

inline std::uint64_t count() noexcept { return detail::counter; }
inline void reset() noexcept { detail::counter = 0; }
inline void add(std::uint64_t n) noexcept { detail::counter += n; }

// Measures the FLOPs charged on this thread since construction.
class Scope {
 public:
  Scope() : start_(detail::counter) {}
  std::uint64_t elapsed() const noexcept { return detail::counter - start_; }

 private:
  std::uint64_t start_;
};

}  // namespace trajnav::nn::flops
