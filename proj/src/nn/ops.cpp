#include "trajnav/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>

#include "trajnav/nn/flops.hpp"

namespace trajnav::nn {
namespace {

template <typename T>
using NodeT = detail::Node<T>;

template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> value,
                      std::initializer_list<const Tensor<T>*> inputs,
                      std::function<void(NodeT<T>&)> backward_fn) {
  auto node = std::make_shared<NodeT<T>>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool needs = false;
  if (grad_enabled()) {
    for (const Tensor<T>* in : inputs) needs = needs || in->requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    for (const Tensor<T>* in : inputs) node->inputs.push_back(in->node());
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor<T>(std::move(node));
}

template <typename T>
Tensor<T> make_result_many(Shape shape, std::vector<T> value, std::span<const Tensor<T>> inputs,
                           std::function<void(NodeT<T>&)> backward_fn) {
  auto node = std::make_shared<NodeT<T>>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool needs = false;
  if (grad_enabled()) {
    for (const auto& in : inputs) needs = needs || in.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    for (const auto& in : inputs) node->inputs.push_back(in.node());
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor<T>(std::move(node));
}

// Gradient buffer of input i, or nullptr when it takes no gradient.
template <typename T>
T* input_grad(NodeT<T>& node, std::size_t i) {
  auto& in = *node.inputs[i];
  if (!in.requires_grad) return nullptr;
  in.ensure_grad();
  return in.grad.data();
}

Shape matrix_shape(std::size_t rows, std::size_t cols) { return {rows, cols}; }

template <typename T>
void require_same_shape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
  }
}

// c[m,n] += a[m,k] * b[k,n]
template <typename T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    const T* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      if (av == T(0)) continue;
      const T* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// c[m,k] += a[m,n] * b[k,n]^T
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* arow = a + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T* brow = b + p * n;
      T acc = T(0);
      for (std::size_t j = 0; j < n; ++j) acc += arow[j] * brow[j];
      c[i * k + p] += acc;
    }
  }
}

// c[k,n] += a[m,k]^T * b[m,n]
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    const T* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      if (av == T(0)) continue;
      T* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
    throw DimensionError("matmul: cannot multiply " + to_string(a.shape()) + " by " +
                         to_string(b.shape()));
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<T> out(m * n, T(0));
  gemm_nn(a.data().data(), b.data().data(), out.data(), m, k, n);
  flops::add(2ULL * m * k * n);
  return make_result<T>(matrix_shape(m, n), std::move(out), {&a, &b}, [m, k, n](NodeT<T>& self) {
    const T* av = self.inputs[0]->value.data();
    const T* bv = self.inputs[1]->value.data();
    if (T* ga = input_grad(self, 0)) gemm_nt(self.grad.data(), bv, ga, m, n, k);
    if (T* gb = input_grad(self, 1)) gemm_tn(av, self.grad.data(), gb, m, k, n);
  });
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& x) {
  const std::size_t r = x.rows(), c = x.cols();
  std::vector<T> out(r * c);
  const auto in = x.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = in[i * c + j];
  return make_result<T>(matrix_shape(c, r), std::move(out), {&x}, [r, c](NodeT<T>& self) {
    if (T* g = input_grad(self, 0)) {
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[i * c + j] += self.grad[j * r + i];
    }
  });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape("add", a, b);
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return make_result<T>(a.shape(), std::move(out), {&a, &b}, [](NodeT<T>& self) {
    for (std::size_t s = 0; s < 2; ++s) {
      if (T* g = input_grad(self, s))
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape("sub", a, b);
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  return make_result<T>(a.shape(), std::move(out), {&a, &b}, [](NodeT<T>& self) {
    if (T* g = input_grad(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    if (T* g = input_grad(self, 1))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] -= self.grad[i];
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape("mul", a, b);
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  return make_result<T>(a.shape(), std::move(out), {&a, &b}, [](NodeT<T>& self) {
    const auto& av = self.inputs[0]->value;
    const auto& bv = self.inputs[1]->value;
    if (T* g = input_grad(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * bv[i];
    if (T* g = input_grad(self, 1))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * av[i];
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * factor;
  return make_result<T>(x.shape(), std::move(out), {&x}, [factor](NodeT<T>& self) {
    if (T* g = input_grad(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * factor;
  });
}

template <typename T>
Tensor<T> add_bias(const Tensor<T>& x, const Tensor<T>& bias) {
  const std::size_t r = x.rows(), c = x.cols();
  if (bias.numel() != c) {
    throw DimensionError("add_bias: bias " + to_string(bias.shape()) + " does not match " +
                         to_string(x.shape()));
  }
  std::vector<T> out(x.data().begin(), x.data().end());
  const auto b = bias.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += b[j];
  return make_result<T>(x.shape(), std::move(out), {&x, &bias}, [r, c](NodeT<T>& self) {
    if (T* g = input_grad(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    if (T* g = input_grad(self, 1))
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[j] += self.grad[i * c + j];
  });
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
  constexpr T kInvSqrt2 = T(0.70710678118654752440);
  constexpr T kInvSqrt2Pi = T(0.39894228040143267794);
  std::vector<T> out(x.numel());
  const auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = T(0.5) * in[i] * (T(1) + std::erf(in[i] * kInvSqrt2));
  return make_result<T>(x.shape(), std::move(out), {&x}, [](NodeT<T>& self) {
    if (T* g = input_grad(self, 0)) {
      const auto& v = self.inputs[0]->value;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const T cdf = T(0.5) * (T(1) + std::erf(v[i] * kInvSqrt2));
        const T pdf = kInvSqrt2Pi * std::exp(T(-0.5) * v[i] * v[i]);
        g[i] += self.grad[i] * (cdf + v[i] * pdf);
      }
    }
  });
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  const std::size_t r = x.rows(), c = x.cols();
  if (gamma.numel() != c || beta.numel() != c) {
    throw DimensionError("layer_norm: affine parameters do not match feature size " +
                         std::to_string(c));
  }
  std::vector<T> out(x.numel());
  std::vector<T> xhat(x.numel());
  std::vector<T> inv_std(r);
  const auto in = x.data();
  const auto gv = gamma.data();
  const auto bv = beta.data();
  for (std::size_t i = 0; i < r; ++i) {
    const T* row = in.data() + i * c;
    T mu = T(0);
    for (std::size_t j = 0; j < c; ++j) mu += row[j];
    mu /= static_cast<T>(c);
    T var = T(0);
    for (std::size_t j = 0; j < c; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<T>(c);
    const T is = T(1) / std::sqrt(var + eps);
    inv_std[i] = is;
    for (std::size_t j = 0; j < c; ++j) {
      xhat[i * c + j] = (row[j] - mu) * is;
      out[i * c + j] = xhat[i * c + j] * gv[j] + bv[j];
    }
  }
  return make_result<T>(
      x.shape(), std::move(out), {&x, &gamma, &beta},
      [r, c, xhat = std::move(xhat), inv_std = std::move(inv_std)](NodeT<T>& self) {
        const auto& gv = self.inputs[1]->value;
        const T* dy = self.grad.data();
        if (T* gx = input_grad(self, 0)) {
          for (std::size_t i = 0; i < r; ++i) {
            T sum_dxhat = T(0), sum_dxhat_xhat = T(0);
            for (std::size_t j = 0; j < c; ++j) {
              const T dxh = dy[i * c + j] * gv[j];
              sum_dxhat += dxh;
              sum_dxhat_xhat += dxh * xhat[i * c + j];
            }
            const T invc = T(1) / static_cast<T>(c);
            for (std::size_t j = 0; j < c; ++j) {
              const T dxh = dy[i * c + j] * gv[j];
              gx[i * c + j] += inv_std[i] * (dxh - invc * sum_dxhat -
                                             xhat[i * c + j] * invc * sum_dxhat_xhat);
            }
          }
        }
        if (T* gg = input_grad(self, 1))
          for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) gg[j] += dy[i * c + j] * xhat[i * c + j];
        if (T* gb = input_grad(self, 2))
          for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) gb[j] += dy[i * c + j];
      });
}

namespace {

// Shared backward for row softmax: dx = y * (dy - <dy, y>).
template <typename T>
void softmax_rows_backward(const std::vector<T>& y, const T* dy, T* dx, std::size_t r,
                           std::size_t c) {
  for (std::size_t i = 0; i < r; ++i) {
    T dot = T(0);
    for (std::size_t j = 0; j < c; ++j) dot += dy[i * c + j] * y[i * c + j];
    for (std::size_t j = 0; j < c; ++j) dx[i * c + j] += y[i * c + j] * (dy[i * c + j] - dot);
  }
}

}  // namespace

template <typename T>
Tensor<T> masked_softmax(const Tensor<T>& x, std::span<const std::uint8_t> allowed) {
  const std::size_t r = x.rows(), c = x.cols();
  if (!allowed.empty() && allowed.size() != r * c) {
    throw DimensionError("masked_softmax: mask has " + std::to_string(allowed.size()) +
                         " entries for shape " + to_string(x.shape()));
  }
  const auto in = x.data();
  std::vector<T> out(r * c, T(0));
  for (std::size_t i = 0; i < r; ++i) {
    T mx = -std::numeric_limits<T>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < c; ++j) {
      if (!allowed.empty() && !allowed[i * c + j]) continue;
      mx = std::max(mx, in[i * c + j]);
      any = true;
    }
    if (!any) {
      throw InvariantError("masked_softmax: row " + std::to_string(i) + " has no allowed entry");
    }
    T total = T(0);
    for (std::size_t j = 0; j < c; ++j) {
      if (!allowed.empty() && !allowed[i * c + j]) continue;
      out[i * c + j] = std::exp(in[i * c + j] - mx);
      total += out[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= total;
  }
  std::vector<T> saved = out;
  return make_result<T>(x.shape(), std::move(out), {&x},
                        [r, c, y = std::move(saved)](NodeT<T>& self) {
                          if (T* g = input_grad(self, 0))
                            softmax_rows_backward(y, self.grad.data(), g, r, c);
                        });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, int axis) {
  if (axis == 0 && x.rank() >= 2) return transpose(masked_softmax(transpose(x), {}));
  if (axis != -1 && axis != 1 && !(axis == 0 && x.rank() < 2)) {
    throw DimensionError("softmax: unsupported axis " + std::to_string(axis));
  }
  return masked_softmax(x, {});
}

template <typename T>
Tensor<T> concat_rows(std::span<const Tensor<T>> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t c = parts.front().cols();
  std::size_t r = 0;
  for (const auto& p : parts) {
    if (p.cols() != c) {
      throw DimensionError("concat_rows: column mismatch " + to_string(parts.front().shape()) +
                           " vs " + to_string(p.shape()));
    }
    r += p.rows();
  }
  std::vector<T> out;
  out.reserve(r * c);
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    offsets.push_back(out.size());
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  return make_result_many<T>(matrix_shape(r, c), std::move(out), parts,
                             [offsets = std::move(offsets)](NodeT<T>& self) {
                               for (std::size_t s = 0; s < self.inputs.size(); ++s) {
                                 if (T* g = input_grad(self, s)) {
                                   const std::size_t n = self.inputs[s]->value.size();
                                   for (std::size_t i = 0; i < n; ++i)
                                     g[i] += self.grad[offsets[s] + i];
                                 }
                               }
                             });
}

template <typename T>
Tensor<T> concat_cols(std::span<const Tensor<T>> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t r = parts.front().rows();
  std::size_t c = 0;
  std::vector<std::size_t> offsets, widths;
  for (const auto& p : parts) {
    if (p.rows() != r) {
      throw DimensionError("concat_cols: row mismatch " + to_string(parts.front().shape()) +
                           " vs " + to_string(p.shape()));
    }
    offsets.push_back(c);
    widths.push_back(p.cols());
    c += p.cols();
  }
  std::vector<T> out(r * c);
  for (std::size_t s = 0; s < parts.size(); ++s) {
    const auto in = parts[s].data();
    for (std::size_t i = 0; i < r; ++i)
      std::copy_n(in.data() + i * widths[s], widths[s], out.data() + i * c + offsets[s]);
  }
  return make_result_many<T>(
      matrix_shape(r, c), std::move(out), parts,
      [r, c, offsets = std::move(offsets), widths = std::move(widths)](NodeT<T>& self) {
        for (std::size_t s = 0; s < self.inputs.size(); ++s) {
          if (T* g = input_grad(self, s)) {
            for (std::size_t i = 0; i < r; ++i)
              for (std::size_t j = 0; j < widths[s]; ++j)
                g[i * widths[s] + j] += self.grad[i * c + offsets[s] + j];
          }
        }
      });
}

template <typename T>
Tensor<T> slice_rows(const Tensor<T>& x, std::size_t begin, std::size_t end) {
  const std::size_t c = x.cols();
  if (begin > end || end > x.rows()) {
    throw IndexError("slice_rows: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") out of " + to_string(x.shape()));
  }
  std::vector<T> out(x.data().begin() + begin * c, x.data().begin() + end * c);
  return make_result<T>(matrix_shape(end - begin, c), std::move(out), {&x},
                        [begin, c](NodeT<T>& self) {
                          if (T* g = input_grad(self, 0))
                            for (std::size_t i = 0; i < self.grad.size(); ++i)
                              g[begin * c + i] += self.grad[i];
                        });
}

template <typename T>
Tensor<T> slice_cols(const Tensor<T>& x, std::size_t begin, std::size_t end) {
  const std::size_t r = x.rows(), c = x.cols();
  if (begin > end || end > c) {
    throw IndexError("slice_cols: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") out of " + to_string(x.shape()));
  }
  const std::size_t w = end - begin;
  std::vector<T> out(r * w);
  const auto in = x.data();
  for (std::size_t i = 0; i < r; ++i) std::copy_n(in.data() + i * c + begin, w, out.data() + i * w);
  return make_result<T>(matrix_shape(r, w), std::move(out), {&x}, [r, c, w, begin](NodeT<T>& self) {
    if (T* g = input_grad(self, 0))
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < w; ++j) g[i * c + begin + j] += self.grad[i * w + j];
  });
}

template <typename T>
Tensor<T> gather_rows(const Tensor<T>& table, std::span<const std::int64_t> ids) {
  const std::size_t c = table.cols(), vocab = table.rows();
  std::vector<T> out(ids.size() * c);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw IndexError("gather_rows: id " + std::to_string(ids[i]) + " outside table of " +
                       std::to_string(vocab) + " rows");
    }
    std::copy_n(table.data().data() + ids[i] * c, c, out.data() + i * c);
  }
  std::vector<std::int64_t> saved(ids.begin(), ids.end());
  return make_result<T>(matrix_shape(ids.size(), c), std::move(out), {&table},
                        [c, ids = std::move(saved)](NodeT<T>& self) {
                          if (T* g = input_grad(self, 0))
                            for (std::size_t i = 0; i < ids.size(); ++i)
                              for (std::size_t j = 0; j < c; ++j)
                                g[ids[i] * c + j] += self.grad[i * c + j];
                        });
}

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::size_t target) {
  const std::size_t n = logits.numel();
  if (target >= n) {
    throw IndexError("cross_entropy: target " + std::to_string(target) + " outside " +
                     std::to_string(n) + " classes");
  }
  const auto z = logits.data();
  const T mx = *std::max_element(z.begin(), z.end());
  T total = T(0);
  for (T v : z) total += std::exp(v - mx);
  const T log_total = std::log(total) + mx;
  std::vector<T> probs(n);
  for (std::size_t i = 0; i < n; ++i) probs[i] = std::exp(z[i] - log_total);
  const T loss = log_total - z[target];
  return make_result<T>(Shape{}, std::vector<T>{loss}, {&logits},
                        [target, probs = std::move(probs)](NodeT<T>& self) {
                          if (T* g = input_grad(self, 0)) {
                            for (std::size_t i = 0; i < probs.size(); ++i)
                              g[i] += self.grad[0] * (probs[i] - (i == target ? T(1) : T(0)));
                          }
                        });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T total = T(0);
  for (T v : x.data()) total += v;
  return make_result<T>(Shape{}, std::vector<T>{total}, {&x}, [](NodeT<T>& self) {
    if (T* g = input_grad(self, 0)) {
      const std::size_t n = self.inputs[0]->value.size();
      for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[0];
    }
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  if (x.numel() == 0) throw DimensionError("mean: empty tensor");
  return scale(sum(x), T(1) / static_cast<T>(x.numel()));
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double p, Rng& rng) {
  if (p <= 0.0) return x;
  if (p >= 1.0) throw ConfigError("dropout: rate must be below 1");
  const T keep_scale = T(1.0 / (1.0 - p));
  std::vector<T> keep(x.numel());
  for (auto& k : keep) k = uniform01(rng) >= p ? keep_scale : T(0);
  return mul(x, Tensor<T>::from(x.shape(), std::move(keep)));
}

#define TRAJNAV_INSTANTIATE_OPS(T)                                                        \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                          \
  template Tensor<T> transpose(const Tensor<T>&);                                         \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> scale(const Tensor<T>&, T);                                          \
  template Tensor<T> add_bias(const Tensor<T>&, const Tensor<T>&);                        \
  template Tensor<T> gelu(const Tensor<T>&);                                              \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T); \
  template Tensor<T> softmax(const Tensor<T>&, int);                                      \
  template Tensor<T> masked_softmax(const Tensor<T>&, std::span<const std::uint8_t>);     \
  template Tensor<T> concat_rows(std::span<const Tensor<T>>);                             \
  template Tensor<T> concat_cols(std::span<const Tensor<T>>);                             \
  template Tensor<T> slice_rows(const Tensor<T>&, std::size_t, std::size_t);              \
  template Tensor<T> slice_cols(const Tensor<T>&, std::size_t, std::size_t);              \
  template Tensor<T> gather_rows(const Tensor<T>&, std::span<const std::int64_t>);        \
  template Tensor<T> cross_entropy(const Tensor<T>&, std::size_t);                        \
  template Tensor<T> sum(const Tensor<T>&);                                               \
  template Tensor<T> mean(const Tensor<T>&);                                              \
  template Tensor<T> dropout(const Tensor<T>&, double, Rng&);

TRAJNAV_INSTANTIATE_OPS(float)
TRAJNAV_INSTANTIATE_OPS(double)

#undef TRAJNAV_INSTANTIATE_OPS

}  // namespace trajnav::nn
