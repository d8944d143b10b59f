#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trajnav/core/random.hpp"
#include "trajnav/nn/attention.hpp"
#include "trajnav/nn/tensor.hpp"

namespace trajnav::nn {

template <typename T>
struct NamedParameter {
  std::string name;
  Tensor<T> tensor;
};

template <typename T>
using ParameterList = std::vector<NamedParameter<T>>;

// Truncated normal (std 0.02, cut at two standard deviations), trainable.
template <typename T>
Tensor<T> init_weight(Shape shape, Rng& rng, double std = 0.02);

// Sine/cosine table rows [first, first + count) for feature size `dim`.
// Column 2i holds sin(p / 10000^(2i/dim)), column 2i+1 the matching cosine.
template <typename T>
Tensor<T> sinusoidal_positions(std::size_t count, std::size_t dim, std::size_t first = 0);

// Installs a dropout RNG for the current thread. Without an active scope
// every dropout site is the identity.
class DropoutScope {
 public:
  explicit DropoutScope(Rng& rng);
  ~DropoutScope();
  DropoutScope(const DropoutScope&) = delete;
  DropoutScope& operator=(const DropoutScope&) = delete;

  static Rng* active() noexcept;

 private:
  Rng* previous_;
};

struct LayerConfig {
  std::size_t dim = 64;
  std::size_t heads = 4;
  std::size_t ffn_mult = 4;
  double dropout = 0.0;
};

template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(std::size_t in, std::size_t out, Rng& rng, bool bias = true);

  Tensor<T> forward(const Tensor<T>& x) const;
  void collect(ParameterList<T>& out, const std::string& prefix) const;

  std::size_t in_features() const { return weight_.rows(); }
  std::size_t out_features() const { return weight_.cols(); }
  const Tensor<T>& weight() const { return weight_; }

 private:
  Tensor<T> weight_;
  Tensor<T> bias_;
};

template <typename T>
class LayerNorm {
 public:
  LayerNorm() = default;
  explicit LayerNorm(std::size_t dim);

  Tensor<T> forward(const Tensor<T>& x) const;
  void collect(ParameterList<T>& out, const std::string& prefix) const;

 private:
  Tensor<T> gamma_;
  Tensor<T> beta_;
};

template <typename T>
class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(const LayerConfig& cfg, Rng& rng);

  Tensor<T> forward(const Tensor<T>& x) const;
  void collect(ParameterList<T>& out, const std::string& prefix) const;

 private:
  Linear<T> up_;
  Linear<T> down_;
  double dropout_ = 0.0;
};

// Projected keys and values, [n, d] each.
template <typename T>
struct KeyValue {
  Tensor<T> keys;
  Tensor<T> values;

  std::size_t size() const { return keys.defined() ? keys.rows() : 0; }
};

template <typename T>
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(const LayerConfig& cfg, Rng& rng);

  KeyValue<T> project(const Tensor<T>& source) const;
  Tensor<T> project_query(const Tensor<T>& x) const { return q_.forward(x); }

  // Output projection of attention(q, kv.keys, kv.values).
  Tensor<T> attend(const Tensor<T>& q, const KeyValue<T>& kv, const AttentionMask& mask) const;

  void collect(ParameterList<T>& out, const std::string& prefix) const;

 private:
  Linear<T> q_, k_, v_, o_;
  std::size_t heads_ = 1;
};

// Pre-norm encoder block: x + SA(LN(x)), then x + FFN(LN(x)).
template <typename T>
class EncoderLayer {
 public:
  EncoderLayer() = default;
  EncoderLayer(const LayerConfig& cfg, Rng& rng);

  Tensor<T> forward(const Tensor<T>& x, const AttentionMask& mask) const;
  void collect(ParameterList<T>& out, const std::string& prefix) const;

 private:
  LayerNorm<T> norm1_, norm2_;
  MultiHeadAttention<T> self_;
  FeedForward<T> ffn_;
  double dropout_ = 0.0;
};

// Cross-attention source prepared once and reused by every decoder call.
template <typename T>
struct DecoderMemory {
  std::vector<KeyValue<T>> layers;
  std::vector<std::uint8_t> key_ok;  // empty: all keys valid
  std::size_t length = 0;
};

// Self-attention keys/values of already processed tokens, per layer.
template <typename T>
struct DecoderCache {
  std::vector<KeyValue<T>> layers;
  std::size_t length = 0;
};

// Pre-norm decoder block: masked self-attention over (cached prefix ++ x),
// cross-attention over the memory, then feed-forward.
template <typename T>
class DecoderLayer {
 public:
  DecoderLayer() = default;
  DecoderLayer(const LayerConfig& cfg, Rng& rng);

  KeyValue<T> project_memory(const Tensor<T>& memory) const { return cross_.project(memory); }

  // `prefix` may be empty. `self_mask` is [x.rows, prefix.size + x.rows].
  // When `produced` is given it receives this call's new keys/values.
  Tensor<T> forward(const Tensor<T>& x, const KeyValue<T>& prefix, const AttentionMask& self_mask,
                    const KeyValue<T>& memory, const AttentionMask& memory_mask,
                    KeyValue<T>* produced) const;

  void collect(ParameterList<T>& out, const std::string& prefix) const;

 private:
  LayerNorm<T> norm1_, norm2_, norm3_;
  MultiHeadAttention<T> self_, cross_;
  FeedForward<T> ffn_;
  double dropout_ = 0.0;
};

template <typename T>
class TransformerEncoder {
 public:
  TransformerEncoder() = default;
  TransformerEncoder(const LayerConfig& cfg, std::size_t depth, Rng& rng, bool final_norm = true);

  Tensor<T> forward(const Tensor<T>& x, const AttentionMask& mask) const;
  void collect(ParameterList<T>& out, const std::string& prefix) const;
  std::size_t depth() const { return layers_.size(); }

 private:
  std::vector<EncoderLayer<T>> layers_;
  LayerNorm<T> final_;
  bool has_final_ = true;
};

template <typename T>
class TransformerDecoder {
 public:
  TransformerDecoder() = default;
  TransformerDecoder(const LayerConfig& cfg, std::size_t depth, Rng& rng);

  DecoderMemory<T> prepare_memory(const Tensor<T>& memory,
                                  std::vector<std::uint8_t> key_ok = {}) const;

  // Runs x through every layer. With a cache, x continues the cached
  // sequence and `self_mask` spans [x.rows, cache->length + x.rows]; when
  // `commit` is set the new keys/values are appended to the cache.
  Tensor<T> forward(const Tensor<T>& x, const AttentionMask& self_mask,
                    const DecoderMemory<T>& memory, DecoderCache<T>* cache = nullptr,
                    bool commit = false) const;

  void collect(ParameterList<T>& out, const std::string& prefix) const;
  std::size_t depth() const { return layers_.size(); }

 private:
  std::vector<DecoderLayer<T>> layers_;
  LayerNorm<T> final_;
};

}  // namespace trajnav::nn
