#include "trajnav/nn/layers.hpp"

#include <cmath>

#include "trajnav/nn/ops.hpp"

namespace trajnav::nn {

namespace {
thread_local Rng* dropout_rng = nullptr;

template <typename T>
Tensor<T> maybe_dropout(const Tensor<T>& x, double p) {
  if (p <= 0.0 || dropout_rng == nullptr) return x;
  return dropout(x, p, *dropout_rng);
}
}  // namespace

DropoutScope::DropoutScope(Rng& rng) : previous_(dropout_rng) { dropout_rng = &rng; }
DropoutScope::~DropoutScope() { dropout_rng = previous_; }
Rng* DropoutScope::active() noexcept { return dropout_rng; }

template <typename T>
Tensor<T> init_weight(Shape shape, Rng& rng, double std) {
  std::vector<T> values(numel_of(shape));
  for (auto& v : values) v = static_cast<T>(truncated_normal(rng, std));
  return Tensor<T>::from(std::move(shape), std::move(values), true);
}

template <typename T>
Tensor<T> sinusoidal_positions(std::size_t count, std::size_t dim, std::size_t first) {
  if (dim % 2 != 0) {
    throw ConfigError("sinusoidal_positions: feature size must be even, got " +
                      std::to_string(dim));
  }
  std::vector<T> table(count * dim);
  for (std::size_t r = 0; r < count; ++r) {
    const double pos = static_cast<double>(first + r);
    for (std::size_t i = 0; i < dim / 2; ++i) {
      const double freq = std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(dim));
      table[r * dim + 2 * i] = static_cast<T>(std::sin(pos * freq));
      table[r * dim + 2 * i + 1] = static_cast<T>(std::cos(pos * freq));
    }
  }
  return Tensor<T>::from({count, dim}, std::move(table));
}

template <typename T>
Linear<T>::Linear(std::size_t in, std::size_t out, Rng& rng, bool bias)
    : weight_(init_weight<T>({in, out}, rng)) {
  if (bias) bias_ = Tensor<T>::zeros({out}, true);
}

template <typename T>
Tensor<T> Linear<T>::forward(const Tensor<T>& x) const {
  auto y = matmul(x, weight_);
  return bias_.defined() ? add_bias(y, bias_) : y;
}

template <typename T>
void Linear<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  out.push_back({prefix + ".weight", weight_});
  if (bias_.defined()) out.push_back({prefix + ".bias", bias_});
}

template <typename T>
LayerNorm<T>::LayerNorm(std::size_t dim)
    : gamma_(Tensor<T>::full({dim}, T(1), true)), beta_(Tensor<T>::zeros({dim}, true)) {}

template <typename T>
Tensor<T> LayerNorm<T>::forward(const Tensor<T>& x) const {
  return layer_norm(x, gamma_, beta_);
}

template <typename T>
void LayerNorm<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  out.push_back({prefix + ".gamma", gamma_});
  out.push_back({prefix + ".beta", beta_});
}

template <typename T>
FeedForward<T>::FeedForward(const LayerConfig& cfg, Rng& rng)
    : up_(cfg.dim, cfg.dim * cfg.ffn_mult, rng),
      down_(cfg.dim * cfg.ffn_mult, cfg.dim, rng),
      dropout_(cfg.dropout) {}

template <typename T>
Tensor<T> FeedForward<T>::forward(const Tensor<T>& x) const {
  return down_.forward(maybe_dropout(gelu(up_.forward(x)), dropout_));
}

template <typename T>
void FeedForward<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  up_.collect(out, prefix + ".up");
  down_.collect(out, prefix + ".down");
}

template <typename T>
MultiHeadAttention<T>::MultiHeadAttention(const LayerConfig& cfg, Rng& rng)
    : q_(cfg.dim, cfg.dim, rng),
      k_(cfg.dim, cfg.dim, rng),
      v_(cfg.dim, cfg.dim, rng),
      o_(cfg.dim, cfg.dim, rng),
      heads_(cfg.heads) {
  if (cfg.heads == 0 || cfg.dim % cfg.heads != 0) {
    throw ConfigError("attention: hidden size " + std::to_string(cfg.dim) +
                      " is not divisible by " + std::to_string(cfg.heads) + " heads");
  }
}

template <typename T>
KeyValue<T> MultiHeadAttention<T>::project(const Tensor<T>& source) const {
  return {k_.forward(source), v_.forward(source)};
}

template <typename T>
Tensor<T> MultiHeadAttention<T>::attend(const Tensor<T>& q, const KeyValue<T>& kv,
                                        const AttentionMask& mask) const {
  return o_.forward(attention(q, kv.keys, kv.values, mask, heads_));
}

template <typename T>
void MultiHeadAttention<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  q_.collect(out, prefix + ".q");
  k_.collect(out, prefix + ".k");
  v_.collect(out, prefix + ".v");
  o_.collect(out, prefix + ".o");
}

template <typename T>
EncoderLayer<T>::EncoderLayer(const LayerConfig& cfg, Rng& rng)
    : norm1_(cfg.dim), norm2_(cfg.dim), self_(cfg, rng), ffn_(cfg, rng), dropout_(cfg.dropout) {}

template <typename T>
Tensor<T> EncoderLayer<T>::forward(const Tensor<T>& x, const AttentionMask& mask) const {
  auto h = norm1_.forward(x);
  auto a = self_.attend(self_.project_query(h), self_.project(h), mask);
  auto y = add(x, maybe_dropout(a, dropout_));
  return add(y, maybe_dropout(ffn_.forward(norm2_.forward(y)), dropout_));
}

template <typename T>
void EncoderLayer<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  norm1_.collect(out, prefix + ".norm1");
  self_.collect(out, prefix + ".self_attn");
  norm2_.collect(out, prefix + ".norm2");
  ffn_.collect(out, prefix + ".ffn");
}

template <typename T>
DecoderLayer<T>::DecoderLayer(const LayerConfig& cfg, Rng& rng)
    : norm1_(cfg.dim),
      norm2_(cfg.dim),
      norm3_(cfg.dim),
      self_(cfg, rng),
      cross_(cfg, rng),
      ffn_(cfg, rng),
      dropout_(cfg.dropout) {}

template <typename T>
Tensor<T> DecoderLayer<T>::forward(const Tensor<T>& x, const KeyValue<T>& prefix,
                                   const AttentionMask& self_mask, const KeyValue<T>& memory,
                                   const AttentionMask& memory_mask, KeyValue<T>* produced) const {
  auto h = norm1_.forward(x);
  KeyValue<T> fresh = self_.project(h);
  KeyValue<T> keys = fresh;
  if (prefix.size() > 0) {
    const Tensor<T> ks[] = {prefix.keys, fresh.keys};
    const Tensor<T> vs[] = {prefix.values, fresh.values};
    keys = {concat_rows<T>(ks), concat_rows<T>(vs)};
  }
  auto y = add(x, maybe_dropout(self_.attend(self_.project_query(h), keys, self_mask), dropout_));
  auto c = cross_.attend(cross_.project_query(norm2_.forward(y)), memory, memory_mask);
  y = add(y, maybe_dropout(c, dropout_));
  y = add(y, maybe_dropout(ffn_.forward(norm3_.forward(y)), dropout_));
  if (produced) *produced = std::move(fresh);
  return y;
}

template <typename T>
void DecoderLayer<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  norm1_.collect(out, prefix + ".norm1");
  self_.collect(out, prefix + ".self_attn");
  norm2_.collect(out, prefix + ".norm2");
  cross_.collect(out, prefix + ".cross_attn");
  norm3_.collect(out, prefix + ".norm3");
  ffn_.collect(out, prefix + ".ffn");
}

template <typename T>
TransformerEncoder<T>::TransformerEncoder(const LayerConfig& cfg, std::size_t depth, Rng& rng,
                                          bool final_norm)
    : final_(cfg.dim), has_final_(final_norm) {
  layers_.reserve(depth);
  for (std::size_t i = 0; i < depth; ++i) layers_.emplace_back(cfg, rng);
}

template <typename T>
Tensor<T> TransformerEncoder<T>::forward(const Tensor<T>& x, const AttentionMask& mask) const {
  Tensor<T> y = x;
  for (const auto& layer : layers_) y = layer.forward(y, mask);
  return has_final_ ? final_.forward(y) : y;
}

template <typename T>
void TransformerEncoder<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  for (std::size_t i = 0; i < layers_.size(); ++i)
    layers_[i].collect(out, prefix + ".layer" + std::to_string(i));
  if (has_final_) final_.collect(out, prefix + ".final_norm");
}

template <typename T>
TransformerDecoder<T>::TransformerDecoder(const LayerConfig& cfg, std::size_t depth, Rng& rng)
    : final_(cfg.dim) {
  layers_.reserve(depth);
  for (std::size_t i = 0; i < depth; ++i) layers_.emplace_back(cfg, rng);
}

template <typename T>
DecoderMemory<T> TransformerDecoder<T>::prepare_memory(const Tensor<T>& memory,
                                                       std::vector<std::uint8_t> key_ok) const {
  if (!key_ok.empty() && key_ok.size() != memory.rows()) {
    throw DimensionError("decoder memory: " + std::to_string(key_ok.size()) +
                         " key flags for " + std::to_string(memory.rows()) + " rows");
  }
  DecoderMemory<T> out;
  out.length = memory.rows();
  out.key_ok = std::move(key_ok);
  out.layers.reserve(layers_.size());
  for (const auto& layer : layers_) out.layers.push_back(layer.project_memory(memory));
  return out;
}

template <typename T>
Tensor<T> TransformerDecoder<T>::forward(const Tensor<T>& x, const AttentionMask& self_mask,
                                         const DecoderMemory<T>& memory, DecoderCache<T>* cache,
                                         bool commit) const {
  if (memory.layers.size() != layers_.size()) {
    throw CacheError("decoder: memory prepared for " + std::to_string(memory.layers.size()) +
                     " layers, decoder has " + std::to_string(layers_.size()));
  }
  const std::size_t past = cache ? cache->length : 0;
  if (cache && cache->length > 0 && cache->layers.size() != layers_.size()) {
    throw CacheError("decoder: cache holds " + std::to_string(cache->layers.size()) +
                     " layers, decoder has " + std::to_string(layers_.size()));
  }
  if (self_mask.rows() != x.rows() || self_mask.cols() != past + x.rows()) {
    throw CacheError("decoder: self mask " + std::to_string(self_mask.rows()) + "x" +
                     std::to_string(self_mask.cols()) + " does not cover " +
                     std::to_string(past) + " cached + " + std::to_string(x.rows()) + " new tokens");
  }
  const AttentionMask memory_mask =
      memory.key_ok.empty() ? AttentionMask::full(x.rows(), memory.length)
                            : AttentionMask::from_key_flags(x.rows(), memory.key_ok);

  std::vector<KeyValue<T>> produced(layers_.size());
  const KeyValue<T> empty;
  Tensor<T> y = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const KeyValue<T>& prefix = past > 0 ? cache->layers[i] : empty;
    if (prefix.size() != past) {
      throw CacheError("decoder: layer " + std::to_string(i) + " caches " +
                       std::to_string(prefix.size()) + " tokens, expected " +
                       std::to_string(past));
    }
    y = layers_[i].forward(y, prefix, self_mask, memory.layers[i], memory_mask, &produced[i]);
  }

  if (cache && commit) {
    if (cache->layers.size() != layers_.size()) cache->layers.assign(layers_.size(), {});
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      auto& slot = cache->layers[i];
      if (slot.size() == 0) {
        slot = produced[i];
      } else {
        const Tensor<T> ks[] = {slot.keys, produced[i].keys};
        const Tensor<T> vs[] = {slot.values, produced[i].values};
        slot = {concat_rows<T>(ks), concat_rows<T>(vs)};
      }
    }
    cache->length += x.rows();
  }
  return final_.forward(y);
}

template <typename T>
void TransformerDecoder<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  for (std::size_t i = 0; i < layers_.size(); ++i)
    layers_[i].collect(out, prefix + ".layer" + std::to_string(i));
  final_.collect(out, prefix + ".final_norm");
}

#define TRAJNAV_INSTANTIATE_LAYERS(T)                                                \
  template Tensor<T> init_weight<T>(Shape, Rng&, double);                            \
  template Tensor<T> sinusoidal_positions<T>(std::size_t, std::size_t, std::size_t); \
  template class Linear<T>;                                                          \
  template class LayerNorm<T>;                                                       \
  template class FeedForward<T>;                                                     \
  template class MultiHeadAttention<T>;                                              \
  template class EncoderLayer<T>;                                                    \
  template class DecoderLayer<T>;                                                    \
  template class TransformerEncoder<T>;                                              \
  template class TransformerDecoder<T>;

TRAJNAV_INSTANTIATE_LAYERS(float)
TRAJNAV_INSTANTIATE_LAYERS(double)

#undef TRAJNAV_INSTANTIATE_LAYERS

}  // namespace trajnav::nn
