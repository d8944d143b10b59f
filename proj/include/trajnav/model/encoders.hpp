#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trajnav/env/environment.hpp"
#include "trajnav/env/language.hpp"
#include "trajnav/nn/layers.hpp"

namespace trajnav::model {

using nn::AttentionMask;
using nn::LayerConfig;
using nn::ParameterList;
using nn::Tensor;

// Rows [sin phi, cos phi, sin theta, cos theta], one per angle pair.
template <typename T>
Tensor<T> orientation_rows(std::span<const double> phi, std::span<const double> theta);

// x^a = [sin phi, cos phi, sin theta, cos theta] W^a.
template <typename T>
class OrientationEncoder {
 public:
  OrientationEncoder() = default;
  OrientationEncoder(std::size_t dim, Rng& rng);

  Tensor<T> forward(std::span<const double> phi, std::span<const double> theta) const;
  void collect(ParameterList<T>& out, const std::string& prefix) const;

 private:
  nn::Linear<T> proj_;
};

// Each view's raw feature concatenated with its orientation, projected by W^p.
template <typename T>
class PanoramaEncoder {
 public:
  PanoramaEncoder() = default;
  PanoramaEncoder(std::size_t raw_dim, std::size_t dim, Rng& rng);

  // features: [K, raw_dim].
  Tensor<T> forward(const Tensor<T>& features, std::span<const double> phi,
                    std::span<const double> theta) const;
  void collect(ParameterList<T>& out, const std::string& prefix) const;
  std::size_t raw_dim() const { return raw_dim_; }

 private:
  nn::Linear<T> proj_;
  std::size_t raw_dim_ = 0;
};

// Orientation queries (one per neighbour) attend to each other and to the
// panorama tokens through a small decoder; one edge feature per query.
template <typename T>
class EdgeFeatureEncoder {
 public:
  EdgeFeatureEncoder() = default;
  EdgeFeatureEncoder(const LayerConfig& cfg, std::size_t raw_dim, std::size_t depth, Rng& rng);

  Tensor<T> extract(std::span<const double> query_phi, std::span<const double> query_theta,
                    const Tensor<T>& view_features, std::span<const double> view_phi,
                    std::span<const double> view_theta) const;
  // Edge features for every neighbour listed in the observation, in order.
  Tensor<T> extract(const env::Observation& obs) const;

  void collect(ParameterList<T>& out, const std::string& prefix) const;
  std::size_t raw_dim() const { return pano_.raw_dim(); }

 private:
  OrientationEncoder<T> orient_;
  PanoramaEncoder<T> pano_;
  nn::TransformerDecoder<T> decoder_;
};

template <typename T>
Tensor<T> view_feature_tensor(const env::Observation& obs);

// Token embedding * sqrt(d) + sinusoidal positions, then an encoder whose
// attention ignores PAD keys.
template <typename T>
class TextEncoder {
 public:
  TextEncoder() = default;
  TextEncoder(const LayerConfig& cfg, std::size_t vocab_size, std::size_t depth, Rng& rng);

  Tensor<T> forward(std::span<const env::TokenId> tokens) const;
  // Per-token flag: 1 for real tokens, 0 for PAD.
  static std::vector<std::uint8_t> key_flags(std::span<const env::TokenId> tokens);

  void collect(ParameterList<T>& out, const std::string& prefix) const;
  std::size_t vocab_size() const { return embedding_.rows(); }
  const Tensor<T>& embedding() const { return embedding_; }

 private:
  Tensor<T> embedding_;
  nn::TransformerEncoder<T> encoder_;
  std::size_t dim_ = 0;
};

// Encoded text queries cross-attend the path's edge features (with
// positions); a vocabulary projection follows.
template <typename T>
class MaskedLanguageHead {
 public:
  MaskedLanguageHead() = default;
  MaskedLanguageHead(const LayerConfig& cfg, std::size_t vocab_size, std::size_t depth, Rng& rng);

  // text: [L, d], path_edges: [l, d] -> logits [L, V].
  Tensor<T> forward(const Tensor<T>& text, const Tensor<T>& path_edges,
                    std::span<const std::uint8_t> text_ok = {}) const;
  void collect(ParameterList<T>& out, const std::string& prefix) const;

 private:
  nn::TransformerDecoder<T> decoder_;
  nn::Linear<T> out_;
  std::size_t dim_ = 0;
};

struct MaskedTokens {
  std::vector<env::TokenId> tokens;
  std::vector<std::size_t> positions;
  std::vector<env::TokenId> targets;
};

inline constexpr double kMaskRate = 0.15;

// Replaces ceil(rate * #real tokens) distinct non-PAD positions with MASK.
MaskedTokens mask_tokens(std::span<const env::TokenId> tokens, Rng& rng, double rate = kMaskRate);

// Mean cross entropy over the masked positions; zero when there are none.
template <typename T>
Tensor<T> masked_token_loss(const Tensor<T>& logits, const MaskedTokens& masked);

}  // namespace trajnav::model
