#include "trajnav/model/encoders.hpp"

#include <algorithm>
#include <cmath>

#include "trajnav/core/error.hpp"
#include "trajnav/nn/ops.hpp"

namespace trajnav::model {

using namespace trajnav::nn;

template <typename T>
Tensor<T> orientation_rows(std::span<const double> phi, std::span<const double> theta) {
  if (phi.size() != theta.size()) {
    throw DimensionError("orientation: " + std::to_string(phi.size()) + " headings vs " +
                         std::to_string(theta.size()) + " elevations");
  }
  std::vector<T> v;
  v.reserve(phi.size() * 4);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    v.push_back(static_cast<T>(std::sin(phi[i])));
    v.push_back(static_cast<T>(std::cos(phi[i])));
    v.push_back(static_cast<T>(std::sin(theta[i])));
    v.push_back(static_cast<T>(std::cos(theta[i])));
  }
  return Tensor<T>::from({phi.size(), 4}, std::move(v));
}

template <typename T>
OrientationEncoder<T>::OrientationEncoder(std::size_t dim, Rng& rng) : proj_(4, dim, rng, false) {}

template <typename T>
Tensor<T> OrientationEncoder<T>::forward(std::span<const double> phi, std::span<const double> theta) const {
  return proj_.forward(orientation_rows<T>(phi, theta));
}

template <typename T>
void OrientationEncoder<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  proj_.collect(out, prefix);
}

template <typename T>
PanoramaEncoder<T>::PanoramaEncoder(std::size_t raw_dim, std::size_t dim, Rng& rng)
    : proj_(raw_dim + 4, dim, rng, false), raw_dim_(raw_dim) {}

template <typename T>
Tensor<T> PanoramaEncoder<T>::forward(const Tensor<T>& features, std::span<const double> phi,
                                      std::span<const double> theta) const {
  if (features.rank() != 2 || features.cols() != raw_dim_ || features.rows() != phi.size()) {
    throw DimensionError("panorama: features " + to_string(features.shape()) + " do not match " +
                         std::to_string(phi.size()) + " views of raw size " + std::to_string(raw_dim_));
  }
  const Tensor<T> parts[] = {features, orientation_rows<T>(phi, theta)};
  return proj_.forward(concat_cols<T>(parts));
}

template <typename T>
void PanoramaEncoder<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  proj_.collect(out, prefix);
}

template <typename T>
EdgeFeatureEncoder<T>::EdgeFeatureEncoder(const LayerConfig& cfg, std::size_t raw_dim, std::size_t depth,
                                          Rng& rng)
    : orient_(cfg.dim, rng), pano_(raw_dim, cfg.dim, rng), decoder_(cfg, depth, rng) {}

template <typename T>
Tensor<T> EdgeFeatureEncoder<T>::extract(std::span<const double> query_phi, std::span<const double> query_theta,
                                         const Tensor<T>& view_features, std::span<const double> view_phi,
                                         std::span<const double> view_theta) const {
  if (query_phi.empty()) throw ContractError("edge features: at least one orientation query is required");
  auto queries = orient_.forward(query_phi, query_theta);
  auto memory = decoder_.prepare_memory(pano_.forward(view_features, view_phi, view_theta));
  return decoder_.forward(queries, AttentionMask::full(queries.rows(), queries.rows()), memory);
}

template <typename T>
Tensor<T> view_feature_tensor(const env::Observation& obs) {
  std::vector<T> v(obs.view_features.begin(), obs.view_features.end());
  return Tensor<T>::from({obs.view_count(), obs.feature_dim}, std::move(v));
}

template <typename T>
Tensor<T> EdgeFeatureEncoder<T>::extract(const env::Observation& obs) const {
  std::vector<double> phi, theta;
  for (const auto& nb : obs.neighbors) {
    phi.push_back(nb.heading);
    theta.push_back(nb.elevation);
  }
  return extract(phi, theta, view_feature_tensor<T>(obs), obs.view_heading, obs.view_elevation);
}

template <typename T>
void EdgeFeatureEncoder<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  orient_.collect(out, prefix + ".orientation");
  pano_.collect(out, prefix + ".panorama");
  decoder_.collect(out, prefix + ".decoder");
}

template <typename T>
TextEncoder<T>::TextEncoder(const LayerConfig& cfg, std::size_t vocab_size, std::size_t depth, Rng& rng)
    : embedding_(init_weight<T>({vocab_size, cfg.dim}, rng)), encoder_(cfg, depth, rng, true), dim_(cfg.dim) {}

template <typename T>
std::vector<std::uint8_t> TextEncoder<T>::key_flags(std::span<const env::TokenId> tokens) {
  std::vector<std::uint8_t> ok(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) ok[i] = tokens[i] != env::Vocab::kPad;
  return ok;
}

template <typename T>
Tensor<T> TextEncoder<T>::forward(std::span<const env::TokenId> tokens) const {
  if (tokens.empty()) throw ContractError("text encoder: empty token sequence");
  std::vector<std::int64_t> ids(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] < 0 || static_cast<std::size_t>(tokens[i]) >= vocab_size()) {
      throw VocabError("text encoder: token id " + std::to_string(tokens[i]) + " outside vocabulary of " +
                       std::to_string(vocab_size()));
    }
    ids[i] = tokens[i];
  }
  const auto ok = key_flags(tokens);
  if (std::none_of(ok.begin(), ok.end(), [](std::uint8_t f) { return f != 0; })) {
    throw ContractError("text encoder: instruction consists only of padding");
  }
  auto x = scale(gather_rows<T>(embedding_, ids), static_cast<T>(std::sqrt(static_cast<double>(dim_))));
  x = add(x, sinusoidal_positions<T>(tokens.size(), dim_));
  return encoder_.forward(x, AttentionMask::from_key_flags(tokens.size(), ok));
}

template <typename T>
void TextEncoder<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  out.push_back({prefix + ".embedding", embedding_});
  encoder_.collect(out, prefix + ".encoder");
}

template <typename T>
MaskedLanguageHead<T>::MaskedLanguageHead(const LayerConfig& cfg, std::size_t vocab_size, std::size_t depth,
                                          Rng& rng)
    : decoder_(cfg, depth, rng), out_(cfg.dim, vocab_size, rng, true), dim_(cfg.dim) {}

template <typename T>
Tensor<T> MaskedLanguageHead<T>::forward(const Tensor<T>& text, const Tensor<T>& path_edges,
                                         std::span<const std::uint8_t> text_ok) const {
  if (!path_edges.defined() || path_edges.rows() == 0) throw ContractError("masked language head: empty path");
  auto path = add(path_edges, sinusoidal_positions<T>(path_edges.rows(), dim_));
  auto memory = decoder_.prepare_memory(path);
  const AttentionMask self = text_ok.empty() ? AttentionMask::full(text.rows(), text.rows())
                                             : AttentionMask::from_key_flags(text.rows(), text_ok);
  return out_.forward(decoder_.forward(text, self, memory));
}

template <typename T>
void MaskedLanguageHead<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  decoder_.collect(out, prefix + ".decoder");
  out_.collect(out, prefix + ".vocab");
}

MaskedTokens mask_tokens(std::span<const env::TokenId> tokens, Rng& rng, double rate) {
  MaskedTokens out;
  out.tokens.assign(tokens.begin(), tokens.end());
  std::vector<std::size_t> real;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (tokens[i] != env::Vocab::kPad) real.push_back(i);
  const std::size_t count = std::min(real.size(), static_cast<std::size_t>(std::ceil(rate * real.size() - 1e-9)));
  // Partial Fisher-Yates over the real positions.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + uniform_index(rng, real.size() - i);
    std::swap(real[i], real[j]);
  }
  std::vector<std::size_t> chosen(real.begin(), real.begin() + count);
  std::sort(chosen.begin(), chosen.end());
  for (std::size_t p : chosen) {
    out.positions.push_back(p);
    out.targets.push_back(out.tokens[p]);
    out.tokens[p] = env::Vocab::kMask;
  }
  return out;
}

template <typename T>
Tensor<T> masked_token_loss(const Tensor<T>& logits, const MaskedTokens& masked) {
  if (masked.positions.empty()) return Tensor<T>::zeros({1});
  Tensor<T> total;
  for (std::size_t i = 0; i < masked.positions.size(); ++i) {
    auto ce = cross_entropy(slice_rows(logits, masked.positions[i], masked.positions[i] + 1),
                            static_cast<std::size_t>(masked.targets[i]));
    total = total.defined() ? add(total, ce) : ce;
  }
  return scale(total, static_cast<T>(1.0 / masked.positions.size()));
}

#define TRAJNAV_INSTANTIATE_ENCODERS(T)                                                          \
  template Tensor<T> orientation_rows<T>(std::span<const double>, std::span<const double>);       \
  template Tensor<T> view_feature_tensor<T>(const env::Observation&);                             \
  template Tensor<T> masked_token_loss<T>(const Tensor<T>&, const MaskedTokens&);                 \
  template class OrientationEncoder<T>;                                                           \
  template class PanoramaEncoder<T>;                                                              \
  template class EdgeFeatureEncoder<T>;                                                           \
  template class TextEncoder<T>;                                                                  \
  template class MaskedLanguageHead<T>;

TRAJNAV_INSTANTIATE_ENCODERS(float)
TRAJNAV_INSTANTIATE_ENCODERS(double)

#undef TRAJNAV_INSTANTIATE_ENCODERS

}  // namespace trajnav::model
