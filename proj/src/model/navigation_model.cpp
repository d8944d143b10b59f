#include "trajnav/model/navigation_model.hpp"

#include "trajnav/core/error.hpp"

namespace trajnav::model {

namespace {

Rng part_rng(std::uint64_t seed, std::string_view part) { return Rng(derive_seed(seed, fnv1a(part))); }

}  // namespace

template <typename T>
NavigationModel<T>::NavigationModel(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg.dim == 0 || cfg.heads == 0 || cfg.dim % cfg.heads != 0) {
    throw ConfigError("model: dim " + std::to_string(cfg.dim) + " must be a positive multiple of heads " +
                      std::to_string(cfg.heads));
  }
  if (cfg.dim % 2 != 0) throw ConfigError("model: dim must be even for sinusoidal positions");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) throw ConfigError("model: dropout must lie in [0, 1)");
  const auto layer = cfg.layer();
  // Each part draws from its own stream so changing one depth leaves the
  // others' initial weights untouched.
  auto r_text = part_rng(seed, "text");
  auto r_edge = part_rng(seed, "edge");
  auto r_match = part_rng(seed, "match");
  auto r_score = part_rng(seed, "score");
  auto r_mlm = part_rng(seed, "mlm");
  text_ = TextEncoder<T>(layer, cfg.vocab_size, cfg.text_layers, r_text);
  edges_ = EdgeFeatureEncoder<T>(layer, cfg.raw_dim, cfg.edge_layers, r_edge);
  matcher_ = PathMatcher<T>(layer, cfg.match_layers, r_match);
  scorer_ = CandidateScorer<T>(layer, cfg.compare_layers, cfg.compare, r_score);
  mlm_ = MaskedLanguageHead<T>(layer, cfg.vocab_size, cfg.mlm_layers, r_mlm);
}

template <typename T>
ParameterList<T> NavigationModel<T>::navigation_parameters() const {
  ParameterList<T> out;
  text_.collect(out, "text");
  edges_.collect(out, "edge");
  matcher_.collect(out, "match");
  scorer_.collect(out, "score");
  return out;
}

template <typename T>
ParameterList<T> NavigationModel<T>::pretraining_parameters() const {
  ParameterList<T> out;
  text_.collect(out, "text");
  edges_.collect(out, "edge");
  mlm_.collect(out, "mlm");
  return out;
}

template <typename T>
ParameterList<T> NavigationModel<T>::parameters() const {
  auto out = navigation_parameters();
  mlm_.collect(out, "mlm");
  return out;
}

template class NavigationModel<float>;
template class NavigationModel<double>;

}  // namespace trajnav::model
