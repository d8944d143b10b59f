#pragma once

#include <cstdint>
#include <string>

#include "trajnav/model/encoders.hpp"
#include "trajnav/model/matching.hpp"

namespace trajnav::model {

struct ModelConfig {
  std::size_t dim = 64;
  std::size_t heads = 4;
  std::size_t ffn_mult = 4;
  double dropout = 0.0;
  std::size_t text_layers = 2;
  std::size_t edge_layers = 2;
  std::size_t match_layers = 4;
  std::size_t compare_layers = 1;
  std::size_t mlm_layers = 2;
  std::size_t vocab_size = 40;
  std::size_t raw_dim = 64;
  CompareMode compare = CompareMode::Compare;

  LayerConfig layer() const { return {dim, heads, ffn_mult, dropout}; }
};

template <typename T>
class NavigationModel {
 public:
  NavigationModel(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }

  const TextEncoder<T>& text() const { return text_; }
  const EdgeFeatureEncoder<T>& edges() const { return edges_; }
  const PathMatcher<T>& matcher() const { return matcher_; }
  const CandidateScorer<T>& scorer() const { return scorer_; }
  const MaskedLanguageHead<T>& mlm() const { return mlm_; }

  // Parameters used while navigating (text, edge, matcher, scorer).
  ParameterList<T> navigation_parameters() const;
  // Parameters used by masked-token pretraining (text, edge, mlm head).
  ParameterList<T> pretraining_parameters() const;
  // Everything, for checkpoints.
  ParameterList<T> parameters() const;

 private:
  ModelConfig cfg_;
  TextEncoder<T> text_;
  EdgeFeatureEncoder<T> edges_;
  PathMatcher<T> matcher_;
  CandidateScorer<T> scorer_;
  MaskedLanguageHead<T> mlm_;
};

}  // namespace trajnav::model
