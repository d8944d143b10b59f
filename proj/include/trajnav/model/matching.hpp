#pragma once

#include <string>
#include <vector>

#include "trajnav/nn/layers.hpp"

namespace trajnav::model {

using nn::AttentionMask;
using nn::LayerConfig;
using nn::ParameterList;
using nn::Tensor;

// Mask over prefix_len + sum(suffix_lens) tokens: causal inside the prefix,
// every suffix token sees the whole prefix and the earlier tokens of its own
// suffix only.
AttentionMask build_merged_mask(std::size_t prefix_len, const std::vector<std::size_t>& suffix_lens);

// Self-attention state for the committed path prefix [START, e_1, ..., e_k]
// plus the instruction's cross-attention keys/values.
template <typename T>
struct PathCache {
  nn::DecoderCache<T> self;
  nn::DecoderMemory<T> text;
  std::size_t text_tokens = 0;

  std::size_t committed() const { return self.length; }
};

// Scores how well a path (as edge-feature tokens) matches the instruction.
// The path embedding is the decoder output at the path's last token.
template <typename T>
class PathMatcher {
 public:
  PathMatcher() = default;
  PathMatcher(const LayerConfig& cfg, std::size_t depth, Rng& rng);

  // Prepares the instruction memory and commits START at position 0.
  PathCache<T> begin(const Tensor<T>& text, std::vector<std::uint8_t> text_ok = {}) const;
  // The two halves of begin(): instruction keys/values only, then START.
  PathCache<T> prepare_text(const Tensor<T>& text, std::vector<std::uint8_t> text_ok = {}) const;
  void commit_start(PathCache<T>& cache) const;

  // Appends edge tokens (rows of `edges`) to the committed prefix.
  void commit(PathCache<T>& cache, const Tensor<T>& edges) const;
  void truncate(PathCache<T>& cache, std::size_t new_len) const;

  // One pass over all suffixes against the cached prefix; suffix i's tokens
  // take positions committed + 0, 1, ... Returns the terminal outputs,
  // [suffixes.size(), d]. The cache is left unchanged.
  Tensor<T> embed_batch(const PathCache<T>& cache, const std::vector<Tensor<T>>& suffixes) const;

  // Reference path: [START ++ edges (++ STOP)] from scratch, no cache.
  Tensor<T> embed_uncached(const PathCache<T>& cache, const Tensor<T>& edges, bool with_stop) const;

  const Tensor<T>& start_token() const { return start_; }
  const Tensor<T>& stop_token() const { return stop_; }
  std::size_t dim() const { return dim_; }

  void collect(ParameterList<T>& out, const std::string& prefix) const;

 private:
  Tensor<T> with_positions(const Tensor<T>& tokens, std::size_t first) const;

  Tensor<T> start_;
  Tensor<T> stop_;
  nn::TransformerDecoder<T> decoder_;
  std::size_t dim_ = 0;
};

enum class CompareMode { Compare, Independent };

CompareMode parse_compare_mode(const std::string& name);
std::string compare_mode_name(CompareMode mode);

// Candidate set -> one score per candidate. In Compare mode the candidates
// first exchange information through an unpositioned encoder.
template <typename T>
class CandidateScorer {
 public:
  CandidateScorer() = default;
  CandidateScorer(const LayerConfig& cfg, std::size_t depth, CompareMode mode, Rng& rng);

  // embeddings: [C, d] -> scores [1, C].
  Tensor<T> scores(const Tensor<T>& embeddings) const;
  CompareMode mode() const { return mode_; }

  void collect(ParameterList<T>& out, const std::string& prefix) const;

 private:
  nn::TransformerEncoder<T> encoder_;
  nn::Linear<T> hidden_;
  nn::Linear<T> out_;
  CompareMode mode_ = CompareMode::Compare;
};

// Index of the largest value; the lowest index wins ties.
template <typename T>
std::size_t argmax(std::span<const T> values);

}  // namespace trajnav::model
