#include "trajnav/model/matching.hpp"

#include <numeric>

#include "trajnav/core/error.hpp"
#include "trajnav/nn/ops.hpp"

namespace trajnav::model {

using namespace trajnav::nn;

AttentionMask build_merged_mask(std::size_t prefix_len, const std::vector<std::size_t>& suffix_lens) {
  if (prefix_len == 0) throw ContractError("merged mask: prefix must hold at least the start token");
  std::size_t total = prefix_len;
  for (std::size_t len : suffix_lens) {
    if (len == 0) throw ContractError("merged mask: zero-length suffix");
    total += len;
  }
  AttentionMask mask(total, total, false);
  for (std::size_t i = 0; i < prefix_len; ++i)
    for (std::size_t j = 0; j <= i; ++j) mask.set(i, j, true);
  std::size_t begin = prefix_len;
  for (std::size_t len : suffix_lens) {
    for (std::size_t r = 0; r < len; ++r) {
      for (std::size_t j = 0; j < prefix_len; ++j) mask.set(begin + r, j, true);
      for (std::size_t c = 0; c <= r; ++c) mask.set(begin + r, begin + c, true);
    }
    begin += len;
  }
  return mask;
}

template <typename T>
PathMatcher<T>::PathMatcher(const LayerConfig& cfg, std::size_t depth, Rng& rng)
    : start_(init_weight<T>({1, cfg.dim}, rng)),
      stop_(Tensor<T>::zeros({1, cfg.dim}, true)),
      decoder_(cfg, depth, rng),
      dim_(cfg.dim) {}

template <typename T>
Tensor<T> PathMatcher<T>::with_positions(const Tensor<T>& tokens, std::size_t first) const {
  return add(tokens, sinusoidal_positions<T>(tokens.rows(), dim_, first));
}

template <typename T>
PathCache<T> PathMatcher<T>::begin(const Tensor<T>& text, std::vector<std::uint8_t> text_ok) const {
  auto cache = prepare_text(text, std::move(text_ok));
  commit_start(cache);
  return cache;
}

template <typename T>
PathCache<T> PathMatcher<T>::prepare_text(const Tensor<T>& text, std::vector<std::uint8_t> text_ok) const {
  PathCache<T> cache;
  cache.text_tokens = text.rows();
  cache.text = decoder_.prepare_memory(text, std::move(text_ok));
  return cache;
}

template <typename T>
void PathMatcher<T>::commit_start(PathCache<T>& cache) const {
  if (cache.committed() != 0) throw ContractError("path cache: START is already committed");
  decoder_.forward(with_positions(start_, 0), AttentionMask::full(1, 1), cache.text, &cache.self, true);
}

template <typename T>
void PathMatcher<T>::commit(PathCache<T>& cache, const Tensor<T>& edges) const {
  if (cache.committed() == 0) throw ContractError("path cache: commit before begin");
  if (edges.rows() == 0) return;
  const std::size_t past = cache.committed();
  const std::size_t k = edges.rows();
  auto mask = AttentionMask::causal(past + k).slice_rows(past, past + k);
  decoder_.forward(with_positions(edges, past), mask, cache.text, &cache.self, true);
}

template <typename T>
void PathMatcher<T>::truncate(PathCache<T>& cache, std::size_t new_len) const {
  if (new_len < 1 || new_len > cache.committed()) {
    throw ContractError("path cache: cannot truncate " + std::to_string(cache.committed()) +
                        " committed tokens to " + std::to_string(new_len));
  }
  if (new_len == cache.committed()) return;
  for (auto& kv : cache.self.layers) {
    kv.keys = slice_rows(kv.keys, 0, new_len);
    kv.values = slice_rows(kv.values, 0, new_len);
  }
  cache.self.length = new_len;
}

template <typename T>
Tensor<T> PathMatcher<T>::embed_batch(const PathCache<T>& cache, const std::vector<Tensor<T>>& suffixes) const {
  if (cache.committed() == 0 || cache.text.layers.size() != decoder_.depth()) {
    throw ContractError("path cache: not prepared for this matcher");
  }
  if (suffixes.empty()) throw ContractError("embed_batch: no suffixes");
  const std::size_t prefix = cache.committed();
  std::vector<std::size_t> lens;
  std::vector<Tensor<T>> tokens;
  for (const auto& s : suffixes) {
    lens.push_back(s.rows());
    tokens.push_back(with_positions(s, prefix));
  }
  const std::size_t total = std::accumulate(lens.begin(), lens.end(), std::size_t{0});
  auto mask = build_merged_mask(prefix, lens).slice_rows(prefix, prefix + total);
  PathCache<T> scratch = cache;  // forward without commit leaves it untouched
  auto out = decoder_.forward(concat_rows<T>(tokens), mask, scratch.text, &scratch.self, false);
  std::vector<std::int64_t> last;
  std::size_t offset = 0;
  for (std::size_t len : lens) {
    offset += len;
    last.push_back(static_cast<std::int64_t>(offset - 1));
  }
  return gather_rows<T>(out, last);
}

template <typename T>
Tensor<T> PathMatcher<T>::embed_uncached(const PathCache<T>& cache, const Tensor<T>& edges, bool with_stop) const {
  std::vector<Tensor<T>> parts = {start_};
  if (edges.defined() && edges.rows() > 0) parts.push_back(edges);
  if (with_stop) parts.push_back(stop_);
  auto seq = with_positions(concat_rows<T>(parts), 0);
  const std::size_t n = seq.rows();
  auto out = decoder_.forward(seq, AttentionMask::causal(n), cache.text);
  return slice_rows(out, n - 1, n);
}

template <typename T>
void PathMatcher<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  out.push_back({prefix + ".start", start_});
  out.push_back({prefix + ".stop", stop_});
  decoder_.collect(out, prefix + ".decoder");
}

CompareMode parse_compare_mode(const std::string& name) {
  if (name == "compare") return CompareMode::Compare;
  if (name == "independent") return CompareMode::Independent;
  throw ConfigError("unknown candidate scoring mode '" + name + "' (expected compare or independent)");
}

std::string compare_mode_name(CompareMode mode) {
  return mode == CompareMode::Compare ? "compare" : "independent";
}

template <typename T>
CandidateScorer<T>::CandidateScorer(const LayerConfig& cfg, std::size_t depth, CompareMode mode, Rng& rng)
    : encoder_(cfg, depth, rng, true), hidden_(cfg.dim, cfg.dim, rng), out_(cfg.dim, 1, rng), mode_(mode) {}

template <typename T>
Tensor<T> CandidateScorer<T>::scores(const Tensor<T>& embeddings) const {
  if (!embeddings.defined() || embeddings.rows() == 0) throw ContractError("candidate scorer: empty candidate set");
  const std::size_t c = embeddings.rows();
  auto x = mode_ == CompareMode::Compare ? encoder_.forward(embeddings, AttentionMask::full(c, c)) : embeddings;
  return transpose(out_.forward(gelu(hidden_.forward(x))));
}

template <typename T>
void CandidateScorer<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  if (mode_ == CompareMode::Compare) encoder_.collect(out, prefix + ".encoder");
  hidden_.collect(out, prefix + ".hidden");
  out_.collect(out, prefix + ".out");
}

template <typename T>
std::size_t argmax(std::span<const T> values) {
  if (values.empty()) throw ContractError("argmax of an empty list");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

template struct PathCache<float>;
template struct PathCache<double>;
template class PathMatcher<float>;
template class PathMatcher<double>;
template class CandidateScorer<float>;
template class CandidateScorer<double>;
template std::size_t argmax<float>(std::span<const float>);
template std::size_t argmax<double>(std::span<const double>);

}  // namespace trajnav::model
