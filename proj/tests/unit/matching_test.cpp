#include <gtest/gtest.h>

#include "support/gradcheck.hpp"
#include "trajnav/model/matching.hpp"
#include "trajnav/nn/ops.hpp"

using namespace trajnav;
using namespace trajnav::model;
using namespace trajnav::nn;
using trajnav::testing::check_gradients;
using trajnav::testing::max_abs_diff;
using trajnav::testing::random_tensor;

namespace {

const LayerConfig kCfg{16, 4, 2, 0.0};

struct Fixture {
  Rng rng{21};
  PathMatcher<float> matcher{kCfg, 4, rng};
  Tensor<float> text = random_tensor<float>({7, 16}, rng);
};

}  // namespace

TEST(MergedMask, PrefixThreeWithThreeSingleSuffixes) {
  auto m = build_merged_mask(3, {1, 1, 1});
  ASSERT_EQ(m.rows(), 6u);
  for (std::size_t r = 3; r < 6; ++r)
    for (std::size_t c = 0; c < 6; ++c) EXPECT_EQ(m.allows(r, c), c < 3 || c == r) << r << "," << c;
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 6; ++c) EXPECT_EQ(m.allows(r, c), c <= r);
}

TEST(MergedMask, SingleSuffixIsPlainCausal) {
  EXPECT_EQ(build_merged_mask(1, {2}), AttentionMask::causal(3));
}

TEST(MergedMask, SuffixesNeverSeeEachOther) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t prefix = 1 + uniform_index(rng, 6);
    std::vector<std::size_t> lens(uniform_index(rng, 5));
    for (auto& l : lens) l = 1 + uniform_index(rng, 4);
    auto m = build_merged_mask(prefix, lens);
    m.validate();
    std::vector<int> owner(prefix, -1);
    for (std::size_t s = 0; s < lens.size(); ++s) owner.insert(owner.end(), lens[s], static_cast<int>(s));
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) {
        bool expected;
        if (owner[r] < 0) expected = c <= r;
        else expected = owner[c] < 0 || (owner[c] == owner[r] && c <= r);
        ASSERT_EQ(m.allows(r, c), expected);
      }
    }
  }
}

TEST(MergedMask, ZeroLengthSuffixIsContractError) {
  EXPECT_THROW(build_merged_mask(2, {1, 0}), ContractError);
  EXPECT_THROW(build_merged_mask(0, {1}), ContractError);
}

TEST(PathMatcher, BatchEqualsIndependentUncachedPaths) {
  Fixture f;
  auto prefix_edges = random_tensor<float>({3, 16}, f.rng);
  auto cache = f.matcher.begin(f.text);
  f.matcher.commit(cache, prefix_edges);
  EXPECT_EQ(cache.committed(), 4u);
  std::vector<Tensor<float>> suffixes;
  for (int i = 0; i < 3; ++i) suffixes.push_back(random_tensor<float>({1, 16}, f.rng));
  suffixes.push_back(f.matcher.stop_token());
  auto batch = f.matcher.embed_batch(cache, suffixes);
  ASSERT_EQ(batch.rows(), 4u);
  for (int i = 0; i < 3; ++i) {
    const Tensor<float> parts[] = {prefix_edges, suffixes[i]};
    auto oracle = f.matcher.embed_uncached(cache, concat_rows<float>(parts), false);
    EXPECT_LE(max_abs_diff(slice_rows(batch, i, i + 1), oracle), 1e-5);
  }
  auto stop_oracle = f.matcher.embed_uncached(cache, prefix_edges, true);
  EXPECT_LE(max_abs_diff(slice_rows(batch, 3, 4), stop_oracle), 1e-5);
  EXPECT_EQ(cache.committed(), 4u);
}

TEST(PathMatcher, LongerSuffixesAlsoMatch) {
  Fixture f;
  auto prefix_edges = random_tensor<float>({2, 16}, f.rng);
  auto cache = f.matcher.begin(f.text);
  f.matcher.commit(cache, prefix_edges);
  std::vector<Tensor<float>> suffixes = {random_tensor<float>({3, 16}, f.rng), random_tensor<float>({1, 16}, f.rng),
                                         random_tensor<float>({2, 16}, f.rng)};
  auto batch = f.matcher.embed_batch(cache, suffixes);
  for (std::size_t i = 0; i < suffixes.size(); ++i) {
    const Tensor<float> parts[] = {prefix_edges, suffixes[i]};
    EXPECT_LE(max_abs_diff(slice_rows(batch, i, i + 1),
                           f.matcher.embed_uncached(cache, concat_rows<float>(parts), false)),
              1e-5);
  }
}

TEST(PathMatcher, DuplicateSuffixesAndSingletonBatch) {
  Fixture f;
  auto cache = f.matcher.begin(f.text);
  f.matcher.commit(cache, random_tensor<float>({2, 16}, f.rng));
  auto s = random_tensor<float>({1, 16}, f.rng);
  auto dup = f.matcher.embed_batch(cache, {s, random_tensor<float>({1, 16}, f.rng), s});
  EXPECT_EQ(max_abs_diff(slice_rows(dup, 0, 1), slice_rows(dup, 2, 3)), 0.0);
  auto one = f.matcher.embed_batch(cache, {s});
  EXPECT_EQ(max_abs_diff(one, f.matcher.embed_batch(cache, {s})), 0.0);
  EXPECT_LE(max_abs_diff(one, slice_rows(dup, 0, 1)), 1e-6);
}

TEST(PathMatcher, CommitOneByOneEqualsBlockCommit) {
  Fixture f;
  auto edges = random_tensor<float>({4, 16}, f.rng);
  auto a = f.matcher.begin(f.text);
  for (std::size_t i = 0; i < 4; ++i) {
    const std::size_t before = a.committed();
    f.matcher.commit(a, slice_rows(edges, i, i + 1));
    EXPECT_EQ(a.committed(), before + 1);
  }
  auto b = f.matcher.begin(f.text);
  f.matcher.commit(b, edges);
  for (std::size_t l = 0; l < 4; ++l) {
    EXPECT_LE(max_abs_diff(a.self.layers[l].keys, b.self.layers[l].keys), 1e-5);
    EXPECT_LE(max_abs_diff(a.self.layers[l].values, b.self.layers[l].values), 1e-5);
  }
  auto s = random_tensor<float>({1, 16}, f.rng);
  const Tensor<float> parts[] = {edges, s};
  auto oracle = f.matcher.embed_uncached(a, concat_rows<float>(parts), false);
  EXPECT_LE(max_abs_diff(f.matcher.embed_batch(a, {s}), oracle), 1e-5);
}

TEST(PathMatcher, TruncateMatchesRebuild) {
  Fixture f;
  auto edges = random_tensor<float>({4, 16}, f.rng);
  auto cache = f.matcher.begin(f.text);
  f.matcher.commit(cache, edges);
  f.matcher.truncate(cache, 5);  // no-op
  EXPECT_EQ(cache.committed(), 5u);
  f.matcher.truncate(cache, 3);
  auto rebuilt = f.matcher.begin(f.text);
  f.matcher.commit(rebuilt, slice_rows(edges, 0, 2));
  auto s = random_tensor<float>({1, 16}, f.rng);
  EXPECT_LE(max_abs_diff(f.matcher.embed_batch(cache, {s}), f.matcher.embed_batch(rebuilt, {s})), 1e-5);
  f.matcher.truncate(cache, 1);
  EXPECT_EQ(cache.committed(), 1u);
  EXPECT_EQ(cache.self.layers[0].keys.rows(), 1u);
  EXPECT_LE(max_abs_diff(f.matcher.embed_batch(cache, {s}), f.matcher.embed_uncached(cache, s, false)), 1e-5);
  EXPECT_THROW(f.matcher.truncate(cache, 0), ContractError);
  EXPECT_THROW(f.matcher.truncate(cache, 2), ContractError);
}

TEST(PathMatcher, UnpreparedCacheIsContractError) {
  Fixture f;
  PathCache<float> empty;
  EXPECT_THROW(f.matcher.embed_batch(empty, {f.matcher.stop_token()}), ContractError);
  Rng rng(2);
  PathMatcher<float> shallow(kCfg, 2, rng);
  auto other = shallow.begin(f.text);
  EXPECT_THROW(f.matcher.embed_batch(other, {f.matcher.stop_token()}), ContractError);
}

TEST(PathMatcher, StopTokenStartsAtZero) {
  Fixture f;
  for (float v : f.matcher.stop_token().data()) EXPECT_EQ(v, 0.0f);
}

TEST(CandidateScorer, SingletonGetsProbabilityOne) {
  Rng rng(4);
  CandidateScorer<float> scorer(kCfg, 1, CompareMode::Compare, rng);
  auto p = softmax(scorer.scores(random_tensor<float>({1, 16}, rng)));
  EXPECT_EQ(p.shape(), (Shape{1, 1}));
  EXPECT_FLOAT_EQ(p.item(), 1.0f);
}

TEST(CandidateScorer, PermutationEquivariantAndDuplicatesTie) {
  Rng rng(5);
  for (CompareMode mode : {CompareMode::Compare, CompareMode::Independent}) {
    CandidateScorer<float> scorer(kCfg, 1, mode, rng);
    auto emb = random_tensor<float>({5, 16}, rng);
    auto s = scorer.scores(emb);
    const std::vector<std::int64_t> perm = {4, 2, 0, 3, 1};
    auto sp = scorer.scores(gather_rows<float>(emb, perm));
    for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_NEAR(sp.data()[i], s.data()[perm[i]], 1e-5);
    const std::vector<std::int64_t> dup = {0, 1, 0};
    auto sd = scorer.scores(gather_rows<float>(emb, dup));
    EXPECT_EQ(sd.data()[0], sd.data()[2]);
  }
}

TEST(CandidateScorer, ProbabilitiesNormalisedAndArgmaxAgrees) {
  Rng rng(6);
  CandidateScorer<float> scorer(kCfg, 1, CompareMode::Compare, rng);
  for (int trial = 0; trial < 50; ++trial) {
    auto s = scorer.scores(random_tensor<float>({1 + uniform_index(rng, 8), 16}, rng));
    auto p = softmax(s);
    double total = 0;
    for (float v : p.data()) total += v;
    EXPECT_NEAR(total, 1.0, 1e-6);
    EXPECT_EQ(argmax(p.data()), argmax(s.data()));
  }
  EXPECT_THROW(scorer.scores(Tensor<float>::zeros({0, 16})), ContractError);
}

TEST(Argmax, LowestIndexWinsTies) {
  const std::vector<float> v = {0.1f, 0.7f, 0.7f, 0.2f};
  EXPECT_EQ(argmax<float>(v), 1u);
}

TEST(MatchingGradients, CachedPathAndScorerMatchFiniteDifferences) {
  Rng rng(7);
  PathMatcher<double> matcher(kCfg, 2, rng);
  CandidateScorer<double> scorer(kCfg, 1, CompareMode::Compare, rng);
  ParameterList<double> params;
  matcher.collect(params, "match");
  scorer.collect(params, "score");
  trajnav::testing::randomize(params, rng, 0.3);
  auto text = random_tensor<double>({4, 16}, rng, 1.0, true);
  auto edges = random_tensor<double>({3, 16}, rng, 1.0, true);
  auto fresh = random_tensor<double>({2, 16}, rng, 1.0, true);
  params.push_back({"text", text});
  params.push_back({"edges", edges});
  params.push_back({"fresh", fresh});
  auto loss = [&] {
    auto cache = matcher.begin(text);
    matcher.commit(cache, slice_rows(edges, 0, 2));
    matcher.commit(cache, slice_rows(edges, 2, 3));
    matcher.truncate(cache, 3);
    auto emb = matcher.embed_batch(cache, {slice_rows(fresh, 0, 1), slice_rows(fresh, 1, 2), matcher.stop_token()});
    return cross_entropy(scorer.scores(emb), 1);
  };
  auto result = check_gradients(params, loss, 5, rng);
  EXPECT_GE(result.pass_fraction(), 0.95) << "worst " << result.worst << " at " << result.worst_name;
}
