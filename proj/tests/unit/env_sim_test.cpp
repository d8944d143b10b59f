#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <queue>

#include "trajnav/core/error.hpp"
#include "trajnav/env/episode.hpp"

using namespace trajnav;
using namespace trajnav::env;

namespace {

EnvGraph grid5(std::uint64_t seed = 7) {
  EnvParams p;
  p.n_nodes = 25;
  return generate_environment(seed, p);
}

EnvGraph cycle(int n, double radius = 3.0) {
  std::vector<Vec3> coords;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (int i = 0; i < n; ++i) {
    const double a = 2 * kPi * i / n;
    coords.push_back({radius * std::cos(a), radius * std::sin(a), 0.0});
    edges.emplace_back(i, (i + 1) % n);
  }
  std::vector<int> landmarks(n);
  for (int i = 0; i < n; ++i) landmarks[i] = i % 24;
  return EnvGraph(1, 2.0, coords, edges, landmarks);
}

// Three nodes on a line along +x, then one more raised node.
EnvGraph line_env(std::vector<int> landmarks = {0, 1, 2}) {
  std::vector<Vec3> coords = {{0, 0, 0}, {2, 0, 0}, {4, 0, 0}};
  return EnvGraph(3, 2.0, coords, {{0, 1}, {1, 2}}, landmarks);
}

std::vector<int> bfs_hops(const EnvGraph& env, NodeId from) {
  std::vector<int> d(env.size(), -1);
  std::queue<NodeId> q;
  d[from] = 0;
  q.push(from);
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop();
    for (NodeId v : env.neighbors(u))
      if (d[v] < 0) {
        d[v] = d[u] + 1;
        q.push(v);
      }
  }
  return d;
}

bool bfs_connected(const EnvGraph& env) {
  for (int d : bfs_hops(env, 0))
    if (d < 0) return false;
  return true;
}

}  // namespace

TEST(GenerateEnvironment, SameSeedSameGraph) {
  auto a = grid5(11), b = grid5(11);
  EXPECT_EQ(a.coords(), b.coords());
  EXPECT_EQ(a.edges(), b.edges());
  EXPECT_EQ(a.landmarks(), b.landmarks());
  auto fa = a.view_feature(3, 5), fb = b.view_feature(3, 5);
  EXPECT_TRUE(std::equal(fa.begin(), fa.end(), fb.begin()));
}

TEST(GenerateEnvironment, GridHasInteriorDegreeFour) {
  auto env = grid5();
  ASSERT_EQ(env.size(), 25u);
  EXPECT_EQ(env.edges().size(), 40u);
  for (int r = 1; r < 4; ++r)
    for (int c = 1; c < 4; ++c) EXPECT_EQ(env.neighbors(r * 5 + c).size(), 4u);
  EXPECT_EQ(env.neighbors(0).size(), 2u);
  EXPECT_TRUE(bfs_connected(env));
}

TEST(GenerateEnvironment, GridStairsProduceElevatedEdges) {
  auto env = grid5();
  bool climbs = false;
  for (auto [u, v] : env.edges())
    if (std::abs(elevation(env.coord(u), env.coord(v))) > 0.1) climbs = true;
  EXPECT_TRUE(climbs);
}

TEST(GenerateEnvironment, InvariantsHoldForManySeeds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (Layout layout : {Layout::Grid, Layout::RandomGeometric}) {
      EnvParams p;
      p.n_nodes = 20;
      p.layout = layout;
      p.radius = 4.0;
      p.max_attempts = 64;
      auto env = generate_environment(seed, p);
      EXPECT_TRUE(bfs_connected(env));
      for (std::size_t u = 0; u < env.size(); ++u) {
        for (NodeId v : env.neighbors(static_cast<NodeId>(u))) {
          EXPECT_NE(v, static_cast<NodeId>(u));
          EXPECT_TRUE(env.adjacent(v, static_cast<NodeId>(u)));
        }
      }
    }
  }
}

TEST(GenerateEnvironment, RadiusBelowConnectivityRetriesThenFails) {
  EnvParams p;
  p.n_nodes = 12;
  p.layout = Layout::RandomGeometric;
  p.radius = 0.05;
  p.max_attempts = 5;
  EXPECT_THROW(generate_environment(3, p), GenerationError);
}

TEST(GenerateEnvironment, RandomGeometricDrawIsConnected) {
  EnvParams p;
  p.n_nodes = 15;
  p.layout = Layout::RandomGeometric;
  p.radius = 3.5;
  p.max_attempts = 100;
  auto env = generate_environment(5, p);
  EXPECT_TRUE(bfs_connected(env));
  // Every pair within the radius is an edge and no other pair is.
  for (std::size_t u = 0; u < env.size(); ++u)
    for (std::size_t v = u + 1; v < env.size(); ++v)
      EXPECT_EQ(env.adjacent(u, v), distance(env.coord(u), env.coord(v)) <= 3.5);
}

TEST(GenerateEnvironment, RejectsTooFewNodes) {
  EnvParams p;
  p.n_nodes = 1;
  EXPECT_THROW(generate_environment(1, p), ConfigError);
}

TEST(EnvGraph, RejectsDisconnectedOrDuplicateCoordinates) {
  std::vector<Vec3> coords = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  EXPECT_THROW(EnvGraph(1, 1.0, coords, {{0, 1}}, {0, 0, 0}), InvariantError);
  EXPECT_THROW(EnvGraph(1, 1.0, {{0, 0, 0}, {0, 0, 0}}, {{0, 1}}, {0, 0}), InvariantError);
  EXPECT_THROW(EnvGraph(1, 1.0, coords, {{0, 1}, {1, 1}, {1, 2}}, {0, 0, 0}), InvariantError);
}

TEST(Observe, AlignedNeighborHasZeroAngles) {
  auto env = line_env();
  auto obs = observe(env, 0, 0.0);
  ASSERT_EQ(obs.neighbors.size(), 1u);
  EXPECT_EQ(obs.neighbors[0].id, 1);
  EXPECT_DOUBLE_EQ(obs.neighbors[0].heading, 0.0);
  EXPECT_DOUBLE_EQ(obs.neighbors[0].elevation, 0.0);
  EXPECT_DOUBLE_EQ(obs.neighbors[0].distance, 2.0);
}

TEST(Observe, NeighborBehindWrapsToMinusPi) {
  auto env = line_env();
  auto obs = observe(env, 2, 0.0);
  ASSERT_EQ(obs.neighbors.size(), 1u);
  EXPECT_DOUBLE_EQ(obs.neighbors[0].heading, -kPi);
}

TEST(Observe, RotatingAgentShiftsEveryHeading) {
  auto env = grid5();
  for (double delta : {0.3, -1.2, 2.9, kPi}) {
    auto a = observe(env, 12, 0.4);
    auto b = observe(env, 12, 0.4 + delta);
    ASSERT_EQ(a.neighbors.size(), b.neighbors.size());
    for (std::size_t i = 0; i < a.neighbors.size(); ++i) {
      EXPECT_NEAR(wrap_angle(b.neighbors[i].heading - (a.neighbors[i].heading - delta)), 0.0, 1e-12);
      EXPECT_GE(b.neighbors[i].heading, -kPi);
      EXPECT_LT(b.neighbors[i].heading, kPi);
    }
  }
}

TEST(Observe, NeighborsMatchAdjacencyAndBearingsRecover) {
  auto env = grid5(3);
  Rng rng(1);
  for (std::size_t node = 0; node < env.size(); ++node) {
    const double heading = (uniform01(rng) * 2 - 1) * kPi;
    auto obs = observe(env, static_cast<NodeId>(node), heading);
    std::vector<NodeId> ids;
    for (const auto& nb : obs.neighbors) {
      ids.push_back(nb.id);
      const Vec3& a = env.coord(node);
      const Vec3& b = env.coord(nb.id);
      const double world = std::atan2(b.y - a.y, b.x - a.x);
      EXPECT_NEAR(wrap_angle(heading + nb.heading - world), 0.0, 1e-9);
      EXPECT_GE(nb.elevation, -kPi / 2);
      EXPECT_LE(nb.elevation, kPi / 2);
    }
    EXPECT_EQ(ids, env.neighbors(static_cast<NodeId>(node)));
    EXPECT_EQ(obs.view_count(), 36u);
    EXPECT_EQ(obs.view_features.size(), 36u * 64u);
  }
}

TEST(Observe, UnknownNodeIsLookupError) {
  auto env = grid5();
  EXPECT_THROW(observe(env, 25, 0.0), LookupError);
  EXPECT_THROW(observe(env, -1, 0.0), LookupError);
}

TEST(ViewLayout, ConesPartitionDirections) {
  ViewLayout v;
  EXPECT_EQ(v.view_for(0.0, 0.0), 12u);
  EXPECT_EQ(v.view_for(kPi / 2, 0.0), 15u);
  EXPECT_EQ(v.view_for(-kPi / 12 + 1e-9, 0.0), 12u);
  EXPECT_EQ(v.view_for(-kPi / 12 - 1e-9, 0.0), 23u);
  EXPECT_EQ(v.view_for(0.0, 0.5), 24u);
  EXPECT_EQ(v.view_for(0.0, -0.5), 0u);
  for (std::size_t i = 0; i < v.count(); ++i) EXPECT_EQ(v.view_for(v.heading_of(i), v.elevation_of(i)), i);
}

TEST(SynthViewFeature, DeterministicAndUnitNorm) {
  auto env = grid5();
  auto a = synth_view_feature(env, 6, 13);
  auto b = synth_view_feature(env, 6, 13);
  EXPECT_EQ(a, b);
  double norm = 0;
  for (float x : a) norm += x * x;
  EXPECT_NEAR(norm, 1.0, 1e-6);
}

TEST(SynthViewFeature, EmptyConeIsPureDirectionEmbedding) {
  auto env = line_env();
  // Node 0 looking along -x sees nothing.
  const std::size_t view = env.views().view_for(kPi, 0.0);
  auto f = synth_view_feature(env, 0, view);
  auto dir = direction_embedding(view, 64);
  for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(f[i], dir[i], 1e-6);
}

TEST(SynthViewFeature, DifferentVisibleLandmarksGiveDifferentFeatures) {
  auto a = line_env({0, 1, 2});
  auto b = line_env({0, 5, 2});
  const std::size_t view = a.views().view_for(0.0, 0.0);
  auto fa = synth_view_feature(a, 0, view);
  auto fb = synth_view_feature(b, 0, view);
  double diff = 0;
  for (std::size_t i = 0; i < fa.size(); ++i) diff = std::max(diff, double(std::abs(fa[i] - fb[i])));
  EXPECT_GT(diff, 1e-2);
  // Views that do not face the changed node are untouched.
  const std::size_t back = a.views().view_for(kPi, 0.0);
  EXPECT_EQ(synth_view_feature(a, 0, back), synth_view_feature(b, 0, back));
}

TEST(Vocab, ReservedIdsAndBijection) {
  const auto& v = Vocab::standard();
  EXPECT_EQ(v.id("[PAD]"), Vocab::kPad);
  EXPECT_EQ(v.id("[MASK]"), Vocab::kMask);
  EXPECT_EQ(v.id("[CLS]"), Vocab::kCls);
  EXPECT_EQ(v.id("[SEP]"), Vocab::kSep);
  EXPECT_EQ(v.size(), 4u + 12u + 24u);
  for (TokenId i = 0; i < static_cast<TokenId>(v.size()); ++i) EXPECT_EQ(v.id(v.token(i)), i);
  EXPECT_THROW(v.id("zebra"), VocabError);
  EXPECT_THROW(v.token(999), VocabError);
}

TEST(Speak, StraightPathUsesGoForward) {
  auto env = line_env({0, 1, 2});
  const auto& names = landmark_names();
  auto words = speak_words(env, {0, 1, 2}, 0.0);
  std::vector<std::string> expected = {"go", "forward", "to", names[1], ".", "go", "forward",
                                       "to", names[2],  ".",  "stop",   "at", names[2]};
  EXPECT_EQ(words, expected);
}

TEST(Speak, ReversedPathFlipsTurnWords) {
  auto env = line_env({0, 1, 2});
  auto fwd = speak(env, {0, 1, 2}, 0.0);
  auto rev = speak(env, {2, 1, 0}, 0.0);
  EXPECT_NE(fwd, rev);
  EXPECT_EQ(speak_words(env, {2, 1, 0}, 0.0)[1], "around");
  EXPECT_EQ(speak(env, {0, 1, 2}, 0.0), fwd);
}

TEST(Speak, TurnsAndClimbs) {
  EXPECT_EQ(motion_words(kPi / 2)[1], "left");
  EXPECT_EQ(motion_words(-kPi / 2)[1], "right");
  EXPECT_EQ(motion_words(0.1)[1], "forward");
  EXPECT_EQ(motion_words(-kPi)[1], "around");
  std::vector<Vec3> coords = {{0, 0, 0}, {2, 0, 1}};
  EnvGraph env(1, 2.0, coords, {{0, 1}}, {3, 4});
  auto up = speak_words(env, {0, 1});
  EXPECT_EQ(up[2], "up");
  EXPECT_EQ(speak_words(env, {1, 0}, kPi)[2], "down");
}

TEST(Speak, RejectsShortOrBrokenPaths) {
  auto env = line_env();
  EXPECT_THROW(speak(env, {0}), SpeakerError);
  EXPECT_THROW(speak(env, {0, 2}), SpeakerError);
}

TEST(SampleEpisode, ShortestModeMatchesBfsDistance) {
  auto env = grid5(4);
  EpisodeParams p;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto ep = sample_episode(env, seed, p);
    validate_episode(env, ep);
    const auto d = bfs_hops(env, ep.start);
    EXPECT_EQ(static_cast<int>(ep.gt_path.size()) - 1, d[ep.target]);
    EXPECT_GE(static_cast<int>(ep.gt_path.size()) - 1, p.min_len);
    EXPECT_LE(static_cast<int>(ep.gt_path.size()) - 1, p.max_len);
    EXPECT_EQ(ep.instruction, speak(env, ep.gt_path, ep.start_heading));
    EXPECT_DOUBLE_EQ(ep.success_radius, 3.0);
  }
}

TEST(SampleEpisode, WaypointModeOnCycleCanExceedShortest) {
  auto env = cycle(10);
  EpisodeParams p;
  p.fidelity = PathFidelity::Waypoint;
  p.min_len = 2;
  p.max_len = 9;
  int longer = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto ep = sample_episode(env, seed, p);
    validate_episode(env, ep);
    const auto d = bfs_hops(env, ep.start);
    const int len = static_cast<int>(ep.gt_path.size()) - 1;
    EXPECT_GE(len, d[ep.target]);
    if (len > d[ep.target]) ++longer;
  }
  EXPECT_GT(longer, 0);
}

TEST(SampleEpisode, DeterministicForSeed) {
  auto env = grid5(4);
  EpisodeParams p;
  p.fidelity = PathFidelity::Waypoint;
  EXPECT_EQ(sample_episode(env, 99, p), sample_episode(env, 99, p));
}

TEST(SampleEpisode, ImpossibleLengthIsSamplingError) {
  auto env = line_env();
  EpisodeParams p;
  p.min_len = 5;
  p.max_len = 6;
  p.max_attempts = 20;
  EXPECT_THROW(sample_episode(env, 1, p), SamplingError);
}

TEST(Dataset, RoundTripsThroughJsonLines) {
  DatasetParams p;
  p.environments = 3;
  p.episodes_per_env = 4;
  p.episode.fidelity = PathFidelity::Waypoint;
  auto data = make_dataset(17, p, "train");
  const auto path = std::filesystem::temp_directory_path() / "trajnav_dataset_test.jsonl";
  write_dataset(path, data);
  auto back = read_dataset(path);
  ASSERT_EQ(back.envs.size(), 3u);
  ASSERT_EQ(back.episodes.size(), 12u);
  EXPECT_EQ(back.episodes, data.episodes);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.envs[i].coords(), data.envs[i].coords());
    EXPECT_EQ(back.envs[i].edges(), data.envs[i].edges());
    EXPECT_EQ(back.envs[i].landmarks(), data.envs[i].landmarks());
    auto a = back.envs[i].view_feature(2, 7), b = data.envs[i].view_feature(2, 7);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
  std::filesystem::remove(path);
}

TEST(Dataset, SplitsDiffer) {
  DatasetParams p;
  p.environments = 1;
  p.episodes_per_env = 2;
  auto a = make_dataset(1, p, "train");
  auto b = make_dataset(1, p, "test");
  EXPECT_NE(a.envs[0].landmarks(), b.envs[0].landmarks());
}
