#include <gtest/gtest.h>

#include <map>
#include <set>

#include "trajnav/core/random.hpp"
#include "trajnav/graph/explore_graph.hpp"
#include "support/graph_oracles.hpp"

using namespace trajnav;
using namespace trajnav::graph;
using namespace trajnav::testing;

TEST(FidelityStack, WalkBackAndForth) {
  Graph g(0, {});
  // A=0, B=1, C=2, D=3, E=4
  observe(g, {nb(1)});
  g.move_to(1);
  observe(g, {nb(0), nb(2), nb(3)});
  g.move_to(2);
  observe(g, {nb(1)});
  g.move_to(1);
  EXPECT_EQ(g.stack().nodes(), (std::vector<NodeId>{0, 1}));
  g.move_to(3);
  EXPECT_EQ(g.stack().nodes(), (std::vector<NodeId>{0, 1, 3}));
  observe(g, {nb(1), nb(4)});
  EXPECT_EQ(g.fidelity(4), (std::vector<NodeId>{0, 1, 3, 4}));
  EXPECT_EQ(g.fidelity_edges(4), (std::vector<std::string>{"0>1", "1>3", "3>4"}));
  g.move_to(1);
  g.move_to(0);
  EXPECT_EQ(g.stack().nodes(), (std::vector<NodeId>{0}));
}

TEST(FidelityStack, NonAdjacentMoveIsContractError) {
  Graph g(0, {});
  observe(g, {nb(1)});
  g.move_to(1);
  observe(g, {nb(2)});
  EXPECT_THROW(g.move_to(5), ContractError);
  g.move_to(2);
  EXPECT_THROW(g.move_to(0), ContractError);
}

TEST(FidelityStack, EqualsWalkWithDetoursRemoved) {
  Rng rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    auto world = random_world(rng, 4 + static_cast<int>(uniform_index(rng, 9)), true);
    Graph g(0, {});
    std::vector<NodeId> walk = {0};
    const int steps = 1 + static_cast<int>(uniform_index(rng, 30));
    for (int s = 0; s < steps; ++s) {
      observe(g, world_neighbors(world, g.current()));
      const auto& options = world.adj[g.current()];
      const NodeId next = options[uniform_index(rng, options.size())];
      g.move_to(next);
      walk.push_back(next);
      ASSERT_EQ(g.stack().nodes(), remove_detours(walk)) << "trial " << trial;
      std::set<NodeId> distinct(g.stack().nodes().begin(), g.stack().nodes().end());
      ASSERT_EQ(distinct.size(), g.stack().size());
    }
  }
}

TEST(Update, FirstObservationAddsEveryNeighbor) {
  Graph g(0, {});
  auto fresh = g.update(0, {nb(1), nb(2), nb(3)}, {"a", "b", "c"});
  EXPECT_EQ(fresh, (std::vector<NodeId>{1, 2, 3}));
  EXPECT_EQ(g.node_count(), 4u);
  EXPECT_EQ(g.edge_count(), 3u);
  EXPECT_TRUE(g.has_edge(0, 2));
  EXPECT_FALSE(g.has_edge(2, 0));
}

TEST(Update, RevisitWithEmbeddedNeighborsReturnsNothing) {
  Graph g(0, {});
  observe(g, {nb(1), nb(2)});
  g.set_embedding(1, "e1");
  g.set_embedding(2, "e2");
  g.move_to(1);
  observe(g, {nb(0)});
  g.move_to(0);
  EXPECT_TRUE(g.update(0, {nb(1), nb(2)}, {"x", "y"}).empty());
  EXPECT_EQ(g.edge(0, 2).feature, "y");  // overwritten with the fresh feature
}

TEST(Update, VisitedNeighborGetsEdgeButIsNotReturned) {
  // Two rooms: 0 - 1 - 2 and 0 - 2; walk 0 -> 1 -> 2 then observe 0 from 2.
  Graph g(0, {});
  observe(g, {nb(1)});
  g.set_embedding(1, "e1");
  g.move_to(1);
  observe(g, {nb(0), nb(2)});
  g.set_embedding(2, "e2");
  g.move_to(2);
  auto fresh = g.update(2, {nb(1), nb(0)}, {"2>1", "2>0"});
  EXPECT_TRUE(fresh.empty());
  EXPECT_TRUE(g.has_edge(2, 0));
}

TEST(Update, ReobservedFrontierKeepsItsFidelityPath) {
  Graph g(0, {});
  observe(g, {nb(1), nb(2)});
  g.set_embedding(1, "e1");
  g.set_embedding(2, "e2");
  g.move_to(1);
  auto fresh = g.update(1, {nb(0), nb(2)}, {"1>0", "1>2"});
  EXPECT_TRUE(fresh.empty());
  EXPECT_EQ(g.fidelity(2), (std::vector<NodeId>{0, 2}));
  EXPECT_TRUE(g.has_edge(1, 2));
}

TEST(Update, ContractViolations) {
  Graph g(0, {});
  EXPECT_THROW(g.update(0, {nb(1), nb(2)}, {"a"}), ContractError);
  EXPECT_THROW(g.update(5, {nb(1)}, {"a"}), ContractError);
  EXPECT_THROW(g.update(0, {nb(kStop)}, {"a"}), ContractError);
}

TEST(FidelityEdges, DirectionalFeaturesAreSeparate) {
  Graph g(0, {});
  observe(g, {nb(1)});
  EXPECT_EQ(g.fidelity_edges(1), (std::vector<std::string>{"0>1"}));
  g.move_to(1);
  observe(g, {nb(0)});
  EXPECT_EQ(g.edge(0, 1).feature, "0>1");
  EXPECT_EQ(g.edge(1, 0).feature, "1>0");
  EXPECT_TRUE(g.fidelity_edges(0).empty());
}

TEST(FidelityEdges, ThreeNodePathGivesThreeEdgesInOrder) {
  Graph g(0, {});
  observe(g, {nb(1)});
  g.move_to(1);
  observe(g, {nb(2)});
  g.move_to(2);
  observe(g, {nb(3)});
  EXPECT_EQ(g.fidelity_edges(3), (std::vector<std::string>{"0>1", "1>2", "2>3"}));
  EXPECT_EQ(g.stack_edges(), (std::vector<std::string>{"0>1", "1>2"}));
}

TEST(Route, TrivialCases) {
  Graph g(0, {});
  observe(g, {nb(1, 2.0)});
  EXPECT_EQ(g.route(0, 0), (std::vector<NodeId>{0}));
  EXPECT_EQ(g.route(0, 1), (std::vector<NodeId>{0, 1}));
  EXPECT_EQ(g.route(1, 0), (std::vector<NodeId>{1, 0}));
  EXPECT_DOUBLE_EQ(g.route_length({0, 1}), 2.0);
  EXPECT_THROW(g.route(0, kStop), RoutingError);
  EXPECT_THROW(g.route(0, 9), RoutingError);
}

TEST(Route, TiesPickSmallestIdSequence) {
  // Square 0-1-3 and 0-2-3 with equal lengths.
  Graph g(0, {});
  observe(g, {nb(2), nb(1)});
  g.move_to(2);
  observe(g, {nb(3)});
  g.move_to(0);
  g.move_to(1);
  observe(g, {nb(3)});
  EXPECT_EQ(g.route(0, 3), (std::vector<NodeId>{0, 1, 3}));
  EXPECT_EQ(g.route(3, 0), (std::vector<NodeId>{3, 1, 0}));
}

TEST(Route, MatchesPathCarryingDijkstraOnRandomGraphs) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const bool integer = trial % 2 == 0;
    auto world = random_world(rng, 5 + static_cast<int>(uniform_index(rng, 20)), integer);
    Graph g(0, {});
    auto observed = explore(g, world, rng, 40);
    const auto& nodes = g.insertion_order();
    for (int q = 0; q < 10; ++q) {
      const NodeId a = nodes[uniform_index(rng, nodes.size())];
      const NodeId b = nodes[uniform_index(rng, nodes.size())];
      auto got = g.route(a, b);
      auto want = path_dijkstra(observed, world, a, b);
      ASSERT_FALSE(want.empty());
      EXPECT_NEAR(path_length(world, got), path_length(world, want), 1e-9);
      EXPECT_EQ(got, want) << "trial " << trial << " " << a << "->" << b;
    }
  }
}

TEST(Route, NoLongerThanAnyEnumeratedPath) {
  Rng rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    auto world = random_world(rng, 3 + static_cast<int>(uniform_index(rng, 8)), trial % 3 == 0);
    Graph g(0, {});
    auto observed = explore(g, world, rng, 30);
    std::map<int, std::set<int>> adj;
    for (NodeId n : g.insertion_order()) adj[n];
    for (auto [a, b] : observed) {
      adj[a].insert(b);
      adj[b].insert(a);
    }
    for (NodeId a : g.insertion_order()) {
      for (NodeId b : g.insertion_order()) {
        std::vector<std::vector<NodeId>> paths;
        std::vector<NodeId> cur = {a};
        std::set<int> on = {a};
        all_simple_paths(adj, a, b, cur, on, paths);
        auto got = g.route(a, b);
        const double len = path_length(world, got);
        double best = 1e18;
        for (const auto& p : paths) {
          EXPECT_LE(len, path_length(world, p) + 1e-9);
          best = std::min(best, path_length(world, p));
        }
        std::vector<NodeId> lex_best;
        for (const auto& p : paths)
          if (path_length(world, p) <= best + 1e-9 && (lex_best.empty() || p < lex_best)) lex_best = p;
        EXPECT_EQ(got, lex_best);
      }
    }
  }
}

TEST(Candidates, FrontiersThenStop) {
  Graph g(0, {});
  auto fresh = g.update(0, {nb(3), nb(1), nb(2)}, {"a", "b", "c"});
  for (NodeId n : fresh) g.set_embedding(n, "path" + std::to_string(n));
  g.set_stop_embedding("stop@0");
  auto c = g.candidates();
  ASSERT_EQ(c.size(), 4u);
  EXPECT_EQ(c[0].id, 3);
  EXPECT_EQ(c[1].id, 1);
  EXPECT_EQ(c[2].id, 2);
  EXPECT_EQ(c[3].id, kStop);
  EXPECT_EQ(c[3].embedding, "stop@0");
}

TEST(Candidates, OnlyStopWhenEverythingVisited) {
  Graph g(0, {});
  observe(g, {nb(1)});
  g.set_embedding(1, "e");
  g.move_to(1);
  observe(g, {nb(0)});
  g.set_stop_embedding("s1");
  auto c = g.candidates();
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].id, kStop);
  g.set_stop_embedding("s1-again");
  EXPECT_EQ(g.candidates()[0].embedding, "s1-again");
}

TEST(Candidates, MissingEmbeddingsAreIntegrityErrors) {
  Graph g(0, {});
  observe(g, {nb(1)});
  g.set_stop_embedding("s");
  EXPECT_THROW(g.candidates(), IntegrityError);
  g.set_embedding(1, "e");
  g.move_to(1);
  EXPECT_THROW(g.candidates(), IntegrityError);  // no stop embedding at node 1 yet
}

TEST(Candidates, StableAcrossReplays) {
  auto run = [] {
    Rng rng(3);
    auto world = random_world(rng, 12, true);
    Graph g(0, {});
    explore(g, world, rng, 15);
    for (NodeId n : g.unvisited()) g.set_embedding(n, "e" + std::to_string(n));
    g.set_stop_embedding("s");
    std::vector<NodeId> ids;
    for (const auto& c : g.candidates()) ids.push_back(c.id);
    return ids;
  };
  EXPECT_EQ(run(), run());
}

TEST(Invariants, EveryNonStartNodeHasAnIncomingEdge) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto world = random_world(rng, 10, false);
    Graph g(0, {});
    explore(g, world, rng, 20);
    for (NodeId n : g.insertion_order()) {
      if (n == g.start()) continue;
      bool incoming = false;
      for (NodeId m : g.insertion_order()) incoming |= g.has_edge(m, n);
      EXPECT_TRUE(incoming);
    }
  }
}
