#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "trajnav/core/error.hpp"
#include "trajnav/env/environment.hpp"

namespace trajnav::graph {

using env::kStop;
using env::NodeId;
using env::Vec3;

inline constexpr double kRouteEps = 1e-9;

// Nodes on the current detour-free walk, bottom = start, top = current.
class FidelityStack {
 public:
  FidelityStack() = default;
  explicit FidelityStack(NodeId start) : nodes_{start} {}

  // Push an unseen node, or pop back down to a node already on the stack.
  void advance(NodeId moved_to) {
    auto it = std::find(nodes_.begin(), nodes_.end(), moved_to);
    if (it == nodes_.end()) {
      nodes_.push_back(moved_to);
    } else {
      nodes_.erase(it + 1, nodes_.end());
    }
  }

  NodeId top() const { return nodes_.back(); }
  std::size_t size() const { return nodes_.size(); }
  bool contains(NodeId n) const { return std::find(nodes_.begin(), nodes_.end(), n) != nodes_.end(); }
  const std::vector<NodeId>& nodes() const { return nodes_; }

 private:
  std::vector<NodeId> nodes_;
};

// The agent's own directed map. `Feature` is the payload stored on edges and
// as per-node path embeddings (a feature row in the model, anything
// copyable in tests).
template <typename Feature>
class ExploreGraph {
 public:
  struct NodeRecord {
    bool visited = false;
    Vec3 coord;
    std::optional<Feature> embedding;
    std::optional<Feature> stop_embedding;
    std::vector<NodeId> fidelity;
  };

  struct EdgeRecord {
    Feature feature;
    double length = 0.0;
  };

  struct Candidate {
    NodeId id = kStop;
    Feature embedding;
  };

  struct Neighbor {
    NodeId id = kStop;
    Vec3 coord;
    double length = 0.0;
  };

  ExploreGraph(NodeId start, const Vec3& coord) : current_(start), stack_(start) {
    if (start == kStop) throw ContractError("start node cannot be the stop sentinel");
    NodeRecord rec;
    rec.visited = true;
    rec.coord = coord;
    rec.fidelity = {start};
    nodes_.emplace(start, std::move(rec));
    order_.push_back(start);
  }

  NodeId current() const { return current_; }
  NodeId start() const { return order_.front(); }
  const FidelityStack& stack() const { return stack_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<NodeId>& insertion_order() const { return order_; }

  bool has_node(NodeId n) const { return nodes_.count(n) > 0; }
  const NodeRecord& node(NodeId n) const {
    auto it = nodes_.find(n);
    if (it == nodes_.end()) throw LookupError("node " + std::to_string(n) + " not in exploration graph");
    return it->second;
  }
  bool visited(NodeId n) const { return node(n).visited; }

  bool has_edge(NodeId from, NodeId to) const { return edges_.count({from, to}) > 0; }
  const EdgeRecord& edge(NodeId from, NodeId to) const {
    auto it = edges_.find({from, to});
    if (it == edges_.end()) {
      throw IntegrityError("no edge " + std::to_string(from) + "->" + std::to_string(to));
    }
    return it->second;
  }

  // Adds unseen neighbours as unvisited nodes and (over)writes the edges
  // current -> neighbour. Returns the unvisited neighbours still lacking a
  // path embedding, in neighbour order.
  std::vector<NodeId> update(NodeId observer, const std::vector<Neighbor>& neighbors,
                             std::vector<Feature> edge_features) {
    if (observer != current_) {
      throw ContractError("update from node " + std::to_string(observer) + " but agent is at " +
                          std::to_string(current_));
    }
    if (edge_features.size() != neighbors.size()) {
      throw ContractError("update: " + std::to_string(edge_features.size()) + " edge features for " +
                          std::to_string(neighbors.size()) + " neighbours");
    }
    std::vector<NodeId> fresh;
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
      const auto& nb = neighbors[i];
      if (nb.id == kStop) throw ContractError("stop sentinel cannot be observed as a neighbour");
      if (nb.id == current_) throw ContractError("node cannot neighbour itself");
      auto it = nodes_.find(nb.id);
      if (it == nodes_.end()) {
        NodeRecord rec;
        rec.coord = nb.coord;
        rec.fidelity = stack_.nodes();
        rec.fidelity.push_back(nb.id);
        it = nodes_.emplace(nb.id, std::move(rec)).first;
        order_.push_back(nb.id);
      }
      edges_.insert_or_assign({current_, nb.id}, EdgeRecord{std::move(edge_features[i]), nb.length});
      if (!it->second.visited && !it->second.embedding) fresh.push_back(nb.id);
    }
    return fresh;
  }

  void set_embedding(NodeId n, Feature embedding) {
    auto& rec = mutable_node(n);
    if (rec.visited) throw ContractError("visited node " + std::to_string(n) + " takes no path embedding");
    rec.embedding = std::move(embedding);
  }

  // Stop candidate's embedding; stored on the current node and replaced on
  // every call.
  void set_stop_embedding(Feature embedding) { mutable_node(current_).stop_embedding = std::move(embedding); }

  // Moves the agent one hop along an edge of the map (either direction).
  void move_to(NodeId next) {
    if (!has_node(next)) throw ContractError("move to unknown node " + std::to_string(next));
    if (!has_edge(current_, next) && !has_edge(next, current_)) {
      throw ContractError("move " + std::to_string(current_) + "->" + std::to_string(next) +
                          " is not along an edge");
    }
    stack_.advance(next);
    current_ = next;
    mutable_node(next).visited = true;
  }

  const std::vector<NodeId>& fidelity(NodeId n) const { return node(n).fidelity; }

  // Edge features along a stored fidelity path, ending with the edge into
  // the last node.
  std::vector<Feature> edges_along(const std::vector<NodeId>& path) const {
    std::vector<Feature> out;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      auto it = edges_.find({path[i], path[i + 1]});
      if (it == edges_.end()) {
        throw IntegrityError("fidelity path is missing edge " + std::to_string(path[i]) + "->" +
                             std::to_string(path[i + 1]));
      }
      out.push_back(it->second.feature);
    }
    return out;
  }

  std::vector<Feature> fidelity_edges(NodeId frontier) const { return edges_along(fidelity(frontier)); }
  std::vector<Feature> stack_edges() const { return edges_along(stack_.nodes()); }

  // Minimum-length route treating every stored edge as two-way; among equal
  // lengths the lexicographically smallest node sequence. With
  // `via_visited`, every intermediate node must already be visited.
  std::vector<NodeId> route(NodeId from, NodeId to, bool via_visited = false) const {
    if (to == kStop || from == kStop) throw RoutingError("cannot route to or from the stop sentinel");
    if (!has_node(from) || !has_node(to)) {
      throw RoutingError("route endpoints " + std::to_string(from) + "," + std::to_string(to) +
                         " not in graph");
    }
    const auto adj = undirected();
    std::map<NodeId, double> dist;
    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[to] = 0.0;
    pq.emplace(0.0, to);
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[u]) continue;
      if (via_visited && u != to && !nodes_.at(u).visited) continue;
      for (auto [v, w] : adj.at(u)) {
        auto it = dist.find(v);
        if (it == dist.end() || d + w < it->second) {
          dist[v] = d + w;
          pq.emplace(d + w, v);
        }
      }
    }
    if (!dist.count(from)) {
      throw RoutingError("node " + std::to_string(to) + " unreachable from " + std::to_string(from));
    }
    std::vector<NodeId> path = {from};
    NodeId u = from;
    while (u != to) {
      NodeId next = kStop;
      for (auto [v, w] : adj.at(u)) {  // ascending id
        auto it = dist.find(v);
        if (via_visited && v != to && !nodes_.at(v).visited) continue;
        if (it != dist.end() && std::abs(dist[u] - (w + it->second)) <= kRouteEps) {
          next = v;
          break;
        }
      }
      if (next == kStop) throw RoutingError("route reconstruction failed at " + std::to_string(u));
      path.push_back(next);
      u = next;
    }
    return path;
  }

  double route_length(const std::vector<NodeId>& path) const {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) total += hop_length(path[i], path[i + 1]);
    return total;
  }

  double hop_length(NodeId a, NodeId b) const {
    auto it = edges_.find({a, b});
    if (it == edges_.end()) it = edges_.find({b, a});
    if (it == edges_.end()) throw IntegrityError("no edge between " + std::to_string(a) + " and " + std::to_string(b));
    return it->second.length;
  }

  std::vector<NodeId> unvisited() const {
    std::vector<NodeId> out;
    for (NodeId n : order_)
      if (!nodes_.at(n).visited) out.push_back(n);
    return out;
  }

  // Unvisited nodes in insertion order, then STOP.
  std::vector<Candidate> candidates() const {
    std::vector<Candidate> out;
    for (NodeId n : unvisited()) {
      const auto& rec = nodes_.at(n);
      if (!rec.embedding) throw IntegrityError("frontier node " + std::to_string(n) + " has no path embedding");
      out.push_back({n, *rec.embedding});
    }
    const auto& here = nodes_.at(current_);
    if (!here.stop_embedding) throw IntegrityError("no stop embedding stored at node " + std::to_string(current_));
    out.push_back({kStop, *here.stop_embedding});
    return out;
  }

 private:
  NodeRecord& mutable_node(NodeId n) {
    auto it = nodes_.find(n);
    if (it == nodes_.end()) throw LookupError("node " + std::to_string(n) + " not in exploration graph");
    return it->second;
  }

  std::map<NodeId, std::vector<std::pair<NodeId, double>>> undirected() const {
    std::map<NodeId, std::map<NodeId, double>> tmp;
    for (const auto& [n, rec] : nodes_) tmp[n];
    for (const auto& [key, e] : edges_) {
      auto [a, b] = key;
      for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
        auto it = tmp[x].find(y);
        if (it == tmp[x].end() || e.length < it->second) tmp[x][y] = e.length;
      }
    }
    std::map<NodeId, std::vector<std::pair<NodeId, double>>> adj;
    for (auto& [n, m] : tmp) adj[n].assign(m.begin(), m.end());
    return adj;
  }

  std::map<NodeId, NodeRecord> nodes_;
  std::vector<NodeId> order_;
  std::map<std::pair<NodeId, NodeId>, EdgeRecord> edges_;
  NodeId current_;
  FidelityStack stack_;
};

template <typename Feature>
std::vector<typename ExploreGraph<Feature>::Neighbor> neighbors_of(const env::Observation& obs) {
  std::vector<typename ExploreGraph<Feature>::Neighbor> out;
  out.reserve(obs.neighbors.size());
  for (const auto& nb : obs.neighbors) out.push_back({nb.id, nb.coord, nb.distance});
  return out;
}

}  // namespace trajnav::graph
