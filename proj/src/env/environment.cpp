#include "trajnav/env/environment.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <set>

#include "trajnav/core/error.hpp"
#include "trajnav/core/random.hpp"

namespace trajnav::env {

double ViewLayout::heading_of(std::size_t view) const {
  const int h = static_cast<int>(view) % headings;
  return wrap_angle(2.0 * kPi * h / headings);
}

double ViewLayout::elevation_of(std::size_t view) const {
  const int level = static_cast<int>(view) / headings;
  return (level - (elevations - 1) / 2.0) * elevation_step;
}

std::size_t ViewLayout::view_for(double world_heading, double elev) const {
  const double width = 2.0 * kPi / headings;
  double a = world_heading + width / 2.0;
  a -= 2.0 * kPi * std::floor(a / (2.0 * kPi));
  int h = static_cast<int>(std::floor(a / width));
  h = std::clamp(h, 0, headings - 1);
  int level = static_cast<int>(std::floor(elev / elevation_step + elevations / 2.0));
  level = std::clamp(level, 0, elevations - 1);
  return static_cast<std::size_t>(level * headings + h);
}

Layout parse_layout(const std::string& name) {
  if (name == "grid") return Layout::Grid;
  if (name == "random-geometric") return Layout::RandomGeometric;
  throw ConfigError("unknown layout '" + name + "' (expected grid or random-geometric)");
}

std::string layout_name(Layout layout) {
  return layout == Layout::Grid ? "grid" : "random-geometric";
}

namespace {

std::vector<float> unit_gaussian(std::uint64_t seed, std::size_t dim) {
  Rng rng(seed);
  std::vector<float> v(dim);
  double norm = 0.0;
  std::vector<double> raw(dim);
  for (auto& x : raw) {
    x = standard_normal(rng);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (std::size_t i = 0; i < dim; ++i) v[i] = static_cast<float>(raw[i] / norm);
  return v;
}

bool connected(std::size_t n, const std::vector<std::vector<NodeId>>& adj) {
  if (n == 0) return false;
  std::vector<char> seen(n, 0);
  std::vector<NodeId> stack = {0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (NodeId v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n;
}

}  // namespace

std::vector<float> landmark_embedding(int label, std::size_t dim) {
  return unit_gaussian(derive_seed(fnv1a("landmark"), static_cast<std::uint64_t>(label)), dim);
}

std::vector<float> direction_embedding(std::size_t view, std::size_t dim) {
  return unit_gaussian(derive_seed(fnv1a("view-direction"), view), dim);
}

EnvGraph::EnvGraph(std::uint64_t seed, double spacing, std::vector<Vec3> coords,
                   std::vector<std::pair<NodeId, NodeId>> edges, std::vector<int> landmarks,
                   ViewLayout views, std::size_t feature_dim)
    : seed_(seed),
      spacing_(spacing),
      coords_(std::move(coords)),
      landmarks_(std::move(landmarks)),
      views_(views),
      feature_dim_(feature_dim) {
  const std::size_t n = coords_.size();
  if (n < 2) throw InvariantError("environment needs at least 2 nodes, got " + std::to_string(n));
  if (landmarks_.size() != n) throw InvariantError("landmark count does not match node count");
  if (views_.headings < 1 || views_.elevations < 1) throw ConfigError("view layout must be non-empty");
  if (feature_dim_ == 0) throw ConfigError("feature dimension must be positive");
  for (int l : landmarks_)
    if (l < 0) throw InvariantError("negative landmark label");
  {
    std::set<std::tuple<double, double, double>> distinct;
    for (const auto& c : coords_) distinct.emplace(c.x, c.y, c.z);
    if (distinct.size() != n) throw InvariantError("node coordinates must be distinct");
  }

  adjacency_.assign(n, {});
  std::set<std::pair<NodeId, NodeId>> seen;
  for (auto [u, v] : edges) {
    if (!contains(u) || !contains(v)) throw InvariantError("edge references an unknown node");
    if (u == v) throw InvariantError("self-loop at node " + std::to_string(u));
    if (!seen.emplace(std::min(u, v), std::max(u, v)).second) continue;
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
  if (!connected(n, adjacency_)) throw InvariantError("environment graph is not connected");

  // All-pairs metric (Dijkstra) and hop (BFS) distances.
  metric_.assign(n * n, std::numeric_limits<double>::infinity());
  hops_.assign(n * n, -1);
  for (std::size_t s = 0; s < n; ++s) {
    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    double* dist = &metric_[s * n];
    dist[s] = 0.0;
    pq.emplace(0.0, static_cast<NodeId>(s));
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[u]) continue;
      for (NodeId v : adjacency_[u]) {
        const double nd = d + env::distance(coords_[u], coords_[v]);
        if (nd < dist[v]) {
          dist[v] = nd;
          pq.emplace(nd, v);
        }
      }
    }
    int* hop = &hops_[s * n];
    std::queue<NodeId> q;
    hop[s] = 0;
    q.push(static_cast<NodeId>(s));
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop();
      for (NodeId v : adjacency_[u]) {
        if (hop[v] < 0) {
          hop[v] = hop[u] + 1;
          q.push(v);
        }
      }
    }
  }

  const std::size_t k = views_.count();
  features_.assign(n * k * feature_dim_, 0.0f);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t view = 0; view < k; ++view) {
      auto f = synth_view_feature(*this, static_cast<NodeId>(u), view);
      std::copy(f.begin(), f.end(), features_.begin() + (u * k + view) * feature_dim_);
    }
  }
}

void EnvGraph::check(NodeId n) const {
  if (!contains(n)) {
    throw LookupError("unknown node " + std::to_string(n) + " (environment has " +
                      std::to_string(size()) + " nodes)");
  }
}

const Vec3& EnvGraph::coord(NodeId n) const {
  check(n);
  return coords_[n];
}

int EnvGraph::landmark(NodeId n) const {
  check(n);
  return landmarks_[n];
}

const std::vector<NodeId>& EnvGraph::neighbors(NodeId n) const {
  check(n);
  return adjacency_[n];
}

bool EnvGraph::adjacent(NodeId a, NodeId b) const {
  check(a);
  check(b);
  return std::binary_search(adjacency_[a].begin(), adjacency_[a].end(), b);
}

std::vector<std::pair<NodeId, NodeId>> EnvGraph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (std::size_t u = 0; u < size(); ++u)
    for (NodeId v : adjacency_[u])
      if (static_cast<NodeId>(u) < v) out.emplace_back(static_cast<NodeId>(u), v);
  return out;
}

double EnvGraph::distance(NodeId a, NodeId b) const {
  check(a);
  check(b);
  return metric_[a * size() + b];
}

int EnvGraph::hops(NodeId a, NodeId b) const {
  check(a);
  check(b);
  return hops_[a * size() + b];
}

std::span<const float> EnvGraph::view_feature(NodeId n, std::size_t view) const {
  check(n);
  if (view >= views_.count()) throw IndexError("view index " + std::to_string(view) + " out of range");
  return {features_.data() + (n * views_.count() + view) * feature_dim_, feature_dim_};
}

std::vector<NodeId> shortest_path(const EnvGraph& env, NodeId from, NodeId to) {
  std::vector<NodeId> path = {from};
  NodeId u = from;
  while (u != to) {
    NodeId next = kStop;
    for (NodeId v : env.neighbors(u)) {
      const double via = distance(env.coord(u), env.coord(v)) + env.distance(v, to);
      if (std::abs(via - env.distance(u, to)) <= 1e-9) {
        next = v;
        break;
      }
    }
    if (next == kStop) throw InvariantError("shortest path reconstruction failed");
    path.push_back(next);
    u = next;
  }
  return path;
}

std::vector<float> synth_view_feature(const EnvGraph& env, NodeId node, std::size_t view) {
  const auto& views = env.views();
  if (view >= views.count()) throw IndexError("view index " + std::to_string(view) + " out of range");
  const std::size_t dim = env.feature_dim();
  const Vec3& here = env.coords().at(node);

  std::vector<double> acc(dim, 0.0);
  std::map<int, std::vector<float>> landmark_cache;
  for (std::size_t m = 0; m < env.size(); ++m) {
    if (static_cast<NodeId>(m) == node) continue;
    const Vec3& there = env.coords()[m];
    if (views.view_for(bearing(here, there), elevation(here, there)) != view) continue;
    const int label = env.landmarks()[m];
    auto it = landmark_cache.find(label);
    if (it == landmark_cache.end()) it = landmark_cache.emplace(label, landmark_embedding(label, dim)).first;
    const double w = 1.0 / distance(here, there);
    for (std::size_t i = 0; i < dim; ++i) acc[i] += w * it->second[i];
  }
  const auto dir = direction_embedding(view, dim);
  double norm = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    acc[i] += kDirectionWeight * dir[i];
    norm += acc[i] * acc[i];
  }
  norm = std::sqrt(norm);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] / norm);
  return out;
}

EnvGraph generate_environment(std::uint64_t seed, const EnvParams& p) {
  if (p.n_nodes < 2) throw ConfigError("n_nodes must be at least 2, got " + std::to_string(p.n_nodes));
  if (p.spacing <= 0.0) throw ConfigError("spacing must be positive");
  if (p.landmark_count < 1) throw ConfigError("landmark_count must be positive");
  const std::size_t n = static_cast<std::size_t>(p.n_nodes);

  for (int attempt = 0; attempt < std::max(1, p.max_attempts); ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    std::vector<Vec3> coords(n);
    std::vector<std::pair<NodeId, NodeId>> edges;

    if (p.layout == Layout::Grid) {
      const std::size_t side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
      const std::size_t stair_col = p.stairs && side >= 3 ? uniform_index(rng, side) : side;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t row = i / side, col = i % side;
        coords[i] = {col * p.spacing, row * p.spacing, col == stair_col ? p.stair_height : 0.0};
        if (col > 0) edges.emplace_back(static_cast<NodeId>(i - 1), static_cast<NodeId>(i));
        if (row > 0) edges.emplace_back(static_cast<NodeId>(i - side), static_cast<NodeId>(i));
      }
    } else {
      const double extent = p.spacing * std::sqrt(static_cast<double>(n));
      const double radius = p.radius > 0.0 ? p.radius : 1.5 * p.spacing;
      for (auto& c : coords) c = {uniform01(rng) * extent, uniform01(rng) * extent, 0.0};
      for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v)
          if (distance(coords[u], coords[v]) <= radius)
            edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
      std::vector<std::vector<NodeId>> adj(n);
      for (auto [u, v] : edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
      }
      if (!connected(n, adj)) continue;
    }

    std::vector<int> landmarks(n);
    for (auto& l : landmarks) l = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(p.landmark_count)));
    return EnvGraph(seed, p.spacing, std::move(coords), std::move(edges), std::move(landmarks), p.views,
                    p.feature_dim);
  }
  throw GenerationError("no connected " + layout_name(p.layout) + " environment with " +
                        std::to_string(n) + " nodes after " + std::to_string(p.max_attempts) +
                        " attempts (seed " + std::to_string(seed) + ")");
}

Observation observe(const EnvGraph& env, NodeId node, double agent_heading) {
  if (!env.contains(node)) throw LookupError("observe: unknown node " + std::to_string(node));
  Observation obs;
  obs.node = node;
  obs.agent_heading = agent_heading;
  obs.coord = env.coord(node);
  obs.feature_dim = env.feature_dim();
  const auto& views = env.views();
  const std::size_t k = views.count();
  obs.view_features.resize(k * obs.feature_dim);
  obs.view_heading.resize(k);
  obs.view_elevation.resize(k);
  for (std::size_t v = 0; v < k; ++v) {
    auto f = env.view_feature(node, v);
    std::copy(f.begin(), f.end(), obs.view_features.begin() + v * obs.feature_dim);
    obs.view_heading[v] = wrap_angle(views.heading_of(v) - agent_heading);
    obs.view_elevation[v] = views.elevation_of(v);
  }
  for (NodeId m : env.neighbors(node)) {
    const Vec3& there = env.coord(m);
    obs.neighbors.push_back({m, wrap_angle(bearing(obs.coord, there) - agent_heading),
                             elevation(obs.coord, there), distance(obs.coord, there), there});
  }
  return obs;
}

}  // namespace trajnav::env
