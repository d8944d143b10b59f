#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trajnav/env/geometry.hpp"

namespace trajnav::env {

// Discretised panorama: `headings` evenly spaced world headings times
// `elevations` levels centred on the horizon. View index = level * headings + h.
struct ViewLayout {
  int headings = 12;
  int elevations = 3;
  double elevation_step = kPi / 6.0;

  std::size_t count() const { return static_cast<std::size_t>(headings * elevations); }
  double heading_of(std::size_t view) const;
  double elevation_of(std::size_t view) const;
  // Index of the view whose cone contains the given world direction.
  std::size_t view_for(double world_heading, double elev) const;

  bool operator==(const ViewLayout&) const = default;
};

enum class Layout { Grid, RandomGeometric };

Layout parse_layout(const std::string& name);
std::string layout_name(Layout layout);

struct EnvParams {
  int n_nodes = 25;
  Layout layout = Layout::Grid;
  double spacing = 2.0;
  int landmark_count = 24;
  // Grid only: raise one column by `stair_height` metres.
  bool stairs = true;
  double stair_height = 1.0;
  // Random-geometric only: connection radius in metres (0 = 1.5 * spacing).
  double radius = 0.0;
  int max_attempts = 16;
  ViewLayout views;
  std::size_t feature_dim = 64;
};

// Immutable navigable environment. All pairwise distances and every view
// feature are computed up front so concurrent readers never write.
class EnvGraph {
 public:
  EnvGraph(std::uint64_t seed, double spacing, std::vector<Vec3> coords,
           std::vector<std::pair<NodeId, NodeId>> edges, std::vector<int> landmarks,
           ViewLayout views = {}, std::size_t feature_dim = 64);

  std::size_t size() const { return coords_.size(); }
  std::uint64_t seed() const { return seed_; }
  double spacing() const { return spacing_; }
  const ViewLayout& views() const { return views_; }
  std::size_t feature_dim() const { return feature_dim_; }

  bool contains(NodeId n) const { return n >= 0 && static_cast<std::size_t>(n) < size(); }
  const Vec3& coord(NodeId n) const;
  int landmark(NodeId n) const;
  const std::vector<NodeId>& neighbors(NodeId n) const;
  bool adjacent(NodeId a, NodeId b) const;
  // Undirected edge list with u < v, sorted.
  std::vector<std::pair<NodeId, NodeId>> edges() const;
  const std::vector<int>& landmarks() const { return landmarks_; }
  const std::vector<Vec3>& coords() const { return coords_; }

  // Shortest-path length over edge lengths, and hop count.
  double distance(NodeId a, NodeId b) const;
  int hops(NodeId a, NodeId b) const;

  std::span<const float> view_feature(NodeId n, std::size_t view) const;

 private:
  void check(NodeId n) const;

  std::uint64_t seed_;
  double spacing_;
  std::vector<Vec3> coords_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<int> landmarks_;
  ViewLayout views_;
  std::size_t feature_dim_;
  std::vector<double> metric_;
  std::vector<int> hops_;
  std::vector<float> features_;
};

// Metric shortest path; among equal lengths the smallest node-id sequence.
std::vector<NodeId> shortest_path(const EnvGraph& env, NodeId from, NodeId to);

EnvGraph generate_environment(std::uint64_t seed, const EnvParams& params);

// Hash-seeded unit vectors shared by every environment.
std::vector<float> landmark_embedding(int label, std::size_t dim);
std::vector<float> direction_embedding(std::size_t view, std::size_t dim);

inline constexpr double kDirectionWeight = 0.3;

// Inverse-distance weighted sum of the landmark embeddings of every node
// inside the view's cone, plus the view's direction embedding, normalised.
std::vector<float> synth_view_feature(const EnvGraph& env, NodeId node, std::size_t view);

struct NeighborInfo {
  NodeId id = kStop;
  double heading = 0.0;    // relative to the agent, [-pi, pi)
  double elevation = 0.0;  // [-pi/2, pi/2]
  double distance = 0.0;
  Vec3 coord;
};

struct Observation {
  NodeId node = kStop;
  double agent_heading = 0.0;
  Vec3 coord;
  std::size_t feature_dim = 0;
  std::vector<float> view_features;    // [views, feature_dim]
  std::vector<double> view_heading;    // relative to the agent
  std::vector<double> view_elevation;
  std::vector<NeighborInfo> neighbors;

  std::size_t view_count() const { return view_heading.size(); }
  std::span<const float> view(std::size_t i) const {
    return {view_features.data() + i * feature_dim, feature_dim};
  }
};

Observation observe(const EnvGraph& env, NodeId node, double agent_heading);

}  // namespace trajnav::env
