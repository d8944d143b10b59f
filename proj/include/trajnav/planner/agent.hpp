#pragma once

#include <functional>
#include <string>
#include <vector>

#include "trajnav/env/episode.hpp"
#include "trajnav/graph/explore_graph.hpp"
#include "trajnav/model/navigation_model.hpp"

namespace trajnav::planner {

using env::kStop;
using env::NodeId;
using Feature = nn::Tensor<float>;
using Graph = graph::ExploreGraph<Feature>;
using Model = model::NavigationModel<float>;

enum class Policy {
  Greedy,   // argmax of the candidate distribution
  Sample,   // draw from the candidate distribution
  Follow,   // take the supervision label
  Uniform,  // uniform over candidates, ignores the model
};

Policy parse_policy(const std::string& name);
std::string policy_name(Policy policy);

// What a labeler sees when asked for the supervised action.
struct StepContext {
  const env::EnvGraph& env;
  const env::Episode& episode;
  const Graph& graph;
  const std::vector<NodeId>& candidates;  // STOP last
};

// Returns the supervised candidate (a frontier id or kStop).
using Labeler = std::function<NodeId(const StepContext&)>;

struct RunOptions {
  Policy policy = Policy::Greedy;
  Labeler labeler;          // optional; required by Follow
  Rng* rng = nullptr;       // Sample and Uniform
  int step_budget = 0;      // 0: 2 * |gt_path| + 6
  bool record_loss = false; // accumulate cross entropy against the labels
  // Called once per step after every candidate has its embedding.
  std::function<void(const StepContext&)> inspect;
};

struct StepRecord {
  int step = 0;
  NodeId node = kStop;
  std::uint64_t observation_digest = 0;
  std::vector<NodeId> candidates;
  std::vector<double> scores;
  std::vector<double> probs;
  NodeId label = kStop;
  bool labelled = false;
  NodeId chosen = kStop;
  std::vector<NodeId> route;
  std::vector<NodeId> stack;
  bool forced_stop = false;
};

struct RunResult {
  std::vector<NodeId> trajectory;  // every node occupied, start first
  double length = 0.0;
  bool truncated = false;
  std::vector<StepRecord> steps;
  nn::Tensor<float> loss_sum;  // sum of per-step cross entropies (when recorded)
  std::size_t loss_terms = 0;

  NodeId final_node() const { return trajectory.back(); }
  nn::Tensor<float> mean_loss() const;
};

int default_step_budget(const env::Episode& ep);

// Runs one episode. `model` may be null for Follow and Uniform policies, in
// which case no features are computed.
RunResult run_episode(const Model* model, const env::EnvGraph& env, const env::Episode& ep,
                      const RunOptions& options);

}  // namespace trajnav::planner
