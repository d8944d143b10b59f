#include "trajnav/train/labels.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

#include "trajnav/core/error.hpp"

namespace trajnav::train {

Nearest parse_nearest(const std::string& name) {
  if (name == "metric") return Nearest::Metric;
  if (name == "hops") return Nearest::Hops;
  throw ConfigError("unknown pseudo-label distance '" + name + "' (expected metric or hops)");
}

std::string nearest_name(Nearest n) { return n == Nearest::Metric ? "metric" : "hops"; }

NodeId teacher_label(const StepContext& ctx) {
  const auto& gt = ctx.episode.gt_path;
  const NodeId cur = ctx.graph.current();
  auto it = std::find(gt.begin(), gt.end(), cur);
  if (it == gt.end())
    throw ContractError("teacher label undefined: node " + std::to_string(cur) + " is off the path");
  if (cur == ctx.episode.target) return kStop;
  const NodeId next = *(it + 1);
  if (std::find(ctx.candidates.begin(), ctx.candidates.end(), next) == ctx.candidates.end())
    throw ContractError("teacher label " + std::to_string(next) + " is not a candidate");
  return next;
}

namespace {

double dist(const env::EnvGraph& env, NodeId a, NodeId b, Nearest nearest) {
  return nearest == Nearest::Metric ? env.distance(a, b) : static_cast<double>(env.hops(a, b));
}

}  // namespace

NodeId pseudo_label(const StepContext& ctx, Nearest nearest) {
  const auto& env = ctx.env;
  const auto& ep = ctx.episode;
  const NodeId cur = ctx.graph.current();
  if (ctx.graph.has_node(ep.target) && ctx.graph.visited(ep.target) &&
      env.distance(cur, ep.target) < ep.success_radius)
    return kStop;

  NodeId best = kStop;
  std::tuple<double, std::size_t, NodeId> best_key{std::numeric_limits<double>::infinity(), 0, 0};
  for (NodeId c : ctx.candidates) {
    if (c == kStop) continue;
    auto it = std::find(ep.gt_path.begin(), ep.gt_path.end(), c);
    if (it == ep.gt_path.end()) continue;
    std::tuple<double, std::size_t, NodeId> key{dist(env, cur, c, nearest),
                                                 static_cast<std::size_t>(it - ep.gt_path.begin()), c};
    if (best == kStop || key < best_key) {
      best = c;
      best_key = key;
    }
  }
  if (best != kStop) return best;

  const auto route = env::shortest_path(env, cur, ep.target);
  std::tuple<double, double, NodeId> near_key{std::numeric_limits<double>::infinity(), 0.0, 0};
  for (NodeId c : ctx.candidates) {
    if (c == kStop) continue;
    double d = std::numeric_limits<double>::infinity();
    for (NodeId p : route) d = std::min(d, dist(env, c, p, nearest));
    std::tuple<double, double, NodeId> key{d, dist(env, c, ep.target, nearest), c};
    if (best == kStop || key < near_key) {
      best = c;
      near_key = key;
    }
  }
  return best;
}

planner::Labeler teacher_labeler() { return [](const StepContext& ctx) { return teacher_label(ctx); }; }

planner::Labeler pseudo_labeler(Nearest nearest) {
  return [nearest](const StepContext& ctx) { return pseudo_label(ctx, nearest); };
}

}  // namespace trajnav::train
