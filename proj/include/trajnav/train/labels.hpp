#pragma once

#include <string>

#include "trajnav/planner/agent.hpp"

namespace trajnav::train {

using env::kStop;
using env::NodeId;
using planner::StepContext;

enum class Nearest { Metric, Hops };

Nearest parse_nearest(const std::string& name);
std::string nearest_name(Nearest n);

// Next ground-truth node, or STOP on the target. The agent must be on the
// ground-truth path and that node must be a candidate.
NodeId teacher_label(const StepContext& ctx);

// Supervision for free-running rollouts:
//   1. STOP when the target has been visited and lies within the success radius;
//   2. else the unvisited ground-truth candidate nearest the agent
//      (ties: earlier on the path, then lower id);
//   3. else the candidate nearest the shortest path from here to the target
//      (ties: closer to the target, then lower id);
//   4. else STOP.
NodeId pseudo_label(const StepContext& ctx, Nearest nearest = Nearest::Metric);

planner::Labeler teacher_labeler();
planner::Labeler pseudo_labeler(Nearest nearest = Nearest::Metric);

}  // namespace trajnav::train
