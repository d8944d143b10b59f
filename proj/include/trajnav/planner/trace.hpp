#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "trajnav/planner/agent.hpp"

namespace trajnav::planner {

inline constexpr int kTraceSchemaVersion = 1;

struct TraceHeader {
  int schema_version = kTraceSchemaVersion;
  std::string episode_id;
  std::size_t env_index = 0;
  std::uint64_t env_seed = 0;
  std::vector<env::TokenId> instruction;
  std::vector<NodeId> gt_path;
  NodeId start = kStop;
  NodeId target = kStop;
  std::string policy;
  int step_budget = 0;
  std::string config_hash;
};

struct Trace {
  TraceHeader header;
  std::vector<StepRecord> steps;
};

TraceHeader make_header(const env::EnvGraph& env, const env::Episode& ep, Policy policy, int step_budget,
                        const std::string& config_hash = "");

// One header line followed by one line per step.
void write_trace(std::ostream& os, const TraceHeader& header, const std::vector<StepRecord>& steps);
void write_trace(const std::filesystem::path& path, const TraceHeader& header,
                 const std::vector<StepRecord>& steps);
Trace read_trace(std::istream& is);
Trace read_trace(const std::filesystem::path& path);

struct ReplayReport {
  std::size_t steps = 0;
  double max_score_diff = 0.0;
  bool actions_match = true;
};

// Re-runs the recorded actions with `model` and compares per-step scores.
ReplayReport replay(const Model& model, const env::EnvGraph& env, const env::Episode& ep, const Trace& trace);

}  // namespace trajnav::planner
