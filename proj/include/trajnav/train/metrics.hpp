#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "trajnav/env/episode.hpp"

namespace trajnav::train {

using env::NodeId;

struct EpisodeMetrics {
  std::string episode_id;
  double tl = 0.0;
  double ne = 0.0;
  double sr = 0.0;
  double spl = 0.0;
  double ndtw = 0.0;
  double sdtw = 0.0;
  std::size_t steps = 0;
  bool truncated = false;
};

struct MetricsReport {
  std::size_t episodes = 0;
  double tl = 0.0;
  double ne = 0.0;
  double sr = 0.0;
  double spl = 0.0;
  double ndtw = 0.0;
  double sdtw = 0.0;
  std::size_t truncated = 0;
};

// Dynamic time warping between two point sequences under Euclidean cost.
double dtw(const std::vector<env::Vec3>& a, const std::vector<env::Vec3>& b);
double dtw(const env::EnvGraph& env, const std::vector<NodeId>& a, const std::vector<NodeId>& b);

// `trajectory` lists every node occupied, start first; `length` is the
// executed route length.
EpisodeMetrics compute_metrics(const env::EnvGraph& env, const env::Episode& ep,
                               const std::vector<NodeId>& trajectory, double length);

MetricsReport aggregate(const std::vector<EpisodeMetrics>& per_episode);

// Throws MetricsError unless every value is in range, SPL <= SR and
// sDTW <= nDTW <= 1.
void check_invariants(const EpisodeMetrics& m);

std::string report_json(const MetricsReport& r, const std::string& extra_key = "",
                        const std::string& extra_value = "");
void print_table(std::ostream& os, const std::vector<std::pair<std::string, MetricsReport>>& rows);

}  // namespace trajnav::train
