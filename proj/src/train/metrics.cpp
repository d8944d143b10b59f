#include "trajnav/train/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "trajnav/core/error.hpp"

namespace trajnav::train {

double dtw(const std::vector<env::Vec3>& a, const std::vector<env::Vec3>& b) {
  if (a.empty() || b.empty()) throw MetricsError("dtw of an empty sequence");
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d((n + 1) * (m + 1), inf);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return d[i * (m + 1) + j]; };
  at(0, 0) = 0.0;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      at(i, j) = env::distance(a[i - 1], b[j - 1]) + std::min({at(i - 1, j), at(i, j - 1), at(i - 1, j - 1)});
  return at(n, m);
}

double dtw(const env::EnvGraph& env, const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  std::vector<env::Vec3> pa, pb;
  for (NodeId n : a) pa.push_back(env.coord(n));
  for (NodeId n : b) pb.push_back(env.coord(n));
  return dtw(pa, pb);
}

EpisodeMetrics compute_metrics(const env::EnvGraph& env, const env::Episode& ep,
                               const std::vector<NodeId>& trajectory, double length) {
  if (trajectory.empty()) throw MetricsError("episode " + ep.id + ": empty trajectory");
  EpisodeMetrics m;
  m.episode_id = ep.id;
  m.tl = length;
  m.ne = env.distance(trajectory.back(), ep.target);
  m.sr = m.ne < ep.success_radius ? 1.0 : 0.0;
  const double shortest = env.distance(ep.start, ep.target);
  const double denom = std::max(m.tl, shortest);
  m.spl = denom > 0.0 ? m.sr * shortest / denom : m.sr;
  m.ndtw = std::exp(-dtw(env, trajectory, ep.gt_path) /
                    (static_cast<double>(ep.gt_path.size()) * ep.success_radius));
  m.sdtw = m.sr * m.ndtw;
  return m;
}

MetricsReport aggregate(const std::vector<EpisodeMetrics>& per_episode) {
  MetricsReport r;
  r.episodes = per_episode.size();
  if (per_episode.empty()) return r;
  for (const auto& m : per_episode) {
    r.tl += m.tl;
    r.ne += m.ne;
    r.sr += m.sr;
    r.spl += m.spl;
    r.ndtw += m.ndtw;
    r.sdtw += m.sdtw;
    r.truncated += m.truncated ? 1 : 0;
  }
  const double n = static_cast<double>(r.episodes);
  r.tl /= n;
  r.ne /= n;
  r.sr /= n;
  r.spl /= n;
  r.ndtw /= n;
  r.sdtw /= n;
  return r;
}

void check_invariants(const EpisodeMetrics& m) {
  auto fail = [&](const std::string& what) { throw MetricsError("episode " + m.episode_id + ": " + what); };
  for (double v : {m.tl, m.ne, m.sr, m.spl, m.ndtw, m.sdtw})
    if (!std::isfinite(v)) fail("non-finite metric");
  if (m.tl < 0.0 || m.ne < 0.0) fail("negative length");
  if (m.sr != 0.0 && m.sr != 1.0) fail("SR not in {0,1}");
  if (m.spl < 0.0 || m.spl > m.sr) fail("SPL outside [0, SR]");
  if (m.ndtw < 0.0 || m.ndtw > 1.0) fail("nDTW outside [0,1]");
  if (m.sdtw < 0.0 || m.sdtw > m.ndtw) fail("sDTW outside [0, nDTW]");
}

std::string report_json(const MetricsReport& r, const std::string& extra_key, const std::string& extra_value) {
  nlohmann::json j{{"episodes", r.episodes}, {"tl", r.tl},     {"ne", r.ne},     {"sr", r.sr},
                   {"spl", r.spl},           {"ndtw", r.ndtw}, {"sdtw", r.sdtw}, {"truncated", r.truncated}};
  if (!extra_key.empty()) j[extra_key] = extra_value;
  return j.dump();
}

void print_table(std::ostream& os, const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %6s %7s %7s %6s %6s %6s %6s\n", "agent", "n", "TL", "NE", "SR", "SPL",
                "nDTW", "sDTW");
  os << line;
  for (const auto& [name, r] : rows) {
    std::snprintf(line, sizeof line, "%-12s %6zu %7.2f %7.2f %6.3f %6.3f %6.3f %6.3f\n", name.c_str(), r.episodes,
                  r.tl, r.ne, r.sr, r.spl, r.ndtw, r.sdtw);
    os << line;
  }
}

}  // namespace trajnav::train
