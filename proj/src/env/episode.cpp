#include "trajnav/env/episode.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "trajnav/core/error.hpp"

namespace trajnav::env {

using nlohmann::json;

PathFidelity parse_fidelity(const std::string& name) {
  if (name == "shortest") return PathFidelity::Shortest;
  if (name == "waypoint") return PathFidelity::Waypoint;
  throw ConfigError("unknown path fidelity '" + name + "' (expected shortest or waypoint)");
}

std::string fidelity_name(PathFidelity f) {
  return f == PathFidelity::Shortest ? "shortest" : "waypoint";
}

std::vector<NodeId> random_shortest_path(const EnvGraph& env, NodeId from, NodeId to, Rng& rng) {
  std::vector<NodeId> path = {to};
  NodeId cur = to;
  while (cur != from) {
    const int h = env.hops(from, cur);
    std::vector<NodeId> preds;
    for (NodeId p : env.neighbors(cur))
      if (env.hops(from, p) == h - 1) preds.push_back(p);
    cur = preds[uniform_index(rng, preds.size())];
    path.push_back(cur);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

namespace {

bool simple(const std::vector<NodeId>& path) {
  std::set<NodeId> s(path.begin(), path.end());
  return s.size() == path.size();
}

}  // namespace

Episode sample_episode(const EnvGraph& env, std::uint64_t seed, const EpisodeParams& p,
                       std::size_t env_index) {
  if (p.min_len < 1 || p.max_len < p.min_len) {
    throw ConfigError("episode length bounds must satisfy 1 <= min_len <= max_len");
  }
  Rng rng(seed);
  const std::size_t n = env.size();
  for (int attempt = 0; attempt < p.max_attempts; ++attempt) {
    const NodeId start = static_cast<NodeId>(uniform_index(rng, n));
    std::vector<NodeId> path;
    if (p.fidelity == PathFidelity::Shortest) {
      std::vector<NodeId> targets;
      for (std::size_t t = 0; t < n; ++t) {
        const int h = env.hops(start, static_cast<NodeId>(t));
        if (h >= p.min_len && h <= p.max_len) targets.push_back(static_cast<NodeId>(t));
      }
      if (targets.empty()) continue;
      path = random_shortest_path(env, start, targets[uniform_index(rng, targets.size())], rng);
    } else {
      const NodeId mid = static_cast<NodeId>(uniform_index(rng, n));
      const NodeId target = static_cast<NodeId>(uniform_index(rng, n));
      if (mid == start || mid == target || target == start) continue;
      path = random_shortest_path(env, start, mid, rng);
      auto tail = random_shortest_path(env, mid, target, rng);
      path.insert(path.end(), tail.begin() + 1, tail.end());
      const int edges = static_cast<int>(path.size()) - 1;
      if (!simple(path) || edges < p.min_len || edges > p.max_len) continue;
    }

    Episode ep;
    ep.id = std::to_string(seed);
    ep.env_index = env_index;
    ep.start = path.front();
    ep.target = path.back();
    ep.gt_path = std::move(path);
    ep.start_heading = wrap_angle(static_cast<double>(uniform_index(rng, 4)) * kPi / 2.0);
    ep.instruction = speak(env, ep.gt_path, ep.start_heading);
    ep.success_radius = p.radius_factor * env.spacing();
    return ep;
  }
  throw SamplingError("no " + fidelity_name(p.fidelity) + " path with " + std::to_string(p.min_len) +
                      ".." + std::to_string(p.max_len) + " edges after " +
                      std::to_string(p.max_attempts) + " attempts");
}

void validate_episode(const EnvGraph& env, const Episode& ep) {
  if (ep.gt_path.size() < 2) throw InvariantError("episode " + ep.id + ": path too short");
  if (ep.gt_path.front() != ep.start || ep.gt_path.back() != ep.target)
    throw InvariantError("episode " + ep.id + ": path endpoints do not match start/target");
  for (std::size_t i = 0; i + 1 < ep.gt_path.size(); ++i) {
    if (!env.contains(ep.gt_path[i]) || !env.contains(ep.gt_path[i + 1]) ||
        !env.adjacent(ep.gt_path[i], ep.gt_path[i + 1]))
      throw InvariantError("episode " + ep.id + ": consecutive path nodes are not adjacent");
  }
  if (ep.success_radius <= 0.0) throw InvariantError("episode " + ep.id + ": non-positive radius");
}

Dataset make_dataset(std::uint64_t seed, const DatasetParams& params, const std::string& split) {
  Dataset data;
  const std::uint64_t base = derive_seed(seed, fnv1a(split));
  for (int e = 0; e < params.environments; ++e) {
    data.envs.push_back(generate_environment(derive_seed(base, 2 * static_cast<std::uint64_t>(e)), params.env));
    const std::uint64_t ep_base = derive_seed(base, 2 * static_cast<std::uint64_t>(e) + 1);
    for (int j = 0; j < params.episodes_per_env; ++j) {
      auto ep = sample_episode(data.envs.back(), derive_seed(ep_base, static_cast<std::uint64_t>(j)),
                               params.episode, static_cast<std::size_t>(e));
      ep.id = split + "-" + std::to_string(e) + "-" + std::to_string(j);
      data.episodes.push_back(std::move(ep));
    }
  }
  return data;
}

namespace {

json env_record(std::size_t index, const EnvGraph& env) {
  json nodes = json::array();
  for (const auto& c : env.coords()) nodes.push_back({c.x, c.y, c.z});
  json edges = json::array();
  for (auto [u, v] : env.edges()) edges.push_back({u, v});
  const auto& views = env.views();
  return json{{"type", "env"},
              {"index", index},
              {"seed", env.seed()},
              {"spacing", env.spacing()},
              {"nodes", nodes},
              {"edges", edges},
              {"landmarks", env.landmarks()},
              {"views",
               {{"headings", views.headings},
                {"elevations", views.elevations},
                {"elevation_step", views.elevation_step}}},
              {"feature_dim", env.feature_dim()}};
}

EnvGraph parse_env(const json& j) {
  std::vector<Vec3> coords;
  for (const auto& c : j.at("nodes")) coords.push_back({c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()});
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
  ViewLayout views;
  const auto& jv = j.at("views");
  views.headings = jv.at("headings").get<int>();
  views.elevations = jv.at("elevations").get<int>();
  views.elevation_step = jv.at("elevation_step").get<double>();
  return EnvGraph(j.at("seed").get<std::uint64_t>(), j.at("spacing").get<double>(), std::move(coords),
                  std::move(edges), j.at("landmarks").get<std::vector<int>>(), views,
                  j.at("feature_dim").get<std::size_t>());
}

json episode_record(const Episode& ep) {
  return json{{"type", "episode"},
              {"id", ep.id},
              {"env", ep.env_index},
              {"start", ep.start},
              {"target", ep.target},
              {"path", ep.gt_path},
              {"instruction", ep.instruction},
              {"text", Vocab::standard().decode(ep.instruction)},
              {"heading", ep.start_heading},
              {"radius", ep.success_radius}};
}

Episode parse_episode(const json& j) {
  Episode ep;
  ep.id = j.at("id").get<std::string>();
  ep.env_index = j.at("env").get<std::size_t>();
  ep.start = j.at("start").get<NodeId>();
  ep.target = j.at("target").get<NodeId>();
  ep.gt_path = j.at("path").get<std::vector<NodeId>>();
  ep.instruction = j.at("instruction").get<std::vector<TokenId>>();
  ep.start_heading = j.at("heading").get<double>();
  ep.success_radius = j.at("radius").get<double>();
  return ep;
}

}  // namespace

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < data.envs.size(); ++i) os << env_record(i, data.envs[i]).dump() << '\n';
  for (const auto& ep : data.episodes) os << episode_record(ep).dump() << '\n';
  if (!os) throw IoError("failed writing " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "env") {
        if (j.at("index").get<std::size_t>() != data.envs.size())
          throw IoError("environment records out of order");
        data.envs.push_back(parse_env(j));
      } else if (type == "episode") {
        data.episodes.push_back(parse_episode(j));
      } else {
        throw IoError("unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  for (const auto& ep : data.episodes) {
    if (ep.env_index >= data.envs.size())
      throw IoError("episode " + ep.id + " references missing environment");
    validate_episode(data.envs[ep.env_index], ep);
  }
  return data;
}

}  // namespace trajnav::env
