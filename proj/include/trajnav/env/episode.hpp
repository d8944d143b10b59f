#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "trajnav/core/random.hpp"
#include "trajnav/env/environment.hpp"
#include "trajnav/env/language.hpp"

namespace trajnav::env {

enum class PathFidelity { Shortest, Waypoint };

PathFidelity parse_fidelity(const std::string& name);
std::string fidelity_name(PathFidelity f);

struct EpisodeParams {
  int min_len = 3;  // edges
  int max_len = 6;
  PathFidelity fidelity = PathFidelity::Shortest;
  double radius_factor = 1.5;  // success radius = factor * spacing
  int max_attempts = 200;
};

struct Episode {
  std::string id;
  std::size_t env_index = 0;
  NodeId start = kStop;
  NodeId target = kStop;
  std::vector<NodeId> gt_path;
  std::vector<TokenId> instruction;
  double start_heading = 0.0;
  double success_radius = 3.0;

  bool operator==(const Episode&) const = default;
};

// A shortest path in hops from `from` to `to`; ties between equally short
// predecessors are broken with `rng`.
std::vector<NodeId> random_shortest_path(const EnvGraph& env, NodeId from, NodeId to, Rng& rng);

Episode sample_episode(const EnvGraph& env, std::uint64_t seed, const EpisodeParams& params,
                       std::size_t env_index = 0);

// Throws InvariantError when the episode is inconsistent with `env`.
void validate_episode(const EnvGraph& env, const Episode& ep);

struct DatasetParams {
  int environments = 8;
  int episodes_per_env = 25;
  EnvParams env;
  EpisodeParams episode;
};

struct Dataset {
  std::vector<EnvGraph> envs;
  std::vector<Episode> episodes;

  const EnvGraph& env_of(const Episode& ep) const { return envs.at(ep.env_index); }
};

Dataset make_dataset(std::uint64_t seed, const DatasetParams& params, const std::string& split = "data");

// Line-delimited JSON: one {"type":"env"} record per environment followed by
// one {"type":"episode"} record per episode.
void write_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace trajnav::env
