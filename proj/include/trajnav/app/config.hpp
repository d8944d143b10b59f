#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "trajnav/train/trainer.hpp"

namespace trajnav::app {

enum class Profile { Desk, PaperFaithful };

Profile parse_profile(const std::string& name);
std::string profile_name(Profile p);

// Cost-model scenario: every node has `degree` neighbours and each step
// reveals `new_nodes` of them.
struct BenchParams {
  int steps = 20;
  int degree = 4;
  int new_nodes = 3;
  int text_tokens = 30;
};

struct Config {
  Profile profile = Profile::Desk;
  std::uint64_t seed = 1;
  model::ModelConfig model;
  env::DatasetParams train_data;
  int val_environments = 8;
  int val_episodes_per_env = 25;
  train::PretrainParams pretrain;
  train::FinetuneParams finetune;
  train::EvalOptions eval;
  BenchParams bench;

  env::DatasetParams val_data() const;
};

Config default_config(Profile profile = Profile::Desk);

// INI text: [section] headers and key = value lines. Keys absent from the
// text keep the profile defaults; unknown keys are ConfigErrors. A
// `profile` key under [run] selects the defaults unless `profile` is given.
Config parse_config(std::istream& is, std::optional<Profile> profile = std::nullopt);
Config load_config(const std::filesystem::path& path, std::optional<Profile> profile = std::nullopt);

// Canonical INI rendering of every key; parse_config(to_ini(c)) == c.
std::string to_ini(const Config& c);
std::uint64_t config_hash(const Config& c);
std::string hash_hex(std::uint64_t h);

// Replaces the run seed and every seed derived from it.
void set_seed(Config& c, std::uint64_t seed);
std::uint64_t model_seed(const Config& c);

env::Dataset train_dataset(const Config& c);
env::Dataset val_dataset(const Config& c);

// Throws ConfigError on inconsistent or out-of-range settings, including
// paper-faithful overrides of its pinned architecture.
void validate(const Config& c);

}  // namespace trajnav::app
