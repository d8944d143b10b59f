#include "trajnav/app/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "trajnav/core/error.hpp"
#include "trajnav/env/language.hpp"

namespace trajnav::app {

namespace pt = boost::property_tree;

Profile parse_profile(const std::string& name) {
  if (name == "desk") return Profile::Desk;
  if (name == "paper-faithful") return Profile::PaperFaithful;
  throw ConfigError("unknown profile '" + name + "' (expected desk or paper-faithful)");
}

std::string profile_name(Profile p) { return p == Profile::Desk ? "desk" : "paper-faithful"; }

env::DatasetParams Config::val_data() const {
  auto p = train_data;
  p.environments = val_environments;
  p.episodes_per_env = val_episodes_per_env;
  return p;
}

namespace {

struct Field {
  std::string section;
  std::string key;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename N>
N parse_number(const std::string& section, const std::string& key, const std::string& text) {
  std::istringstream is(text);
  N v{};
  is >> v;
  if (!is || !(is >> std::ws).eof())
    throw ConfigError("[" + section + "] " + key + ": '" + text + "' is not a valid number");
  return v;
}

bool parse_bool(const std::string& section, const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("[" + section + "] " + key + ": '" + text + "' is not true or false");
}

template <typename N>
Field number(std::string section, std::string key, N& ref) {
  return {section, key,
          [&ref] {
            if constexpr (std::is_floating_point_v<N>) return fmt(ref);
            else return std::to_string(ref);
          },
          [&ref, section, key](const std::string& s) { ref = parse_number<N>(section, key, s); }};
}

Field flag(std::string section, std::string key, bool& ref) {
  return {section, key, [&ref] { return std::string(ref ? "true" : "false"); },
          [&ref, section, key](const std::string& s) { ref = parse_bool(section, key, s); }};
}

template <typename E>
Field choice(std::string section, std::string key, E& ref, std::string (*name)(E), E (*parse)(const std::string&)) {
  return {section, key, [&ref, name] { return name(ref); }, [&ref, parse](const std::string& s) { ref = parse(s); }};
}

std::vector<Field> fields(Config& c) {
  auto& m = c.model;
  auto& d = c.train_data;
  auto& e = d.env;
  auto& pre = c.pretrain;
  auto& ft = c.finetune;
  return {
      choice("run", "profile", c.profile, profile_name, parse_profile),
      number("run", "seed", c.seed),
      number("model", "dim", m.dim),
      number("model", "heads", m.heads),
      number("model", "ffn_mult", m.ffn_mult),
      number("model", "dropout", m.dropout),
      number("model", "text_layers", m.text_layers),
      number("model", "ope_layers", m.edge_layers),
      number("model", "mam_layers", m.match_layers),
      number("model", "ccm_layers", m.compare_layers),
      number("model", "mlm_layers", m.mlm_layers),
      choice("model", "ccm", m.compare, model::compare_mode_name, model::parse_compare_mode),
      choice("env", "layout", e.layout, env::layout_name, env::parse_layout),
      number("env", "nodes", e.n_nodes),
      number("env", "spacing", e.spacing),
      number("env", "landmarks", e.landmark_count),
      flag("env", "stairs", e.stairs),
      number("env", "stair_height", e.stair_height),
      number("env", "radius", e.radius),
      number("env", "headings", e.views.headings),
      number("env", "elevations", e.views.elevations),
      number("env", "feature_dim", e.feature_dim),
      number("data", "train_envs", d.environments),
      number("data", "train_episodes_per_env", d.episodes_per_env),
      number("data", "val_envs", c.val_environments),
      number("data", "val_episodes_per_env", c.val_episodes_per_env),
      number("data", "min_len", d.episode.min_len),
      number("data", "max_len", d.episode.max_len),
      choice("data", "fidelity", d.episode.fidelity, env::fidelity_name, env::parse_fidelity),
      number("data", "radius_factor", d.episode.radius_factor),
      number("pretrain", "steps", pre.steps),
      number("pretrain", "batch", pre.batch),
      number("pretrain", "lr", pre.optim.lr),
      number("pretrain", "weight_decay", pre.optim.weight_decay),
      number("pretrain", "grad_clip", pre.optim.grad_clip),
      number("pretrain", "mask_rate", pre.mask_rate),
      number("pretrain", "log_every", pre.log_every),
      number("train", "iterations", ft.iterations),
      number("train", "batch", ft.batch),
      number("train", "lr", ft.optim.lr),
      number("train", "weight_decay", ft.optim.weight_decay),
      number("train", "grad_clip", ft.optim.grad_clip),
      number("train", "lambda", ft.lambda),
      choice("train", "pseudo_distance", ft.nearest, train::nearest_name, train::parse_nearest),
      number("train", "step_budget", ft.step_budget),
      number("train", "log_every", ft.log_every),
      number("train", "eval_every", ft.eval_every),
      number("eval", "step_budget", c.eval.step_budget),
      choice("eval", "policy", c.eval.policy, planner::policy_name, planner::parse_policy),
      number("bench", "steps", c.bench.steps),
      number("bench", "degree", c.bench.degree),
      number("bench", "new_nodes", c.bench.new_nodes),
      number("bench", "text_tokens", c.bench.text_tokens),
  };
}

void sync_derived(Config& c) {
  c.model.vocab_size = env::Vocab::standard().size();
  c.model.raw_dim = c.train_data.env.feature_dim;
  c.pretrain.seed = derive_seed(c.seed, fnv1a("pretrain"));
  c.finetune.seed = derive_seed(c.seed, fnv1a("train"));
  c.eval.seed = derive_seed(c.seed, fnv1a("eval"));
}

}  // namespace

Config default_config(Profile profile) {
  Config c;
  c.profile = profile;
  c.model.vocab_size = env::Vocab::standard().size();
  c.train_data.environments = 80;
  c.train_data.episodes_per_env = 25;
  c.pretrain.steps = 300;
  c.finetune.iterations = 1500;
  if (profile == Profile::PaperFaithful) {
    c.model.dim = 768;
    c.model.heads = 12;
    c.model.ffn_mult = 4;
    c.model.edge_layers = 2;
    c.model.match_layers = 4;
    c.model.compare_layers = 1;
    c.train_data.env.feature_dim = 768;
  }
  sync_derived(c);
  return c;
}

Config parse_config(std::istream& is, std::optional<Profile> profile) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!profile) {
    if (auto p = tree.get_optional<std::string>("run.profile")) profile = parse_profile(*p);
  }
  Config c = default_config(profile.value_or(Profile::Desk));
  Config pinned = c;
  auto table = fields(c);
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("config: key '" + section + "' outside any section");
    for (const auto& [key, value] : body) {
      auto it = std::find_if(table.begin(), table.end(),
                             [&](const Field& f) { return f.section == section && f.key == key; });
      if (it == table.end()) throw ConfigError("config: unknown key [" + section + "] " + key);
      if (section == "run" && key == "profile") continue;
      it->set(value.data());
    }
  }
  c.profile = pinned.profile;
  sync_derived(c);
  validate(c);
  return c;
}

Config load_config(const std::filesystem::path& path, std::optional<Profile> profile) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  return parse_config(is, profile);
}

std::string to_ini(const Config& config) {
  Config c = config;
  std::ostringstream os;
  std::string section;
  for (const auto& f : fields(c)) {
    if (f.section != section) {
      if (!section.empty()) os << '\n';
      section = f.section;
      os << '[' << section << "]\n";
    }
    os << f.key << " = " << f.get() << '\n';
  }
  return os.str();
}

void set_seed(Config& c, std::uint64_t seed) {
  c.seed = seed;
  sync_derived(c);
}

std::uint64_t model_seed(const Config& c) { return derive_seed(c.seed, fnv1a("model")); }

env::Dataset train_dataset(const Config& c) { return env::make_dataset(c.seed, c.train_data, "train"); }

env::Dataset val_dataset(const Config& c) { return env::make_dataset(c.seed, c.val_data(), "val"); }

std::uint64_t config_hash(const Config& c) { return fnv1a(to_ini(c)); }

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void validate(const Config& c) {
  auto fail = [](const std::string& what) { throw ConfigError("config: " + what); };
  const auto& m = c.model;
  if (m.dim == 0 || m.heads == 0 || m.dim % m.heads != 0) fail("model dim must be a positive multiple of heads");
  if (m.ffn_mult == 0) fail("ffn_mult must be positive");
  if (m.dropout < 0.0 || m.dropout >= 1.0) fail("dropout must lie in [0, 1)");
  if (m.text_layers == 0 || m.edge_layers == 0 || m.match_layers == 0 || m.mlm_layers == 0)
    fail("layer counts must be positive");
  if (m.compare == model::CompareMode::Compare && m.compare_layers == 0)
    fail("ccm_layers must be positive in compare mode");
  if (c.profile == Profile::PaperFaithful &&
      (m.dim != 768 || m.heads != 12 || m.ffn_mult != 4 || m.edge_layers != 2 || m.match_layers != 4 ||
       m.compare_layers != 1))
    fail("the paper-faithful profile pins dim 768, 12 heads, ffn_mult 4 and OPE/MAM/CCM layers 2/4/1");
  const auto& e = c.train_data.env;
  if (e.n_nodes < 2) fail("environments need at least 2 nodes");
  if (e.spacing <= 0.0) fail("spacing must be positive");
  if (e.views.headings < 1 || e.views.elevations < 1) fail("view layout must be non-empty");
  if (e.feature_dim == 0) fail("feature_dim must be positive");
  const auto& ep = c.train_data.episode;
  if (ep.min_len < 1 || ep.max_len < ep.min_len) fail("episode lengths must satisfy 1 <= min_len <= max_len");
  if (ep.radius_factor <= 0.0) fail("radius_factor must be positive");
  if (c.train_data.environments < 1 || c.train_data.episodes_per_env < 1 || c.val_environments < 1 ||
      c.val_episodes_per_env < 1)
    fail("datasets must be non-empty");
  if (c.pretrain.steps < 0 || c.pretrain.batch < 1) fail("pretrain needs steps >= 0 and batch >= 1");
  if (c.pretrain.mask_rate < 0.0 || c.pretrain.mask_rate > 1.0) fail("mask_rate must lie in [0, 1]");
  if (c.finetune.iterations < 0 || c.finetune.batch < 1) fail("train needs iterations >= 0 and batch >= 1");
  if (!(c.finetune.lambda > 0.0 && c.finetune.lambda < 1.0)) fail("lambda must lie in (0, 1)");
  for (double lr : {c.pretrain.optim.lr, c.finetune.optim.lr})
    if (!(lr > 0.0)) fail("learning rates must be positive");
  if (c.finetune.step_budget < 0 || c.eval.step_budget < 0) fail("step budgets must be >= 0");
  if (c.bench.steps < 1 || c.bench.degree < 1 || c.bench.new_nodes < 1 || c.bench.new_nodes > c.bench.degree ||
      c.bench.text_tokens < 1)
    fail("bench needs steps >= 1, degree >= 1, 1 <= new_nodes <= degree and text_tokens >= 1");
}

}  // namespace trajnav::app
