#include "trajnav/app/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "trajnav/app/config.hpp"
#include "trajnav/app/flops_model.hpp"
#include "trajnav/core/error.hpp"
#include "trajnav/nn/checkpoint.hpp"
#include "trajnav/planner/trace.hpp"

namespace trajnav::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::string checkpoint;
  std::string profile;
  std::string policy;
  int episode = 0;
  bool measure = false;
};

Config resolve(const Options& o) {
  std::optional<Profile> profile;
  if (!o.profile.empty()) profile = parse_profile(o.profile);
  Config c = o.config.empty() ? default_config(profile.value_or(Profile::Desk)) : load_config(o.config, profile);
  if (o.seed) set_seed(c, *o.seed);
  if (!o.policy.empty()) c.eval.policy = planner::parse_policy(o.policy);
  validate(c);
  return c;
}

fs::path out_dir(const Options& o) {
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw IoError("failed writing " + path.string());
}

class TrainLog {
 public:
  TrainLog(const fs::path& path, const Config& c) : os_(path, std::ios::app) {
    if (!os_) throw IoError("cannot open " + path.string() + " for appending");
    os_ << json{{"schema", "trajnav.trainlog"}, {"schema_version", 1}, {"config_hash", hash_hex(config_hash(c))}}
               .dump()
        << '\n';
  }
  void operator()(const std::string& line) { os_ << line << '\n' << std::flush; }

 private:
  std::ofstream os_;
};

std::size_t parameter_count(const planner::Model& m) {
  std::size_t n = 0;
  for (const auto& p : m.parameters()) n += nn::numel_of(p.tensor.shape());
  return n;
}

void load_checkpoint(const planner::Model& model, const std::string& path, const Config& c, std::ostream& err) {
  const auto ckpt = nn::read_checkpoint(path);
  if (ckpt.config_hash != config_hash(c)) {
    err << "note: checkpoint " << path << " was written under config " << hash_hex(ckpt.config_hash)
        << ", current config is " << hash_hex(config_hash(c)) << "\n";
  }
  nn::load_into(ckpt, model.parameters());
}

int gen_env(const Options& o, std::ostream& out) {
  const auto c = resolve(o);
  const auto dir = out_dir(o);
  env::write_dataset(dir / "train.jsonl", train_dataset(c));
  env::write_dataset(dir / "val.jsonl", val_dataset(c));
  write_text(dir / "config.ini", to_ini(c));
  out << "wrote " << (dir / "train.jsonl").string() << " and " << (dir / "val.jsonl").string() << "\n";
  return kExitOk;
}

int pretrain_cmd(const Options& o, std::ostream& out, std::ostream& err) {
  const auto c = resolve(o);
  const auto dir = out_dir(o);
  planner::Model model(c.model, model_seed(c));
  if (!o.checkpoint.empty()) load_checkpoint(model, o.checkpoint, c, err);
  TrainLog log(dir / "train_log.jsonl", c);
  const auto losses = train::pretrain(model, train_dataset(c), c.pretrain, std::ref(log));
  const auto path = dir / "pretrain.ckpt";
  nn::write_checkpoint(path, model.parameters(), config_hash(c));
  if (!losses.empty()) out << "pretrain loss " << losses.front() << " -> " << losses.back() << "\n";
  out << "wrote " << path.string() << "\n";
  return kExitOk;
}

json metrics_document(const Config& c, const std::vector<std::pair<std::string, train::MetricsReport>>& rows) {
  json agents = json::object();
  for (const auto& [name, r] : rows) agents[name] = json::parse(train::report_json(r));
  return json{{"schema", "trajnav.metrics"},
              {"schema_version", 1},
              {"config_hash", hash_hex(config_hash(c))},
              {"split", "val"},
              {"agents", agents}};
}

std::vector<std::pair<std::string, train::MetricsReport>> evaluate_all(const planner::Model& model, const Config& c,
                                                                      const env::Dataset& val) {
  std::vector<std::pair<std::string, train::MetricsReport>> rows;
  rows.emplace_back(planner::policy_name(c.eval.policy), train::evaluate(&model, val, c.eval).report);
  auto uniform = c.eval;
  uniform.policy = planner::Policy::Uniform;
  rows.emplace_back("uniform", train::evaluate(nullptr, val, uniform).report);
  return rows;
}

int train_cmd(const Options& o, std::ostream& out, std::ostream& err) {
  const auto c = resolve(o);
  const auto dir = out_dir(o);
  planner::Model model(c.model, model_seed(c));
  if (!o.checkpoint.empty()) load_checkpoint(model, o.checkpoint, c, err);
  const auto train = train_dataset(c);
  const auto val = val_dataset(c);
  TrainLog log(dir / "train_log.jsonl", c);
  train::finetune(model, train, c.finetune, &val, std::ref(log));
  const auto path = dir / "model.ckpt";
  nn::write_checkpoint(path, model.parameters(), config_hash(c));
  const auto rows = evaluate_all(model, c, val);
  train::print_table(out, rows);
  write_text(dir / "metrics.json", metrics_document(c, rows).dump(2) + "\n");
  out << "wrote " << path.string() << " and " << (dir / "metrics.json").string() << "\n";
  return kExitOk;
}

int eval_cmd(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.checkpoint.empty()) throw ConfigError("eval needs --checkpoint PATH");
  const auto c = resolve(o);
  const auto dir = out_dir(o);
  planner::Model model(c.model, model_seed(c));
  load_checkpoint(model, o.checkpoint, c, err);
  const auto rows = evaluate_all(model, c, val_dataset(c));
  train::print_table(out, rows);
  write_text(dir / "metrics.json", metrics_document(c, rows).dump(2) + "\n");
  out << "wrote " << (dir / "metrics.json").string() << "\n";
  return kExitOk;
}

int trace_cmd(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.checkpoint.empty()) throw ConfigError("trace needs --checkpoint PATH");
  const auto c = resolve(o);
  const auto dir = out_dir(o);
  planner::Model model(c.model, model_seed(c));
  load_checkpoint(model, o.checkpoint, c, err);
  const auto val = val_dataset(c);
  if (o.episode < 0 || static_cast<std::size_t>(o.episode) >= val.episodes.size())
    throw ConfigError("--episode must lie in [0, " + std::to_string(val.episodes.size()) + ")");
  const auto& ep = val.episodes[static_cast<std::size_t>(o.episode)];
  const auto& env = val.env_of(ep);
  planner::RunOptions run;
  run.policy = c.eval.policy;
  Rng rng(derive_seed(c.eval.seed, fnv1a(ep.id)));
  run.rng = &rng;
  run.step_budget = c.eval.step_budget;
  if (run.policy == planner::Policy::Follow) run.labeler = train::teacher_labeler();
  const auto result = planner::run_episode(&model, env, ep, run);
  const int budget = c.eval.step_budget > 0 ? c.eval.step_budget : planner::default_step_budget(ep);
  const auto header = planner::make_header(env, ep, run.policy, budget, hash_hex(config_hash(c)));
  const auto path = dir / ("trace-" + ep.id + ".jsonl");
  planner::write_trace(path, header, result.steps);
  out << "wrote " << path.string() << " (" << result.steps.size() << " steps)\n";
  return kExitOk;
}

int bench_cmd(const Options& o, std::ostream& out) {
  const auto c = resolve(o);
  const auto& views = c.train_data.env.views;
  const auto analytic = analytic_flops(c.model, views.count(), c.bench);
  out << flops_report_text(analytic, "matmul FLOPs per step, profile " + profile_name(c.profile) +
                                         ", degree " + std::to_string(c.bench.degree) + ", " +
                                         std::to_string(c.bench.new_nodes) + " new nodes per step");
  if (o.measure) {
    const bool same = measured_flops(c.model, views, c.bench, model_seed(c)) == analytic;
    out << "runtime counter on the concrete scenario: " << (same ? "matches" : "DIFFERS") << "\n";
    if (!same) throw InvariantError("analytic FLOPs disagree with the runtime counter");
  }
  if (c.profile == Profile::PaperFaithful) {
    const double reference[] = {0.6, 0.9, 1.2};
    const int at[] = {1, 10, 20};
    out << "reference comparison (incremental, GFLOPs):\n";
    for (int i = 0; i < 3; ++i) {
      if (at[i] > c.bench.steps) continue;
      const double g = static_cast<double>(analytic.steps[at[i] - 1].incremental.total()) / 1e9;
      char line[120];
      std::snprintf(line, sizeof line, "  step %2d: %.3f vs %.1f (ratio %.2f)\n", at[i], g, reference[i],
                    g / reference[i]);
      out << line;
    }
  }
  planner::Model model(c.model, model_seed(c));
  out << "parameters: " << parameter_count(model) << "\n";
  const auto dir = out_dir(o);
  write_text(dir / "flops.json", flops_report_json(analytic, profile_name(c.profile), hash_hex(config_hash(c))) + "\n");
  out << "wrote " << (dir / "flops.json").string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("trajnav: trajectory-incremental navigation planner", "trajnav");
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "INI config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "run seed (overrides the config)");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--profile", o.profile, "desk or paper-faithful")
        ->check(CLI::IsMember({"desk", "paper-faithful"}));
  };
  auto* gen = app.add_subcommand("gen-env", "write train and val datasets");
  auto* pre = app.add_subcommand("pretrain", "masked-token pretraining");
  auto* trn = app.add_subcommand("train", "fine-tune the navigation policy");
  auto* evl = app.add_subcommand("eval", "evaluate a checkpoint on the val split");
  auto* bench = app.add_subcommand("bench-flops", "per-step FLOPs of the planner");
  auto* trc = app.add_subcommand("trace", "export a step trace of one val episode");
  for (auto* sub : {gen, pre, trn, evl, bench, trc}) add_common(sub);
  for (auto* sub : {pre, trn, evl, trc}) sub->add_option("--checkpoint", o.checkpoint, "model checkpoint");
  for (auto* sub : {evl, trc})
    sub->add_option("--policy", o.policy, "greedy, sample, follow or uniform")
        ->check(CLI::IsMember({"greedy", "sample", "follow", "uniform"}));
  trc->add_option("--episode", o.episode, "val episode index");
  bench->add_flag("--measure", o.measure, "also run the scenario and compare with the runtime counter");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }
  for (auto* sub : {gen, pre, trn, evl, bench, trc})
    if (sub->count("--seed")) o.seed = seed;

  try {
    if (gen->parsed()) return gen_env(o, out);
    if (pre->parsed()) return pretrain_cmd(o, out, err);
    if (trn->parsed()) return train_cmd(o, out, err);
    if (evl->parsed()) return eval_cmd(o, out, err);
    if (bench->parsed()) return bench_cmd(o, out);
    if (trc->parsed()) return trace_cmd(o, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace trajnav::app
