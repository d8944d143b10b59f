#include "trajnav/planner/trace.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "trajnav/core/error.hpp"

namespace trajnav::planner {

using nlohmann::json;

namespace {

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t unhex(const std::string& s) { return std::stoull(s, nullptr, 16); }

json step_record(const StepRecord& r) {
  json j{{"type", "step"},          {"step", r.step},
         {"node", r.node},          {"observation", hex(r.observation_digest)},
         {"candidates", r.candidates}, {"scores", r.scores},
         {"probs", r.probs},        {"chosen", r.chosen},
         {"route", r.route},        {"stack", r.stack},
         {"forced_stop", r.forced_stop}};
  if (r.labelled) j["label"] = r.label;
  return j;
}

StepRecord parse_step(const json& j) {
  StepRecord r;
  r.step = j.at("step").get<int>();
  r.node = j.at("node").get<NodeId>();
  r.observation_digest = unhex(j.at("observation").get<std::string>());
  r.candidates = j.at("candidates").get<std::vector<NodeId>>();
  r.scores = j.at("scores").get<std::vector<double>>();
  r.probs = j.at("probs").get<std::vector<double>>();
  r.chosen = j.at("chosen").get<NodeId>();
  r.route = j.at("route").get<std::vector<NodeId>>();
  r.stack = j.at("stack").get<std::vector<NodeId>>();
  r.forced_stop = j.at("forced_stop").get<bool>();
  if (j.contains("label")) {
    r.label = j.at("label").get<NodeId>();
    r.labelled = true;
  }
  return r;
}

}  // namespace

TraceHeader make_header(const env::EnvGraph& env, const env::Episode& ep, Policy policy, int step_budget,
                        const std::string& config_hash) {
  TraceHeader h;
  h.episode_id = ep.id;
  h.env_index = ep.env_index;
  h.env_seed = env.seed();
  h.instruction = ep.instruction;
  h.gt_path = ep.gt_path;
  h.start = ep.start;
  h.target = ep.target;
  h.policy = policy_name(policy);
  h.step_budget = step_budget > 0 ? step_budget : default_step_budget(ep);
  h.config_hash = config_hash;
  return h;
}

void write_trace(std::ostream& os, const TraceHeader& h, const std::vector<StepRecord>& steps) {
  json header{{"type", "header"},
              {"schema", "trajnav.trace"},
              {"schema_version", h.schema_version},
              {"episode", h.episode_id},
              {"env", h.env_index},
              {"env_seed", hex(h.env_seed)},
              {"instruction", h.instruction},
              {"text", env::Vocab::standard().decode(h.instruction)},
              {"gt_path", h.gt_path},
              {"start", h.start},
              {"target", h.target},
              {"policy", h.policy},
              {"step_budget", h.step_budget},
              {"config_hash", h.config_hash}};
  os << header.dump() << '\n';
  for (const auto& s : steps) os << step_record(s).dump() << '\n';
}

void write_trace(const std::filesystem::path& path, const TraceHeader& header,
                 const std::vector<StepRecord>& steps) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_trace(os, header, steps);
  os.flush();
  if (!os) throw IoError("failed writing " + path.string());
}

Trace read_trace(std::istream& is) {
  Trace t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw IoError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
    const auto type = j.value("type", std::string());
    try {
      if (type == "header") {
        if (have_header) throw IoError("trace line " + std::to_string(line_no) + ": second header");
        auto& h = t.header;
        h.schema_version = j.at("schema_version").get<int>();
        if (h.schema_version != kTraceSchemaVersion)
          throw IoError("unsupported trace schema version " + std::to_string(h.schema_version));
        h.episode_id = j.at("episode").get<std::string>();
        h.env_index = j.at("env").get<std::size_t>();
        h.env_seed = unhex(j.at("env_seed").get<std::string>());
        h.instruction = j.at("instruction").get<std::vector<env::TokenId>>();
        h.gt_path = j.at("gt_path").get<std::vector<NodeId>>();
        h.start = j.at("start").get<NodeId>();
        h.target = j.at("target").get<NodeId>();
        h.policy = j.at("policy").get<std::string>();
        h.step_budget = j.at("step_budget").get<int>();
        h.config_hash = j.at("config_hash").get<std::string>();
        have_header = true;
      } else if (type == "step") {
        if (!have_header) throw IoError("trace line " + std::to_string(line_no) + ": step before header");
        t.steps.push_back(parse_step(j));
      } else {
        throw IoError("trace line " + std::to_string(line_no) + ": unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw IoError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw IoError("trace has no header");
  return t;
}

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  return read_trace(is);
}

ReplayReport replay(const Model& model, const env::EnvGraph& env, const env::Episode& ep, const Trace& trace) {
  if (trace.header.episode_id != ep.id || trace.header.gt_path != ep.gt_path)
    throw ContractError("trace belongs to episode " + trace.header.episode_id + ", not " + ep.id);
  std::size_t at = 0;
  RunOptions opt;
  opt.policy = Policy::Follow;
  opt.step_budget = trace.header.step_budget;
  opt.labeler = [&](const StepContext&) {
    if (at >= trace.steps.size() || trace.steps[at].forced_stop)
      throw ContractError("replay ran past the recorded steps");
    return trace.steps[at++].chosen;
  };
  const auto run = run_episode(&model, env, ep, opt);

  ReplayReport rep;
  rep.steps = run.steps.size();
  if (run.steps.size() != trace.steps.size()) rep.actions_match = false;
  const std::size_t n = std::min(run.steps.size(), trace.steps.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = run.steps[i];
    const auto& b = trace.steps[i];
    if (a.candidates != b.candidates || a.chosen != b.chosen || a.route != b.route || a.stack != b.stack ||
        a.observation_digest != b.observation_digest || a.scores.size() != b.scores.size()) {
      rep.actions_match = false;
      continue;
    }
    for (std::size_t k = 0; k < a.scores.size(); ++k)
      rep.max_score_diff = std::max(rep.max_score_diff, std::abs(a.scores[k] - b.scores[k]));
  }
  return rep;
}

}  // namespace trajnav::planner
