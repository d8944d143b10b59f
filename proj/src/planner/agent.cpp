#include "trajnav/planner/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <optional>

#include "trajnav/core/error.hpp"
#include "trajnav/nn/ops.hpp"

namespace trajnav::planner {

using namespace trajnav::nn;

Policy parse_policy(const std::string& name) {
  if (name == "greedy") return Policy::Greedy;
  if (name == "sample") return Policy::Sample;
  if (name == "follow") return Policy::Follow;
  if (name == "uniform") return Policy::Uniform;
  throw ConfigError("unknown policy '" + name + "' (expected greedy, sample, follow or uniform)");
}

std::string policy_name(Policy policy) {
  switch (policy) {
    case Policy::Greedy: return "greedy";
    case Policy::Sample: return "sample";
    case Policy::Follow: return "follow";
    case Policy::Uniform: return "uniform";
  }
  return "?";
}

Tensor<float> RunResult::mean_loss() const {
  if (loss_terms == 0) return Tensor<float>::zeros({1});
  return scale(loss_sum, 1.0f / static_cast<float>(loss_terms));
}

int default_step_budget(const env::Episode& ep) { return 2 * static_cast<int>(ep.gt_path.size()) + 6; }

namespace {

std::uint64_t digest(const env::Observation& obs) {
  std::uint64_t h = fnv1a(std::string_view(reinterpret_cast<const char*>(obs.view_features.data()),
                                           obs.view_features.size() * sizeof(float)));
  for (const auto& nb : obs.neighbors) {
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(&nb.id), sizeof(nb.id)), h);
  }
  return h;
}

// Brings the committed prefix in line with the fidelity stack: drop what
// was popped, then commit the edges pushed since the last step.
void sync_cache(const Model& model, model::PathCache<float>& cache, std::vector<NodeId>& cached,
                const Graph& g) {
  const auto& stack = g.stack().nodes();
  std::size_t common = 0;
  while (common < cached.size() && common < stack.size() && cached[common] == stack[common]) ++common;
  if (common == 0) throw IntegrityError("path cache does not start at the episode start");
  model.matcher().truncate(cache, common);
  if (common < stack.size()) {
    std::vector<NodeId> tail(stack.begin() + static_cast<std::ptrdiff_t>(common - 1), stack.end());
    auto edges = g.edges_along(tail);
    model.matcher().commit(cache, concat_rows<float>(edges));
  }
  cached = stack;
}

std::vector<double> softmax_of(std::span<const float> scores) {
  std::vector<double> p(scores.size());
  double top = -INFINITY;
  for (float s : scores) top = std::max(top, static_cast<double>(s));
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(static_cast<double>(scores[i]) - top);
    total += p[i];
  }
  for (auto& v : p) v /= total;
  return p;
}

std::size_t sample_index(const std::vector<double>& probs, Rng& rng) {
  const double u = uniform01(rng);
  double cum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return i;
  }
  return probs.size() - 1;
}

}  // namespace

RunResult run_episode(const Model* model, const env::EnvGraph& env, const env::Episode& ep,
                      const RunOptions& options) {
  const Policy policy = options.policy;
  if (policy == Policy::Follow && !options.labeler) throw ContractError("follow policy needs a labeler");
  if ((policy == Policy::Sample || policy == Policy::Uniform) && !options.rng) {
    throw ContractError(policy_name(policy) + " policy needs a random generator");
  }
  if (!model && (policy == Policy::Greedy || policy == Policy::Sample || options.record_loss)) {
    throw ContractError(policy_name(policy) + " policy needs a model");
  }
  if (options.record_loss && !options.labeler) throw ContractError("recording a loss needs a labeler");

  std::optional<NoGradGuard> no_grad;
  if (!options.record_loss) no_grad.emplace();

  const int budget = options.step_budget > 0 ? options.step_budget : default_step_budget(ep);
  Graph g(ep.start, env.coord(ep.start));
  double heading = ep.start_heading;

  model::PathCache<float> cache;
  std::vector<NodeId> cached;
  if (model) {
    auto text = model->text().forward(ep.instruction);
    cache = model->matcher().begin(text, model::TextEncoder<float>::key_flags(ep.instruction));
    cached = {ep.start};
  }
  const bool score = model && (policy != Policy::Uniform || options.record_loss);

  RunResult result;
  result.trajectory = {ep.start};
  for (int step = 1;; ++step) {
    StepRecord rec;
    rec.step = step;
    rec.node = g.current();
    if (step > budget) {
      rec.forced_stop = true;
      rec.chosen = kStop;
      rec.stack = g.stack().nodes();
      result.truncated = true;
      result.steps.push_back(std::move(rec));
      break;
    }

    const auto obs = env::observe(env, g.current(), heading);
    rec.observation_digest = digest(obs);
    const auto neighbors = graph::neighbors_of<Feature>(obs);
    std::vector<Feature> features(neighbors.size());
    if (model) {
      auto rows = model->edges().extract(obs);
      for (std::size_t i = 0; i < neighbors.size(); ++i) features[i] = slice_rows(rows, i, i + 1);
    }
    g.update(g.current(), neighbors, std::move(features));

    std::vector<NodeId> fresh;
    for (NodeId n : g.unvisited())
      if (!g.node(n).embedding) fresh.push_back(n);

    if (model) {
      sync_cache(*model, cache, cached, g);
      std::vector<Feature> suffixes;
      for (NodeId f : fresh) {
        const auto& path = g.fidelity(f);
        if (!std::equal(path.begin(), path.end() - 1, cached.begin(), cached.end())) {
          throw IntegrityError("frontier " + std::to_string(f) + " does not extend the current fidelity path");
        }
        suffixes.push_back(g.edge(g.current(), f).feature);
      }
      suffixes.push_back(model->matcher().stop_token());
      auto emb = model->matcher().embed_batch(cache, suffixes);
      for (std::size_t i = 0; i < fresh.size(); ++i) g.set_embedding(fresh[i], slice_rows(emb, i, i + 1));
      g.set_stop_embedding(slice_rows(emb, fresh.size(), fresh.size() + 1));
    } else {
      for (NodeId f : fresh) g.set_embedding(f, Feature());
      g.set_stop_embedding(Feature());
    }

    const auto candidates = g.candidates();
    for (const auto& c : candidates) rec.candidates.push_back(c.id);
    if (options.inspect) options.inspect(StepContext{env, ep, g, rec.candidates});

    Tensor<float> logits;
    if (score) {
      std::vector<Tensor<float>> rows;
      rows.reserve(candidates.size());
      for (const auto& c : candidates) rows.push_back(c.embedding);
      logits = model->scorer().scores(concat_rows<float>(rows));
      rec.scores.assign(logits.data().begin(), logits.data().end());
      rec.probs = softmax_of(logits.data());
    }

    std::size_t label_index = 0;
    if (options.labeler) {
      rec.label = options.labeler(StepContext{env, ep, g, rec.candidates});
      auto it = std::find(rec.candidates.begin(), rec.candidates.end(), rec.label);
      if (it == rec.candidates.end()) {
        throw ContractError("label " + std::to_string(rec.label) + " is not a candidate at step " +
                            std::to_string(step));
      }
      label_index = static_cast<std::size_t>(it - rec.candidates.begin());
      rec.labelled = true;
      if (options.record_loss) {
        auto ce = cross_entropy(logits, label_index);
        result.loss_sum = result.loss_sum.defined() ? add(result.loss_sum, ce) : ce;
        ++result.loss_terms;
      }
    }

    std::size_t choice = 0;
    switch (policy) {
      case Policy::Greedy: choice = model::argmax<float>(logits.data()); break;
      case Policy::Sample: choice = sample_index(rec.probs, *options.rng); break;
      case Policy::Follow: choice = label_index; break;
      case Policy::Uniform: choice = uniform_index(*options.rng, candidates.size()); break;
    }
    rec.chosen = rec.candidates[choice];

    if (rec.chosen == kStop) {
      rec.stack = g.stack().nodes();
      result.steps.push_back(std::move(rec));
      break;
    }
    rec.route = g.route(g.current(), rec.chosen, true);
    for (std::size_t i = 1; i < rec.route.size(); ++i) {
      const auto& a = env.coord(rec.route[i - 1]);
      const auto& b = env.coord(rec.route[i]);
      g.move_to(rec.route[i]);
      result.length += env::distance(a, b);
      result.trajectory.push_back(rec.route[i]);
      heading = env::bearing(a, b);
    }
    rec.stack = g.stack().nodes();
    result.steps.push_back(std::move(rec));
  }
  return result;
}

}  // namespace trajnav::planner
