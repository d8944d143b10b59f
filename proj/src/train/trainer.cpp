#include "trajnav/train/trainer.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "trajnav/core/error.hpp"
#include "trajnav/nn/ops.hpp"

namespace trajnav::train {

using nlohmann::json;

Tensor total_loss(const Tensor& l_tf, const Tensor& l_sf, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw ConfigError("loss weight lambda must lie in (0, 1), got " + std::to_string(lambda));
  return nn::add(nn::scale(l_tf, static_cast<float>(lambda)), nn::scale(l_sf, static_cast<float>(1.0 - lambda)));
}

planner::RunResult rollout(const Model& model, const env::EnvGraph& env, const env::Episode& ep, Forcing mode,
                           Rng& rng, Nearest nearest, int step_budget) {
  planner::RunOptions opt;
  opt.record_loss = true;
  opt.step_budget = step_budget;
  if (mode == Forcing::Teacher) {
    opt.policy = planner::Policy::Follow;
    opt.labeler = teacher_labeler();
  } else {
    opt.policy = planner::Policy::Sample;
    opt.labeler = pseudo_labeler(nearest);
    opt.rng = &rng;
  }
  return planner::run_episode(&model, env, ep, opt);
}

Tensor rollout_loss(const Model& model, const env::EnvGraph& env, const env::Episode& ep, Forcing mode, Rng& rng,
                    Nearest nearest, int step_budget) {
  return rollout(model, env, ep, mode, rng, nearest, step_budget).mean_loss();
}

Tensor teacher_path_edges(const Model& model, const env::EnvGraph& env, const env::Episode& ep) {
  const auto& path = ep.gt_path;
  if (path.size() < 2) throw ContractError("episode " + ep.id + ": path has no edges");
  std::vector<Tensor> rows;
  double heading = ep.start_heading;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const auto obs = env::observe(env, path[i], heading);
    std::size_t k = 0;
    while (k < obs.neighbors.size() && obs.neighbors[k].id != path[i + 1]) ++k;
    if (k == obs.neighbors.size()) throw ContractError("episode " + ep.id + ": path leaves the graph");
    const auto& nb = obs.neighbors[k];
    std::vector<double> qphi = {nb.heading}, qtheta = {nb.elevation};
    auto views = model::view_feature_tensor<float>(obs);
    rows.push_back(model.edges().extract(qphi, qtheta, views, obs.view_heading, obs.view_elevation));
    heading = env::bearing(env.coord(path[i]), env.coord(path[i + 1]));
  }
  return nn::concat_rows<float>(rows);
}

Tensor mlm_loss(const Model& model, const env::EnvGraph& env, const env::Episode& ep, Rng& rng, double rate) {
  if (ep.instruction.empty()) return {};
  auto masked = model::mask_tokens(ep.instruction, rng, rate);
  if (masked.positions.empty()) return {};
  auto text = model.text().forward(masked.tokens);
  auto edges = teacher_path_edges(model, env, ep);
  auto logits = model.mlm().forward(text, edges, model::TextEncoder<float>::key_flags(masked.tokens));
  return model::masked_token_loss(logits, masked);
}

BatchSampler::BatchSampler(std::size_t n, std::uint64_t seed) : order_(n), at_(n), rng_(seed) {
  if (n == 0) throw ConfigError("cannot sample batches from an empty set");
  for (std::size_t i = 0; i < n; ++i) order_[i] = i;
}

std::vector<std::size_t> BatchSampler::next(std::size_t batch) {
  std::vector<std::size_t> out;
  while (out.size() < batch) {
    if (at_ == order_.size()) {
      for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[uniform_index(rng_, i)]);
      at_ = 0;
    }
    out.push_back(order_[at_++]);
  }
  return out;
}

nn::AdamW<float> make_optimizer(nn::ParameterList<float> params, const OptimParams& p) {
  nn::AdamWConfig cfg;
  cfg.lr = p.lr;
  cfg.weight_decay = p.weight_decay;
  cfg.grad_clip = p.grad_clip;
  return nn::AdamW<float>(std::move(params), cfg);
}

namespace {

double apply_update(nn::AdamW<float>& opt, const std::vector<Tensor>& losses) {
  opt.zero_grad();
  if (losses.empty()) return 0.0;
  Tensor sum = losses.front();
  for (std::size_t i = 1; i < losses.size(); ++i) sum = nn::add(sum, losses[i]);
  auto mean = nn::scale(sum, 1.0f / static_cast<float>(losses.size()));
  const double value = mean.item();
  if (!std::isfinite(value)) throw OptimizerError("non-finite training loss");
  mean.backward();
  // Parameters unreachable from this batch's loss keep a zero gradient.
  for (auto& p : opt.parameters()) {
    auto t = p.tensor;
    if (!t.has_grad()) t.mutable_grad();
  }
  opt.step();
  return value;
}

}  // namespace

double pretrain_step(const Model& model, nn::AdamW<float>& opt, const env::Dataset& data,
                     std::span<const std::size_t> batch, double mask_rate, Rng& rng) {
  std::vector<Tensor> losses;
  for (std::size_t i : batch) {
    const auto& ep = data.episodes.at(i);
    auto l = mlm_loss(model, data.env_of(ep), ep, rng, mask_rate);
    if (l.defined()) losses.push_back(l);
  }
  return apply_update(opt, losses);
}

double finetune_step(const Model& model, nn::AdamW<float>& opt, const env::Dataset& data,
                     std::span<const std::size_t> batch, const FinetuneParams& p, Rng& rng) {
  std::vector<Tensor> losses;
  for (std::size_t i : batch) {
    const auto& ep = data.episodes.at(i);
    const auto& env = data.env_of(ep);
    auto tf = rollout_loss(model, env, ep, Forcing::Teacher, rng, p.nearest, p.step_budget);
    auto sf = rollout_loss(model, env, ep, Forcing::Student, rng, p.nearest, p.step_budget);
    losses.push_back(total_loss(tf, sf, p.lambda));
  }
  return apply_update(opt, losses);
}

double teacher_step(const Model& model, nn::AdamW<float>& opt, const env::Dataset& data,
                    std::span<const std::size_t> batch) {
  std::vector<Tensor> losses;
  Rng unused(0);
  for (std::size_t i : batch) {
    const auto& ep = data.episodes.at(i);
    losses.push_back(rollout_loss(model, data.env_of(ep), ep, Forcing::Teacher, unused));
  }
  return apply_update(opt, losses);
}

double teacher_loss(const Model& model, const env::Dataset& data, std::span<const std::size_t> batch) {
  nn::NoGradGuard no_grad;
  double total = 0.0;
  Rng unused(0);
  for (std::size_t i : batch) {
    const auto& ep = data.episodes.at(i);
    total += rollout_loss(model, data.env_of(ep), ep, Forcing::Teacher, unused).item();
  }
  return batch.empty() ? 0.0 : total / static_cast<double>(batch.size());
}

std::vector<double> pretrain(const Model& model, const env::Dataset& data, const PretrainParams& p,
                             const LogSink& log) {
  if (p.steps < 0 || p.batch < 1) throw ConfigError("pretraining needs steps >= 0 and batch >= 1");
  auto opt = make_optimizer(model.pretraining_parameters(), p.optim);
  BatchSampler sampler(data.episodes.size(), derive_seed(p.seed, fnv1a("pretrain-batches")));
  Rng rng(derive_seed(p.seed, fnv1a("pretrain-masks")));
  std::vector<double> losses;
  for (int s = 1; s <= p.steps; ++s) {
    auto batch = sampler.next(static_cast<std::size_t>(p.batch));
    losses.push_back(pretrain_step(model, opt, data, batch, p.mask_rate, rng));
    if (log && (s == 1 || s == p.steps || (p.log_every > 0 && s % p.log_every == 0)))
      log(json{{"stage", "pretrain"}, {"step", s}, {"loss", losses.back()}}.dump());
  }
  return losses;
}

Evaluation evaluate(const Model* model, const env::Dataset& data, const EvalOptions& options) {
  Evaluation out;
  for (const auto& ep : data.episodes) {
    const auto& env = data.env_of(ep);
    Rng rng(derive_seed(options.seed, fnv1a(ep.id)));
    planner::RunOptions opt;
    opt.policy = options.policy;
    opt.step_budget = options.step_budget;
    opt.rng = &rng;
    if (options.policy == planner::Policy::Follow) opt.labeler = teacher_labeler();
    auto run = planner::run_episode(model, env, ep, opt);
    auto m = compute_metrics(env, ep, run.trajectory, run.length);
    m.steps = run.steps.size();
    m.truncated = run.truncated;
    check_invariants(m);
    out.episodes.push_back(std::move(m));
  }
  out.report = aggregate(out.episodes);
  return out;
}

std::vector<double> finetune(const Model& model, const env::Dataset& data, const FinetuneParams& p,
                             const env::Dataset* validation, const LogSink& log) {
  if (p.iterations < 0 || p.batch < 1) throw ConfigError("training needs iterations >= 0 and batch >= 1");
  total_loss(Tensor::zeros({1}), Tensor::zeros({1}), p.lambda);
  auto opt = make_optimizer(model.navigation_parameters(), p.optim);
  BatchSampler sampler(data.episodes.size(), derive_seed(p.seed, fnv1a("train-batches")));
  Rng rng(derive_seed(p.seed, fnv1a("train-rollouts")));
  std::vector<double> losses;
  for (int it = 1; it <= p.iterations; ++it) {
    auto batch = sampler.next(static_cast<std::size_t>(p.batch));
    losses.push_back(finetune_step(model, opt, data, batch, p, rng));
    if (log && (it == 1 || it == p.iterations || (p.log_every > 0 && it % p.log_every == 0)))
      log(json{{"stage", "train"}, {"step", it}, {"loss", losses.back()}}.dump());
    if (validation && p.eval_every > 0 && it % p.eval_every == 0) {
      auto ev = evaluate(&model, *validation);
      if (log) {
        json j{{"stage", "eval"}, {"step", it}, {"sr", ev.report.sr}, {"spl", ev.report.spl},
               {"ndtw", ev.report.ndtw}, {"ne", ev.report.ne}};
        log(j.dump());
      }
    }
  }
  return losses;
}

}  // namespace trajnav::train
