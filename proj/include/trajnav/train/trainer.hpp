#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "trajnav/nn/optim.hpp"
#include "trajnav/planner/agent.hpp"
#include "trajnav/train/labels.hpp"
#include "trajnav/train/metrics.hpp"

namespace trajnav::train {

using planner::Model;
using Tensor = nn::Tensor<float>;

enum class Forcing { Teacher, Student };

inline constexpr double kDefaultLambda = 0.2;

// lambda * l_tf + (1 - lambda) * l_sf; lambda must lie in (0, 1).
Tensor total_loss(const Tensor& l_tf, const Tensor& l_sf, double lambda = kDefaultLambda);

// Teacher: actions forced to the ground truth. Student: actions sampled from
// the model, supervised by pseudo labels. The loss is recorded either way.
planner::RunResult rollout(const Model& model, const env::EnvGraph& env, const env::Episode& ep, Forcing mode,
                           Rng& rng, Nearest nearest = Nearest::Metric, int step_budget = 0);
Tensor rollout_loss(const Model& model, const env::EnvGraph& env, const env::Episode& ep, Forcing mode, Rng& rng,
                    Nearest nearest = Nearest::Metric, int step_budget = 0);

// Edge features along the ground-truth path, observed in the pose a
// teacher-forced agent would have: [|path| - 1, d].
Tensor teacher_path_edges(const Model& model, const env::EnvGraph& env, const env::Episode& ep);

// Masked-token loss for one episode; an undefined tensor when the
// instruction is empty or nothing was masked.
Tensor mlm_loss(const Model& model, const env::EnvGraph& env, const env::Episode& ep, Rng& rng,
                double rate = model::kMaskRate);

struct OptimParams {
  double lr = 1e-3;
  double weight_decay = 0.01;
  double grad_clip = 1.0;
};

struct PretrainParams {
  OptimParams optim;
  int steps = 1000;
  int batch = 8;
  double mask_rate = model::kMaskRate;
  std::uint64_t seed = 1;
  int log_every = 50;
};

struct FinetuneParams {
  OptimParams optim{5e-4, 0.01, 1.0};
  int iterations = 500;
  int batch = 4;
  double lambda = kDefaultLambda;
  Nearest nearest = Nearest::Metric;
  int step_budget = 0;
  std::uint64_t seed = 1;
  int log_every = 25;
  int eval_every = 0;  // 0: never
};

// Receives one JSON object per line.
using LogSink = std::function<void(const std::string&)>;

// Reshuffles the index range at every epoch boundary.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::uint64_t seed);
  std::vector<std::size_t> next(std::size_t batch);

 private:
  std::vector<std::size_t> order_;
  std::size_t at_ = 0;
  Rng rng_;
};

nn::AdamW<float> make_optimizer(nn::ParameterList<float> params, const OptimParams& p);

// One optimizer update on the mean masked-token loss of `batch`.
double pretrain_step(const Model& model, nn::AdamW<float>& opt, const env::Dataset& data,
                     std::span<const std::size_t> batch, double mask_rate, Rng& rng);

// One optimizer update on the mean over `batch` of
// lambda * teacher loss + (1 - lambda) * student loss.
double finetune_step(const Model& model, nn::AdamW<float>& opt, const env::Dataset& data,
                     std::span<const std::size_t> batch, const FinetuneParams& p, Rng& rng);

// One optimizer update on the mean teacher-forced loss of `batch`.
double teacher_step(const Model& model, nn::AdamW<float>& opt, const env::Dataset& data,
                    std::span<const std::size_t> batch);

// Mean teacher-forced loss over `batch` without updating anything.
double teacher_loss(const Model& model, const env::Dataset& data, std::span<const std::size_t> batch);

// Runs every step and returns the per-step losses.
std::vector<double> pretrain(const Model& model, const env::Dataset& data, const PretrainParams& p,
                             const LogSink& log = {});

struct EvalOptions {
  planner::Policy policy = planner::Policy::Greedy;
  std::uint64_t seed = 0;  // Sample / Uniform draws, per episode
  int step_budget = 0;
};

struct Evaluation {
  MetricsReport report;
  std::vector<EpisodeMetrics> episodes;
};

// `model` may be null for the Uniform and Follow (ground-truth) policies.
Evaluation evaluate(const Model* model, const env::Dataset& data, const EvalOptions& options = {});

std::vector<double> finetune(const Model& model, const env::Dataset& data, const FinetuneParams& p,
                             const env::Dataset* validation = nullptr, const LogSink& log = {});

}  // namespace trajnav::train
