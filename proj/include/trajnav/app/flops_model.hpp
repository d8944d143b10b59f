#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trajnav/app/config.hpp"

namespace trajnav::app {

// Matmul FLOPs of the planner-side modules for one step.
struct FlopsBreakdown {
  std::uint64_t ope = 0;
  std::uint64_t mam = 0;
  std::uint64_t ccm = 0;

  std::uint64_t total() const { return ope + mam + ccm; }
  bool operator==(const FlopsBreakdown&) const = default;
};

// incremental: prefix keys/values cached across steps, one edge committed
//   per step, every new suffix scored in one merged-mask pass.
// naive: the committed prefix is rebuilt from START every step, then the
//   same merged-mask pass.
// independent: every candidate path runs from scratch on its own.
struct StepFlops {
  int step = 0;
  std::size_t candidates = 0;
  FlopsBreakdown incremental;
  FlopsBreakdown naive;
  FlopsBreakdown independent;

  bool operator==(const StepFlops&) const = default;
};

struct FlopsReport {
  std::uint64_t text_setup = 0;  // instruction keys/values, once per episode
  std::vector<StepFlops> steps;

  bool operator==(const FlopsReport&) const = default;
};

namespace cost {

std::uint64_t linear(std::uint64_t rows, std::uint64_t in, std::uint64_t out);
std::uint64_t attention(std::uint64_t queries, std::uint64_t keys, std::uint64_t dim);
std::uint64_t encoder_layer(const model::ModelConfig& m, std::uint64_t n);
// n new tokens over `past` cached ones, cross-attending `memory` keys.
std::uint64_t decoder_layer(const model::ModelConfig& m, std::uint64_t n, std::uint64_t past,
                            std::uint64_t memory);
std::uint64_t memory_projection(const model::ModelConfig& m, std::uint64_t memory);

std::uint64_t ope(const model::ModelConfig& m, std::uint64_t queries, std::uint64_t views);
std::uint64_t mam(const model::ModelConfig& m, std::uint64_t n, std::uint64_t past, std::uint64_t text);
std::uint64_t ccm(const model::ModelConfig& m, std::uint64_t candidates);

}  // namespace cost

// Candidate count (frontiers + STOP) at `step` of the scenario.
std::size_t scenario_candidates(const BenchParams& b, int step);

FlopsReport analytic_flops(const model::ModelConfig& m, std::size_t views, const BenchParams& b);

// Runs the scenario on a real model with synthetic inputs and reads the
// runtime FLOP counter around every call.
FlopsReport measured_flops(const model::ModelConfig& m, const env::ViewLayout& views, const BenchParams& b,
                           std::uint64_t seed = 1);

// Coefficient of determination of the least-squares line through (x, y).
double affine_r2(const std::vector<double>& x, const std::vector<double>& y);

std::string flops_report_text(const FlopsReport& r, const std::string& title);
std::string flops_report_json(const FlopsReport& r, const std::string& profile, const std::string& config_hash);

}  // namespace trajnav::app
