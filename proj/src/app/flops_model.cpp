#include "trajnav/app/flops_model.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "trajnav/core/error.hpp"
#include "trajnav/nn/flops.hpp"
#include "trajnav/nn/ops.hpp"

namespace trajnav::app {

namespace cost {

std::uint64_t linear(std::uint64_t rows, std::uint64_t in, std::uint64_t out) { return 2 * rows * in * out; }

// Scores q.k^T and the weighted sum of values, summed over heads.
std::uint64_t attention(std::uint64_t queries, std::uint64_t keys, std::uint64_t dim) {
  return 4 * queries * keys * dim;
}

namespace {

std::uint64_t ffn(const model::ModelConfig& m, std::uint64_t n) {
  const std::uint64_t d = m.dim, f = m.dim * m.ffn_mult;
  return linear(n, d, f) + linear(n, f, d);
}

}  // namespace

std::uint64_t encoder_layer(const model::ModelConfig& m, std::uint64_t n) {
  const std::uint64_t d = m.dim;
  return 4 * linear(n, d, d) + attention(n, n, d) + ffn(m, n);
}

std::uint64_t decoder_layer(const model::ModelConfig& m, std::uint64_t n, std::uint64_t past,
                            std::uint64_t memory) {
  const std::uint64_t d = m.dim;
  const std::uint64_t self = 4 * linear(n, d, d) + attention(n, past + n, d);
  const std::uint64_t cross = 2 * linear(n, d, d) + attention(n, memory, d);
  return self + cross + ffn(m, n);
}

std::uint64_t memory_projection(const model::ModelConfig& m, std::uint64_t memory) {
  return 2 * linear(memory, m.dim, m.dim);
}

std::uint64_t ope(const model::ModelConfig& m, std::uint64_t queries, std::uint64_t views) {
  std::uint64_t total = linear(queries, 4, m.dim) + linear(views, m.raw_dim + 4, m.dim);
  for (std::size_t l = 0; l < m.edge_layers; ++l)
    total += memory_projection(m, views) + decoder_layer(m, queries, 0, views);
  return total;
}

std::uint64_t mam(const model::ModelConfig& m, std::uint64_t n, std::uint64_t past, std::uint64_t text) {
  return m.match_layers * decoder_layer(m, n, past, text);
}

std::uint64_t ccm(const model::ModelConfig& m, std::uint64_t candidates) {
  std::uint64_t total = linear(candidates, m.dim, m.dim) + linear(candidates, m.dim, 1);
  if (m.compare == model::CompareMode::Compare) total += m.compare_layers * encoder_layer(m, candidates);
  return total;
}

}  // namespace cost

std::size_t scenario_candidates(const BenchParams& b, int step) {
  // Every step reveals new_nodes frontiers and visits one of them.
  return static_cast<std::size_t>(b.new_nodes * step - (step - 1) + 1);
}

namespace {

void check_scenario(const BenchParams& b) {
  if (b.steps < 1 || b.degree < 1 || b.new_nodes < 1 || b.new_nodes > b.degree || b.text_tokens < 1)
    throw ConfigError("flops scenario needs steps >= 1, 1 <= new_nodes <= degree and text_tokens >= 1");
}

}  // namespace

FlopsReport analytic_flops(const model::ModelConfig& m, std::size_t views, const BenchParams& b) {
  check_scenario(b);
  FlopsReport r;
  const std::uint64_t L = static_cast<std::uint64_t>(b.text_tokens);
  const std::uint64_t S = static_cast<std::uint64_t>(b.new_nodes) + 1;
  r.text_setup = m.match_layers * cost::memory_projection(m, L);
  for (int t = 1; t <= b.steps; ++t) {
    const std::uint64_t T = static_cast<std::uint64_t>(t);
    StepFlops s;
    s.step = t;
    s.candidates = scenario_candidates(b, t);
    const std::uint64_t ope = cost::ope(m, static_cast<std::uint64_t>(b.degree), views);
    const std::uint64_t ccm = cost::ccm(m, s.candidates);
    const std::uint64_t suffixes = cost::mam(m, S, T, L);
    const std::uint64_t start = cost::mam(m, 1, 0, L);

    s.incremental = {ope, (t == 1 ? start : cost::mam(m, 1, T - 1, L)) + suffixes, ccm};
    s.naive = {ope, start + (t == 1 ? 0 : cost::mam(m, T - 1, 1, L)) + suffixes, ccm};
    s.independent = {ope, S * cost::mam(m, T + 1, 0, L), ccm};
    r.steps.push_back(s);
  }
  return r;
}

FlopsReport measured_flops(const model::ModelConfig& m, const env::ViewLayout& layout, const BenchParams& b,
                           std::uint64_t seed) {
  check_scenario(b);
  using nn::Tensor;
  nn::NoGradGuard no_grad;
  planner::Model model(m, seed);
  Rng rng(derive_seed(seed, fnv1a("bench-inputs")));
  auto random = [&](std::size_t rows, std::size_t cols) {
    std::vector<float> v(rows * cols);
    for (auto& x : v) x = static_cast<float>(standard_normal(rng));
    return Tensor<float>::from({rows, cols}, std::move(v));
  };
  const std::size_t d = m.dim;
  const std::size_t K = layout.count();
  const std::size_t S = static_cast<std::size_t>(b.new_nodes) + 1;
  std::vector<double> view_phi(K), view_theta(K);
  for (std::size_t v = 0; v < K; ++v) {
    view_phi[v] = env::wrap_angle(layout.heading_of(v));
    view_theta[v] = layout.elevation_of(v);
  }
  std::vector<double> q_phi(b.degree), q_theta(b.degree, 0.0);
  for (int i = 0; i < b.degree; ++i) q_phi[i] = env::wrap_angle(2.0 * env::kPi * i / b.degree);

  const auto& matcher = model.matcher();
  FlopsReport r;
  model::PathCache<float> text;
  {
    nn::flops::Scope scope;
    text = matcher.prepare_text(random(static_cast<std::size_t>(b.text_tokens), d));
    r.text_setup = scope.elapsed();
  }
  auto incremental = text;
  std::vector<Tensor<float>> committed;  // edge tokens on the path so far
  for (int t = 1; t <= b.steps; ++t) {
    StepFlops s;
    s.step = t;
    s.candidates = scenario_candidates(b, t);
    std::uint64_t ope = 0, ccm = 0;
    {
      auto views = random(K, m.raw_dim);
      nn::flops::Scope scope;
      model.edges().extract(q_phi, q_theta, views, view_phi, view_theta);
      ope = scope.elapsed();
    }
    {
      auto emb = random(s.candidates, d);
      nn::flops::Scope scope;
      model.scorer().scores(emb);
      ccm = scope.elapsed();
    }
    if (t > 1) committed.push_back(random(1, d));
    std::vector<Tensor<float>> suffixes;
    for (std::size_t i = 0; i + 1 < S; ++i) suffixes.push_back(random(1, d));
    suffixes.push_back(matcher.stop_token());

    {
      nn::flops::Scope scope;
      if (t == 1) matcher.commit_start(incremental);
      else matcher.commit(incremental, committed.back());
      matcher.embed_batch(incremental, suffixes);
      s.incremental = {ope, scope.elapsed(), ccm};
    }
    {
      auto scratch = text;
      nn::flops::Scope scope;
      matcher.commit_start(scratch);
      if (!committed.empty()) matcher.commit(scratch, nn::concat_rows<float>(committed));
      matcher.embed_batch(scratch, suffixes);
      s.naive = {ope, scope.elapsed(), ccm};
    }
    {
      nn::flops::Scope scope;
      for (std::size_t i = 0; i < S; ++i) {
        const bool stop = i + 1 == S;
        auto path = committed;
        if (!stop) path.push_back(suffixes[i]);
        matcher.embed_uncached(text, path.empty() ? Tensor<float>() : nn::concat_rows<float>(path), stop);
      }
      s.independent = {ope, scope.elapsed(), ccm};
    }
    r.steps.push_back(s);
  }
  return r;
}

double affine_r2(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ContractError("affine fit needs two or more paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (syy == 0.0) return 1.0;
  if (sxx == 0.0) return 0.0;
  return sxy * sxy / (sxx * syy);
}

namespace {

double g(std::uint64_t v) { return static_cast<double>(v) / 1e9; }

}  // namespace

std::string flops_report_text(const FlopsReport& r, const std::string& title) {
  std::ostringstream os;
  char line[200];
  os << title << "\n";
  std::snprintf(line, sizeof line, "instruction keys/values (once per episode): %.4f GFLOPs\n", g(r.text_setup));
  os << line;
  std::snprintf(line, sizeof line, "%4s %4s | %8s %8s %8s %8s | %8s %8s | %8s | %9s %9s\n", "step", "cand", "ope",
                "mam", "ccm", "incr", "naive", "indep", "naive/inc", "cum_incr", "cum_naive");
  os << line;
  std::uint64_t ci = 0, cn = 0;
  for (const auto& s : r.steps) {
    ci += s.incremental.total();
    cn += s.naive.total();
    std::snprintf(line, sizeof line, "%4d %4zu | %8.4f %8.4f %8.4f %8.4f | %8.4f %8.4f | %8.3f | %9.3f %9.3f\n",
                  s.step, s.candidates, g(s.incremental.ope), g(s.incremental.mam), g(s.incremental.ccm),
                  g(s.incremental.total()), g(s.naive.total()), g(s.independent.total()),
                  static_cast<double>(s.naive.total()) / static_cast<double>(s.incremental.total()), g(ci), g(cn));
    os << line;
  }
  return os.str();
}

std::string flops_report_json(const FlopsReport& r, const std::string& profile, const std::string& config_hash) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : r.steps) {
    auto mode = [](const FlopsBreakdown& b) {
      return nlohmann::json{{"ope", b.ope}, {"mam", b.mam}, {"ccm", b.ccm}, {"total", b.total()}};
    };
    steps.push_back({{"step", s.step},
                     {"candidates", s.candidates},
                     {"incremental", mode(s.incremental)},
                     {"naive", mode(s.naive)},
                     {"independent", mode(s.independent)}});
  }
  nlohmann::json j{{"schema", "trajnav.flops"},
                   {"schema_version", 1},
                   {"profile", profile},
                   {"config_hash", config_hash},
                   {"text_setup", r.text_setup},
                   {"steps", steps}};
  return j.dump();
}

}  // namespace trajnav::app
