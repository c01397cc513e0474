// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cpssd/commensurate.hpp"
#include "cpssd/distributions.hpp"
#include "cpssd/errors.hpp"

// Synthesis of K historical summaries into the collective normal prior for
// the effect difference: softmax source weights p_k from the
// incommensurability weights w_k, per-source marginal variances
// xi_k^2 = s_k^2 + approximation variance, and the convolution
// N(sum p_k lambda_k, sum p_k^2 xi_k^2).

namespace cpssd {

// One historical source: posterior summary N(m, v) for theta_k plus its
// incommensurability weight.
struct HistoricalSummary {
  double m;
  double v;  // posterior variance s_k^2 (squared units)
  CommensurabilityWeight w;

  HistoricalSummary(double m_, double v_, CommensurabilityWeight w_)
      : m(m_), v(v_), w(w_) {
    if (!(v > 0.0)) throw ValidationError("HistoricalSummary.v: must be > 0");
  }
};

// Softmax concentration rule p_k proportional to exp(-w_k^2 / s0).
struct WeightRule {
  double s0;

  explicit WeightRule(double s0_) : s0(s0_) {
    if (!(s0 > 0.0)) throw ValidationError("WeightRule.s0: must be > 0");
  }
};

struct SourceTerm {
  double lambda;  // m_k
  double xi2;     // s_k^2 + approximation variance
  double p;       // softmax weight
};

struct CollectivePrior {
  std::vector<SourceTerm> per_source;
  double mean = 0.0;
  double variance = 0.0;

  std::size_t K() const { return per_source.size(); }
  NormalParams as_normal() const { return NormalParams(mean, variance); }
};

// p_k = exp(-w_k^2/s0) / sum_j exp(-w_j^2/s0), computed with a max-shift so
// extreme s0 values stay finite. Smaller w_k gives larger p_k.
inline std::vector<double> compute_weights(const std::vector<CommensurabilityWeight>& ws,
                                           const WeightRule& rule) {
  if (ws.empty()) throw ValidationError("compute_weights: source list must be nonempty");
  double min_w2 = ws.front().w * ws.front().w;
  for (const auto& w : ws) min_w2 = std::min(min_w2, w.w * w.w);
  std::vector<double> p;
  p.reserve(ws.size());
  double total = 0.0;
  for (const auto& w : ws) {
    const double e = std::exp(-(w.w * w.w - min_w2) / rule.s0);
    p.push_back(e);
    total += e;
  }
  for (auto& pk : p) pk /= total;
  return p;
}

namespace detail {

inline CollectivePrior assemble_collective(const std::vector<HistoricalSummary>& sources,
                                           const GammaMixtureHyper& hyper,
                                           const std::vector<double>& p) {
  CollectivePrior prior;
  prior.per_source.reserve(sources.size());
  for (std::size_t k = 0; k < sources.size(); ++k) {
    const double xi2 = sources[k].v + approximation_variance(sources[k].w, hyper);
    prior.per_source.push_back({sources[k].m, xi2, p[k]});
    prior.mean += p[k] * sources[k].m;
    prior.variance += p[k] * p[k] * xi2;
  }
  if (!(prior.variance > 0.0)) {
    throw ValidationError("CollectivePrior.variance: must be > 0");
  }
  return prior;
}

}  // namespace detail

inline CollectivePrior build_collective_prior(const std::vector<HistoricalSummary>& sources,
                                              const GammaMixtureHyper& hyper,
                                              const WeightRule& rule) {
  if (sources.empty()) {
    throw ValidationError("build_collective_prior: source list must be nonempty");
  }
  std::vector<CommensurabilityWeight> ws;
  ws.reserve(sources.size());
  for (const auto& s : sources) ws.push_back(s.w);
  return detail::assemble_collective(sources, hyper, compute_weights(ws, rule));
}

struct CredibleInterval {
  double lo;
  double hi;
};

// Symmetric interval mean +/- z_{(1-level)/2} * sd.
inline CredibleInterval prior_credible_interval(const CollectivePrior& prior, double level) {
  detail::check_probability_open(level, "prior_credible_interval");
  const double z = upper_standard_normal_quantile(0.5 * (1.0 - level));
  const double half = z * std::sqrt(prior.variance);
  return {prior.mean - half, prior.mean + half};
}

// Squared Hellinger distance between two normal summaries, in [0, 1].
inline double hellinger_squared(const NormalParams& p, const NormalParams& q) {
  const double sp = p.sd(), sq = q.sd();
  const double sum_var = p.variance + q.variance;
  const double d = p.mean - q.mean;
  return 1.0 - std::sqrt(2.0 * sp * sq / sum_var) * std::exp(-d * d / (4.0 * sum_var));
}

// Comparison modes for the collective prior: override all w_k to 0 or 1, or
// concentrate the full weight on one source.
struct WeightingMode {
  enum class Kind { no_robustification, no_borrowing, single_source };
  Kind kind;
  std::size_t source_index = 0;  // 0-based; single_source only

  static WeightingMode no_robustification() { return {Kind::no_robustification, 0}; }
  static WeightingMode no_borrowing() { return {Kind::no_borrowing, 0}; }
  static WeightingMode single_source(std::size_t k) { return {Kind::single_source, k}; }
};

inline CollectivePrior special_weighting(const std::vector<HistoricalSummary>& sources,
                                         const GammaMixtureHyper& hyper,
                                         const WeightRule& rule,
                                         const WeightingMode& mode) {
  if (sources.empty()) {
    throw ValidationError("special_weighting: source list must be nonempty");
  }
  switch (mode.kind) {
    case WeightingMode::Kind::no_robustification:
    case WeightingMode::Kind::no_borrowing: {
      const double w_override =
          mode.kind == WeightingMode::Kind::no_robustification ? 0.0 : 1.0;
      std::vector<HistoricalSummary> overridden;
      overridden.reserve(sources.size());
      for (const auto& s : sources) {
        overridden.emplace_back(s.m, s.v, CommensurabilityWeight(w_override));
      }
      return build_collective_prior(overridden, hyper, rule);
    }
    case WeightingMode::Kind::single_source: {
      if (mode.source_index >= sources.size()) {
        throw ValidationError("special_weighting: single_source index " +
                              std::to_string(mode.source_index) + " out of range for K=" +
                              std::to_string(sources.size()));
      }
      std::vector<double> p(sources.size(), 0.0);
      p[mode.source_index] = 1.0;
      return detail::assemble_collective(sources, hyper, p);
    }
  }
  throw ValidationError("special_weighting: unknown mode");
}

}  // namespace cpssd
