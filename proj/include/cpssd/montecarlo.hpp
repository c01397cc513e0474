// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <thread>
#include <vector>

#include "cpssd/collective.hpp"
#include "cpssd/distributions.hpp"
#include "cpssd/errors.hpp"
#include "cpssd/posterior.hpp"
#include "cpssd/ssd.hpp"

// Seed-deterministic simulation oracle. The generator is pinned in-repo
// (xoshiro256++ seeded through splitmix64) so streams are reproducible across
// platforms and thread counts: every chunk of draws gets an independently
// derived substream and partial results are reduced in fixed chunk order.

namespace cpssd {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// xoshiro256++ (Blackman & Vigna), state filled by a splitmix64 chain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl64(state_[3], 45);
    return result;
  }

  // Uniform on the open interval (0, 1).
  double uniform01() { return (static_cast<double>(next() >> 12) + 0.5) * 0x1.0p-52; }

 private:
  std::array<std::uint64_t, 4> state_;
};

// Box-Muller transform of two uniforms.
inline double sample_standard_normal(Rng& rng) {
  const double u1 = rng.uniform01();
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double sample_normal(Rng& rng, const NormalParams& p) {
  return p.mean + p.sd() * sample_standard_normal(rng);
}

// Marsaglia-Tsang squeeze/rejection sampler, unit rate, any shape > 0.
inline double sample_gamma(Rng& rng, double shape) {
  if (!(shape > 0.0)) throw ValidationError("sample_gamma: shape must be > 0");
  if (shape < 1.0) {
    const double boost = std::pow(rng.uniform01(), 1.0 / shape);
    return sample_gamma(rng, shape + 1.0) * boost;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = sample_standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

// Scale divided by a Gamma(shape, 1) variate.
inline double sample_invgamma(Rng& rng, const InvGammaParams& p) {
  return p.scale / sample_gamma(rng, p.shape);
}

struct SimulationPlan {
  std::int64_t draws;
  std::uint64_t seed;
  std::int64_t chunk_size = 1 << 14;

  void validate() const {
    if (draws < 1) throw ValidationError("SimulationPlan.draws: must be >= 1");
    if (chunk_size < 1) throw ValidationError("SimulationPlan.chunk_size: must be >= 1");
  }
};

struct SimulationEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t draws_used = 0;
};

namespace detail {

inline std::uint64_t chunk_seed(std::uint64_t seed, std::int64_t chunk_index) {
  std::uint64_t sm = seed ^ (0xD1B54A32D192ED03ull * static_cast<std::uint64_t>(chunk_index + 1));
  splitmix64(sm);
  return splitmix64(sm);
}

struct ChunkStats {
  double sum = 0.0;
  double sum_sq = 0.0;
};

// Runs draw_fn once per draw in deterministic chunks; each chunk has its own
// derived substream, so the result does not depend on the thread count.
template <class DrawFn>
SimulationEstimate run_chunked(const SimulationPlan& plan, int threads, DrawFn draw_fn) {
  plan.validate();
  const std::int64_t chunks = (plan.draws + plan.chunk_size - 1) / plan.chunk_size;
  std::vector<ChunkStats> partials(static_cast<std::size_t>(chunks));

  auto run_chunk = [&](std::int64_t j) {
    Rng rng(chunk_seed(plan.seed, j));
    const std::int64_t begin = j * plan.chunk_size;
    const std::int64_t end = std::min(begin + plan.chunk_size, plan.draws);
    ChunkStats stats;
    for (std::int64_t i = begin; i < end; ++i) {
      const double x = draw_fn(rng);
      stats.sum += x;
      stats.sum_sq += x * x;
    }
    partials[static_cast<std::size_t>(j)] = stats;
  };

  int worker_count = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  worker_count = std::max(1, std::min<int>(worker_count, static_cast<int>(std::min<std::int64_t>(chunks, 32))));
  if (worker_count == 1) {
    for (std::int64_t j = 0; j < chunks; ++j) run_chunk(j);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(worker_count));
    for (int t = 0; t < worker_count; ++t) {
      workers.emplace_back([&, t] {
        for (std::int64_t j = t; j < chunks; j += worker_count) run_chunk(j);
      });
    }
    for (auto& worker : workers) worker.join();
  }

  double sum = 0.0, sum_sq = 0.0;
  for (const auto& stats : partials) {  // fixed chunk order
    sum += stats.sum;
    sum_sq += stats.sum_sq;
  }
  const double n = static_cast<double>(plan.draws);
  SimulationEstimate est;
  est.value = sum / n;
  est.draws_used = plan.draws;
  if (plan.draws > 1) {
    const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
    est.std_error = std::sqrt(var / n);
  }
  return est;
}

inline double draw_sigma2(Rng& rng, const VarianceModel& vm, double prior_variance) {
  if (vm.is_known()) return vm.sigma2();
  return sample_invgamma(rng, variance_prior(vm.dof(), prior_variance));
}

}  // namespace detail

// Joint-simulation estimate of the average coverage of the fixed-length HPD
// interval posterior mean +/- l0/2: draw sigma0^2 (if unknown), the effect
// from the prior, then the data summary, and score the indicator. Binomial
// standard error. nA = nB = 0 reports the prior-only coverage exactly.
inline SimulationEstimate simulate_average_coverage(const CollectivePrior& prior,
                                                    const VarianceModel& vm, int nA, int nB,
                                                    double l0, const SimulationPlan& plan,
                                                    int threads = 0) {
  if (!(l0 > 0.0)) throw ValidationError("simulate_average_coverage: l0 must be > 0");
  if (nA == 0 && nB == 0) {
    const double cov = 2.0 * standard_normal_cdf(0.5 * l0 / std::sqrt(prior.variance)) - 1.0;
    return {cov, 0.0, 0};
  }
  const NormalParams prior_normal = prior.as_normal();
  const double half = 0.5 * l0;
  auto est = detail::run_chunked(plan, threads, [&](Rng& rng) -> double {
    const double sigma2 = detail::draw_sigma2(rng, vm, prior.variance);
    const double mu = sample_normal(rng, prior_normal);
    const double vt = (1.0 / nA + 1.0 / nB) * sigma2;
    const double xbar = mu + std::sqrt(vt) * sample_standard_normal(rng);
    const PosteriorNormal post =
        posterior_conditional_unknown(prior, sigma2, NewData(nA, nB, xbar));
    return std::fabs(mu - post.mean) <= half ? 1.0 : 0.0;
  });
  est.std_error = std::sqrt(est.value * (1.0 - est.value) / static_cast<double>(plan.draws));
  return est;
}

// Variance-reduced second route to the same estimand: condition on sigma0^2
// and average the analytic coverage 2*Phi(l0 / (2 sigma_N)) - 1. Exact when
// the variance is known.
inline SimulationEstimate simulate_average_coverage_conditional(
    const CollectivePrior& prior, const VarianceModel& vm, int nA, int nB, double l0,
    const SimulationPlan& plan, int threads = 0) {
  if (!(l0 > 0.0)) throw ValidationError("simulate_average_coverage_conditional: l0 must be > 0");
  if (nA == 0 && nB == 0) {
    const double cov = 2.0 * standard_normal_cdf(0.5 * l0 / std::sqrt(prior.variance)) - 1.0;
    return {cov, 0.0, 0};
  }
  if (vm.is_known()) {
    return {detail::coverage_known(prior.variance, vm.sigma2(), nA, nB, l0), 0.0, 0};
  }
  return detail::run_chunked(plan, threads, [&](Rng& rng) -> double {
    const double sigma2 = detail::draw_sigma2(rng, vm, prior.variance);
    return detail::coverage_known(prior.variance, sigma2, nA, nB, l0);
  });
}

// Average credible-interval length 2 z_{alpha0/2} sigma_N; sigma_N does not
// depend on the data, so only sigma0^2 is sampled. Known variance gives a
// zero-variance constant.
inline SimulationEstimate simulate_average_length(const CollectivePrior& prior,
                                                  const VarianceModel& vm, int nA, int nB,
                                                  double alpha0, const SimulationPlan& plan,
                                                  int threads = 0) {
  if (!(alpha0 > 0.0 && alpha0 < 1.0)) {
    throw ValidationError("simulate_average_length: alpha0 must lie in (0, 1)");
  }
  const double two_z = 2.0 * detail::z_upper(alpha0);
  if (nA == 0 && nB == 0) return {two_z * std::sqrt(prior.variance), 0.0, 0};
  if (vm.is_known()) {
    const double sn = std::sqrt(detail::sigma_n2(prior.variance, vm.sigma2(), nA, nB));
    return {two_z * sn, 0.0, 0};
  }
  return detail::run_chunked(plan, threads, [&](Rng& rng) -> double {
    const double sigma2 = detail::draw_sigma2(rng, vm, prior.variance);
    return two_z * std::sqrt(detail::sigma_n2(prior.variance, sigma2, nA, nB));
  });
}

// Average posterior variance E[sigma_N^2] over sigma0^2 draws.
inline SimulationEstimate simulate_average_posterior_variance(const CollectivePrior& prior,
                                                              const VarianceModel& vm, int nA,
                                                              int nB,
                                                              const SimulationPlan& plan,
                                                              int threads = 0) {
  if (nA == 0 && nB == 0) return {prior.variance, 0.0, 0};
  if (vm.is_known()) {
    return {detail::sigma_n2(prior.variance, vm.sigma2(), nA, nB), 0.0, 0};
  }
  return detail::run_chunked(plan, threads, [&](Rng& rng) -> double {
    const double sigma2 = detail::draw_sigma2(rng, vm, prior.variance);
    return detail::sigma_n2(prior.variance, sigma2, nA, nB);
  });
}

}  // namespace cpssd
