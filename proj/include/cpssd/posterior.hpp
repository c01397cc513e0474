// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <tuple>

#include "cpssd/collective.hpp"
#include "cpssd/distributions.hpp"
#include "cpssd/errors.hpp"
#include "cpssd/quadrature.hpp"

// Posterior and predictive computations for the effect difference. Inference
// flows entirely through the difference in sample means xbar_delta (the
// sufficient reduction); the groupwise means are never modelled separately.

namespace cpssd {

// Common variance of the new experiment: exactly known, or unknown with an
// Inv-Gamma(c/2, c*S/2) prior tied to the collective prior variance S.
class VarianceModel {
 public:
  static VarianceModel known(double sigma2) {
    if (!(sigma2 > 0.0)) throw ValidationError("VarianceModel.known: sigma2 must be > 0");
    return VarianceModel(true, sigma2, 0.0);
  }
  static VarianceModel unknown(double c) {
    if (!(c > 0.0)) throw ValidationError("VarianceModel.unknown: c must be > 0");
    return VarianceModel(false, 0.0, c);
  }

  bool is_known() const { return known_; }
  double sigma2() const {
    if (!known_) throw ValidationError("VarianceModel.sigma2: variance is unknown");
    return sigma2_;
  }
  double dof() const {
    if (known_) throw ValidationError("VarianceModel.dof: variance is known");
    return c_;
  }

 private:
  VarianceModel(bool known, double sigma2, double c) : known_(known), sigma2_(sigma2), c_(c) {}
  bool known_;
  double sigma2_;
  double c_;
};

// Implied prior on sigma0^2 for the unknown-variance model.
inline InvGammaParams variance_prior(double c, double prior_variance) {
  return InvGammaParams(0.5 * c, 0.5 * c * prior_variance);
}

struct NewData {
  int nA;
  int nB;
  double xbar_delta;  // observed difference in sample means

  NewData(int nA_, int nB_, double xbar_delta_)
      : nA(nA_), nB(nB_), xbar_delta(xbar_delta_) {
    if (nA < 1 || nB < 1) throw ValidationError("NewData: nA and nB must be >= 1");
  }
  double variance_factor() const { return 1.0 / nA + 1.0 / nB; }
};

struct PosteriorNormal {
  double mean;      // eta
  double variance;  // sigma_N^2
};

// Conjugate update, Eq.-(7) algebra: precisions add, the mean blends the
// prior mean and xbar_delta with weights proportional to the opposing
// variances.
inline PosteriorNormal posterior_known(const CollectivePrior& prior, double sigma2,
                                       const NewData& data) {
  if (!(sigma2 > 0.0)) throw ValidationError("posterior_known: sigma2 must be > 0");
  const double S = prior.variance;
  const double vt = data.variance_factor() * sigma2;
  const double variance = 1.0 / (1.0 / S + 1.0 / vt);
  const double blend = vt / (S + vt);
  const double mean = blend * prior.mean + (1.0 - blend) * data.xbar_delta;
  return {mean, variance};
}

// Same formula with sigma0^2 a drawn value.
inline PosteriorNormal posterior_conditional_unknown(const CollectivePrior& prior,
                                                     double sigma2_draw,
                                                     const NewData& data) {
  return posterior_known(prior, sigma2_draw, data);
}

// Marginal of xbar_delta unconditional on the effect difference:
// N(prior mean, (1/nA + 1/nB) sigma0^2 + S).
inline NormalParams marginal_predictive(const CollectivePrior& prior, double sigma2,
                                        int nA, int nB) {
  if (!(sigma2 > 0.0)) throw ValidationError("marginal_predictive: sigma2 must be > 0");
  if (nA < 1 || nB < 1) throw ValidationError("marginal_predictive: nA and nB must be >= 1");
  return NormalParams(prior.mean, (1.0 / nA + 1.0 / nB) * sigma2 + prior.variance);
}

namespace detail {

// Unnormalised marginal posterior kernel under the unknown-variance model:
// normal prior kernel times a location-scale-t kernel with df c, location
// xbar_delta and squared scale (1/nA + 1/nB) * S.
inline double marginal_posterior_kernel(double mu, double prior_mean, double S, double c,
                                        const NewData& data) {
  const double dp = mu - prior_mean;
  const double dd = mu - data.xbar_delta;
  const double scale2 = data.variance_factor() * S;
  return std::exp(-0.5 * dp * dp / S) *
         std::pow(1.0 + dd * dd / (c * scale2), -0.5 * (c + 1.0));
}

inline double marginal_posterior_normalizer(const CollectivePrior& prior, double c,
                                            const NewData& data, const QuadratureSpec& spec) {
  using Key = std::tuple<double, double, double, int, int, double>;
  static std::map<Key, double> cache;
  static std::shared_mutex cache_mutex;

  const Key key{prior.mean, prior.variance, c, data.nA, data.nB, data.xbar_delta};
  {
    std::shared_lock lock(cache_mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double inf = std::numeric_limits<double>::infinity();
  const double mean = prior.mean;
  const double S = prior.variance;
  const double z = integrate(
      [&](double mu) { return marginal_posterior_kernel(mu, mean, S, c, data); },
      -inf, inf, spec).value;
  std::unique_lock lock(cache_mutex);
  cache.emplace(key, z);
  return z;
}

}  // namespace detail

// Normalised marginal posterior density of the effect difference with
// sigma0^2 integrated out. The normalising constant is computed numerically
// once per (prior, c, data) and cached for concurrent readers.
inline double marginal_posterior_density_unknown(double mu, const CollectivePrior& prior,
                                                 double c, const NewData& data,
                                                 const QuadratureSpec& spec = {}) {
  if (!(c > 0.0)) throw ValidationError("marginal_posterior_density_unknown: c must be > 0");
  const double z = detail::marginal_posterior_normalizer(prior, c, data, spec);
  return detail::marginal_posterior_kernel(mu, prior.mean, prior.variance, c, data) / z;
}

}  // namespace cpssd
