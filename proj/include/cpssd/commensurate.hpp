// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cmath>

#include "cpssd/distributions.hpp"
#include "cpssd/errors.hpp"
#include "cpssd/quadrature.hpp"

// Per-source commensurate machinery. A historical effect estimate theta_k is
// projected to the new-experiment scale through a normal predictive whose
// precision nu_k carries a two-component Gamma mixture prior. Marginalising
// nu_k analytically yields a two-component location-scale-t mixture; the
// normal approximation matches its first two moments. nu_k itself is never
// materialised.

namespace cpssd {

// Hyperparameters (a01, b01, a02, b02) of the Gamma mixture prior on the
// predictive precision. Component 1 must be the vague (down-weighting)
// component: b01/(a01-1) > b02/(a02-1).
struct GammaMixtureHyper {
  double a01, b01, a02, b02;

  GammaMixtureHyper(double a01_, double b01_, double a02_, double b02_)
      : a01(a01_), b01(b01_), a02(a02_), b02(b02_) {
    if (!(a01 > 0.0 && b01 > 0.0 && a02 > 0.0 && b02 > 0.0)) {
      throw ValidationError("GammaMixtureHyper: all hyperparameters must be > 0");
    }
    if (a01 > 1.0 && a02 > 1.0 &&
        !(b01 / (a01 - 1.0) > b02 / (a02 - 1.0))) {
      throw ValidationError(
          "GammaMixtureHyper: component 1 must be the vague component "
          "(b01/(a01-1) > b02/(a02-1))");
    }
  }

  GammaParams component1() const { return GammaParams(a01, b01); }
  GammaParams component2() const { return GammaParams(a02, b02); }
};

// Prior probability of incommensurability. w = 1 disables borrowing from the
// source; w = 0 pools fully.
struct CommensurabilityWeight {
  double w;

  explicit CommensurabilityWeight(double w_) : w(w_) {
    if (!(w >= 0.0 && w <= 1.0)) {
      throw ValidationError("CommensurabilityWeight.w: must lie in [0, 1]");
    }
  }
};

// Marginal predictive for theta-tilde given theta_k: a proper two-component
// mixture of location-scale-t densities sharing the location theta_k.
struct TMixtureMarginal {
  double weight;  // mass on component 1
  LocationScaleT component1;
  LocationScaleT component2;

  double pdf(double x) const {
    return weight * t_pdf(x, component1) + (1.0 - weight) * t_pdf(x, component2);
  }
  double location() const { return component1.location; }
};

// Marginalise the predictive precision: component i has df 2*a0i and squared
// scale b0i/a0i. The mixture is assembled from proper t densities, which
// fixes the normalising constant.
inline TMixtureMarginal marginal_t_mixture(double theta_k, const CommensurabilityWeight& w,
                                           const GammaMixtureHyper& hyper) {
  return TMixtureMarginal{
      w.w,
      LocationScaleT(2.0 * hyper.a01, theta_k, std::sqrt(hyper.b01 / hyper.a01)),
      LocationScaleT(2.0 * hyper.a02, theta_k, std::sqrt(hyper.b02 / hyper.a02))};
}

// Variance added by the predictive step under the moment-matched normal
// approximation: w*b01/(a01-1) + (1-w)*b02/(a02-1). Requires a01, a02 > 1.
inline double approximation_variance(const CommensurabilityWeight& w,
                                     const GammaMixtureHyper& hyper) {
  if (!(hyper.a01 > 1.0 && hyper.a02 > 1.0)) {
    throw ValidationError(
        "GammaMixtureHyper: a01 and a02 must exceed 1 for the normal approximation");
  }
  return w.w * hyper.b01 / (hyper.a01 - 1.0) +
         (1.0 - w.w) * hyper.b02 / (hyper.a02 - 1.0);
}

inline NormalParams normal_approximation(double theta_k, const CommensurabilityWeight& w,
                                         const GammaMixtureHyper& hyper) {
  return NormalParams(theta_k, approximation_variance(w, hyper));
}

struct MixtureMoments {
  double mean;
  double variance;
};

// First two moments of the t mixture by quadrature; an independent route to
// the closed-form approximation variance. Both component dfs must exceed 2.
inline MixtureMoments mixture_moments(const TMixtureMarginal& m,
                                      const QuadratureSpec& spec = {}) {
  if (!(m.component1.df > 2.0 && m.component2.df > 2.0)) {
    throw UndefinedMomentError(
        "mixture_moments: variance undefined unless both component dfs exceed 2");
  }
  const double inf = std::numeric_limits<double>::infinity();
  const double mean =
      integrate([&m](double x) { return x * m.pdf(x); }, -inf, inf, spec).value;
  const double variance =
      integrate([&m, mean](double x) {
        const double d = x - mean;
        return d * d * m.pdf(x);
      }, -inf, inf, spec).value;
  return {mean, variance};
}

// Total variation distance (1/2) * integral |f_mixture - f_normal|, the
// accuracy diagnostic for the normal approximation.
inline double approximation_error(const TMixtureMarginal& m, const NormalParams& n,
                                  const QuadratureSpec& spec = {}) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto result = integrate(
      [&m, &n](double x) { return std::fabs(m.pdf(x) - normal_pdf(x, n)); }, -inf, inf, spec);
  return 0.5 * result.value;
}

}  // namespace cpssd
