// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "cpssd/errors.hpp"
#include "cpssd/special.hpp"

// Probability kernels used throughout: normal, gamma (shape-rate),
// inverse-gamma (shape-scale) and the location-scale Student-t. Quantiles are
// obtained by monotone bracketing plus safeguarded Newton refinement on the
// CDF rather than closed-form approximations, so the CDF/quantile round-trip
// is verifiable directly.

namespace cpssd {

struct NormalParams {
  double mean;
  double variance;

  NormalParams(double mean_, double variance_) : mean(mean_), variance(variance_) {
    if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(mean)) {
      throw ValidationError("NormalParams.variance: must be finite and > 0");
    }
  }
  double sd() const { return std::sqrt(variance); }
};

struct GammaParams {
  double shape;
  double rate;

  GammaParams(double shape_, double rate_) : shape(shape_), rate(rate_) {
    if (!(shape > 0.0)) throw ValidationError("GammaParams.shape: must be > 0");
    if (!(rate > 0.0)) throw ValidationError("GammaParams.rate: must be > 0");
  }
  double mean() const { return shape / rate; }
};

struct InvGammaParams {
  double shape;
  double scale;

  InvGammaParams(double shape_, double scale_) : shape(shape_), scale(scale_) {
    if (!(shape > 0.0)) throw ValidationError("InvGammaParams.shape: must be > 0");
    if (!(scale > 0.0)) throw ValidationError("InvGammaParams.scale: must be > 0");
  }
};

struct LocationScaleT {
  double df;
  double location;
  double scale;  // standard-deviation-like scale, not its square

  LocationScaleT(double df_, double location_, double scale_)
      : df(df_), location(location_), scale(scale_) {
    if (!(df > 0.0)) throw ValidationError("LocationScaleT.df: must be > 0");
    if (!(scale > 0.0)) throw ValidationError("LocationScaleT.scale: must be > 0");
  }
  // Defined only for df > 2.
  double variance() const {
    if (!(df > 2.0)) {
      throw UndefinedMomentError("LocationScaleT.variance: undefined for df <= 2");
    }
    return df / (df - 2.0) * scale * scale;
  }
};

// ---------------------------------------------------------------------------
// Normal

inline double normal_pdf(double x, const NormalParams& p) {
  const double z = (x - p.mean) / p.sd();
  return std::exp(-0.5 * z * z) / (p.sd() * std::sqrt(2.0 * std::numbers::pi));
}

inline double normal_cdf(double x, const NormalParams& p) {
  const double z = (x - p.mean) / p.sd();
  return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0);
}

inline double standard_normal_cdf(double z) {
  return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0);
}

namespace detail {

// Safeguarded Newton on a monotone CDF within a bracket known to contain the
// quantile. Bisects whenever the Newton step leaves the bracket or the
// derivative is unusable.
template <class Cdf, class Pdf>
double invert_cdf(double q, double lo, double hi, Cdf cdf, Pdf pdf) {
  double flo = cdf(lo) - q;
  double fhi = cdf(hi) - q;
  if (flo > 0.0 || fhi < 0.0) throw NumericalError("invert_cdf: bracket does not straddle q");
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double fx = cdf(x) - q;
    if (fx == 0.0) return x;
    if (fx > 0.0) hi = x; else lo = x;
    const double deriv = pdf(x);
    double next = (deriv > 0.0) ? x - fx / deriv : std::numeric_limits<double>::quiet_NaN();
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 1e-15 * (std::fabs(x) + 1e-300)) return next;
    x = next;
    if (hi - lo <= 1e-16 * (std::fabs(lo) + std::fabs(hi))) return x;
  }
  return x;
}

inline void check_probability_open(double q, const char* who) {
  if (!(q > 0.0 && q < 1.0)) {
    throw ValidationError(std::string(who) + ": probability must lie in (0, 1)");
  }
}

}  // namespace detail

inline double normal_quantile(double q, const NormalParams& p) {
  detail::check_probability_open(q, "normal_quantile");
  // Expand a symmetric bracket around the mean until it straddles q.
  double half = p.sd();
  while (normal_cdf(p.mean - half, p) > q || normal_cdf(p.mean + half, p) < q) {
    half *= 2.0;
    if (!std::isfinite(half)) throw NumericalError("normal_quantile: bracket expansion failed");
  }
  return detail::invert_cdf(
      q, p.mean - half, p.mean + half,
      [&p](double x) { return normal_cdf(x, p); },
      [&p](double x) { return normal_pdf(x, p); });
}

inline double standard_normal_quantile(double q) {
  return normal_quantile(q, NormalParams(0.0, 1.0));
}

// Upper a-th quantile z_a = Phi^{-1}(1 - a), the form used by the SSD bounds.
inline double upper_standard_normal_quantile(double a) {
  detail::check_probability_open(a, "upper_standard_normal_quantile");
  return standard_normal_quantile(1.0 - a);
}

// ---------------------------------------------------------------------------
// Gamma (shape-rate)

inline double gamma_pdf(double x, const GammaParams& p) {
  if (x <= 0.0) return 0.0;
  return std::exp(p.shape * std::log(p.rate) + (p.shape - 1.0) * std::log(x) -
                  p.rate * x - log_gamma(p.shape));
}

inline double gamma_cdf(double x, const GammaParams& p) {
  if (x <= 0.0) return 0.0;
  return gamma_p(p.shape, p.rate * x);
}

inline double gamma_quantile(double q, const GammaParams& p) {
  detail::check_probability_open(q, "gamma_quantile");
  // Wilson-Hilferty starting point, then expand to a genuine bracket.
  const double g = 2.0 / (9.0 * p.shape);
  const double z = standard_normal_quantile(q);
  double guess = p.shape / p.rate * std::pow(std::max(1.0 - g + z * std::sqrt(g), 0.1), 3.0);
  if (!(guess > 0.0) || !std::isfinite(guess)) guess = p.shape / p.rate;
  double lo = guess, hi = guess;
  while (gamma_cdf(lo, p) > q) lo *= 0.5;
  while (gamma_cdf(hi, p) < q) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericalError("gamma_quantile: bracket expansion failed");
  }
  return detail::invert_cdf(
      q, lo, hi,
      [&p](double x) { return gamma_cdf(x, p); },
      [&p](double x) { return gamma_pdf(x, p); });
}

struct GammaSummary {
  double mean;
  double q025;
  double q975;
};

// Mean with the symmetric 95% credible bounds, as reported for the mixture
// components of the commensurability prior.
inline GammaSummary gamma_summary(const GammaParams& p) {
  return {p.mean(), gamma_quantile(0.025, p), gamma_quantile(0.975, p)};
}

// ---------------------------------------------------------------------------
// Inverse gamma (shape-scale)

inline double invgamma_pdf(double x, const InvGammaParams& p) {
  if (x <= 0.0) return 0.0;
  return std::exp(p.shape * std::log(p.scale) - (p.shape + 1.0) * std::log(x) -
                  p.scale / x - log_gamma(p.shape));
}

inline double invgamma_cdf(double x, const InvGammaParams& p) {
  if (x <= 0.0) return 0.0;
  return gamma_q(p.shape, p.scale / x);
}

inline double invgamma_quantile(double q, const InvGammaParams& p) {
  detail::check_probability_open(q, "invgamma_quantile");
  return p.scale / gamma_quantile(1.0 - q, GammaParams(p.shape, 1.0));
}

inline double invgamma_mean(const InvGammaParams& p) {
  if (!(p.shape > 1.0)) {
    throw UndefinedMomentError("invgamma_mean: mean undefined unless shape > 1");
  }
  return p.scale / (p.shape - 1.0);
}

// ---------------------------------------------------------------------------
// Location-scale Student-t

inline double t_pdf(double x, const LocationScaleT& p) {
  const double z = (x - p.location) / p.scale;
  const double ln = log_gamma(0.5 * (p.df + 1.0)) - log_gamma(0.5 * p.df) -
                    0.5 * std::log(p.df * std::numbers::pi) - std::log(p.scale) -
                    0.5 * (p.df + 1.0) * std::log1p(z * z / p.df);
  return std::exp(ln);
}

inline double t_cdf(double x, const LocationScaleT& p) {
  const double z = (x - p.location) / p.scale;
  if (z == 0.0) return 0.5;
  const double w = p.df / (p.df + z * z);
  const double tail = 0.5 * inc_beta(0.5 * p.df, 0.5, w);
  return z > 0.0 ? 1.0 - tail : tail;
}

inline double t_quantile(double q, const LocationScaleT& p) {
  detail::check_probability_open(q, "t_quantile");
  double half = p.scale;
  while (t_cdf(p.location - half, p) > q || t_cdf(p.location + half, p) < q) {
    half *= 2.0;
    if (!std::isfinite(half)) throw NumericalError("t_quantile: bracket expansion failed");
  }
  return detail::invert_cdf(
      q, p.location - half, p.location + half,
      [&p](double x) { return t_cdf(x, p); },
      [&p](double x) { return t_pdf(x, p); });
}

}  // namespace cpssd
