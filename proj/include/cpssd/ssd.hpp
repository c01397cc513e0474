// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "cpssd/collective.hpp"
#include "cpssd/distributions.hpp"
#include "cpssd/errors.hpp"
#include "cpssd/posterior.hpp"
#include "cpssd/quadrature.hpp"

// Sample-size solvers for the three criteria. With known variance all three
// have closed-form bounds on the effective size nA*nB/(nA+nB); with unknown
// variance the ACC and APVC bounds substitute E[sigma0^2] = c*S/(c-2) while
// the ALC requires a quadrature-backed search over total n. The reported
// "achieved" value is the metric each solver controls: the exact coverage /
// length / variance for known variance, the plug-in value at E[sigma0^2] for
// the unknown-variance closed forms, and the quadrature average length for
// the ALC search.

namespace cpssd {

struct AccCriterion {
  double l0;     // HPD interval length
  double alpha;  // 1 - target average coverage
};

struct AlcCriterion {
  double l;       // bound on the average HPD length
  double alpha0;  // fixed credible level of the interval
};

struct ApvcCriterion {
  double eps0;  // bound on the average posterior variance
};

using Criterion = std::variant<AccCriterion, AlcCriterion, ApvcCriterion>;

inline void validate(const Criterion& crit) {
  std::visit(
      [](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, AccCriterion>) {
          if (!(c.l0 > 0.0)) throw ValidationError("Criterion.acc.l0: must be > 0");
          if (!(c.alpha > 0.0 && c.alpha < 1.0)) {
            throw ValidationError("Criterion.acc.alpha: must lie in (0, 1)");
          }
        } else if constexpr (std::is_same_v<T, AlcCriterion>) {
          if (!(c.l > 0.0)) throw ValidationError("Criterion.alc.l: must be > 0");
          if (!(c.alpha0 > 0.0 && c.alpha0 < 1.0)) {
            throw ValidationError("Criterion.alc.alpha0: must lie in (0, 1)");
          }
        } else {
          if (!(c.eps0 > 0.0)) throw ValidationError("Criterion.apvc.eps0: must be > 0");
        }
      },
      crit);
}

inline const char* criterion_name(const Criterion& crit) {
  if (std::holds_alternative<AccCriterion>(crit)) return "acc";
  if (std::holds_alternative<AlcCriterion>(crit)) return "alc";
  return "apvc";
}

struct Allocation {
  int ratio_A = 1;
  int ratio_B = 1;

  void validate() const {
    if (ratio_A < 1 || ratio_B < 1) {
      throw ValidationError("Allocation: ratio_A and ratio_B must be >= 1");
    }
  }
};

// Split a total into (nA, nB): nA is the ratio share rounded to the nearest
// integer (half up), clamped so both arms get at least one unit.
inline std::pair<int, int> split_total(int total, const Allocation& alloc) {
  alloc.validate();
  if (total < 2) throw ValidationError("split_total: total must be >= 2");
  const std::int64_t r = alloc.ratio_A + alloc.ratio_B;
  std::int64_t nA = (2 * static_cast<std::int64_t>(total) * alloc.ratio_A + r) / (2 * r);
  nA = std::max<std::int64_t>(1, std::min<std::int64_t>(nA, total - 1));
  return {static_cast<int>(nA), static_cast<int>(total - nA)};
}

inline double effective_size(int nA, int nB) {
  return static_cast<double>(nA) * nB / (static_cast<double>(nA) + nB);
}

struct SSDResult {
  bool feasible = false;
  std::optional<double> effective_bound;  // bound B on nA*nB/(nA+nB)
  std::optional<double> real_total;       // continuous-optimum total (closed forms)
  int nA = 0;
  int nB = 0;
  double achieved = 0.0;  // criterion metric at (nA, nB)
  enum class Method { closed_form, search } method = Method::closed_form;
};

namespace detail {

inline double z_upper(double a) { return upper_standard_normal_quantile(0.5 * a); }

inline double sigma_n2(double S, double sigma2, int nA, int nB) {
  const double vt = (1.0 / nA + 1.0 / nB) * sigma2;
  return 1.0 / (1.0 / S + 1.0 / vt);
}

inline double coverage_known(double S, double sigma2, int nA, int nB, double l0) {
  const double sn = std::sqrt(sigma_n2(S, sigma2, nA, nB));
  return 2.0 * standard_normal_cdf(0.5 * l0 / sn) - 1.0;
}

// Metric at n = 0 (posterior equals the prior).
inline double prior_only_metric(const Criterion& crit, double S) {
  return std::visit(
      [S](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, AccCriterion>) {
          return 2.0 * standard_normal_cdf(0.5 * c.l0 / std::sqrt(S)) - 1.0;
        } else if constexpr (std::is_same_v<T, AlcCriterion>) {
          return 2.0 * z_upper(c.alpha0) * std::sqrt(S);
        } else {
          return S;
        }
      },
      crit);
}

}  // namespace detail

// Average of sigma_N over the Inv-Gamma(c/2, c*S/2) law of sigma0^2; the
// integrand is bounded by sqrt(S), so this exists for every c > 0.
inline double average_sigma_n_unknown(const CollectivePrior& prior, double c, int nA, int nB,
                                      const QuadratureSpec& spec = {}) {
  const InvGammaParams g = variance_prior(c, prior.variance);
  const double S = prior.variance;
  return integrate(
             [&](double v) {
               return std::sqrt(detail::sigma_n2(S, v, nA, nB)) * invgamma_pdf(v, g);
             },
             0.0, std::numeric_limits<double>::infinity(), spec)
      .value;
}

inline double average_length_unknown(const CollectivePrior& prior, double c, int nA, int nB,
                                     double alpha0, const QuadratureSpec& spec = {}) {
  return 2.0 * detail::z_upper(alpha0) * average_sigma_n_unknown(prior, c, nA, nB, spec);
}

// Predictive-averaged posterior variance and coverage under the
// unknown-variance model; quadrature references for the Monte Carlo oracle.
inline double average_posterior_variance_unknown(const CollectivePrior& prior, double c,
                                                 int nA, int nB,
                                                 const QuadratureSpec& spec = {}) {
  const InvGammaParams g = variance_prior(c, prior.variance);
  const double S = prior.variance;
  return integrate(
             [&](double v) { return detail::sigma_n2(S, v, nA, nB) * invgamma_pdf(v, g); },
             0.0, std::numeric_limits<double>::infinity(), spec)
      .value;
}

inline double average_coverage_unknown(const CollectivePrior& prior, double c, int nA, int nB,
                                       double l0, const QuadratureSpec& spec = {}) {
  const InvGammaParams g = variance_prior(c, prior.variance);
  const double S = prior.variance;
  return integrate(
             [&](double v) {
               return detail::coverage_known(S, v, nA, nB, l0) * invgamma_pdf(v, g);
             },
             0.0, std::numeric_limits<double>::infinity(), spec)
      .value;
}

// Closed-form effective-size bound with known variance. ALC coincides with
// ACC here (known variance makes the interval length deterministic). The
// bound may be <= 0: the prior alone already meets the criterion.
inline double effective_bound_known(const CollectivePrior& prior, const Criterion& crit,
                                    double sigma2) {
  if (!(sigma2 > 0.0)) throw ValidationError("effective_bound_known: sigma2 must be > 0");
  validate(crit);
  const double S = prior.variance;
  return std::visit(
      [&](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, AccCriterion>) {
          const double z = detail::z_upper(c.alpha);
          return (4.0 * z * z / (c.l0 * c.l0) - 1.0 / S) * sigma2;
        } else if constexpr (std::is_same_v<T, AlcCriterion>) {
          const double z = detail::z_upper(c.alpha0);
          return (4.0 * z * z / (c.l * c.l) - 1.0 / S) * sigma2;
        } else {
          return (1.0 / c.eps0 - 1.0 / S) * sigma2;
        }
      },
      crit);
}

// Unknown-variance bound for ACC and APVC: sigma0^2 is replaced by its prior
// mean c*S/(c-2), which requires c > 2.
inline double effective_bound_unknown(const CollectivePrior& prior, const Criterion& crit,
                                      double c) {
  validate(crit);
  if (std::holds_alternative<AlcCriterion>(crit)) {
    throw ValidationError(
        "effective_bound_unknown: the ALC has no closed form with unknown variance; "
        "use alc_unknown_search");
  }
  if (!(c > 2.0)) {
    throw UndefinedMomentError(
        "effective_bound_unknown: the Inv-Gamma(c/2, c*S/2) mean requires c > 2");
  }
  const double expected_sigma2 = invgamma_mean(variance_prior(c, prior.variance));
  return effective_bound_known(prior, crit, expected_sigma2);
}

namespace detail {

// Smallest total n >= 2 whose split satisfies pred; pred must be monotone in
// n (the rounded split raises the effective size with every unit of total).
template <class Pred>
int smallest_total(Pred pred) {
  int lo = 2;
  if (pred(lo)) return lo;
  int hi = 4;
  while (!pred(hi)) {
    lo = hi;
    if (hi > (1 << 24)) throw NumericalError("sample-size search exceeded 2^24 units");
    hi *= 2;
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    (pred(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace detail

// Search solver for the ALC with unknown variance: smallest total n whose
// quadrature-averaged interval length is at most l. Valid for every c > 0.
inline SSDResult alc_unknown_search(const CollectivePrior& prior, double l, double alpha0,
                                    double c, const Allocation& alloc,
                                    const QuadratureSpec& spec = {}) {
  if (!(l > 0.0)) throw ValidationError("alc_unknown_search: l must be > 0");
  if (!(alpha0 > 0.0 && alpha0 < 1.0)) {
    throw ValidationError("alc_unknown_search: alpha0 must lie in (0, 1)");
  }
  if (!(c > 0.0)) throw ValidationError("alc_unknown_search: c must be > 0");
  alloc.validate();

  SSDResult result;
  result.feasible = true;
  result.method = SSDResult::Method::search;

  const double prior_length = 2.0 * detail::z_upper(alpha0) * std::sqrt(prior.variance);
  if (prior_length <= l) {
    result.achieved = prior_length;
    return result;  // nA = nB = 0: the prior alone suffices
  }

  const int total = detail::smallest_total([&](int n) {
    const auto [nA, nB] = split_total(n, alloc);
    return average_length_unknown(prior, c, nA, nB, alpha0, spec) <= l;
  });
  const auto [nA, nB] = split_total(total, alloc);
  result.nA = nA;
  result.nB = nB;
  result.achieved = average_length_unknown(prior, c, nA, nB, alpha0, spec);
  return result;
}

namespace detail {

inline SSDResult solve_closed_form(const CollectivePrior& prior, const Criterion& crit,
                                   double plug_in_sigma2, double bound,
                                   const Allocation& alloc) {
  SSDResult result;
  result.feasible = true;
  result.method = SSDResult::Method::closed_form;
  result.effective_bound = bound;

  if (bound <= 0.0) {
    result.real_total = 0.0;
    result.achieved = prior_only_metric(crit, prior.variance);
    return result;
  }

  const double r_sum = alloc.ratio_A + alloc.ratio_B;
  result.real_total = bound * r_sum * r_sum / (alloc.ratio_A * alloc.ratio_B);

  const int total = smallest_total([&](int n) {
    const auto [nA, nB] = split_total(n, alloc);
    return effective_size(nA, nB) >= bound;
  });
  const auto [nA, nB] = split_total(total, alloc);
  result.nA = nA;
  result.nB = nB;

  const double S = prior.variance;
  result.achieved = std::visit(
      [&](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, AccCriterion>) {
          return coverage_known(S, plug_in_sigma2, nA, nB, c.l0);
        } else if constexpr (std::is_same_v<T, AlcCriterion>) {
          return 2.0 * z_upper(c.alpha0) * std::sqrt(sigma_n2(S, plug_in_sigma2, nA, nB));
        } else {
          return sigma_n2(S, plug_in_sigma2, nA, nB);
        }
      },
      crit);
  return result;
}

}  // namespace detail

// Dispatch to the closed forms or the ALC search, and convert the effective
// bound into the continuous-optimum real total plus the minimal integer split.
inline SSDResult solve(const CollectivePrior& prior, const Criterion& crit,
                       const VarianceModel& vm, const Allocation& alloc,
                       const QuadratureSpec& spec = {}) {
  validate(crit);
  alloc.validate();
  if (vm.is_known()) {
    const double bound = effective_bound_known(prior, crit, vm.sigma2());
    return detail::solve_closed_form(prior, crit, vm.sigma2(), bound, alloc);
  }
  if (const auto* alc = std::get_if<AlcCriterion>(&crit)) {
    return alc_unknown_search(prior, alc->l, alc->alpha0, vm.dof(), alloc, spec);
  }
  const double bound = effective_bound_unknown(prior, crit, vm.dof());
  const double plug_in = invgamma_mean(variance_prior(vm.dof(), prior.variance));
  return detail::solve_closed_form(prior, crit, plug_in, bound, alloc);
}

// Best-case benchmark: a perfectly commensurate new experiment with sigma0^2
// equal to the collective prior variance.
inline SSDResult optimal_benchmark(const CollectivePrior& prior, const Criterion& crit,
                                   const Allocation& alloc) {
  return solve(prior, crit, VarianceModel::known(prior.variance), alloc);
}

}  // namespace cpssd
