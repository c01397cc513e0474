// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "cpssd/errors.hpp"

// One-dimensional adaptive quadrature on finite, half-infinite and doubly
// infinite intervals. Panels use the embedded Gauss(7)/Kronrod(15) pair;
// infinite endpoints are mapped to a bounded parameter by a rational change
// of variables before subdivision. The node/weight constants below were
// derived from the Stieltjes polynomial of P7 in 60-digit arithmetic and
// verified exact through polynomial degree 22.

namespace cpssd {

struct QuadratureSpec {
  double relative_tolerance = 1e-9;
  double absolute_tolerance = 1e-12;
  int max_subdivisions = 2000;

  void validate() const {
    if (!(relative_tolerance > 0.0)) {
      throw ValidationError("QuadratureSpec.relative_tolerance: must be > 0");
    }
    if (!(absolute_tolerance > 0.0)) {
      throw ValidationError("QuadratureSpec.absolute_tolerance: must be > 0");
    }
    if (max_subdivisions < 1) {
      throw ValidationError("QuadratureSpec.max_subdivisions: must be >= 1");
    }
  }
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

namespace detail {

// Positive abscissae of the 15-point Kronrod rule, descending; even indices
// are Kronrod-only nodes, odd indices (and the centre) carry the G7 rule.
inline constexpr double kGk15Nodes[8] = {
    0.991455371120812639207, 0.949107912342758524526,
    0.864864423359769072790, 0.741531185599394439864,
    0.586087235467691130294, 0.405845151377397166907,
    0.207784955007898467601, 0.0};
inline constexpr double kGk15Weights[8] = {
    0.0229353220105292249637, 0.0630920926299785532907,
    0.1047900103222501838400, 0.1406532597155259187450,
    0.1690047266392679028270, 0.1903505780647854099130,
    0.2044329400752988924140, 0.2094821410847278280130};
inline constexpr double kG7Weights[4] = {
    0.129484966168869693271, 0.279705391489276667901,
    0.381830050505118944950, 0.417959183673469387755};

struct PanelEstimate {
  double value = 0.0;
  double error = 0.0;
  double abs_integral = 0.0;
};

template <class F>
PanelEstimate gk15_panel(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  const double f_centre = f(centre);
  double result_kronrod = kGk15Weights[7] * f_centre;
  double result_gauss = kG7Weights[3] * f_centre;
  double result_abs = kGk15Weights[7] * std::fabs(f_centre);

  double values[7][2];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kGk15Nodes[i];
    values[i][0] = f(centre - dx);
    values[i][1] = f(centre + dx);
    const double pair_sum = values[i][0] + values[i][1];
    result_kronrod += kGk15Weights[i] * pair_sum;
    result_abs += kGk15Weights[i] * (std::fabs(values[i][0]) + std::fabs(values[i][1]));
    if (i % 2 == 1) result_gauss += kG7Weights[(i - 1) / 2] * pair_sum;
  }

  const double mean = result_kronrod * 0.5;
  double result_asc = kGk15Weights[7] * std::fabs(f_centre - mean);
  for (int i = 0; i < 7; ++i) {
    result_asc += kGk15Weights[i] *
                  (std::fabs(values[i][0] - mean) + std::fabs(values[i][1] - mean));
  }

  PanelEstimate est;
  est.value = result_kronrod * half;
  est.abs_integral = result_abs * std::fabs(half);
  double err = std::fabs((result_kronrod - result_gauss) * half);
  const double asc = result_asc * std::fabs(half);
  if (asc != 0.0 && err != 0.0) {
    err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  }
  const double round_floor = 50.0 * std::numeric_limits<double>::epsilon() * est.abs_integral;
  est.error = std::max(err, round_floor);
  if (!std::isfinite(est.value)) {
    throw NumericalError("quadrature: integrand produced a non-finite value");
  }
  return est;
}

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
QuadratureResult integrate_finite(F f, double a, double b, const QuadratureSpec& spec) {
  std::priority_queue<Panel> panels;
  double total_value = 0.0;
  double total_error = 0.0;

  const int initial = 8;
  for (int i = 0; i < initial; ++i) {
    const double pa = a + (b - a) * i / initial;
    const double pb = a + (b - a) * (i + 1) / initial;
    const PanelEstimate est = gk15_panel(f, pa, pb);
    panels.push({pa, pb, est.value, est.error});
    total_value += est.value;
    total_error += est.error;
  }

  int subdivisions = 0;
  while (total_error > std::max(spec.absolute_tolerance,
                                spec.relative_tolerance * std::fabs(total_value))) {
    if (subdivisions >= spec.max_subdivisions) {
      throw QuadratureError("quadrature did not converge within max_subdivisions",
                            total_value, total_error);
    }
    Panel worst = panels.top();
    panels.pop();
    total_value -= worst.value;
    total_error -= worst.error;

    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval has collapsed to machine precision; keep its estimate as is.
      total_value += worst.value;
      total_error += worst.error;
      throw QuadratureError("quadrature stalled on a zero-width panel",
                            total_value, total_error);
    }
    for (const auto& [pa, pb] : {std::pair{worst.a, mid}, std::pair{mid, worst.b}}) {
      const PanelEstimate est = gk15_panel(f, pa, pb);
      panels.push({pa, pb, est.value, est.error});
      total_value += est.value;
      total_error += est.error;
    }
    ++subdivisions;
  }
  return {total_value, total_error};
}

}  // namespace detail

// Integrate f over (lower, upper); either endpoint may be +/-infinity.
template <class F>
QuadratureResult integrate(F&& f, double lower, double upper, const QuadratureSpec& spec = {}) {
  spec.validate();
  if (std::isnan(lower) || std::isnan(upper) || !(lower < upper)) {
    throw ValidationError("integrate: requires lower < upper");
  }
  const bool lo_inf = std::isinf(lower);
  const bool hi_inf = std::isinf(upper);

  if (!lo_inf && !hi_inf) {
    return detail::integrate_finite(std::ref(f), lower, upper, spec);
  }
  if (!lo_inf && hi_inf) {
    // x = lower + t/(1-t), t in (0,1)
    auto g = [&f, lower](double t) {
      const double om = 1.0 - t;
      return f(lower + t / om) / (om * om);
    };
    return detail::integrate_finite(g, 0.0, 1.0, spec);
  }
  if (lo_inf && !hi_inf) {
    auto g = [&f, upper](double t) {
      const double om = 1.0 - t;
      return f(upper - t / om) / (om * om);
    };
    return detail::integrate_finite(g, 0.0, 1.0, spec);
  }
  // x = t/(1-t^2), t in (-1,1)
  auto g = [&f](double t) {
    const double om = 1.0 - t * t;
    return f(t / om) * (1.0 + t * t) / (om * om);
  };
  return detail::integrate_finite(g, -1.0, 1.0, spec);
}

}  // namespace cpssd
