// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "cpssd/config.hpp"
#include "cpssd/ssd.hpp"

// Parameter sweeps behind the comparison figures: one solve per
// (axis value, weighting mode, criterion), fanned out across worker threads
// and assembled in deterministic row order (axis value major, then mode, then
// criterion).

namespace cpssd {

enum class SweepAxis { alpha, l0, l, eps0, c, a02, b02 };
enum class SweepMode { robust, no_robustification, no_borrowing, single_source, optimal };

struct SweepSpec {
  SweepAxis axis;
  std::vector<double> values;
  std::vector<SweepMode> modes;

  void validate() const {
    if (values.empty()) throw ValidationError("sweep.values: must be nonempty");
    for (double v : values) {
      if (!std::isfinite(v)) throw ValidationError("sweep.values: must be finite");
    }
    if (modes.empty()) throw ValidationError("sweep.modes: must be nonempty");
  }
};

inline SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "alpha") return SweepAxis::alpha;
  if (name == "l0") return SweepAxis::l0;
  if (name == "l") return SweepAxis::l;
  if (name == "eps0") return SweepAxis::eps0;
  if (name == "c") return SweepAxis::c;
  if (name == "a02") return SweepAxis::a02;
  if (name == "b02") return SweepAxis::b02;
  throw ValidationError("sweep.axis: must be one of alpha|l0|l|eps0|c|a02|b02");
}

inline SweepMode parse_sweep_mode(const std::string& name) {
  if (name == "robust") return SweepMode::robust;
  if (name == "no_robustification") return SweepMode::no_robustification;
  if (name == "no_borrowing") return SweepMode::no_borrowing;
  if (name == "single_source") return SweepMode::single_source;
  if (name == "optimal") return SweepMode::optimal;
  throw ValidationError(
      "sweep.modes: must be among robust|no_robustification|no_borrowing|single_source|optimal");
}

inline const char* sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::alpha: return "alpha";
    case SweepAxis::l0: return "l0";
    case SweepAxis::l: return "l";
    case SweepAxis::eps0: return "eps0";
    case SweepAxis::c: return "c";
    case SweepAxis::a02: return "a02";
    case SweepAxis::b02: return "b02";
  }
  return "?";
}

inline const char* sweep_mode_name(SweepMode mode) {
  switch (mode) {
    case SweepMode::robust: return "robust";
    case SweepMode::no_robustification: return "no_robustification";
    case SweepMode::no_borrowing: return "no_borrowing";
    case SweepMode::single_source: return "single_source";
    case SweepMode::optimal: return "optimal";
  }
  return "?";
}

struct SweepRow {
  double axis_value = 0.0;
  SweepMode mode = SweepMode::robust;
  std::string criterion;
  SSDResult result;
};

namespace detail {

inline std::size_t most_informative_source(const std::vector<HistoricalSummary>& sources) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < sources.size(); ++k) {
    if (sources[k].v < sources[best].v) best = k;
  }
  return best;
}

inline Criterion apply_axis_to_criterion(const Criterion& crit, SweepAxis axis, double value) {
  Criterion out = crit;
  switch (axis) {
    case SweepAxis::alpha:
      if (auto* acc = std::get_if<AccCriterion>(&out)) acc->alpha = value;
      if (auto* alc = std::get_if<AlcCriterion>(&out)) alc->alpha0 = value;
      break;
    case SweepAxis::l0:
      if (auto* acc = std::get_if<AccCriterion>(&out)) acc->l0 = value;
      break;
    case SweepAxis::l:
      if (auto* alc = std::get_if<AlcCriterion>(&out)) alc->l = value;
      break;
    case SweepAxis::eps0:
      if (auto* apvc = std::get_if<ApvcCriterion>(&out)) apvc->eps0 = value;
      break;
    default:
      break;
  }
  return out;
}

}  // namespace detail

// Solve the whole grid. Axis "c" forces the unknown-variance model at that c;
// axes a02/b02 rebuild the collective prior per value; mode "optimal" is the
// benchmark with sigma0^2 equal to the robust prior variance.
inline std::vector<SweepRow> run_sweep(const DesignConfig& config, const SweepSpec& spec,
                                       int threads = 0) {
  spec.validate();
  if (spec.axis == SweepAxis::c) {
    bool closed_form = false;
    for (const auto& crit : config.criteria) {
      if (!std::holds_alternative<AlcCriterion>(crit)) closed_form = true;
    }
    for (double v : spec.values) {
      if (!(v > 0.0)) throw ValidationError("sweep.values: c must be > 0");
      if (closed_form && !(v > 2.0)) {
        throw ValidationError(
            "sweep.values: c must exceed 2 for the acc/apvc criteria "
            "(the Inv-Gamma(c/2, c*S/2) mean requires c > 2)");
      }
    }
  }

  struct Task {
    double axis_value;
    SweepMode mode;
    Criterion criterion;
  };
  std::vector<Task> tasks;
  for (double value : spec.values) {
    for (SweepMode mode : spec.modes) {
      for (const Criterion& crit : config.criteria) {
        tasks.push_back({value, mode, detail::apply_axis_to_criterion(crit, spec.axis, value)});
      }
    }
  }

  std::vector<SweepRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto run_task = [&](std::size_t i) {
    const Task& task = tasks[i];
    GammaMixtureHyper hyper = config.hyper;
    if (spec.axis == SweepAxis::a02) hyper = GammaMixtureHyper(hyper.a01, hyper.b01, task.axis_value, hyper.b02);
    if (spec.axis == SweepAxis::b02) hyper = GammaMixtureHyper(hyper.a01, hyper.b01, hyper.a02, task.axis_value);

    CollectivePrior prior;
    switch (task.mode) {
      case SweepMode::robust:
      case SweepMode::optimal:
        prior = build_collective_prior(config.sources, hyper, config.weight_rule);
        break;
      case SweepMode::no_robustification:
        prior = special_weighting(config.sources, hyper, config.weight_rule,
                                  WeightingMode::no_robustification());
        break;
      case SweepMode::no_borrowing:
        prior = special_weighting(config.sources, hyper, config.weight_rule,
                                  WeightingMode::no_borrowing());
        break;
      case SweepMode::single_source:
        prior = special_weighting(
            config.sources, hyper, config.weight_rule,
            WeightingMode::single_source(detail::most_informative_source(config.sources)));
        break;
    }

    VarianceModel vm = config.variance;
    if (spec.axis == SweepAxis::c) vm = VarianceModel::unknown(task.axis_value);

    SSDResult result = task.mode == SweepMode::optimal
                           ? optimal_benchmark(prior, task.criterion, config.allocation)
                           : solve(prior, task.criterion, vm, config.allocation);
    rows[i] = SweepRow{task.axis_value, task.mode, criterion_name(task.criterion), result};
  };

  int worker_count = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  worker_count = std::max(1, std::min<int>(worker_count, static_cast<int>(tasks.size())));
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(worker_count));
  for (int t = 0; t < worker_count; ++t) {
    workers.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        try {
          run_task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& worker : workers) worker.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

// UTF-8 CSV with a header row, '.' decimal separator and LF line endings.
// real_total is empty for search solutions (integers only).
inline std::string format_sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows) {
  std::string out = "axis_name,axis_value,mode,criterion,real_total,nA,nB,achieved\n";
  char buffer[160];
  for (const auto& row : rows) {
    std::string real_total;
    if (row.result.real_total) {
      std::snprintf(buffer, sizeof(buffer), "%.1f", *row.result.real_total);
      real_total = buffer;
    }
    std::snprintf(buffer, sizeof(buffer), "%s,%.6g,%s,%s,%s,%d,%d,%.6f\n",
                  sweep_axis_name(axis), row.axis_value, sweep_mode_name(row.mode),
                  row.criterion.c_str(), real_total.c_str(), row.result.nA, row.result.nB,
                  row.result.achieved);
    out += buffer;
  }
  return out;
}

}  // namespace cpssd
