// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpssd/collective.hpp"
#include "cpssd/commensurate.hpp"
#include "cpssd/errors.hpp"
#include "cpssd/posterior.hpp"
#include "cpssd/ssd.hpp"

// JSON design configuration. Historical variances are entered as s2
// (variances, never standard deviations); every module-level invariant is
// re-validated at load with messages naming the offending field.

namespace cpssd {

struct DesignConfig {
  std::vector<HistoricalSummary> sources;
  GammaMixtureHyper hyper;
  WeightRule weight_rule;
  VarianceModel variance;
  Allocation allocation;
  std::vector<Criterion> criteria;
};

namespace detail {

inline double require_number(const nlohmann::json& j, const std::string& field) {
  if (!j.contains(field)) throw ValidationError(field + ": missing required field");
  const auto& value = j.at(field);
  if (!value.is_number()) throw ValidationError(field + ": must be a number");
  return value.get<double>();
}

inline int require_int(const nlohmann::json& j, const std::string& field) {
  if (!j.contains(field)) throw ValidationError(field + ": missing required field");
  const auto& value = j.at(field);
  if (!value.is_number_integer()) throw ValidationError(field + ": must be an integer");
  return value.get<int>();
}

template <class Builder>
auto rethrow_with_field(const std::string& field, Builder builder) {
  try {
    return builder();
  } catch (const ValidationError& e) {
    throw ValidationError(field + ": " + e.what());
  }
}

}  // namespace detail

inline DesignConfig parse_design_config(const nlohmann::json& j) {
  using nlohmann::json;
  if (!j.is_object()) throw ValidationError("config: top level must be a JSON object");

  if (!j.contains("sources") || !j.at("sources").is_array() || j.at("sources").empty()) {
    throw ValidationError("sources: must be a nonempty array");
  }
  std::vector<HistoricalSummary> sources;
  for (std::size_t k = 0; k < j.at("sources").size(); ++k) {
    const auto& src = j.at("sources").at(k);
    const std::string field = "sources[" + std::to_string(k) + "]";
    if (!src.is_object()) throw ValidationError(field + ": must be an object");
    sources.push_back(detail::rethrow_with_field(field, [&] {
      const double m = detail::require_number(src, "m");
      const double s2 = detail::require_number(src, "s2");
      if (!(s2 > 0.0)) throw ValidationError("s2: must be > 0 (a variance, not an SD)");
      const double w = detail::require_number(src, "w");
      if (!(w >= 0.0 && w <= 1.0)) throw ValidationError("w: must lie in [0, 1]");
      return HistoricalSummary(m, s2, CommensurabilityWeight(w));
    }));
  }

  if (!j.contains("hyper") || !j.at("hyper").is_object()) {
    throw ValidationError("hyper: must be an object with a01, b01, a02, b02");
  }
  const auto& hj = j.at("hyper");
  GammaMixtureHyper hyper = detail::rethrow_with_field("hyper", [&] {
    return GammaMixtureHyper(
        detail::require_number(hj, "a01"), detail::require_number(hj, "b01"),
        detail::require_number(hj, "a02"), detail::require_number(hj, "b02"));
  });

  if (!j.contains("weight_rule") || !j.at("weight_rule").is_object()) {
    throw ValidationError("weight_rule: must be an object with s0");
  }
  WeightRule rule = detail::rethrow_with_field("weight_rule", [&] {
    return WeightRule(detail::require_number(j.at("weight_rule"), "s0"));
  });

  if (!j.contains("variance") || !j.at("variance").is_object()) {
    throw ValidationError(R"(variance: must be {"known": sigma2} or {"unknown": c})");
  }
  const auto& vj = j.at("variance");
  std::optional<VarianceModel> variance;
  if (vj.contains("known") && vj.contains("unknown")) {
    throw ValidationError("variance: specify exactly one of known/unknown");
  }
  if (vj.contains("known")) {
    variance = detail::rethrow_with_field("variance.known", [&] {
      return VarianceModel::known(detail::require_number(vj, "known"));
    });
  } else if (vj.contains("unknown")) {
    variance = detail::rethrow_with_field("variance.unknown", [&] {
      return VarianceModel::unknown(detail::require_number(vj, "unknown"));
    });
  } else {
    throw ValidationError(R"(variance: must be {"known": sigma2} or {"unknown": c})");
  }

  Allocation allocation{1, 1};
  if (j.contains("allocation")) {
    const auto& aj = j.at("allocation");
    if (!aj.is_object()) throw ValidationError("allocation: must be an object");
    allocation.ratio_A = detail::require_int(aj, "ratio_A");
    allocation.ratio_B = detail::require_int(aj, "ratio_B");
    detail::rethrow_with_field("allocation", [&] {
      allocation.validate();
      return 0;
    });
  }

  if (!j.contains("criteria") || !j.at("criteria").is_array() || j.at("criteria").empty()) {
    throw ValidationError("criteria: must be a nonempty array");
  }
  std::vector<Criterion> criteria;
  for (std::size_t i = 0; i < j.at("criteria").size(); ++i) {
    const auto& cj = j.at("criteria").at(i);
    const std::string field = "criteria[" + std::to_string(i) + "]";
    if (!cj.is_object() || !cj.contains("kind") || !cj.at("kind").is_string()) {
      throw ValidationError(field + ".kind: must be one of acc|alc|apvc");
    }
    const std::string kind = cj.at("kind").get<std::string>();
    Criterion crit = detail::rethrow_with_field(field, [&]() -> Criterion {
      if (kind == "acc") {
        return AccCriterion{detail::require_number(cj, "l0"), detail::require_number(cj, "alpha")};
      }
      if (kind == "alc") {
        return AlcCriterion{detail::require_number(cj, "l"), detail::require_number(cj, "alpha0")};
      }
      if (kind == "apvc") {
        return ApvcCriterion{detail::require_number(cj, "eps0")};
      }
      throw ValidationError("kind: must be one of acc|alc|apvc");
    });
    detail::rethrow_with_field(field, [&] {
      validate(crit);
      return 0;
    });
    criteria.push_back(crit);
  }

  return DesignConfig{std::move(sources), hyper, rule, *variance, allocation,
                      std::move(criteria)};
}

// Reads and validates a config file. Throws Error (I/O) if the file cannot be
// read and ValidationError for malformed or invalid content.
inline DesignConfig load_design_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config JSON parse error: " + std::string(e.what()));
  }
  return parse_design_config(j);
}

// Moment condition needed by the closed-form unknown-variance bounds; checked
// up front so misconfigurations surface as validation failures.
inline void validate_criteria_against_variance(const DesignConfig& config) {
  if (config.variance.is_known() || config.variance.dof() > 2.0) return;
  for (const auto& crit : config.criteria) {
    if (!std::holds_alternative<AlcCriterion>(crit)) {
      throw ValidationError(
          std::string("variance.unknown: c must exceed 2 for the ") + criterion_name(crit) +
          " criterion (the Inv-Gamma(c/2, c*S/2) mean requires c > 2)");
    }
  }
}

}  // namespace cpssd
