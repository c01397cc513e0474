// Apache License, Version 2.0, refer to LICENSE.txt

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "cpssd/collective.hpp"
#include "cpssd/ssd.hpp"

using Catch::Approx;
using cpssd::AccCriterion;
using cpssd::AlcCriterion;
using cpssd::Allocation;
using cpssd::ApvcCriterion;
using cpssd::CollectivePrior;
using cpssd::SSDResult;
using cpssd::VarianceModel;

namespace {

const cpssd::GammaMixtureHyper kHyper(2.0, 2.0, 18.0, 3.0);
const cpssd::WeightRule kRule(0.05);

CollectivePrior make_prior(const std::vector<double>& m, const std::vector<double>& s2,
                           const std::vector<double>& w) {
  std::vector<cpssd::HistoricalSummary> sources;
  for (std::size_t k = 0; k < m.size(); ++k) {
    sources.emplace_back(m[k], s2[k], cpssd::CommensurabilityWeight(w[k]));
  }
  return cpssd::build_collective_prior(sources, kHyper, kRule);
}

CollectivePrior elicited_prior() {
  return make_prior({-0.26, -0.24, -0.37, -0.34, -0.32}, {0.25, 0.23, 0.22, 0.36, 0.26},
                    {0.15, 0.20, 0.17, 0.13, 0.20});
}

CollectivePrior config3_rw1_prior() {
  return make_prior({-0.26, -0.17, -0.44, -0.15, 0.12}, {0.25, 0.64, 0.97, 1.54, 0.59},
                    {0.101, 0.219, 0.385, 0.385, 0.304});
}

CollectivePrior config3_no_borrowing_prior() {
  std::vector<cpssd::HistoricalSummary> sources;
  for (std::size_t k = 0; k < 5; ++k) {
    const std::vector<double> m{-0.26, -0.17, -0.44, -0.15, 0.12};
    const std::vector<double> s2{0.25, 0.64, 0.97, 1.54, 0.59};
    sources.emplace_back(m[k], s2[k], cpssd::CommensurabilityWeight(0.0));
  }
  return cpssd::special_weighting(sources, kHyper, kRule,
                                  cpssd::WeightingMode::no_borrowing());
}

CollectivePrior synthetic_prior(double variance) {
  CollectivePrior prior;
  prior.per_source.push_back({0.0, variance, 1.0});
  prior.mean = 0.0;
  prior.variance = variance;
  return prior;
}

}  // namespace

TEST_CASE("split_total follows nearest rounding with both arms occupied") {
  REQUIRE(cpssd::split_total(65, {1, 1}) == std::pair{33, 32});
  REQUIRE(cpssd::split_total(42, {1, 1}) == std::pair{21, 21});
  REQUIRE(cpssd::split_total(41, {2, 1}) == std::pair{27, 14});
  REQUIRE(cpssd::split_total(40, {2, 1}) == std::pair{27, 13});
  REQUIRE(cpssd::split_total(2, {1, 1}) == std::pair{1, 1});
  REQUIRE(cpssd::split_total(5, {9, 1}) == std::pair{4, 1});  // clamped
  REQUIRE_THROWS_AS(cpssd::split_total(1, {1, 1}), cpssd::ValidationError);
  REQUIRE_THROWS_AS(cpssd::split_total(10, {0, 1}), cpssd::ValidationError);
}

TEST_CASE("known-variance bound reproduces the worked example") {
  const auto prior = elicited_prior();
  const double bound =
      cpssd::effective_bound_known(prior, AccCriterion{0.65, 0.05}, 0.35);
  REQUIRE(bound == Approx(10.459).margin(0.01));

  const auto result = cpssd::solve(prior, AccCriterion{0.65, 0.05},
                                   VarianceModel::known(0.35), Allocation{1, 1});
  REQUIRE(result.feasible);
  REQUIRE(result.method == SSDResult::Method::closed_form);
  REQUIRE(*result.real_total == Approx(41.8).margin(0.1));
  REQUIRE(result.nA == 21);
  REQUIRE(result.nB == 21);
  REQUIRE(result.achieved >= 0.95);
}

TEST_CASE("known-variance APVC follows the closed form") {
  const auto prior = elicited_prior();
  const double bound = cpssd::effective_bound_known(prior, ApvcCriterion{0.03}, 0.35);
  REQUIRE(bound == Approx(9.3967).margin(0.01));
  const auto result = cpssd::solve(prior, ApvcCriterion{0.03}, VarianceModel::known(0.35),
                                   Allocation{1, 1});
  REQUIRE(*result.real_total == Approx(37.59).margin(0.05));
  REQUIRE(result.achieved <= 0.03);
}

TEST_CASE("a sufficiently tight prior needs no new data") {
  const auto prior = synthetic_prior(0.01);  // 1/S = 100 > 4 z^2 / l0^2
  const double bound = cpssd::effective_bound_known(prior, AccCriterion{0.65, 0.05}, 0.35);
  REQUIRE(bound <= 0.0);
  const auto result = cpssd::solve(prior, AccCriterion{0.65, 0.05},
                                   VarianceModel::known(0.35), Allocation{1, 1});
  REQUIRE(result.feasible);
  REQUIRE(result.nA == 0);
  REQUIRE(result.nB == 0);
  REQUIRE(*result.real_total == 0.0);
  REQUIRE(result.achieved >= 0.95);  // prior-only coverage already meets the target
}

TEST_CASE("unknown-variance bounds substitute the inverse-gamma mean") {
  const auto prior = elicited_prior();
  REQUIRE(cpssd::invgamma_mean(cpssd::variance_prior(5.0, prior.variance)) ==
          Approx(0.2570).margin(5e-4));

  const auto acc = cpssd::solve(prior, AccCriterion{0.65, 0.05}, VarianceModel::unknown(5.0),
                                Allocation{1, 1});
  REQUIRE(*acc.real_total == Approx(30.7).margin(0.1));

  const auto apvc = cpssd::solve(prior, ApvcCriterion{0.03}, VarianceModel::unknown(5.0),
                                 Allocation{1, 1});
  REQUIRE(*apvc.real_total == Approx(27.6).margin(0.1));

  REQUIRE_THROWS_AS(cpssd::effective_bound_unknown(prior, AccCriterion{0.65, 0.05}, 2.0),
                    cpssd::UndefinedMomentError);
  REQUIRE_THROWS_AS(cpssd::effective_bound_unknown(prior, ApvcCriterion{0.03}, 1.5),
                    cpssd::UndefinedMomentError);
  REQUIRE_THROWS_AS(cpssd::effective_bound_unknown(prior, AlcCriterion{0.65, 0.05}, 5.0),
                    cpssd::ValidationError);
}

TEST_CASE("divergent-configuration spot totals") {
  const auto robust = config3_rw1_prior();
  const auto acc_robust = cpssd::solve(robust, AccCriterion{0.65, 0.05},
                                       VarianceModel::unknown(3.0), Allocation{1, 1});
  REQUIRE(*acc_robust.real_total == Approx(116.8).margin(0.2));

  const auto no_borrow = config3_no_borrowing_prior();
  REQUIRE(no_borrow.variance == Approx(0.5596).margin(1e-10));
  const auto acc_nb = cpssd::solve(no_borrow, AccCriterion{0.65, 0.05},
                                   VarianceModel::unknown(3.0), Allocation{1, 1});
  REQUIRE(*acc_nb.real_total == Approx(232.2).margin(0.2));
}

TEST_CASE("ALC search with unknown variance") {
  const auto prior = elicited_prior();
  const auto r = cpssd::alc_unknown_search(prior, 0.65, 0.05, 5.0, Allocation{1, 1});
  REQUIRE(r.feasible);
  REQUIRE(r.method == SSDResult::Method::search);
  REQUIRE_FALSE(r.real_total.has_value());
  REQUIRE(r.nA + r.nB == 24);
  REQUIRE(r.achieved <= 0.65);

  const auto robust = config3_rw1_prior();
  const auto r65 = cpssd::alc_unknown_search(robust, 0.65, 0.05, 3.0, Allocation{1, 1});
  REQUIRE(r65.nA + r65.nB == 65);
  REQUIRE(r65.nA == 33);
  REQUIRE(r65.nB == 32);

  const auto no_borrow = config3_no_borrowing_prior();
  const auto r136 = cpssd::alc_unknown_search(no_borrow, 0.65, 0.05, 3.0, Allocation{1, 1});
  REQUIRE(r136.nA + r136.nB == 136);
}

TEST_CASE("ALC search edge cases") {
  const auto prior = elicited_prior();
  // prior alone achieves the target length
  const double prior_length = 2.0 * 1.959964 * std::sqrt(prior.variance);
  const auto r = cpssd::alc_unknown_search(prior, prior_length + 0.01, 0.05, 5.0, {1, 1});
  REQUIRE(r.nA == 0);
  REQUIRE(r.nB == 0);
  REQUIRE(r.achieved <= prior_length + 0.01);

  REQUIRE_THROWS_AS(cpssd::alc_unknown_search(prior, -0.1, 0.05, 5.0, {1, 1}),
                    cpssd::ValidationError);
  REQUIRE_THROWS_AS(cpssd::alc_unknown_search(prior, 0.65, 0.05, 0.0, {1, 1}),
                    cpssd::ValidationError);

  // valid for 0 < c <= 2, where the closed-form bounds are unavailable
  const auto shallow = cpssd::alc_unknown_search(prior, 0.65, 0.05, 1.5, {1, 1});
  REQUIRE(shallow.nA + shallow.nB > 0);
}

TEST_CASE("average length decreases strictly in the total") {
  const auto prior = elicited_prior();
  double prev = cpssd::average_length_unknown(prior, 5.0, 1, 1, 0.05);
  for (int n = 3; n <= 200; ++n) {
    const auto [nA, nB] = cpssd::split_total(n, {1, 1});
    const double len = cpssd::average_length_unknown(prior, 5.0, nA, nB, 0.05);
    REQUIRE(len < prev);
    prev = len;
  }
  // bounded above by the prior-only length
  REQUIRE(prev <= 2.0 * 1.959964 * std::sqrt(prior.variance));
}

TEST_CASE("closed-form integer split under a 2:1 allocation is minimal") {
  // effective bound exactly 9: APVC with eps0 = 0.1, S = 1, sigma0^2 = 1
  const auto prior = synthetic_prior(1.0);
  const auto result = cpssd::solve(prior, ApvcCriterion{0.1}, VarianceModel::known(1.0),
                                   Allocation{2, 1});
  REQUIRE(*result.effective_bound == Approx(9.0).margin(1e-12));
  REQUIRE(*result.real_total == Approx(40.5).margin(1e-9));
  REQUIRE(result.nA == 27);
  REQUIRE(result.nB == 14);

  // exhaustive scan: no smaller total meets the bound under the split rule
  for (int n = 2; n < 41; ++n) {
    const auto [nA, nB] = cpssd::split_total(n, {2, 1});
    REQUIRE(cpssd::effective_size(nA, nB) < 9.0);
  }
}

TEST_CASE("integer minimality for every solved pair up to total 300") {
  const auto prior = elicited_prior();
  const std::vector<Allocation> allocations{{1, 1}, {2, 1}, {3, 2}};
  const std::vector<double> lengths{0.2, 0.3, 0.5, 0.65, 1.0};
  for (const auto& alloc : allocations) {
    for (double l0 : lengths) {
      const auto result = cpssd::solve(prior, AccCriterion{l0, 0.05},
                                       VarianceModel::known(0.35), alloc);
      const int total = result.nA + result.nB;
      if (total == 0 || total > 300) continue;
      REQUIRE(cpssd::effective_size(result.nA, result.nB) >= *result.effective_bound);
      for (int n = 2; n < total; ++n) {
        const auto [nA, nB] = cpssd::split_total(n, alloc);
        REQUIRE(cpssd::effective_size(nA, nB) < *result.effective_bound);
      }
    }
  }
}

TEST_CASE("ACC and ALC coincide when the variance is known") {
  const auto prior = elicited_prior();
  for (double sigma2 : {0.2, 0.35, 0.8}) {
    const auto acc = cpssd::solve(prior, AccCriterion{0.65, 0.05},
                                  VarianceModel::known(sigma2), Allocation{1, 1});
    const auto alc = cpssd::solve(prior, AlcCriterion{0.65, 0.05},
                                  VarianceModel::known(sigma2), Allocation{1, 1});
    REQUIRE(*acc.real_total == Approx(*alc.real_total).margin(1e-12));
    REQUIRE(acc.nA == alc.nA);
    REQUIRE(acc.nB == alc.nB);
  }
}

TEST_CASE("totals are monotone in the criterion levels and prior precision") {
  const auto prior = elicited_prior();
  const auto vm = VarianceModel::known(0.35);

  double prev = 1e9;
  for (double l0 : {0.4, 0.5, 0.65, 0.8, 1.0}) {
    const auto r = cpssd::solve(prior, AccCriterion{l0, 0.05}, vm, {1, 1});
    REQUIRE(*r.real_total <= prev + 1e-12);
    prev = *r.real_total;
  }
  prev = 1e9;
  for (double eps0 : {0.01, 0.02, 0.03, 0.05}) {
    const auto r = cpssd::solve(prior, ApvcCriterion{eps0}, vm, {1, 1});
    REQUIRE(*r.real_total <= prev + 1e-12);
    prev = *r.real_total;
  }
  // nondecreasing in the coverage target
  prev = -1.0;
  for (double alpha : {0.20, 0.10, 0.05, 0.025}) {
    const auto r = cpssd::solve(prior, AccCriterion{0.65, alpha}, vm, {1, 1});
    REQUIRE(*r.real_total >= prev - 1e-12);
    prev = *r.real_total;
  }
  // larger collective variance cannot reduce the total
  const auto tight = synthetic_prior(0.1);
  const auto loose = synthetic_prior(0.4);
  const auto r_tight = cpssd::solve(tight, AccCriterion{0.65, 0.05}, vm, {1, 1});
  const auto r_loose = cpssd::solve(loose, AccCriterion{0.65, 0.05}, vm, {1, 1});
  REQUIRE(*r_tight.real_total <= *r_loose.real_total);
}

TEST_CASE("optimal benchmark") {
  const auto prior = elicited_prior();
  const auto bench = cpssd::optimal_benchmark(prior, AccCriterion{0.65, 0.05}, {1, 1});
  REQUIRE(*bench.real_total == Approx(18.43).margin(0.05));

  for (double sigma2 : {prior.variance, 0.35, 1.0}) {
    const auto known = cpssd::solve(prior, AccCriterion{0.65, 0.05},
                                    VarianceModel::known(sigma2), {1, 1});
    REQUIRE(*bench.real_total <= *known.real_total + 1e-9);
  }

  const auto near_limit = cpssd::solve(prior, AccCriterion{0.65, 0.05},
                                       VarianceModel::unknown(1e6), {1, 1});
  REQUIRE(*near_limit.real_total == Approx(*bench.real_total).margin(0.1));
}

TEST_CASE("criterion validation") {
  REQUIRE_THROWS_AS(cpssd::validate(cpssd::Criterion(AccCriterion{0.0, 0.05})),
                    cpssd::ValidationError);
  REQUIRE_THROWS_AS(cpssd::validate(cpssd::Criterion(AccCriterion{0.65, 1.5})),
                    cpssd::ValidationError);
  REQUIRE_THROWS_AS(cpssd::validate(cpssd::Criterion(AlcCriterion{0.65, 0.0})),
                    cpssd::ValidationError);
  REQUIRE_THROWS_AS(cpssd::validate(cpssd::Criterion(ApvcCriterion{-0.1})),
                    cpssd::ValidationError);
  REQUIRE(std::string(cpssd::criterion_name(cpssd::Criterion(AccCriterion{0.65, 0.05}))) ==
          "acc");
}
