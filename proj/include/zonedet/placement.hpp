#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "zonedet/common.hpp"

namespace zonedet {

// Combinatorial anchor/target placement: choose k anchor positions from K
// candidates and m target areas from M candidates so that the weakest
// target area is still as distinguishable as possible from the gate point.
// The score of one (anchors, areas) pair is
//
//   min over areas t of  sum over anchors a of  (log10(|t - a| / |gate - a|))^2
//
// which is the non-centrality sum at the gate up to the constant (10*eta)^2,
// so ranking by it ranks by gate detection rate.

struct PlacementProblem {
  std::vector<Point> ap_candidates;
  std::vector<Point> area_candidates;  // target-area centroids
  std::size_t k = 1;                   // anchors to place
  std::size_t m = 1;                   // areas to select
  Point gate{};
  double eta = 2.0;
};

struct PlacementSolution {
  std::vector<std::size_t> ap_indices;    // 0-based, ascending
  std::vector<std::size_t> area_indices;  // 0-based, ascending
  double objective = 0.0;
  std::size_t rank = 0;  // 1-based after sorting
};

enum class RankingMode { analytic, mc_ocsvm };

struct RankingReport {
  double r = 0.0;
  double p_value = 0.0;
  std::vector<PlacementSolution> solutions;  // ranked, as from optimize()
  std::vector<double> empirical_rates;       // aligned with solutions
};

double placement_objective(const std::vector<Point>& aps, const std::vector<Point>& areas,
                           Point gate);

constexpr std::uint64_t kDefaultMaxCombinations = 10'000'000;

// Exhaustive enumeration of all C(K,k)*C(M,m) feasible pairs, sorted by
// objective descending with lexicographic (ap_indices, area_indices)
// tie-breaking. Throws ValidationError when the combination count exceeds
// max_combinations.
std::vector<PlacementSolution> optimize(const PlacementProblem& problem,
                                        std::uint64_t max_combinations = kDefaultMaxCombinations,
                                        Exec exec = Exec::parallel);

// Checks the objective ranking against per-solution gate detection rates.
// analytic: closed-form rate with the solution's weakest area as the
// trusted location. mc_ocsvm: trains a one-class SVM per (solution, area)
// on simulated anchor RSSI at the area centroid and measures the rejection
// rate of simulated gate observations; the solution's rate is the minimum
// over its areas. Correlation is computed between the two rank vectors
// (average ranks for ties), so a perfectly monotone relation reports r = 1.
RankingReport validate_ranking(const PlacementProblem& problem, RankingMode mode, double sigma,
                               double nu, std::size_t trials, std::uint64_t seed,
                               Exec exec = Exec::parallel);

}  // namespace zonedet
