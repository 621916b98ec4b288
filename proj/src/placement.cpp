#include "zonedet/placement.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "zonedet/analytic.hpp"
#include "zonedet/evaluation.hpp"
#include "zonedet/features.hpp"
#include "zonedet/ocsvm.hpp"
#include "zonedet/propagation.hpp"
#include "zonedet/rng.hpp"

namespace zonedet {

namespace {

// C(n, r) saturated at cap + 1 so guard comparisons never overflow.
std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t r, std::uint64_t cap) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    if (result > cap) return cap + 1;
    result = result * (n - r + i) / i;  // exact: product of i consecutive ints divisible by i!
  }
  return std::min(result, cap + 1);
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
  return binomial_capped(n, r, UINT64_MAX - 1);
}

// Lexicographically index-th r-subset of {0, ..., n-1}.
std::vector<std::size_t> unrank_combination(std::uint64_t index, std::size_t n, std::size_t r) {
  std::vector<std::size_t> subset(r);
  std::size_t next = 0;
  for (std::size_t pos = 0; pos < r; ++pos) {
    for (std::size_t v = next;; ++v) {
      const std::uint64_t block = binomial(n - 1 - v, r - 1 - pos);
      if (index < block) {
        subset[pos] = v;
        next = v + 1;
        break;
      }
      index -= block;
    }
  }
  return subset;
}

void validate_problem(const PlacementProblem& problem) {
  const std::size_t K = problem.ap_candidates.size();
  const std::size_t M = problem.area_candidates.size();
  if (problem.k < 1 || problem.k > K) {
    throw ValidationError("placement: k must satisfy 1 <= k <= " + std::to_string(K));
  }
  if (problem.m < 1 || problem.m > M) {
    throw ValidationError("placement: m must satisfy 1 <= m <= " + std::to_string(M));
  }
  if (!(problem.eta > 0.0)) throw ValidationError("placement: eta must be positive");
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = i + 1; j < K; ++j) {
      if (distance(problem.ap_candidates[i], problem.ap_candidates[j]) <= 0.0) {
        throw ValidationError("placement: anchor candidates " + std::to_string(i) + " and " +
                              std::to_string(j) + " coincide");
      }
    }
    if (distance(problem.ap_candidates[i], problem.gate) <= 0.0) {
      throw ValidationError("placement: gate coincides with anchor candidate " +
                            std::to_string(i));
    }
    for (std::size_t j = 0; j < M; ++j) {
      if (distance(problem.ap_candidates[i], problem.area_candidates[j]) <= 0.0) {
        throw ValidationError("placement: area candidate " + std::to_string(j) +
                              " coincides with anchor candidate " + std::to_string(i));
      }
    }
  }
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = i + 1; j < M; ++j) {
      if (distance(problem.area_candidates[i], problem.area_candidates[j]) <= 0.0) {
        throw ValidationError("placement: area candidates " + std::to_string(i) + " and " +
                              std::to_string(j) + " coincide");
      }
    }
  }
}

std::vector<double> rank_vector(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double placement_objective(const std::vector<Point>& aps, const std::vector<Point>& areas,
                           Point gate) {
  if (aps.empty()) throw ValidationError("placement_objective: need at least one anchor");
  if (areas.empty()) throw ValidationError("placement_objective: need at least one area");
  double best = std::numeric_limits<double>::infinity();
  for (const Point& area : areas) {
    double sum = 0.0;
    for (const Point& ap : aps) {
      const double d_area = distance(area, ap);
      const double d_gate = distance(gate, ap);
      if (d_area <= 0.0) {
        throw ValidationError("placement_objective: area coincides with an anchor");
      }
      if (d_gate <= 0.0) {
        throw ValidationError("placement_objective: gate coincides with an anchor");
      }
      const double term = std::log10(d_area / d_gate);
      sum += term * term;
    }
    best = std::min(best, sum);
  }
  return best;
}

std::vector<PlacementSolution> optimize(const PlacementProblem& problem,
                                        std::uint64_t max_combinations, Exec exec) {
  validate_problem(problem);
  const std::size_t K = problem.ap_candidates.size();
  const std::size_t M = problem.area_candidates.size();
  const std::uint64_t n_ap = binomial_capped(K, problem.k, max_combinations);
  const std::uint64_t n_area = binomial_capped(M, problem.m, max_combinations);
  if (n_ap > max_combinations || n_area > max_combinations ||
      n_ap > max_combinations / n_area) {
    throw ValidationError(
        "placement: combination count C(" + std::to_string(K) + "," + std::to_string(problem.k) +
        ") * C(" + std::to_string(M) + "," + std::to_string(problem.m) + ") exceeds the guard of " +
        std::to_string(max_combinations) + "; raise --max-combos to override");
  }
  const std::uint64_t total = n_ap * n_area;

  std::vector<PlacementSolution> solutions(total);
  auto fill = [&](std::uint64_t idx) {
    PlacementSolution& sol = solutions[idx];
    sol.ap_indices = unrank_combination(idx / n_area, K, problem.k);
    sol.area_indices = unrank_combination(idx % n_area, M, problem.m);
    std::vector<Point> aps(problem.k);
    for (std::size_t i = 0; i < problem.k; ++i) aps[i] = problem.ap_candidates[sol.ap_indices[i]];
    std::vector<Point> areas(problem.m);
    for (std::size_t i = 0; i < problem.m; ++i) {
      areas[i] = problem.area_candidates[sol.area_indices[i]];
    }
    sol.objective = placement_objective(aps, areas, problem.gate);
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(total); ++i) {
      fill(static_cast<std::uint64_t>(i));
    }
  } else {
    for (std::uint64_t i = 0; i < total; ++i) fill(i);
  }

  std::sort(solutions.begin(), solutions.end(),
            [](const PlacementSolution& a, const PlacementSolution& b) {
              if (a.objective != b.objective) return a.objective > b.objective;
              if (a.ap_indices != b.ap_indices) return a.ap_indices < b.ap_indices;
              return a.area_indices < b.area_indices;
            });
  for (std::size_t i = 0; i < solutions.size(); ++i) solutions[i].rank = i + 1;
  return solutions;
}

RankingReport validate_ranking(const PlacementProblem& problem, RankingMode mode, double sigma,
                               double nu, std::size_t trials, std::uint64_t seed, Exec exec) {
  if (trials < 100) throw ValidationError("validate_ranking: trials must be >= 100");
  if (!(sigma > 0.0)) throw ValidationError("validate_ranking: sigma must be positive");
  if (!(nu > 0.0) || !(nu < 1.0)) throw ValidationError("validate_ranking: nu must be in (0, 1)");

  RankingReport report;
  report.solutions = optimize(problem, kDefaultMaxCombinations, exec);
  const std::size_t n = report.solutions.size();
  report.empirical_rates.assign(n, 0.0);

  auto rate_for = [&](std::size_t si) {
    const PlacementSolution& sol = report.solutions[si];
    std::vector<Point> aps(problem.k);
    for (std::size_t i = 0; i < problem.k; ++i) aps[i] = problem.ap_candidates[sol.ap_indices[i]];
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < sol.area_indices.size(); ++a) {
      const Point centroid = problem.area_candidates[sol.area_indices[a]];
      double rate;
      if (mode == RankingMode::analytic) {
        RateQuery query;
        query.aps = aps;
        query.trusted = centroid;
        query.eta = problem.eta;
        query.sigma = sigma;
        query.nu = nu;
        rate = detection_rate_point(query, problem.gate).rate;
      } else {
        PropagationParams params;
        params.model = PropagationModel::friis_gaussian;
        params.path_loss_exponent = problem.eta;
        params.sigma_db = sigma;
        Rng train_rng = Rng::substream(seed, si * 2 * problem.m + 2 * a);
        Rng test_rng = Rng::substream(seed, si * 2 * problem.m + 2 * a + 1);
        Matrix train(trials, problem.k);
        Matrix test(trials, problem.k);
        for (std::size_t r = 0; r < trials; ++r) {
          for (std::size_t c = 0; c < problem.k; ++c) {
            train(r, c) = sample_rssi(centroid, aps[c], params, train_rng);
          }
        }
        for (std::size_t r = 0; r < trials; ++r) {
          for (std::size_t c = 0; c < problem.k; ++c) {
            test(r, c) = sample_rssi(problem.gate, aps[c], params, test_rng);
          }
        }
        const StandardizerStats stats = fit_standardizer(train);
        OcSvmConfig config;
        config.nu = nu;
        const OcSvmModel model = train_ocsvm(apply_standardizer(stats, train), config);
        const Matrix test_std = apply_standardizer(stats, test);
        std::size_t flagged = 0;
        for (std::size_t r = 0; r < trials; ++r) {
          if (!classify(model, test_std.row(r))) ++flagged;
        }
        rate = static_cast<double>(flagged) / static_cast<double>(trials);
      }
      worst = std::min(worst, rate);
    }
    report.empirical_rates[si] = worst;
  };

  if (exec == Exec::parallel && mode == RankingMode::mc_ocsvm) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
      try {
        rate_for(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(zonedet_validate_ranking_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (std::size_t i = 0; i < n; ++i) rate_for(i);
  }

  std::vector<double> objectives(n);
  for (std::size_t i = 0; i < n; ++i) objectives[i] = report.solutions[i].objective;
  const auto [r, p] = pearson(rank_vector(objectives), rank_vector(report.empirical_rates));
  report.r = r;
  report.p_value = p;
  return report;
}

}  // namespace zonedet
