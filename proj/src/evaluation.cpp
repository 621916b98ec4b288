#include "zonedet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "zonedet/features.hpp"
#include "zonedet/ocsvm.hpp"
#include "zonedet/special.hpp"

namespace zonedet {

double f_measure(std::size_t tp, std::size_t fp, std::size_t fn) {
  if (tp + fp == 0) throw ValidationError("f_measure: tp + fp must be positive");
  if (tp + fn == 0) throw ValidationError("f_measure: tp + fn must be positive");
  if (tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

std::pair<double, double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("pearson: input lengths differ");
  const std::size_t n = x.size();
  if (n < 3) throw ValidationError("pearson: need at least 3 pairs");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw ValidationError("pearson: correlation undefined for constant input");
  }
  double r = sxy / std::sqrt(sxx * syy);
  r = std::clamp(r, -1.0, 1.0);
  const double dof = static_cast<double>(n - 2);
  double p;
  if (1.0 - r * r <= 0.0) {
    p = 0.0;
  } else {
    const double t = r * std::sqrt(dof / (1.0 - r * r));
    p = student_t_two_sided_p(t, dof);
  }
  return {r, p};
}

PairedTResult paired_t_test(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("paired_t_test: input lengths differ");
  const std::size_t n = x.size();
  if (n < 2) throw ValidationError("paired_t_test: need at least 2 pairs");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += x[i] - y[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (x[i] - y[i]) - mean;
    ss += d * d;
  }
  if (ss == 0.0) {
    throw ValidationError("paired_t_test: differences are constant, t undefined");
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  PairedTResult result;
  result.mean_diff = mean;
  result.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  result.p = student_t_two_sided_p(result.t, static_cast<double>(n - 1));
  return result;
}

namespace {

FoldResult evaluate_fold(const LabeledDatasets& data, const EvalConfig& config,
                         std::size_t fold) {
  const std::size_t cols = data.target_sets.front().cols();
  std::size_t train_rows = 0;
  for (std::size_t s = 0; s < data.target_sets.size(); ++s) {
    if (s == fold) continue;
    train_rows += data.target_sets[s].rows() / config.n_avg;
  }
  if (train_rows == 0) {
    throw ValidationError("loocv: fold " + std::to_string(fold) +
                          " has no training windows after averaging");
  }
  Matrix train(train_rows, cols);
  std::size_t out = 0;
  for (std::size_t s = 0; s < data.target_sets.size(); ++s) {
    if (s == fold) continue;
    const Matrix avg = average_windows(data.target_sets[s], config.n_avg);
    for (std::size_t r = 0; r < avg.rows(); ++r) {
      std::copy(avg.row(r).begin(), avg.row(r).end(), train.row(out++).begin());
    }
  }

  const StandardizerStats stats = fit_standardizer(train);
  OcSvmConfig svm_config;
  svm_config.nu = config.nu;
  svm_config.gamma = config.gamma;
  const OcSvmModel model = train_ocsvm(apply_standardizer(stats, train), svm_config);

  auto count_flagged = [&](const Matrix& raw) -> std::pair<std::size_t, std::size_t> {
    const Matrix scored = apply_standardizer(stats, average_windows(raw, config.n_avg));
    std::size_t flagged = 0;
    for (std::size_t r = 0; r < scored.rows(); ++r) {
      if (!classify(model, scored.row(r))) ++flagged;
    }
    return {flagged, scored.rows()};
  };

  FoldResult result;
  result.fold = fold;
  const auto [pos_flagged, pos_total] = count_flagged(data.target_sets[fold]);
  std::size_t neg_flagged = 0, neg_total = 0;
  for (const auto& [zone, sets] : data.negative_sets) {
    std::size_t z_flagged = 0, z_total = 0;
    for (const Matrix& set : sets) {
      const auto [f, t] = count_flagged(set);
      z_flagged += f;
      z_total += t;
    }
    if (z_total == 0) {
      throw ValidationError("loocv: zone '" + zone + "' has no windows after averaging");
    }
    result.zone_detection_rates[zone] =
        static_cast<double>(z_flagged) / static_cast<double>(z_total);
    neg_flagged += z_flagged;
    neg_total += z_total;
  }
  if (neg_total == 0) throw ValidationError("loocv: no negative samples");
  result.detection_rate = static_cast<double>(neg_flagged) / static_cast<double>(neg_total);

  if (config.positive_is_target) {
    result.tp = pos_total - pos_flagged;
    result.fn = pos_flagged;
    result.fp = neg_total - neg_flagged;
    result.tn = neg_flagged;
  } else {
    result.tp = neg_flagged;
    result.fn = neg_total - neg_flagged;
    result.fp = pos_flagged;
    result.tn = pos_total - pos_flagged;
  }
  result.precision = result.tp + result.fp > 0
                         ? static_cast<double>(result.tp) /
                               static_cast<double>(result.tp + result.fp)
                         : 0.0;
  result.recall = static_cast<double>(result.tp) / static_cast<double>(result.tp + result.fn);
  result.f_measure = result.precision + result.recall > 0.0
                         ? 2.0 * result.precision * result.recall /
                               (result.precision + result.recall)
                         : 0.0;
  return result;
}

}  // namespace

EvalReport loocv_detection_rate(const LabeledDatasets& data, const EvalConfig& config) {
  const std::size_t S = data.target_sets.size();
  if (S < 2) throw ValidationError("loocv: need at least 2 target sets");
  if (config.n_avg == 0) throw ValidationError("loocv: n_avg must be >= 1");
  if (!(config.nu > 0.0) || !(config.nu <= 1.0)) {
    throw ValidationError("loocv: nu must be in (0, 1]");
  }
  const std::size_t cols = data.target_sets.front().cols();
  for (const Matrix& set : data.target_sets) {
    if (set.cols() != cols) throw ValidationError("loocv: target sets have mixed column counts");
  }
  for (const auto& [zone, sets] : data.negative_sets) {
    if (sets.empty()) throw ValidationError("loocv: zone '" + zone + "' has no sets");
    for (const Matrix& set : sets) {
      if (set.cols() != cols) {
        throw ValidationError("loocv: zone '" + zone + "' has mixed column counts");
      }
    }
  }
  if (data.negative_sets.empty()) throw ValidationError("loocv: no negative sets");

  EvalReport report;
  report.folds.resize(S);
  std::vector<std::exception_ptr> failures(S);
  auto run_fold = [&](std::size_t f) {
    try {
      report.folds[f] = evaluate_fold(data, config, f);
    } catch (...) {
      failures[f] = std::current_exception();
    }
  };
  if (config.exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t f = 0; f < static_cast<std::int64_t>(S); ++f) {
      run_fold(static_cast<std::size_t>(f));
    }
  } else {
    for (std::size_t f = 0; f < S; ++f) run_fold(f);
  }
  for (std::size_t f = 0; f < S; ++f) {
    if (!failures[f]) continue;
    const std::string where = "loocv: fold " + std::to_string(f) + " failed: ";
    try {
      std::rethrow_exception(failures[f]);
    } catch (const NumericError& e) {
      throw NumericError(where + e.what());
    } catch (const IoError& e) {
      throw IoError(where + e.what());
    } catch (const std::exception& e) {
      throw ValidationError(where + e.what());
    }
  }

  const auto n = static_cast<double>(S);
  for (const FoldResult& fold : report.folds) {
    report.precision += fold.precision / n;
    report.recall += fold.recall / n;
    report.f_measure += fold.f_measure / n;
    report.detection_rate += fold.detection_rate / n;
    for (const auto& [zone, rate] : fold.zone_detection_rates) {
      report.zone_detection_rates[zone] += rate / n;
    }
  }
  return report;
}

}  // namespace zonedet
