#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zonedet/common.hpp"

namespace zonedet {

// Leave-one-out cross validation over data sets plus the scoring primitives
// (F-measure, Pearson correlation, paired t-test).

struct LabeledDatasets {
  // S collected sets for one target area; each fold holds one of them out.
  std::vector<Matrix> target_sets;
  // Non-target sets, keyed by zone label (other areas, outside the store).
  std::map<std::string, std::vector<Matrix>> negative_sets;
};

struct EvalConfig {
  std::size_t n_avg = 1;
  double nu = 0.1;
  std::optional<double> gamma;  // default 1/k
  // Positive class for precision/recall. false (default) scores detection:
  // positive = "flagged as non-target". true scores target recognition.
  bool positive_is_target = false;
  Exec exec = Exec::parallel;
};

struct FoldResult {
  std::size_t fold = 0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  // Fraction of non-target samples flagged, pooled and per zone.
  double detection_rate = 0.0;
  std::map<std::string, double> zone_detection_rates;
};

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  double detection_rate = 0.0;
  std::map<std::string, double> zone_detection_rates;
  std::vector<FoldResult> folds;
};

// Harmonic mean of precision and recall from raw counts. Requires
// tp + fp > 0 and tp + fn > 0; returns 0 when tp == 0.
double f_measure(std::size_t tp, std::size_t fp, std::size_t fn);

// Sample Pearson correlation and the exact two-sided p-value from the
// t-transform with n - 2 degrees of freedom. Requires n >= 3 and both
// inputs non-constant.
std::pair<double, double> pearson(const std::vector<double>& x, const std::vector<double>& y);

struct PairedTResult {
  double t = 0.0;
  double p = 0.0;  // two-sided
  double mean_diff = 0.0;
};

// Paired two-sided t-test of x against y (n >= 2, differences non-constant).
PairedTResult paired_t_test(const std::vector<double>& x, const std::vector<double>& y);

// Per fold: average the held-out target set and every negative set into
// n_avg-windows, standardize with statistics fitted on that fold's training
// rows only, train a one-class SVM, score. Fold metrics are averaged into
// the report totals.
EvalReport loocv_detection_rate(const LabeledDatasets& data, const EvalConfig& config);

}  // namespace zonedet
