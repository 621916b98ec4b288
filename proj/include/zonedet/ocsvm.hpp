#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "zonedet/common.hpp"
#include "zonedet/features.hpp"

namespace zonedet {

// One-class SVM with an RBF kernel, trained by sequential minimal
// optimization on the dual:
//
//   min 1/2 sum_ij a_i a_j K(x_i, x_j)
//   s.t. 0 <= a_i <= 1/(nu * s),  sum_i a_i = 1
//
// A point is classified as "target" (inlier) when the decision value
// sum_i a_i K(x_i, x) - rho is non-negative.

struct OcSvmConfig {
  double nu = 0.1;
  // Kernel width; when unset, defaults to 1/k where k is the feature count.
  std::optional<double> gamma;
  double kkt_tolerance = 1e-4;
  // 0 means "choose automatically" (1e5 * sample count).
  std::size_t max_iterations = 0;
  // Full kernel matrix is cached when the sample count is at most this.
  std::size_t cache_cap_rows = 8192;
};

struct OcSvmModel {
  Matrix support_vectors;
  std::vector<double> alphas;  // same length as support_vectors rows
  double rho = 0.0;
  double gamma = 0.0;
  double nu = 0.0;
};

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

OcSvmModel train_ocsvm(const Matrix& data, const OcSvmConfig& config);

double decision_value(const OcSvmModel& model, std::span<const double> x);

// true = target (inlier), false = anomaly.
bool classify(const OcSvmModel& model, std::span<const double> x);

// 1/2 a^T Q a for a full alpha vector over `data` (diagnostic; used to
// compare the SMO solution against independent QP solvers).
double dual_objective(const Matrix& data, const std::vector<double>& alphas, double gamma);

}  // namespace zonedet
