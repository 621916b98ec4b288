#pragma once

// Independent QP solver for the OC-SVM dual, used only by tests to
// cross-check the SMO objective.  Accelerated projected gradient (FISTA);
// the feasible-set projection {0 <= a <= C, sum a = 1} is computed by
// bisection on the shift theta in a_i = clamp(v_i - theta, 0, C).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "zonedet/common.hpp"
#include "zonedet/ocsvm.hpp"

namespace zonedet::testing {

inline std::vector<double> project_capped_simplex(const std::vector<double>& v,
                                                  double upper) {
  const std::size_t n = v.size();
  double lo = *std::min_element(v.begin(), v.end()) - upper - 1.0;
  double hi = *std::max_element(v.begin(), v.end()) + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double theta = 0.5 * (lo + hi);
    double sum = 0.0;
    for (double vi : v) sum += std::clamp(vi - theta, 0.0, upper);
    if (sum > 1.0) {
      lo = theta;
    } else {
      hi = theta;
    }
  }
  const double theta = 0.5 * (lo + hi);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::clamp(v[i] - theta, 0.0, upper);
  return out;
}

inline std::vector<double> qp_oracle_solve(const Matrix& data, double nu, double gamma,
                                           int iterations = 20000) {
  const std::size_t s = data.rows();
  const double upper = 1.0 / (nu * static_cast<double>(s));

  std::vector<double> kernel(s * s);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double k = rbf_kernel(data.row(i), data.row(j), gamma);
      kernel[i * s + j] = k;
      kernel[j * s + i] = k;
    }
  }

  auto matvec = [&](const std::vector<double>& x) {
    std::vector<double> y(s, 0.0);
    for (std::size_t i = 0; i < s; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < s; ++j) acc += kernel[i * s + j] * x[j];
      y[i] = acc;
    }
    return y;
  };

  // Largest eigenvalue by power iteration (Q is PSD so this converges).
  std::vector<double> p(s, 1.0 / std::sqrt(static_cast<double>(s)));
  double lipschitz = 1.0;
  for (int it = 0; it < 300; ++it) {
    std::vector<double> q = matvec(p);
    double norm = 0.0;
    for (double qi : q) norm += qi * qi;
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    lipschitz = norm;
    for (std::size_t i = 0; i < s; ++i) p[i] = q[i] / norm;
  }
  lipschitz = lipschitz * 1.01 + 1e-9;

  std::vector<double> alpha =
      project_capped_simplex(std::vector<double>(s, 1.0 / static_cast<double>(s)), upper);
  std::vector<double> y = alpha;
  double t = 1.0;
  std::vector<double> scratch(s);
  for (int it = 0; it < iterations; ++it) {
    const std::vector<double> grad = matvec(y);
    for (std::size_t i = 0; i < s; ++i) scratch[i] = y[i] - grad[i] / lipschitz;
    std::vector<double> next = project_capped_simplex(scratch, upper);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t i = 0; i < s; ++i)
      y[i] = next[i] + ((t - 1.0) / t_next) * (next[i] - alpha[i]);
    alpha = std::move(next);
    t = t_next;
  }
  return alpha;
}

}  // namespace zonedet::testing
