#include "zonedet/ocsvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace zonedet {

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

namespace {

// Kernel rows against the training matrix, either fully materialized or
// computed on demand (with a one-row scratch buffer) when the matrix would
// be too large.
class KernelSource {
 public:
  KernelSource(const Matrix& data, double gamma, std::size_t cache_cap_rows)
      : data_(data), gamma_(gamma), cached_(data.rows() <= cache_cap_rows) {
    const std::size_t s = data_.rows();
    if (cached_) {
      full_.resize(s * s);
      for (std::size_t i = 0; i < s; ++i) {
        full_[i * s + i] = 1.0;
        for (std::size_t j = i + 1; j < s; ++j) {
          const double k = rbf_kernel(data_.row(i), data_.row(j), gamma_);
          full_[i * s + j] = k;
          full_[j * s + i] = k;
        }
      }
    } else {
      scratch_.resize(s);
      scratch_row_ = s;  // invalid marker
    }
  }

  const double* row(std::size_t i) {
    if (cached_) return full_.data() + i * data_.rows();
    if (scratch_row_ != i) {
      for (std::size_t j = 0; j < data_.rows(); ++j) {
        scratch_[j] = rbf_kernel(data_.row(i), data_.row(j), gamma_);
      }
      scratch_row_ = i;
    }
    return scratch_.data();
  }

  // Single entries without disturbing the scratch row.
  double at(std::size_t i, std::size_t j) {
    if (cached_) return full_[i * data_.rows() + j];
    if (i == j) return 1.0;
    return rbf_kernel(data_.row(i), data_.row(j), gamma_);
  }

 private:
  const Matrix& data_;
  double gamma_;
  bool cached_;
  std::vector<double> full_;
  std::vector<double> scratch_;
  std::size_t scratch_row_ = 0;
};

}  // namespace

OcSvmModel train_ocsvm(const Matrix& data, const OcSvmConfig& config) {
  const std::size_t s = data.rows();
  const std::size_t k = data.cols();
  if (s == 0 || k == 0) throw ValidationError("train_ocsvm: training set is empty");
  if (!(config.nu > 0.0) || !(config.nu <= 1.0)) {
    throw ValidationError("train_ocsvm: nu must be in (0, 1]");
  }
  if (config.nu * static_cast<double>(s) < 1.0) {
    throw ValidationError("train_ocsvm: nu * sample count must be >= 1 (got nu=" +
                          std::to_string(config.nu) + ", s=" + std::to_string(s) + ")");
  }
  double gamma = config.gamma.value_or(1.0 / static_cast<double>(k));
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ValidationError("train_ocsvm: gamma must be positive and finite");
  }
  for (std::size_t r = 0; r < s; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      if (!std::isfinite(data(r, c))) {
        throw ValidationError("train_ocsvm: non-finite feature value at row " +
                              std::to_string(r));
      }
    }
  }

  const double upper = 1.0 / (config.nu * static_cast<double>(s));
  std::vector<double> alpha(s, 0.0);
  // Standard initialization: the first floor(nu*s) coefficients at the box
  // bound, one fractional remainder, rest zero. Sums to exactly 1 in the
  // remainder-free case and to 1 up to rounding otherwise.
  {
    const auto n_full = static_cast<std::size_t>(std::floor(config.nu * static_cast<double>(s)));
    for (std::size_t i = 0; i < n_full; ++i) alpha[i] = upper;
    double assigned = upper * static_cast<double>(n_full);
    if (n_full < s && assigned < 1.0) alpha[n_full] = 1.0 - assigned;
  }

  KernelSource kernel(data, gamma, config.cache_cap_rows);

  // Gradient of the objective: G_i = sum_j alpha_j K_ij.
  std::vector<double> grad(s, 0.0);
  for (std::size_t j = 0; j < s; ++j) {
    if (alpha[j] == 0.0) continue;
    const double* kj = kernel.row(j);
    for (std::size_t i = 0; i < s; ++i) grad[i] += alpha[j] * kj[i];
  }

  const std::size_t max_iter =
      config.max_iterations > 0 ? config.max_iterations : 100000 * s;

  double violation = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    // Maximal violating pair: i can grow (alpha_i < C), j can shrink
    // (alpha_j > 0). At optimality all growable gradients are >= all
    // shrinkable ones.
    std::size_t i_up = s, j_dn = s;
    double g_min = std::numeric_limits<double>::infinity();
    double g_max = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < s; ++m) {
      if (alpha[m] < upper && grad[m] < g_min) {
        g_min = grad[m];
        i_up = m;
      }
      if (alpha[m] > 0.0 && grad[m] > g_max) {
        g_max = grad[m];
        j_dn = m;
      }
    }
    violation = g_max - g_min;
    if (i_up == s || j_dn == s || violation < config.kkt_tolerance) {
      converged = true;
      break;
    }

    const double k_ii = kernel.at(i_up, i_up);
    const double k_jj = kernel.at(j_dn, j_dn);
    const double k_ij = kernel.at(i_up, j_dn);
    const double curvature = std::max(k_ii + k_jj - 2.0 * k_ij, 1e-12);
    double t = violation / curvature;

    const double headroom_i = upper - alpha[i_up];
    const double headroom_j = alpha[j_dn];
    if (t >= headroom_i && headroom_i <= headroom_j) {
      t = headroom_i;
      alpha[i_up] = upper;
      alpha[j_dn] -= t;
    } else if (t >= headroom_j) {
      t = headroom_j;
      alpha[j_dn] = 0.0;
      alpha[i_up] += t;
    } else {
      alpha[i_up] += t;
      alpha[j_dn] -= t;
    }

    const double* ki = kernel.row(i_up);
    for (std::size_t m = 0; m < s; ++m) grad[m] += t * ki[m];
    const double* kj = kernel.row(j_dn);
    for (std::size_t m = 0; m < s; ++m) grad[m] -= t * kj[m];
  }
  if (!converged) {
    throw NumericError("train_ocsvm: SMO did not converge (violation " +
                       std::to_string(violation) + " after " + std::to_string(max_iter) +
                       " iterations)");
  }

  // rho: average gradient over free support vectors (0 < alpha < C); if
  // every support vector sits on the box bound, fall back to the smallest
  // gradient among support vectors, which keeps them on the target side.
  double rho;
  {
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double min_sv = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < s; ++m) {
      if (alpha[m] <= 0.0) continue;
      min_sv = std::min(min_sv, grad[m]);
      if (alpha[m] < upper) {
        free_sum += grad[m];
        ++free_count;
      }
    }
    rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : min_sv;
  }

  OcSvmModel model;
  model.gamma = gamma;
  model.nu = config.nu;
  model.rho = rho;
  std::size_t n_sv = 0;
  for (double a : alpha) {
    if (a > 0.0) ++n_sv;
  }
  model.support_vectors = Matrix(n_sv, k);
  model.alphas.reserve(n_sv);
  std::size_t out = 0;
  for (std::size_t m = 0; m < s; ++m) {
    if (alpha[m] <= 0.0) continue;
    auto src = data.row(m);
    auto dst = model.support_vectors.row(out);
    std::copy(src.begin(), src.end(), dst.begin());
    model.alphas.push_back(alpha[m]);
    ++out;
  }
  return model;
}

double decision_value(const OcSvmModel& model, std::span<const double> x) {
  if (x.size() != model.support_vectors.cols()) {
    throw ValidationError("decision_value: expected " +
                          std::to_string(model.support_vectors.cols()) +
                          " features, got " + std::to_string(x.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < model.support_vectors.rows(); ++i) {
    sum += model.alphas[i] * rbf_kernel(model.support_vectors.row(i), x, model.gamma);
  }
  return sum - model.rho;
}

bool classify(const OcSvmModel& model, std::span<const double> x) {
  return decision_value(model, x) >= 0.0;
}

double dual_objective(const Matrix& data, const std::vector<double>& alphas, double gamma) {
  if (alphas.size() != data.rows()) {
    throw ValidationError("dual_objective: alpha count does not match row count");
  }
  double obj = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    if (alphas[i] == 0.0) continue;
    obj += alphas[i] * alphas[i];  // K_ii = 1 for RBF
    for (std::size_t j = i + 1; j < data.rows(); ++j) {
      if (alphas[j] == 0.0) continue;
      obj += 2.0 * alphas[i] * alphas[j] * rbf_kernel(data.row(i), data.row(j), gamma);
    }
  }
  return 0.5 * obj;
}

}  // namespace zonedet
