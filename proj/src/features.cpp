#include "zonedet/features.hpp"

#include <cmath>
#include <string>

namespace zonedet {

Matrix average_windows(const Matrix& raw, std::size_t window) {
  if (window == 0) throw ValidationError("average_windows: window size must be >= 1");
  if (raw.rows() < window) {
    throw ValidationError("average_windows: need at least " + std::to_string(window) +
                          " rows, got " + std::to_string(raw.rows()));
  }
  const std::size_t out_rows = raw.rows() / window;
  Matrix out(out_rows, raw.cols());
  for (std::size_t w = 0; w < out_rows; ++w) {
    for (std::size_t c = 0; c < raw.cols(); ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < window; ++i) acc += raw(w * window + i, c);
      out(w, c) = acc / static_cast<double>(window);
    }
  }
  return out;
}

StandardizerStats fit_standardizer(const Matrix& train) {
  if (train.rows() < 2) throw ValidationError("fit_standardizer: need >= 2 rows");
  const auto n = static_cast<double>(train.rows());
  StandardizerStats stats;
  stats.mean.resize(train.cols());
  stats.std.resize(train.cols());
  for (std::size_t c = 0; c < train.cols(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < train.rows(); ++r) sum += train(r, c);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < train.rows(); ++r) {
      const double d = train(r, c) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    if (!(sd > 1e-12 * std::max(1.0, std::fabs(mean)))) {
      throw ValidationError("fit_standardizer: AP column " + std::to_string(c + 1) +
                            " has zero variance");
    }
    stats.mean[c] = mean;
    stats.std[c] = sd;
  }
  return stats;
}

Matrix apply_standardizer(const StandardizerStats& stats, const Matrix& data) {
  if (data.cols() != stats.mean.size()) {
    throw ValidationError("apply_standardizer: expected " + std::to_string(stats.mean.size()) +
                          " columns, got " + std::to_string(data.cols()));
  }
  Matrix out(data.rows(), data.cols());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < data.cols(); ++c) {
      out(r, c) = (data(r, c) - stats.mean[c]) / stats.std[c];
    }
  }
  return out;
}

}  // namespace zonedet
