#pragma once

#include <vector>

#include "zonedet/common.hpp"

namespace zonedet {

/// Per-feature training statistics used to standardize RSSI features.
struct StandardizerStats {
  std::vector<double> mean;  // dBm
  std::vector<double> std;   // dB, population standard deviation, all > 0
};

/// Average non-overlapping blocks of `window` consecutive rows per column.
/// A trailing remainder of fewer than `window` rows is discarded, so the
/// output has floor(rows / window) rows.
Matrix average_windows(const Matrix& raw, std::size_t window);

/// Per-column mean and population standard deviation of the training matrix.
/// Requires >= 2 rows; a (numerically) constant column is an error.
StandardizerStats fit_standardizer(const Matrix& train);

/// (value - train mean) / train std, entry-wise. The training statistics are
/// used in both the training and the detection phase.
Matrix apply_standardizer(const StandardizerStats& stats, const Matrix& data);

}  // namespace zonedet
