#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "zonedet/common.hpp"

namespace zonedet {

// Scripted validation experiments: the detection-rate curve compares the
// closed-form rate against Monte-Carlo rates under both propagation models,
// and the averaging study measures how window-averaging shrinks fading
// spread.

struct RateCurveConfig {
  std::vector<Point> aps = {{0.0, 0.0}, {0.0, 10.0}, {10.0, 0.0}};
  Point t_in{5.0, 5.0};
  double nu = 0.1;
  std::size_t trials = 1000;
  // Probe positions; empty means the default of 20 points spaced evenly
  // 3 to 30 m from t_in along the diagonal (1,1)/sqrt(2).
  std::vector<Point> probes;
  double sigma = 5.57;
  double eta = 2.0;
  double transmit_power_dbm = -30.0;
  double epsilon = 0.1;
  double lambda_fade = 0.561;
  std::size_t n_avg = 1;
  // false: classify each trial with the closed-form surrogate (squared norm
  // of the standardized vector against delta). true: train a one-class SVM
  // on simulated observations at t_in and classify with it.
  bool use_ocsvm = false;
  std::size_t train_size = 1000;  // OC-SVM mode only
};

struct RateCurveRow {
  Point probe{};
  double distance = 0.0;   // |probe - t_in|
  double lambda = 0.0;     // non-centrality numerator
  double rate_analytic = 0.0;
  double rate_mc_friis = 0.0;
  double rate_mc_rayleigh = 0.0;
  double se_friis = 0.0;   // binomial standard errors of the MC rates
  double se_rayleigh = 0.0;
};

std::vector<Point> default_rate_curve_probes(Point t_in);

std::vector<RateCurveRow> run_rate_curve(const RateCurveConfig& config, std::uint64_t seed,
                                         Exec exec = Exec::parallel);

struct AveragingResult {
  double single_std = 0.0;           // raw per-draw fading std, dB
  double averaged_db_std = 0.0;      // std of dB-domain window means
  double averaged_linear_std = 0.0;  // std of dB(linear-power window means)
};

// draws windows of n_avg fading samples each (draws >= 1e4).
AveragingResult run_averaging(double lambda_fade, std::size_t n_avg, std::size_t draws,
                              std::uint64_t seed);

}  // namespace zonedet
