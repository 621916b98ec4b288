#include "zonedet/experiments.hpp"

#include <cmath>
#include <string>

#include "zonedet/analytic.hpp"
#include "zonedet/features.hpp"
#include "zonedet/ocsvm.hpp"
#include "zonedet/propagation.hpp"
#include "zonedet/rng.hpp"
#include "zonedet/special.hpp"

namespace zonedet {

namespace {

// Children of the experiment seed, one per independent sampling role, so
// that e.g. adding probes to the curve never shifts the training stream.
enum SeedTag : std::uint64_t {
  kTagFriisMc = 1,
  kTagRayleighMc = 2,
  kTagFriisTrain = 3,
  kTagRayleighTrain = 4,
  kTagAveraging = 5,
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return Rng::substream(seed, tag).next_u64();
}

PropagationParams curve_params(const RateCurveConfig& config, PropagationModel model) {
  PropagationParams params;
  params.model = model;
  params.transmit_power_dbm = config.transmit_power_dbm;
  params.path_loss_exponent = config.eta;
  params.sigma_db = config.sigma;
  params.epsilon = config.epsilon;
  params.lambda_fade = config.lambda_fade;
  return params;
}

// One feature row at `where`: n_avg beacon draws per anchor, averaged.
void sample_feature_row(std::span<double> row, Point where, const std::vector<Point>& aps,
                        const PropagationParams& params, std::size_t n_avg, Rng& rng) {
  for (std::size_t c = 0; c < aps.size(); ++c) row[c] = 0.0;
  for (std::size_t w = 0; w < n_avg; ++w) {
    for (std::size_t c = 0; c < aps.size(); ++c) {
      row[c] += sample_rssi(where, aps[c], params, rng);
    }
  }
  for (std::size_t c = 0; c < aps.size(); ++c) row[c] /= static_cast<double>(n_avg);
}

}  // namespace

std::vector<Point> default_rate_curve_probes(Point t_in) {
  std::vector<Point> probes(20);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const double d = 3.0 + 27.0 * static_cast<double>(i) / 19.0;
    probes[i] = {t_in.x + d * inv_sqrt2, t_in.y + d * inv_sqrt2};
  }
  return probes;
}

std::vector<RateCurveRow> run_rate_curve(const RateCurveConfig& config, std::uint64_t seed,
                                         Exec exec) {
  if (config.aps.empty()) throw ValidationError("rate curve: need at least one anchor");
  if (config.trials < 1) throw ValidationError("rate curve: trials must be >= 1");
  if (config.n_avg < 1) throw ValidationError("rate curve: n_avg must be >= 1");
  if (!(config.nu > 0.0) || !(config.nu < 1.0)) {
    throw ValidationError("rate curve: nu must be in (0, 1)");
  }
  if (!(config.sigma > 0.0)) throw ValidationError("rate curve: sigma must be positive");
  const std::vector<Point> probes =
      config.probes.empty() ? default_rate_curve_probes(config.t_in) : config.probes;
  for (const Point& probe : probes) {
    for (const Point& ap : config.aps) {
      if (distance(probe, ap) <= 0.0) {
        throw ValidationError("rate curve: a probe position coincides with an anchor");
      }
    }
  }
  for (const Point& ap : config.aps) {
    if (distance(config.t_in, ap) <= 0.0) {
      throw ValidationError("rate curve: t_in coincides with an anchor");
    }
  }

  const std::size_t k = config.aps.size();
  const std::size_t n_probes = probes.size();
  const std::size_t trials = config.trials;
  // Averaging over n_avg draws shrinks the Gaussian spread accordingly;
  // both the threshold calibration and the analytic curve use the reduced
  // scale so the experiment stays self-consistent for any window size.
  const double sigma_eff = config.sigma / std::sqrt(static_cast<double>(config.n_avg));
  const double delta = chi2_quantile(1.0 - config.nu, static_cast<double>(k));

  RateQuery query;
  query.aps = config.aps;
  query.trusted = config.t_in;
  query.eta = config.eta;
  query.sigma = sigma_eff;
  query.nu = config.nu;

  const PropagationParams friis = curve_params(config, PropagationModel::friis_gaussian);
  const PropagationParams rayleigh = curve_params(config, PropagationModel::nonsingular_rayleigh);

  // Surrogate calibration: standardize by the model's deterministic mean at
  // t_in and the Gaussian scale. OC-SVM mode replaces this with an
  // empirically fitted standardizer and a trained boundary per model.
  std::vector<double> mean_friis(k), mean_rayleigh(k);
  for (std::size_t c = 0; c < k; ++c) {
    mean_friis[c] = mean_rssi(config.t_in, config.aps[c], friis);
    mean_rayleigh[c] = mean_rssi(config.t_in, config.aps[c], rayleigh);
  }

  struct ModelHarness {
    StandardizerStats stats;
    OcSvmModel model;
  };
  ModelHarness harness_friis, harness_rayleigh;
  if (config.use_ocsvm) {
    if (config.train_size < 2) throw ValidationError("rate curve: train_size must be >= 2");
    auto build = [&](const PropagationParams& params, std::uint64_t tag) {
      const std::uint64_t train_seed = derive_seed(seed, tag);
      Matrix train(config.train_size, k);
      for (std::size_t r = 0; r < config.train_size; ++r) {
        Rng rng = Rng::substream(train_seed, r);
        sample_feature_row(train.row(r), config.t_in, config.aps, params, config.n_avg, rng);
      }
      ModelHarness h;
      h.stats = fit_standardizer(train);
      OcSvmConfig svm;
      svm.nu = config.nu;
      h.model = train_ocsvm(apply_standardizer(h.stats, train), svm);
      return h;
    };
    harness_friis = build(friis, kTagFriisTrain);
    harness_rayleigh = build(rayleigh, kTagRayleighTrain);
  }

  const std::uint64_t seed_friis = derive_seed(seed, kTagFriisMc);
  const std::uint64_t seed_rayleigh = derive_seed(seed, kTagRayleighMc);

  // flags[probe * trials + trial], one vector per model; filled in parallel,
  // reduced serially so the counts are partition-independent.
  std::vector<unsigned char> flag_friis(n_probes * trials), flag_rayleigh(n_probes * trials);
  auto run_trial = [&](std::size_t idx) {
    const std::size_t p = idx / trials;
    std::vector<double> row(k), standardized(k);
    {
      Rng rng = Rng::substream(seed_friis, idx);
      sample_feature_row(row, probes[p], config.aps, friis, config.n_avg, rng);
      bool flagged;
      if (config.use_ocsvm) {
        for (std::size_t c = 0; c < k; ++c) {
          standardized[c] = (row[c] - harness_friis.stats.mean[c]) / harness_friis.stats.std[c];
        }
        flagged = !classify(harness_friis.model, standardized);
      } else {
        for (std::size_t c = 0; c < k; ++c) {
          standardized[c] = (row[c] - mean_friis[c]) / sigma_eff;
        }
        flagged = !surrogate_classify(standardized, delta);
      }
      flag_friis[idx] = flagged ? 1 : 0;
    }
    {
      Rng rng = Rng::substream(seed_rayleigh, idx);
      sample_feature_row(row, probes[p], config.aps, rayleigh, config.n_avg, rng);
      bool flagged;
      if (config.use_ocsvm) {
        for (std::size_t c = 0; c < k; ++c) {
          standardized[c] =
              (row[c] - harness_rayleigh.stats.mean[c]) / harness_rayleigh.stats.std[c];
        }
        flagged = !classify(harness_rayleigh.model, standardized);
      } else {
        for (std::size_t c = 0; c < k; ++c) {
          standardized[c] = (row[c] - mean_rayleigh[c]) / sigma_eff;
        }
        flagged = !surrogate_classify(standardized, delta);
      }
      flag_rayleigh[idx] = flagged ? 1 : 0;
    }
  };

  const std::size_t total = n_probes * trials;
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(total); ++i) {
      run_trial(static_cast<std::size_t>(i));
    }
  } else {
    for (std::size_t i = 0; i < total; ++i) run_trial(i);
  }

  std::vector<RateCurveRow> rows(n_probes);
  for (std::size_t p = 0; p < n_probes; ++p) {
    RateCurveRow& row = rows[p];
    row.probe = probes[p];
    row.distance = distance(probes[p], config.t_in);
    const RateResult analytic = detection_rate_point(query, probes[p]);
    row.lambda = analytic.lambda;
    row.rate_analytic = analytic.rate;
    std::size_t count_f = 0, count_r = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      count_f += flag_friis[p * trials + t];
      count_r += flag_rayleigh[p * trials + t];
    }
    row.rate_mc_friis = static_cast<double>(count_f) / static_cast<double>(trials);
    row.rate_mc_rayleigh = static_cast<double>(count_r) / static_cast<double>(trials);
    row.se_friis =
        std::sqrt(row.rate_mc_friis * (1.0 - row.rate_mc_friis) / static_cast<double>(trials));
    row.se_rayleigh = std::sqrt(row.rate_mc_rayleigh * (1.0 - row.rate_mc_rayleigh) /
                                static_cast<double>(trials));
  }
  return rows;
}

AveragingResult run_averaging(double lambda_fade, std::size_t n_avg, std::size_t draws,
                              std::uint64_t seed) {
  if (!(lambda_fade > 0.0)) throw ValidationError("averaging: lambda_fade must be positive");
  if (n_avg < 1) throw ValidationError("averaging: n_avg must be >= 1");
  if (draws < 10000) throw ValidationError("averaging: need at least 1e4 draws");

  // Two passes over the same deterministic stream, so every spread below is
  // computed with the identical two-pass variance recipe and n_avg = 1
  // collapses all three outputs to exactly the same number.
  const std::uint64_t stream_seed = derive_seed(seed, kTagAveraging);
  auto for_each_window = [&](auto&& visit) {
    Rng rng = Rng::substream(stream_seed, 0);
    std::vector<double> xs(n_avg);
    for (std::size_t w = 0; w < draws; ++w) {
      double db_acc = 0.0, lin_acc = 0.0;
      for (std::size_t j = 0; j < n_avg; ++j) {
        const double e = rng.exponential(lambda_fade);
        xs[j] = 10.0 * std::log10(e);
        db_acc += xs[j];
        lin_acc += e;
      }
      visit(xs, db_acc / static_cast<double>(n_avg),
            10.0 * std::log10(lin_acc / static_cast<double>(n_avg)));
    }
  };

  double sum_single = 0.0, sum_db = 0.0, sum_lin = 0.0;
  for_each_window([&](const std::vector<double>& xs, double db_mean, double lin_mean) {
    for (double x : xs) sum_single += x;
    sum_db += db_mean;
    sum_lin += lin_mean;
  });
  const double n_single = static_cast<double>(draws * n_avg);
  const double n_windows = static_cast<double>(draws);
  const double mean_single = sum_single / n_single;
  const double mean_db = sum_db / n_windows;
  const double mean_lin = sum_lin / n_windows;

  double ss_single = 0.0, ss_db = 0.0, ss_lin = 0.0;
  for_each_window([&](const std::vector<double>& xs, double db_mean, double lin_mean) {
    for (double x : xs) ss_single += (x - mean_single) * (x - mean_single);
    ss_db += (db_mean - mean_db) * (db_mean - mean_db);
    ss_lin += (lin_mean - mean_lin) * (lin_mean - mean_lin);
  });

  AveragingResult result;
  result.single_std = std::sqrt(ss_single / (n_single - 1.0));
  result.averaged_db_std = std::sqrt(ss_db / (n_windows - 1.0));
  result.averaged_linear_std = std::sqrt(ss_lin / (n_windows - 1.0));
  return result;
}

}  // namespace zonedet
