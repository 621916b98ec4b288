#include "zonedet/propagation.hpp"

#include <cmath>
#include <cstdint>
#include <string>

namespace zonedet {

void PropagationParams::validate() const {
  if (!std::isfinite(transmit_power_dbm)) throw ValidationError("transmit power must be finite");
  if (!(path_loss_exponent > 0.0)) throw ValidationError("path loss exponent must be > 0");
  if (model == PropagationModel::friis_gaussian) {
    if (!(sigma_db >= 0.0)) throw ValidationError("sigma must be >= 0");
  } else {
    if (!(epsilon > 0.0)) throw ValidationError("epsilon must be > 0");
    if (!(lambda_fade > 0.0)) throw ValidationError("lambda_fade must be > 0");
  }
}

double mean_rssi(Point t, Point a, const PropagationParams& p) {
  p.validate();
  const double d = distance(t, a);
  if (p.model == PropagationModel::friis_gaussian) {
    if (d <= 0.0) {
      throw ValidationError("mean_rssi: transmitter coincides with AP (log-distance singularity)");
    }
    return p.transmit_power_dbm - 10.0 * p.path_loss_exponent * std::log10(d);
  }
  return p.transmit_power_dbm - 10.0 * std::log10(p.epsilon + std::pow(d, p.path_loss_exponent));
}

double sample_rssi(Point t, Point a, const PropagationParams& p, Rng& rng) {
  const double mean = mean_rssi(t, a, p);
  if (p.model == PropagationModel::friis_gaussian) {
    return p.sigma_db == 0.0 ? mean : mean + rng.normal(0.0, p.sigma_db);
  }
  return mean + sample_fading(p.lambda_fade, rng);
}

double fading_pdf(double x_db, double lambda_fade) {
  if (!(lambda_fade > 0.0)) throw ValidationError("fading_pdf requires lambda_fade > 0");
  const double u = std::pow(10.0, x_db / 10.0);
  return lambda_fade * u * std::exp(-lambda_fade * u) * std::numbers::ln10 / 10.0;
}

double sample_fading(double lambda_fade, Rng& rng) {
  if (!(lambda_fade > 0.0)) throw ValidationError("sample_fading requires lambda_fade > 0");
  return 10.0 * std::log10(rng.exponential(lambda_fade));
}

RssiDataset generate_dataset(std::span<const Point> positions, std::span<const Point> aps,
                             const PropagationParams& p, std::size_t trials, std::uint64_t seed,
                             Exec exec) {
  if (positions.empty()) throw ValidationError("generate_dataset: no positions");
  if (aps.empty()) throw ValidationError("generate_dataset: no APs");
  if (trials == 0) throw ValidationError("generate_dataset: trials must be >= 1");

  // Precompute the deterministic means; validates params and any
  // position/AP coincidence before entering the parallel region.
  const std::size_t k = aps.size();
  Matrix means(positions.size(), k);
  for (std::size_t pi = 0; pi < positions.size(); ++pi) {
    for (std::size_t ai = 0; ai < k; ++ai) {
      means(pi, ai) = mean_rssi(positions[pi], aps[ai], p);
    }
  }

  const std::size_t total = positions.size() * trials;
  RssiDataset out;
  out.positions.resize(total);
  out.rssi = Matrix(total, k);

  const bool gaussian = p.model == PropagationModel::friis_gaussian;
  auto fill_row = [&](std::size_t r) {
    const std::size_t pi = r / trials;
    Rng rng = Rng::substream(seed, r);
    out.positions[r] = positions[pi];
    for (std::size_t ai = 0; ai < k; ++ai) {
      const double noise = gaussian ? (p.sigma_db == 0.0 ? 0.0 : rng.normal(0.0, p.sigma_db))
                                    : sample_fading(p.lambda_fade, rng);
      out.rssi(r, ai) = means(pi, ai) + noise;
    }
  };

  if (exec == Exec::serial) {
    for (std::size_t r = 0; r < total; ++r) fill_row(r);
  } else {
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(total); ++r) {
      fill_row(static_cast<std::size_t>(r));
    }
  }
  return out;
}

}  // namespace zonedet
