#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "zonedet/common.hpp"
#include "zonedet/rng.hpp"

namespace zonedet {

enum class PropagationModel {
  friis_gaussian,        // log-distance path loss + Gaussian shadowing
  nonsingular_rayleigh,  // non-singular path loss + Rayleigh-type fading
};

struct PropagationParams {
  PropagationModel model = PropagationModel::friis_gaussian;
  double transmit_power_dbm = -30.0;
  double path_loss_exponent = 2.0;
  double sigma_db = 5.57;     // friis_gaussian only
  double epsilon = 0.1;       // nonsingular_rayleigh only
  double lambda_fade = 0.561; // nonsingular_rayleigh only

  void validate() const;
};

/// RSSI observations: one row per beacon instant, one column per AP, plus the
/// transmitter position each row was generated at.
struct RssiDataset {
  std::vector<Point> positions;  // size == rssi.rows()
  Matrix rssi;
};

/// Deterministic mean RSSI in dBm at distance ||t - a||.
/// friis_gaussian:       P_T - 10 eta lg d        (d > 0 required)
/// nonsingular_rayleigh: P_T - 10 lg(eps + d^eta)
double mean_rssi(Point t, Point a, const PropagationParams& p);

/// One stochastic RSSI draw: mean_rssi plus the model's fading term.
double sample_rssi(Point t, Point a, const PropagationParams& p, Rng& rng);

/// Density of the Rayleigh-type dB fading term:
/// f(x) = lambda 10^(x/10) exp(-lambda 10^(x/10)) ln(10)/10.
double fading_pdf(double x_db, double lambda_fade);

/// Exact draw from fading_pdf: 10 lg(E) with E ~ Exp(lambda_fade).
double sample_fading(double lambda_fade, Rng& rng);

/// trials independent beacon rows at every position (rows grouped by
/// position, trials consecutive rows each). Row r uses Rng substream r of
/// `seed`, so the result is independent of the execution policy.
RssiDataset generate_dataset(std::span<const Point> positions, std::span<const Point> aps,
                             const PropagationParams& p, std::size_t trials, std::uint64_t seed,
                             Exec exec = Exec::parallel);

}  // namespace zonedet
