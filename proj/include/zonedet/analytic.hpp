#pragma once

#include <cstddef>
#include <vector>

#include "zonedet/common.hpp"

namespace zonedet {

// Closed-form detection rates for the idealized detector that thresholds
// the squared norm of the standardized mean-RSSI vector. Under log-distance
// path loss with i.i.d. Gaussian shadowing of scale sigma on each of k
// anchor links, the standardized observation at a transmitter location t is
// non-centrally chi-squared distributed with k degrees of freedom and
// non-centrality lambda_t / sigma^2, where
//
//   lambda_t = sum_i (10 * eta * log10(d_in,i / d_t,i))^2
//
// and d_in,i / d_t,i are distances from the trusted location / from t to
// anchor i. The detection threshold delta is the (1 - nu) quantile of the
// central chi-squared distribution, so the false-alarm rate at the trusted
// location is exactly nu and the detection rate elsewhere is the Marcum Q
// tail Q_{k/2}(sqrt(lambda_t)/sigma, sqrt(delta)).

struct RateQuery {
  std::vector<Point> aps;
  Point trusted;
  double eta = 2.0;
  double sigma = 5.57;
  double nu = 0.1;
};

struct RateResult {
  double lambda = 0.0;  // non-centrality numerator (before /sigma^2)
  double delta = 0.0;   // chi-squared threshold
  double rate = 0.0;
};

struct DomainRateResult {
  double rate = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

// Raw non-centrality sum for a transmitter at t (no sigma scaling).
// Throws ValidationError if t or the trusted point coincides with an anchor.
double lambda_t(const std::vector<Point>& aps, Point trusted, Point t, double eta);

RateResult detection_rate_point(const RateQuery& query, Point t);

// Average detection rate over a polygonal region, estimated by uniform
// rejection sampling inside the polygon. Deterministic for a fixed seed
// regardless of execution policy. Sampled points that coincide exactly with
// an anchor are re-drawn.
DomainRateResult detection_rate_domain(const RateQuery& query, const Polygon& domain,
                                       std::size_t samples, std::uint64_t seed,
                                       Exec exec = Exec::parallel);

// The idealized detector itself: accepts (returns true) when the squared
// norm of the standardized observation is at most delta.
bool surrogate_classify(const std::vector<double>& standardized, double delta);

}  // namespace zonedet
