#include "zonedet/analytic.hpp"

#include <cmath>
#include <string>

#include "zonedet/rng.hpp"
#include "zonedet/special.hpp"

namespace zonedet {

namespace {

void validate_query(const RateQuery& query) {
  if (query.aps.empty()) throw ValidationError("detection rate: need at least one anchor");
  if (!(query.sigma > 0.0)) throw ValidationError("detection rate: sigma must be positive");
  if (!(query.nu > 0.0) || !(query.nu < 1.0)) {
    throw ValidationError("detection rate: nu must be in (0, 1)");
  }
  if (!(query.eta > 0.0)) throw ValidationError("detection rate: eta must be positive");
}

}  // namespace

double lambda_t(const std::vector<Point>& aps, Point trusted, Point t, double eta) {
  double sum = 0.0;
  for (const Point& ap : aps) {
    const double d_in = distance(trusted, ap);
    const double d_t = distance(t, ap);
    if (d_in <= 0.0) {
      throw ValidationError("lambda_t: trusted location coincides with an anchor");
    }
    if (d_t <= 0.0) throw ValidationError("lambda_t: query point coincides with an anchor");
    const double term = 10.0 * eta * std::log10(d_in / d_t);
    sum += term * term;
  }
  return sum;
}

RateResult detection_rate_point(const RateQuery& query, Point t) {
  validate_query(query);
  RateResult result;
  result.delta = chi2_quantile(1.0 - query.nu, static_cast<double>(query.aps.size()));
  result.lambda = lambda_t(query.aps, query.trusted, t, query.eta);
  if (result.lambda == 0.0) {
    // Central case: the acceptance probability is 1 - nu by construction.
    result.rate = query.nu;
    return result;
  }
  const double order = static_cast<double>(query.aps.size()) / 2.0;
  result.rate = marcum_q(order, std::sqrt(result.lambda) / query.sigma, std::sqrt(result.delta));
  return result;
}

DomainRateResult detection_rate_domain(const RateQuery& query, const Polygon& domain,
                                       std::size_t samples, std::uint64_t seed, Exec exec) {
  validate_query(query);
  validate_polygon(domain);
  if (samples == 0) throw ValidationError("detection_rate_domain: need at least one sample");

  const auto [lo, hi] = polygon_bbox(domain);
  const double delta = chi2_quantile(1.0 - query.nu, static_cast<double>(query.aps.size()));
  const double order = static_cast<double>(query.aps.size()) / 2.0;
  const double sqrt_delta = std::sqrt(delta);

  std::vector<double> rates(samples);
  auto fill = [&, lo = lo, hi = hi](std::size_t i) {
    Rng rng = Rng::substream(seed, i);
    Point p{};
    for (;;) {
      p.x = rng.uniform(lo.x, hi.x);
      p.y = rng.uniform(lo.y, hi.y);
      if (!polygon_contains(domain, p)) continue;
      bool on_anchor = false;
      for (const Point& ap : query.aps) {
        if (distance(p, ap) <= 0.0) {
          on_anchor = true;
          break;
        }
      }
      if (!on_anchor) break;
    }
    const double lam = lambda_t(query.aps, query.trusted, p, query.eta);
    rates[i] = lam == 0.0
                   ? query.nu
                   : marcum_q(order, std::sqrt(lam) / query.sigma, sqrt_delta);
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(samples); ++i) {
      fill(static_cast<std::size_t>(i));
    }
  } else {
    for (std::size_t i = 0; i < samples; ++i) fill(i);
  }

  double sum = 0.0;
  for (double r : rates) sum += r;
  const double mean = sum / static_cast<double>(samples);
  double ss = 0.0;
  for (double r : rates) {
    const double d = r - mean;
    ss += d * d;
  }
  DomainRateResult result;
  result.rate = mean;
  result.samples = samples;
  result.std_error = samples > 1
                         ? std::sqrt(ss / static_cast<double>(samples - 1) /
                                     static_cast<double>(samples))
                         : 0.0;
  return result;
}

bool surrogate_classify(const std::vector<double>& standardized, double delta) {
  double norm2 = 0.0;
  for (double v : standardized) norm2 += v * v;
  return norm2 <= delta;
}

}  // namespace zonedet
