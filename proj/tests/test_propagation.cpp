#include <cmath>
#include <vector>

#include <doctest.h>

#include "zonedet/propagation.hpp"

using namespace zonedet;

namespace {

PropagationParams friis_params() {
  PropagationParams p;
  p.model = PropagationModel::friis_gaussian;
  return p;
}

PropagationParams rayleigh_params() {
  PropagationParams p;
  p.model = PropagationModel::nonsingular_rayleigh;
  return p;
}

}  // namespace

TEST_CASE("mean RSSI, log-distance model") {
  PropagationParams p = friis_params();
  CHECK(mean_rssi({10.0, 0.0}, {0.0, 0.0}, p) == doctest::Approx(-50.0).epsilon(1e-12));
  CHECK(mean_rssi({1.0, 0.0}, {0.0, 0.0}, p) == doctest::Approx(-30.0).epsilon(1e-12));
  p.path_loss_exponent = 4.0;
  CHECK(mean_rssi({10.0, 0.0}, {0.0, 0.0}, p) == doctest::Approx(-70.0).epsilon(1e-12));
  CHECK_THROWS_AS(mean_rssi({0.0, 0.0}, {0.0, 0.0}, friis_params()), ValidationError);
}

TEST_CASE("mean RSSI, non-singular model") {
  PropagationParams p = rayleigh_params();
  // P_T - 10 lg(eps + d^eta)
  CHECK(mean_rssi({10.0, 0.0}, {0.0, 0.0}, p) ==
        doctest::Approx(-30.0 - 10.0 * std::log10(0.1 + 100.0)).epsilon(1e-12));
  // finite at the anchor itself
  CHECK(mean_rssi({0.0, 0.0}, {0.0, 0.0}, p) ==
        doctest::Approx(-30.0 - 10.0 * std::log10(0.1)).epsilon(1e-12));
  SUBCASE("epsilon -> 0 recovers the log-distance value") {
    p.epsilon = 1e-12;
    CHECK(mean_rssi({7.0, 3.0}, {1.0, 1.0}, p) ==
          doctest::Approx(mean_rssi({7.0, 3.0}, {1.0, 1.0}, friis_params())).epsilon(1e-12));
    CHECK_THROWS_AS(mean_rssi({7.0, 3.0}, {1.0, 1.0},
                              [&] { auto bad = p; bad.epsilon = 0.0; return bad; }()),
                    ValidationError);
  }
}

TEST_CASE("mean RSSI decreases with distance") {
  for (PropagationParams p : {friis_params(), rayleigh_params()}) {
    double prev = 1e9;
    for (double d = 0.5; d < 60.0; d += 0.5) {
      const double v = mean_rssi({d, 0.0}, {0.0, 0.0}, p);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("zero-sigma sampling is deterministic and draw-free") {
  PropagationParams p = friis_params();
  p.sigma_db = 0.0;
  Rng a(5), b(5);
  const double v = sample_rssi({3.0, 4.0}, {0.0, 0.0}, p, a);
  CHECK(v == mean_rssi({3.0, 4.0}, {0.0, 0.0}, p));
  CHECK(a.uniform() == b.uniform());  // no draws were consumed
}

TEST_CASE("Gaussian shadowing statistics") {
  PropagationParams p = friis_params();
  const std::size_t n = 20000;
  Rng rng(77);
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = sample_rssi({10.0, 0.0}, {0.0, 0.0}, p, rng);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::fabs(mean - (-50.0)) < 4.0 * p.sigma_db / std::sqrt(double(n)));
  CHECK(sd == doctest::Approx(p.sigma_db).epsilon(0.03));
}

TEST_CASE("fading density") {
  CHECK(fading_pdf(0.0, 0.561) == doctest::Approx(0.0737122).epsilon(1e-4));
  SUBCASE("integrates to 1") {
    double acc = 0.0;
    const double h = 0.01;
    for (double x = -80.0; x < 40.0; x += h) {
      acc += h * 0.5 * (fading_pdf(x, 0.561) + fading_pdf(x + h, 0.561));
    }
    CHECK(acc == doctest::Approx(1.0).epsilon(1e-4));
  }
  CHECK_THROWS_AS(fading_pdf(0.0, 0.0), ValidationError);
}

TEST_CASE("fading draws match the density") {
  const double lambda = 0.561;
  const std::size_t n = 200000;
  Rng rng(123);
  std::vector<double> draws(n);
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    draws[i] = sample_fading(lambda, rng);
    sum += draws[i];
    sq += draws[i] * draws[i];
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::fabs(mean) < 0.05);
  CHECK(sd == doctest::Approx(5.57).epsilon(0.01));

  // 1-dB-bin histogram against the density, 3 binomial SEs plus slack for
  // the within-bin density variation.
  for (double lo = -14.0; lo < 8.0; lo += 1.0) {
    std::size_t count = 0;
    for (double d : draws) {
      if (d >= lo && d < lo + 1.0) ++count;
    }
    const double p_mid = fading_pdf(lo + 0.5, lambda);
    const double observed = static_cast<double>(count) / static_cast<double>(n);
    const double se = std::sqrt(p_mid * (1.0 - p_mid) / static_cast<double>(n));
    CHECK(std::fabs(observed - p_mid) < 3.0 * se + 2e-3);
  }
}

TEST_CASE("dataset generation") {
  const std::vector<Point> positions = {{2.0, 3.0}, {8.0, 1.0}};
  const std::vector<Point> aps = {{0.0, 0.0}, {0.0, 10.0}, {10.0, 0.0}};
  PropagationParams p = friis_params();

  SUBCASE("shape and grouping") {
    const RssiDataset d = generate_dataset(positions, aps, p, 50, 9);
    REQUIRE(d.rssi.rows() == 100);
    REQUIRE(d.rssi.cols() == 3);
    REQUIRE(d.positions.size() == 100);
    for (std::size_t r = 0; r < 50; ++r) CHECK(d.positions[r] == positions[0]);
    for (std::size_t r = 50; r < 100; ++r) CHECK(d.positions[r] == positions[1]);
  }
  SUBCASE("reproducible per seed") {
    const RssiDataset a = generate_dataset(positions, aps, p, 20, 42);
    const RssiDataset b = generate_dataset(positions, aps, p, 20, 42);
    const RssiDataset c = generate_dataset(positions, aps, p, 20, 43);
    CHECK(a.rssi == b.rssi);
    CHECK(a.rssi != c.rssi);
  }
  SUBCASE("rows have the expected mean per anchor") {
    const RssiDataset d = generate_dataset({&positions[0], 1}, aps, p, 20000, 4);
    for (std::size_t c = 0; c < aps.size(); ++c) {
      double sum = 0.0;
      for (std::size_t r = 0; r < d.rssi.rows(); ++r) sum += d.rssi(r, c);
      const double expect = mean_rssi(positions[0], aps[c], p);
      CHECK(std::fabs(sum / static_cast<double>(d.rssi.rows()) - expect) <
            4.0 * p.sigma_db / std::sqrt(20000.0));
    }
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(generate_dataset({}, aps, p, 10, 1), ValidationError);
    CHECK_THROWS_AS(generate_dataset(positions, {}, p, 10, 1), ValidationError);
    CHECK_THROWS_AS(generate_dataset(positions, aps, p, 0, 1), ValidationError);
    CHECK_THROWS_AS(generate_dataset({&aps[0], 1}, aps, p, 10, 1), ValidationError);
    PropagationParams bad = p;
    bad.sigma_db = -1.0;
    CHECK_THROWS_AS(generate_dataset(positions, aps, bad, 10, 1), ValidationError);
  }
  SUBCASE("rayleigh model also generates") {
    const RssiDataset d = generate_dataset(positions, aps, rayleigh_params(), 30, 5);
    CHECK(d.rssi.rows() == 60);
    for (std::size_t r = 0; r < d.rssi.rows(); ++r) {
      for (std::size_t c = 0; c < d.rssi.cols(); ++c) CHECK(std::isfinite(d.rssi(r, c)));
    }
  }
}
