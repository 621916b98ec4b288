// Times the OpenMP kernels against their serial reference implementations
// and checks that both produce identical output.

#include <chrono>
#include <cstdio>
#include <vector>

#include "zonedet/analytic.hpp"
#include "zonedet/common.hpp"
#include "zonedet/experiments.hpp"
#include "zonedet/placement.hpp"
#include "zonedet/propagation.hpp"

using namespace zonedet;

namespace {

template <typename F>
double time_ms(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

void report(const char* name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-24s serial %9.1f ms   parallel %9.1f ms   speedup %5.2fx   %s\n", name,
              serial_ms, parallel_ms, serial_ms / parallel_ms,
              identical ? "outputs identical" : "OUTPUTS DIFFER");
}

}  // namespace

int main() {
  const std::uint64_t seed = 42;

  {
    std::vector<Point> positions;
    for (int i = 0; i < 50; ++i) positions.push_back({i % 10 + 0.3, i / 10.0 + 0.7});
    const std::vector<Point> aps = {{0, 0}, {0, 10}, {10, 0}, {10, 10}};
    PropagationParams params;
    RssiDataset a, b;
    const double ts = time_ms([&] { a = generate_dataset(positions, aps, params, 2000, seed, Exec::serial); });
    const double tp = time_ms([&] { b = generate_dataset(positions, aps, params, 2000, seed, Exec::parallel); });
    report("generate_dataset", ts, tp, a.rssi == b.rssi && a.positions == b.positions);
  }

  {
    RateQuery query;
    query.aps = {{0, 0}, {0, 10}, {10, 0}};
    query.trusted = {5, 5};
    Polygon domain{{{-40, -40}, {40, -40}, {40, 40}, {-40, 40}}};
    DomainRateResult a{}, b{};
    const double ts = time_ms([&] { a = detection_rate_domain(query, domain, 200000, seed, Exec::serial); });
    const double tp = time_ms([&] { b = detection_rate_domain(query, domain, 200000, seed, Exec::parallel); });
    report("detection_rate_domain", ts, tp, a.rate == b.rate && a.std_error == b.std_error);
  }

  {
    PlacementProblem problem;
    for (int i = 0; i < 18; ++i) problem.ap_candidates.push_back({static_cast<double>(i), -1.0 - i * 0.1});
    for (int i = 0; i < 12; ++i) problem.area_candidates.push_back({i * 1.5, 5.0 + i * 0.2});
    problem.k = 4;
    problem.m = 3;
    problem.gate = {8.0, -6.0};
    std::vector<PlacementSolution> a, b;
    const double ts = time_ms([&] { a = optimize(problem, kDefaultMaxCombinations, Exec::serial); });
    const double tp = time_ms([&] { b = optimize(problem, kDefaultMaxCombinations, Exec::parallel); });
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i) {
      same = a[i].ap_indices == b[i].ap_indices && a[i].area_indices == b[i].area_indices &&
             a[i].objective == b[i].objective;
    }
    report("placement optimize", ts, tp, same);
  }

  {
    RateCurveConfig config;
    config.trials = 20000;
    std::vector<RateCurveRow> a, b;
    const double ts = time_ms([&] { a = run_rate_curve(config, seed, Exec::serial); });
    const double tp = time_ms([&] { b = run_rate_curve(config, seed, Exec::parallel); });
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i) {
      same = a[i].rate_mc_friis == b[i].rate_mc_friis &&
             a[i].rate_mc_rayleigh == b[i].rate_mc_rayleigh;
    }
    report("run_rate_curve", ts, tp, same);
  }

  return 0;
}
