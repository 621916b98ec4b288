#include <cstdlib>
#include <doctest.h>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "zonedet/common.hpp"
#include "zonedet/io.hpp"
#include "zonedet/ocsvm.hpp"
#include "zonedet/propagation.hpp"
#include "zonedet/rng.hpp"

using namespace zonedet;
namespace fs = std::filesystem;

namespace {

fs::path workspace(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "zonedet_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> cells_of(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  return cells;
}

const char* cli_path() {
#ifdef ZONEDET_CLI_PATH
  return ZONEDET_CLI_PATH;
#else
  const char* cli = std::getenv("ZONEDET_CLI_PATH");
  REQUIRE_MESSAGE(cli != nullptr, "ZONEDET_CLI_PATH must point at the CLI binary");
  return cli;
#endif
}

int run_cli(const std::string& args, const fs::path& stdout_to = {}) {
  std::string cmd = std::string(cli_path()) + " " + args;
  if (stdout_to.empty()) {
    cmd += " >/dev/null 2>&1";
  } else {
    cmd += " >" + stdout_to.string() + " 2>&1";
  }
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

StoreLayout demo_layout() {
  StoreLayout layout;
  layout.problem.ap_candidates = {{0.0, 0.0}, {0.0, 10.0}, {10.0, 0.0}};
  layout.problem.area_candidates = {{5.0, 5.0}, {20.0, 20.0}};
  layout.problem.gate = {6.0, 0.0};
  layout.problem.k = 3;
  layout.problem.m = 1;
  layout.problem.eta = 2.0;
  Polygon outside;
  outside.vertices = {{-3.0, -6.0}, {15.0, -6.0}, {15.0, -0.5}, {-3.0, -0.5}};
  layout.outside = outside;
  return layout;
}

double fraction_with_verdict(const fs::path& verdicts_csv, const std::string& verdict) {
  const auto lines = lines_of(read_file(verdicts_csv));
  REQUIRE(lines.size() > 1);
  std::size_t hits = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = cells_of(lines[i]);
    REQUIRE(cells.size() == 3);
    if (cells[2] == verdict) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(lines.size() - 1);
}

}  // namespace

TEST_CASE("fixed formatting") {
  CHECK(format_fixed(1.0 / 3.0) == "0.333333");
  CHECK(format_fixed(-51.5) == "-51.500000");
  CHECK(format_fixed(0.0) == "0.000000");
}

TEST_CASE("dataset CSV round trip") {
  const fs::path dir = workspace("dataset_roundtrip");
  RssiDataset dataset;
  dataset.positions = {{1.25, -3.5}, {0.1, 0.2}};
  dataset.rssi = Matrix(2, 3);
  dataset.rssi(0, 0) = -51.123456789;
  dataset.rssi(0, 1) = -60.0;
  dataset.rssi(0, 2) = -45.654321;
  dataset.rssi(1, 0) = -70.9999999;
  dataset.rssi(1, 1) = -55.5;
  dataset.rssi(1, 2) = -48.0;

  const fs::path path = dir / "data.csv";
  write_dataset_csv(path.string(), dataset);

  const auto lines = lines_of(read_file(path));
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "pos_x,pos_y,ap_1,ap_2,ap_3");

  const RssiDataset back = read_dataset_csv(path.string());
  REQUIRE(back.positions.size() == 2);
  REQUIRE(back.rssi.rows() == 2);
  REQUIRE(back.rssi.cols() == 3);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(std::abs(back.positions[i].x - dataset.positions[i].x) <= 5e-7);
    CHECK(std::abs(back.positions[i].y - dataset.positions[i].y) <= 5e-7);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(back.rssi(i, j) - dataset.rssi(i, j)) <= 5e-7);
    }
  }
}

TEST_CASE("dataset CSV read errors") {
  const fs::path dir = workspace("dataset_errors");
  CHECK_THROWS_AS(read_dataset_csv((dir / "missing.csv").string()), IoError);

  const fs::path bad_header = dir / "bad_header.csv";
  write_file(bad_header, "x,y,ap_1\n1,2,3\n");
  CHECK_THROWS_AS(read_dataset_csv(bad_header.string()), IoError);

  const fs::path bad_cell = dir / "bad_cell.csv";
  write_file(bad_cell, "pos_x,pos_y,ap_1\n1.0,2.0,oops\n");
  CHECK_THROWS_AS(read_dataset_csv(bad_cell.string()), IoError);

  const fs::path nan_cell = dir / "nan_cell.csv";
  write_file(nan_cell, "pos_x,pos_y,ap_1\n1.0,2.0,nan\n");
  CHECK_THROWS_AS(read_dataset_csv(nan_cell.string()), IoError);

  const fs::path ragged = dir / "ragged.csv";
  write_file(ragged, "pos_x,pos_y,ap_1\n1.0,2.0,-50.0\n1.0,2.0\n");
  CHECK_THROWS_AS(read_dataset_csv(ragged.string()), IoError);

  const fs::path crlf = dir / "crlf.csv";
  write_file(crlf, "pos_x,pos_y,ap_1\r\n1.0,2.0,-50.0\r\n");
  const RssiDataset ok = read_dataset_csv(crlf.string());
  CHECK(ok.rssi.rows() == 1);
  CHECK(ok.rssi(0, 0) == -50.0);
}

TEST_CASE("model JSON round trip is exact") {
  const fs::path dir = workspace("model_roundtrip");
  TrainedModel trained;
  trained.model.support_vectors = Matrix(2, 2);
  trained.model.support_vectors(0, 0) = 0.123456789012345;
  trained.model.support_vectors(0, 1) = -1.5;
  trained.model.support_vectors(1, 0) = 2.0 / 3.0;
  trained.model.support_vectors(1, 1) = 1e-14;
  trained.model.alphas = {0.25, 0.75};
  trained.model.rho = 0.31415926535;
  trained.model.gamma = 0.5;
  trained.model.nu = 0.1;
  trained.standardizer.mean = {-52.25, -60.125};
  trained.standardizer.std = {5.57, 3.25};

  const fs::path path = dir / "model.json";
  write_model_json(path.string(), trained);
  const TrainedModel back = read_model_json(path.string());
  CHECK(back.model.support_vectors == trained.model.support_vectors);
  CHECK(back.model.alphas == trained.model.alphas);
  CHECK(back.model.rho == trained.model.rho);
  CHECK(back.model.gamma == trained.model.gamma);
  CHECK(back.model.nu == trained.model.nu);
  CHECK(back.standardizer.mean == trained.standardizer.mean);
  CHECK(back.standardizer.std == trained.standardizer.std);

  CHECK_THROWS_AS(read_model_json((dir / "missing.json").string()), IoError);
  const fs::path corrupt = dir / "corrupt.json";
  write_file(corrupt, "{not json");
  CHECK_THROWS_AS(read_model_json(corrupt.string()), IoError);
  const fs::path mismatched = dir / "mismatched.json";
  write_file(mismatched,
             "{\"gamma\":0.5,\"nu\":0.1,\"rho\":0.2,\"support_vectors\":[[1.0,2.0]],"
             "\"alphas\":[0.5,0.5],\"standardizer\":{\"mean\":[0.0,0.0],\"std\":[1.0,1.0]}}");
  CHECK_THROWS_AS(read_model_json(mismatched.string()), IoError);
}

TEST_CASE("layout JSON round trip is exact") {
  const fs::path dir = workspace("layout_roundtrip");
  const StoreLayout layout = demo_layout();
  const fs::path path = dir / "layout.json";
  write_layout_json(path.string(), layout);
  const StoreLayout back = read_layout_json(path.string());
  CHECK(back.problem.ap_candidates == layout.problem.ap_candidates);
  CHECK(back.problem.area_candidates == layout.problem.area_candidates);
  CHECK(back.problem.gate == layout.problem.gate);
  CHECK(back.problem.k == layout.problem.k);
  CHECK(back.problem.m == layout.problem.m);
  CHECK(back.problem.eta == layout.problem.eta);
  REQUIRE(back.outside.has_value());
  CHECK(back.outside->vertices == layout.outside->vertices);

  StoreLayout no_outside = layout;
  no_outside.outside.reset();
  const fs::path path2 = dir / "layout2.json";
  write_layout_json(path2.string(), no_outside);
  CHECK(!read_layout_json(path2.string()).outside.has_value());
}

TEST_CASE("csv schema self-check") {
  const fs::path dir = workspace("schema_check");
  const fs::path good = dir / "good.csv";
  write_file(good, "rank,ap_indices,area_indices,objective\n1,0;2,1,0.520000\n");
  CHECK_NOTHROW(check_csv_schema(good.string(), "rank,ap_indices,area_indices,objective"));
  CHECK_THROWS_AS(check_csv_schema(good.string(), "rank,objective"), IoError);

  const fs::path bad = dir / "bad.csv";
  write_file(bad, "rank,ap_indices,area_indices,objective\n1,0;x,1,0.5\n");
  CHECK_THROWS_AS(check_csv_schema(bad.string(), "rank,ap_indices,area_indices,objective"),
                  IoError);
  CHECK_THROWS_AS(check_csv_schema((dir / "missing.csv").string(), "a,b"), IoError);
}

TEST_CASE("cli simulate, train, detect round trip") {
  const fs::path dir = workspace("cli_roundtrip");
  const fs::path layout = dir / "layout.json";
  write_layout_json(layout.string(), demo_layout());

  CHECK(run_cli("simulate --layout " + layout.string() + " --out " + (dir / "train.csv").string() +
                " --seed 11 --trials 400 --area 0 --self-check") == 0);
  CHECK(run_cli("simulate --layout " + layout.string() + " --out " + (dir / "t_in.csv").string() +
                " --seed 12 --trials 200 --area 0") == 0);
  CHECK(run_cli("simulate --layout " + layout.string() + " --out " + (dir / "t_out.csv").string() +
                " --seed 13 --trials 200 --area 1") == 0);

  // Same seed, same bytes; different seed, different bytes.
  CHECK(run_cli("simulate --layout " + layout.string() + " --out " + (dir / "again.csv").string() +
                " --seed 11 --trials 400 --area 0") == 0);
  CHECK(read_file(dir / "again.csv") == read_file(dir / "train.csv"));
  CHECK(read_file(dir / "t_in.csv") != read_file(dir / "train.csv"));

  CHECK(run_cli("train --train " + (dir / "train.csv").string() + " --out " +
                (dir / "model.json").string() + " --nu 0.1") == 0);

  CHECK(run_cli("detect --model " + (dir / "model.json").string() + " --test " +
                (dir / "t_in.csv").string() + " --out " + (dir / "v_in.csv").string()) == 0);
  CHECK(run_cli("detect --model " + (dir / "model.json").string() + " --test " +
                (dir / "t_out.csv").string() + " --out " + (dir / "v_out.csv").string()) == 0);

  // At the trusted area roughly 1 - nu of the windows pass; far away most
  // are flagged.
  CHECK(fraction_with_verdict(dir / "v_in.csv", "target") >= 0.82);
  CHECK(fraction_with_verdict(dir / "v_out.csv", "non_target") >= 0.6);

  const auto lines = lines_of(read_file(dir / "v_in.csv"));
  CHECK(lines[0] == "window,decision_value,verdict");
  CHECK(lines.size() == 201);
}

TEST_CASE("cli detect accepts an empty test set") {
  const fs::path dir = workspace("cli_empty_detect");
  const fs::path layout = dir / "layout.json";
  write_layout_json(layout.string(), demo_layout());
  CHECK(run_cli("simulate --layout " + layout.string() + " --out " + (dir / "train.csv").string() +
                " --seed 1 --trials 200 --area 0") == 0);
  CHECK(run_cli("train --train " + (dir / "train.csv").string() + " --out " +
                (dir / "model.json").string()) == 0);

  write_file(dir / "empty.csv", "pos_x,pos_y,ap_1,ap_2,ap_3\n");
  CHECK(run_cli("detect --model " + (dir / "model.json").string() + " --test " +
                (dir / "empty.csv").string() + " --out " + (dir / "v.csv").string()) == 0);
  CHECK(read_file(dir / "v.csv") == "window,decision_value,verdict\n");
}

TEST_CASE("cli exit codes") {
  const fs::path dir = workspace("cli_exit_codes");
  const fs::path layout = dir / "layout.json";
  write_layout_json(layout.string(), demo_layout());

  // IO failure: layout file does not exist.
  CHECK(run_cli("simulate --layout " + (dir / "nope.json").string() + " --out " +
                (dir / "x.csv").string() + " --seed 1 --area 0") == 2);
  // CLI parse failure: unknown flag.
  CHECK(run_cli("simulate --bogus") == 1);
  // Validation failure: no positions requested.
  CHECK(run_cli("simulate --layout " + layout.string() + " --out " + (dir / "x.csv").string() +
                " --seed 1") == 1);

  CHECK(run_cli("simulate --layout " + layout.string() + " --out " + (dir / "train.csv").string() +
                " --seed 2 --trials 200 --area 0") == 0);
  CHECK(run_cli("train --train " + (dir / "train.csv").string() + " --out " +
                (dir / "model.json").string()) == 0);

  // Validation failure: AP column count mismatch.
  write_file(dir / "two_ap.csv", "pos_x,pos_y,ap_1,ap_2\n5.0,5.0,-50.0,-60.0\n");
  CHECK(run_cli("detect --model " + (dir / "model.json").string() + " --test " +
                (dir / "two_ap.csv").string() + " --out " + (dir / "v.csv").string()) == 1);

  // IO failure: corrupt model JSON.
  write_file(dir / "corrupt.json", "{oops");
  CHECK(run_cli("detect --model " + (dir / "corrupt.json").string() + " --test " +
                (dir / "train.csv").string() + " --out " + (dir / "v.csv").string()) == 2);

  // Validation failure: nu * s < 1 after windowing.
  CHECK(run_cli("simulate --layout " + layout.string() + " --out " + (dir / "tiny.csv").string() +
                " --seed 3 --trials 5 --area 0") == 0);
  CHECK(run_cli("train --train " + (dir / "tiny.csv").string() + " --out " +
                (dir / "m2.json").string() + " --nu 0.1") == 1);
}

TEST_CASE("cli rate point and domain modes") {
  const fs::path dir = workspace("cli_rate");
  const fs::path layout = dir / "layout.json";
  write_layout_json(layout.string(), demo_layout());

  CHECK(run_cli("rate --layout " + layout.string() + " --area 0 --at 5,5 --out " +
                (dir / "r.csv").string() + " --self-check") == 0);
  auto lines = lines_of(read_file(dir / "r.csv"));
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "t_x,t_y,distance,lambda_t,delta,rate");
  auto cells = cells_of(lines[1]);
  REQUIRE(cells.size() == 6);
  CHECK(cells[3] == "0.000000");  // lambda at the trusted point
  CHECK(cells[4] == "6.251389");  // chi-squared threshold, k=3, nu=0.1
  CHECK(cells[5] == "0.100000");  // rate == nu exactly

  // Explicit anchors: equidistant probe also scores exactly nu.
  CHECK(run_cli("rate --ap 0,0 --tin 3,4 --at 5,0 --out " + (dir / "r2.csv").string()) == 0);
  lines = lines_of(read_file(dir / "r2.csv"));
  CHECK(cells_of(lines[1])[5] == "0.100000");

  CHECK(run_cli("rate --layout " + layout.string() + " --area 0 --domain --samples 2000 "
                "--seed 9 --out " +
                (dir / "d.csv").string() + " --self-check") == 0);
  lines = lines_of(read_file(dir / "d.csv"));
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "rate,std_error,samples");
  cells = cells_of(lines[1]);
  CHECK(cells[2] == "2000");
  const double rate = std::stod(cells[0]);
  CHECK(rate > 0.0);
  CHECK(rate < 1.0);

  // Probe list required outside --domain mode.
  CHECK(run_cli("rate --layout " + layout.string() + " --area 0 --out " +
                (dir / "r3.csv").string()) == 1);
}

TEST_CASE("cli optimize with ranking validation") {
  const fs::path dir = workspace("cli_optimize");

  StoreLayout single = demo_layout();
  const fs::path single_path = dir / "single.json";
  write_layout_json(single_path.string(), single);
  CHECK(run_cli("optimize --layout " + single_path.string() + " --out " +
                (dir / "rank1.csv").string() + " --self-check") == 0);
  auto lines = lines_of(read_file(dir / "rank1.csv"));
  REQUIRE(lines.size() == 3);  // header + C(3,3)*C(2,1) = 2 solutions
  CHECK(lines[0] == "rank,ap_indices,area_indices,objective");
  CHECK(cells_of(lines[1])[0] == "1");
  CHECK(cells_of(lines[1])[1] == "0;1;2");
  CHECK(cells_of(lines[2])[0] == "2");

  StoreLayout multi = demo_layout();
  multi.problem.k = 2;
  multi.problem.area_candidates = {{5.0, 5.0}, {2.0, 7.0}};
  const fs::path multi_path = dir / "multi.json";
  write_layout_json(multi_path.string(), multi);
  const fs::path stdout_file = dir / "stdout.txt";
  CHECK(run_cli("optimize --layout " + multi_path.string() + " --out " +
                (dir / "rank2.csv").string() + " --validate analytic", stdout_file) == 0);
  const std::string console = read_file(stdout_file);
  CHECK(console.find("validation mode=analytic r=1.000000") != std::string::npos);

  // Guard on the combination count.
  CHECK(run_cli("optimize --layout " + multi_path.string() + " --out " +
                (dir / "rank3.csv").string() + " --max-combos 2") == 1);
  // Monte-Carlo validation needs a seed.
  CHECK(run_cli("optimize --layout " + multi_path.string() + " --out " +
                (dir / "rank4.csv").string() + " --validate mc --trials 150") == 1);
}

TEST_CASE("cli eval end to end") {
  const fs::path dir = workspace("cli_eval");
  const fs::path layout = dir / "layout.json";
  write_layout_json(layout.string(), demo_layout());

  CHECK(run_cli("simulate --layout " + layout.string() + " --out " + (dir / "t1.csv").string() +
                " --seed 21 --trials 150 --area 0") == 0);
  CHECK(run_cli("simulate --layout " + layout.string() + " --out " + (dir / "t2.csv").string() +
                " --seed 22 --trials 150 --area 0") == 0);
  CHECK(run_cli("simulate --layout " + layout.string() + " --out " + (dir / "n1.csv").string() +
                " --seed 23 --trials 150 --area 1") == 0);
  CHECK(run_cli("simulate --layout " + layout.string() + " --out " + (dir / "n2.csv").string() +
                " --seed 24 --trials 100 --outside 1") == 0);

  std::ostringstream manifest;
  manifest << "{\"target_sets\":[\"" << (dir / "t1.csv").string() << "\",\""
           << (dir / "t2.csv").string() << "\"],\"negative_sets\":{\"other\":[\""
           << (dir / "n1.csv").string() << "\"],\"outside\":[\"" << (dir / "n2.csv").string()
           << "\"]}}";
  write_file(dir / "manifest.json", manifest.str());

  CHECK(run_cli("eval --manifest " + (dir / "manifest.json").string() + " --out " +
                (dir / "report.json").string() + " --per-fold " + (dir / "folds.csv").string()) ==
        0);

  const std::string report = read_file(dir / "report.json");
  CHECK(report.find("\"f_measure\"") != std::string::npos);
  CHECK(report.find("\"detection_rate\"") != std::string::npos);
  CHECK(report.find("\"outside\"") != std::string::npos);

  const auto folds = lines_of(read_file(dir / "folds.csv"));
  REQUIRE(folds.size() == 3);  // header + 2 folds
  CHECK(folds[0] == "fold,tp,fp,fn,tn,precision,recall,f_measure,detection_rate");

  // Manifest schema violations are IO errors.
  write_file(dir / "bad_manifest.json", "{\"target_sets\":{}}");
  CHECK(run_cli("eval --manifest " + (dir / "bad_manifest.json").string()) == 2);
}

TEST_CASE("cli experiment commands") {
  const fs::path dir = workspace("cli_experiments");

  const std::string fig3_args = "experiment fig3 --seed 3 --out " + (dir / "curve.csv").string() +
                                " --trials 50 --self-check";
  CHECK(run_cli(fig3_args) == 0);
  const auto curve = lines_of(read_file(dir / "curve.csv"));
  REQUIRE(curve.size() == 21);
  CHECK(curve[0] ==
        "distance,lambda_t,rate_analytic,rate_mc_friis,rate_mc_rayleigh,se_friis,se_rayleigh");

  const fs::path companion = dir / "curve_by_lambda.csv";
  REQUIRE(fs::exists(companion));
  const auto by_lambda = lines_of(read_file(companion));
  REQUIRE(by_lambda.size() == 21);
  double prev = -1.0;
  for (std::size_t i = 1; i < by_lambda.size(); ++i) {
    const double lam = std::stod(cells_of(by_lambda[i])[1]);
    CHECK(lam >= prev);
    prev = lam;
  }

  // Byte-identical rerun of a stochastic command with the same seed.
  const std::string rerun_args = "experiment fig3 --seed 3 --out " +
                                 (dir / "curve_rerun.csv").string() + " --trials 50";
  CHECK(run_cli(rerun_args) == 0);
  CHECK(read_file(dir / "curve_rerun.csv") == read_file(dir / "curve.csv"));

  CHECK(run_cli("experiment fig2 --seed 4 --out " + (dir / "avg.csv").string() +
                " --draws 10000 --self-check") == 0);
  const auto avg = lines_of(read_file(dir / "avg.csv"));
  REQUIRE(avg.size() == 2);
  CHECK(avg[0] == "lambda_fade,n_avg,draws,single_std,averaged_db_std,averaged_linear_std");
  const auto cells = cells_of(avg[1]);
  CHECK(cells[1] == "5");
  CHECK(cells[2] == "10000");
  const double single_std = std::stod(cells[3]);
  CHECK(single_std > 5.3);
  CHECK(single_std < 5.9);
}
