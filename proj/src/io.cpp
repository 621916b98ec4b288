#include "zonedet/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace zonedet {

using nlohmann::json;

std::string format_fixed(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, const std::string& path, std::size_t line_no) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  while (ptr != end && (*ptr == ' ' || *ptr == '\t' || *ptr == '\r')) ++ptr;
  if (ec != std::errc() || ptr != end) {
    throw IoError(path + ":" + std::to_string(line_no) + ": cannot parse '" + cell +
                  "' as a number");
  }
  if (!std::isfinite(value)) {
    throw IoError(path + ":" + std::to_string(line_no) + ": non-finite value '" + cell + "'");
  }
  return value;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

json load_json(const std::string& path) {
  std::ifstream in = open_input(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError(path + ": invalid JSON: " + e.what());
  }
  return j;
}

void store_json(const std::string& path, const json& j) {
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

Point parse_point(const json& j, const std::string& what, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw IoError(path + ": " + what + " must be a [x, y] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Point> parse_points(const json& j, const std::string& what,
                                const std::string& path) {
  if (!j.is_array()) throw IoError(path + ": " + what + " must be an array of [x, y] pairs");
  std::vector<Point> points;
  points.reserve(j.size());
  for (const json& e : j) points.push_back(parse_point(e, what + " entry", path));
  return points;
}

const json& require(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw IoError(path + ": missing required field '" + key + "'");
  return *it;
}

std::vector<double> parse_doubles(const json& j, const std::string& what,
                                  const std::string& path) {
  if (!j.is_array()) throw IoError(path + ": " + what + " must be a numeric array");
  std::vector<double> values;
  values.reserve(j.size());
  for (const json& e : j) {
    if (!e.is_number()) throw IoError(path + ": " + what + " must be a numeric array");
    values.push_back(e.get<double>());
  }
  return values;
}

}  // namespace

void write_dataset_csv(const std::string& path, const RssiDataset& dataset) {
  if (dataset.positions.size() != dataset.rssi.rows()) {
    throw ValidationError("write_dataset_csv: position count does not match row count");
  }
  std::ofstream out = open_output(path);
  out << "pos_x,pos_y";
  for (std::size_t c = 0; c < dataset.rssi.cols(); ++c) out << ",ap_" << (c + 1);
  out << '\n';
  for (std::size_t r = 0; r < dataset.rssi.rows(); ++r) {
    out << format_fixed(dataset.positions[r].x) << ',' << format_fixed(dataset.positions[r].y);
    for (std::size_t c = 0; c < dataset.rssi.cols(); ++c) {
      out << ',' << format_fixed(dataset.rssi(r, c));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

RssiDataset read_dataset_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file, expected a header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "pos_x" || header[1] != "pos_y") {
    throw IoError(path + ": header must start with pos_x,pos_y,ap_1,...");
  }
  const std::size_t k = header.size() - 2;
  for (std::size_t c = 0; c < k; ++c) {
    if (header[c + 2] != "ap_" + std::to_string(c + 1)) {
      throw IoError(path + ": expected header column 'ap_" + std::to_string(c + 1) + "', got '" +
                    header[c + 2] + "'");
    }
  }

  std::vector<Point> positions;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != k + 2) {
      throw IoError(path + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(k + 2) + " cells, got " + std::to_string(cells.size()));
    }
    Point pos{parse_cell(cells[0], path, line_no), parse_cell(cells[1], path, line_no)};
    std::vector<double> row(k);
    for (std::size_t c = 0; c < k; ++c) row[c] = parse_cell(cells[c + 2], path, line_no);
    positions.push_back(pos);
    rows.push_back(std::move(row));
  }

  RssiDataset dataset;
  dataset.positions = std::move(positions);
  dataset.rssi = Matrix(rows.size(), k);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < k; ++c) dataset.rssi(r, c) = rows[r][c];
  }
  return dataset;
}

void write_model_json(const std::string& path, const TrainedModel& model) {
  json sv = json::array();
  for (std::size_t r = 0; r < model.model.support_vectors.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < model.model.support_vectors.cols(); ++c) {
      row.push_back(model.model.support_vectors(r, c));
    }
    sv.push_back(std::move(row));
  }
  json j{
      {"gamma", model.model.gamma},
      {"nu", model.model.nu},
      {"rho", model.model.rho},
      {"support_vectors", std::move(sv)},
      {"alphas", model.model.alphas},
      {"standardizer", {{"mean", model.standardizer.mean}, {"std", model.standardizer.std}}},
  };
  store_json(path, j);
}

TrainedModel read_model_json(const std::string& path) {
  const json j = load_json(path);
  TrainedModel result;
  result.model.gamma = require(j, "gamma", path).get<double>();
  result.model.nu = require(j, "nu", path).get<double>();
  result.model.rho = require(j, "rho", path).get<double>();
  result.model.alphas = parse_doubles(require(j, "alphas", path), "alphas", path);
  const json& sv = require(j, "support_vectors", path);
  if (!sv.is_array() || sv.empty()) {
    throw IoError(path + ": support_vectors must be a non-empty array of rows");
  }
  const std::size_t cols = sv[0].is_array() ? sv[0].size() : 0;
  if (cols == 0) throw IoError(path + ": support_vectors rows must be non-empty arrays");
  result.model.support_vectors = Matrix(sv.size(), cols);
  for (std::size_t r = 0; r < sv.size(); ++r) {
    const std::vector<double> row = parse_doubles(sv[r], "support_vectors row", path);
    if (row.size() != cols) throw IoError(path + ": ragged support_vectors rows");
    for (std::size_t c = 0; c < cols; ++c) result.model.support_vectors(r, c) = row[c];
  }
  if (result.model.alphas.size() != result.model.support_vectors.rows()) {
    throw IoError(path + ": alphas length does not match support_vectors row count");
  }
  const json& std_j = require(j, "standardizer", path);
  result.standardizer.mean = parse_doubles(require(std_j, "mean", path), "standardizer.mean", path);
  result.standardizer.std = parse_doubles(require(std_j, "std", path), "standardizer.std", path);
  if (result.standardizer.mean.size() != cols || result.standardizer.std.size() != cols) {
    throw IoError(path + ": standardizer dimensions do not match support vectors");
  }
  return result;
}

void write_layout_json(const std::string& path, const StoreLayout& layout) {
  auto points_json = [](const std::vector<Point>& points) {
    json arr = json::array();
    for (const Point& p : points) arr.push_back(json::array({p.x, p.y}));
    return arr;
  };
  json j{
      {"aps", points_json(layout.problem.ap_candidates)},
      {"areas", points_json(layout.problem.area_candidates)},
      {"gate", json::array({layout.problem.gate.x, layout.problem.gate.y})},
      {"k", layout.problem.k},
      {"m", layout.problem.m},
      {"eta", layout.problem.eta},
  };
  if (layout.outside) j["outside"] = points_json(layout.outside->vertices);
  store_json(path, j);
}

StoreLayout read_layout_json(const std::string& path) {
  const json j = load_json(path);
  StoreLayout layout;
  layout.problem.ap_candidates = parse_points(require(j, "aps", path), "aps", path);
  layout.problem.area_candidates = parse_points(require(j, "areas", path), "areas", path);
  layout.problem.gate = parse_point(require(j, "gate", path), "gate", path);
  const json& k = require(j, "k", path);
  const json& m = require(j, "m", path);
  if (!k.is_number_unsigned() || !m.is_number_unsigned()) {
    throw IoError(path + ": k and m must be non-negative integers");
  }
  layout.problem.k = k.get<std::size_t>();
  layout.problem.m = m.get<std::size_t>();
  layout.problem.eta = require(j, "eta", path).get<double>();
  if (auto it = j.find("outside"); it != j.end()) {
    Polygon poly;
    poly.vertices = parse_points(*it, "outside", path);
    layout.outside = std::move(poly);
  }
  return layout;
}

void check_csv_schema(const std::string& path, const std::string& expected_header) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file, expected a header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header) {
    throw IoError(path + ": header mismatch, expected '" + expected_header + "', got '" + line +
                  "'");
  }
  const std::size_t n_cols = split_csv_line(expected_header).size();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != n_cols) {
      throw IoError(path + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(n_cols) + " cells, got " + std::to_string(cells.size()));
    }
    for (const std::string& cell : cells) {
      // Index-list cells (e.g. "0;2") hold semicolon-separated integers.
      std::size_t start = 0;
      while (start <= cell.size()) {
        const std::size_t stop = std::min(cell.find(';', start), cell.size());
        parse_cell(cell.substr(start, stop - start), path, line_no);
        if (stop == cell.size()) break;
        start = stop + 1;
      }
    }
  }
}

}  // namespace zonedet
