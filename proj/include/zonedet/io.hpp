#pragma once

#include <optional>
#include <string>

#include "zonedet/common.hpp"
#include "zonedet/features.hpp"
#include "zonedet/ocsvm.hpp"
#include "zonedet/placement.hpp"
#include "zonedet/propagation.hpp"

namespace zonedet {

// File formats:
//   dataset CSV   header `pos_x,pos_y,ap_1,...,ap_k`, one row per beacon
//   model JSON    {gamma, nu, rho, support_vectors, alphas, standardizer}
//   layout JSON   {aps, areas, gate, k, m, eta} plus optional "outside"
//                 polygon (vertex list) for the out-of-store domain
// All numeric text output is fixed at 6 decimal places.

// A persisted model bundles the boundary with the standardizer that its
// features were fitted under, so a model file is self-contained.
struct TrainedModel {
  OcSvmModel model;
  StandardizerStats standardizer;
};

struct StoreLayout {
  PlacementProblem problem;
  std::optional<Polygon> outside;
};

std::string format_fixed(double value);  // 6 decimal places

void write_dataset_csv(const std::string& path, const RssiDataset& dataset);
RssiDataset read_dataset_csv(const std::string& path);

void write_model_json(const std::string& path, const TrainedModel& model);
TrainedModel read_model_json(const std::string& path);

void write_layout_json(const std::string& path, const StoreLayout& layout);
StoreLayout read_layout_json(const std::string& path);

// Schema self-checks for the CSV reports the CLI emits: verify the header
// line and that every data cell parses as a finite number (index columns as
// integers). Throws IoError on violation.
void check_csv_schema(const std::string& path, const std::string& expected_header);

}  // namespace zonedet
