#pragma once

#include "bobgmm/pipeline.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace bobgmm {

/// Numeric CSV; a non-numeric first row is taken as the header.
Matrix read_matrix_csv(const std::string& path, std::vector<std::string>* header = nullptr);
void write_matrix_csv(const std::string& path, const Matrix& M, const std::vector<std::string>& header = {});

std::vector<int> read_labels_csv(const std::string& path);
void write_labels_csv(const std::string& path, const std::vector<int>& labels);

/// One flattened draw per row plus `<path>.json` describing the layout.
void write_draws_csv(const std::string& path, const std::vector<GmmParams>& draws, const std::string& source,
                     const nlohmann::json& extra = {});
std::vector<GmmParams> read_draws_csv(const std::string& path);

void write_trace_csv(const std::string& path, const BoResult& bo);

nlohmann::json to_json(const GmmParams& p);
nlohmann::json to_json(const MethodMetrics& m);
nlohmann::json to_json(const MetricSummary& s);
nlohmann::json to_json(const RunConfig& cfg);

/// Fields absent from the JSON keep their defaults.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

nlohmann::json read_json(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace bobgmm
