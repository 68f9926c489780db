#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <vector>

#include "ncbc/inference.hpp"
#include "ncbc/metrics.hpp"

namespace ncbc {

// Config documents are JSON objects; absent keys take NcbcConfig defaults,
// unknown keys and type mismatches raise ValidationError with the key path
// (e.g. "clique.max_degree").
NcbcConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const NcbcConfig& cfg);
NcbcConfig load_config(const std::filesystem::path& path);
void save_config(const NcbcConfig& cfg, const std::filesystem::path& path);

// {"rois": [{"name", "x", "y", "w", "h"}, ...]}. Names must be unique and
// every ROI must fit inside `dims`.
std::vector<Roi> rois_from_json(const nlohmann::json& doc, const LatticeDims& dims);
nlohmann::json rois_to_json(const std::vector<Roi>& rois);
std::vector<Roi> load_rois(const std::filesystem::path& path, const LatticeDims& dims);
void save_rois(const std::vector<Roi>& rois, const std::filesystem::path& path);

nlohmann::json parse_json_file(const std::filesystem::path& path);

}  // namespace ncbc
