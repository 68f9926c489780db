#pragma once

#include <nlohmann/json.hpp>

#include "ncbc/inference.hpp"
#include "ncbc/metrics.hpp"

namespace ncbc {

nlohmann::json diagnostics_to_json(const Diagnostics& diag);
Diagnostics diagnostics_from_json(const nlohmann::json& doc);

nlohmann::json metrics_to_json(const ImageMetrics& m);
// {"results": {method: {case: {metric: value}}}, "p_values": {method: {metric: p}}};
// "p_values" is omitted when empty.
nlohmann::json report_to_json(const MetricsReport& report);

}  // namespace ncbc
