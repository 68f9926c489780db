#include "ncbc/report_io.hpp"

#include "ncbc/error.hpp"

namespace ncbc {

using nlohmann::json;

json diagnostics_to_json(const Diagnostics& diag) {
  return {
      {"energy_trace", diag.energy_trace},
      {"initial_energy", diag.initial_energy},
      {"iters_run", diag.iters_run},
      {"converged", diag.converged},
      {"final_rel_change", diag.final_rel_change},
      {"seed", diag.seed},
      {"graph_edge_count", diag.graph_edge_count},
      {"intensity_scale", diag.intensity_scale},
      {"final_mu1", diag.final_mu1},
      {"final_mu2", diag.final_mu2},
      {"rejected_steps", diag.rejected_steps},
  };
}

Diagnostics diagnostics_from_json(const json& doc) {
  try {
    Diagnostics d;
    d.energy_trace = doc.at("energy_trace").get<std::vector<double>>();
    d.initial_energy = doc.at("initial_energy").get<double>();
    d.iters_run = doc.at("iters_run").get<std::size_t>();
    d.converged = doc.at("converged").get<bool>();
    d.final_rel_change = doc.at("final_rel_change").get<double>();
    d.seed = doc.at("seed").get<std::uint64_t>();
    d.graph_edge_count = doc.at("graph_edge_count").get<std::size_t>();
    d.intensity_scale = doc.at("intensity_scale").get<double>();
    d.final_mu1 = doc.at("final_mu1").get<double>();
    d.final_mu2 = doc.at("final_mu2").get<double>();
    d.rejected_steps = doc.at("rejected_steps").get<std::size_t>();
    return d;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("diagnostics: ") + e.what());
  }
}

json metrics_to_json(const ImageMetrics& m) {
  json out = json::object();
  for (const auto& [name, value] : present_metrics(m)) out[name] = value;
  return out;
}

json report_to_json(const MetricsReport& report) {
  json results = json::object();
  for (const auto& [method, cases] : report.results) {
    json per_case = json::object();
    for (const auto& [name, metrics] : cases) per_case[name] = metrics_to_json(metrics);
    results[method] = per_case;
  }
  json out = {{"results", results}};
  if (!report.p_values.empty()) out["p_values"] = report.p_values;
  return out;
}

}  // namespace ncbc
