#include "ncbc/config_io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <string>

#include "ncbc/error.hpp"
#include "ncbc/image_io.hpp"

namespace ncbc {
namespace {

using nlohmann::json;

// Walks one JSON object, tracking which keys were consumed.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ValidationError(where() + ": expected an object");
  }

  const json* find(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void number(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ValidationError(at(key) + ": expected a number");
      out = v->get<double>();
    }
  }

  // Numbers, or the string "inf" for an unbounded value.
  void number_or_inf(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (v->is_string() && v->get<std::string>() == "inf") {
        out = std::numeric_limits<double>::infinity();
      } else if (v->is_number()) {
        out = v->get<double>();
      } else {
        throw ValidationError(at(key) + ": expected a number or \"inf\"");
      }
    }
  }

  template <class T>
  void count(const char* key, T& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) throw ValidationError(at(key) + ": expected a nonnegative integer");
      const auto raw = v->get<std::uint64_t>();
      if (raw > std::numeric_limits<T>::max()) throw ValidationError(at(key) + ": value too large");
      out = static_cast<T>(raw);
    }
  }

  void boolean(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ValidationError(at(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }

  void numbers(const char* key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ValidationError(at(key) + ": expected an array of numbers");
      std::vector<double> values;
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) {
          throw ValidationError(at(key) + "[" + std::to_string(i) + "]: expected a number");
        }
        values.push_back((*v)[i].get<double>());
      }
      out = std::move(values);
    }
  }

  void finish() const {
    for (const auto& [key, _] : obj_.items()) {
      if (!seen_.count(key)) throw ValidationError(at(key.c_str()) + ": unknown key");
    }
  }

  std::string at(const char* key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "config" : path_; }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

BiasInit parse_bias_init(const json& v, const std::string& where) {
  if (v == "lowpass_ratio") return BiasInit::lowpass_ratio;
  if (v == "uniform_one") return BiasInit::uniform_one;
  throw ValidationError(where + ": expected \"lowpass_ratio\" or \"uniform_one\"");
}

json number_or_inf(double x) {
  if (std::isinf(x) && x > 0) return "inf";
  return x;
}

}  // namespace

json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError("'" + path.string() + "': " + e.what(), e.byte);
  }
}

NcbcConfig config_from_json(const json& doc) {
  NcbcConfig cfg;
  if (doc.is_null()) return cfg;
  ObjectReader top(doc, "");
  if (const json* w = top.find("weights")) {
    ObjectReader r(*w, "weights");
    r.number("alpha_u", cfg.weights.alpha_u);
    r.numbers("alpha_p", cfg.weights.alpha_p);
    r.number_or_inf("intensity_sigma", cfg.weights.intensity_sigma);
    r.number("bias_smooth_weight", cfg.weights.bias_smooth_weight);
    r.finish();
  }
  if (const json* c = top.find("clique")) {
    ObjectReader r(*c, "clique");
    r.number("base_prob", cfg.clique.base_prob);
    r.number("spatial_sigma", cfg.clique.spatial_sigma);
    r.count("max_degree", cfg.clique.max_degree);
    r.boolean("include_local_4", cfg.clique.include_local_4);
    r.boolean("resample_each_iteration", cfg.clique.resample_each_iteration);
    r.finish();
  }
  top.number("mu1", cfg.mu1);
  top.number("mu2", cfg.mu2);
  top.number("rho", cfg.rho);
  top.number("eta", cfg.eta);
  top.count("max_iters", cfg.max_iters);
  top.number("rel_tol", cfg.rel_tol);
  if (const json* b = top.find("bias_init")) cfg.bias_init = parse_bias_init(*b, "bias_init");
  top.number("init_kernel_sigma", cfg.init_kernel_sigma);
  top.count("seed", cfg.seed);
  if (const json* a = top.find("annotations")) {
    ObjectReader r(*a, "annotations");
    r.numbers("b_values_s_per_mm2", cfg.annotated_b_values);
    r.finish();
  }
  top.finish();

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ValidationError(e.what());
  }
  return cfg;
}

json config_to_json(const NcbcConfig& cfg) {
  return {
      {"weights",
       {{"alpha_u", cfg.weights.alpha_u},
        {"alpha_p", cfg.weights.alpha_p},
        {"intensity_sigma", number_or_inf(cfg.weights.intensity_sigma)},
        {"bias_smooth_weight", cfg.weights.bias_smooth_weight}}},
      {"clique",
       {{"base_prob", cfg.clique.base_prob},
        {"spatial_sigma", cfg.clique.spatial_sigma},
        {"max_degree", cfg.clique.max_degree},
        {"include_local_4", cfg.clique.include_local_4},
        {"resample_each_iteration", cfg.clique.resample_each_iteration}}},
      {"mu1", cfg.mu1},
      {"mu2", cfg.mu2},
      {"rho", cfg.rho},
      {"eta", cfg.eta},
      {"max_iters", cfg.max_iters},
      {"rel_tol", cfg.rel_tol},
      {"bias_init", cfg.bias_init == BiasInit::lowpass_ratio ? "lowpass_ratio" : "uniform_one"},
      {"init_kernel_sigma", cfg.init_kernel_sigma},
      {"seed", cfg.seed},
      {"annotations", {{"b_values_s_per_mm2", cfg.annotated_b_values}}},
  };
}

NcbcConfig load_config(const std::filesystem::path& path) {
  return config_from_json(parse_json_file(path));
}

void save_config(const NcbcConfig& cfg, const std::filesystem::path& path) {
  write_file_atomic(path, config_to_json(cfg).dump(2) + "\n");
}

std::vector<Roi> rois_from_json(const json& doc, const LatticeDims& dims) {
  ObjectReader top(doc, "");
  std::vector<Roi> rois;
  if (const json* list = top.find("rois")) {
    if (!list->is_array()) throw ValidationError("rois: expected an array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < list->size(); ++i) {
      const std::string where = "rois[" + std::to_string(i) + "]";
      ObjectReader r((*list)[i], where);
      Roi roi;
      const json* name = r.find("name");
      if (name == nullptr || !name->is_string()) throw ValidationError(where + ".name: expected a string");
      roi.name = name->get<std::string>();
      for (const char* key : {"x", "y", "w", "h"}) {
        if ((*list)[i].find(key) == (*list)[i].end()) {
          throw ValidationError(where + "." + key + ": missing (ROI '" + roi.name + "')");
        }
      }
      r.count("x", roi.x);
      r.count("y", roi.y);
      r.count("w", roi.w);
      r.count("h", roi.h);
      r.finish();
      if (!names.insert(roi.name).second) {
        throw ValidationError("duplicate ROI name '" + roi.name + "'");
      }
      roi.validate(dims);
      rois.push_back(std::move(roi));
    }
  }
  top.finish();
  return rois;
}

json rois_to_json(const std::vector<Roi>& rois) {
  json list = json::array();
  for (const Roi& r : rois) {
    list.push_back({{"name", r.name}, {"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}});
  }
  return {{"rois", list}};
}

std::vector<Roi> load_rois(const std::filesystem::path& path, const LatticeDims& dims) {
  return rois_from_json(parse_json_file(path), dims);
}

void save_rois(const std::vector<Roi>& rois, const std::filesystem::path& path) {
  write_file_atomic(path, rois_to_json(rois).dump(2) + "\n");
}

}  // namespace ncbc
