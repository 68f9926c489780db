#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <ostream>
#include <thread>

#include "glob.hpp"
#include "ncbc/config_io.hpp"
#include "ncbc/error.hpp"
#include "ncbc/image_io.hpp"
#include "ncbc/inference.hpp"
#include "ncbc/metrics.hpp"
#include "ncbc/phantom.hpp"
#include "ncbc/report_io.hpp"

namespace ncbc::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kForeground = "foreground";
constexpr const char* kBackground = "background";
constexpr const char* kHomogeneous = "homogeneous";

LatticeDims parse_dims(const std::string& text) {
  const auto x = text.find_first_of("xX");
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    const auto w = std::stoul(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(text);
    const std::string rest = text.substr(x + 1);
    const auto h = std::stoul(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(text);
    return {w, h};
  } catch (const std::logic_error&) {
    throw ValidationError("--testcard expects WxH, got '" + text + "'");
  }
}

std::pair<double, double> parse_point(const std::string& text) {
  const auto comma = text.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    const double x = std::stod(text.substr(0, comma), &used);
    if (used != comma) throw std::invalid_argument(text);
    const std::string rest = text.substr(comma + 1);
    const double y = std::stod(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(text);
    return {x, y};
  } catch (const std::logic_error&) {
    throw ValidationError("--bias-center expects X,Y, got '" + text + "'");
  }
}

void write_json(const fs::path& path, const json& doc) {
  write_file_atomic(path, doc.dump(2) + "\n");
}

const Roi* find_roi(const std::vector<Roi>& rois, const std::string& name) {
  auto it = std::find_if(rois.begin(), rois.end(), [&](const Roi& r) { return r.name == name; });
  return it == rois.end() ? nullptr : &*it;
}

struct EvaluationInputs {
  const Image* truth = nullptr;
  const std::vector<Roi>* rois = nullptr;
  const std::vector<Roi>* class_rois = nullptr;
};

// Computes every metric whose inputs are present. Metrics that are undefined
// for this image (zero variance, equal means, ...) are left out and the
// reason is recorded in `omitted`.
ImageMetrics evaluate_image(const Image& img, const EvaluationInputs& in, json* omitted) {
  ImageMetrics m;
  auto attempt = [&](const char* name, auto&& fn) {
    try {
      fn();
    } catch (const DegeneracyError& e) {
      if (omitted != nullptr) (*omitted)[name] = e.what();
    }
  };
  if (in.truth != nullptr) attempt("r", [&] { m.r = correlation_coefficient(img, *in.truth); });
  if (in.rois != nullptr) {
    const Roi* fg = find_roi(*in.rois, kForeground);
    const Roi* bg = find_roi(*in.rois, kBackground);
    const Roi* hom = find_roi(*in.rois, kHomogeneous);
    if (hom == nullptr) hom = fg;
    if (fg != nullptr) attempt("snr_db", [&] { m.snr_db = snr_db(img, *fg); });
    if (fg != nullptr && bg != nullptr) attempt("cnr_db", [&] { m.cnr_db = cnr_db(img, *fg, *bg); });
    if (hom != nullptr) attempt("cv", [&] { m.cv = cv(img, *hom); });
  }
  const std::vector<Roi>* classes = in.class_rois != nullptr ? in.class_rois : in.rois;
  if (classes != nullptr) {
    const Roi* p = find_roi(*classes, kForeground);
    const Roi* b = find_roi(*classes, kBackground);
    if (p != nullptr && b != nullptr) {
      attempt("fisher", [&] { m.fisher = fisher_criterion(img, *p, *b); });
      attempt("p_error", [&] {
        const auto sp = roi_values(img, *p);
        const auto sb = roi_values(img, *b);
        m.p_error = probability_of_error(sp, sb);
      });
    }
  }
  return m;
}

NcbcConfig effective_config(const std::optional<std::string>& path, std::optional<std::uint64_t> seed) {
  NcbcConfig cfg = path ? load_config(*path) : NcbcConfig{};
  if (seed) cfg.seed = *seed;
  return cfg;
}

NcbcResult correct_with(const std::string& method, const ObservedImage& v, const NcbcConfig& cfg,
                        unsigned workers) {
  if (method == "ncbc") return ncbc_reconstruct(v, cfg, ExecOptions{workers});
  if (method == "lowpass") {
    const double sigma =
        cfg.init_kernel_sigma > 0.0 ? cfg.init_kernel_sigma : default_init_kernel_sigma(v.dims());
    return lowpass_baseline(v, sigma);
  }
  if (method == "none") {
    NcbcResult r;
    r.latent = v;
    r.bias = BiasField(v.dims(), 1.0);
    r.diagnostics.converged = true;
    return r;
  }
  throw ValidationError("unknown method '" + method + "' (expected ncbc, lowpass or none)");
}

}  // namespace

void cmd_phantom(const PhantomOptions& opt, std::ostream& out) {
  if (opt.clean.has_value() == opt.testcard.has_value()) {
    throw ValidationError("phantom: exactly one of --clean or --testcard is required");
  }
  const Image clean = opt.clean ? load_image(*opt.clean) : make_test_card(parse_dims(*opt.testcard));
  const LatticeDims dims = clean.dims();

  BiasParams bp = default_bias_params(dims);
  if (opt.bias_center) std::tie(bp.center_x, bp.center_y) = parse_point(*opt.bias_center);
  if (opt.bias_sigma) bp.sigma = *opt.bias_sigma;
  if (opt.gain_min) bp.gain_min = *opt.gain_min;
  if (opt.gain_max) bp.gain_max = *opt.gain_max;
  try {
    bp.validate();
  } catch (const ConfigError& e) {
    throw ValidationError(std::string("phantom: ") + e.what());
  }
  NoiseParams np{opt.noise_sigma.value_or(0.05 * clean.max()), opt.seed};
  try {
    np.validate();
  } catch (const ConfigError& e) {
    throw ValidationError(std::string("phantom: ") + e.what());
  }

  const Phantom ph = make_synthetic_phantom(clean, bp, np);
  const fs::path dir(opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir.string() + "'");

  save_image(ph.observed, dir / "observed.raw");
  save_image(ph.truth, dir / "truth.raw");
  save_image(ph.true_bias, dir / "bias.raw");
  json provenance = {
      {"command", "phantom"},
      {"seed", opt.seed},
      {"width", dims.width},
      {"height", dims.height},
      {"clean", opt.clean ? json(*opt.clean) : json(nullptr)},
      {"testcard", opt.testcard ? json(*opt.testcard) : json(nullptr)},
      {"bias",
       {{"center_x", bp.center_x},
        {"center_y", bp.center_y},
        {"sigma", bp.sigma},
        {"gain_min", bp.gain_min},
        {"gain_max", bp.gain_max}}},
      {"noise", {{"sigma", np.sigma}, {"seed", np.seed}}},
  };
  if (opt.testcard) {
    save_rois(test_card_rois(dims), dir / "rois.json");
    provenance["rois"] = "rois.json";
  }
  write_json(dir / "provenance.json", provenance);
  out << "phantom " << to_string(dims) << " seed=" << opt.seed << " noise_sigma=" << np.sigma
      << " -> " << dir.string() << "\n";
}

void cmd_correct(const CorrectOptions& opt, unsigned workers, std::ostream& out) {
  const NcbcConfig cfg = effective_config(opt.config, opt.seed);
  const ObservedImage v = load_image(opt.input);
  const NcbcResult result = correct_with(opt.method, v, cfg, workers);

  save_image(result.latent, opt.out_image);
  if (opt.out_bias) save_image(result.bias, *opt.out_bias);
  if (opt.diagnostics) {
    json doc = {
        {"command", "correct"},
        {"method", opt.method},
        {"input", opt.input},
        {"seed", cfg.seed},
        {"config", config_to_json(cfg)},
        {"diagnostics", diagnostics_to_json(result.diagnostics)},
    };
    write_json(*opt.diagnostics, doc);
  }
  out << "correct method=" << opt.method << " seed=" << cfg.seed
      << " iters=" << result.diagnostics.iters_run
      << " converged=" << (result.diagnostics.converged ? "true" : "false") << "\n"
      << "config " << config_to_json(cfg).dump() << "\n";
}

void cmd_evaluate(const EvaluateOptions& opt, std::ostream& out) {
  const Image img = load_image(opt.image);
  std::optional<Image> truth;
  if (opt.truth) {
    truth = load_image(*opt.truth);
    require_same_dims(*truth, img, "--truth");
  }
  const auto rois = load_rois(opt.rois, img.dims());
  std::optional<std::vector<Roi>> class_rois;
  if (opt.class_rois) class_rois = load_rois(*opt.class_rois, img.dims());

  json omitted = json::object();
  const ImageMetrics m = evaluate_image(
      img, {truth ? &*truth : nullptr, &rois, class_rois ? &*class_rois : nullptr}, &omitted);

  MetricsReport report;
  const std::string name = fs::path(opt.image).filename().string();
  report.results["image"][name] = m;
  json doc = report_to_json(report);
  doc["command"] = "evaluate";
  doc["image"] = opt.image;
  if (opt.truth) doc["truth"] = *opt.truth;
  doc["rois"] = rois_to_json(rois)["rois"];
  if (class_rois) doc["class_rois"] = rois_to_json(*class_rois)["rois"];
  if (!omitted.empty()) doc["omitted"] = omitted;
  write_json(opt.report, doc);
  out << "evaluate " << name << " " << metrics_to_json(m).dump() << "\n";
}

void cmd_compare(const CompareOptions& opt, unsigned workers, std::ostream& out) {
  if (opt.methods.empty()) throw ValidationError("compare: --methods is empty");
  for (const auto& m : opt.methods) {
    if (m != "ncbc" && m != "lowpass" && m != "none") {
      throw ValidationError("compare: unknown method '" + m + "'");
    }
  }
  const NcbcConfig cfg = effective_config(opt.config, opt.seed);
  const auto matches = expand_glob(opt.inputs);
  if (matches.empty()) throw DataError("compare: no inputs match '" + opt.inputs + "'");

  struct CaseResult {
    std::map<std::string, ImageMetrics> per_method;
    ImageMetrics uncorrected;
  };
  std::vector<CaseResult> results(matches.size());

  // Cases run concurrently; each writes only its own slot.
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < matches.size(); i = next++) {
      try {
        const ObservedImage v = load_image(matches[i].path);
        const auto rois = load_rois(opt.rois, v.dims());
        std::optional<Image> truth;
        const fs::path truth_path = matches[i].path.parent_path() / "truth.raw";
        if (fs::exists(truth_path) && !fs::equivalent(truth_path, matches[i].path)) {
          truth = load_image(truth_path);
          require_same_dims(*truth, v, "truth.raw");
        }
        const EvaluationInputs in{truth ? &*truth : nullptr, &rois, nullptr};
        results[i].uncorrected = evaluate_image(v, in, nullptr);
        for (const auto& method : opt.methods) {
          const NcbcResult r = correct_with(method, v, cfg, 1);
          results[i].per_method[method] = evaluate_image(r.latent, in, nullptr);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = matches.size();
      }
    }
  };
  const std::size_t count = std::clamp<std::size_t>(workers, 1, matches.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < count; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);

  MetricsReport report;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    for (const auto& [method, metrics] : results[i].per_method) {
      report.results[method][matches[i].relative] = metrics;
    }
  }

  // Paired p-values of each correction method against the uncorrected input,
  // for every metric present in all cases.
  if (matches.size() >= 2) {
    const char* names[] = {"r", "snr_db", "cnr_db", "cv", "fisher", "p_error"};
    for (const auto& method : opt.methods) {
      if (method == "none") continue;
      for (const char* name : names) {
        std::vector<double> before;
        std::vector<double> after;
        for (const auto& c : results) {
          const auto b = metrics_to_json(c.uncorrected);
          const auto a = metrics_to_json(c.per_method.at(method));
          if (!b.contains(name) || !a.contains(name)) break;
          before.push_back(b[name].get<double>());
          after.push_back(a[name].get<double>());
        }
        if (before.size() == results.size()) {
          report.p_values[method][name] = paired_p_value(before, after);
        }
      }
    }
  }

  json doc = report_to_json(report);
  doc["command"] = "compare";
  doc["inputs"] = opt.inputs;
  doc["methods"] = opt.methods;
  doc["cases"] = json::array();
  for (const auto& m : matches) doc["cases"].push_back(m.relative);
  doc["seed"] = cfg.seed;
  doc["config"] = config_to_json(cfg);
  write_json(opt.report, doc);
  out << "compare cases=" << matches.size() << " seed=" << cfg.seed << "\n";
  for (const auto& [method, ps] : report.p_values) {
    for (const auto& [metric, p] : ps) out << "  p[" << method << "][" << metric << "] = " << p << "\n";
  }
}

}  // namespace ncbc::cli
