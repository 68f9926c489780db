#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <ostream>
#include <thread>

#include "commands.hpp"
#include "ncbc/error.hpp"

namespace ncbc::cli {

unsigned worker_count_from_env() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const char* raw = std::getenv("NCBC_THREADS");
  if (raw == nullptr || *raw == '\0') return hw;
  char* end = nullptr;
  const unsigned long n = std::strtoul(raw, &end, 10);
  if (*end != '\0') throw ValidationError(std::string("NCBC_THREADS must be a non-negative integer, got '") + raw + "'");
  if (n == 0) return hw;
  return static_cast<unsigned>(std::min<unsigned long>(n, 1024));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonlocal clique bias correction for MR images", "ncbc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ncbc 0.1.0");

  PhantomOptions ph;
  auto* phantom = app.add_subcommand("phantom", "Generate a bias-corrupted, Rician-noised phantom");
  auto* clean_opt = phantom->add_option("--clean", ph.clean, "Clean source image");
  auto* card_opt = phantom->add_option("--testcard", ph.testcard, "Procedural test card size WxH");
  clean_opt->excludes(card_opt);
  phantom->add_option("--bias-center", ph.bias_center, "Bias centre X,Y in pixels");
  phantom->add_option("--bias-sigma", ph.bias_sigma, "Bias Gaussian width in pixels");
  phantom->add_option("--gain-min", ph.gain_min, "Minimum bias gain");
  phantom->add_option("--gain-max", ph.gain_max, "Maximum bias gain");
  phantom->add_option("--noise-sigma", ph.noise_sigma, "Rician noise sigma (default 5% of max)");
  phantom->add_option("--seed", ph.seed, "Noise seed");
  phantom->add_option("--out-dir", ph.out_dir, "Output directory")->required();

  CorrectOptions co;
  auto* correct = app.add_subcommand("correct", "Correct bias and noise in one image");
  correct->add_option("--input", co.input, "Observed image")->required();
  correct->add_option("--config", co.config, "Config JSON");
  correct->add_option("--seed", co.seed, "Graph seed (overrides config)");
  correct->add_option("--method", co.method, "ncbc or lowpass")
      ->check(CLI::IsMember({"ncbc", "lowpass"}))
      ->capture_default_str();
  correct->add_option("--out-image", co.out_image, "Corrected image")->required();
  correct->add_option("--out-bias", co.out_bias, "Estimated bias field");
  correct->add_option("--diagnostics", co.diagnostics, "Diagnostics JSON");

  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "Compute quality metrics for one image");
  evaluate->add_option("--image", ev.image, "Image to evaluate")->required();
  evaluate->add_option("--truth", ev.truth, "Ground-truth image");
  evaluate->add_option("--rois", ev.rois, "ROI JSON")->required();
  evaluate->add_option("--class-rois", ev.class_rois, "Class ROI JSON for Fisher and P(e)");
  evaluate->add_option("--report", ev.report, "Report JSON")->required();

  CompareOptions cm;
  auto* compare = app.add_subcommand("compare", "Compare methods over many cases");
  compare->add_option("--inputs", cm.inputs, "Glob of observed images")->required();
  compare->add_option("--methods", cm.methods, "Comma-separated methods")
      ->delimiter(',')
      ->check(CLI::IsMember({"ncbc", "lowpass", "none"}))
      ->capture_default_str();
  compare->add_option("--rois", cm.rois, "ROI JSON")->required();
  compare->add_option("--report", cm.report, "Report JSON")->required();
  compare->add_option("--config", cm.config, "Config JSON");
  compare->add_option("--seed", cm.seed, "Graph seed (overrides config)");

  try {
    std::vector<std::string> rest(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (phantom->parsed()) {
      cmd_phantom(ph, out);
    } else if (correct->parsed()) {
      cmd_correct(co, worker_count_from_env(), out);
    } else if (evaluate->parsed()) {
      cmd_evaluate(ev, out);
    } else if (compare->parsed()) {
      cmd_compare(cm, worker_count_from_env(), out);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const DegeneracyError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  }
  return kSuccess;
}

}  // namespace ncbc::cli
