#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ncbc::cli {

struct PhantomOptions {
  std::optional<std::string> clean;
  std::optional<std::string> testcard;  // "WxH"
  std::optional<std::string> bias_center;  // "X,Y"
  std::optional<double> bias_sigma;
  std::optional<double> gain_min;
  std::optional<double> gain_max;
  std::optional<double> noise_sigma;
  std::uint64_t seed = 0;
  std::string out_dir;
};

struct CorrectOptions {
  std::string input;
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::string method = "ncbc";
  std::string out_image;
  std::optional<std::string> out_bias;
  std::optional<std::string> diagnostics;
};

struct EvaluateOptions {
  std::string image;
  std::optional<std::string> truth;
  std::string rois;
  std::optional<std::string> class_rois;
  std::string report;
};

struct CompareOptions {
  std::string inputs;
  std::vector<std::string> methods{"ncbc", "lowpass", "none"};
  std::string rois;
  std::string report;
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
};

void cmd_phantom(const PhantomOptions& opt, std::ostream& out);
void cmd_correct(const CorrectOptions& opt, unsigned workers, std::ostream& out);
void cmd_evaluate(const EvaluateOptions& opt, std::ostream& out);
void cmd_compare(const CompareOptions& opt, unsigned workers, std::ostream& out);

}  // namespace ncbc::cli
