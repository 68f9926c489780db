#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ncbc/image.hpp"

namespace ncbc {

// Axis-aligned region [x, x + w) x [y, y + h).
struct Roi {
  std::string name;
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t w = 0;
  std::size_t h = 0;

  std::size_t area() const noexcept { return w * h; }
  // Throws ValidationError (naming the ROI) when empty or out of bounds.
  void validate(const LatticeDims& dims) const;

  friend bool operator==(const Roi&, const Roi&) = default;
};

std::vector<double> roi_values(const Image& img, const Roi& roi);

// Population (N-divisor) moments.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double stddev() const;
};
Moments moments(std::span<const double> values);

// Pearson correlation over all pixels.
double correlation_coefficient(const Image& a, const Image& b);
// 20 log10(mean / std) over the ROI.
double snr_db(const Image& img, const Roi& roi);
// 20 log10(|mean_b - mean_p| / std_b).
double cnr_db(const Image& img, const Roi& roi_p, const Roi& roi_b);
// std / mean over the ROI.
double cv(const Image& img, const Roi& roi);
// |mean_b - mean_p|^2 / (var_b + var_p).
double fisher_criterion(const Image& img, const Roi& roi_p, const Roi& roi_b);

// Bayes error of a two-class Gaussian classifier fitted by maximum likelihood:
// integral of min(prior_p N(l; p), prior_b N(l; b)) dl. Without a prior the
// class proportions of the samples are used.
double probability_of_error(std::span<const double> samples_p, std::span<const double> samples_b,
                            std::optional<double> prior_p = std::nullopt);

// Same quantity from fitted parameters; exposed for direct use and testing.
double gaussian_bayes_error(double mean_p, double var_p, double mean_b, double var_b,
                            double prior_p);

// Two-tailed paired z-test on d = after - before, sample (N-1) std of d.
double paired_p_value(std::span<const double> before, std::span<const double> after);

double standard_normal_cdf(double z);

struct ImageMetrics {
  std::optional<double> r;
  std::optional<double> snr_db;
  std::optional<double> cnr_db;
  std::optional<double> cv;
  std::optional<double> fisher;
  std::optional<double> p_error;

  friend bool operator==(const ImageMetrics&, const ImageMetrics&) = default;
};

// method -> case -> metrics, plus paired p-values method -> metric -> p.
struct MetricsReport {
  std::map<std::string, std::map<std::string, ImageMetrics>> results;
  std::map<std::string, std::map<std::string, double>> p_values;
};

// Metric name/value pairs actually present, in a fixed order.
std::vector<std::pair<std::string, double>> present_metrics(const ImageMetrics& m);

}  // namespace ncbc
