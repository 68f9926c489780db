#include "ncbc/metrics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "ncbc/error.hpp"

namespace ncbc {
namespace {

constexpr double kIntegrationTolerance = 1e-6;

Moments roi_moments(const Image& img, const Roi& roi, const char* metric) {
  roi.validate(img.dims());
  if (roi.area() < 2) {
    throw ValidationError(std::string(metric) + ": ROI '" + roi.name + "' needs at least 2 pixels");
  }
  const auto values = roi_values(img, roi);
  return moments(values);
}

double normal_pdf(double x, double mean, double var) {
  const double z = x - mean;
  return std::exp(-(z * z) / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

}  // namespace

void Roi::validate(const LatticeDims& dims) const {
  if (w == 0 || h == 0) throw ValidationError("ROI '" + name + "' is empty");
  if (x >= dims.width || y >= dims.height || w > dims.width - x || h > dims.height - y) {
    throw ValidationError("ROI '" + name + "' exceeds image bounds " + to_string(dims));
  }
}

std::vector<double> roi_values(const Image& img, const Roi& roi) {
  roi.validate(img.dims());
  std::vector<double> out;
  out.reserve(roi.area());
  for (std::size_t yy = roi.y; yy < roi.y + roi.h; ++yy) {
    for (std::size_t xx = roi.x; xx < roi.x + roi.w; ++xx) out.push_back(img.at(xx, yy));
  }
  return out;
}

double Moments::stddev() const { return std::sqrt(variance); }

Moments moments(std::span<const double> values) {
  if (values.empty()) throw DegeneracyError("moments of an empty sample");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, ss / n};
}

double correlation_coefficient(const Image& a, const Image& b) {
  require_same_dims(a, b, "correlation_coefficient");
  const double ma = a.mean();
  const double mb = b.mean();
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    const double da = a[s] - ma;
    const double db = b[s] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    throw DegeneracyError("correlation_coefficient: constant input");
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double snr_db(const Image& img, const Roi& roi) {
  const Moments m = roi_moments(img, roi, "snr_db");
  if (!(m.mean > 0.0)) throw DegeneracyError("snr_db: ROI '" + roi.name + "' mean is not positive");
  if (m.variance == 0.0) throw DegeneracyError("snr_db: ROI '" + roi.name + "' has zero std");
  return 20.0 * std::log10(m.mean / m.stddev());
}

double cnr_db(const Image& img, const Roi& roi_p, const Roi& roi_b) {
  const Moments p = roi_moments(img, roi_p, "cnr_db");
  const Moments b = roi_moments(img, roi_b, "cnr_db");
  if (b.variance == 0.0) throw DegeneracyError("cnr_db: background ROI '" + roi_b.name + "' has zero std");
  const double contrast = std::abs(b.mean - p.mean);
  if (contrast == 0.0) throw DegeneracyError("cnr_db: ROI means are equal");
  return 20.0 * std::log10(contrast / b.stddev());
}

double cv(const Image& img, const Roi& roi) {
  const Moments m = roi_moments(img, roi, "cv");
  if (!(m.mean > 0.0)) throw DegeneracyError("cv: ROI '" + roi.name + "' mean is not positive");
  return m.stddev() / m.mean;
}

double fisher_criterion(const Image& img, const Roi& roi_p, const Roi& roi_b) {
  const Moments p = roi_moments(img, roi_p, "fisher_criterion");
  const Moments b = roi_moments(img, roi_b, "fisher_criterion");
  const double spread = b.variance + p.variance;
  if (spread == 0.0) throw DegeneracyError("fisher_criterion: both ROIs have zero variance");
  const double d = b.mean - p.mean;
  return d * d / spread;
}

double gaussian_bayes_error(double mean_p, double var_p, double mean_b, double var_b,
                            double prior_p) {
  if (!(var_p > 0.0) || !(var_b > 0.0)) {
    throw DegeneracyError("probability_of_error: a class has zero variance");
  }
  if (!(prior_p > 0.0 && prior_p < 1.0)) {
    throw ValidationError("probability_of_error: prior must lie in (0, 1)");
  }
  const double prior_b = 1.0 - prior_p;
  auto integrand = [&](double l) {
    return std::min(prior_p * normal_pdf(l, mean_p, var_p), prior_b * normal_pdf(l, mean_b, var_b));
  };

  const double sp = std::sqrt(var_p);
  const double sb = std::sqrt(var_b);
  const double lo = std::min(mean_p - 10.0 * sp, mean_b - 10.0 * sb);
  const double hi = std::max(mean_p + 10.0 * sp, mean_b + 10.0 * sb);

  // Split where the weighted densities cross (roots of a quadratic in l) so
  // each piece is smooth.
  std::vector<double> cuts{lo, hi};
  const double qa = 1.0 / (2.0 * var_b) - 1.0 / (2.0 * var_p);
  const double qb = mean_p / var_p - mean_b / var_b;
  const double qc = mean_b * mean_b / (2.0 * var_b) - mean_p * mean_p / (2.0 * var_p) +
                    std::log((prior_p / sp) / (prior_b / sb));
  auto add_cut = [&](double c) {
    if (std::isfinite(c) && c > lo && c < hi) cuts.push_back(c);
  };
  if (std::abs(qa) < 1e-300) {
    if (qb != 0.0) add_cut(-qc / qb);
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      const double root = std::sqrt(disc);
      add_cut((-qb - root) / (2.0 * qa));
      add_cut((-qb + root) / (2.0 * qa));
    }
  }
  std::sort(cuts.begin(), cuts.end());

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double error = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, cuts[i], cuts[i + 1], 15, kIntegrationTolerance, &error);
  }
  return std::clamp(total, 0.0, std::min(prior_p, prior_b));
}

double probability_of_error(std::span<const double> samples_p, std::span<const double> samples_b,
                            std::optional<double> prior_p) {
  if (samples_p.size() < 2 || samples_b.size() < 2) {
    throw ValidationError("probability_of_error: each class needs at least 2 samples");
  }
  const Moments p = moments(samples_p);
  const Moments b = moments(samples_b);
  const double prior = prior_p.value_or(static_cast<double>(samples_p.size()) /
                                        static_cast<double>(samples_p.size() + samples_b.size()));
  return gaussian_bayes_error(p.mean, p.variance, b.mean, b.variance, prior);
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double paired_p_value(std::span<const double> before, std::span<const double> after) {
  if (before.size() != after.size()) {
    throw ValidationError("paired_p_value: samples differ in length");
  }
  if (before.size() < 2) throw ValidationError("paired_p_value: needs at least 2 pairs");
  const std::size_t n = before.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = after[i] - before[i];
  double sum = 0.0;
  for (double x : d) sum += x;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) return mean == 0.0 ? 1.0 : 1e-300;
  const double z = mean * std::sqrt(static_cast<double>(n)) / sd;
  // 2 (1 - Phi(|z|)) written via erfc to keep precision in the tail.
  const double p = std::erfc(std::abs(z) / std::numbers::sqrt2);
  return std::clamp(p, 1e-300, 1.0);
}

std::vector<std::pair<std::string, double>> present_metrics(const ImageMetrics& m) {
  std::vector<std::pair<std::string, double>> out;
  if (m.r) out.emplace_back("r", *m.r);
  if (m.snr_db) out.emplace_back("snr_db", *m.snr_db);
  if (m.cnr_db) out.emplace_back("cnr_db", *m.cnr_db);
  if (m.cv) out.emplace_back("cv", *m.cv);
  if (m.fisher) out.emplace_back("fisher", *m.fisher);
  if (m.p_error) out.emplace_back("p_error", *m.p_error);
  return out;
}

}  // namespace ncbc
