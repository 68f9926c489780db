// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "ncbc/energy.hpp"
#include "ncbc/image_io.hpp"
#include "ncbc/inference.hpp"
#include "ncbc/metrics.hpp"
#include "ncbc/phantom.hpp"
#include "test_support.hpp"

namespace {

using namespace ncbc;
using Clock = std::chrono::steady_clock;
using nlohmann::json;
namespace fs = std::filesystem;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared phantom study for criteria 1, 2, 3 and 5.

struct PhantomRun {
  double r_obs, r_ncbc;
  double snr_obs, snr_ncbc, snr_lp;
  double cnr_obs, cnr_ncbc, cnr_lp;
  double cv_obs, cv_ncbc;
  bool trace_monotone;
};

struct PhantomStudy {
  std::vector<PhantomRun> runs;
  double seconds = 0.0;
};

const PhantomStudy& phantom_study() {
  static const PhantomStudy study = [] {
    PhantomStudy s;
    const LatticeDims dims{64, 64};
    const Image clean = make_test_card(dims);
    const auto rois = test_card_rois(dims);
    const Roi &fg = rois[0], &bg = rois[1], &hom = rois[2];
    const auto t0 = Clock::now();
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto ph = make_synthetic_phantom(clean, default_bias_params(dims), {0.05 * clean.max(), seed});
      NcbcConfig cfg;
      cfg.seed = seed;
      const auto nc = ncbc_reconstruct(ph.observed, cfg);
      const auto lp = lowpass_baseline(ph.observed, default_init_kernel_sigma(dims));
      PhantomRun r{};
      r.r_obs = correlation_coefficient(ph.observed, ph.truth);
      r.r_ncbc = correlation_coefficient(nc.latent, ph.truth);
      r.snr_obs = snr_db(ph.observed, fg);
      r.snr_ncbc = snr_db(nc.latent, fg);
      r.snr_lp = snr_db(lp.latent, fg);
      r.cnr_obs = cnr_db(ph.observed, fg, bg);
      r.cnr_ncbc = cnr_db(nc.latent, fg, bg);
      r.cnr_lp = cnr_db(lp.latent, fg, bg);
      r.cv_obs = cv(ph.observed, hom);
      r.cv_ncbc = cv(nc.latent, hom);
      const auto& t = nc.diagnostics.energy_trace;
      r.trace_monotone = !t.empty() && t.front() <= nc.diagnostics.initial_energy;
      for (std::size_t i = 1; i < t.size(); ++i) r.trace_monotone = r.trace_monotone && t[i] <= t[i - 1];
      s.runs.push_back(r);
    }
    s.seconds = seconds_since(t0);
    return s;
  }();
  return study;
}

double mean_of(const std::vector<PhantomRun>& runs, double PhantomRun::*field) {
  double sum = 0.0;
  for (const auto& r : runs) sum += r.*field;
  return sum / double(runs.size());
}

Outcome criterion1() {
  const auto& s = phantom_study();
  int wins = 0;
  for (const auto& r : s.runs) wins += r.r_ncbc > r.r_obs ? 1 : 0;
  const double mean_r = mean_of(s.runs, &PhantomRun::r_ncbc);
  return {wins == 10 && mean_r >= 0.95 && s.seconds < 60.0,
          fmt("r(NCBC)>r(obs) in %d/10, mean r(NCBC)=%.4f (obs %.4f), %.1f s", wins, mean_r,
              mean_of(s.runs, &PhantomRun::r_obs), s.seconds)};
}

Outcome criterion2() {
  const auto& s = phantom_study();
  const double snr_n = mean_of(s.runs, &PhantomRun::snr_ncbc), snr_o = mean_of(s.runs, &PhantomRun::snr_obs),
               snr_l = mean_of(s.runs, &PhantomRun::snr_lp);
  const double cnr_n = mean_of(s.runs, &PhantomRun::cnr_ncbc), cnr_o = mean_of(s.runs, &PhantomRun::cnr_obs),
               cnr_l = mean_of(s.runs, &PhantomRun::cnr_lp);
  const bool pass = snr_n - snr_o >= 2.0 && cnr_n - cnr_o >= 2.0 && snr_n > snr_l && cnr_n > cnr_l;
  return {pass, fmt("mean SNR dB NCBC %.2f / obs %.2f / lowpass %.2f; CNR dB %.2f / %.2f / %.2f", snr_n, snr_o,
                    snr_l, cnr_n, cnr_o, cnr_l)};
}

Outcome criterion3() {
  const auto& s = phantom_study();
  int wins = 0;
  for (const auto& r : s.runs) wins += r.cv_ncbc < r.cv_obs ? 1 : 0;
  return {wins == 10, fmt("CV(NCBC)<CV(obs) in %d/10, mean CV %.4f vs %.4f", wins,
                          mean_of(s.runs, &PhantomRun::cv_ncbc), mean_of(s.runs, &PhantomRun::cv_obs))};
}

Outcome criterion5() {
  const auto& s = phantom_study();
  int ok = 0;
  for (const auto& r : s.runs) ok += r.trace_monotone ? 1 : 0;
  return {ok == 10, fmt("non-increasing energy trace in %d/10 phantom runs", ok)};
}

// ---------------------------------------------------------------------------

Outcome criterion4() {
  const auto t0 = Clock::now();
  const LatticeDims dims{4, 4};
  const double h = 1e-5;
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    std::mt19937_64 rng(1000 + i);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    EnergyWeights w;
    w.alpha_u = 0.5 + u(rng);
    w.alpha_p = {0.5 + 10.0 * u(rng)};
    w.intensity_sigma = 0.05 + u(rng);
    w.bias_smooth_weight = 0.5 + 10.0 * u(rng);
    CliqueConfig cc;
    cc.base_prob = u(rng);
    const auto g = build_stochastic_graph(dims, cc, i);
    const Image v = testing::random_image(dims, 2000 + i);
    Image m = testing::random_image(dims, 3000 + i);
    Image b = testing::random_image(dims, 4000 + i, 0.5, 1.5);
    const Image gm = grad_m(m, b, v, g, w);
    const Image gb = grad_b(m, b, v, g, w);
    auto check = [&](Image& x, const Image& grad) {
      double num = 0.0, den = 0.0;
      for (std::size_t s = 0; s < dims.size(); ++s) {
        const double x0 = x[s];
        x[s] = x0 + h;
        const double ep = total_energy(m, b, v, g, w);
        x[s] = x0 - h;
        const double em = total_energy(m, b, v, g, w);
        x[s] = x0;
        const double fd = (ep - em) / (2 * h);
        num = std::max(num, std::abs(grad[s] - fd));
        den = std::max(den, std::abs(fd));
      }
      worst = std::max(worst, num / std::max(den, 1e-12));
    };
    check(m, gm);
    check(b, gb);
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 5.0, fmt("worst relative error %.2e over 100 instances, %.2f s", worst, secs)};
}

// ---------------------------------------------------------------------------
// 2x2 exhaustive search. The grid has 16 M levels per pixel and 16 levels for
// b1..b3, with b4 = 4 - (b1 + b2 + b3) so every candidate satisfies mean(B) = 1.
// The quantization gap is the energy cost of rounding the converged solution
// to that grid.

Outcome criterion6() {
  const LatticeDims dims{2, 2};
  constexpr int L = 16;
  int passed = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  for (std::uint64_t inst = 0; inst < 20; ++inst) {
    std::mt19937_64 rng(500 + inst);
    std::uniform_int_distribution<int> level(1, 15);
    Image v(dims);
    for (std::size_t s = 0; s < 4; ++s) v[s] = level(rng) / 15.0;

    NcbcConfig cfg;
    cfg.seed = inst;
    cfg.max_iters = 20000;
    cfg.rel_tol = 1e-13;
    const auto res = ncbc_reconstruct(v, cfg);
    const double scale = res.diagnostics.intensity_scale;
    Image vn = v, mc = res.latent;
    for (std::size_t s = 0; s < 4; ++s) {
      vn[s] /= scale;
      mc[s] /= scale;
    }
    const Image& bc = res.bias;
    const auto g = build_stochastic_graph(dims, cfg.clique, cfg.seed);
    const EnergyWeights& w = cfg.weights;
    const double e_cont = total_energy(mc, bc, vn, g, w);

    const double m_hi = 1.5 * std::max(mc.max(), vn.max());
    const double b_lo = std::max(1e-6, bc.min() - 0.15), b_hi = bc.max() + 0.15;
    std::vector<double> mlev(L), blev(L);
    for (int k = 0; k < L; ++k) {
      mlev[k] = m_hi * k / (L - 1);
      blev[k] = b_lo + (b_hi - b_lo) * k / (L - 1);
    }

    // Pairwise M energy for every M tuple, independent of B.
    std::vector<double> affinity(g.edge_count());
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      const Edge& ed = g.edges()[e];
      const double dv = vn[ed.a] - vn[ed.b];
      affinity[e] = std::exp(-dv * dv / (2 * w.intensity_sigma * w.intensity_sigma)) *
                    std::exp(-ed.distance * ed.distance / (2 * cfg.clique.spatial_sigma * cfg.clique.spatial_sigma));
    }
    std::vector<double> q(L * L * L * L);
    for (int i = 0; i < L * L * L * L; ++i) {
      const int idx[4] = {i / (L * L * L), (i / (L * L)) % L, (i / L) % L, i % L};
      double e = 0.0;
      for (std::size_t k = 0; k < g.edge_count(); ++k) {
        const double d = mlev[idx[g.edges()[k].a]] - mlev[idx[g.edges()[k].b]];
        e += w.alpha_p[0] * affinity[k] * d * d;
      }
      q[i] = e;
    }

    double best = std::numeric_limits<double>::infinity();
    for (int b1 = 0; b1 < L; ++b1)
      for (int b2 = 0; b2 < L; ++b2)
        for (int b3 = 0; b3 < L; ++b3) {
          const double bb[4] = {blev[b1], blev[b2], blev[b3], 4.0 - blev[b1] - blev[b2] - blev[b3]};
          if (bb[3] < 1e-6) continue;
          double eb = 0.0;
          for (const Edge& ed : g.edges()) {
            const double d = bb[ed.a] - bb[ed.b];
            eb += w.bias_smooth_weight * d * d;
          }
          if (eb >= best) continue;
          double u[4][L];
          for (int s = 0; s < 4; ++s)
            for (int k = 0; k < L; ++k) {
              const double r = vn[s] - mlev[k] * bb[s];
              u[s][k] = w.alpha_u * r * r;
            }
          for (int m1 = 0; m1 < L; ++m1)
            for (int m2 = 0; m2 < L; ++m2)
              for (int m3 = 0; m3 < L; ++m3) {
                const double base = eb + u[0][m1] + u[1][m2] + u[2][m3];
                const double* row = &q[((m1 * L + m2) * L + m3) * L];
                double inner = std::numeric_limits<double>::infinity();
                for (int m4 = 0; m4 < L; ++m4) inner = std::min(inner, row[m4] + u[3][m4]);
                best = std::min(best, base + inner);
              }
        }

    // Round the continuous solution to the grid (b4 follows from the constraint).
    auto nearest = [](const std::vector<double>& lev, double x) {
      return *std::min_element(lev.begin(), lev.end(),
                               [&](double a, double b) { return std::abs(a - x) < std::abs(b - x); });
    };
    Image mg(dims), bg(dims);
    for (std::size_t s = 0; s < 4; ++s) mg[s] = nearest(mlev, mc[s]);
    for (std::size_t s = 0; s < 3; ++s) bg[s] = nearest(blev, bc[s]);
    bg[3] = 4.0 - bg[0] - bg[1] - bg[2];
    const double gap = std::max(0.0, total_energy(mg, bg, vn, g, w) - e_cont);

    const double margin = best - (e_cont - gap);
    min_margin = std::min(min_margin, margin);
    passed += margin >= 0.0 ? 1 : 0;
  }
  return {passed == 20, fmt("%d/20 instances satisfy E_grid >= E_cont - gap (min margin %.3e)", passed, min_margin)};
}

// ---------------------------------------------------------------------------

Outcome criterion7() {
  double worst_formula = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Image a = testing::random_image({8, 8}, 70 + seed, 0.5, 2.0);
    const Image b = testing::random_image({8, 8}, 90 + seed, 0.5, 2.0);
    const Roi p{"p", 1, 1, 4, 3}, q{"q", 3, 4, 5, 4};
    auto stats = [&](const Roi& r) {
      double mean = 0, var = 0;
      const double n = double(r.area());
      for (std::size_t y = r.y; y < r.y + r.h; ++y)
        for (std::size_t x = r.x; x < r.x + r.w; ++x) mean += a.at(x, y);
      mean /= n;
      for (std::size_t y = r.y; y < r.y + r.h; ++y)
        for (std::size_t x = r.x; x < r.x + r.w; ++x) var += (a.at(x, y) - mean) * (a.at(x, y) - mean);
      return std::pair(mean, var / n);
    };
    const auto [mp, vp] = stats(p);
    const auto [mq, vq] = stats(q);
    double ma = 0, mb = 0;
    for (std::size_t s = 0; s < 64; ++s) ma += a[s], mb += b[s];
    ma /= 64, mb /= 64;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t s = 0; s < 64; ++s) {
      sab += (a[s] - ma) * (b[s] - mb);
      saa += (a[s] - ma) * (a[s] - ma);
      sbb += (b[s] - mb) * (b[s] - mb);
    }
    const double errs[] = {
        std::abs(correlation_coefficient(a, b) - sab / std::sqrt(saa * sbb)),
        std::abs(snr_db(a, p) - 20 * std::log10(mp / std::sqrt(vp))),
        std::abs(cnr_db(a, p, q) - 20 * std::log10(std::abs(mp - mq) / std::sqrt(vq))),
        std::abs(cv(a, p) - std::sqrt(vp) / mp),
        std::abs(fisher_criterion(a, p, q) - (mp - mq) * (mp - mq) / (vp + vq)),
    };
    for (double e : errs) worst_formula = std::max(worst_formula, e);
  }

  auto phi = [](double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); };
  double worst_pe = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double mu = 0.3 * k - 1.0, sd = 0.2 + 0.25 * k, delta = 0.1 + 0.45 * k;
    const std::vector<double> cp{mu - sd, mu + sd, mu - sd, mu + sd};
    const std::vector<double> cb{mu + delta - sd, mu + delta + sd, mu + delta - sd, mu + delta + sd};
    worst_pe = std::max(worst_pe, std::abs(probability_of_error(cp, cb) - phi(-delta / (2 * sd))));
  }

  const std::vector<double> d{1, 1, 1, 2, 2, 2, 3, 3, 3, 2, 2, 1, 1, 2};
  std::vector<double> before(d.size(), 5.0), after(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) after[i] = before[i] + d[i];
  double mean = 0, ss = 0;
  for (double x : d) mean += x;
  mean /= double(d.size());
  for (double x : d) ss += (x - mean) * (x - mean);
  const double z = mean / std::sqrt(ss / double(d.size() - 1) / double(d.size()));
  const double p_err = std::abs(paired_p_value(before, after) - 2.0 * (1.0 - phi(std::abs(z))));

  return {worst_formula <= 1e-10 && worst_pe <= 1e-4 && p_err <= 1e-10,
          fmt("formula max err %.1e, P(e) max err %.1e, p-value err %.1e", worst_formula, worst_pe, p_err)};
}

Outcome criterion8() {
  const double sigma = 1.0;
  const Image zero({1000, 1000}, 0.0);
  const Image out0 = apply_rician_noise(zero, {sigma, 8});
  const double rayleigh = sigma * std::sqrt(std::numbers::pi / 2.0);
  const double mean_err = std::abs(out0.mean() - rayleigh) / rayleigh;
  double worst_m2 = 0.0;
  for (double a : {0.0, 1.0, 3.0}) {
    const Image out = apply_rician_noise(Image({1000, 1000}, a), {sigma, 9});
    double m2 = 0.0;
    for (double x : out.values()) m2 += x * x;
    m2 /= double(out.size());
    worst_m2 = std::max(worst_m2, std::abs(m2 - (a * a + 2 * sigma * sigma)) / (a * a + 2 * sigma * sigma));
  }
  return {mean_err < 0.01 && worst_m2 < 0.01,
          fmt("mean rel err %.2e at A=0; worst second-moment rel err %.2e (A in {0,1,3})", mean_err, worst_m2)};
}

// ---------------------------------------------------------------------------

int run_exe(const std::string& threads, const std::string& args) {
  const std::string cmd =
      "NCBC_THREADS=" + threads + " '" + std::string(NCBC_EXE) + "' " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

Outcome criterion9() {
  testing::TempDir root("accept9");
  const std::vector<std::pair<std::string, std::string>> runs = {{"a", "1"}, {"b", "1"}, {"c", "4"}, {"d", "0"}};
  for (const auto& [tag, threads] : runs) {
    // Reports record input paths, so every run works in the same directory.
    const fs::path d = root / "work";
    fs::create_directories(d);
    int rc = 0;
    for (int c = 1; c <= 3; ++c) {
      rc |= run_exe(threads, "phantom --testcard 48x40 --seed " + std::to_string(c) + " --out-dir " +
                                 q(d / ("case" + std::to_string(c))));
    }
    const fs::path obs = d / "case1" / "observed.raw";
    rc |= run_exe(threads, "correct --input " + q(obs) + " --seed 7 --method ncbc --out-image " +
                               q(d / "ncbc.raw") + " --out-bias " + q(d / "ncbc_bias.raw") + " --diagnostics " +
                               q(d / "ncbc.json"));
    rc |= run_exe(threads, "correct --input " + q(obs) + " --method lowpass --out-image " + q(d / "lp.pgm") +
                               " --diagnostics " + q(d / "lp.json"));
    rc |= run_exe(threads, "evaluate --image " + q(d / "ncbc.raw") + " --truth " + q(d / "case1" / "truth.raw") +
                               " --rois " + q(d / "case1" / "rois.json") + " --report " + q(d / "eval.json"));
    rc |= run_exe(threads, "compare --inputs " + q(d / "case*" / "observed.raw") + " --seed 3 --rois " +
                               q(d / "case1" / "rois.json") + " --report " + q(d / "compare.json"));
    if (rc != 0) return {false, "pipeline command failed with NCBC_THREADS=" + threads};
    fs::rename(d, root / tag);
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root / "a"));
  }
  std::sort(files.begin(), files.end());
  std::size_t mismatches = 0;
  for (const auto& f : files) {
    const auto ref = testing::read_bytes(root / "a" / f);
    for (const char* tag : {"b", "c", "d"}) mismatches += testing::read_bytes(root / tag / f) != ref ? 1 : 0;
  }
  return {mismatches == 0 && files.size() >= 20,
          fmt("%zu output files compared across 4 runs (NCBC_THREADS 1,1,4,auto), %zu mismatches", files.size(),
              mismatches)};
}

Outcome criterion10() {
  testing::TempDir root("accept10");
  const double noise[] = {0.03, 0.05, 0.08};
  const double gain_min[] = {0.3, 0.5, 0.7, 0.4};
  std::ostringstream sink;
  for (int c = 0; c < 14; ++c) {
    const std::vector<std::string> args = {
        "ncbc",       "phantom",
        "--testcard", "64x64",
        "--seed",     std::to_string(100 + c),
        "--noise-sigma", fmt("%.4f", noise[c % 3] * 0.85),
        "--gain-min", fmt("%.2f", gain_min[c % 4]),
        "--out-dir",  (root / fmt("case%02d", c)).string()};
    if (cli::run(args, sink, sink) != 0) return {false, "phantom generation failed"};
  }
  const fs::path report = root / "compare.json";
  const std::vector<std::string> args = {"ncbc",  "compare", "--inputs", (root / "case*" / "observed.raw").string(),
                                         "--methods", "ncbc,lowpass,none", "--rois",
                                         (root / "case00" / "rois.json").string(), "--report", report.string()};
  if (cli::run(args, sink, sink) != 0) return {false, "compare failed: " + sink.str()};
  const auto bytes = testing::read_bytes(report);
  const json doc = json::parse(bytes.begin(), bytes.end());
  const double p_ncbc = doc["p_values"]["ncbc"]["snr_db"];
  const double p_lp = doc["p_values"]["lowpass"]["snr_db"];
  return {p_ncbc < 0.05 && p_ncbc < p_lp, fmt("SNR paired p-value NCBC %.3e, lowpass %.3e (n=14)", p_ncbc, p_lp)};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},  {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10},
  };
  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
  }
  return failures;
}
