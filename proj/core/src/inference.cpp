#include "ncbc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ncbc/error.hpp"
#include "ncbc/random.hpp"
#include "ncbc/smoothing.hpp"

namespace ncbc {
namespace {

constexpr double kBiasFloor = 1e-6;
constexpr double kRelFloor = 1e-12;

void require_valid_observation(const ObservedImage& v) {
  if (v.width() < 2 || v.height() < 2) {
    throw DataError("observation must be at least 2x2, got " + to_string(v.dims()));
  }
  for (std::size_t s = 0; s < v.size(); ++s) {
    if (!std::isfinite(v[s])) throw DataError("observation has a non-finite value at node " + std::to_string(s));
    if (v[s] < 0.0) throw DataError("observation has a negative value at node " + std::to_string(s));
  }
}

BiasField lowpass_bias(const ObservedImage& v, double sigma) {
  BiasField b = gaussian_smooth(v, sigma);
  for (double& x : b.values()) x = std::max(x, kBiasFloor);
  const double mean = b.mean();
  for (double& x : b.values()) x /= mean;
  return b;
}

LatentImage divide(const ObservedImage& v, const BiasField& b) {
  LatentImage m(v.dims());
  for (std::size_t s = 0; s < v.size(); ++s) m[s] = v[s] / b[s];
  return m;
}

struct State {
  LatentImage m;
  BiasField b;
};

class Solver {
 public:
  Solver(const ObservedImage& vn, const NcbcConfig& cfg, const ExecOptions& exec)
      : vn_(vn), cfg_(cfg), exec_(exec), mu1_(cfg.mu1), mu2_(cfg.mu2) {}

  void run(State& st, Diagnostics& diag) {
    rebuild_graph(0);
    double energy = model_->total(st.m, st.b);
    diag.initial_energy = energy;
    diag.graph_edge_count = graph_.edge_count();

    LatentImage gu;
    LatentImage gp;
    for (std::size_t t = 1; t <= cfg_.max_iters; ++t) {
      if (cfg_.clique.resample_each_iteration && t > 1) {
        rebuild_graph(t - 1);
        energy = model_->total(st.m, st.b);
      }
      const double before = energy;
      bool moved = false;

      // M half-step, B fixed.
      model_->grad_m_terms(st.m, st.b, gu, gp);
      for (int attempt = 0; attempt < 2; ++attempt) {
        LatentImage cand(st.m.dims());
        for (std::size_t s = 0; s < cand.size(); ++s) {
          cand[s] = std::max(0.0, st.m[s] - mu1_ * (cfg_.rho * gu[s] + cfg_.eta * gp[s]));
        }
        const double e = model_->total(cand, st.b);
        if (e <= energy) {
          st.m = std::move(cand);
          energy = e;
          moved = true;
          break;
        }
        mu1_ *= 0.5;
        ++diag.rejected_steps;
      }

      // B half-step, M fixed, followed by mean(B) = 1.
      const BiasField gb = model_->grad_b(st.m, st.b);
      for (int attempt = 0; attempt < 2; ++attempt) {
        BiasField cand(st.b.dims());
        for (std::size_t s = 0; s < cand.size(); ++s) {
          cand[s] = std::max(kBiasFloor, st.b[s] - mu2_ * gb[s]);
        }
        auto [nb, nm] = normalize_bias(cand, st.m);
        const double e = model_->total(nm, nb);
        if (e <= energy) {
          st.b = std::move(nb);
          st.m = std::move(nm);
          energy = e;
          moved = true;
          break;
        }
        mu2_ *= 0.5;
        ++diag.rejected_steps;
      }

      diag.energy_trace.push_back(energy);
      diag.iters_run = t;
      diag.final_rel_change = std::abs(before - energy) / std::max(before, kRelFloor);
      if (moved && diag.final_rel_change < cfg_.rel_tol) {
        diag.converged = true;
        break;
      }
    }
    diag.final_mu1 = mu1_;
    diag.final_mu2 = mu2_;
  }

 private:
  void rebuild_graph(std::size_t round) {
    const std::uint64_t seed = round == 0 ? cfg_.seed : hash_key(cfg_.seed, round, 0x5eed);
    model_.reset();
    graph_ = build_stochastic_graph(vn_.dims(), cfg_.clique, seed);
    model_.emplace(vn_, graph_, cfg_.weights, exec_.workers);
  }

  const ObservedImage& vn_;
  const NcbcConfig& cfg_;
  ExecOptions exec_;
  double mu1_;
  double mu2_;
  StochasticGraph graph_;
  std::optional<EnergyModel> model_;
};

NcbcResult reconstruct_impl(const ObservedImage& v, const NcbcConfig& cfg,
                            const InitialState* init, const ExecOptions& exec) {
  cfg.validate();
  require_valid_observation(v);

  NcbcResult result;
  result.diagnostics.seed = cfg.seed;
  const double scale = v.max();
  if (scale == 0.0) {
    result.latent = LatentImage(v.dims(), 0.0);
    result.bias = BiasField(v.dims(), 1.0);
    result.diagnostics.converged = true;
    result.diagnostics.intensity_scale = 0.0;
    result.diagnostics.final_mu1 = cfg.mu1;
    result.diagnostics.final_mu2 = cfg.mu2;
    return result;
  }

  ObservedImage vn(v.dims());
  for (std::size_t s = 0; s < v.size(); ++s) vn[s] = v[s] / scale;

  State st;
  if (init != nullptr) {
    require_same_dims(init->latent, v, "initial latent image");
    require_same_dims(init->bias, v, "initial bias field");
    LatentImage m0(v.dims());
    for (std::size_t s = 0; s < v.size(); ++s) m0[s] = init->latent[s] / scale;
    auto [b, m] = normalize_bias(init->bias, m0);
    st.b = std::move(b);
    st.m = std::move(m);
  } else if (cfg.bias_init == BiasInit::lowpass_ratio) {
    const double sigma =
        cfg.init_kernel_sigma > 0.0 ? cfg.init_kernel_sigma : default_init_kernel_sigma(v.dims());
    st.b = lowpass_bias(vn, sigma);
    st.m = divide(vn, st.b);
  } else {
    st.b = BiasField(v.dims(), 1.0);
    st.m = vn;
  }

  Solver solver(vn, cfg, exec);
  solver.run(st, result.diagnostics);
  result.diagnostics.intensity_scale = scale;

  result.latent = std::move(st.m);
  for (double& x : result.latent.values()) x *= scale;
  result.bias = std::move(st.b);
  return result;
}

}  // namespace

void NcbcConfig::validate() const {
  weights.validate();
  clique.validate();
  auto rate = [](double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw ConfigError(std::string(name) + " must be a positive finite rate");
    }
  };
  rate(mu1, "mu1");
  rate(mu2, "mu2");
  rate(rho, "rho");
  rate(eta, "eta");
  if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ConfigError("rel_tol must lie in (0, 1)");
  if (!(init_kernel_sigma >= 0.0) || !std::isfinite(init_kernel_sigma)) {
    throw ConfigError("init_kernel_sigma must be finite and >= 0");
  }
}

double default_init_kernel_sigma(const LatticeDims& dims) {
  return static_cast<double>(std::max(dims.width, dims.height)) / 4.0;
}

NcbcResult ncbc_reconstruct(const ObservedImage& v, const NcbcConfig& cfg, const ExecOptions& exec) {
  return reconstruct_impl(v, cfg, nullptr, exec);
}

NcbcResult ncbc_reconstruct(const ObservedImage& v, const NcbcConfig& cfg,
                            const InitialState& init, const ExecOptions& exec) {
  return reconstruct_impl(v, cfg, &init, exec);
}

std::pair<BiasField, LatentImage> normalize_bias(const BiasField& b, const LatentImage& m) {
  require_same_dims(b, m, "normalize_bias");
  const double mean = b.mean();
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw DegeneracyError("bias field mean must be positive to normalize, got " + std::to_string(mean));
  }
  BiasField nb(b.dims());
  LatentImage nm(m.dims());
  for (std::size_t s = 0; s < b.size(); ++s) {
    nb[s] = b[s] / mean;
    nm[s] = m[s] * mean;
  }
  return {std::move(nb), std::move(nm)};
}

NcbcResult lowpass_baseline(const ObservedImage& v, double kernel_sigma) {
  if (!(kernel_sigma > 0.0) || !std::isfinite(kernel_sigma)) {
    throw ConfigError("lowpass kernel_sigma must be a positive finite number");
  }
  require_valid_observation(v);
  NcbcResult result;
  result.bias = lowpass_bias(v, kernel_sigma);
  result.latent = divide(v, result.bias);
  result.diagnostics.converged = true;
  result.diagnostics.intensity_scale = 1.0;
  return result;
}

}  // namespace ncbc
