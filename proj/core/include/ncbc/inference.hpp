#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ncbc/energy.hpp"
#include "ncbc/image.hpp"
#include "ncbc/lattice_graph.hpp"

namespace ncbc {

enum class BiasInit { uniform_one, lowpass_ratio };

// Every model, optimizer and sampling parameter of one reconstruction.
//
// The solver runs on V / max(V), so intensity_sigma and the energies in the
// diagnostics are in normalized-intensity units. Rates:
//   M step: m <- m - mu1 * (rho * dE_u/dm + eta * dE_p/dm)
//   B step: b <- b - mu2 * dE/db
struct NcbcConfig {
  EnergyWeights weights{};
  CliqueConfig clique{};
  double mu1 = 0.005;
  double mu2 = 0.0002;
  double rho = 1.0;
  double eta = 1.0;
  std::size_t max_iters = 500;
  double rel_tol = 1e-5;
  BiasInit bias_init = BiasInit::lowpass_ratio;
  // Kernel width of the lowpass_ratio initializer; 0 selects max(W, H) / 4.
  double init_kernel_sigma = 0.0;
  std::uint64_t seed = 0;
  // Acquisition b-values (s/mm^2) carried through to reports; not used by the solver.
  std::vector<double> annotated_b_values{100.0, 400.0, 1000.0};

  void validate() const;

  friend bool operator==(const NcbcConfig&, const NcbcConfig&) = default;
};

struct Diagnostics {
  // Total energy after each iteration; energy_trace[0] follows iteration 1.
  std::vector<double> energy_trace;
  double initial_energy = 0.0;
  std::size_t iters_run = 0;
  bool converged = false;
  double final_rel_change = 0.0;
  std::uint64_t seed = 0;
  std::size_t graph_edge_count = 0;
  double intensity_scale = 1.0;
  double final_mu1 = 0.0;
  double final_mu2 = 0.0;
  std::size_t rejected_steps = 0;
};

struct NcbcResult {
  LatentImage latent;
  BiasField bias;
  Diagnostics diagnostics;
};

// Optional starting point in the observation's intensity units.
struct InitialState {
  LatentImage latent;
  BiasField bias;
};

struct ExecOptions {
  unsigned workers = 1;
};

// Alternating projected gradient descent on E(B, V, M): a Jacobi M half-step
// with B fixed, then a Jacobi B half-step with M fixed, then mean(B) = 1
// renormalization. A half-step that raises E halves its rate and is retried
// once; if it still raises E it is dropped, so the energy trace never rises.
NcbcResult ncbc_reconstruct(const ObservedImage& v, const NcbcConfig& cfg,
                            const ExecOptions& exec = {});
NcbcResult ncbc_reconstruct(const ObservedImage& v, const NcbcConfig& cfg,
                            const InitialState& init, const ExecOptions& exec = {});

// Rescales (B, M) to (B / mean(B), M * mean(B)). Throws DegeneracyError when
// mean(B) <= 0.
std::pair<BiasField, LatentImage> normalize_bias(const BiasField& b, const LatentImage& m);

// Homomorphic low-pass comparator: B = blur(V) / mean, floored at 1e-6 and
// renormalized; M = V / B.
NcbcResult lowpass_baseline(const ObservedImage& v, double kernel_sigma);

double default_init_kernel_sigma(const LatticeDims& dims);

}  // namespace ncbc
