#pragma once

#include <vector>

#include "ncbc/image.hpp"
#include "ncbc/lattice_graph.hpp"

namespace ncbc {

// Weights of the joint energy
//   E = sum_s a_u (v_s - m_s b_s)^2
//     + sum_{(s,s') in C} [ a_p w(s,s') (m_s - m_s')^2 + a_b (b_s - b_s')^2 ]
// with w(s,s') = exp(-(v_s - v_s')^2 / 2 sigma_i^2) * exp(-d^2 / 2 sigma_d^2).
struct EnergyWeights {
  double alpha_u = 1.0;
  // One weight per pairwise feature family on M. Exactly one family is defined.
  std::vector<double> alpha_p{10.0};
  // Intensity bandwidth of w. +inf disables the intensity factor.
  double intensity_sigma = 0.1;
  double bias_smooth_weight = 100.0;

  void validate() const;

  friend bool operator==(const EnergyWeights&, const EnergyWeights&) = default;
};

// Energy of one observation over one clique set. Precomputes the per-edge
// affinities w(s,s'), which depend only on V and the graph.
//
// Reductions are per-row partial sums combined in row order, and gradients
// gather over index-sorted neighbors, so results are bit-identical for any
// worker count. Holds references to `v` and `graph`; both must outlive it.
class EnergyModel {
 public:
  EnergyModel(const ObservedImage& v, const StochasticGraph& graph, const EnergyWeights& w,
              unsigned workers = 1);
  EnergyModel(ObservedImage&&, const StochasticGraph&, const EnergyWeights&, unsigned = 1) = delete;
  EnergyModel(const ObservedImage&, StochasticGraph&&, const EnergyWeights&, unsigned = 1) = delete;

  double unary(const LatentImage& m, const BiasField& b) const;
  double pairwise(const LatentImage& m, const BiasField& b) const;
  double total(const LatentImage& m, const BiasField& b) const;

  LatentImage grad_m(const LatentImage& m, const BiasField& b) const;
  BiasField grad_b(const LatentImage& m, const BiasField& b) const;

  // dE_u/dm and dE_p/dm separately; the M update weighs them with their own rates.
  void grad_m_terms(const LatentImage& m, const BiasField& b, LatentImage& unary_part,
                    LatentImage& pairwise_part) const;

  const std::vector<double>& affinities() const noexcept { return affinity_; }
  const ObservedImage& observed() const noexcept { return *v_; }
  const StochasticGraph& graph() const noexcept { return *graph_; }
  const EnergyWeights& weights() const noexcept { return weights_; }

 private:
  void check(const LatentImage& m, const BiasField& b) const;

  const ObservedImage* v_;
  const StochasticGraph* graph_;
  EnergyWeights weights_;
  unsigned workers_;
  std::vector<double> affinity_;
};

double unary_energy(const LatentImage& m, const BiasField& b, const ObservedImage& v,
                    const EnergyWeights& w);
double pairwise_energy(const LatentImage& m, const BiasField& b, const ObservedImage& v,
                       const StochasticGraph& graph, const EnergyWeights& w);
double total_energy(const LatentImage& m, const BiasField& b, const ObservedImage& v,
                    const StochasticGraph& graph, const EnergyWeights& w);
LatentImage grad_m(const LatentImage& m, const BiasField& b, const ObservedImage& v,
                   const StochasticGraph& graph, const EnergyWeights& w);
BiasField grad_b(const LatentImage& m, const BiasField& b, const ObservedImage& v,
                 const StochasticGraph& graph, const EnergyWeights& w);

}  // namespace ncbc
