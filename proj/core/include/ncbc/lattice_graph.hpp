#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ncbc/image.hpp"

namespace ncbc {

// Distribution of the stochastic pairwise cliques. A non-local pair (s, s')
// at distance d is kept with probability base_prob * exp(-d^2 / (2 sigma^2)).
struct CliqueConfig {
  double base_prob = 0.5;
  double spatial_sigma = 2.0;
  // Cap on sampled (non-local) partners per node; nearest partners win.
  std::size_t max_degree = 16;
  bool include_local_4 = true;
  bool resample_each_iteration = false;

  void validate() const;
  double inclusion_probability(double distance) const noexcept;

  friend bool operator==(const CliqueConfig&, const CliqueConfig&) = default;
};

struct Edge {
  std::uint32_t a;  // a < b
  std::uint32_t b;
  double distance;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
  std::uint32_t node;
  double distance;
  std::uint32_t edge;  // index into StochasticGraph::edges()
};

// Immutable sampled clique set over a lattice. Edges are sorted by (a, b);
// the adjacency of each node is sorted by partner index.
class StochasticGraph {
 public:
  StochasticGraph() = default;

  const LatticeDims& dims() const noexcept { return dims_; }
  const CliqueConfig& config() const noexcept { return config_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double spatial_sigma() const noexcept { return config_.spatial_sigma; }

  std::span<const Edge> edges() const noexcept { return edges_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  // Throws IndexError when s is outside the lattice.
  std::span<const Neighbor> neighbors(std::size_t s) const;
  std::size_t degree(std::size_t s) const { return neighbors(s).size(); }

  // Edges whose lower endpoint lies in row y, as a half-open range into edges().
  std::pair<std::size_t, std::size_t> row_edge_range(std::size_t y) const noexcept {
    return {row_offsets_[y], row_offsets_[y + 1]};
  }

  friend StochasticGraph build_stochastic_graph(const LatticeDims& dims, const CliqueConfig& cfg,
                                                std::uint64_t seed);

 private:
  LatticeDims dims_{};
  CliqueConfig config_{};
  std::uint64_t seed_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
  std::vector<std::size_t> row_offsets_;
};

// Deterministic in (dims, cfg, seed): each pair draws from a counter-based hash
// so the result does not depend on traversal order.
StochasticGraph build_stochastic_graph(const LatticeDims& dims, const CliqueConfig& cfg,
                                       std::uint64_t seed);

}  // namespace ncbc
