#include "ncbc/lattice_graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ncbc/error.hpp"
#include "ncbc/random.hpp"

namespace ncbc {
namespace {

// Pairs less likely than this are never drawn.
constexpr double kMinInclusion = 1e-12;

struct Candidate {
  std::uint32_t a;
  std::uint32_t b;
  double distance;
};

bool is_local(long dx, long dy) { return dx * dx + dy * dy == 1; }

}  // namespace

void CliqueConfig::validate() const {
  if (!(base_prob >= 0.0 && base_prob <= 1.0)) {
    throw ConfigError("clique.base_prob must lie in [0, 1], got " + std::to_string(base_prob));
  }
  if (!(spatial_sigma > 0.0) || !std::isfinite(spatial_sigma)) {
    throw ConfigError("clique.spatial_sigma must be a positive finite number, got " +
                      std::to_string(spatial_sigma));
  }
  if (max_degree < 4) {
    throw ConfigError("clique.max_degree must be at least 4, got " + std::to_string(max_degree));
  }
}

double CliqueConfig::inclusion_probability(double distance) const noexcept {
  return base_prob * std::exp(-(distance * distance) / (2.0 * spatial_sigma * spatial_sigma));
}

std::span<const Neighbor> StochasticGraph::neighbors(std::size_t s) const {
  if (s >= dims_.size()) {
    throw IndexError("node " + std::to_string(s) + " outside lattice " + to_string(dims_));
  }
  return std::span<const Neighbor>(adjacency_).subspan(offsets_[s], offsets_[s + 1] - offsets_[s]);
}

StochasticGraph build_stochastic_graph(const LatticeDims& dims, const CliqueConfig& cfg,
                                       std::uint64_t seed) {
  dims.validate();
  cfg.validate();

  const long width = static_cast<long>(dims.width);
  const long height = static_cast<long>(dims.height);
  const std::size_t n = dims.size();

  // Window beyond which inclusion probability drops under kMinInclusion.
  long radius = 1;
  if (cfg.base_prob > kMinInclusion) {
    const double r = cfg.spatial_sigma * std::sqrt(2.0 * std::log(cfg.base_prob / kMinInclusion));
    radius = std::max(1L, static_cast<long>(std::ceil(r)));
  }
  radius = std::min(radius, std::max(width, height));

  // Forward offsets only: each unordered pair is visited once from its lower node.
  struct Offset {
    long dx, dy;
    double distance, probability;
    bool local;
  };
  std::vector<Offset> offsets;
  for (long dy = 0; dy <= radius; ++dy) {
    for (long dx = -radius; dx <= radius; ++dx) {
      if (dy == 0 && dx <= 0) continue;
      const double d = std::sqrt(static_cast<double>(dx * dx + dy * dy));
      const bool local = is_local(dx, dy);
      const double p = (local && cfg.include_local_4) ? 1.0 : cfg.inclusion_probability(d);
      if (!local && p < kMinInclusion) continue;
      offsets.push_back({dx, dy, d, p, local && cfg.include_local_4});
    }
  }

  std::vector<Candidate> local_edges;
  std::vector<Candidate> sampled;
  for (long y = 0; y < height; ++y) {
    for (long x = 0; x < width; ++x) {
      const auto s = static_cast<std::uint32_t>(y * width + x);
      for (const Offset& o : offsets) {
        const long tx = x + o.dx;
        const long ty = y + o.dy;
        if (tx < 0 || tx >= width || ty >= height) continue;
        const auto t = static_cast<std::uint32_t>(ty * width + tx);
        if (o.local) {
          local_edges.push_back({s, t, o.distance});
        } else if (o.probability > 0.0 && to_unit(hash_key(seed, s, t)) < o.probability) {
          sampled.push_back({s, t, o.distance});
        }
      }
    }
  }

  // Nearest-first degree cap, applied from both endpoints.
  std::vector<std::vector<std::pair<double, std::uint32_t>>> partners(n);
  for (const Candidate& c : sampled) {
    partners[c.a].push_back({c.distance, c.b});
    partners[c.b].push_back({c.distance, c.a});
  }
  std::vector<std::vector<std::uint32_t>> kept(n);
  for (std::size_t s = 0; s < n; ++s) {
    auto& list = partners[s];
    if (list.size() > cfg.max_degree) {
      std::sort(list.begin(), list.end());
      list.resize(cfg.max_degree);
    }
    kept[s].reserve(list.size());
    for (const auto& p : list) kept[s].push_back(p.second);
    std::sort(kept[s].begin(), kept[s].end());
    std::vector<std::pair<double, std::uint32_t>>().swap(list);
  }
  auto keeps = [&](std::uint32_t s, std::uint32_t t) {
    return std::binary_search(kept[s].begin(), kept[s].end(), t);
  };

  StochasticGraph g;
  g.dims_ = dims;
  g.config_ = cfg;
  g.seed_ = seed;
  g.edges_.reserve(local_edges.size() + sampled.size());
  for (const Candidate& c : local_edges) g.edges_.push_back({c.a, c.b, c.distance});
  for (const Candidate& c : sampled) {
    if (keeps(c.a, c.b) && keeps(c.b, c.a)) g.edges_.push_back({c.a, c.b, c.distance});
  }
  std::sort(g.edges_.begin(), g.edges_.end(),
            [](const Edge& l, const Edge& r) { return l.a != r.a ? l.a < r.a : l.b < r.b; });

  g.offsets_.assign(n + 1, 0);
  for (const Edge& e : g.edges_) {
    ++g.offsets_[e.a + 1];
    ++g.offsets_[e.b + 1];
  }
  for (std::size_t s = 0; s < n; ++s) g.offsets_[s + 1] += g.offsets_[s];
  g.adjacency_.resize(g.offsets_[n]);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (std::size_t i = 0; i < g.edges_.size(); ++i) {
    const Edge& e = g.edges_[i];
    const auto id = static_cast<std::uint32_t>(i);
    g.adjacency_[cursor[e.a]++] = {e.b, e.distance, id};
    g.adjacency_[cursor[e.b]++] = {e.a, e.distance, id};
  }
  for (std::size_t s = 0; s < n; ++s) {
    std::sort(g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[s]),
              g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[s + 1]),
              [](const Neighbor& l, const Neighbor& r) { return l.node < r.node; });
  }

  g.row_offsets_.assign(dims.height + 1, g.edges_.size());
  g.row_offsets_[0] = 0;
  {
    std::size_t i = 0;
    for (std::size_t y = 0; y < dims.height; ++y) {
      g.row_offsets_[y] = i;
      const std::size_t row_end = (y + 1) * dims.width;
      while (i < g.edges_.size() && g.edges_[i].a < row_end) ++i;
    }
    g.row_offsets_[dims.height] = g.edges_.size();
  }
  return g;
}

}  // namespace ncbc
