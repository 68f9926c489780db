#include "ncbc/energy.hpp"

#include <cmath>
#include <string>

#include "ncbc/error.hpp"
#include "parallel.hpp"

namespace ncbc {

void EnergyWeights::validate() const {
  auto nonneg = [](double x) { return std::isfinite(x) && x >= 0.0; };
  if (!nonneg(alpha_u)) throw ConfigError("weights.alpha_u must be finite and >= 0");
  if (alpha_p.size() != 1) {
    throw ConfigError("weights.alpha_p must hold exactly one weight, got " +
                      std::to_string(alpha_p.size()));
  }
  if (!nonneg(alpha_p[0])) throw ConfigError("weights.alpha_p[0] must be finite and >= 0");
  if (!(intensity_sigma > 0.0)) throw ConfigError("weights.intensity_sigma must be > 0");
  if (!nonneg(bias_smooth_weight)) {
    throw ConfigError("weights.bias_smooth_weight must be finite and >= 0");
  }
  if (alpha_u == 0.0 && alpha_p[0] == 0.0 && bias_smooth_weight == 0.0) {
    throw ConfigError("at least one energy weight must be positive");
  }
}

EnergyModel::EnergyModel(const ObservedImage& v, const StochasticGraph& graph,
                         const EnergyWeights& w, unsigned workers)
    : v_(&v), graph_(&graph), weights_(w), workers_(workers) {
  w.validate();
  if (v.dims() != graph.dims()) {
    throw ShapeError("observation " + to_string(v.dims()) + " does not match graph lattice " +
                     to_string(graph.dims()));
  }
  const double ss = graph.spatial_sigma();
  const double is = w.intensity_sigma;
  const auto edges = graph.edges();
  affinity_.resize(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    const double dv = v[e.a] - v[e.b];
    const double intensity = std::isinf(is) ? 1.0 : std::exp(-(dv * dv) / (2.0 * is * is));
    affinity_[i] = intensity * std::exp(-(e.distance * e.distance) / (2.0 * ss * ss));
  }
}

void EnergyModel::check(const LatentImage& m, const BiasField& b) const {
  require_same_dims(m, *v_, "latent image");
  require_same_dims(b, *v_, "bias field");
}

double EnergyModel::unary(const LatentImage& m, const BiasField& b) const {
  check(m, b);
  const LatticeDims& dims = v_->dims();
  std::vector<double> rows(dims.height, 0.0);
  detail::parallel_for(dims.height, workers_, [&](std::size_t y0, std::size_t y1) {
    for (std::size_t y = y0; y < y1; ++y) {
      double acc = 0.0;
      for (std::size_t s = y * dims.width; s < (y + 1) * dims.width; ++s) {
        const double r = (*v_)[s] - m[s] * b[s];
        acc += weights_.alpha_u * r * r;
      }
      rows[y] = acc;
    }
  });
  double total = 0.0;
  for (double r : rows) total += r;
  return total;
}

double EnergyModel::pairwise(const LatentImage& m, const BiasField& b) const {
  check(m, b);
  const LatticeDims& dims = v_->dims();
  const auto edges = graph_->edges();
  const double ap = weights_.alpha_p[0];
  const double ab = weights_.bias_smooth_weight;
  std::vector<double> rows(dims.height, 0.0);
  detail::parallel_for(dims.height, workers_, [&](std::size_t y0, std::size_t y1) {
    for (std::size_t y = y0; y < y1; ++y) {
      const auto [begin, end] = graph_->row_edge_range(y);
      double acc = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        const Edge& e = edges[i];
        const double dm = m[e.a] - m[e.b];
        const double db = b[e.a] - b[e.b];
        acc += ap * affinity_[i] * dm * dm + ab * db * db;
      }
      rows[y] = acc;
    }
  });
  double total = 0.0;
  for (double r : rows) total += r;
  return total;
}

double EnergyModel::total(const LatentImage& m, const BiasField& b) const {
  return unary(m, b) + pairwise(m, b);
}

void EnergyModel::grad_m_terms(const LatentImage& m, const BiasField& b, LatentImage& unary_part,
                               LatentImage& pairwise_part) const {
  check(m, b);
  const LatticeDims& dims = v_->dims();
  if (unary_part.dims() != dims) unary_part = LatentImage(dims);
  if (pairwise_part.dims() != dims) pairwise_part = LatentImage(dims);
  const double au = weights_.alpha_u;
  const double ap = weights_.alpha_p[0];
  detail::parallel_for(dims.size(), workers_, [&](std::size_t s0, std::size_t s1) {
    for (std::size_t s = s0; s < s1; ++s) {
      unary_part[s] = -2.0 * au * b[s] * ((*v_)[s] - m[s] * b[s]);
      double acc = 0.0;
      for (const Neighbor& nb : graph_->neighbors(s)) {
        acc += affinity_[nb.edge] * (m[s] - m[nb.node]);
      }
      pairwise_part[s] = 2.0 * ap * acc;
    }
  });
}

LatentImage EnergyModel::grad_m(const LatentImage& m, const BiasField& b) const {
  LatentImage u;
  LatentImage p;
  grad_m_terms(m, b, u, p);
  for (std::size_t s = 0; s < u.size(); ++s) u[s] += p[s];
  return u;
}

BiasField EnergyModel::grad_b(const LatentImage& m, const BiasField& b) const {
  check(m, b);
  const LatticeDims& dims = v_->dims();
  BiasField g(dims);
  const double au = weights_.alpha_u;
  const double ab = weights_.bias_smooth_weight;
  detail::parallel_for(dims.size(), workers_, [&](std::size_t s0, std::size_t s1) {
    for (std::size_t s = s0; s < s1; ++s) {
      double acc = 0.0;
      for (const Neighbor& nb : graph_->neighbors(s)) acc += b[s] - b[nb.node];
      g[s] = -2.0 * au * m[s] * ((*v_)[s] - m[s] * b[s]) + 2.0 * ab * acc;
    }
  });
  return g;
}

double unary_energy(const LatentImage& m, const BiasField& b, const ObservedImage& v,
                    const EnergyWeights& w) {
  w.validate();
  require_same_dims(m, v, "latent image");
  require_same_dims(b, v, "bias field");
  const LatticeDims& dims = v.dims();
  double total = 0.0;
  for (std::size_t y = 0; y < dims.height; ++y) {
    double acc = 0.0;
    for (std::size_t s = y * dims.width; s < (y + 1) * dims.width; ++s) {
      const double r = v[s] - m[s] * b[s];
      acc += w.alpha_u * r * r;
    }
    total += acc;
  }
  return total;
}

double pairwise_energy(const LatentImage& m, const BiasField& b, const ObservedImage& v,
                       const StochasticGraph& graph, const EnergyWeights& w) {
  return EnergyModel(v, graph, w).pairwise(m, b);
}

double total_energy(const LatentImage& m, const BiasField& b, const ObservedImage& v,
                    const StochasticGraph& graph, const EnergyWeights& w) {
  return EnergyModel(v, graph, w).total(m, b);
}

LatentImage grad_m(const LatentImage& m, const BiasField& b, const ObservedImage& v,
                   const StochasticGraph& graph, const EnergyWeights& w) {
  return EnergyModel(v, graph, w).grad_m(m, b);
}

BiasField grad_b(const LatentImage& m, const BiasField& b, const ObservedImage& v,
                 const StochasticGraph& graph, const EnergyWeights& w) {
  return EnergyModel(v, graph, w).grad_b(m, b);
}

}  // namespace ncbc
