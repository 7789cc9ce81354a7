#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "herogcn/errors.hpp"
#include "herogcn/matrix.hpp"

namespace herogcn {

/// One cluster/class index per node.
using LabelVector = std::vector<int>;

using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected simple graph with a node attribute matrix. Edges are stored once
/// as (i, j) with i < j, sorted; self-loops and duplicates are dropped on
/// construction.
template <std::floating_point T>
class AttributedGraph {
 public:
  AttributedGraph() = default;

  AttributedGraph(std::size_t n, std::vector<Edge> edges, Matrix<T> attributes)
      : n_(n), attributes_(std::move(attributes)) {
    if (attributes_.rows() != n_) {
      throw ShapeError("attribute matrix has " + std::to_string(attributes_.rows()) + " rows for " +
                       std::to_string(n_) + " nodes");
    }
    std::size_t self_loops = 0;
    edges_.reserve(edges.size());
    for (auto [i, j] : edges) {
      if (i >= n_ || j >= n_) {
        throw ConfigError("edge (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range for " +
                          std::to_string(n_) + " nodes");
      }
      if (i == j) {
        ++self_loops;
        continue;
      }
      edges_.emplace_back(std::min(i, j), std::max(i, j));
    }
    std::sort(edges_.begin(), edges_.end());
    const auto before = edges_.size();
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    if (before != edges_.size()) warn("dropped " + std::to_string(before - edges_.size()) + " duplicate edge(s)");
    if (self_loops > 0) warn("dropped " + std::to_string(self_loops) + " self-loop(s)");

    degrees_.assign(n_, 0);
    neighbors_.assign(n_, {});
    for (auto [i, j] : edges_) {
      ++degrees_[i];
      ++degrees_[j];
      neighbors_[i].push_back(j);
      neighbors_[j].push_back(i);
    }
  }

  std::size_t node_count() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::size_t attribute_dim() const noexcept { return attributes_.cols(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::size_t>& degrees() const noexcept { return degrees_; }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_.at(i); }
  const Matrix<T>& attributes() const noexcept { return attributes_; }

  /// Dense 0/1 adjacency matrix A (no self-loops).
  Matrix<T> adjacency() const {
    Matrix<T> a(n_, n_);
    for (auto [i, j] : edges_) a(i, j) = a(j, i) = T{1};
    return a;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> degrees_;
  std::vector<std::vector<std::size_t>> neighbors_;
  Matrix<T> attributes_;
};

/// Â = D̃^{-1/2} (A + I) D̃^{-1/2}, dense and symmetric.
template <std::floating_point T>
class NormalizedAdjacency {
 public:
  explicit NormalizedAdjacency(Matrix<T> m) : m_(std::move(m)) {}
  const Matrix<T>& matrix() const noexcept { return m_; }
  std::size_t size() const noexcept { return m_.rows(); }

 private:
  Matrix<T> m_;
};

template <std::floating_point T>
NormalizedAdjacency<T> normalize(const AttributedGraph<T>& g) {
  const std::size_t n = g.node_count();
  if (n == 0) throw ConfigError("cannot normalize an empty graph");
  std::vector<T> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = T{1} / std::sqrt(static_cast<T>(g.degrees()[i] + 1));
  Matrix<T> a(n, n);
  for (std::size_t i = 0; i < n; ++i) a(i, i) = inv_sqrt[i] * inv_sqrt[i];
  for (auto [i, j] : g.edges()) a(i, j) = a(j, i) = inv_sqrt[i] * inv_sqrt[j];
  return NormalizedAdjacency<T>(std::move(a));
}

/// k-nearest-neighbour graph under cosine similarity, union-symmetrized.
/// Rows with zero norm have similarity 0 to everything; ties go to the lower index.
template <std::floating_point T>
AttributedGraph<T> knn_graph(const Matrix<T>& attributes, std::size_t k) {
  const std::size_t n = attributes.rows();
  if (k < 1 || k >= n) {
    throw ConfigError("knn_graph needs 1 <= k < n, got k=" + std::to_string(k) + " n=" + std::to_string(n));
  }
  std::vector<T> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    T s{0};
    for (T v : attributes.row(i)) s += v * v;
    norms[i] = std::sqrt(s);
  }
  std::vector<Edge> edges;
  edges.reserve(n * k);
  std::vector<std::pair<T, std::size_t>> sims;
  sims.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    sims.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      T s{0};
      if (norms[i] > T{0} && norms[j] > T{0}) {
        const auto ri = attributes.row(i), rj = attributes.row(j);
        for (std::size_t c = 0; c < ri.size(); ++c) s += ri[c] * rj[c];
        s /= norms[i] * norms[j];
      }
      sims.emplace_back(s, j);
    }
    std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k), sims.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    for (std::size_t r = 0; r < k; ++r) edges.emplace_back(i, sims[r].second);
  }
  // Mutual neighbours produce the same pair twice; dedupe silently.
  for (auto& e : edges) e = {std::min(e.first, e.second), std::max(e.first, e.second)};
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return AttributedGraph<T>(n, std::move(edges), attributes);
}

struct SbmOptions {
  std::size_t blocks = 3;
  std::size_t per_block = 50;
  double p_in = 0.3;
  double p_out = 0.01;
  double noise = 0.1;
  std::uint64_t seed = 0;
};

template <std::floating_point T>
struct LabeledGraph {
  AttributedGraph<T> graph;
  LabelVector labels;
};

/// Stochastic block model with one-hot block attributes plus Gaussian noise.
template <std::floating_point T>
LabeledGraph<T> sbm_generate(const SbmOptions& o) {
  if (o.blocks < 1 || o.per_block < 1 || o.blocks * o.per_block < 2) {
    throw ConfigError("sbm_generate: need at least two nodes (blocks=" + std::to_string(o.blocks) +
                      ", per_block=" + std::to_string(o.per_block) + ")");
  }
  if (!(o.p_out >= 0.0 && o.p_out < o.p_in && o.p_in <= 1.0)) {
    throw ConfigError("sbm_generate: need 0 <= p_out < p_in <= 1");
  }
  if (!(o.noise >= 0.0)) throw ConfigError("sbm_generate: noise must be nonnegative");

  const std::size_t n = o.blocks * o.per_block;
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  LabelVector labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i / o.per_block);

  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = labels[i] == labels[j] ? o.p_in : o.p_out;
      if (unif(rng) < p) edges.emplace_back(i, j);
    }

  Matrix<T> x(n, o.blocks);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < o.blocks; ++c) {
      const double base = static_cast<std::size_t>(labels[i]) == c ? 1.0 : 0.0;
      x(i, c) = static_cast<T>(o.noise > 0.0 ? base + o.noise * gauss(rng) : base);
    }
  return {AttributedGraph<T>(n, std::move(edges), std::move(x)), std::move(labels)};
}

}  // namespace herogcn
