#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "herogcn/autoencoder.hpp"
#include "herogcn/errors.hpp"
#include "herogcn/graph.hpp"
#include "herogcn/kmeans.hpp"
#include "herogcn/matrix.hpp"
#include "herogcn/ops.hpp"
#include "herogcn/tape.hpp"

// Trinary self-supervision: Student-t soft assignments Q, the sharpened target
// P, KL(P||Q), the graph-convolutional clustering head R, KL(P||R) and the
// modularity loss on P.
namespace herogcn {

inline constexpr double kKlDenominatorClamp = 1e-10;

/// Trainable cluster centers μ, K x dim_L.
template <std::floating_point T>
struct ClusterCenters {
  Parameter<T> centers;

  std::size_t clusters() const noexcept { return centers.value.rows(); }
  std::size_t width() const noexcept { return centers.value.cols(); }
};

/// Weight W of R = softmax(Â H̃ W), dim_L x K.
template <std::floating_point T>
struct ClusterHead {
  Parameter<T> weight;
};

template <std::floating_point T, class Rng>
ClusterHead<T> make_cluster_head(std::size_t width, std::size_t clusters, Rng& rng) {
  return {Parameter<T>("head.weight", glorot_uniform<T>(width, clusters, rng))};
}

/// q_ik ∝ (1 + ||e_i - μ_k||²)^-1, rows normalized.
template <std::floating_point T>
Var<T> soft_assign(Var<T> embeddings, Var<T> centers) {
  if (embeddings.cols() != centers.cols()) {
    throw ShapeError("soft_assign: embedding width " + std::to_string(embeddings.cols()) + " vs center width " +
                     std::to_string(centers.cols()));
  }
  return row_normalize(reciprocal(add_scalar(pairwise_sq_dist(embeddings, centers), T{1})));
}

/// p_ik = (q_ik² / f_k) / Σ_k' (q_ik'² / f_k'), f_k = Σ_i q_ik. Constant target.
template <std::floating_point T>
Matrix<T> target_distribution(const Matrix<T>& q) {
  const std::size_t n = q.rows(), k = q.cols();
  std::vector<T> f(k, T{0});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) f[c] += q(i, c);
  for (std::size_t c = 0; c < k; ++c) {
    if (!(f[c] > T{0})) {
      throw ClusterCollapseError(c, "cluster " + std::to_string(c) + " has zero soft-assignment mass");
    }
  }
  Matrix<T> p(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    T z{0};
    for (std::size_t c = 0; c < k; ++c) {
      p(i, c) = q(i, c) * q(i, c) / f[c];
      z += p(i, c);
    }
    if (!(z > T{0})) throw NumericalError("target distribution row " + std::to_string(i) + " has zero mass");
    for (std::size_t c = 0; c < k; ++c) p(i, c) /= z;
  }
  return p;
}

/// Same map as above, recorded on the tape so gradients reach Q.
template <std::floating_point T>
Var<T> target_distribution(Var<T> q) {
  return row_normalize(div_cols(square(q), col_sum(q)));
}

/// Σ_ik p_ik log(p_ik / q_ik) with 0·log 0 = 0 and q clamped at 1e-10.
template <std::floating_point T>
Var<T> kl_loss(const Matrix<T>& target, Var<T> approx) {
  return kl_divergence(target, approx, static_cast<T>(kKlDenominatorClamp));
}

/// R = row_softmax(Â H̃ W).
template <std::floating_point T>
Var<T> cluster_head(Var<T> hybrid_last, Var<T> a_hat, Var<T> weight) {
  if (hybrid_last.cols() != weight.rows()) {
    throw ShapeError("cluster_head: hybrid width " + std::to_string(hybrid_last.cols()) + " vs head " +
                     weight.value().shape_string());
  }
  return row_softmax(matmul(a_hat, matmul(hybrid_last, weight)));
}

/// A·P using the edge list, differentiable in P (A is symmetric).
template <std::floating_point T>
Var<T> adjacency_product(const AttributedGraph<T>& g, Var<T> p) {
  if (p.rows() != g.node_count()) {
    throw ShapeError("adjacency_product: " + std::to_string(p.rows()) + " rows for " + std::to_string(g.node_count()) +
                     " nodes");
  }
  auto spmm = [&g](const Matrix<T>& in, Matrix<T>& out) {
    for (auto [i, j] : g.edges()) {
      for (std::size_t c = 0; c < in.cols(); ++c) {
        out(i, c) += in(j, c);
        out(j, c) += in(i, c);
      }
    }
  };
  Matrix<T> out(p.rows(), p.cols());
  spmm(p.value(), out);
  const auto ip = p.id();
  return p.tape().record(std::move(out), {ip}, [ip, spmm](Tape<T>& t, const Matrix<T>& grad) {
    spmm(grad, t.grad_ref(ip));
  });
}

/// L_M = -(1/2m) Σ_ij Σ_k (A_ij - d_i d_j / 2m) p_ik p_jk, evaluated as
/// -(1/2m) [ Σ P∘(A P) - ||dᵀP||² / 2m ]. Returns nullopt (with a warning) when
/// the graph has no edges, since modularity is undefined there.
template <std::floating_point T>
std::optional<Var<T>> modularity_loss(const AttributedGraph<T>& g, Var<T> p) {
  if (p.rows() != g.node_count()) {
    throw ShapeError("modularity_loss: " + std::to_string(p.rows()) + " rows for " + std::to_string(g.node_count()) +
                     " nodes");
  }
  const std::size_t m = g.edge_count();
  if (m == 0) {
    warn("graph has no edges; modularity loss is undefined and excluded");
    return std::nullopt;
  }
  auto& tape = p.tape();
  const T two_m = static_cast<T>(2 * m);
  Matrix<T> d(1, g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) d(0, i) = static_cast<T>(g.degrees()[i]);
  auto observed = sum(mul(p, adjacency_product(g, p)));
  auto expected = scale(sum(square(matmul(tape.constant(std::move(d)), p))), T{1} / two_m);
  return scale(sub(observed, expected), T{-1} / two_m);
}

/// Value-only convenience; 0 for an edgeless graph.
template <std::floating_point T>
T modularity_loss(const AttributedGraph<T>& g, const Matrix<T>& p) {
  Tape<T> tape;
  auto loss = modularity_loss(g, tape.constant(p));
  return loss ? loss->item() : T{0};
}

/// K-means on the pretrained bottleneck embeddings seeds μ.
template <std::floating_point T>
ClusterCenters<T> init_centers(const Matrix<T>& embeddings, std::size_t clusters, std::size_t restarts,
                               std::uint64_t seed) {
  if (clusters < 2) throw ConfigError("need at least two clusters");
  auto km = kmeans(embeddings, KMeansOptions{.clusters = clusters, .restarts = restarts, .seed = seed});
  return {Parameter<T>("cluster.centers", std::move(km.centers))};
}

}  // namespace herogcn
