#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "herogcn/adam.hpp"
#include "herogcn/autoencoder.hpp"
#include "herogcn/config.hpp"
#include "herogcn/errors.hpp"
#include "herogcn/graph.hpp"
#include "herogcn/infomax.hpp"
#include "herogcn/metrics.hpp"
#include "herogcn/model.hpp"
#include "herogcn/selfsup.hpp"

namespace herogcn {

struct EpochRecord {
  std::size_t epoch = 0;
  LossComponents losses;
};

struct MetricsReport {
  double acc = 0.0;
  double nmi = 0.0;
  double ari = 0.0;
  double f1 = 0.0;
};

struct RunReport {
  std::vector<EpochRecord> losses;
  std::vector<double> pretrain_losses;
  std::optional<MetricsReport> metrics;
  /// Newman modularity of the final hard partition; empty for edgeless graphs.
  std::optional<double> modularity;
  LabelVector assignments;
  std::size_t collapse_recoveries = 0;
  double elapsed_seconds = 0.0;
};

/// Evaluates all four external metrics against ground truth.
inline MetricsReport evaluate_metrics(const LabelVector& pred, const LabelVector& truth) {
  return {metrics::accuracy(pred, truth), metrics::nmi(pred, truth), metrics::ari(pred, truth), metrics::macro_f1(pred, truth)};
}

namespace detail {

inline constexpr double kCollapseThreshold = 1e-12;

// Moves every center whose soft-assignment mass vanished onto the embedding
// that is farthest from its own (hard-assigned) center. Returns the number of
// centers moved.
template <class T>
std::size_t recover_collapsed_centers(ModelState<T>& model, const Matrix<T>& embeddings, const Matrix<T>& q) {
  std::vector<double> mass(q.cols(), 0.0);
  for (std::size_t i = 0; i < q.rows(); ++i)
    for (std::size_t k = 0; k < q.cols(); ++k) mass[k] += static_cast<double>(q(i, k));
  auto& mu = model.centers.centers.value;
  const auto owner = hard_assign(q);
  std::size_t moved = 0;
  std::vector<char> taken(embeddings.rows(), 0);
  for (std::size_t k = 0; k < mass.size(); ++k) {
    if (mass[k] >= kCollapseThreshold) continue;
    std::size_t far = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < embeddings.rows(); ++i) {
      if (taken[i]) continue;
      double d = 0.0;
      for (std::size_t j = 0; j < embeddings.cols(); ++j) {
        const double diff = static_cast<double>(embeddings(i, j)) - static_cast<double>(mu(static_cast<std::size_t>(owner[i]), j));
        d += diff * diff;
      }
      if (d > best) {
        best = d;
        far = i;
      }
    }
    taken[far] = 1;
    std::copy(embeddings.row(far).begin(), embeddings.row(far).end(), mu.row(k).begin());
    warn("cluster " + std::to_string(k) + " collapsed; re-initialized its center at node " + std::to_string(far));
    ++moved;
  }
  return moved;
}

}  // namespace detail

/// Pretrain → K-means init → joint full-batch training → hard assignment.
/// `truth` enables the metrics block of the report.
template <std::floating_point T>
RunReport train(const AttributedGraph<T>& graph, const TrainConfig& cfg, const LabelVector* truth = nullptr,
                ModelState<T>* trained = nullptr) {
  cfg.validate();
  if (graph.node_count() < 2) throw ConfigError("training needs at least two nodes");
  if (graph.node_count() < cfg.clusters) throw ConfigError("more clusters than nodes");
  if (truth != nullptr && truth->size() != graph.node_count()) {
    throw ShapeError("label file has " + std::to_string(truth->size()) + " entries for " +
                     std::to_string(graph.node_count()) + " nodes");
  }
  if (cfg.deterministic) parallel::set_deterministic(true);

  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  std::mt19937_64 rng(cfg.seed);
  const auto& x = graph.attributes();
  ModelState<T> model = make_model<T>(x.cols(), cfg, rng);

  if (!cfg.pretrained_in.empty()) {
    load_checkpoint(cfg.pretrained_in, model.encoder, model.decoder);
  } else {
    PretrainOptions popts{cfg.pretrain_epochs, cfg.pretrain_learning_rate, cfg.pretrain_batch_size};
    auto pre = pretrain(model.encoder, model.decoder, x, popts, rng);
    report.pretrain_losses.assign(pre.epoch_losses.begin(), pre.epoch_losses.end());
  }
  if (!cfg.pretrained_out.empty()) save_checkpoint(cfg.pretrained_out, model.encoder, model.decoder);

  model.centers = init_centers(compute_embeddings(model, x), cfg.clusters, cfg.kmeans_restarts, rng());

  const GraphContext<T> ctx(graph);
  Adam<T> adam({.learning_rate = cfg.learning_rate});
  const auto params = model.parameters();
  Matrix<T> corrupted;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // P is refreshed once per epoch and held fixed as the supervision target.
    Matrix<T> q = compute_soft_assignments(model, x);
    for (std::size_t attempt = 0; attempt < cfg.clusters; ++attempt) {
      const auto moved = detail::recover_collapsed_centers(model, compute_embeddings(model, x), q);
      if (moved == 0) break;
      report.collapse_recoveries += moved;
      q = compute_soft_assignments(model, x);
    }
    const Matrix<T> target = target_distribution(q);
    if (cfg.enable_infomax) corrupted = corrupt_rows(x, rng);

    model.zero_grad();
    auto pass = evaluate_objective(model, ctx, target, cfg.enable_infomax ? &corrupted : nullptr, cfg);
    if (epoch % cfg.log_every == 0 || epoch == cfg.epochs || epoch == 1) report.losses.push_back({epoch, pass.parts});
    pass.tape->backward(pass.total);
    adam.step(params);
  }

  report.assignments = hard_assign(compute_head_assignments(model, ctx, cfg.alpha));
  if (graph.edge_count() > 0) report.modularity = metrics::partition_modularity(graph, report.assignments);
  if (truth != nullptr) report.metrics = evaluate_metrics(report.assignments, *truth);
  report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (trained != nullptr) *trained = std::move(model);
  return report;
}

}  // namespace herogcn
