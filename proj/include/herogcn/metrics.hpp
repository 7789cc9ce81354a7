#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "herogcn/errors.hpp"
#include "herogcn/graph.hpp"

// External clustering metrics. Predicted labels are arbitrary, so everything
// here is invariant to renaming the predicted clusters.
namespace herogcn::metrics {

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian method,
/// O(n³) potentials formulation). Returns column assigned to each row.
inline std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  if (n == 0) return {};
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; index 0 is the virtual column.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    if (cost[i - 1].size() != n) throw ShapeError("hungarian: cost matrix is not square");
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

/// Contingency table between two labelings after compacting both label sets
/// to 0..k-1 (in increasing label order).
struct Contingency {
  std::vector<std::vector<double>> counts;  // [pred][truth]
  std::vector<double> pred_totals;
  std::vector<double> truth_totals;
  double n = 0.0;
};

namespace detail {

inline std::vector<std::size_t> compact(const LabelVector& labels, std::size_t& k) {
  std::map<int, std::size_t> ids;
  for (int l : labels) ids.emplace(l, 0);
  std::size_t next = 0;
  for (auto& [label, id] : ids) id = next++;
  k = next;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = ids[labels[i]];
  return out;
}

inline void check_lengths(const LabelVector& pred, const LabelVector& truth) {
  if (pred.size() != truth.size()) {
    throw ShapeError("label vectors differ in length: " + std::to_string(pred.size()) + " vs " +
                     std::to_string(truth.size()));
  }
  if (pred.empty()) throw ShapeError("metrics need at least one labeled node");
}

inline double comb2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace detail

inline Contingency contingency(const LabelVector& pred, const LabelVector& truth) {
  detail::check_lengths(pred, truth);
  std::size_t kp = 0, kt = 0;
  const auto p = detail::compact(pred, kp);
  const auto t = detail::compact(truth, kt);
  Contingency c;
  c.counts.assign(kp, std::vector<double>(kt, 0.0));
  c.pred_totals.assign(kp, 0.0);
  c.truth_totals.assign(kt, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    c.counts[p[i]][t[i]] += 1.0;
    c.pred_totals[p[i]] += 1.0;
    c.truth_totals[t[i]] += 1.0;
  }
  c.n = static_cast<double>(p.size());
  return c;
}

/// Optimal one-to-one mapping predicted cluster -> class on a square table of
/// size max(#clusters, #classes). Indices beyond the real classes are phantom classes.
/// Among mappings with the most agreements, the one with the largest summed
/// per-pair F1 wins, so the result does not depend on label order.
inline std::vector<std::size_t> best_matching(const Contingency& c) {
  const std::size_t k = std::max(c.pred_totals.size(), c.truth_totals.size());
  // Counts are integers and the F1 sum stays below k, so the scaled F1 term
  // never outweighs a single extra agreement.
  const double tie = 1.0 / static_cast<double>(k + 1);
  std::vector<std::vector<double>> cost(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < c.pred_totals.size(); ++i)
    for (std::size_t j = 0; j < c.truth_totals.size(); ++j) {
      const double f1 = 2.0 * c.counts[i][j] / (c.pred_totals[i] + c.truth_totals[j]);
      cost[i][j] = -(c.counts[i][j] + tie * f1);
    }
  return hungarian(cost);
}

/// Fraction of nodes whose matched cluster equals their class.
inline double accuracy(const LabelVector& pred, const LabelVector& truth) {
  const auto c = contingency(pred, truth);
  const auto match = best_matching(c);
  double hits = 0.0;
  for (std::size_t i = 0; i < c.pred_totals.size(); ++i) {
    if (match[i] < c.truth_totals.size()) hits += c.counts[i][match[i]];
  }
  return hits / c.n;
}

/// I(pred; truth) / sqrt(H(pred) H(truth)). Two constant labelings score 1;
/// otherwise a zero entropy gives 0.
inline double nmi(const LabelVector& pred, const LabelVector& truth) {
  const auto c = contingency(pred, truth);
  auto entropy = [&](const std::vector<double>& totals) {
    double h = 0.0;
    for (double t : totals) {
      if (t > 0.0) h -= (t / c.n) * std::log(t / c.n);
    }
    return h;
  };
  const double hp = entropy(c.pred_totals), ht = entropy(c.truth_totals);
  if (c.pred_totals.size() == 1 && c.truth_totals.size() == 1) return 1.0;
  if (hp <= 0.0 || ht <= 0.0) return 0.0;
  double mi = 0.0;
  for (std::size_t i = 0; i < c.pred_totals.size(); ++i)
    for (std::size_t j = 0; j < c.truth_totals.size(); ++j) {
      const double nij = c.counts[i][j];
      if (nij > 0.0) mi += (nij / c.n) * std::log(c.n * nij / (c.pred_totals[i] * c.truth_totals[j]));
    }
  return std::clamp(mi / std::sqrt(hp * ht), 0.0, 1.0);
}

/// Adjusted Rand index from pair counts.
inline double ari(const LabelVector& pred, const LabelVector& truth) {
  const auto c = contingency(pred, truth);
  double index = 0.0, a = 0.0, b = 0.0;
  for (const auto& row : c.counts)
    for (double nij : row) index += detail::comb2(nij);
  for (double t : c.pred_totals) a += detail::comb2(t);
  for (double t : c.truth_totals) b += detail::comb2(t);
  const double total = detail::comb2(c.n);
  if (total == 0.0) return 1.0;
  const double expected = a * b / total;
  const double max_index = 0.5 * (a + b);
  const double denom = max_index - expected;
  // Degenerate tables (both all-singletons or both one-cluster) are identical partitions.
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

/// Macro-averaged F1 after the same optimal matching as accuracy(). Averages
/// over max(#clusters, #classes) classes; a class with neither true nor
/// predicted members contributes 0.
inline double macro_f1(const LabelVector& pred, const LabelVector& truth) {
  const auto c = contingency(pred, truth);
  const auto match = best_matching(c);
  const std::size_t k = match.size();
  std::vector<double> tp(k, 0.0), predicted(k, 0.0), actual(k, 0.0);
  for (std::size_t j = 0; j < c.truth_totals.size(); ++j) actual[j] = c.truth_totals[j];
  for (std::size_t i = 0; i < c.pred_totals.size(); ++i) {
    const std::size_t cls = match[i];
    predicted[cls] += c.pred_totals[i];
    if (cls < c.truth_totals.size()) tp[cls] += c.counts[i][cls];
  }
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double precision = predicted[j] > 0.0 ? tp[j] / predicted[j] : 0.0;
    const double recall = actual[j] > 0.0 ? tp[j] / actual[j] : 0.0;
    total += precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  }
  return total / static_cast<double>(k);
}

/// Newman modularity Σ_c [ L_c/m - (D_c / 2m)² ] of a hard partition.
template <std::floating_point T>
double partition_modularity(const AttributedGraph<T>& g, const LabelVector& labels) {
  if (labels.size() != g.node_count()) {
    throw ShapeError("partition_modularity: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(g.node_count()) + " nodes");
  }
  const double m = static_cast<double>(g.edge_count());
  if (m == 0.0) throw UndefinedError("modularity is undefined for a graph without edges");
  std::map<int, double> internal, degree;
  for (auto [i, j] : g.edges()) {
    if (labels[i] == labels[j]) internal[labels[i]] += 1.0;
  }
  for (std::size_t i = 0; i < g.node_count(); ++i) degree[labels[i]] += static_cast<double>(g.degrees()[i]);
  double q = 0.0;
  for (auto [label, dc] : degree) {
    const double share = dc / (2.0 * m);
    q += internal[label] / m - share * share;
  }
  return q;
}

}  // namespace herogcn::metrics
