#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "herogcn/errors.hpp"
#include "herogcn/graph.hpp"
#include "herogcn/matrix.hpp"

namespace herogcn {

struct KMeansOptions {
  std::size_t clusters = 2;
  std::size_t restarts = 20;
  std::size_t max_iterations = 300;
  std::uint64_t seed = 0;
};

template <std::floating_point T>
struct KMeansResult {
  Matrix<T> centers;
  LabelVector labels;
  double wcss = 0.0;
};

namespace detail {

template <class T>
double sq_dist(std::span<const T> a, std::span<const T> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = static_cast<double>(a[j]) - static_cast<double>(b[j]);
    s += d * d;
  }
  return s;
}

// k-means++ seeding: the first center uniformly, the rest with probability
// proportional to the squared distance from the nearest chosen center.
template <class T, class Rng>
Matrix<T> seed_centers(const Matrix<T>& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows();
  Matrix<T> c(k, x.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  for (std::size_t m = 0; m < k; ++m) {
    std::copy(x.row(pick).begin(), x.row(pick).end(), c.row(m).begin());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_dist<T>(x.row(i), c.row(m)));
      total += d2[i];
    }
    if (m + 1 == k) break;
    if (total <= 0.0) {
      pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
      continue;
    }
    double r = std::uniform_real_distribution<double>(0.0, total)(rng);
    pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      r -= d2[i];
      if (r < 0.0) {
        pick = i;
        break;
      }
    }
    while (d2[pick] <= 0.0 && pick > 0) --pick;
  }
  return c;
}

template <class T>
double assign(const Matrix<T>& x, const Matrix<T>& c, LabelVector& labels, std::vector<double>& dist) {
  double wcss = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t k = 0; k < c.rows(); ++k) {
      const double d = sq_dist<T>(x.row(i), c.row(k));
      if (d < best) {
        best = d;
        arg = static_cast<int>(k);
      }
    }
    labels[i] = arg;
    dist[i] = best;
    wcss += best;
  }
  return wcss;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding; the restart with the lowest
/// within-cluster sum of squares wins. Deterministic under `seed`.
template <std::floating_point T>
KMeansResult<T> kmeans(const Matrix<T>& x, const KMeansOptions& opts) {
  const std::size_t n = x.rows(), k = opts.clusters;
  if (k < 1) throw ConfigError("k-means needs at least one cluster");
  if (n < k) throw ConfigError("k-means needs n >= K (n=" + std::to_string(n) + ", K=" + std::to_string(k) + ")");
  std::mt19937_64 rng(opts.seed);
  KMeansResult<T> best;
  best.wcss = std::numeric_limits<double>::infinity();
  LabelVector labels(n);
  std::vector<double> dist(n);
  for (std::size_t run = 0; run < std::max<std::size_t>(1, opts.restarts); ++run) {
    Matrix<T> c = detail::seed_centers(x, k, rng);
    double wcss = detail::assign(x, c, labels, dist);
    for (std::size_t it = 0; it < opts.max_iterations; ++it) {
      std::vector<double> acc(k * x.cols(), 0.0);
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto lab = static_cast<std::size_t>(labels[i]);
        ++counts[lab];
        for (std::size_t j = 0; j < x.cols(); ++j) acc[lab * x.cols() + j] += x(i, j);
      }
      for (std::size_t m = 0; m < k; ++m) {
        if (counts[m] == 0) {
          // Empty cluster: move it onto the point worst served by its current center.
          std::size_t far = 0;
          for (std::size_t i = 1; i < n; ++i) {
            if (dist[i] > dist[far]) far = i;
          }
          std::copy(x.row(far).begin(), x.row(far).end(), c.row(m).begin());
          dist[far] = 0.0;
          continue;
        }
        for (std::size_t j = 0; j < x.cols(); ++j) {
          c(m, j) = static_cast<T>(acc[m * x.cols() + j] / static_cast<double>(counts[m]));
        }
      }
      const LabelVector previous = labels;
      wcss = detail::assign(x, c, labels, dist);
      if (labels == previous) break;
    }
    if (wcss < best.wcss) {
      best.centers = c;
      best.labels = labels;
      best.wcss = wcss;
    }
  }
  return best;
}

}  // namespace herogcn
