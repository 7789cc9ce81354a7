#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "herogcn/autoencoder.hpp"
#include "herogcn/errors.hpp"
#include "herogcn/matrix.hpp"
#include "herogcn/ops.hpp"
#include "herogcn/tape.hpp"

namespace herogcn {

/// Probability clamp applied before the logs of the BCE objective.
inline constexpr double kInfomaxProbabilityClamp = 1e-7;

/// Bilinear scoring matrix W_S over the concatenation of the first t hybrid layers.
template <std::floating_point T>
struct InfomaxBlock {
  Parameter<T> scoring;
  std::size_t sampled_layers = 3;

  std::size_t width() const noexcept { return scoring.value.rows(); }
};

/// c = dim_1 + ... + dim_t, read from {d, dim_1, ..., dim_L}.
inline std::size_t concatenated_width(const std::vector<std::size_t>& dims, std::size_t t) {
  if (t < 1 || t + 1 > dims.size()) {
    throw ConfigError("sampled layer count t=" + std::to_string(t) + " must lie in [1, " +
                      std::to_string(dims.size() - 1) + "]");
  }
  std::size_t c = 0;
  for (std::size_t l = 1; l <= t; ++l) c += dims[l];
  return c;
}

template <std::floating_point T, class Rng>
InfomaxBlock<T> make_infomax(const std::vector<std::size_t>& dims, std::size_t t, Rng& rng) {
  const auto c = concatenated_width(dims, t);
  return {Parameter<T>("infomax.scoring", glorot_uniform<T>(c, c, rng)), t};
}

/// Row permutation of the attributes. Returns the permutation used.
template <std::floating_point T, class Rng>
Matrix<T> corrupt_rows(const Matrix<T>& x, Rng& rng, std::vector<std::size_t>* permutation = nullptr) {
  if (x.rows() < 2) throw ConfigError("corruption needs at least two rows");
  std::vector<std::size_t> perm(x.rows());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix<T> out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) std::copy(x.row(perm[i]).begin(), x.row(perm[i]).end(), out.row(i).begin());
  if (permutation != nullptr) *permutation = std::move(perm);
  return out;
}

template <std::floating_point T>
Matrix<T> corrupt(const Matrix<T>& x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return corrupt_rows(x, rng);
}

template <std::floating_point T>
struct SamplePair {
  Var<T> positives;  // N x c
  Var<T> negatives;  // M x c
  Var<T> summary;    // 1 x c, mean of the positives
};

template <std::floating_point T>
SamplePair<T> build_samples(const std::vector<Var<T>>& positive_layers, const std::vector<Var<T>>& negative_layers,
                            std::size_t t) {
  if (t < 1 || t > positive_layers.size() || t > negative_layers.size()) {
    throw ConfigError("sampled layer count t=" + std::to_string(t) + " exceeds the " +
                      std::to_string(positive_layers.size()) + " available layers");
  }
  std::vector<Var<T>> pos(positive_layers.begin(), positive_layers.begin() + static_cast<std::ptrdiff_t>(t));
  std::vector<Var<T>> neg(negative_layers.begin(), negative_layers.begin() + static_cast<std::ptrdiff_t>(t));
  for (std::size_t l = 0; l < t; ++l) {
    if (pos[l].cols() != neg[l].cols()) {
      throw ShapeError("build_samples: layer " + std::to_string(l + 1) + " widths differ between positives and negatives");
    }
  }
  auto h = t == 1 ? pos.front() : hconcat(pos);
  auto z = t == 1 ? neg.front() : hconcat(neg);
  return {h, z, mean_rows(h)};
}

/// σ(h_i W_S gᵀ) for every row of `samples`; returns rows x 1.
template <std::floating_point T>
Var<T> discriminate(Var<T> samples, Var<T> summary, Var<T> scoring) {
  const auto c = scoring.rows();
  if (scoring.cols() != c || samples.cols() != c || summary.cols() != c || summary.rows() != 1) {
    throw ShapeError("discriminate: samples " + samples.value().shape_string() + ", summary " +
                     summary.value().shape_string() + ", scoring " + scoring.value().shape_string());
  }
  return sigmoid(matmul(samples, matmul(scoring, transpose(summary))));
}

/// Binary cross-entropy over positive/negative patch-summary scores.
template <std::floating_point T>
Var<T> infomax_loss(const SamplePair<T>& pair, Var<T> scoring) {
  const std::size_t n = pair.positives.rows(), m = pair.negatives.rows();
  if (n == 0 || m == 0) throw ConfigError("infomax_loss needs at least one positive and one negative sample");
  const T eps = static_cast<T>(kInfomaxProbabilityClamp);
  auto pos = clamp(discriminate(pair.positives, pair.summary, scoring), eps, T{1} - eps);
  auto neg = clamp(discriminate(pair.negatives, pair.summary, scoring), eps, T{1} - eps);
  auto log_pos = sum(log(pos));
  auto log_neg = sum(log(add_scalar(scale(neg, T{-1}), T{1})));
  return scale(add(log_pos, log_neg), T{-1} / static_cast<T>(n + m));
}

}  // namespace herogcn
