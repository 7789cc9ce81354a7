#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "herogcn/autoencoder.hpp"
#include "herogcn/errors.hpp"
#include "herogcn/ops.hpp"
#include "herogcn/tape.hpp"

namespace herogcn {

/// GCN weights W^(l), same widths as the encoder. No bias terms.
template <std::floating_point T>
struct GcnStack {
  std::vector<std::size_t> dims;
  std::vector<Parameter<T>> weights;

  std::size_t depth() const noexcept { return weights.size(); }
};

template <std::floating_point T, class Rng>
GcnStack<T> make_gcn(const std::vector<std::size_t>& dims, Rng& rng) {
  validate_layer_dims(dims);
  GcnStack<T> g{dims, {}};
  for (std::size_t l = 1; l < dims.size(); ++l) {
    g.weights.emplace_back("gcn" + std::to_string(l) + ".weight", glorot_uniform<T>(dims[l - 1], dims[l], rng));
  }
  return g;
}

template <std::floating_point T>
struct HybridRepresentations {
  std::vector<Var<T>> gcn;     // H^(l)
  std::vector<Var<T>> hybrid;  // H̃^(l) = α H^(l) + (1 - α) E^(l)

  const Var<T>& last() const { return hybrid.back(); }
};

inline void validate_fusion(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("fusion coefficient must lie in [0, 1], got " + std::to_string(alpha));
}

/// H^(1) = ReLU(Â X W^(1)), H^(l) = ReLU(Â H̃^(l-1) W^(l)), fused with the
/// encoder output of the same depth after every layer.
template <std::floating_point T>
HybridRepresentations<T> agcn_forward(Tape<T>& tape, GcnStack<T>& gcn, const std::vector<Var<T>>& enc_outputs,
                                      Var<T> a_hat, Var<T> x, double alpha) {
  validate_fusion(alpha);
  if (enc_outputs.size() != gcn.depth()) {
    throw ShapeError("agcn_forward: " + std::to_string(enc_outputs.size()) + " encoder outputs for " +
                     std::to_string(gcn.depth()) + " GCN layers");
  }
  if (a_hat.rows() != a_hat.cols() || a_hat.rows() != x.rows()) {
    throw ShapeError("agcn_forward: adjacency " + a_hat.value().shape_string() + " does not match " +
                     std::to_string(x.rows()) + " nodes");
  }
  const T a = static_cast<T>(alpha);
  HybridRepresentations<T> out;
  Var<T> input = x;
  for (std::size_t l = 0; l < gcn.depth(); ++l) {
    // Â (H̃ W) is cheaper than (Â H̃) W whenever the layer narrows the width.
    auto h = relu(matmul(a_hat, matmul(input, tape.parameter(gcn.weights[l]))));
    if (!h.value().same_shape(enc_outputs[l].value())) {
      throw ShapeError("agcn_forward: layer " + std::to_string(l + 1) + " GCN output " + h.value().shape_string() +
                       " vs encoder output " + enc_outputs[l].value().shape_string());
    }
    auto fused = add(scale(h, a), scale(enc_outputs[l], T{1} - a));
    out.gcn.push_back(h);
    out.hybrid.push_back(fused);
    input = fused;
  }
  return out;
}

}  // namespace herogcn
