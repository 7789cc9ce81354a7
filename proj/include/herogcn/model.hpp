#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "herogcn/agcn.hpp"
#include "herogcn/autoencoder.hpp"
#include "herogcn/config.hpp"
#include "herogcn/errors.hpp"
#include "herogcn/graph.hpp"
#include "herogcn/infomax.hpp"
#include "herogcn/ops.hpp"
#include "herogcn/selfsup.hpp"
#include "herogcn/tape.hpp"

namespace herogcn {

/// Every trainable parameter of the network.
template <std::floating_point T>
struct ModelState {
  EncoderStack<T> encoder;
  DecoderStack<T> decoder;
  GcnStack<T> gcn;
  InfomaxBlock<T> infomax;
  ClusterCenters<T> centers;
  ClusterHead<T> head;

  /// Stable while the model is not resized.
  std::vector<Parameter<T>*> parameters() {
    auto out = parameters_of(encoder, decoder);
    for (auto& w : gcn.weights) out.push_back(&w);
    out.push_back(&infomax.scoring);
    out.push_back(&centers.centers);
    out.push_back(&head.weight);
    return out;
  }

  void zero_grad() {
    for (auto* p : parameters()) p->zero_grad();
  }
};

/// Full layer-width list {d, dim_1, ..., dim_L}.
inline std::vector<std::size_t> full_dims(std::size_t input_dim, const TrainConfig& cfg) {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), cfg.layer_dims.begin(), cfg.layer_dims.end());
  return dims;
}

/// Glorot-initialized model. Cluster centers start at zero until init_centers().
template <std::floating_point T, class Rng>
ModelState<T> make_model(std::size_t input_dim, const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto dims = full_dims(input_dim, cfg);
  ModelState<T> m;
  m.encoder = make_encoder<T>(dims, rng);
  m.decoder = make_decoder<T>(dims, rng);
  m.gcn = make_gcn<T>(dims, rng);
  m.infomax = make_infomax<T>(dims, cfg.sampled_layers, rng);
  m.centers = {Parameter<T>("cluster.centers", Matrix<T>(cfg.clusters, dims.back()))};
  m.head = make_cluster_head<T>(dims.back(), cfg.clusters, rng);
  return m;
}

/// Scalar values of the five loss terms and their weighted total.
struct LossComponents {
  double reconstruction = 0.0;  // L_R
  double infomax = 0.0;         // L_I
  double clustering = 0.0;      // L_C = KL(P||Q)
  double head = 0.0;            // L_G = KL(P||R)
  double modularity = 0.0;      // L_M
  double total = 0.0;           // L
};

/// Which terms enter the objective and with what weights.
struct LossWeights {
  std::array<double, 4> lambda{0.5, 0.1, 0.01, 0.05};
  bool infomax = true;
  bool modularity = true;

  static LossWeights from(const TrainConfig& cfg) { return {cfg.lambda, cfg.enable_infomax, cfg.enable_modularity}; }
};

/// L = L_R + λ₁L_I + λ₂L_C + λ₃L_G + λ₄L_M; disabled terms contribute 0.
inline double total_loss(const LossComponents& c, const LossWeights& w) {
  const std::pair<const char*, double> named[] = {
      {"L_R", c.reconstruction}, {"L_I", c.infomax}, {"L_C", c.clustering}, {"L_G", c.head}, {"L_M", c.modularity}};
  for (auto [name, v] : named) {
    if (!std::isfinite(v)) throw NumericalError(std::string("loss component ") + name + " is not finite");
  }
  double l = c.reconstruction;
  if (w.infomax) l += w.lambda[0] * c.infomax;
  l += w.lambda[1] * c.clustering;
  l += w.lambda[2] * c.head;
  if (w.modularity) l += w.lambda[3] * c.modularity;
  return l;
}

/// y_i = argmax_k r_ik, ties to the lowest index.
template <std::floating_point T>
LabelVector hard_assign(const Matrix<T>& r) {
  LabelVector y(r.rows(), 0);
  for (std::size_t i = 0; i < r.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < r.cols(); ++k) {
      if (r(i, k) > r(i, best)) best = k;
    }
    y[i] = static_cast<int>(best);
  }
  return y;
}

/// Graph quantities shared by every epoch.
template <std::floating_point T>
struct GraphContext {
  const AttributedGraph<T>* graph = nullptr;
  Matrix<T> a_hat;

  explicit GraphContext(const AttributedGraph<T>& g) : graph(&g), a_hat(normalize(g).matrix()) {}
};

/// One recorded forward pass of the objective. Owns the tape its Vars live on.
template <std::floating_point T>
struct ObjectivePass {
  std::unique_ptr<Tape<T>> tape = std::make_unique<Tape<T>>();
  Var<T> total;
  Var<T> q;
  Var<T> r;
  LossComponents parts;
  bool modularity_defined = false;
};

namespace detail {

template <class F>
auto named_component(const char* name, F&& f) {
  try {
    return f();
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("loss component ") + name + ": " + e.what());
  }
}

}  // namespace detail

/// Records L on a fresh tape. `target` is the constant P of this epoch;
/// `corrupted` holds the row-shuffled attributes (ignored when infomax is off).
template <std::floating_point T>
ObjectivePass<T> evaluate_objective(ModelState<T>& model, const GraphContext<T>& ctx, const Matrix<T>& target,
                                    const Matrix<T>* corrupted, const TrainConfig& cfg) {
  const auto& g = *ctx.graph;
  ObjectivePass<T> pass;
  auto& tape = *pass.tape;
  auto x = tape.constant(g.attributes());
  auto a_hat = tape.constant(ctx.a_hat);

  auto enc = encode(tape, model.encoder, x);
  auto hyb = agcn_forward(tape, model.gcn, enc, a_hat, x, cfg.alpha);

  auto l_r = detail::named_component("L_R", [&] { return reconstruction_loss(x, decode(tape, model.decoder, enc.back())); });

  pass.q = soft_assign(enc.back(), tape.parameter(model.centers.centers));
  auto l_c = detail::named_component("L_C", [&] { return kl_loss(target, pass.q); });
  pass.r = cluster_head(hyb.last(), a_hat, tape.parameter(model.head.weight));
  auto l_g = detail::named_component("L_G", [&] { return kl_loss(target, pass.r); });

  const T lam1 = static_cast<T>(cfg.lambda[0]), lam2 = static_cast<T>(cfg.lambda[1]),
          lam3 = static_cast<T>(cfg.lambda[2]), lam4 = static_cast<T>(cfg.lambda[3]);
  auto total = add(add(l_r, scale(l_c, lam2)), scale(l_g, lam3));

  pass.parts.reconstruction = l_r.item();
  pass.parts.clustering = l_c.item();
  pass.parts.head = l_g.item();

  if (cfg.enable_infomax) {
    if (corrupted == nullptr) throw ConfigError("infomax is enabled but no corrupted attributes were supplied");
    auto l_i = detail::named_component("L_I", [&] {
      auto xc = tape.constant(*corrupted);
      auto enc_neg = encode(tape, model.encoder, xc);
      auto hyb_neg = agcn_forward(tape, model.gcn, enc_neg, a_hat, xc, cfg.alpha);
      auto pair = build_samples(hyb.hybrid, hyb_neg.hybrid, cfg.sampled_layers);
      return infomax_loss(pair, tape.parameter(model.infomax.scoring));
    });
    pass.parts.infomax = l_i.item();
    total = add(total, scale(l_i, lam1));
  }

  if (cfg.enable_modularity) {
    auto l_m = detail::named_component("L_M", [&] {
      return modularity_loss(g, cfg.modularity_on_target ? target_distribution(pass.q) : pass.q);
    });
    if (l_m) {
      pass.modularity_defined = true;
      pass.parts.modularity = l_m->item();
      total = add(total, scale(*l_m, lam4));
    }
  }

  pass.total = total;
  pass.parts.total = total.item();
  if (!std::isfinite(pass.parts.total)) throw NumericalError("total loss is not finite");
  return pass;
}

/// Bottleneck embeddings E^(L) and soft assignments Q at the current parameters.
template <std::floating_point T>
Matrix<T> compute_embeddings(ModelState<T>& model, const Matrix<T>& x) {
  Tape<T> tape;
  auto e = encode(tape, model.encoder, tape.constant(x));
  return e.back().value();
}

template <std::floating_point T>
Matrix<T> compute_soft_assignments(ModelState<T>& model, const Matrix<T>& x) {
  Tape<T> tape;
  auto e = encode(tape, model.encoder, tape.constant(x));
  return soft_assign(e.back(), tape.constant(model.centers.centers.value)).value();
}

/// R at the current parameters.
template <std::floating_point T>
Matrix<T> compute_head_assignments(ModelState<T>& model, const GraphContext<T>& ctx, double alpha) {
  Tape<T> tape;
  auto x = tape.constant(ctx.graph->attributes());
  auto a_hat = tape.constant(ctx.a_hat);
  auto enc = encode(tape, model.encoder, x);
  auto hyb = agcn_forward(tape, model.gcn, enc, a_hat, x, alpha);
  return cluster_head(hyb.last(), a_hat, tape.constant(model.head.weight.value)).value();
}

}  // namespace herogcn
