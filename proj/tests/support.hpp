#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "herogcn/herogcn.hpp"

namespace testing_support {

using herogcn::Matrix;
using herogcn::Parameter;

inline Matrix<double> random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0,
                                    double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix<double> m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = u(rng);
  return m;
}

inline double max_abs_diff(const Matrix<double>& a, const Matrix<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

struct GradientReport {
  std::string parameter;
  double relative_error = 0.0;
  double analytic_norm = 0.0;
};

// Relative error ||a - f|| / max(||a||, ||f||) per parameter. Gradients whose
// norms are both below `floor` are compared absolutely against it instead.
inline double relative_error(const Matrix<double>& a, const Matrix<double>& f, double floor = 1e-8) {
  double diff = 0.0, na = 0.0, nf = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - f[i]) * (a[i] - f[i]);
    na += a[i] * a[i];
    nf += f[i] * f[i];
  }
  diff = std::sqrt(diff);
  const double denom = std::max(std::sqrt(na), std::sqrt(nf));
  return denom < floor ? diff / floor : diff / denom;
}

// `loss(backward)` evaluates the scalar loss on a fresh tape. When `backward`
// is true it must also run the reverse sweep so each Parameter's grad holds
// its analytic gradient. Central differences use step h.
inline std::vector<GradientReport> gradient_check(const std::vector<Parameter<double>*>& params,
                                                  const std::function<double(bool)>& loss, double h = 1e-5) {
  for (auto* p : params) p->zero_grad();
  loss(true);
  std::vector<GradientReport> out;
  for (auto* p : params) {
    Matrix<double> fd = Matrix<double>::zeros_like(p->value);
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double keep = p->value[i];
      p->value[i] = keep + h;
      const double up = loss(false);
      p->value[i] = keep - h;
      const double down = loss(false);
      p->value[i] = keep;
      fd[i] = (up - down) / (2.0 * h);
    }
    out.push_back({p->name, relative_error(p->grad, fd), herogcn::kernels::frobenius_norm(p->grad)});
  }
  return out;
}

inline double worst(const std::vector<GradientReport>& r) {
  double w = 0.0;
  for (const auto& g : r) w = std::max(w, g.relative_error);
  return w;
}

// Random simple graph on n nodes with edge probability p.
inline std::vector<herogcn::Edge> random_edges(std::size_t n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<herogcn::Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng)) e.emplace_back(i, j);
  return e;
}

inline herogcn::LabelVector random_labels(std::size_t n, int k, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(0, k - 1);
  herogcn::LabelVector y(n);
  for (auto& v : y) v = u(rng);
  return y;
}

// Newman modularity by the direct double sum over node pairs.
inline double modularity_double_sum(std::size_t n, const std::vector<herogcn::Edge>& edges,
                                    const herogcn::LabelVector& c) {
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> d(n, 0.0);
  for (auto [i, j] : edges) {
    a[i][j] = a[j][i] = 1.0;
  }
  double two_m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d[i] += a[i][j];
    two_m += d[i];
  }
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (c[i] == c[j]) q += a[i][j] - d[i] * d[j] / two_m;
  return q / two_m;
}

inline Matrix<double> one_hot(const herogcn::LabelVector& y, std::size_t k) {
  Matrix<double> p(y.size(), k);
  for (std::size_t i = 0; i < y.size(); ++i) p(i, static_cast<std::size_t>(y[i])) = 1.0;
  return p;
}

// Best agreement over every bijection of the label values 0..k-1.
inline double accuracy_by_permutation(const herogcn::LabelVector& pred, const herogcn::LabelVector& truth, int k) {
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hit += perm[static_cast<std::size_t>(pred[i])] == truth[i];
    best = std::max(best, hit);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(pred.size());
}

// ARI from explicit enumeration of all node pairs.
inline double ari_by_pairs(const herogcn::LabelVector& a, const herogcn::LabelVector& b) {
  const std::size_t n = a.size();
  double both = 0, in_a = 0, in_b = 0, pairs = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      both += sa && sb;
      in_a += sa;
      in_b += sb;
      pairs += 1;
    }
  const double expected = in_a * in_b / pairs;
  const double max_index = (in_a + in_b) / 2.0;
  if (max_index - expected == 0.0) return 1.0;
  return (both - expected) / (max_index - expected);
}

// NMI with the geometric-mean normalization, from raw label counts.
inline double nmi_by_counts(const herogcn::LabelVector& a, const herogcn::LabelVector& b) {
  const double n = static_cast<double>(a.size());
  std::map<int, double> ca, cb;
  std::map<std::pair<int, int>, double> cab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1;
    cb[b[i]] += 1;
    cab[{a[i], b[i]}] += 1;
  }
  double ha = 0, hb = 0, mi = 0;
  for (auto [k, v] : ca) ha -= v / n * std::log(v / n);
  for (auto [k, v] : cb) hb -= v / n * std::log(v / n);
  for (auto [k, v] : cab) mi += v / n * std::log(v * n / (ca[k.first] * cb[k.second]));
  if (ha == 0.0 && hb == 0.0) return 1.0;
  if (ha == 0.0 || hb == 0.0) return 0.0;
  return mi / std::sqrt(ha * hb);
}

inline herogcn::LabelVector relabel(const herogcn::LabelVector& y, std::mt19937_64& rng) {
  int k = 0;
  for (int v : y) k = std::max(k, v + 1);
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  herogcn::LabelVector out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = perm[static_cast<std::size_t>(y[i])] + 7;
  return out;
}

// Small configuration used by the synthetic end-to-end runs.
inline herogcn::TrainConfig small_config(std::size_t clusters, std::uint64_t seed) {
  herogcn::TrainConfig cfg;
  cfg.layer_dims = {64, 64, 128, 10};
  cfg.clusters = clusters;
  cfg.epochs = 200;
  cfg.learning_rate = 1e-3;
  cfg.pretrain_epochs = 100;
  cfg.seed = seed;
  cfg.deterministic = true;
  cfg.log_every = 10;
  return cfg;
}

// Random instance used by the gradient suite: n=12, d=7, K=3, dims 7-5-3.
struct GradientInstance {
  herogcn::AttributedGraph<double> graph;
  herogcn::TrainConfig cfg;
  herogcn::ModelState<double> model;
  Matrix<double> corrupted;
  Matrix<double> target;
};

inline GradientInstance make_gradient_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GradientInstance g;
  auto x = random_matrix(12, 7, rng, 0.0, 1.0);
  auto edges = random_edges(12, 0.3, rng);
  edges.emplace_back(0, 1);
  g.graph = herogcn::AttributedGraph<double>(12, edges, x);
  g.cfg.layer_dims = {5, 3};
  g.cfg.sampled_layers = 2;
  g.cfg.clusters = 3;
  g.model = herogcn::make_model<double>(7, g.cfg, rng);
  g.model.centers.centers.value = random_matrix(3, 3, rng, 0.0, 1.0);
  // Positive biases keep pre-activations off the ReLU kink, even for rows the encoder maps to zero.
  for (auto& l : g.model.encoder.layers) l.bias.value = random_matrix(1, l.bias.value.cols(), rng, 0.05, 0.3);
  for (auto& l : g.model.decoder.layers) l.bias.value = random_matrix(1, l.bias.value.cols(), rng, 0.05, 0.3);
  g.corrupted = herogcn::corrupt_rows(x, rng);
  g.target = herogcn::target_distribution(herogcn::compute_soft_assignments(g.model, x));
  return g;
}

enum class Term { Reconstruction, Infomax, Clustering, Head, Modularity, Total };

inline const char* term_name(Term t) {
  switch (t) {
    case Term::Reconstruction: return "L_R";
    case Term::Infomax: return "L_I";
    case Term::Clustering: return "L_C";
    case Term::Head: return "L_G";
    case Term::Modularity: return "L_M";
    case Term::Total: return "L";
  }
  return "?";
}

// Value of one loss term at the instance's current parameters, assembled
// from the individual building blocks. The total goes through evaluate_objective.
inline double term_value(GradientInstance& g, Term term, bool backward) {
  using namespace herogcn;
  auto& m = g.model;
  if (term == Term::Total) {
    const GraphContext<double> ctx(g.graph);
    auto pass = evaluate_objective(m, ctx, g.target, &g.corrupted, g.cfg);
    if (backward) pass.tape->backward(pass.total);
    return pass.parts.total;
  }
  Tape<double> tape;
  auto x = tape.constant(g.graph.attributes());
  auto a_hat = tape.constant(normalize(g.graph).matrix());
  auto enc = encode(tape, m.encoder, x);
  Var<double> loss;
  switch (term) {
    case Term::Reconstruction:
      loss = reconstruction_loss(x, decode(tape, m.decoder, enc.back()));
      break;
    case Term::Infomax: {
      auto hyb = agcn_forward(tape, m.gcn, enc, a_hat, x, g.cfg.alpha);
      auto xc = tape.constant(g.corrupted);
      auto hyb_neg = agcn_forward(tape, m.gcn, encode(tape, m.encoder, xc), a_hat, xc, g.cfg.alpha);
      loss = infomax_loss(build_samples(hyb.hybrid, hyb_neg.hybrid, g.cfg.sampled_layers),
                          tape.parameter(m.infomax.scoring));
      break;
    }
    case Term::Clustering:
      loss = kl_loss(g.target, soft_assign(enc.back(), tape.parameter(m.centers.centers)));
      break;
    case Term::Head: {
      auto hyb = agcn_forward(tape, m.gcn, enc, a_hat, x, g.cfg.alpha);
      loss = kl_loss(g.target, cluster_head(hyb.last(), a_hat, tape.parameter(m.head.weight)));
      break;
    }
    case Term::Modularity: {
      auto q = soft_assign(enc.back(), tape.parameter(m.centers.centers));
      loss = *modularity_loss(g.graph, target_distribution(q));
      break;
    }
    case Term::Total:
      break;
  }
  if (backward) tape.backward(loss);
  return loss.item();
}

}  // namespace testing_support
