// Acceptance suite: one PASS/FAIL line per criterion. Criterion 8 is a stretch
// goal that reports SKIP or FAIL without affecting the exit status.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "herogcn/herogcn.hpp"
#include "support.hpp"

using namespace herogcn;
using namespace testing_support;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  double overall = 0.0;
  const Term terms[] = {Term::Reconstruction, Term::Infomax, Term::Clustering,
                        Term::Head,           Term::Modularity, Term::Total};
  auto inst = make_gradient_instance(2024);
  for (Term term : terms) {
    auto report = gradient_check(inst.model.parameters(), [&](bool bw) { return term_value(inst, term, bw); });
    const double w = worst(report);
    overall = std::max(overall, w);
    if (!(w < 1e-4)) {
      o.pass = false;
      for (const auto& r : report) {
        if (!(r.relative_error < 1e-4)) o.detail += std::string(term_name(term)) + "/" + r.parameter + " rel=" + fmt(r.relative_error) + "; ";
      }
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 60.0) o.pass = false;
  o.detail += "max rel err " + fmt(overall) + " over 6 objectives, " + fmt(secs) + " s";
  return o;
}

Outcome distribution_invariants() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> un(2, 20), uk(2, 6), ud(1, 5);
  double worst_row = 0.0, worst_kl_self = 0.0, min_kl = 0.0;
  std::size_t not_sharper = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = un(rng), k = uk(rng), d = ud(rng);
    Tape<double> tape;
    auto q = soft_assign(tape.constant(random_matrix(n, d, rng, -2, 2)), tape.constant(random_matrix(k, d, rng, -2, 2)));
    const auto p = target_distribution(q.value());
    auto r = cluster_head(tape.constant(random_matrix(n, d, rng)), tape.constant(random_matrix(n, n, rng, 0, 1)),
                          tape.constant(random_matrix(d, k, rng, -3, 3)));
    for (const auto* m : {&q.value(), &p, &r.value()}) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < k; ++c) s += (*m)(i, c);
        worst_row = std::max(worst_row, std::abs(s - 1.0));
      }
    }
    min_kl = std::min(min_kl, kl_loss(p, q).item());
    worst_kl_self = std::max(worst_kl_self, std::abs(kl_loss(q.value(), q).item()));

    // Balanced Q: cyclic shifts of one non-uniform row give equal column masses.
    std::vector<double> base(k);
    double z = 0.0;
    for (auto& b : base) z += (b = std::uniform_real_distribution<double>(0.1, 1.0)(rng));
    base[0] += 0.5;
    z += 0.5;
    Matrix<double> bq(k, k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t c = 0; c < k; ++c) bq(i, c) = base[(c + i) % k] / z;
    const auto bp = target_distribution(bq);
    for (std::size_t i = 0; i < k; ++i) {
      double qmax = 0.0, pmax = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        qmax = std::max(qmax, bq(i, c));
        pmax = std::max(pmax, bp(i, c));
      }
      if (!(pmax > qmax)) ++not_sharper;
    }
  }
  Outcome o;
  o.pass = worst_row < 1e-9 && min_kl >= 0.0 && worst_kl_self < 1e-12 && not_sharper == 0;
  o.detail = "max |row sum - 1| " + fmt(worst_row) + ", min KL(P||Q) " + fmt(min_kl) + ", max |KL(Q||Q)| " +
             fmt(worst_kl_self) + ", rows not sharpened " + std::to_string(not_sharper);
  return o;
}

Outcome modularity_oracle() {
  std::mt19937_64 rng(11);
  double worst_err = 0.0;
  int tested = 0;
  while (tested < 50) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 30)(rng);
    auto edges = random_edges(n, std::uniform_real_distribution<double>(0.05, 0.6)(rng), rng);
    if (edges.empty()) continue;
    const int k = std::uniform_int_distribution<int>(1, 5)(rng);
    auto y = random_labels(n, k, rng);
    AttributedGraph<double> g(n, edges, Matrix<double>(n, 1));
    const double loss = modularity_loss(g, one_hot(y, static_cast<std::size_t>(k)));
    worst_err = std::max(worst_err, std::abs(loss + modularity_double_sum(n, edges, y)));
    ++tested;
  }
  AttributedGraph<double> two(4, {{0, 1}, {2, 3}}, Matrix<double>(4, 1));
  const double q = -modularity_loss(two, one_hot({0, 0, 1, 1}, 2));
  Outcome o;
  o.pass = worst_err < 1e-10 && q == 0.5;
  o.detail = "max |L_M + Q_direct| " + fmt(worst_err) + " on 50 graphs, two-edge graph Q=" + fmt(q);
  return o;
}

Outcome metrics_oracle() {
  std::mt19937_64 rng(13);
  double acc_err = 0.0, ari_err = 0.0, inv_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int k = std::uniform_int_distribution<int>(1, 5)(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
    auto pred = random_labels(n, k, rng), truth = random_labels(n, k, rng);
    acc_err = std::max(acc_err, std::abs(metrics::accuracy(pred, truth) - accuracy_by_permutation(pred, truth, k)));

    const std::size_t small = std::uniform_int_distribution<std::size_t>(2, 10)(rng);
    auto a = random_labels(small, k, rng), b = random_labels(small, k, rng);
    ari_err = std::max(ari_err, std::abs(metrics::ari(a, b) - ari_by_pairs(a, b)));

    const auto pr = relabel(pred, rng), tr = relabel(truth, rng);
    inv_err = std::max({inv_err, std::abs(metrics::accuracy(pred, truth) - metrics::accuracy(pr, tr)),
                        std::abs(metrics::nmi(pred, truth) - metrics::nmi(pr, tr)),
                        std::abs(metrics::ari(pred, truth) - metrics::ari(pr, tr)),
                        std::abs(metrics::macro_f1(pred, truth) - metrics::macro_f1(pr, tr))});
  }
  Outcome o;
  o.pass = acc_err < 1e-12 && ari_err < 1e-12 && inv_err < 1e-12;
  o.detail = "ACC vs permutations " + fmt(acc_err) + ", ARI vs pairs " + fmt(ari_err) + ", relabeling drift " + fmt(inv_err);
  return o;
}

Outcome end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  SbmOptions opts{.blocks = 3, .per_block = 50, .p_in = 0.3, .p_out = 0.01, .noise = 0.1, .seed = 1};
  auto data = sbm_generate<double>(opts);
  auto cfg = small_config(3, 1);
  auto report = train(data.graph, cfg, &data.labels);
  auto km = kmeans(data.graph.attributes(), KMeansOptions{.clusters = 3, .restarts = 20, .seed = 1});
  const double km_acc = metrics::accuracy(km.labels, data.labels);
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = report.metrics && report.metrics->acc >= 0.9 && report.metrics->nmi >= 0.8 && report.metrics->acc >= km_acc &&
           secs < 300.0 && cfg.epochs <= 200;
  o.detail = "ACC " + fmt(report.metrics ? report.metrics->acc : -1) + ", NMI " +
             fmt(report.metrics ? report.metrics->nmi : -1) + ", K-means ACC " + fmt(km_acc) + ", " +
             std::to_string(cfg.epochs) + " epochs, " + fmt(secs) + " s";
  return o;
}

Outcome infomax_sanity() {
  std::mt19937_64 rng(17);
  Tape<double> tape;
  auto pos = tape.constant(random_matrix(10, 4, rng));
  auto neg = tape.constant(random_matrix(9, 4, rng));
  SamplePair<double> pair{pos, neg, mean_rows(pos)};
  const double at_zero = infomax_loss(pair, tape.constant(Matrix<double>(4, 4))).item();
  const double ln2_err = std::abs(at_zero - std::numbers::ln2);

  // Separable pair: positives share a direction with the summary, negatives oppose it.
  Matrix<double> p(16, 4), n(16, 4);
  for (std::size_t i = 0; i < 16; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const double noise = std::uniform_real_distribution<double>(-0.2, 0.2)(rng);
      p(i, j) = 1.0 + noise;
      n(i, j) = -1.0 - noise;
    }
  }
  Parameter<double> ws("infomax.scoring", random_matrix(4, 4, rng, -0.1, 0.1));
  Adam<double> adam({.learning_rate = 0.01});
  std::vector<Parameter<double>*> params{&ws};
  double loss = 0.0;
  for (int step = 0; step < 500; ++step) {
    ws.zero_grad();
    Tape<double> t;
    auto pv = t.constant(p);
    SamplePair<double> sp{pv, t.constant(n), mean_rows(pv)};
    auto l = infomax_loss(sp, t.parameter(ws));
    loss = l.item();
    t.backward(l);
    adam.step(params);
  }
  Outcome o;
  o.pass = ln2_err < 1e-9 && loss < 0.1;
  o.detail = "|L_I(W_S=0) - ln 2| " + fmt(ln2_err) + ", discriminator-only L_I after 500 steps " + fmt(loss);
  return o;
}

Outcome ablation() {
  Outcome o;
  auto inst = make_gradient_instance(99);
  inst.cfg.enable_infomax = false;
  inst.model.zero_grad();
  const GraphContext<double> ctx(inst.graph);
  {
    auto pass = evaluate_objective<double>(inst.model, ctx, inst.target, nullptr, inst.cfg);
    pass.tape->backward(pass.total);
  }
  const double ws_grad = kernels::frobenius_norm(inst.model.infomax.scoring.grad);

  // Identical centers give a uniform Q, and a uniform P has zero modularity loss.
  inst.cfg.enable_infomax = true;
  auto& mu = inst.model.centers.centers.value;
  for (std::size_t k = 1; k < mu.rows(); ++k) std::copy(mu.row(0).begin(), mu.row(0).end(), mu.row(k).begin());
  const auto q = compute_soft_assignments(inst.model, inst.graph.attributes());
  const auto uniform_p = target_distribution(q);
  auto with = evaluate_objective(inst.model, ctx, uniform_p, &inst.corrupted, inst.cfg);
  auto cfg_off = inst.cfg;
  cfg_off.enable_modularity = false;
  auto without = evaluate_objective(inst.model, ctx, uniform_p, &inst.corrupted, cfg_off);
  const double l_diff = std::abs(with.parts.total - without.parts.total);

  auto data = sbm_generate<double>({.blocks = 3, .per_block = 50, .p_in = 0.3, .p_out = 0.01, .noise = 0.1, .seed = 1});
  bool completed = true;
  std::string runs;
  for (int variant = 0; variant < 2; ++variant) {
    auto cfg = small_config(3, 1);
    (variant == 0 ? cfg.enable_infomax : cfg.enable_modularity) = false;
    try {
      auto r = train(data.graph, cfg, &data.labels);
      completed = completed && r.assignments.size() == data.graph.node_count() && r.losses.back().epoch == cfg.epochs;
      runs += std::string(variant == 0 ? "no-infomax" : "no-modularity") + " ACC " + fmt(r.metrics->acc) + ", ";
    } catch (const std::exception& e) {
      completed = false;
      runs += std::string("run failed: ") + e.what() + ", ";
    }
  }
  o.pass = ws_grad == 0.0 && l_diff < 1e-12 && completed;
  o.detail = "||dL/dW_S|| without infomax " + fmt(ws_grad) + ", |L - L_no_mod| at L_M=0 " + fmt(l_diff) + ", " + runs +
             (completed ? "both variants completed" : "a variant did not complete");
  return o;
}

// Optional: needs HEROGCN_ACM_EDGES / HEROGCN_ACM_ATTRS / HEROGCN_ACM_LABELS.
Outcome stretch(bool& skipped) {
  const char* e = std::getenv("HEROGCN_ACM_EDGES");
  const char* a = std::getenv("HEROGCN_ACM_ATTRS");
  const char* l = std::getenv("HEROGCN_ACM_LABELS");
  Outcome o;
  if (e == nullptr || a == nullptr || l == nullptr) {
    skipped = true;
    o.detail = "ACM files not provided (set HEROGCN_ACM_EDGES, HEROGCN_ACM_ATTRS, HEROGCN_ACM_LABELS)";
    return o;
  }
  try {
    auto x = io::load_attributes<double>(a);
    AttributedGraph<double> g(x.rows(), io::load_edges(e), std::move(x));
    const auto y = io::load_labels(l);
    TrainConfig cfg;
    cfg.clusters = 3;
    cfg.dataset = "acm";
    cfg.learning_rate = default_learning_rate("acm");
    cfg.log_every = 100;
    double mean = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      cfg.seed = seed;
      mean += train(g, cfg, &y).metrics->acc / 10.0;
    }
    o.pass = std::abs(mean * 100.0 - 91.07) <= 2.0;
    o.detail = "10-seed mean ACC " + fmt(mean * 100.0) + " (reference 91.07 +/- 2.0)";
  } catch (const std::exception& ex) {
    o.pass = false;
    o.detail = std::string("error: ") + ex.what();
  }
  return o;
}

}  // namespace

int main() {
  warning_sink() = [](std::string_view) {};
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "gradient suite", gradient_suite},
      {2, "distribution invariants", distribution_invariants},
      {3, "modularity oracle", modularity_oracle},
      {4, "metrics oracle", metrics_oracle},
      {5, "end-to-end synthetic", end_to_end},
      {6, "infomax sanity", infomax_sanity},
      {7, "ablation contract", ablation},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail << std::endl;
  }
  bool skipped = false;
  const auto s = stretch(skipped);
  std::cout << (skipped ? "SKIP" : (s.pass ? "PASS" : "FAIL")) << " criterion 8 (ACM benchmark reproduction, optional): "
            << s.detail << std::endl;
  std::cout << (failures == 0 ? "acceptance: all required criteria passed" : "acceptance: required criteria failed")
            << std::endl;
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
