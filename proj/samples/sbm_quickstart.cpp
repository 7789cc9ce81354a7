// Cluster a small planted-partition graph and print the metrics.
#include <iostream>

#include "herogcn/herogcn.hpp"

int main() {
  using namespace herogcn;
  auto data = sbm_generate<double>({.blocks = 3, .per_block = 50, .p_in = 0.3, .p_out = 0.01, .noise = 0.1, .seed = 1});

  TrainConfig cfg;
  cfg.layer_dims = {64, 64, 128, 10};
  cfg.clusters = 3;
  cfg.epochs = 200;
  cfg.learning_rate = 1e-3;
  cfg.pretrain_epochs = 100;
  cfg.log_every = 50;

  const auto report = train(data.graph, cfg, &data.labels);
  for (const auto& e : report.losses) std::cout << "epoch " << e.epoch << "  L = " << e.losses.total << '\n';
  std::cout << "ACC " << report.metrics->acc << "  NMI " << report.metrics->nmi << "  ARI " << report.metrics->ari
            << "  F1 " << report.metrics->f1 << '\n';
  if (report.modularity) std::cout << "modularity " << *report.modularity << '\n';
}
