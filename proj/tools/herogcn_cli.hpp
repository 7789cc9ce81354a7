#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "herogcn/herogcn.hpp"

namespace herogcn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct Options {
  std::string edges;
  std::string attrs;
  std::string labels;
  std::string config;
  std::string out;
  std::optional<std::size_t> clusters;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<double> learning_rate;
  std::string dataset;
  std::string precision;
  std::size_t knn = 3;
  std::size_t repeats = 1;
  bool no_infomax = false;
  bool no_modularity = false;
  bool deterministic = false;
  std::vector<std::string> overrides;
  std::string save_graph;
  std::string save_pretrained;
  std::string load_pretrained;

  std::string generate;
  SbmOptions sbm;
};

inline nlohmann::json config_json(const TrainConfig& c) {
  return {{"layer_dims", c.layer_dims},
          {"alpha", c.alpha},
          {"t", c.sampled_layers},
          {"lambda1", c.lambda[0]},
          {"lambda2", c.lambda[1]},
          {"lambda3", c.lambda[2]},
          {"lambda4", c.lambda[3]},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"dataset", c.dataset},
          {"pretrain_epochs", c.pretrain_epochs},
          {"pretrain_learning_rate", c.pretrain_learning_rate},
          {"pretrain_batch_size", c.pretrain_batch_size},
          {"clusters", c.clusters},
          {"kmeans_restarts", c.kmeans_restarts},
          {"seed", c.seed},
          {"enable_infomax", c.enable_infomax},
          {"enable_modularity", c.enable_modularity},
          {"modularity_on_target", c.modularity_on_target},
          {"deterministic", c.deterministic},
          {"precision", to_string(c.precision)},
          {"log_every", c.log_every}};
}

/// The report document: losses, metrics, assignments, config_echo, elapsed_seconds.
inline nlohmann::json report_json(const RunReport& r, const TrainConfig& cfg) {
  nlohmann::json losses = nlohmann::json::array();
  for (const auto& e : r.losses) {
    losses.push_back({{"epoch", e.epoch},
                      {"L_R", e.losses.reconstruction},
                      {"L_I", e.losses.infomax},
                      {"L_C", e.losses.clustering},
                      {"L_G", e.losses.head},
                      {"L_M", e.losses.modularity},
                      {"L", e.losses.total}});
  }
  nlohmann::json metrics = {{"acc", nullptr}, {"nmi", nullptr}, {"ari", nullptr}, {"f1", nullptr}, {"modularity", nullptr}};
  if (r.metrics) {
    metrics["acc"] = r.metrics->acc;
    metrics["nmi"] = r.metrics->nmi;
    metrics["ari"] = r.metrics->ari;
    metrics["f1"] = r.metrics->f1;
  }
  if (r.modularity) metrics["modularity"] = *r.modularity;
  return {{"losses", std::move(losses)},
          {"pretrain_losses", r.pretrain_losses},
          {"metrics", std::move(metrics)},
          {"assignments", r.assignments},
          {"collapse_recoveries", r.collapse_recoveries},
          {"config_echo", config_json(cfg)},
          {"elapsed_seconds", r.elapsed_seconds}};
}

namespace detail {

template <std::floating_point T>
LabeledGraph<T> load_dataset(const Options& o) {
  if (o.generate == "sbm") return sbm_generate<T>(o.sbm);
  if (!o.generate.empty()) throw ConfigError("unknown generator '" + o.generate + "' (supported: sbm)");
  if (o.attrs.empty()) throw ConfigError("--attrs is required unless --generate is used");
  auto x = io::load_attributes<T>(o.attrs);
  LabeledGraph<T> out;
  if (!o.edges.empty()) {
    out.graph = AttributedGraph<T>(x.rows(), io::load_edges(o.edges), std::move(x));
  } else {
    out.graph = knn_graph(x, o.knn);
  }
  if (!o.labels.empty()) out.labels = io::load_labels(o.labels);
  return out;
}

inline nlohmann::json summarize(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {{"mean", mean}, {"std", std::sqrt(var / static_cast<double>(v.size()))}, {"values", v}};
}

template <std::floating_point T>
nlohmann::json run(const Options& o, TrainConfig cfg) {
  auto data = load_dataset<T>(o);
  if (!o.save_graph.empty()) {
    io::save_edges(o.save_graph + ".edges", data.graph.edges());
    io::save_attributes(o.save_graph + ".attrs", data.graph.attributes());
    if (!data.labels.empty()) io::save_labels(o.save_graph + ".labels", data.labels);
  }
  const LabelVector* truth = data.labels.empty() ? nullptr : &data.labels;
  if (truth != nullptr && truth->size() != data.graph.node_count()) {
    throw ParseError(o.labels + ": " + std::to_string(truth->size()) + " labels for " +
                     std::to_string(data.graph.node_count()) + " nodes");
  }
  auto report = train(data.graph, cfg, truth);
  auto doc = report_json(report, cfg);
  if (o.repeats > 1) {
    std::vector<double> acc, nmi, ari, f1;
    std::vector<std::uint64_t> seeds;
    auto collect = [&](const RunReport& r, std::uint64_t seed) {
      seeds.push_back(seed);
      if (!r.metrics) return;
      acc.push_back(r.metrics->acc);
      nmi.push_back(r.metrics->nmi);
      ari.push_back(r.metrics->ari);
      f1.push_back(r.metrics->f1);
    };
    collect(report, cfg.seed);
    for (std::size_t rep = 1; rep < o.repeats; ++rep) {
      TrainConfig c = cfg;
      c.seed = cfg.seed + rep;
      c.pretrained_out.clear();
      collect(train(data.graph, c, truth), c.seed);
    }
    nlohmann::json agg = {{"seeds", seeds}};
    if (!acc.empty()) {
      agg["acc"] = summarize(acc);
      agg["nmi"] = summarize(nmi);
      agg["ari"] = summarize(ari);
      agg["f1"] = summarize(f1);
    }
    doc["repeats"] = std::move(agg);
  }
  return doc;
}

}  // namespace detail

/// Parses flags, loads or generates the dataset, trains, and writes the JSON report.
inline int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"herogcn: higher-order graph clustering with fused autoencoder/GCN representations"};
  app.name("herogcn");
  Options o;
  app.add_option("--edges", o.edges, "Edge list file (one 'i j' per line, 0-based)");
  app.add_option("--attrs", o.attrs, "Attribute file (one node per line, optional 'n d' header)");
  app.add_option("--labels", o.labels, "Ground-truth label file (one integer per line)");
  app.add_option("--k", o.clusters, "Number of clusters K");
  app.add_option("--config", o.config, "Flat 'key = value' configuration file");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--epochs", o.epochs, "Joint training epochs");
  app.add_option("--lr", o.learning_rate, "Joint training learning rate");
  app.add_option("--dataset", o.dataset, "Dataset name selecting the default learning rate (acm, dblp, citeseer, usps, hhar)");
  app.add_option("--precision", o.precision, "float32 or float64")->check(CLI::IsMember({"float32", "float64"}));
  app.add_option("--knn", o.knn, "Neighbours per node for the cosine KNN graph used when --edges is absent");
  app.add_option("--repeats", o.repeats, "Train with seeds seed..seed+N-1 and report metric mean/std")
      ->check(CLI::PositiveNumber);
  app.add_flag("--no-infomax", o.no_infomax, "Disable the mutual-information term");
  app.add_flag("--no-modularity", o.no_modularity, "Disable the modularity term");
  app.add_flag("--deterministic", o.deterministic, "Single-threaded kernels with a fixed reduction order");
  app.add_option("--set", o.overrides, "Override one configuration key (key=value); repeatable");
  app.add_option("--out", o.out, "Write the JSON report here instead of stdout");
  app.add_option("--save-graph", o.save_graph, "Write <prefix>.edges/.attrs/.labels of the dataset used");
  app.add_option("--save-pretrained", o.save_pretrained, "Write the pretrained autoencoder checkpoint");
  app.add_option("--load-pretrained", o.load_pretrained, "Skip pretraining and load this checkpoint");
  app.add_option("--generate", o.generate, "Generate a synthetic dataset instead of loading files (sbm)");
  app.add_option("--blocks", o.sbm.blocks, "SBM: number of blocks");
  app.add_option("--per-block", o.sbm.per_block, "SBM: nodes per block");
  app.add_option("--p-in", o.sbm.p_in, "SBM: within-block edge probability");
  app.add_option("--p-out", o.sbm.p_out, "SBM: cross-block edge probability");
  app.add_option("--noise", o.sbm.noise, "SBM: attribute noise standard deviation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    TrainConfig cfg;
    if (!o.config.empty()) apply_config_file(cfg, o.config);
    for (const auto& kv : o.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      apply_setting(cfg, herogcn::detail::trim(kv.substr(0, eq)), herogcn::detail::trim(kv.substr(eq + 1)));
    }
    if (!o.dataset.empty()) apply_setting(cfg, "dataset", o.dataset);
    if (o.learning_rate) cfg.learning_rate = *o.learning_rate;
    if (o.epochs) cfg.epochs = *o.epochs;
    if (o.seed) {
      cfg.seed = *o.seed;
      o.sbm.seed = *o.seed;
    }
    if (!o.precision.empty()) apply_setting(cfg, "precision", o.precision);
    if (o.clusters) {
      cfg.clusters = *o.clusters;
    } else if (o.generate == "sbm" && cfg.clusters == 0) {
      cfg.clusters = o.sbm.blocks;
    }
    if (o.no_infomax) cfg.enable_infomax = false;
    if (o.no_modularity) cfg.enable_modularity = false;
    if (o.deterministic) cfg.deterministic = true;
    if (!o.save_pretrained.empty()) cfg.pretrained_out = o.save_pretrained;
    if (!o.load_pretrained.empty()) cfg.pretrained_in = o.load_pretrained;
    cfg.validate();

    const auto doc = cfg.precision == Precision::Float32 ? detail::run<float>(o, cfg) : detail::run<double>(o, cfg);
    if (o.out.empty()) {
      out << doc.dump(2) << '\n';
    } else {
      std::ofstream f(o.out);
      if (!f) throw FileError("cannot write report: " + o.out);
      f << doc.dump(2) << '\n';
    }
    return kExitOk;
  } catch (const FileError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

/// Convenience overload; `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> storage{"herogcn"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace herogcn::cli
