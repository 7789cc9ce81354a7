#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "herogcn/errors.hpp"

namespace herogcn {

enum class Precision { Float32, Float64 };

inline std::string to_string(Precision p) { return p == Precision::Float32 ? "float32" : "float64"; }

/// Learning rates tuned per benchmark dataset; unknown names fall back to 1e-4.
inline double default_learning_rate(std::string name) {
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  static const std::map<std::string, double> table = {
      {"acm", 1e-4}, {"usps", 1e-4}, {"dblp", 3e-4}, {"citeseer", 2e-4}, {"hhar", 5e-5}, {"synthetic", 1e-4}};
  auto it = table.find(name);
  return it == table.end() ? 1e-4 : it->second;
}

struct TrainConfig {
  /// Encoder/GCN layer widths dim_1..dim_L; the input width comes from the data.
  std::vector<std::size_t> layer_dims{500, 500, 2000, 10};
  double alpha = 0.5;
  std::size_t sampled_layers = 3;
  /// λ₁..λ₄ weighting L_I, L_C, L_G, L_M.
  std::array<double, 4> lambda{0.5, 0.1, 0.01, 0.05};
  std::size_t epochs = 1500;
  double learning_rate = 1e-4;
  std::string dataset = "synthetic";

  std::size_t pretrain_epochs = 30;
  double pretrain_learning_rate = 1e-3;
  std::size_t pretrain_batch_size = 256;
  std::string pretrained_in;
  std::string pretrained_out;

  std::size_t clusters = 0;
  std::size_t kmeans_restarts = 20;
  std::uint64_t seed = 0;

  bool enable_infomax = true;
  bool enable_modularity = true;
  /// Modularity on P (as a differentiable function of Q) when true, on Q otherwise.
  bool modularity_on_target = true;

  bool deterministic = false;
  Precision precision = Precision::Float64;
  std::size_t log_every = 1;

  std::size_t depth() const noexcept { return layer_dims.size(); }

  void validate() const {
    if (layer_dims.empty()) throw ConfigError("layer_dims must list at least one width");
    for (auto d : layer_dims) {
      if (d == 0) throw ConfigError("layer widths must be positive");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
    if (sampled_layers < 1 || sampled_layers > depth()) {
      throw ConfigError("t must lie in [1, " + std::to_string(depth()) + "], got " + std::to_string(sampled_layers));
    }
    for (std::size_t i = 0; i < lambda.size(); ++i) {
      if (!(lambda[i] >= 0.0)) throw ConfigError("lambda" + std::to_string(i + 1) + " must be nonnegative");
    }
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (pretrain_epochs < 1 && pretrained_in.empty()) throw ConfigError("pretrain_epochs must be at least 1");
    if (!(pretrain_learning_rate > 0.0)) throw ConfigError("pretrain_learning_rate must be positive");
    if (pretrain_batch_size < 1) throw ConfigError("pretrain_batch_size must be at least 1");
    if (clusters < 2) throw ConfigError("number of clusters K must be at least 2");
    if (log_every < 1) throw ConfigError("log_every must be at least 1");
  }
};

namespace detail {

inline std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline double to_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) throw ConfigError(key + ": expected a real number, got '" + v + "'");
  return out;
}

inline std::uint64_t to_count(const std::string& key, const std::string& v) {
  if (v.empty() || !std::all_of(v.begin(), v.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return std::stoull(v);
}

inline bool to_bool(const std::string& key, std::string v) {
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

}  // namespace detail

/// Applies one `key = value` override. Unknown keys are rejected.
inline void apply_setting(TrainConfig& cfg, const std::string& key, const std::string& value) {
  using namespace detail;
  if (key == "layer_dims") {
    std::string v = value;
    std::replace(v.begin(), v.end(), ',', ' ');
    std::replace(v.begin(), v.end(), '-', ' ');
    std::istringstream in(v);
    std::vector<std::size_t> dims;
    for (std::string tok; in >> tok;) dims.push_back(to_count(key, tok));
    if (dims.empty()) throw ConfigError("layer_dims: no widths given");
    cfg.layer_dims = dims;
  } else if (key == "alpha") {
    cfg.alpha = to_real(key, value);
  } else if (key == "t" || key == "sampled_layers") {
    cfg.sampled_layers = to_count(key, value);
  } else if (key.size() == 7 && key.starts_with("lambda") && key[6] >= '1' && key[6] <= '4') {
    cfg.lambda[static_cast<std::size_t>(key[6] - '1')] = to_real(key, value);
  } else if (key == "epochs") {
    cfg.epochs = to_count(key, value);
  } else if (key == "learning_rate") {
    cfg.learning_rate = to_real(key, value);
  } else if (key == "dataset") {
    cfg.dataset = value;
    cfg.learning_rate = default_learning_rate(value);
  } else if (key == "pretrain_epochs") {
    cfg.pretrain_epochs = to_count(key, value);
  } else if (key == "pretrain_learning_rate") {
    cfg.pretrain_learning_rate = to_real(key, value);
  } else if (key == "pretrain_batch_size") {
    cfg.pretrain_batch_size = to_count(key, value);
  } else if (key == "pretrained_in") {
    cfg.pretrained_in = value;
  } else if (key == "pretrained_out") {
    cfg.pretrained_out = value;
  } else if (key == "clusters") {
    cfg.clusters = to_count(key, value);
  } else if (key == "kmeans_restarts") {
    cfg.kmeans_restarts = to_count(key, value);
  } else if (key == "seed") {
    cfg.seed = to_count(key, value);
  } else if (key == "enable_infomax") {
    cfg.enable_infomax = to_bool(key, value);
  } else if (key == "enable_modularity") {
    cfg.enable_modularity = to_bool(key, value);
  } else if (key == "modularity_on_target") {
    cfg.modularity_on_target = to_bool(key, value);
  } else if (key == "deterministic") {
    cfg.deterministic = to_bool(key, value);
  } else if (key == "precision") {
    if (value == "float32" || value == "float") {
      cfg.precision = Precision::Float32;
    } else if (value == "float64" || value == "double") {
      cfg.precision = Precision::Float64;
    } else {
      throw ConfigError("precision: expected float32 or float64, got '" + value + "'");
    }
  } else if (key == "log_every") {
    cfg.log_every = to_count(key, value);
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

/// Flat `key = value` text; '#' starts a comment. Errors carry `path:line:`.
inline void apply_config_file(TrainConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open config file: " + path.string());
  std::string line;
  for (std::size_t ln = 1; std::getline(in, line); ++ln) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(ln) + ": expected 'key = value'");
    }
    try {
      apply_setting(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ParseError(path.string() + ":" + std::to_string(ln) + ": " + e.what());
    }
  }
}

}  // namespace herogcn
