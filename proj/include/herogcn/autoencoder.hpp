#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "herogcn/adam.hpp"
#include "herogcn/errors.hpp"
#include "herogcn/matrix.hpp"
#include "herogcn/ops.hpp"
#include "herogcn/tape.hpp"

namespace herogcn {

/// Uniform in ±sqrt(6 / (fan_in + fan_out)).
template <std::floating_point T, class Rng>
Matrix<T> glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix<T> w(fan_in, fan_out);
  for (auto& v : w.data()) v = static_cast<T>(dist(rng));
  return w;
}

/// Fully connected layer y = x W + b, with W stored fan_in x fan_out.
template <std::floating_point T>
struct DenseLayer {
  Parameter<T> weight;
  Parameter<T> bias;

  std::size_t in_dim() const noexcept { return weight.value.rows(); }
  std::size_t out_dim() const noexcept { return weight.value.cols(); }

  Var<T> apply(Tape<T>& tape, Var<T> x) {
    return add_row(matmul(x, tape.parameter(weight)), tape.parameter(bias));
  }
};

template <std::floating_point T, class Rng>
DenseLayer<T> make_dense(std::string name, std::size_t in, std::size_t out, Rng& rng) {
  return {Parameter<T>(name + ".weight", glorot_uniform<T>(in, out, rng)), Parameter<T>(name + ".bias", Matrix<T>(1, out))};
}

/// Encoder: dims = {d, dim_1, ..., dim_L}; every layer is followed by ReLU.
template <std::floating_point T>
struct EncoderStack {
  std::vector<std::size_t> dims;
  std::vector<DenseLayer<T>> layers;

  std::size_t depth() const noexcept { return layers.size(); }
  std::size_t input_dim() const { return dims.front(); }
  std::size_t bottleneck_dim() const { return dims.back(); }
};

/// Mirror of the encoder: dims_L -> ... -> d. Hidden layers use ReLU, the output is linear.
template <std::floating_point T>
struct DecoderStack {
  std::vector<std::size_t> dims;
  std::vector<DenseLayer<T>> layers;
};

inline void validate_layer_dims(const std::vector<std::size_t>& dims) {
  if (dims.size() < 2) throw ConfigError("need an input width and at least one layer width");
  for (auto d : dims) {
    if (d == 0) throw ConfigError("layer widths must be positive");
  }
}

template <std::floating_point T, class Rng>
EncoderStack<T> make_encoder(const std::vector<std::size_t>& dims, Rng& rng) {
  validate_layer_dims(dims);
  EncoderStack<T> enc{dims, {}};
  for (std::size_t l = 1; l < dims.size(); ++l) {
    enc.layers.push_back(make_dense<T>("enc" + std::to_string(l), dims[l - 1], dims[l], rng));
  }
  return enc;
}

template <std::floating_point T, class Rng>
DecoderStack<T> make_decoder(const std::vector<std::size_t>& encoder_dims, Rng& rng) {
  validate_layer_dims(encoder_dims);
  DecoderStack<T> dec{{encoder_dims.rbegin(), encoder_dims.rend()}, {}};
  for (std::size_t l = 1; l < dec.dims.size(); ++l) {
    dec.layers.push_back(make_dense<T>("dec" + std::to_string(l), dec.dims[l - 1], dec.dims[l], rng));
  }
  return dec;
}

/// Returns E^(1..L).
template <std::floating_point T>
std::vector<Var<T>> encode(Tape<T>& tape, EncoderStack<T>& enc, Var<T> x) {
  if (x.cols() != enc.input_dim()) {
    throw ShapeError("encoder expects width " + std::to_string(enc.input_dim()) + ", got " + x.value().shape_string());
  }
  std::vector<Var<T>> outs;
  outs.reserve(enc.depth());
  Var<T> h = x;
  for (auto& layer : enc.layers) {
    h = relu(layer.apply(tape, h));
    outs.push_back(h);
  }
  return outs;
}

template <std::floating_point T>
Var<T> decode(Tape<T>& tape, DecoderStack<T>& dec, Var<T> z) {
  if (z.cols() != dec.dims.front()) {
    throw ShapeError("decoder expects width " + std::to_string(dec.dims.front()) + ", got " + z.value().shape_string());
  }
  Var<T> h = z;
  for (std::size_t l = 0; l < dec.layers.size(); ++l) {
    h = dec.layers[l].apply(tape, h);
    if (l + 1 < dec.layers.size()) h = relu(h);
  }
  return h;
}

/// L_R = ||X - X̂||_F^2 / (2N), N = number of rows.
template <std::floating_point T>
Var<T> reconstruction_loss(Var<T> x, Var<T> x_hat) {
  if (!x.value().same_shape(x_hat.value())) {
    throw ShapeError("reconstruction_loss: " + x.value().shape_string() + " vs " + x_hat.value().shape_string());
  }
  if (x.rows() == 0) throw ShapeError("reconstruction_loss of empty matrix");
  return scale(sum(square(sub(x, x_hat))), T{1} / (T{2} * static_cast<T>(x.rows())));
}

template <std::floating_point T>
std::vector<Parameter<T>*> parameters_of(EncoderStack<T>& enc, DecoderStack<T>& dec) {
  std::vector<Parameter<T>*> out;
  for (auto& l : enc.layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  for (auto& l : dec.layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

struct PretrainOptions {
  std::size_t epochs = 30;
  double learning_rate = 1e-3;
  std::size_t batch_size = 256;
};

template <std::floating_point T>
struct PretrainResult {
  T initial_loss{};
  /// Full-data L_R after each epoch.
  std::vector<T> epoch_losses;
};

/// Full-data reconstruction loss without touching gradients.
template <std::floating_point T>
T evaluate_reconstruction(EncoderStack<T>& enc, DecoderStack<T>& dec, const Matrix<T>& x) {
  Tape<T> tape;
  auto xv = tape.constant(x);
  auto e = encode(tape, enc, xv);
  return reconstruction_loss(xv, decode(tape, dec, e.back())).item();
}

/// Minimizes L_R alone with Adam over shuffled mini-batches of rows.
template <std::floating_point T, class Rng>
PretrainResult<T> pretrain(EncoderStack<T>& enc, DecoderStack<T>& dec, const Matrix<T>& x, PretrainOptions opts,
                           Rng& rng) {
  if (opts.epochs < 1) throw ConfigError("pretraining needs at least one epoch");
  if (opts.batch_size == 0) throw ConfigError("batch size must be positive");
  const std::size_t n = x.rows();
  if (opts.batch_size > n) {
    warn("batch size " + std::to_string(opts.batch_size) + " exceeds " + std::to_string(n) + " samples; clamping");
    opts.batch_size = n;
  }
  Adam<T> adam({.learning_rate = opts.learning_rate});
  auto params = parameters_of(enc, dec);
  PretrainResult<T> result;
  result.initial_loss = evaluate_reconstruction(enc, dec, x);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += opts.batch_size) {
      const std::size_t stop = std::min(n, start + opts.batch_size);
      Matrix<T> batch(stop - start, x.cols());
      for (std::size_t r = start; r < stop; ++r) {
        std::copy(x.row(order[r]).begin(), x.row(order[r]).end(), batch.row(r - start).begin());
      }
      for (auto* p : params) p->zero_grad();
      Tape<T> tape;
      auto xv = tape.constant(std::move(batch));
      auto e = encode(tape, enc, xv);
      auto loss = reconstruction_loss(xv, decode(tape, dec, e.back()));
      tape.backward(loss);
      adam.step(params);
    }
    result.epoch_losses.push_back(evaluate_reconstruction(enc, dec, x));
  }
  return result;
}

// Checkpoint text format:
//   herogcn-autoencoder 1
//   dims <d> <dim_1> ... <dim_L>
//   then, for every encoder layer followed by every decoder layer, the weight
//   block and the bias block, each as "<rows> <cols>" followed by row-major values.
inline constexpr const char* kCheckpointMagic = "herogcn-autoencoder";
inline constexpr int kCheckpointVersion = 1;

template <std::floating_point T>
void save_checkpoint(const std::filesystem::path& path, const EncoderStack<T>& enc, const DecoderStack<T>& dec) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write checkpoint: " + path.string());
  out << kCheckpointMagic << ' ' << kCheckpointVersion << "\ndims";
  for (auto d : enc.dims) out << ' ' << d;
  out << '\n' << std::setprecision(std::numeric_limits<T>::max_digits10);
  auto block = [&](const Matrix<T>& m) {
    out << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.size(); ++i) out << m[i] << (i + 1 == m.size() ? '\n' : ' ');
  };
  for (const auto& l : enc.layers) {
    block(l.weight.value);
    block(l.bias.value);
  }
  for (const auto& l : dec.layers) {
    block(l.weight.value);
    block(l.bias.value);
  }
}

/// Loads into already-shaped stacks; a checkpoint with different layer dims is rejected.
template <std::floating_point T>
void load_checkpoint(const std::filesystem::path& path, EncoderStack<T>& enc, DecoderStack<T>& dec) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open checkpoint: " + path.string());
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != kCheckpointMagic || version != kCheckpointVersion) {
    throw ParseError(path.string() + ": not a version-" + std::to_string(kCheckpointVersion) + " autoencoder checkpoint");
  }
  std::string tag;
  in >> tag;
  std::string rest;
  std::getline(in, rest);
  std::istringstream dims_line(rest);
  std::vector<std::size_t> dims;
  for (std::size_t d; dims_line >> d;) dims.push_back(d);
  if (tag != "dims" || dims != enc.dims) {
    throw ShapeError(path.string() + ": checkpoint layer dims do not match the model");
  }
  auto block = [&](Matrix<T>& m) {
    std::size_t r = 0, c = 0;
    if (!(in >> r >> c) || r != m.rows() || c != m.cols()) {
      throw ShapeError(path.string() + ": parameter block shape does not match " + m.shape_string());
    }
    for (auto& v : m.data()) {
      double x = 0.0;
      if (!(in >> x)) throw ParseError(path.string() + ": truncated parameter block");
      v = static_cast<T>(x);
    }
  };
  EncoderStack<T> enc_in = enc;
  DecoderStack<T> dec_in = dec;
  for (auto& l : enc_in.layers) {
    block(l.weight.value);
    block(l.bias.value);
  }
  for (auto& l : dec_in.layers) {
    block(l.weight.value);
    block(l.bias.value);
  }
  enc = std::move(enc_in);
  dec = std::move(dec_in);
}

}  // namespace herogcn
