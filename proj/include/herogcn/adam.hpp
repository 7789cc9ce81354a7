#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "herogcn/errors.hpp"
#include "herogcn/matrix.hpp"
#include "herogcn/tape.hpp"

namespace herogcn {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Moment buffers are created on the first step and
/// must stay shape-congruent with the parameter list afterwards.
template <std::floating_point T>
class Adam {
 public:
  explicit Adam(AdamOptions opts = {}) : opts_(opts) {
    if (!(opts_.learning_rate > 0.0)) {
      throw ConfigError("Adam learning rate must be positive, got " + std::to_string(opts_.learning_rate));
    }
    if (!(opts_.beta1 >= 0.0 && opts_.beta1 < 1.0 && opts_.beta2 >= 0.0 && opts_.beta2 < 1.0)) {
      throw ConfigError("Adam betas must lie in [0, 1)");
    }
    if (!(opts_.epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
  }

  const AdamOptions& options() const noexcept { return opts_; }
  std::size_t steps() const noexcept { return step_; }
  std::span<const Matrix<T>> first_moments() const noexcept { return m_; }
  std::span<const Matrix<T>> second_moments() const noexcept { return v_; }

  /// One update of every parameter from its accumulated `grad`.
  void step(std::span<Parameter<T>* const> params) {
    if (m_.empty()) {
      for (const auto* p : params) {
        m_.push_back(Matrix<T>::zeros_like(p->value));
        v_.push_back(Matrix<T>::zeros_like(p->value));
      }
    }
    if (m_.size() != params.size()) throw ShapeError("Adam: parameter list changed size between steps");
    ++step_;
    const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(step_));
    const T b1 = static_cast<T>(opts_.beta1), b2 = static_cast<T>(opts_.beta2);
    const T step_size = static_cast<T>(opts_.learning_rate / bc1);
    const T inv_bc2 = static_cast<T>(1.0 / bc2);
    const T eps = static_cast<T>(opts_.epsilon);
    for (std::size_t p = 0; p < params.size(); ++p) {
      auto& param = *params[p];
      if (!param.value.same_shape(m_[p]) || !param.grad.same_shape(param.value)) {
        throw ShapeError("Adam: parameter '" + param.name + "' shape " + param.value.shape_string() +
                         " does not match its optimizer state " + m_[p].shape_string());
      }
      auto& m = m_[p];
      auto& v = v_[p];
      for (std::size_t i = 0; i < m.size(); ++i) {
        const T g = param.grad[i];
        m[i] = b1 * m[i] + (T{1} - b1) * g;
        v[i] = b2 * v[i] + (T{1} - b2) * g * g;
        param.value[i] -= step_size * m[i] / (std::sqrt(v[i] * inv_bc2) + eps);
      }
    }
  }

 private:
  AdamOptions opts_;
  std::size_t step_ = 0;
  std::vector<Matrix<T>> m_;
  std::vector<Matrix<T>> v_;
};

}  // namespace herogcn
