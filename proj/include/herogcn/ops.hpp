#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "herogcn/errors.hpp"
#include "herogcn/matrix.hpp"
#include "herogcn/tape.hpp"

// Differentiable operations over Var handles. Each op computes its forward value
// eagerly and records a local backward rule on the tape.
namespace herogcn {

namespace detail {

template <class T>
void require_same_shape(const char* op, const Matrix<T>& a, const Matrix<T>& b) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  }
}

template <class T>
void require_same_tape(const Var<T>& a, const Var<T>& b) {
  if (&a.tape() != &b.tape()) throw ConfigError("operands recorded on different tapes");
}

// Unary entrywise op: f gives the value, df(x, y) the local derivative.
template <class T, class F, class DF>
Var<T> unary(Var<T> a, F f, DF df) {
  const auto& av = a.value();
  Matrix<T> out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i]);
  const auto ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia, df](Tape<T>& t, const Matrix<T>& g) {
    const auto& x = t.value(ia);
    auto& ga = t.grad_ref(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * df(x[i]);
  });
}

}  // namespace detail

template <class T>
Var<T> matmul(Var<T> a, Var<T> b) {
  detail::require_same_tape(a, b);
  Matrix<T> out = kernels::matmul(a.value(), b.value());
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {ia, ib}, [ia, ib](Tape<T>& t, const Matrix<T>& g) {
    if (t.requires_grad(ia)) kernels::gemm_a_bt_acc(t.grad_ref(ia), g, t.value(ib));
    if (t.requires_grad(ib)) kernels::gemm_at_b_acc(t.grad_ref(ib), t.value(ia), g);
  });
}

template <class T>
Var<T> transpose(Var<T> a) {
  const auto ia = a.id();
  return a.tape().record(kernels::transpose(a.value()), {ia}, [ia](Tape<T>& t, const Matrix<T>& g) {
    auto& ga = t.grad_ref(ia);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) ga(j, i) += g(i, j);
  });
}

template <class T>
Var<T> add(Var<T> a, Var<T> b) {
  detail::require_same_tape(a, b);
  detail::require_same_shape("add", a.value(), b.value());
  Matrix<T> out = a.value();
  kernels::axpy(out, T{1}, b.value());
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {ia, ib}, [ia, ib](Tape<T>& t, const Matrix<T>& g) {
    if (t.requires_grad(ia)) kernels::axpy(t.grad_ref(ia), T{1}, g);
    if (t.requires_grad(ib)) kernels::axpy(t.grad_ref(ib), T{1}, g);
  });
}

template <class T>
Var<T> sub(Var<T> a, Var<T> b) {
  detail::require_same_tape(a, b);
  detail::require_same_shape("sub", a.value(), b.value());
  Matrix<T> out = a.value();
  kernels::axpy(out, T{-1}, b.value());
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {ia, ib}, [ia, ib](Tape<T>& t, const Matrix<T>& g) {
    if (t.requires_grad(ia)) kernels::axpy(t.grad_ref(ia), T{1}, g);
    if (t.requires_grad(ib)) kernels::axpy(t.grad_ref(ib), T{-1}, g);
  });
}

/// Hadamard product.
template <class T>
Var<T> mul(Var<T> a, Var<T> b) {
  detail::require_same_tape(a, b);
  detail::require_same_shape("mul", a.value(), b.value());
  const auto& av = a.value();
  const auto& bv = b.value();
  Matrix<T> out(av.rows(), av.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {ia, ib}, [ia, ib](Tape<T>& t, const Matrix<T>& g) {
    if (t.requires_grad(ia)) {
      auto& ga = t.grad_ref(ia);
      const auto& y = t.value(ib);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
    }
    if (t.requires_grad(ib)) {
      auto& gb = t.grad_ref(ib);
      const auto& x = t.value(ia);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * x[i];
    }
  });
}

template <class T>
Var<T> scale(Var<T> a, T s) {
  return detail::unary(a, [s](T x) { return s * x; }, [s](T) { return s; });
}

template <class T>
Var<T> add_scalar(Var<T> a, T s) {
  return detail::unary(a, [s](T x) { return x + s; }, [](T) { return T{1}; });
}

/// Subgradient at exactly 0 is 0.
template <class T>
Var<T> relu(Var<T> a) {
  return detail::unary(a, [](T x) { return x > T{0} ? x : T{0}; }, [](T x) { return x > T{0} ? T{1} : T{0}; });
}

template <class T>
T sigmoid_scalar(T x) {
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

template <class T>
Var<T> sigmoid(Var<T> a) {
  return detail::unary(a, [](T x) { return sigmoid_scalar(x); },
                       [](T x) {
                         const T s = sigmoid_scalar(x);
                         return s * (T{1} - s);
                       });
}

/// Natural log; throws DomainError on non-positive entries. Clamp first.
template <class T>
Var<T> log(Var<T> a) {
  for (T v : a.value().data()) {
    if (!(v > T{0})) throw DomainError("log of non-positive entry " + std::to_string(v));
  }
  return detail::unary(a, [](T x) { return std::log(x); }, [](T x) { return T{1} / x; });
}

template <class T>
Var<T> square(Var<T> a) {
  return detail::unary(a, [](T x) { return x * x; }, [](T x) { return T{2} * x; });
}

/// 1/x; throws DomainError on zero entries.
template <class T>
Var<T> reciprocal(Var<T> a) {
  for (T v : a.value().data()) {
    if (v == T{0}) throw DomainError("reciprocal of zero");
  }
  return detail::unary(a, [](T x) { return T{1} / x; }, [](T x) { return -T{1} / (x * x); });
}

/// Entrywise clamp to [lo, hi]; gradient passes only strictly inside.
template <class T>
Var<T> clamp(Var<T> a, T lo, T hi) {
  return detail::unary(a, [lo, hi](T x) { return std::clamp(x, lo, hi); },
                       [lo, hi](T x) { return (x > lo && x < hi) ? T{1} : T{0}; });
}

/// Sum of all entries, as 1x1.
template <class T>
Var<T> sum(Var<T> a) {
  const auto ia = a.id();
  return a.tape().record(Matrix<T>(1, 1, kernels::sum(a.value())), {ia}, [ia](Tape<T>& t, const Matrix<T>& g) {
    auto& ga = t.grad_ref(ia);
    for (auto& v : ga.data()) v += g[0];
  });
}

/// Per-row sums, n x 1.
template <class T>
Var<T> row_sum(Var<T> a) {
  const auto& av = a.value();
  Matrix<T> out(av.rows(), 1);
  for (std::size_t i = 0; i < av.rows(); ++i) {
    T s{0};
    for (T v : av.row(i)) s += v;
    out(i, 0) = s;
  }
  const auto ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia](Tape<T>& t, const Matrix<T>& g) {
    auto& ga = t.grad_ref(ia);
    for (std::size_t i = 0; i < ga.rows(); ++i)
      for (auto& v : ga.row(i)) v += g(i, 0);
  });
}

/// Per-column sums, 1 x c.
template <class T>
Var<T> col_sum(Var<T> a) {
  const auto& av = a.value();
  Matrix<T> out(1, av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(0, j) += av(i, j);
  const auto ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia](Tape<T>& t, const Matrix<T>& g) {
    auto& ga = t.grad_ref(ia);
    for (std::size_t i = 0; i < ga.rows(); ++i)
      for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) += g(0, j);
  });
}

/// Column means, 1 x c.
template <class T>
Var<T> mean_rows(Var<T> a) {
  const auto n = a.rows();
  if (n == 0) throw ShapeError("mean_rows of empty matrix");
  return scale(col_sum(a), T{1} / static_cast<T>(n));
}

/// a + bias, with a 1 x c bias broadcast across rows.
template <class T>
Var<T> add_row(Var<T> a, Var<T> bias) {
  detail::require_same_tape(a, bias);
  const auto& av = a.value();
  const auto& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != av.cols()) {
    throw ShapeError("add_row: bias " + bv.shape_string() + " does not broadcast over " + av.shape_string());
  }
  Matrix<T> out = av;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += bv(0, j);
  const auto ia = a.id(), ib = bias.id();
  return a.tape().record(std::move(out), {ia, ib}, [ia, ib](Tape<T>& t, const Matrix<T>& g) {
    if (t.requires_grad(ia)) kernels::axpy(t.grad_ref(ia), T{1}, g);
    if (t.requires_grad(ib)) {
      auto& gb = t.grad_ref(ib);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
    }
  });
}

/// a_ij / v_i with v of shape n x 1.
template <class T>
Var<T> div_rows(Var<T> a, Var<T> v) {
  detail::require_same_tape(a, v);
  const auto& av = a.value();
  const auto& vv = v.value();
  if (vv.rows() != av.rows() || vv.cols() != 1) {
    throw ShapeError("div_rows: divisor " + vv.shape_string() + " does not match " + av.shape_string());
  }
  for (T x : vv.data()) {
    if (x == T{0}) throw DomainError("div_rows: division by zero");
  }
  Matrix<T> out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) = av(i, j) / vv(i, 0);
  const auto ia = a.id(), iv = v.id();
  return a.tape().record(std::move(out), {ia, iv}, [ia, iv](Tape<T>& t, const Matrix<T>& g) {
    const auto& x = t.value(ia);
    const auto& d = t.value(iv);
    if (t.requires_grad(ia)) {
      auto& ga = t.grad_ref(ia);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) ga(i, j) += g(i, j) / d(i, 0);
    }
    if (t.requires_grad(iv)) {
      auto& gv = t.grad_ref(iv);
      for (std::size_t i = 0; i < g.rows(); ++i) {
        T s{0};
        for (std::size_t j = 0; j < g.cols(); ++j) s += g(i, j) * x(i, j);
        gv(i, 0) -= s / (d(i, 0) * d(i, 0));
      }
    }
  });
}

/// a_ij / v_j with v of shape 1 x c.
template <class T>
Var<T> div_cols(Var<T> a, Var<T> v) {
  detail::require_same_tape(a, v);
  const auto& av = a.value();
  const auto& vv = v.value();
  if (vv.rows() != 1 || vv.cols() != av.cols()) {
    throw ShapeError("div_cols: divisor " + vv.shape_string() + " does not match " + av.shape_string());
  }
  for (T x : vv.data()) {
    if (x == T{0}) throw DomainError("div_cols: division by zero");
  }
  Matrix<T> out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) = av(i, j) / vv(0, j);
  const auto ia = a.id(), iv = v.id();
  return a.tape().record(std::move(out), {ia, iv}, [ia, iv](Tape<T>& t, const Matrix<T>& g) {
    const auto& x = t.value(ia);
    const auto& d = t.value(iv);
    if (t.requires_grad(ia)) {
      auto& ga = t.grad_ref(ia);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) ga(i, j) += g(i, j) / d(0, j);
    }
    if (t.requires_grad(iv)) {
      auto& gv = t.grad_ref(iv);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) gv(0, j) -= g(i, j) * x(i, j) / (d(0, j) * d(0, j));
    }
  });
}

/// Rows scaled to sum to one.
template <class T>
Var<T> row_normalize(Var<T> a) {
  return div_rows(a, row_sum(a));
}

/// Column-wise concatenation of equally tall blocks.
template <class T>
Var<T> hconcat(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw ShapeError("hconcat of zero blocks");
  const std::size_t n = parts.front().rows();
  std::size_t width = 0;
  std::vector<std::size_t> ids;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    detail::require_same_tape(parts.front(), p);
    if (p.rows() != n) throw ShapeError("hconcat: row count mismatch " + std::to_string(p.rows()) + " vs " + std::to_string(n));
    ids.push_back(p.id());
    offsets.push_back(width);
    width += p.cols();
  }
  Matrix<T> out(n, width);
  for (std::size_t b = 0; b < parts.size(); ++b) {
    const auto& v = parts[b].value();
    for (std::size_t i = 0; i < n; ++i) std::copy(v.row(i).begin(), v.row(i).end(), out.row(i).begin() + offsets[b]);
  }
  return parts.front().tape().record(std::move(out), ids, [ids, offsets](Tape<T>& t, const Matrix<T>& g) {
    for (std::size_t b = 0; b < ids.size(); ++b) {
      if (!t.requires_grad(ids[b])) continue;
      auto& gb = t.grad_ref(ids[b]);
      for (std::size_t i = 0; i < gb.rows(); ++i)
        for (std::size_t j = 0; j < gb.cols(); ++j) gb(i, j) += g(i, offsets[b] + j);
    }
  });
}

/// Numerically stable softmax along each row.
template <class T>
Var<T> row_softmax(Var<T> a) {
  const auto& av = a.value();
  Matrix<T> out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    const auto r = av.row(i);
    if (r.empty()) continue;
    const T mx = *std::max_element(r.begin(), r.end());
    T z{0};
    for (std::size_t j = 0; j < r.size(); ++j) {
      out(i, j) = std::exp(r[j] - mx);
      z += out(i, j);
    }
    for (std::size_t j = 0; j < r.size(); ++j) out(i, j) /= z;
  }
  const auto ia = a.id();
  return a.tape().record(out, {ia}, [ia, y = out](Tape<T>& t, const Matrix<T>& g) {
    auto& ga = t.grad_ref(ia);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      T dot{0};
      for (std::size_t j = 0; j < g.cols(); ++j) dot += g(i, j) * y(i, j);
      for (std::size_t j = 0; j < g.cols(); ++j) ga(i, j) += y(i, j) * (g(i, j) - dot);
    }
  });
}

/// Squared Euclidean distances between rows: out_ik = ||a_i - b_k||^2.
template <class T>
Var<T> pairwise_sq_dist(Var<T> a, Var<T> b) {
  detail::require_same_tape(a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.cols() != bv.cols()) {
    throw ShapeError("pairwise_sq_dist: widths differ " + av.shape_string() + " vs " + bv.shape_string());
  }
  Matrix<T> out(av.rows(), bv.rows());
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t k = 0; k < bv.rows(); ++k) {
      T s{0};
      for (std::size_t j = 0; j < av.cols(); ++j) {
        const T d = av(i, j) - bv(k, j);
        s += d * d;
      }
      out(i, k) = s;
    }
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {ia, ib}, [ia, ib](Tape<T>& t, const Matrix<T>& g) {
    const auto& x = t.value(ia);
    const auto& c = t.value(ib);
    const bool ga_on = t.requires_grad(ia), gb_on = t.requires_grad(ib);
    Matrix<T>* ga = ga_on ? &t.grad_ref(ia) : nullptr;
    Matrix<T>* gb = gb_on ? &t.grad_ref(ib) : nullptr;
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t k = 0; k < c.rows(); ++k) {
        const T w = T{2} * g(i, k);
        for (std::size_t j = 0; j < x.cols(); ++j) {
          const T d = w * (x(i, j) - c(k, j));
          if (ga) (*ga)(i, j) += d;
          if (gb) (*gb)(k, j) -= d;
        }
      }
  });
}

/// KL(target || approx) = sum_ik p_ik log(p_ik / q_ik) against a constant target.
/// Terms with p_ik = 0 contribute 0; q_ik is clamped below at `floor`.
template <class T>
Var<T> kl_divergence(const Matrix<T>& target, Var<T> approx, T floor = T(1e-10)) {
  const auto& q = approx.value();
  detail::require_same_shape("kl_divergence", target, q);
  T total{0};
  for (std::size_t i = 0; i < q.size(); ++i) {
    const T p = target[i];
    if (p <= T{0}) continue;
    total += p * (std::log(p) - std::log(std::max(q[i], floor)));
  }
  const auto iq = approx.id();
  return approx.tape().record(Matrix<T>(1, 1, total), {iq}, [iq, p = target, floor](Tape<T>& t, const Matrix<T>& g) {
    const auto& qv = t.value(iq);
    auto& gq = t.grad_ref(iq);
    for (std::size_t i = 0; i < qv.size(); ++i) {
      if (p[i] <= T{0} || qv[i] <= floor) continue;
      gq[i] -= g[0] * p[i] / qv[i];
    }
  });
}

}  // namespace herogcn
