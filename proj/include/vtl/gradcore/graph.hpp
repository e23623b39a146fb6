// Copyright 2026 The vtl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vtl/error.hpp"
#include "vtl/gradcore/tensor.hpp"

namespace vtl {

/// A named leaf tensor with its gradient accumulator. Owned by a model;
/// graphs only hold pointers, so a model must outlive the graphs built on it.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string n, Tensor<T> v, bool train = true)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()), trainable(train) {}

  void zero_grad() { grad = Tensor<T>(value.shape()); }
};

/// Handle to a node in a Graph.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
};

/// Tape-based reverse-mode differentiation. Every operator evaluates eagerly
/// and records how to push gradients back to its inputs; `backward` replays
/// the tape in reverse, so node order is always a valid topological order.
///
/// Outputs are checked for NaN/Inf after every operator. Reductions
/// accumulate in double regardless of T.
template <typename T>
class Graph {
 public:
  using TensorT = Tensor<T>;
  using MatR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MapR = Eigen::Map<MatR>;
  using CMapR = Eigen::Map<const MatR>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) noexcept = default;
  Graph& operator=(Graph&&) noexcept = default;

  const TensorT& value(Var v) const { return nodes_.at(v.id).value; }
  const TensorT& grad(Var v) const { return nodes_.at(v.id).grad; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const std::string& op_name(Var v) const { return nodes_.at(v.id).op; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

  // ---- leaves -------------------------------------------------------------

  Var input(TensorT t) { return leaf("input", std::move(t), nullptr); }

  /// Frozen parameters enter the tape as constants.
  Var param(Parameter<T>& p) {
    if (p.grad.shape() != p.value.shape()) p.zero_grad();
    return leaf(p.name.empty() ? "param" : p.name, p.value, p.trainable ? &p : nullptr);
  }

  /// Copies the value without a gradient path.
  Var stop_gradient(Var x) { return leaf("stop_gradient", value(x), nullptr); }

  // ---- dense algebra ------------------------------------------------------

  /// y = x W + b with x [B,I], W [I,O], b [O].
  Var affine(Var x, Var w, Var b) {
    const auto& xs = value(x).shape();
    const auto& ws = value(w).shape();
    const auto& bs = value(b).shape();
    if (xs.size() != 2 || ws.size() != 2 || bs.size() != 1 || xs[1] != ws[0] || bs[0] != ws[1]) {
      throw ShapeError("affine: cannot apply weight " + shape_string(ws) + " and bias " +
                       shape_string(bs) + " to input " + shape_string(xs));
    }
    const std::size_t batch = xs[0], in = xs[1], out = ws[1];
    TensorT y({batch, out});
    MapR ym(y.raw(), batch, out);
    ym.noalias() = CMapR(value(x).raw(), batch, in) * CMapR(value(w).raw(), in, out);
    const T* bp = value(b).raw();
    for (std::size_t r = 0; r < batch; ++r)
      for (std::size_t c = 0; c < out; ++c) ym(r, c) += bp[c];
    return push("affine", std::move(y), {x, w, b}, [batch, in, out](Graph& g, std::size_t self) {
      const auto& n = g.nodes_[self];
      const std::size_t xi = n.inputs[0], wi = n.inputs[1], bi = n.inputs[2];
      CMapR dy(n.grad.raw(), batch, out);
      if (g.nodes_[xi].requires_grad) {
        MapR(g.grad_of(xi).raw(), batch, in).noalias() +=
            dy * CMapR(g.nodes_[wi].value.raw(), in, out).transpose();
      }
      if (g.nodes_[wi].requires_grad) {
        MapR(g.grad_of(wi).raw(), in, out).noalias() +=
            CMapR(g.nodes_[xi].value.raw(), batch, in).transpose() * dy;
      }
      if (g.nodes_[bi].requires_grad) {
        T* db = g.grad_of(bi).raw();
        for (std::size_t r = 0; r < batch; ++r)
          for (std::size_t c = 0; c < out; ++c) db[c] += dy(r, c);
      }
    });
  }

  /// 2-D convolution, x [B,C,H,W], w [O,C,K,K], b [O], zero padding.
  Var conv2d(Var x, Var w, Var b, std::size_t stride, std::size_t pad) {
    const auto& xs = value(x).shape();
    const auto& ws = value(w).shape();
    const auto& bs = value(b).shape();
    if (stride < 1) throw ShapeError("conv2d: stride must be >= 1");
    if (xs.size() != 4 || ws.size() != 4 || bs.size() != 1 || ws[1] != xs[1] || ws[2] != ws[3] ||
        bs[0] != ws[0] || xs[2] + 2 * pad < ws[2] || xs[3] + 2 * pad < ws[3]) {
      throw ShapeError("conv2d: cannot apply kernel " + shape_string(ws) + " and bias " +
                       shape_string(bs) + " to input " + shape_string(xs));
    }
    ConvGeom geo;
    geo.batch = xs[0];
    geo.channels = xs[1];
    geo.height = xs[2];
    geo.width = xs[3];
    geo.out_channels = ws[0];
    geo.kernel = ws[2];
    geo.stride = stride;
    geo.pad = pad;
    geo.out_h = (geo.height + 2 * pad - geo.kernel) / stride + 1;
    geo.out_w = (geo.width + 2 * pad - geo.kernel) / stride + 1;
    const std::size_t ckk = geo.channels * geo.kernel * geo.kernel;
    const std::size_t pix = geo.out_h * geo.out_w;

    // Columns are kept for the weight gradient.
    auto cols = std::make_shared<AlignedVector<T>>(geo.batch * ckk * pix);
    TensorT y({geo.batch, geo.out_channels, geo.out_h, geo.out_w});
    CMapR wm(value(w).raw(), geo.out_channels, ckk);
    const T* bp = value(b).raw();
    for (std::size_t n = 0; n < geo.batch; ++n) {
      T* col = cols->data() + n * ckk * pix;
      im2col(value(x).raw() + n * geo.channels * geo.height * geo.width, geo, col);
      MapR ym(y.raw() + n * geo.out_channels * pix, geo.out_channels, pix);
      ym.noalias() = wm * CMapR(col, ckk, pix);
      for (std::size_t o = 0; o < geo.out_channels; ++o) ym.row(o).array() += bp[o];
    }
    return push("conv2d", std::move(y), {x, w, b}, [geo, cols, ckk, pix](Graph& g, std::size_t self) {
      const auto& n = g.nodes_[self];
      const std::size_t xi = n.inputs[0], wi = n.inputs[1], bi = n.inputs[2];
      const bool need_x = g.nodes_[xi].requires_grad;
      const bool need_w = g.nodes_[wi].requires_grad;
      const bool need_b = g.nodes_[bi].requires_grad;
      CMapR wm(g.nodes_[wi].value.raw(), geo.out_channels, ckk);
      std::vector<T> dcol(need_x ? ckk * pix : 0);
      for (std::size_t s = 0; s < geo.batch; ++s) {
        CMapR dy(n.grad.raw() + s * geo.out_channels * pix, geo.out_channels, pix);
        if (need_w) {
          MapR(g.grad_of(wi).raw(), geo.out_channels, ckk).noalias() +=
              dy * CMapR(cols->data() + s * ckk * pix, ckk, pix).transpose();
        }
        if (need_b) {
          T* db = g.grad_of(bi).raw();
          for (std::size_t o = 0; o < geo.out_channels; ++o) db[o] += dy.row(o).sum();
        }
        if (need_x) {
          MapR(dcol.data(), ckk, pix).noalias() = wm.transpose() * dy;
          col2im(dcol.data(), geo,
                 g.grad_of(xi).raw() + s * geo.channels * geo.height * geo.width);
        }
      }
    });
  }

  // ---- elementwise --------------------------------------------------------

  Var relu(Var x) {
    TensorT y = value(x);
    for (auto& v : y.data()) v = v > T{0} ? v : T{0};
    return push("relu", std::move(y), {x}, [](Graph& g, std::size_t self) {
      const auto& n = g.nodes_[self];
      const std::size_t xi = n.inputs[0];
      if (!g.nodes_[xi].requires_grad) return;
      T* dx = g.grad_of(xi).raw();
      const T* xv = g.nodes_[xi].value.raw();
      for (std::size_t i = 0; i < n.grad.size(); ++i)
        if (xv[i] > T{0}) dx[i] += n.grad[i];
    });
  }

  Var sigmoid(Var x) {
    TensorT y = value(x);
    for (auto& v : y.data()) v = stable_sigmoid(v);
    return push("sigmoid", std::move(y), {x}, [](Graph& g, std::size_t self) {
      const auto& n = g.nodes_[self];
      const std::size_t xi = n.inputs[0];
      if (!g.nodes_[xi].requires_grad) return;
      T* dx = g.grad_of(xi).raw();
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        const T s = n.value[i];
        dx[i] += n.grad[i] * s * (T{1} - s);
      }
    });
  }

  Var tanh(Var x) {
    TensorT y = value(x);
    for (auto& v : y.data()) v = std::tanh(v);
    return push("tanh", std::move(y), {x}, [](Graph& g, std::size_t self) {
      const auto& n = g.nodes_[self];
      const std::size_t xi = n.inputs[0];
      if (!g.nodes_[xi].requires_grad) return;
      T* dx = g.grad_of(xi).raw();
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        const T t = n.value[i];
        dx[i] += n.grad[i] * (T{1} - t * t);
      }
    });
  }

  /// Softmax over the last axis; rank-1 input is one row.
  Var softmax(Var x) {
    const auto [rows, cols] = rows_cols(value(x), "softmax");
    TensorT y = value(x);
    for (std::size_t r = 0; r < rows; ++r) {
      T* row = y.raw() + r * cols;
      const T mx = *std::max_element(row, row + cols);
      double total = 0.0;
      for (std::size_t c = 0; c < cols; ++c) total += std::exp(static_cast<double>(row[c] - mx));
      for (std::size_t c = 0; c < cols; ++c)
        row[c] = static_cast<T>(std::exp(static_cast<double>(row[c] - mx)) / total);
    }
    return push("softmax", std::move(y), {x}, [rows, cols](Graph& g, std::size_t self) {
      const auto& n = g.nodes_[self];
      const std::size_t xi = n.inputs[0];
      if (!g.nodes_[xi].requires_grad) return;
      T* dx = g.grad_of(xi).raw();
      for (std::size_t r = 0; r < rows; ++r) {
        const T* yr = n.value.raw() + r * cols;
        const T* gr = n.grad.raw() + r * cols;
        double dot = 0.0;
        for (std::size_t c = 0; c < cols; ++c) dot += static_cast<double>(yr[c]) * gr[c];
        for (std::size_t c = 0; c < cols; ++c)
          dx[r * cols + c] += yr[c] * (gr[c] - static_cast<T>(dot));
      }
    });
  }

  Var add(Var a, Var b) { return binary("add", a, b, [](T x, T y) { return x + y; }, T{1}, T{1}); }
  Var sub(Var a, Var b) { return binary("sub", a, b, [](T x, T y) { return x - y; }, T{1}, T{-1}); }

  Var mul(Var a, Var b) {
    same_shape("mul", a, b);
    TensorT y = value(a);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= value(b)[i];
    return push("mul", std::move(y), {a, b}, [](Graph& g, std::size_t self) {
      const auto& n = g.nodes_[self];
      const std::size_t ai = n.inputs[0], bi = n.inputs[1];
      if (g.nodes_[ai].requires_grad) {
        T* d = g.grad_of(ai).raw();
        for (std::size_t i = 0; i < n.grad.size(); ++i) d[i] += n.grad[i] * g.nodes_[bi].value[i];
      }
      if (g.nodes_[bi].requires_grad) {
        T* d = g.grad_of(bi).raw();
        for (std::size_t i = 0; i < n.grad.size(); ++i) d[i] += n.grad[i] * g.nodes_[ai].value[i];
      }
    });
  }

  Var scale(Var x, T factor) {
    TensorT y = value(x);
    for (auto& v : y.data()) v *= factor;
    return push("scale", std::move(y), {x}, [factor](Graph& g, std::size_t self) {
      const auto& n = g.nodes_[self];
      const std::size_t xi = n.inputs[0];
      if (!g.nodes_[xi].requires_grad) return;
      T* dx = g.grad_of(xi).raw();
      for (std::size_t i = 0; i < n.grad.size(); ++i) dx[i] += factor * n.grad[i];
    });
  }

  /// y[r,c] = x[r,c] * scale[c] + shift[c] with constant per-column vectors.
  Var column_affine(Var x, std::vector<T> scale, std::vector<T> shift) {
    const auto [rows, cols] = rows_cols(value(x), "column_affine");
    if (scale.size() != cols || shift.size() != cols) {
      throw ShapeError("column_affine: " + std::to_string(cols) + " columns but " +
                       std::to_string(scale.size()) + " scales / " + std::to_string(shift.size()) +
                       " shifts");
    }
    TensorT y = value(x);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) y[r * cols + c] = y[r * cols + c] * scale[c] + shift[c];
    return push("column_affine", std::move(y), {x},
                [rows, cols, s = std::move(scale)](Graph& g, std::size_t self) {
                  const auto& n = g.nodes_[self];
                  const std::size_t xi = n.inputs[0];
                  if (!g.nodes_[xi].requires_grad) return;
                  T* dx = g.grad_of(xi).raw();
                  for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < cols; ++c)
                      dx[r * cols + c] += s[c] * n.grad[r * cols + c];
                });
  }

  // ---- structural ---------------------------------------------------------

  /// Mean over the spatial axes of [B,C,H,W].
  Var global_avg_pool(Var x) {
    const auto& xs = value(x).shape();
    if (xs.size() != 4) throw ShapeError("global_avg_pool: expected [B,C,H,W], got " + shape_string(xs));
    const std::size_t bc = xs[0] * xs[1], hw = xs[2] * xs[3];
    TensorT y({xs[0], xs[1]});
    const T* xv = value(x).raw();
    for (std::size_t i = 0; i < bc; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < hw; ++j) s += xv[i * hw + j];
      y[i] = static_cast<T>(s / static_cast<double>(hw));
    }
    return push("global_avg_pool", std::move(y), {x}, [bc, hw](Graph& g, std::size_t self) {
      const auto& n = g.nodes_[self];
      const std::size_t xi = n.inputs[0];
      if (!g.nodes_[xi].requires_grad) return;
      T* dx = g.grad_of(xi).raw();
      const T inv = T{1} / static_cast<T>(hw);
      for (std::size_t i = 0; i < bc; ++i)
        for (std::size_t j = 0; j < hw; ++j) dx[i * hw + j] += n.grad[i] * inv;
    });
  }

  /// Elementwise maximum across equally shaped tensors. Ties route the
  /// gradient to the lowest-index input.
  Var maximum(std::span<const Var> xs) {
    if (xs.empty()) throw ShapeError("maximum: empty input set");
    for (std::size_t k = 1; k < xs.size(); ++k) same_shape("maximum", xs[0], xs[k]);
    TensorT y = value(xs[0]);
    auto winner = std::make_shared<std::vector<std::size_t>>(y.size(), 0);
    for (std::size_t k = 1; k < xs.size(); ++k) {
      const TensorT& v = value(xs[k]);
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (v[i] > y[i]) {
          y[i] = v[i];
          (*winner)[i] = k;
        }
      }
    }
    return push("maximum", std::move(y), {xs.begin(), xs.end()}, [winner](Graph& g, std::size_t self) {
      const auto& n = g.nodes_[self];
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        const std::size_t src = n.inputs[(*winner)[i]];
        if (g.nodes_[src].requires_grad) g.grad_of(src)[i] += n.grad[i];
      }
    });
  }

  /// Concatenates rank-2 tensors with equal row counts along the column axis.
  Var concat(std::span<const Var> xs) {
    if (xs.empty()) throw ShapeError("concat: empty input set");
    const std::size_t rows = value(xs[0]).rank() == 2 ? value(xs[0]).dim(0) : 0;
    std::vector<std::size_t> widths;
    std::size_t total = 0;
    for (Var v : xs) {
      const auto& s = value(v).shape();
      if (s.size() != 2 || s[0] != rows) {
        throw ShapeError("concat: expected [" + std::to_string(rows) + ",*], got " + shape_string(s));
      }
      widths.push_back(s[1]);
      total += s[1];
    }
    TensorT y({rows, total});
    std::size_t offset = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const T* src = value(xs[k]).raw();
      for (std::size_t r = 0; r < rows; ++r)
        std::copy_n(src + r * widths[k], widths[k], y.raw() + r * total + offset);
      offset += widths[k];
    }
    return push("concat", std::move(y), {xs.begin(), xs.end()},
                [rows, total, widths](Graph& g, std::size_t self) {
                  const auto& n = g.nodes_[self];
                  std::size_t off = 0;
                  for (std::size_t k = 0; k < widths.size(); ++k) {
                    const std::size_t src = n.inputs[k];
                    if (g.nodes_[src].requires_grad) {
                      T* d = g.grad_of(src).raw();
                      for (std::size_t r = 0; r < rows; ++r)
                        for (std::size_t c = 0; c < widths[k]; ++c)
                          d[r * widths[k] + c] += n.grad[r * total + off + c];
                    }
                    off += widths[k];
                  }
                });
  }

  /// Column j of a rank-2 tensor as [B,1].
  Var column(Var x, std::size_t j) {
    const auto [rows, cols] = rows_cols(value(x), "column");
    if (j >= cols) throw ShapeError("column: index " + std::to_string(j) + " out of " + std::to_string(cols));
    TensorT y({rows, 1});
    for (std::size_t r = 0; r < rows; ++r) y[r] = value(x)[r * cols + j];
    return push("column", std::move(y), {x}, [rows, cols, j](Graph& g, std::size_t self) {
      const auto& n = g.nodes_[self];
      const std::size_t xi = n.inputs[0];
      if (!g.nodes_[xi].requires_grad) return;
      T* dx = g.grad_of(xi).raw();
      for (std::size_t r = 0; r < rows; ++r) dx[r * cols + j] += n.grad[r];
    });
  }

  Var reshape(Var x, Shape shape) {
    TensorT y = value(x);
    y.reshape(std::move(shape));
    return push("reshape", std::move(y), {x}, [](Graph& g, std::size_t self) {
      const auto& n = g.nodes_[self];
      const std::size_t xi = n.inputs[0];
      if (!g.nodes_[xi].requires_grad) return;
      T* dx = g.grad_of(xi).raw();
      for (std::size_t i = 0; i < n.grad.size(); ++i) dx[i] += n.grad[i];
    });
  }

  // ---- reductions and losses ---------------------------------------------

  /// Mean of all elements, as a scalar.
  Var mean(Var x) {
    const TensorT& xv = value(x);
    if (xv.empty()) throw ShapeError("mean: empty tensor");
    double s = 0.0;
    for (T v : xv.data()) s += v;
    const std::size_t count = xv.size();
    return push("mean", TensorT::scalar(static_cast<T>(s / count)), {x}, [count](Graph& g, std::size_t self) {
      const auto& n = g.nodes_[self];
      const std::size_t xi = n.inputs[0];
      if (!g.nodes_[xi].requires_grad) return;
      const T d = n.grad[0] / static_cast<T>(count);
      for (auto& v : g.grad_of(xi).data()) v += d;
    });
  }

  /// Mean squared difference over all elements.
  Var mse(Var a, Var b) {
    same_shape("mse", a, b);
    const TensorT& av = value(a);
    const TensorT& bv = value(b);
    double s = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) {
      const double d = static_cast<double>(av[i]) - bv[i];
      s += d * d;
    }
    const std::size_t count = av.size();
    return push("mse", TensorT::scalar(static_cast<T>(s / count)), {a, b}, [count](Graph& g, std::size_t self) {
      const auto& n = g.nodes_[self];
      const std::size_t ai = n.inputs[0], bi = n.inputs[1];
      const T k = T{2} * n.grad[0] / static_cast<T>(count);
      const TensorT& av = g.nodes_[ai].value;
      const TensorT& bv = g.nodes_[bi].value;
      if (g.nodes_[ai].requires_grad) {
        T* d = g.grad_of(ai).raw();
        for (std::size_t i = 0; i < count; ++i) d[i] += k * (av[i] - bv[i]);
      }
      if (g.nodes_[bi].requires_grad) {
        T* d = g.grad_of(bi).raw();
        for (std::size_t i = 0; i < count; ++i) d[i] -= k * (av[i] - bv[i]);
      }
    });
  }

  /// Row-wise squared Euclidean distance, [B,D] x [B,D] -> [B].
  Var squared_distance(Var a, Var b) {
    same_shape("squared_distance", a, b);
    const auto [rows, cols] = rows_cols(value(a), "squared_distance");
    TensorT y({rows});
    for (std::size_t r = 0; r < rows; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < cols; ++c) {
        const double d = static_cast<double>(value(a)[r * cols + c]) - value(b)[r * cols + c];
        s += d * d;
      }
      y[r] = static_cast<T>(s);
    }
    return push("squared_distance", std::move(y), {a, b}, [rows, cols](Graph& g, std::size_t self) {
      const auto& n = g.nodes_[self];
      const std::size_t ai = n.inputs[0], bi = n.inputs[1];
      const TensorT& av = g.nodes_[ai].value;
      const TensorT& bv = g.nodes_[bi].value;
      const bool na = g.nodes_[ai].requires_grad, nb = g.nodes_[bi].requires_grad;
      T* da = na ? g.grad_of(ai).raw() : nullptr;
      T* db = nb ? g.grad_of(bi).raw() : nullptr;
      for (std::size_t r = 0; r < rows; ++r) {
        const T k = T{2} * n.grad[r];
        for (std::size_t c = 0; c < cols; ++c) {
          const std::size_t i = r * cols + c;
          const T d = av[i] - bv[i];
          if (na) da[i] += k * d;
          if (nb) db[i] -= k * d;
        }
      }
    });
  }

  /// Row-wise Euclidean norm, [B,D] -> [B]. The subgradient at 0 is 0.
  Var l2_norm(Var x) {
    const auto [rows, cols] = rows_cols(value(x), "l2_norm");
    TensorT y({rows});
    for (std::size_t r = 0; r < rows; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < cols; ++c) {
        const double v = value(x)[r * cols + c];
        s += v * v;
      }
      y[r] = static_cast<T>(std::sqrt(s));
    }
    return push("l2_norm", std::move(y), {x}, [rows, cols](Graph& g, std::size_t self) {
      const auto& n = g.nodes_[self];
      const std::size_t xi = n.inputs[0];
      if (!g.nodes_[xi].requires_grad) return;
      T* dx = g.grad_of(xi).raw();
      const TensorT& xv = g.nodes_[xi].value;
      for (std::size_t r = 0; r < rows; ++r) {
        if (n.value[r] == T{0}) continue;
        const T k = n.grad[r] / n.value[r];
        for (std::size_t c = 0; c < cols; ++c) dx[r * cols + c] += k * xv[r * cols + c];
      }
    });
  }

  /// Mean binary cross-entropy; probabilities are clamped to [1e-7, 1-1e-7].
  Var bce(Var p, Var target) {
    same_shape("bce", p, target);
    const TensorT& pv = value(p);
    const TensorT& tv = value(target);
    double s = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
      const double q = clamp_prob(pv[i]);
      s -= tv[i] * std::log(q) + (1.0 - tv[i]) * std::log(1.0 - q);
    }
    const std::size_t count = pv.size();
    return push("bce", TensorT::scalar(static_cast<T>(s / count)), {p, target}, [count](Graph& g, std::size_t self) {
      const auto& n = g.nodes_[self];
      const std::size_t pi = n.inputs[0], ti = n.inputs[1];
      const TensorT& pv = g.nodes_[pi].value;
      const TensorT& tv = g.nodes_[ti].value;
      const double k = static_cast<double>(n.grad[0]) / static_cast<double>(count);
      if (g.nodes_[pi].requires_grad) {
        T* d = g.grad_of(pi).raw();
        for (std::size_t i = 0; i < count; ++i) {
          const double q = clamp_prob(pv[i]);
          if (q != static_cast<double>(pv[i])) continue;
          d[i] += static_cast<T>(k * (q - tv[i]) / (q * (1.0 - q)));
        }
      }
      if (g.nodes_[ti].requires_grad) {
        T* d = g.grad_of(ti).raw();
        for (std::size_t i = 0; i < count; ++i) {
          const double q = clamp_prob(pv[i]);
          d[i] += static_cast<T>(k * (std::log(1.0 - q) - std::log(q)));
        }
      }
    });
  }

  /// Mean categorical cross-entropy of logits [B,K] against integer labels.
  Var cross_entropy(Var logits, std::span<const int> labels) {
    const auto [rows, cols] = rows_cols(value(logits), "cross_entropy");
    if (labels.size() != rows) {
      throw ShapeError("cross_entropy: " + std::to_string(rows) + " rows but " +
                       std::to_string(labels.size()) + " labels");
    }
    auto probs = std::make_shared<std::vector<double>>(rows * cols);
    std::vector<int> lab(labels.begin(), labels.end());
    double s = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (lab[r] < 0 || static_cast<std::size_t>(lab[r]) >= cols) {
        throw InvalidArgument("cross_entropy: label " + std::to_string(lab[r]) + " outside [0," +
                              std::to_string(cols) + ")");
      }
      const T* row = value(logits).raw() + r * cols;
      const double mx = *std::max_element(row, row + cols);
      double z = 0.0;
      for (std::size_t c = 0; c < cols; ++c) z += std::exp(row[c] - mx);
      for (std::size_t c = 0; c < cols; ++c) (*probs)[r * cols + c] = std::exp(row[c] - mx) / z;
      s -= (row[lab[r]] - mx) - std::log(z);
    }
    return push("cross_entropy", TensorT::scalar(static_cast<T>(s / rows)), {logits},
                [rows, cols, probs, lab = std::move(lab)](Graph& g, std::size_t self) {
                  const auto& n = g.nodes_[self];
                  const std::size_t li = n.inputs[0];
                  if (!g.nodes_[li].requires_grad) return;
                  T* d = g.grad_of(li).raw();
                  const double k = static_cast<double>(n.grad[0]) / static_cast<double>(rows);
                  for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < cols; ++c) {
                      const double target = static_cast<std::size_t>(lab[r]) == c ? 1.0 : 0.0;
                      d[r * cols + c] += static_cast<T>(k * ((*probs)[r * cols + c] - target));
                    }
                });
  }

  // ---- differentiation ----------------------------------------------------

  /// Accumulates d(loss)/d(param) into every trainable parameter reached.
  void backward(Var loss) {
    if (value(loss).size() != 1) {
      throw ShapeError("backward: loss must be scalar, got " + shape_string(value(loss).shape()));
    }
    if (!nodes_[loss.id].requires_grad) return;
    grad_of(loss.id)[0] += T{1};
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.requires_grad || n.grad.empty()) continue;
      if (!n.grad.all_finite()) throw NumericError("backward: non-finite gradient at node '" + n.op + "'");
      if (n.backward) n.backward(*this, i);
      if (n.param != nullptr) {
        T* d = n.param->grad.raw();
        for (std::size_t k = 0; k < n.grad.size(); ++k) d[k] += n.grad[k];
      }
    }
  }

 private:
  using BackwardFn = std::function<void(Graph&, std::size_t)>;

  struct Node {
    std::string op;
    TensorT value;
    TensorT grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    Parameter<T>* param = nullptr;
    bool requires_grad = false;
  };

  struct ConvGeom {
    std::size_t batch, channels, height, width, out_channels, kernel, stride, pad, out_h, out_w;
  };

  std::vector<Node> nodes_;

  static T stable_sigmoid(T v) {
    if (v >= T{0}) return T{1} / (T{1} + std::exp(-v));
    const T e = std::exp(v);
    return e / (T{1} + e);
  }

  static double clamp_prob(double p) { return std::clamp(p, 1e-7, 1.0 - 1e-7); }

  TensorT& grad_of(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) n.grad = TensorT(n.value.shape());
    return n.grad;
  }

  Var leaf(std::string op, TensorT t, Parameter<T>* p) {
    Node n;
    n.op = std::move(op);
    n.value = std::move(t);
    n.param = p;
    n.requires_grad = p != nullptr;
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
  }

  Var push(const char* op, TensorT y, std::vector<Var> ins, BackwardFn fn) {
    if (!y.all_finite()) {
      throw NumericError(std::string("numeric instability: non-finite output from '") + op + "'");
    }
    Node n;
    n.op = op;
    n.value = std::move(y);
    for (Var v : ins) {
      n.inputs.push_back(v.id);
      n.requires_grad = n.requires_grad || nodes_[v.id].requires_grad;
    }
    if (n.requires_grad) n.backward = std::move(fn);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
  }

  void same_shape(const char* op, Var a, Var b) const {
    if (value(a).shape() != value(b).shape()) {
      throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(value(a).shape()) + " vs " +
                       shape_string(value(b).shape()));
    }
  }

  static std::pair<std::size_t, std::size_t> rows_cols(const TensorT& t, const char* op) {
    if (t.rank() == 1) return {1, t.dim(0)};
    if (t.rank() == 2) return {t.dim(0), t.dim(1)};
    throw ShapeError(std::string(op) + ": expected rank 1 or 2, got " + shape_string(t.shape()));
  }

  template <typename F>
  Var binary(const char* op, Var a, Var b, F f, T da_scale, T db_scale) {
    same_shape(op, a, b);
    TensorT y = value(a);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(y[i], value(b)[i]);
    return push(op, std::move(y), {a, b}, [da_scale, db_scale](Graph& g, std::size_t self) {
      const auto& n = g.nodes_[self];
      const std::size_t ai = n.inputs[0], bi = n.inputs[1];
      if (g.nodes_[ai].requires_grad) {
        T* d = g.grad_of(ai).raw();
        for (std::size_t i = 0; i < n.grad.size(); ++i) d[i] += da_scale * n.grad[i];
      }
      if (g.nodes_[bi].requires_grad) {
        T* d = g.grad_of(bi).raw();
        for (std::size_t i = 0; i < n.grad.size(); ++i) d[i] += db_scale * n.grad[i];
      }
    });
  }

  static void im2col(const T* x, const ConvGeom& g, T* col) {
    const std::size_t pix = g.out_h * g.out_w;
    for (std::size_t c = 0; c < g.channels; ++c)
      for (std::size_t ki = 0; ki < g.kernel; ++ki)
        for (std::size_t kj = 0; kj < g.kernel; ++kj) {
          T* dst = col + ((c * g.kernel + ki) * g.kernel + kj) * pix;
          for (std::size_t oh = 0; oh < g.out_h; ++oh) {
            const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * g.stride + ki) - static_cast<std::ptrdiff_t>(g.pad);
            for (std::size_t ow = 0; ow < g.out_w; ++ow) {
              const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * g.stride + kj) - static_cast<std::ptrdiff_t>(g.pad);
              const bool inside = ih >= 0 && iw >= 0 && ih < static_cast<std::ptrdiff_t>(g.height) &&
                                  iw < static_cast<std::ptrdiff_t>(g.width);
              dst[oh * g.out_w + ow] = inside ? x[(c * g.height + ih) * g.width + iw] : T{0};
            }
          }
        }
  }

  static void col2im(const T* col, const ConvGeom& g, T* dx) {
    const std::size_t pix = g.out_h * g.out_w;
    for (std::size_t c = 0; c < g.channels; ++c)
      for (std::size_t ki = 0; ki < g.kernel; ++ki)
        for (std::size_t kj = 0; kj < g.kernel; ++kj) {
          const T* src = col + ((c * g.kernel + ki) * g.kernel + kj) * pix;
          for (std::size_t oh = 0; oh < g.out_h; ++oh) {
            const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * g.stride + ki) - static_cast<std::ptrdiff_t>(g.pad);
            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.height)) continue;
            for (std::size_t ow = 0; ow < g.out_w; ++ow) {
              const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * g.stride + kj) - static_cast<std::ptrdiff_t>(g.pad);
              if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(g.width)) continue;
              dx[(c * g.height + ih) * g.width + iw] += src[oh * g.out_w + ow];
            }
          }
        }
  }
};

}  // namespace vtl
