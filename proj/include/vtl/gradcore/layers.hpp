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

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "vtl/gradcore/graph.hpp"
#include "vtl/gradcore/random.hpp"

namespace vtl {

template <typename T>
using ParamList = std::vector<Parameter<T>*>;

enum class Init { kHe, kXavier, kZero };

namespace detail {

template <typename T>
Tensor<T> init_tensor(Shape shape, std::size_t fan_in, std::size_t fan_out, Init init, Rng& rng) {
  Tensor<T> t(std::move(shape));
  if (init == Init::kZero) return t;
  const double stddev = init == Init::kHe ? std::sqrt(2.0 / static_cast<double>(fan_in))
                                          : std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
  return t;
}

}  // namespace detail

/// Fully connected layer, x [B,in] -> [B,out].
template <typename T>
struct Dense {
  Parameter<T> weight;
  Parameter<T> bias;

  Dense() = default;
  Dense(const std::string& name, std::size_t in, std::size_t out, Rng& rng, Init init = Init::kHe)
      : weight(name + ".weight", detail::init_tensor<T>({in, out}, in, out, init, rng)),
        bias(name + ".bias", Tensor<T>({out})) {}

  std::size_t in_features() const { return weight.value.dim(0); }
  std::size_t out_features() const { return weight.value.dim(1); }

  Var operator()(Graph<T>& g, Var x) { return g.affine(x, g.param(weight), g.param(bias)); }

  void collect(ParamList<T>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }
};

/// Square-kernel convolution with zero padding, x [B,C,H,W].
template <typename T>
struct Conv2d {
  Parameter<T> weight;
  Parameter<T> bias;
  std::size_t stride = 1;
  std::size_t pad = 0;

  Conv2d() = default;
  Conv2d(const std::string& name, std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
         std::size_t stride_, std::size_t pad_, Rng& rng)
      : weight(name + ".weight",
               detail::init_tensor<T>({out_ch, in_ch, kernel, kernel}, in_ch * kernel * kernel,
                                      out_ch * kernel * kernel, Init::kHe, rng)),
        bias(name + ".bias", Tensor<T>({out_ch})),
        stride(stride_),
        pad(pad_) {}

  Var operator()(Graph<T>& g, Var x) {
    return g.conv2d(x, g.param(weight), g.param(bias), stride, pad);
  }

  void collect(ParamList<T>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }
};

template <typename T>
void set_trainable(const ParamList<T>& params, bool trainable) {
  for (auto* p : params) p->trainable = trainable;
}

template <typename T>
void zero_grads(const ParamList<T>& params) {
  for (auto* p : params) p->zero_grad();
}

}  // namespace vtl
