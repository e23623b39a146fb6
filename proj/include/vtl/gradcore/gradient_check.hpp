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

#include <algorithm>
#include <cmath>
#include <functional>

#include "vtl/gradcore/graph.hpp"

namespace vtl {

template <typename T>
using LossBuilder = std::function<Var(Graph<T>&)>;

/// Compares backpropagated gradients of `param` against central differences
/// and returns max |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
/// `build` must construct the scalar loss on a fresh graph each call.
///
/// Central differences in 32-bit are dominated by rounding (~1e-7 / eps), so
/// meaningful checks instantiate the model with T = double.
template <typename T>
double gradient_check(const LossBuilder<T>& build, Parameter<T>& param, double epsilon) {
  if (!(epsilon >= 1e-5 && epsilon <= 1e-2)) {
    throw InvalidArgument("gradient_check: epsilon must lie in [1e-5, 1e-2]");
  }
  const bool was_trainable = param.trainable;
  param.trainable = true;
  param.zero_grad();
  Tensor<T> analytic;
  {
    Graph<T> g;
    Var loss = build(g);
    if (g.value(loss).size() != 1) throw ShapeError("gradient_check: loss is not scalar");
    g.backward(loss);
    analytic = param.grad;
  }
  auto eval = [&] {
    Graph<T> g;
    return static_cast<double>(g.value(build(g)).item());
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < param.value.size(); ++i) {
    const T saved = param.value[i];
    param.value[i] = static_cast<T>(saved + epsilon);
    const double plus = eval();
    param.value[i] = static_cast<T>(saved - epsilon);
    const double minus = eval();
    param.value[i] = saved;
    const double numeric = (plus - minus) / (2.0 * epsilon);
    const double a = analytic[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  param.zero_grad();
  param.trainable = was_trainable;
  return worst;
}

}  // namespace vtl
