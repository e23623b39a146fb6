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
#include <cstdint>
#include <vector>

#include "vtl/error.hpp"
#include "vtl/gradcore/layers.hpp"

namespace vtl {

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adaptive-moment optimizer bound to a fixed parameter list. Moments are
/// kept in double.
template <typename T>
class Adam {
 public:
  Adam(ParamList<T> params, AdamOptions options = {}) : params_(std::move(params)), options_(options) {
    for (auto* p : params_) {
      first_.emplace_back(p->value.size(), 0.0);
      second_.emplace_back(p->value.size(), 0.0);
    }
  }

  const AdamOptions& options() const noexcept { return options_; }
  std::uint64_t steps() const noexcept { return step_; }
  const ParamList<T>& params() const noexcept { return params_; }
  void set_learning_rate(double lr) { options_.learning_rate = lr; }

  /// Applies one update from the accumulated gradients. Throws before
  /// touching any parameter if a gradient is not finite.
  void step() {
    for (auto* p : params_) {
      if (p->grad.shape() != p->value.shape()) {
        throw ShapeError("adam: gradient shape " + shape_string(p->grad.shape()) + " != parameter shape " +
                         shape_string(p->value.shape()) + " for '" + p->name + "'");
      }
      if (!p->grad.all_finite()) throw NumericError("adam: non-finite gradient for '" + p->name + "'");
    }
    ++step_;
    const double b1 = options_.beta1, b2 = options_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
      auto* p = params_[k];
      if (!p->trainable) continue;
      auto& m = first_[k];
      auto& v = second_[k];
      for (std::size_t i = 0; i < m.size(); ++i) {
        const double g = p->grad[i];
        m[i] = b1 * m[i] + (1.0 - b1) * g;
        v[i] = b2 * v[i] + (1.0 - b2) * g * g;
        const double update = options_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + options_.epsilon);
        p->value[i] = static_cast<T>(p->value[i] - update);
      }
    }
  }

  void zero_grad() { zero_grads(params_); }

 private:
  ParamList<T> params_;
  AdamOptions options_;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
  std::uint64_t step_ = 0;
};

}  // namespace vtl
