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
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vtl/error.hpp"
#include "vtl/gradcore/layers.hpp"
#include "vtl/gradcore/optimizer.hpp"
#include "vtl/gradcore/random.hpp"

namespace vtl {

using ViewSet = std::vector<std::size_t>;

/// Numerically stable softmax of one logit row.
inline std::vector<double> softmax_row(std::span<const double> z) {
  if (z.empty()) throw InvalidArgument("softmax_row: empty row");
  const double top = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) sum += p[i] = std::exp(z[i] - top);
  for (double& v : p) v /= sum;
  return p;
}

/// d/dz log softmax(z)_j = onehot(j) - softmax(z).
inline std::vector<double> log_softmax_grad(std::span<const double> z, std::size_t j) {
  if (j >= z.size()) throw InvalidArgument("log_softmax_grad: index out of range");
  std::vector<double> g = softmax_row(z);
  for (double& v : g) v = -v;
  g[j] += 1.0;
  return g;
}

/// M independent categorical selectors over N views, stored as an M x N
/// logit matrix. Rows may pick the same view.
class SelectorBank {
 public:
  SelectorBank() = default;
  SelectorBank(std::size_t m, std::size_t n) : m_(m), n_(n), z_(m * n, 0.0) {
    if (m == 0 || n == 0) throw InvalidArgument("selector bank needs M >= 1 and N >= 1");
  }

  std::size_t selectors() const noexcept { return m_; }
  std::size_t views() const noexcept { return n_; }

  std::span<double> row(std::size_t m) { return {z_.data() + m * n_, n_}; }
  std::span<const double> row(std::size_t m) const { return {z_.data() + m * n_, n_}; }
  double& logit(std::size_t m, std::size_t i) { return z_.at(m * n_ + i); }
  double logit(std::size_t m, std::size_t i) const { return z_.at(m * n_ + i); }
  const std::vector<double>& logits() const noexcept { return z_; }

  /// Row-wise softmax, flattened M x N.
  std::vector<double> probabilities() const {
    std::vector<double> p;
    p.reserve(z_.size());
    for (std::size_t m = 0; m < m_; ++m) {
      const auto r = softmax_row(row(m));
      p.insert(p.end(), r.begin(), r.end());
    }
    return p;
  }

  void check_finite() const {
    for (double v : z_)
      if (!std::isfinite(v)) throw NumericError("selector bank has non-finite logits");
  }

 private:
  std::size_t m_ = 0;
  std::size_t n_ = 0;
  std::vector<double> z_;
};

/// Per-row argmax; ties go to the lowest index.
inline ViewSet select_deterministic(const SelectorBank& bank) {
  bank.check_finite();
  ViewSet q(bank.selectors());
  for (std::size_t m = 0; m < q.size(); ++m) {
    const auto r = bank.row(m);
    q[m] = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return q;
}

/// One categorical draw per row from softmax(z_m).
inline ViewSet select_stochastic(const SelectorBank& bank, Rng& rng) {
  bank.check_finite();
  ViewSet q(bank.selectors());
  for (std::size_t m = 0; m < q.size(); ++m) q[m] = sample_categorical(softmax_row(bank.row(m)), rng);
  return q;
}

/// z_m += lr (reward - baseline) d log pi(q_m) / d z_m, row by row.
inline void reinforce_update(SelectorBank& bank, std::span<const std::size_t> q, double reward, double baseline,
                             double lr) {
  if (q.size() != bank.selectors()) throw InvalidArgument("reinforce_update: need one index per selector");
  if (!std::isfinite(reward) || !std::isfinite(baseline)) throw NumericError("reinforce_update: non-finite reward");
  const double advantage = reward - baseline;
  if (advantage == 0.0) return;
  for (std::size_t m = 0; m < q.size(); ++m) {
    if (q[m] >= bank.views()) throw InvalidArgument("reinforce_update: view index out of range");
    const auto g = log_softmax_grad(bank.row(m), q[m]);
    auto r = bank.row(m);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += lr * advantage * g[i];
  }
}

/// Exponential moving average of rewards. The first reward seeds it.
struct RewardBaseline {
  double decay = 0.9;
  double value = 0.0;
  bool started = false;

  void update(double reward) {
    value = started ? decay * value + (1.0 - decay) * reward : reward;
    started = true;
  }
};

/// M indices drawn uniformly with replacement.
inline ViewSet sample_random(std::size_t n, std::size_t m, Rng& rng) {
  if (n == 0 || m == 0) throw InvalidArgument("sample_random: need N >= 1 and M >= 1");
  std::uniform_int_distribution<std::size_t> d(0, n - 1);
  ViewSet q(m);
  for (auto& v : q) v = d(rng);
  return q;
}

/// round(m (N-1)/(M-1)) with halves rounded away from zero; M = 1 takes
/// the middle view.
inline ViewSet sample_equidistant(std::size_t n, std::size_t m) {
  if (n == 0 || m == 0) throw InvalidArgument("sample_equidistant: need N >= 1 and M >= 1");
  if (m == 1) return {(n - 1) / 2};
  ViewSet q(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double x = static_cast<double>(k) * static_cast<double>(n - 1) / static_cast<double>(m - 1);
    q[k] = static_cast<std::size_t>(std::round(x));
  }
  return q;
}

/// One multi-scale draw: a size uniform on {2..max_size}, then that many
/// distinct views in ascending order.
inline ViewSet sample_trn_subset(std::size_t n, std::size_t max_size, Rng& rng) {
  if (max_size < 2) throw InvalidArgument("TRN subsets need a maximum size of at least 2");
  if (n < max_size) throw InvalidArgument("TRN subsets of size " + std::to_string(max_size) + " need N >= that size");
  const std::size_t size = std::uniform_int_distribution<std::size_t>(2, max_size)(rng);
  ViewSet all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  ViewSet q;
  std::sample(all.begin(), all.end(), std::back_inserter(q), static_cast<std::ptrdiff_t>(size), rng);
  return q;
}

inline std::vector<ViewSet> sample_trn_subsets(std::size_t n, std::size_t max_size, std::size_t count, Rng& rng) {
  std::vector<ViewSet> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_trn_subset(n, max_size, rng));
  return out;
}

/// Flattened M x N one-hot matrix of a concrete selection.
inline std::vector<double> one_hot_selection(std::span<const std::size_t> q, std::size_t n) {
  std::vector<double> x(q.size() * n, 0.0);
  for (std::size_t m = 0; m < q.size(); ++m) {
    if (q[m] >= n) throw InvalidArgument("one_hot_selection: view index out of range");
    x[m * n + q[m]] = 1.0;
  }
  return x;
}

/// Small MLP from an M x N probability matrix to a predicted estimation
/// loss.
class ValueNetwork {
 public:
  ValueNetwork() = default;
  ValueNetwork(std::size_t m, std::size_t n, std::size_t hidden, std::uint64_t seed, bool zero_head = false)
      : m_(m), n_(n) {
    Rng rng = make_rng(seed, {0x7a1});
    l1_ = Dense<double>("value.l1", m * n, hidden, rng, Init::kHe);
    l2_ = Dense<double>("value.l2", hidden, 1, rng, zero_head ? Init::kZero : Init::kXavier);
  }

  std::size_t input_size() const noexcept { return m_ * n_; }

  ParamList<double> params() {
    ParamList<double> p;
    l1_.collect(p);
    l2_.collect(p);
    return p;
  }

  Var forward(Graph<double>& g, Var x) { return l2_(g, g.relu(l1_(g, x))); }

  /// Predicted loss for each row of `inputs` (each row M x N values).
  std::vector<double> predict(std::span<const std::vector<double>> inputs) {
    if (inputs.empty()) return {};
    Graph<double> g;
    const auto& y = g.value(forward(g, g.input(stack(inputs))));
    return {y.data().begin(), y.data().end()};
  }

  double predict(const std::vector<double>& input) { return predict(std::span(&input, 1)).front(); }

  /// One squared-error step on a batch of (input, observed loss) pairs.
  /// Returns the batch loss before the step.
  double fit_step(std::span<const std::vector<double>> inputs, std::span<const double> losses, Adam<double>& opt) {
    if (inputs.size() != losses.size() || inputs.empty()) throw InvalidArgument("value network: bad batch");
    Graph<double> g;
    Var pred = forward(g, g.input(stack(inputs)));
    Var loss = g.mse(pred, g.input(Tensor<double>({losses.size(), 1}, {losses.begin(), losses.end()})));
    g.backward(loss);
    opt.step();
    opt.zero_grad();
    return g.value(loss).item();
  }

 private:
  std::size_t m_ = 0;
  std::size_t n_ = 0;
  Dense<double> l1_, l2_;

  Tensor<double> stack(std::span<const std::vector<double>> inputs) const {
    Tensor<double> x({inputs.size(), input_size()});
    for (std::size_t r = 0; r < inputs.size(); ++r) {
      if (inputs[r].size() != input_size()) throw ShapeError("value network: input has the wrong width");
      std::copy(inputs[r].begin(), inputs[r].end(), x.raw() + r * input_size());
    }
    return x;
  }
};

}  // namespace vtl
