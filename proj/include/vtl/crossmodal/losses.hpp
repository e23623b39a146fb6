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
#include <span>
#include <string>

#include "vtl/error.hpp"
#include "vtl/gradcore/graph.hpp"

namespace vtl {

/// Weights of the auxiliary terms in the combined objective.
struct LossWeights {
  double embedding = 1.0;       ///< lambda_1
  double adversarial = 0.1;     ///< lambda_2
  double classification = 0.1;  ///< lambda_3

  void validate() const {
    for (double w : {embedding, adversarial, classification})
      if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("loss weights must be finite and nonnegative");
  }
  bool all_zero() const { return embedding == 0.0 && adversarial == 0.0 && classification == 0.0; }
};

/// Scalar components of one evaluation of the objective.
struct LossParts {
  double estimation = 0.0;
  double embedding = 0.0;
  double adversarial = 0.0;
  double classification = 0.0;
};

inline double total_loss(const LossParts& p, const LossWeights& w) {
  w.validate();
  for (double v : {p.estimation, p.embedding, p.adversarial, p.classification})
    if (!std::isfinite(v)) throw NumericError("total_loss: non-finite loss component");
  return p.estimation + w.embedding * p.embedding + w.adversarial * p.adversarial +
         w.classification * p.classification;
}

/// Tape versions; every term is a batch mean.
template <typename T>
struct LossTerms {
  Var estimation;
  Var embedding;
  Var adversarial;
  Var classification;
};

/// Mean over rows of ||e_t - e_v||^2.
template <typename T>
Var loss_emb(Graph<T>& g, Var e_v, Var e_t) {
  const Shape& a = g.value(e_v).shape();
  const Shape& b = g.value(e_t).shape();
  if (a != b) throw ShapeError("loss_emb: embedding shapes " + shape_string(a) + " and " + shape_string(b) + " differ");
  return g.mean(g.squared_distance(e_t, e_v));
}

template <typename T>
struct AdversarialTerms {
  Var disc;  ///< -[log D(f,t_real) + log(1 - D(f,t_fake))]
  Var gen;   ///< -log D(f,t_fake) + ||t_fake - t_real||
};

/// Both sides of the adversarial objective from discriminator outputs on
/// real and generated pairs. `t_fake` and `t_real` are in the units the
/// discriminator sees.
template <typename T>
AdversarialTerms<T> loss_adversarial(Graph<T>& g, Var d_real, Var d_fake, Var t_fake, Var t_real) {
  const Shape s = g.value(d_real).shape();
  Var ones = g.input(Tensor<T>(s, T(1)));
  Var zeros = g.input(Tensor<T>(s, T(0)));
  AdversarialTerms<T> out;
  out.disc = g.add(g.bce(d_real, ones), g.bce(d_fake, zeros));
  out.gen = g.add(g.bce(d_fake, ones), g.mean(g.l2_norm(g.sub(t_fake, t_real))));
  return out;
}

template <typename T>
Var loss_class(Graph<T>& g, Var logits, std::span<const int> labels) {
  return g.cross_entropy(logits, labels);
}

template <typename T>
Var total_loss(Graph<T>& g, const LossTerms<T>& terms, const LossWeights& w) {
  w.validate();
  Var total = terms.estimation;
  if (w.embedding != 0.0) total = g.add(total, g.scale(terms.embedding, static_cast<T>(w.embedding)));
  if (w.adversarial != 0.0) total = g.add(total, g.scale(terms.adversarial, static_cast<T>(w.adversarial)));
  if (w.classification != 0.0) {
    total = g.add(total, g.scale(terms.classification, static_cast<T>(w.classification)));
  }
  return total;
}

}  // namespace vtl
