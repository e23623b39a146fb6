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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "vtl/error.hpp"
#include "vtl/gradcore/random.hpp"

namespace vtl {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Principal components of a row-sample matrix. Components are stored as
/// orthonormal rows, largest variance first.
struct Pca {
  Eigen::RowVectorXd mean;
  RowMatrix components;  ///< d x D

  static Pca fit(const RowMatrix& x, std::size_t d) {
    if (x.rows() < 1 || x.cols() < 1) throw InvalidArgument("pca: empty data");
    if (d < 1 || d > static_cast<std::size_t>(x.cols())) {
      throw InvalidArgument("pca: components must lie in [1, " + std::to_string(x.cols()) + "], got " +
                            std::to_string(d));
    }
    Pca p;
    p.mean = x.colwise().mean();
    const RowMatrix centered = x.rowwise() - p.mean;
    const Eigen::MatrixXd cov = centered.transpose() * centered / std::max<double>(1.0, double(x.rows() - 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericError("pca: eigendecomposition failed");
    const auto n = static_cast<Eigen::Index>(d);
    p.components.resize(n, x.cols());
    // Eigenvalues come back ascending.
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::RowVectorXd v = eig.eigenvectors().col(x.cols() - 1 - i).transpose();
      // Fix the sign so the largest-magnitude entry is positive.
      Eigen::Index arg = 0;
      v.cwiseAbs().maxCoeff(&arg);
      if (v(arg) < 0) v = -v;
      p.components.row(i) = v;
    }
    return p;
  }

  std::size_t dims() const { return static_cast<std::size_t>(components.rows()); }

  RowMatrix transform(const RowMatrix& x) const {
    if (x.cols() != mean.size()) throw ShapeError("pca: input width differs from fitted width");
    return (x.rowwise() - mean) * components.transpose();
  }

  RowMatrix reconstruct(const RowMatrix& z) const { return (z * components).rowwise() + mean; }

  /// Mean squared reconstruction error per sample.
  double reconstruction_error(const RowMatrix& x) const {
    return (reconstruct(transform(x)) - x).rowwise().squaredNorm().mean();
  }
};

/// Column standardization to zero mean and unit variance. Columns with
/// (near) zero spread are only centered.
struct ColumnScaler {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static ColumnScaler fit(const RowMatrix& x) {
    ColumnScaler s;
    s.mean = x.colwise().mean();
    const RowMatrix c = x.rowwise() - s.mean;
    s.scale = (c.colwise().squaredNorm() / std::max<double>(1.0, double(x.rows()))).cwiseSqrt();
    for (Eigen::Index j = 0; j < s.scale.size(); ++j)
      if (!(s.scale(j) > 1e-12)) s.scale(j) = 1.0;
    return s;
  }

  RowMatrix apply(const RowMatrix& x) const {
    if (x.cols() != mean.size()) throw ShapeError("scaler: input width differs from fitted width");
    return (x.rowwise() - mean).array().rowwise() / scale.array();
  }
};

struct KMeansResult {
  RowMatrix centroids;
  std::vector<int> labels;
  std::vector<double> inertia_history;  ///< one entry per assignment step
  double inertia = 0.0;
  std::size_t iterations = 0;
};

namespace detail {

inline std::pair<int, double> nearest(const RowMatrix& centroids, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    const double d = (centroids.row(c) - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return {best, best_d};
}

}  // namespace detail

/// Nearest-centroid labels for each row.
inline std::vector<int> assign_clusters(const RowMatrix& centroids, const RowMatrix& x) {
  std::vector<int> labels(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) labels[static_cast<std::size_t>(i)] = detail::nearest(centroids, x.row(i)).first;
  return labels;
}

/// Lloyd iterations from a k-means++ start. Stops after `max_iter` rounds or
/// when the relative inertia change drops below `tol`. An emptied cluster is
/// re-seeded at the point farthest from its current centroid.
inline KMeansResult kmeans(const RowMatrix& x, std::size_t k, Rng& rng, std::size_t max_iter = 100, double tol = 1e-6) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (k < 1) throw InvalidArgument("kmeans: k must be >= 1");
  if (k > n) throw InvalidArgument("kmeans: k=" + std::to_string(k) + " exceeds sample count " + std::to_string(n));
  const auto kk = static_cast<Eigen::Index>(k);

  KMeansResult r;
  r.centroids.resize(kk, x.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  r.centroids.row(0) = x.row(static_cast<Eigen::Index>(first));
  for (Eigen::Index c = 1; c < kk; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (x.row(static_cast<Eigen::Index>(i)) - r.centroids.row(c - 1)).squaredNorm());
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      std::vector<double> probs(n);
      for (std::size_t i = 0; i < n; ++i) probs[i] = d2[i] / total;
      double s = 0.0;
      for (double p : probs) s += p;
      for (double& p : probs) p /= s;
      pick = sample_categorical(probs, rng);
    } else {
      pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }
    r.centroids.row(c) = x.row(static_cast<Eigen::Index>(pick));
  }

  r.labels.assign(n, 0);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < max_iter; ++it) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto [label, d] = detail::nearest(r.centroids, x.row(static_cast<Eigen::Index>(i)));
      r.labels[i] = label;
      inertia += d;
    }
    r.inertia_history.push_back(inertia);
    r.inertia = inertia;
    r.iterations = it + 1;
    if (previous < std::numeric_limits<double>::infinity() &&
        (previous - inertia) <= tol * std::max(previous, 1e-300)) {
      break;
    }
    previous = inertia;

    RowMatrix sums = RowMatrix::Zero(kk, x.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(r.labels[i]) += x.row(static_cast<Eigen::Index>(i));
      ++counts[static_cast<std::size_t>(r.labels[i])];
    }
    for (Eigen::Index c = 0; c < kk; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        r.centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = (x.row(static_cast<Eigen::Index>(i)) - r.centroids.row(r.labels[i])).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      r.centroids.row(c) = x.row(static_cast<Eigen::Index>(far));
    }
  }
  return r;
}

}  // namespace vtl
