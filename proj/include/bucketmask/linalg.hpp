#pragma once

// Dense regression kernels: rank correlation, standardized ridge, and k-NN
// regression. Templated on the scalar type.

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

namespace bucketmask::linalg {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Ranks starting at 1, ties share the average of their ranks.
template <typename Derived>
Vector<typename Derived::Scalar> average_ranks(const Eigen::MatrixBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  const auto n = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) < values(b); });
  Vector<Scalar> ranks(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && values(order[j + 1]) == values(order[i])) ++j;
    const Scalar rank = Scalar(i + j) / Scalar(2) + Scalar(1);
    for (Eigen::Index t = i; t <= j; ++t) ranks(order[t]) = rank;
    i = j + 1;
  }
  return ranks;
}

template <typename Scalar>
struct Correlation {
  Scalar rho = Scalar(0);
  bool degenerate = false;  // a constant argument; rho reported as 0
};

template <typename DerivedX, typename DerivedY>
Correlation<typename DerivedX::Scalar> pearson(const Eigen::MatrixBase<DerivedX>& x,
                                               const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  const auto xc = (x.array() - x.mean()).matrix().eval();
  const auto yc = (y.array() - y.mean()).matrix().eval();
  const Scalar sxx = xc.squaredNorm();
  const Scalar syy = yc.squaredNorm();
  if (!(sxx > Scalar(0)) || !(syy > Scalar(0))) return {Scalar(0), true};
  const Scalar r = xc.dot(yc) / std::sqrt(sxx * syy);
  return {std::clamp(r, Scalar(-1), Scalar(1)), false};
}

// Pearson correlation of average-tied ranks.
template <typename DerivedX, typename DerivedY>
Correlation<typename DerivedX::Scalar> spearman(const Eigen::MatrixBase<DerivedX>& x,
                                                const Eigen::MatrixBase<DerivedY>& y) {
  return pearson(average_ranks(x), average_ranks(y));
}

// Column-wise z-scoring with training statistics. Constant columns map to 0.
template <typename Scalar>
struct Standardizer {
  Vector<Scalar> mean;
  Vector<Scalar> inv_scale;  // 0 for constant columns

  template <typename Derived>
  static Standardizer fit(const Eigen::MatrixBase<Derived>& x) {
    Standardizer s;
    const auto n = static_cast<Scalar>(x.rows());
    s.mean = x.colwise().mean().transpose();
    s.inv_scale.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const Scalar var = (x.col(j).array() - s.mean(j)).square().sum() / n;
      const Scalar sd = std::sqrt(var);
      s.inv_scale(j) = sd > Scalar(0) && std::isfinite(Scalar(1) / sd) ? Scalar(1) / sd : Scalar(0);
    }
    return s;
  }

  template <typename Derived>
  Matrix<Scalar> apply(const Eigen::MatrixBase<Derived>& x) const {
    return ((x.rowwise() - mean.transpose()).array().rowwise() * inv_scale.transpose().array())
        .matrix();
  }
};

template <typename Scalar>
struct RidgeModel {
  Standardizer<Scalar> standardizer;
  Vector<Scalar> weights;  // in standardized feature space
  Scalar intercept = Scalar(0);
  Scalar alpha = Scalar(0);

  template <typename Derived>
  Vector<Scalar> predict(const Eigen::MatrixBase<Derived>& x) const {
    return (standardizer.apply(x) * weights).array() + intercept;
  }

  // Weights and intercept expressed on the raw features.
  Vector<Scalar> raw_weights() const { return weights.cwiseProduct(standardizer.inv_scale); }
  Scalar raw_intercept() const { return intercept - raw_weights().dot(standardizer.mean); }
};

// Minimizes ||Xs w + b - y||^2 + alpha ||w||^2 on standardized features Xs with
// an unpenalized intercept. Solves whichever of the primal (D x D) or dual
// (N x N) systems is smaller; both are symmetric positive definite for alpha > 0.
template <typename DerivedX, typename DerivedY>
RidgeModel<typename DerivedX::Scalar> ridge_fit(const Eigen::MatrixBase<DerivedX>& x,
                                                const Eigen::MatrixBase<DerivedY>& y,
                                                typename DerivedX::Scalar alpha) {
  using Scalar = typename DerivedX::Scalar;
  RidgeModel<Scalar> model;
  model.alpha = alpha;
  model.standardizer = Standardizer<Scalar>::fit(x);
  const Matrix<Scalar> xs = model.standardizer.apply(x);
  model.intercept = y.mean();
  const Vector<Scalar> yc = y.array() - model.intercept;

  const auto n = xs.rows();
  const auto d = xs.cols();
  if (d <= n) {
    Matrix<Scalar> gram = xs.transpose() * xs;
    gram.diagonal().array() += alpha;
    model.weights = gram.ldlt().solve(xs.transpose() * yc);
  } else {
    Matrix<Scalar> kernel = xs * xs.transpose();
    kernel.diagonal().array() += alpha;
    model.weights = xs.transpose() * kernel.ldlt().solve(yc);
  }
  return model;
}

enum class Metric { Euclidean, Cosine };

// Indices of the k nearest reference rows to `query`, nearest first; equal
// distances keep reference order.
template <typename DerivedR, typename DerivedQ>
std::vector<Eigen::Index> nearest(const Eigen::MatrixBase<DerivedR>& reference,
                                  const Eigen::MatrixBase<DerivedQ>& query, std::size_t k,
                                  Metric metric = Metric::Euclidean) {
  using Scalar = typename DerivedR::Scalar;
  const auto n = reference.rows();
  Vector<Scalar> dist(n);
  if (metric == Metric::Euclidean) {
    dist = (reference.rowwise() - query).rowwise().squaredNorm();
  } else {
    const Scalar qn = query.norm();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar denom = reference.row(i).norm() * qn;
      dist(i) = denom > Scalar(0) ? Scalar(1) - reference.row(i).dot(query) / denom : Scalar(1);
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  k = std::min<std::size_t>(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      return dist(a) < dist(b) || (dist(a) == dist(b) && a < b);
                    });
  order.resize(k);
  return order;
}

// Mean target of the k nearest reference rows, per query row.
template <typename DerivedR, typename DerivedY, typename DerivedQ>
Vector<typename DerivedR::Scalar> knn_predict(const Eigen::MatrixBase<DerivedR>& reference,
                                              const Eigen::MatrixBase<DerivedY>& targets,
                                              const Eigen::MatrixBase<DerivedQ>& queries,
                                              std::size_t k, Metric metric = Metric::Euclidean) {
  using Scalar = typename DerivedR::Scalar;
  Vector<Scalar> out(queries.rows());
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    const auto idx = nearest(reference, queries.row(q), k, metric);
    Scalar sum(0);
    for (auto i : idx) sum += targets(i);
    out(q) = sum / static_cast<Scalar>(idx.size());
  }
  return out;
}

}  // namespace bucketmask::linalg
