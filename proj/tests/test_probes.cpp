#include "bucketmask/error.hpp"
#include "bucketmask/probes.hpp"
#include "bucketmask/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace bucketmask;
using namespace bucketmask::probes;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = 2.0 * rng.uniform01() - 1.0;
  }
  return m;
}

EmbeddingTable table(const std::string& prefix, const MatrixXd& x, const VectorXd& y) {
  EmbeddingTable t;
  for (Eigen::Index i = 0; i < x.rows(); ++i) t.ids.push_back(prefix + std::to_string(i));
  t.vectors = x;
  t.scores = y;
  return t;
}

// Dense Gaussian elimination with partial pivoting on plain vectors.
std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const auto n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    }
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t c = n; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < n; ++k) s -= a[c][k] * x[k];
    x[c] = s / a[c][c];
  }
  return x;
}

// Ridge on population-standardized features with a free intercept, solved
// from the joint normal equations over [w; b]. Returns raw-feature predictions
// on `query`.
std::vector<double> ridge_oracle(const MatrixXd& x, const VectorXd& y, double alpha, const MatrixXd& query) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  std::vector<double> mean(d, 0.0), scale(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) mean[j] += x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    mean[j] /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dv = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - mean[j];
      var += dv * dv;
    }
    const double sd = std::sqrt(var / static_cast<double>(n));
    scale[j] = sd > 0 ? 1.0 / sd : 0.0;
  }
  auto feature = [&](const MatrixXd& m, std::size_t i, std::size_t j) {
    return (m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - mean[j]) * scale[j];
  };
  std::vector<std::vector<double>> a(d + 1, std::vector<double>(d + 1, 0.0));
  std::vector<double> rhs(d + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(d + 1, 1.0);
    for (std::size_t j = 0; j < d; ++j) row[j] = feature(x, i, j);
    for (std::size_t p = 0; p <= d; ++p) {
      for (std::size_t q = 0; q <= d; ++q) a[p][q] += row[p] * row[q];
      rhs[p] += row[p] * y(static_cast<Eigen::Index>(i));
    }
  }
  for (std::size_t j = 0; j < d; ++j) a[j][j] += alpha;
  const auto w = solve(a, rhs);
  std::vector<double> out;
  for (std::size_t i = 0; i < static_cast<std::size_t>(query.rows()); ++i) {
    double s = w[d];
    for (std::size_t j = 0; j < d; ++j) s += w[j] * feature(query, i, j);
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("hyperparameter grids") {
  CHECK(std::vector<double>(kAlphaGrid.begin(), kAlphaGrid.end()) ==
        std::vector<double>{1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1, 10, 100});
  CHECK(std::vector<std::size_t>(kKGrid.begin(), kKGrid.end()) == std::vector<std::size_t>{1, 3, 5, 10, 20, 50, 100});
}

TEST_CASE("spearman") {
  const auto r = spearman(vec({1, 2, 3, 4}), vec({1, 3, 2, 4}));
  CHECK(std::abs(r.rho - 0.8) < 1e-12);
  CHECK_FALSE(r.degenerate);
  CHECK(spearman(vec({1, 2, 3, 4}), vec({4, 3, 2, 1})).rho == doctest::Approx(-1.0));

  SUBCASE("ties take average ranks") {
    CHECK(spearman(vec({1, 2, 2, 4}), vec({1, 2, 3, 4})).rho == doctest::Approx(std::sqrt(0.9)).epsilon(1e-12));
  }
  SUBCASE("invariant to monotone transforms") {
    Rng rng(1);
    VectorXd x(30), y(30);
    for (int i = 0; i < 30; ++i) {
      x(i) = rng.uniform01();
      y(i) = rng.uniform01();
    }
    const VectorXd ex = x.array().exp();
    const VectorXd cube = y.array().cube() * 5.0 + 2.0;
    CHECK(spearman(ex, cube).rho == doctest::Approx(spearman(x, y).rho).epsilon(1e-12));
  }
  SUBCASE("constant input is degenerate") {
    const auto d = spearman(vec({1, 1, 1}), vec({1, 2, 3}));
    CHECK(d.degenerate);
    CHECK(d.rho == 0.0);
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(spearman(vec({1}), vec({1})), Error);
    CHECK_THROWS_AS(spearman(vec({1, 2}), vec({1, 2, 3})), Error);
  }
}

TEST_CASE("ridge_fit") {
  Rng rng(2);
  SUBCASE("noiseless data is interpolated at small alpha") {
    const MatrixXd x = random_matrix(rng, 40, 4);
    const VectorXd w = vec({1.5, -2.0, 0.5, 3.0});
    const VectorXd y = (x * w).array() + 0.7;
    const auto m = ridge_fit(x, y, 1e-6);
    CHECK((m.predict(x) - y).cwiseAbs().maxCoeff() < 1e-5);
    CHECK((m.raw_weights() - w).cwiseAbs().maxCoeff() < 1e-5);
    CHECK(m.raw_intercept() == doctest::Approx(0.7).epsilon(1e-6));
  }
  SUBCASE("all-zero features predict the mean") {
    const MatrixXd x = MatrixXd::Zero(6, 3);
    const VectorXd y = vec({1, 2, 3, 4, 5, 6});
    const auto m = ridge_fit(x, y, 1.0);
    CHECK(m.weights.cwiseAbs().maxCoeff() == 0.0);
    CHECK((m.predict(x).array() - 3.5).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("large alpha shrinks weights") {
    const MatrixXd x = random_matrix(rng, 30, 5);
    const VectorXd y = x.col(0) * 4.0;
    CHECK(ridge_fit(x, y, 1e6).weights.norm() < 1e-3);
  }
  SUBCASE("agrees with an independent normal-equation solve") {
    for (int trial = 0; trial < 40; ++trial) {
      const auto n = static_cast<Eigen::Index>(2 + rng.uniform_index(19));
      const auto d = static_cast<Eigen::Index>(1 + rng.uniform_index(20));
      const MatrixXd x = random_matrix(rng, n, d);
      const MatrixXd q = random_matrix(rng, 5, d);
      VectorXd y(n);
      for (Eigen::Index i = 0; i < n; ++i) y(i) = 3.0 * rng.uniform01();
      for (double alpha : {1e-2, 1.0, 10.0}) {
        const auto oracle = ridge_oracle(x, y, alpha, q);
        const VectorXd got = ridge_fit(x, y, alpha).predict(q);
        for (Eigen::Index i = 0; i < q.rows(); ++i) {
          CHECK(std::abs(got(i) - oracle[static_cast<std::size_t>(i)]) < 1e-6);
        }
      }
    }
  }
  SUBCASE("preconditions") {
    const MatrixXd x = random_matrix(rng, 5, 2);
    const VectorXd y = VectorXd::Zero(5);
    CHECK_THROWS_AS(ridge_fit(x, y, 0.0), Error);
    CHECK_THROWS_AS(ridge_fit(x.topRows(1), y.head(1), 1.0), Error);
    MatrixXd bad = x;
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(ridge_fit(bad, y, 1.0), Error);
  }
}

TEST_CASE("alpha selection") {
  Rng rng(3);
  const MatrixXd x = random_matrix(rng, 60, 5);
  const VectorXd y = x * vec({1, -1, 2, 0.5, -3});
  const std::vector<double> grid(kAlphaGrid.begin(), kAlphaGrid.end());

  const auto cv = cv_select_alpha(x, y, grid, 5, 9);
  CHECK(cv.alpha == 1e-6);
  CHECK(cv.mean_mses.size() == grid.size());
  const auto again = cv_select_alpha(x, y, grid, 5, 9);
  CHECK(again.mean_mses == cv.mean_mses);

  const auto ho = holdout_select_alpha(x, y, grid, 0.1, 9);
  CHECK(ho.alpha == 1e-6);

  SUBCASE("ties prefer the larger alpha") {
    const VectorXd flat = VectorXd::Constant(60, 2.0);
    CHECK(cv_select_alpha(x, flat, grid, 5, 1).alpha == 100.0);
  }
  CHECK_THROWS_AS(cv_select_alpha(x.topRows(3), y.head(3), grid, 5, 1), Error);
  CHECK_THROWS_AS(cv_select_alpha(x, y, {}, 5, 1), Error);
}

TEST_CASE("ridge_probe on noiseless embeddings") {
  Rng rng(4);
  const VectorXd w = vec({0.3, -1.2, 2.0, 0.1, 0.9, -0.4, 1.1, 0.0});
  const MatrixXd xtr = random_matrix(rng, 200, 8);
  const MatrixXd xte = random_matrix(rng, 100, 8);
  const auto train = table("tr", xtr, xtr * w);
  const auto test = table("te", xte, xte * w);
  for (auto protocol : {AlphaProtocol::Holdout, AlphaProtocol::KFold}) {
    RidgeProbeOptions options;
    options.protocol = protocol;
    const auto r = ridge_probe(train, {{"test", test}}, options);
    CHECK(r.spearman_rho >= 0.999);
    CHECK(r.selected_alpha.has_value());
    CHECK(r.standardized);
    CHECK(r.predictions.size() == 100);
    CHECK(r.selection_protocol == (protocol == AlphaProtocol::KFold ? "5-fold" : "holdout"));
  }
}

TEST_CASE("selection_probe") {
  Rng rng(5);
  const MatrixXd x = random_matrix(rng, 50, 4);
  const auto sel = table("s", x, x * vec({1, 2, 3, 4}));
  const auto r = selection_probe(sel, 17);
  REQUIRE(r.scores.size() == 1);
  CHECK(r.scores[0].split == "selection");
  CHECK(r.scores[0].n == 10);
  CHECK(r.selection_protocol == "5-fold");
  CHECK(r.spearman_rho > 0.99);
  CHECK(selection_probe(sel, 17).fold_mses == r.fold_mses);
}

TEST_CASE("knn") {
  SUBCASE("duplicate reference points keep reference order") {
    MatrixXd ref(2, 1);
    ref << 1.0, 1.0;
    MatrixXd q(1, 1);
    q << 1.0;
    const auto pred = linalg::knn_predict(ref, vec({5.0, 9.0}), q, 1);
    CHECK(pred(0) == 5.0);
    CHECK(linalg::knn_predict(ref, vec({5.0, 9.0}), q, 2)(0) == 7.0);
  }
  SUBCASE("well separated clusters are ranked perfectly") {
    MatrixXd xtr(9, 2), xv(3, 2), xt(3, 2);
    VectorXd ytr(9), yv(3), yt(3);
    for (int c = 0; c < 3; ++c) {
      for (int k = 0; k < 3; ++k) {
        xtr.row(3 * c + k) << 10.0 * c + 0.1 * k, 0.0;
        ytr(3 * c + k) = c;
      }
      xv.row(c) << 10.0 * c + 0.05, 0.1;
      xt.row(c) << 10.0 * c - 0.05, -0.1;
      yv(c) = yt(c) = c;
    }
    const auto r = knn_probe(table("a", xtr, ytr), table("v", xv, yv), table("t", xt, yt));
    CHECK(r.spearman_rho == doctest::Approx(1.0));
    CHECK(r.selected_k == 1u);
    CHECK(r.grid == std::vector<double>{1, 3, 5});
    CHECK(r.selection_protocol == "validation");
  }
  SUBCASE("k equal to the training size predicts a constant") {
    Rng rng(6);
    const MatrixXd xtr = random_matrix(rng, 5, 2), xv = random_matrix(rng, 4, 2);
    const auto train = table("a", xtr, vec({1, 2, 3, 4, 5}));
    const auto val = table("v", xv, vec({1, 2, 3, 4}));
    const auto r = knn_probe(train, val, val, {5});
    CHECK(r.selected_k == 5u);
    CHECK(r.degenerate);
    CHECK(r.spearman_rho == 0.0);
  }
  SUBCASE("every k too large") {
    Rng rng(7);
    const MatrixXd x = random_matrix(rng, 3, 2);
    const auto t = table("a", x, vec({1, 2, 3}));
    CHECK_THROWS_AS(knn_probe(t, t, t, {5, 10}), Error);
  }
  SUBCASE("cosine distance ignores scale") {
    MatrixXd ref(2, 2);
    ref << 10.0, 0.0, 0.0, 1.0;
    MatrixXd q(1, 2);
    q << 0.0, 50.0;
    CHECK(linalg::nearest(ref, q.row(0), 1, Metric::Cosine).front() == 1);
  }
}

TEST_CASE("embedding tables") {
  Rng rng(8);
  auto t = table("x", random_matrix(rng, 4, 3), vec({1, 2, 3, 4}));
  CHECK_NOTHROW(t.validate());
  const auto s = t.select({"x3", "x0"});
  CHECK(s.ids == std::vector<std::string>{"x3", "x0"});
  CHECK(s.vectors.row(0) == t.vectors.row(3));
  CHECK(s.scores(1) == 1.0);
  try {
    t.select({"nope"});
    FAIL("expected not found");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotFound);
  }
  t.ids[1] = "x0";
  CHECK_THROWS_AS(t.validate(), Error);
}

TEST_CASE("stratified_eval") {
  std::vector<Prediction> preds;
  for (int i = 0; i < 12; ++i) preds.push_back({"v" + std::to_string(i), static_cast<double>(i), static_cast<double>(i)});
  std::map<std::string, std::vector<std::string>> strata;
  for (int i = 0; i < 10; ++i) strata["big"].push_back("v" + std::to_string(i));
  strata["small"] = {"v10", "v11"};
  strata["empty"] = {};

  const auto s = stratified_eval(preds, strata);
  REQUIRE(s.size() == 2);
  CHECK(s[0].label == "big");
  CHECK(s[0].n == 10);
  CHECK_FALSE(s[0].low_n);
  CHECK(s[0].rho == doctest::Approx(1.0));
  CHECK(s[1].label == "small");
  CHECK(s[1].low_n);

  CHECK_THROWS_AS(stratified_eval(preds, {{"a", {"missing"}}}), Error);
  CHECK_THROWS_AS(stratified_eval(preds, {{"a", {"v1", "v2"}}, {"b", {"v2", "v3"}}}), Error);
}
