#include "bucketmask/probes.hpp"

#include "bucketmask/error.hpp"
#include "bucketmask/rng.hpp"

#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace bucketmask::probes {

namespace {

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  return order;
}

template <typename Rows>
MatrixXd take_rows(const MatrixXd& m, const Rows& rows) {
  MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

template <typename Rows>
VectorXd take(const VectorXd& v, const Rows& rows) {
  VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(rows[i]));
  return out;
}

void check_finite(const MatrixXd& x, const VectorXd& y) {
  require(x.rows() == y.size(), "feature rows and targets differ in count");
  require(x.allFinite() && y.allFinite(), "non-finite value in probe input");
}

// Argmin with ties toward the larger alpha.
std::size_t best_alpha_index(const std::vector<double>& grid, const std::vector<double>& mses) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const bool lower = mses[i] < mses[best];
    const bool tie = mses[i] == mses[best] && grid[i] > grid[best];
    if (lower || tie) best = i;
  }
  return best;
}

void check_grid(const std::vector<double>& grid) {
  require(!grid.empty(), "alpha grid is empty");
  for (double a : grid) require(a > 0.0, "alpha grid entries must be positive");
}

double validation_mse(const MatrixXd& x, const VectorXd& y, const std::vector<std::size_t>& fit,
                      const std::vector<std::size_t>& held, double alpha) {
  const auto model = ridge_fit(take_rows(x, fit), take(y, fit), alpha);
  const VectorXd residual = model.predict(take_rows(x, held)) - take(y, held);
  return residual.squaredNorm() / static_cast<double>(held.size());
}

SplitScore score_split(const std::string& name, const VectorXd& predicted, const VectorXd& actual) {
  SplitScore s;
  s.split = name;
  s.n = static_cast<std::size_t>(actual.size());
  if (s.n >= 2) {
    const auto c = spearman(predicted, actual);
    s.rho = c.rho;
    s.degenerate = c.degenerate;
  } else {
    s.degenerate = true;
  }
  return s;
}

std::vector<Prediction> to_predictions(const EmbeddingTable& table, const VectorXd& predicted) {
  std::vector<Prediction> out;
  out.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.push_back({table.ids[i], predicted(r), table.scores(r)});
  }
  return out;
}

}  // namespace

void EmbeddingTable::validate() const {
  require(vectors.rows() == static_cast<Eigen::Index>(ids.size()) &&
              scores.size() == static_cast<Eigen::Index>(ids.size()),
          "embedding table: ids, vectors and scores differ in count");
  require(vectors.allFinite() && scores.allFinite(), "embedding table: non-finite entry");
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    require(seen.insert(id).second, "embedding table: duplicate id '" + id + "'");
  }
}

EmbeddingTable EmbeddingTable::select(const std::vector<std::string>& wanted) const {
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < ids.size(); ++i) row_of.emplace(ids[i], i);
  std::vector<std::size_t> rows;
  rows.reserve(wanted.size());
  for (const auto& id : wanted) {
    const auto it = row_of.find(id);
    if (it == row_of.end()) fail(ErrorKind::NotFound, "no embedding for variant '" + id + "'");
    rows.push_back(it->second);
  }
  EmbeddingTable out;
  out.ids = wanted;
  out.vectors = take_rows(vectors, rows);
  out.scores = take(scores, rows);
  return out;
}

Correlation<double> spearman(const VectorXd& x, const VectorXd& y) {
  require(x.size() == y.size(), "spearman: arguments differ in length");
  require(x.size() >= 2, "spearman: need at least two observations");
  return linalg::spearman(x, y);
}

linalg::RidgeModel<double> ridge_fit(const MatrixXd& x, const VectorXd& y, double alpha) {
  require(alpha > 0.0, "ridge_fit: alpha must be positive");
  require(x.rows() >= 2, "ridge_fit: need at least two samples");
  check_finite(x, y);
  return linalg::ridge_fit(x, y, alpha);
}

AlphaSelection cv_select_alpha(const MatrixXd& x, const VectorXd& y,
                               const std::vector<double>& grid, std::size_t folds,
                               std::uint64_t seed) {
  check_grid(grid);
  check_finite(x, y);
  const auto n = static_cast<std::size_t>(x.rows());
  require(folds >= 2 && n >= folds, "cv_select_alpha: need at least as many samples as folds");

  const auto order = shuffled(n, seed);
  std::vector<std::vector<std::size_t>> held(folds);
  for (std::size_t i = 0; i < n; ++i) held[i % folds].push_back(order[i]);

  AlphaSelection out;
  out.mean_mses.assign(grid.size(), 0.0);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> fit;
    for (std::size_t g = 0; g < folds; ++g) {
      if (g != f) fit.insert(fit.end(), held[g].begin(), held[g].end());
    }
    for (std::size_t a = 0; a < grid.size(); ++a) {
      out.mean_mses[a] += validation_mse(x, y, fit, held[f], grid[a]) / static_cast<double>(folds);
    }
  }
  out.alpha = grid[best_alpha_index(grid, out.mean_mses)];
  return out;
}

AlphaSelection holdout_select_alpha(const MatrixXd& x, const VectorXd& y,
                                    const std::vector<double>& grid, double holdout_fraction,
                                    std::uint64_t seed) {
  check_grid(grid);
  check_finite(x, y);
  const auto n = static_cast<std::size_t>(x.rows());
  require(holdout_fraction > 0.0 && holdout_fraction < 1.0, "holdout fraction must lie in (0, 1)");
  auto n_held = static_cast<std::size_t>(std::floor(static_cast<double>(n) * holdout_fraction));
  n_held = std::max<std::size_t>(n_held, 1);
  require(n >= n_held + 2, "holdout_select_alpha: too few samples");

  const auto order = shuffled(n, seed);
  const std::vector<std::size_t> held(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_held));
  const std::vector<std::size_t> fit(order.begin() + static_cast<std::ptrdiff_t>(n_held), order.end());

  AlphaSelection out;
  for (double alpha : grid) out.mean_mses.push_back(validation_mse(x, y, fit, held, alpha));
  out.alpha = grid[best_alpha_index(grid, out.mean_mses)];
  return out;
}

std::string_view to_string(ProbeKind kind) { return kind == ProbeKind::Ridge ? "ridge" : "knn"; }

std::optional<ProbeKind> parse_probe_kind(std::string_view name) {
  if (name == "ridge") return ProbeKind::Ridge;
  if (name == "knn") return ProbeKind::Knn;
  return std::nullopt;
}

ProbeResult ridge_probe(const EmbeddingTable& train,
                        const std::vector<std::pair<std::string, EmbeddingTable>>& evaluations,
                        const RidgeProbeOptions& options) {
  train.validate();
  require(!evaluations.empty(), "ridge_probe: nothing to evaluate");

  const auto selection =
      options.protocol == AlphaProtocol::KFold
          ? cv_select_alpha(train.vectors, train.scores, options.grid, options.folds, options.seed)
          : holdout_select_alpha(train.vectors, train.scores, options.grid,
                                 options.holdout_fraction, options.seed);

  ProbeResult out;
  out.kind = ProbeKind::Ridge;
  out.grid = options.grid;
  out.fold_mses = selection.mean_mses;
  out.selected_alpha = selection.alpha;
  out.standardized = true;
  out.selection_protocol = options.protocol == AlphaProtocol::KFold
                               ? std::to_string(options.folds) + "-fold"
                               : "holdout";

  const auto model = ridge_fit(train.vectors, train.scores, selection.alpha);
  for (const auto& [name, table] : evaluations) {
    table.validate();
    require(table.dim() == train.dim(), "ridge_probe: embedding widths differ");
    const VectorXd predicted = model.predict(table.vectors);
    out.scores.push_back(score_split(name, predicted, table.scores));
    out.predictions = to_predictions(table, predicted);
  }
  out.spearman_rho = out.scores.back().rho;
  out.degenerate = out.scores.back().degenerate;
  return out;
}

ProbeResult selection_probe(const EmbeddingTable& selection, std::uint64_t seed,
                            const std::vector<double>& grid) {
  selection.validate();
  const auto n = selection.size();
  require(n >= 10, "selection_probe: need at least 10 variants");
  const auto order = shuffled(n, mix64(seed));
  const auto n_fit = n * 4 / 5;
  std::vector<std::string> fit_ids;
  std::vector<std::string> eval_ids;
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_fit ? fit_ids : eval_ids).push_back(selection.ids[order[i]]);
  }
  RidgeProbeOptions options;
  options.grid = grid;
  options.protocol = AlphaProtocol::KFold;
  options.folds = 5;
  options.seed = seed;
  return ridge_probe(selection.select(fit_ids), {{"selection", selection.select(eval_ids)}}, options);
}

ProbeResult knn_probe(const EmbeddingTable& train, const EmbeddingTable& val,
                      const EmbeddingTable& test, const std::vector<std::size_t>& k_grid,
                      Metric metric) {
  train.validate();
  val.validate();
  test.validate();
  require(train.dim() == val.dim() && train.dim() == test.dim(), "knn_probe: embedding widths differ");

  ProbeResult out;
  out.kind = ProbeKind::Knn;
  out.selection_protocol = "validation";
  double best_rho = -std::numeric_limits<double>::infinity();
  for (auto k : k_grid) {
    if (k == 0 || k > train.size()) continue;
    const VectorXd predicted = linalg::knn_predict(train.vectors, train.scores, val.vectors, k, metric);
    const auto s = score_split("val", predicted, val.scores);
    out.grid.push_back(static_cast<double>(k));
    out.grid_rhos.push_back(s.rho);
    if (s.rho > best_rho) {
      best_rho = s.rho;
      out.selected_k = k;
    }
  }
  require(out.selected_k.has_value(), "knn_probe: every k in the grid exceeds the training set size");

  const VectorXd val_pred = linalg::knn_predict(train.vectors, train.scores, val.vectors, *out.selected_k, metric);
  const VectorXd test_pred = linalg::knn_predict(train.vectors, train.scores, test.vectors, *out.selected_k, metric);
  out.scores.push_back(score_split("val", val_pred, val.scores));
  out.scores.push_back(score_split("test", test_pred, test.scores));
  out.predictions = to_predictions(test, test_pred);
  out.spearman_rho = out.scores.back().rho;
  out.degenerate = out.scores.back().degenerate;
  return out;
}

std::vector<StratumScore> stratified_eval(const std::vector<Prediction>& predictions,
                                          const std::map<std::string, std::vector<std::string>>& strata) {
  std::unordered_map<std::string, const Prediction*> by_id;
  for (const auto& p : predictions) by_id.emplace(p.id, &p);

  std::unordered_set<std::string> assigned;
  std::vector<StratumScore> out;
  for (const auto& [label, ids] : strata) {
    if (ids.empty()) continue;
    VectorXd predicted(static_cast<Eigen::Index>(ids.size()));
    VectorXd actual(static_cast<Eigen::Index>(ids.size()));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto it = by_id.find(ids[i]);
      require(it != by_id.end(), "stratum '" + label + "' names unknown variant '" + ids[i] + "'");
      require(assigned.insert(ids[i]).second, "variant '" + ids[i] + "' appears in two strata");
      predicted(static_cast<Eigen::Index>(i)) = it->second->predicted;
      actual(static_cast<Eigen::Index>(i)) = it->second->actual;
    }
    StratumScore s;
    s.label = label;
    s.n = ids.size();
    s.low_n = s.n < kMinStratumSize;
    if (s.n >= 2) {
      const auto c = linalg::spearman(predicted, actual);
      s.rho = c.rho;
      s.degenerate = c.degenerate;
    } else {
      s.degenerate = true;
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace bucketmask::probes
