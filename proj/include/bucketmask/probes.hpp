#pragma once

#include "bucketmask/linalg.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bucketmask::probes {

using linalg::Correlation;
using linalg::Metric;
using MatrixXd = linalg::Matrix<double>;
using VectorXd = linalg::Vector<double>;

inline constexpr std::array<double, 9> kAlphaGrid{1e-6, 1e-5, 1e-4, 1e-3, 0.01, 0.1, 1.0, 10.0, 100.0};
inline constexpr std::array<std::size_t, 7> kKGrid{1, 3, 5, 10, 20, 50, 100};

struct EmbeddingTable {
  std::vector<std::string> ids;
  MatrixXd vectors;  // one row per id
  VectorXd scores;

  std::size_t size() const { return ids.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }

  // Throws Contract on shape mismatch, duplicate ids or non-finite values.
  void validate() const;

  // Rows for `wanted`, in that order. Unknown ids throw NotFound.
  EmbeddingTable select(const std::vector<std::string>& wanted) const;
};

Correlation<double> spearman(const VectorXd& x, const VectorXd& y);

linalg::RidgeModel<double> ridge_fit(const MatrixXd& x, const VectorXd& y, double alpha);

struct AlphaSelection {
  double alpha = 0.0;
  std::vector<double> mean_mses;  // aligned with the grid
};

// Seeded k-fold assignment; smallest mean validation MSE wins, ties go to the
// larger alpha.
AlphaSelection cv_select_alpha(const MatrixXd& x, const VectorXd& y,
                               const std::vector<double>& grid, std::size_t folds,
                               std::uint64_t seed);

// Single seeded hold-out of floor(fraction * n) rows (at least one).
AlphaSelection holdout_select_alpha(const MatrixXd& x, const VectorXd& y,
                                    const std::vector<double>& grid, double holdout_fraction,
                                    std::uint64_t seed);

enum class ProbeKind { Ridge, Knn };

std::string_view to_string(ProbeKind kind);
std::optional<ProbeKind> parse_probe_kind(std::string_view name);

struct Prediction {
  std::string id;
  double predicted = 0.0;
  double actual = 0.0;
};

struct SplitScore {
  std::string split;
  std::size_t n = 0;
  double rho = 0.0;
  bool degenerate = false;
};

struct ProbeResult {
  ProbeKind kind = ProbeKind::Ridge;
  std::optional<double> selected_alpha;
  std::optional<std::size_t> selected_k;
  std::vector<double> grid;         // hyperparameters actually evaluated
  std::vector<double> fold_mses;    // ridge: mean validation MSE per grid entry
  std::vector<double> grid_rhos;    // knn: validation rho per grid entry
  std::string selection_protocol;   // "5-fold", "holdout", "validation"
  bool standardized = false;
  double spearman_rho = 0.0;        // on the primary reported split
  bool degenerate = false;
  std::vector<SplitScore> scores;   // per evaluated split
  std::vector<Prediction> predictions;  // on the primary reported split
};

enum class AlphaProtocol { KFold, Holdout };

struct RidgeProbeOptions {
  std::vector<double> grid{kAlphaGrid.begin(), kAlphaGrid.end()};
  AlphaProtocol protocol = AlphaProtocol::Holdout;
  std::size_t folds = 5;
  double holdout_fraction = 0.1;
  std::uint64_t seed = 0;
};

// Selects alpha on `train`, refits on all of `train` (fresh standardization),
// and scores each evaluation split. The last evaluation split is the primary
// one whose predictions are kept.
ProbeResult ridge_probe(const EmbeddingTable& train,
                        const std::vector<std::pair<std::string, EmbeddingTable>>& evaluations,
                        const RidgeProbeOptions& options);

// Checkpoint-selection routine: the selection set is cut 80/20, alpha picked
// by 5-fold CV on the 80%, and the refit model scored on the 20%. The score is
// reported under the split name "selection".
ProbeResult selection_probe(const EmbeddingTable& selection, std::uint64_t seed,
                            const std::vector<double>& grid = {kAlphaGrid.begin(), kAlphaGrid.end()});

// k chosen by the highest validation rho (ties to the smaller k); grid
// entries larger than |train| are skipped.
ProbeResult knn_probe(const EmbeddingTable& train, const EmbeddingTable& val,
                      const EmbeddingTable& test,
                      const std::vector<std::size_t>& k_grid = {kKGrid.begin(), kKGrid.end()},
                      Metric metric = Metric::Euclidean);

struct StratumScore {
  std::string label;
  std::size_t n = 0;
  double rho = 0.0;
  bool degenerate = false;
  bool low_n = false;  // fewer than kMinStratumSize variants
};

inline constexpr std::size_t kMinStratumSize = 10;

// Spearman rho per stratum. Empty strata are omitted; an id missing from the
// predictions, or listed in two strata, throws Contract.
std::vector<StratumScore> stratified_eval(const std::vector<Prediction>& predictions,
                                          const std::map<std::string, std::vector<std::string>>& strata);

}  // namespace bucketmask::probes
