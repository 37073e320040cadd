#pragma once

#include "bucketmask/structures.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace bucketmask::stats {

struct ChiSquare {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

// Goodness of fit of `counts` to the uniform distribution over its cells.
ChiSquare chi_square_uniform(const std::vector<std::size_t>& counts);

// Homogeneity test on a 2 x K table. Columns empty in both rows are dropped.
ChiSquare chi_square_homogeneity(const std::vector<std::size_t>& a,
                                 const std::vector<std::size_t>& b);

struct MeanComparison {
  double mean_a = 0.0;
  double mean_b = 0.0;
  double z = 0.0;
  double p_greater = 1.0;  // one-sided p for mean_a > mean_b
};

// Welch statistic with a normal reference; intended for large samples.
MeanComparison compare_means(const std::vector<double>& a, const std::vector<double>& b);

// Fraction of unordered masked pairs (i < j) that are contacts. Empty when
// fewer than two positions are masked.
std::optional<double> masked_pair_contact_fraction(const std::vector<std::size_t>& masked,
                                                   const structures::ContactMap& contacts);

// Contact edges over all unordered position pairs.
double contact_density(const structures::ContactMap& contacts);

}  // namespace bucketmask::stats
