#include "bucketmask/stats.hpp"

#include "bucketmask/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>

namespace bucketmask::stats {

namespace {

double chi_square_sf(double statistic, std::size_t dof) {
  if (dof == 0) return 1.0;
  const boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v, double m) {
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

ChiSquare chi_square_uniform(const std::vector<std::size_t>& counts) {
  require(counts.size() >= 2, "chi_square_uniform: need at least two cells");
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  ChiSquare out;
  out.dof = counts.size() - 1;
  if (total == 0.0) return out;
  const double expected = total / static_cast<double>(counts.size());
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    out.statistic += d * d / expected;
  }
  out.p_value = chi_square_sf(out.statistic, out.dof);
  return out;
}

ChiSquare chi_square_homogeneity(const std::vector<std::size_t>& a,
                                 const std::vector<std::size_t>& b) {
  require(a.size() == b.size(), "chi_square_homogeneity: rows differ in width");
  double total_a = 0.0;
  double total_b = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    total_a += static_cast<double>(a[k]);
    total_b += static_cast<double>(b[k]);
  }
  ChiSquare out;
  const double total = total_a + total_b;
  if (total_a == 0.0 || total_b == 0.0) return out;
  std::size_t columns = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double col = static_cast<double>(a[k] + b[k]);
    if (col == 0.0) continue;
    ++columns;
    const double ea = col * total_a / total;
    const double eb = col * total_b / total;
    const double da = static_cast<double>(a[k]) - ea;
    const double db = static_cast<double>(b[k]) - eb;
    out.statistic += da * da / ea + db * db / eb;
  }
  out.dof = columns > 0 ? columns - 1 : 0;
  out.p_value = chi_square_sf(out.statistic, out.dof);
  return out;
}

MeanComparison compare_means(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() >= 2 && b.size() >= 2, "compare_means: need two observations per sample");
  MeanComparison out;
  out.mean_a = mean(a);
  out.mean_b = mean(b);
  const double se = std::sqrt(variance(a, out.mean_a) / static_cast<double>(a.size()) +
                              variance(b, out.mean_b) / static_cast<double>(b.size()));
  if (se == 0.0) {
    out.z = out.mean_a > out.mean_b ? INFINITY : (out.mean_a < out.mean_b ? -INFINITY : 0.0);
  } else {
    out.z = (out.mean_a - out.mean_b) / se;
  }
  out.p_greater = 0.5 * std::erfc(out.z / std::sqrt(2.0));
  return out;
}

std::optional<double> masked_pair_contact_fraction(const std::vector<std::size_t>& masked,
                                                   const structures::ContactMap& contacts) {
  if (masked.size() < 2) return std::nullopt;
  std::size_t hits = 0;
  for (std::size_t a = 0; a < masked.size(); ++a) {
    for (std::size_t b = a + 1; b < masked.size(); ++b) {
      if (masked[a] != masked[b] && contacts.contains(masked[a], masked[b])) ++hits;
    }
  }
  const double pairs = static_cast<double>(masked.size()) * static_cast<double>(masked.size() - 1) / 2.0;
  return static_cast<double>(hits) / pairs;
}

double contact_density(const structures::ContactMap& contacts) {
  const double n = static_cast<double>(contacts.length());
  if (n < 2) return 0.0;
  return static_cast<double>(contacts.edge_count()) / (n * (n - 1) / 2.0);
}

}  // namespace bucketmask::stats
