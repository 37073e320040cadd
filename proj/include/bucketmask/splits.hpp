#pragma once

#include "bucketmask/structures.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace bucketmask::splits {

// Positions are 0-based in memory and 1-based in mutation codes on disk.
struct Substitution {
  char wt = 'X';
  std::size_t position = 0;
  char mut = 'X';

  auto operator<=>(const Substitution&) const = default;
};

struct Variant {
  std::vector<Substitution> substitutions;  // strictly increasing positions
  double score = 0.0;
  std::string raw_id;
};

// "A2C:D5E" style code; throws Parse on malformed input.
std::vector<Substitution> parse_mutation_code(std::string_view code);
std::string render_mutation_code(const std::vector<Substitution>& substitutions);

struct DmsTable {
  std::vector<Variant> variants;
  std::vector<std::string> warnings;
};

// CSV with `mutant` and `DMS_score` header columns. Duplicate mutants keep
// the first row. When a reference sequence is given, each substitution's WT
// letter is checked against it.
DmsTable parse_dms(std::string_view csv, std::optional<std::string_view> reference = std::nullopt);

enum class SplitKind { ModelSelection, Regime, Position, Mutation, Neighborhood };

std::string_view to_string(SplitKind kind);
std::optional<SplitKind> parse_split_kind(std::string_view name);

struct SplitManifest {
  SplitKind kind = SplitKind::ModelSelection;
  std::optional<std::uint64_t> seed;  // absent for the deterministic regime split
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  std::vector<std::string> excluded;
  std::vector<std::string> warnings;
};

// 10% selection set in `train`, the remaining 90% in `test`.
SplitManifest model_selection_split(const std::vector<Variant>& variants, std::uint64_t seed);

// Single mutants train, higher-order mutants test.
SplitManifest regime_split(const std::vector<Variant>& variants);

// Observed positions shuffled and cut at floor(0.8 n); variants touching both
// groups are excluded.
SplitManifest position_split(const std::vector<Variant>& variants, std::uint64_t seed);

// As position_split over unique (wt, position, mut) substitutions.
SplitManifest mutation_split(const std::vector<Variant>& variants, std::uint64_t seed);

// floor(0.8 n) train+val / rest test, then floor(0.8 m) train / rest val.
SplitManifest neighborhood_split(const std::vector<Variant>& variants, std::uint64_t seed);

SplitManifest make_split(SplitKind kind, const std::vector<Variant>& variants, std::uint64_t seed);

struct DistanceBin {
  std::size_t min = 1;
  std::optional<std::size_t> max;  // inclusive; open-ended when absent

  std::string label() const;
  bool contains(std::size_t d) const { return d >= min && (!max || d <= *max); }
};

std::vector<DistanceBin> default_distance_bins();

inline constexpr std::size_t kLongRangeSeparation = 6;

// Second-order variants grouped three ways. Each map sends a stratum label to
// variant ids.
struct SecondOrderStrata {
  std::map<std::string, std::vector<std::string>> by_sequence_distance;
  std::map<std::string, std::vector<std::string>> by_contact;  // "contact" / "no_contact"
  std::vector<std::string> long_range_contacts;  // in contact and > 6 apart in sequence
};

SecondOrderStrata stratify_second_order(const std::vector<Variant>& variants,
                                        const structures::ContactMap& contacts,
                                        const std::vector<DistanceBin>& bins = default_distance_bins());

}  // namespace bucketmask::splits
