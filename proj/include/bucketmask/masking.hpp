#pragma once

#include "bucketmask/rng.hpp"
#include "bucketmask/structures.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bucketmask::masking {

using structures::ContactMap;

enum class Strategy { Random, Bucket, GmSpan };

std::string_view to_string(Strategy strategy);
std::optional<Strategy> parse_strategy(std::string_view name);

// Where structural seeds come from.
enum class SeedPool {
  ContactBearing,  // unmasked positions with at least one off-diagonal contact
  AllRemaining,    // every unmasked position
};

inline constexpr std::string_view kStandardAminoAcids = "ACDEFGHIKLMNPQRSTVWY";

// 80-10-10 style corruption thresholds.
struct CorruptionPolicy {
  double mask_p = 0.8;
  double random_p = 0.1;
  double keep_p = 0.1;
  std::string vocab{kStandardAminoAcids};
  char mask_symbol = '#';

  void validate() const;
};

struct MaskConfig {
  double rate_min = 0.15;
  double rate_max = 0.75;
  double lambda = 0.2;  // exploration rate: share of the budget drawn uniformly
  SeedPool seed_pool = SeedPool::ContactBearing;
  CorruptionPolicy corruption;

  void validate() const;
};

enum class ActionKind { Mask, Random, Keep };

std::string_view to_string(ActionKind kind);

struct MaskAction {
  std::size_t pos = 0;
  ActionKind kind = ActionKind::Mask;
  char replacement = '\0';  // set for Random only

  friend bool operator==(const MaskAction&, const MaskAction&) = default;
};

struct Span {
  std::size_t start = 0;
  std::size_t length = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

struct MaskPlan {
  std::size_t length = 0;
  double rate = 0.0;
  std::vector<std::size_t> struct_indices;  // sorted
  std::vector<std::size_t> rand_indices;    // sorted, disjoint from struct_indices
  std::vector<std::size_t> span_sizes;      // per structural seed, in seed order
  std::vector<Span> spans;                  // contiguous runs, geometry-matched plans only
  std::size_t struct_shortfall = 0;         // structural quota moved to the random phase

  // All masked positions, ascending.
  std::vector<std::size_t> masked() const;
  std::size_t size() const { return struct_indices.size() + rand_indices.size(); }

  friend bool operator==(const MaskPlan&, const MaskPlan&) = default;
};

// floor(length * rate)
std::size_t mask_budget(std::size_t length, double rate);

// Uniform on [rate_min, rate_max); exactly rate_min when the interval is empty.
double sample_rate(Rng& rng, const MaskConfig& config);

MaskPlan random_mask_plan(std::size_t length, double rate, Rng& rng);

// Structural phase: seeds are drawn uniformly from the seed pool, and each
// seed's unmasked closed neighborhood contributes min(|N|, remaining quota)
// positions sampled without replacement. When the pool runs dry the rest of
// the structural quota moves to the uniform phase.
MaskPlan bucket_mask_plan(std::size_t length, const ContactMap& contacts, double rate,
                          double lambda, Rng& rng, SeedPool pool = SeedPool::ContactBearing);

// Same span sizes as the bucket plan drawn from this stream, placed as
// non-overlapping contiguous runs at uniformly random offsets.
MaskPlan gm_span_mask_plan(std::size_t length, const ContactMap& contacts, double rate,
                           double lambda, Rng& rng, SeedPool pool = SeedPool::ContactBearing);

// Dispatches on strategy. `contacts` may be null for Strategy::Random only.
MaskPlan sample_plan(Strategy strategy, std::size_t length, const ContactMap* contacts,
                     double rate, const MaskConfig& config, Rng& rng);

// One action per masked position, ascending by position.
std::vector<MaskAction> draw_actions(const MaskPlan& plan, const CorruptionPolicy& policy,
                                     Rng& rng);

struct Target {
  std::size_t pos = 0;
  char token = '\0';

  friend bool operator==(const Target&, const Target&) = default;
};

struct Corruption {
  std::string corrupted;
  std::vector<Target> targets;  // original token at every masked position
  std::vector<MaskAction> actions;
};

Corruption apply_actions(std::string_view tokens, std::size_t plan_length,
                         const std::vector<MaskAction>& actions, char mask_symbol);

Corruption apply_corruption(std::string_view tokens, const MaskPlan& plan,
                            const CorruptionPolicy& policy, Rng& rng);

}  // namespace bucketmask::masking
