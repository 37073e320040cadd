#include "bucketmask/masking.hpp"

#include "bucketmask/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bucketmask::masking {

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::Random: return "random";
    case Strategy::Bucket: return "bucket";
    case Strategy::GmSpan: return "gm_span";
  }
  return "random";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  if (name == "random") return Strategy::Random;
  if (name == "bucket") return Strategy::Bucket;
  if (name == "gm_span" || name == "gm-span") return Strategy::GmSpan;
  return std::nullopt;
}

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::Mask: return "MASK";
    case ActionKind::Random: return "RANDOM";
    case ActionKind::Keep: return "KEEP";
  }
  return "MASK";
}

void CorruptionPolicy::validate() const {
  require(mask_p >= 0.0 && random_p >= 0.0 && keep_p >= 0.0,
          "corruption thresholds must be non-negative");
  require(std::abs(mask_p + random_p + keep_p - 1.0) < 1e-9, "corruption thresholds must sum to 1");
  require(!vocab.empty(), "corruption vocabulary is empty");
}

void MaskConfig::validate() const {
  require(rate_min >= 0.0 && rate_max <= 1.0 && rate_min <= rate_max,
          "masking rates must satisfy 0 <= rate_min <= rate_max <= 1");
  require(lambda >= 0.0 && lambda <= 1.0, "exploration rate must lie in [0, 1]");
  corruption.validate();
}

std::vector<std::size_t> MaskPlan::masked() const {
  std::vector<std::size_t> out;
  out.reserve(size());
  std::merge(struct_indices.begin(), struct_indices.end(), rand_indices.begin(),
             rand_indices.end(), std::back_inserter(out));
  return out;
}

std::size_t mask_budget(std::size_t length, double rate) {
  require(rate >= 0.0 && rate <= 1.0, "masking rate must lie in [0, 1]");
  return static_cast<std::size_t>(std::floor(static_cast<double>(length) * rate));
}

double sample_rate(Rng& rng, const MaskConfig& config) {
  config.validate();
  if (config.rate_max <= config.rate_min) return config.rate_min;
  const double r = config.rate_min + (config.rate_max - config.rate_min) * rng.uniform01();
  return r < config.rate_max ? r : std::nextafter(config.rate_max, config.rate_min);
}

namespace {

std::vector<std::size_t> unmasked_positions(const std::vector<bool>& masked) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < masked.size(); ++i) {
    if (!masked[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> sorted_indices(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Positions still available as seeds, with O(1) removal.
class SeedSet {
 public:
  explicit SeedSet(std::vector<std::size_t> members, std::size_t length)
      : members_(std::move(members)), slot_(length, kAbsent) {
    for (std::size_t i = 0; i < members_.size(); ++i) slot_[members_[i]] = i;
  }

  bool empty() const { return members_.empty(); }

  std::size_t draw(Rng& rng) const { return members_[rng.uniform_index(members_.size())]; }

  void erase(std::size_t pos) {
    const auto s = slot_[pos];
    if (s == kAbsent) return;
    const auto last = members_.back();
    members_[s] = last;
    slot_[last] = s;
    members_.pop_back();
    slot_[pos] = kAbsent;
  }

 private:
  static constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  std::vector<std::size_t> members_;
  std::vector<std::size_t> slot_;
};

}  // namespace

MaskPlan random_mask_plan(std::size_t length, double rate, Rng& rng) {
  require(length >= 1, "random_mask_plan: length must be positive");
  MaskPlan plan;
  plan.length = length;
  plan.rate = rate;
  const auto budget = mask_budget(length, rate);
  std::vector<std::size_t> all(length);
  std::iota(all.begin(), all.end(), std::size_t{0});
  plan.rand_indices = sorted_indices(rng.sample(std::move(all), budget));
  return plan;
}

MaskPlan bucket_mask_plan(std::size_t length, const ContactMap& contacts, double rate,
                          double lambda, Rng& rng, SeedPool pool) {
  require(length >= 1, "bucket_mask_plan: length must be positive");
  require(contacts.length() == length,
          "bucket_mask_plan: contact map length " + std::to_string(contacts.length()) +
              " differs from sequence length " + std::to_string(length));
  require(lambda >= 0.0 && lambda <= 1.0, "exploration rate must lie in [0, 1]");

  MaskPlan plan;
  plan.length = length;
  plan.rate = rate;
  const auto n_total = mask_budget(length, rate);
  const auto n_struct =
      static_cast<std::size_t>(std::floor(static_cast<double>(n_total) * (1.0 - lambda)));

  std::vector<std::size_t> seeds;
  for (std::size_t i = 0; i < length; ++i) {
    if (pool == SeedPool::AllRemaining || contacts.off_diagonal_degree(i) > 0) seeds.push_back(i);
  }
  SeedSet seed_set(std::move(seeds), length);
  std::vector<bool> masked(length, false);

  std::vector<std::size_t> structural;
  std::vector<std::size_t> neighborhood;
  while (structural.size() < n_struct && !seed_set.empty()) {
    const auto seed = seed_set.draw(rng);
    neighborhood.clear();
    neighborhood.push_back(seed);
    for (auto j : contacts.neighbors(seed)) {
      if (j != seed && !masked[j]) neighborhood.push_back(j);
    }
    const auto k = std::min(neighborhood.size(), n_struct - structural.size());
    for (auto j : rng.sample(neighborhood, k)) {
      masked[j] = true;
      structural.push_back(j);
      seed_set.erase(j);
    }
    plan.span_sizes.push_back(k);
  }

  plan.struct_shortfall = n_struct - structural.size();
  plan.struct_indices = sorted_indices(std::move(structural));
  const auto n_rand = n_total - plan.struct_indices.size();
  plan.rand_indices = sorted_indices(rng.sample(unmasked_positions(masked), n_rand));
  return plan;
}

MaskPlan gm_span_mask_plan(std::size_t length, const ContactMap& contacts, double rate,
                           double lambda, Rng& rng, SeedPool pool) {
  const MaskPlan paired = bucket_mask_plan(length, contacts, rate, lambda, rng, pool);

  MaskPlan plan;
  plan.length = length;
  plan.rate = rate;
  plan.span_sizes = paired.span_sizes;
  plan.struct_shortfall = paired.struct_shortfall;

  // A uniformly random arrangement of the runs (in random order) among the
  // free cells: choose which of the free + m slots hold a run.
  const auto covered = paired.struct_indices.size();
  const auto runs = paired.span_sizes.size();
  const auto free_cells = length - covered;
  std::vector<std::size_t> order = paired.span_sizes;
  rng.shuffle(order);
  std::vector<std::size_t> slots(free_cells + runs);
  std::iota(slots.begin(), slots.end(), std::size_t{0});
  auto run_slots = sorted_indices(rng.sample(std::move(slots), runs));

  std::vector<bool> masked(length, false);
  std::size_t cursor = 0;
  std::size_t next_run = 0;
  for (std::size_t slot = 0; slot < free_cells + runs; ++slot) {
    if (next_run < runs && run_slots[next_run] == slot) {
      const auto size = order[next_run++];
      plan.spans.push_back({cursor, size});
      for (std::size_t p = cursor; p < cursor + size; ++p) {
        masked[p] = true;
        plan.struct_indices.push_back(p);
      }
      cursor += size;
    } else {
      ++cursor;
    }
  }

  plan.rand_indices =
      sorted_indices(rng.sample(unmasked_positions(masked), paired.rand_indices.size()));
  return plan;
}

MaskPlan sample_plan(Strategy strategy, std::size_t length, const ContactMap* contacts,
                     double rate, const MaskConfig& config, Rng& rng) {
  if (strategy == Strategy::Random) return random_mask_plan(length, rate, rng);
  require(contacts != nullptr, std::string(to_string(strategy)) + " masking needs a contact map");
  if (strategy == Strategy::Bucket) {
    return bucket_mask_plan(length, *contacts, rate, config.lambda, rng, config.seed_pool);
  }
  return gm_span_mask_plan(length, *contacts, rate, config.lambda, rng, config.seed_pool);
}

std::vector<MaskAction> draw_actions(const MaskPlan& plan, const CorruptionPolicy& policy,
                                     Rng& rng) {
  policy.validate();
  std::vector<MaskAction> actions;
  for (auto pos : plan.masked()) {
    const double eta = rng.uniform01();
    if (eta < policy.mask_p) {
      actions.push_back({pos, ActionKind::Mask, '\0'});
    } else if (eta < policy.mask_p + policy.random_p) {
      const char token = policy.vocab[rng.uniform_index(policy.vocab.size())];
      actions.push_back({pos, ActionKind::Random, token});
    } else {
      actions.push_back({pos, ActionKind::Keep, '\0'});
    }
  }
  return actions;
}

Corruption apply_actions(std::string_view tokens, std::size_t plan_length,
                         const std::vector<MaskAction>& actions, char mask_symbol) {
  require(tokens.size() == plan_length,
          "apply_corruption: sequence length " + std::to_string(tokens.size()) +
              " differs from plan length " + std::to_string(plan_length));
  Corruption out;
  out.corrupted = std::string(tokens);
  out.actions = actions;
  out.targets.reserve(actions.size());
  for (const auto& action : actions) {
    require(action.pos < tokens.size(), "mask action position out of range");
    out.targets.push_back({action.pos, tokens[action.pos]});
    if (action.kind == ActionKind::Mask) out.corrupted[action.pos] = mask_symbol;
    if (action.kind == ActionKind::Random) out.corrupted[action.pos] = action.replacement;
  }
  return out;
}

Corruption apply_corruption(std::string_view tokens, const MaskPlan& plan,
                            const CorruptionPolicy& policy, Rng& rng) {
  require(tokens.size() == plan.length,
          "apply_corruption: sequence length " + std::to_string(tokens.size()) +
              " differs from plan length " + std::to_string(plan.length));
  return apply_actions(tokens, plan.length, draw_actions(plan, policy, rng), policy.mask_symbol);
}

}  // namespace bucketmask::masking
