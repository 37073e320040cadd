#pragma once

#include "bucketmask/io.hpp"
#include "bucketmask/masking.hpp"
#include "bucketmask/msa.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bucketmask {

std::string_view version();

// Ordinal reserved for the per-epoch rate stream.
inline constexpr std::uint64_t kRateStream = ~std::uint64_t{0};

struct MaskedSequence {
  std::string id;
  std::uint64_t epoch = 0;
  masking::Strategy strategy = masking::Strategy::Random;
  masking::MaskPlan plan;
  masking::Corruption corruption;
};

// Immutable set of sequences (with projected contact graphs when available)
// from which mask plans are drawn. Every draw is a pure function of
// (master_seed, epoch, sequence ordinal), so concurrent queries need no lock.
class MaskSession {
 public:
  struct Entry {
    std::string id;
    std::string residues;
    std::optional<structures::ContactMap> contacts;
  };

  MaskSession(std::vector<Entry> entries, masking::MaskConfig config, std::uint64_t master_seed);

  // Sequences from the MSA; contact graphs projected from `wt_contacts`
  // through `projections` when both are given. Projection records must match
  // the MSA rows one-to-one, in order.
  static MaskSession from_msa(const msa::Msa& alignment,
                              const std::optional<structures::ContactMap>& wt_contacts,
                              const std::optional<std::vector<io::ProjectionRecord>>& projections,
                              masking::MaskConfig config, std::uint64_t master_seed);

  static MaskSession open(const std::filesystem::path& msa_file,
                          const std::optional<std::filesystem::path>& contact_file,
                          const std::optional<std::filesystem::path>& projections_file,
                          masking::MaskConfig config, std::uint64_t master_seed);

  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  const masking::MaskConfig& config() const { return config_; }
  std::uint64_t master_seed() const { return master_seed_; }

  // One rate per epoch, shared by all sequences.
  double epoch_rate(std::uint64_t epoch) const;

  MaskedSequence sample_plan(std::string_view id, std::uint64_t epoch, masking::Strategy strategy) const;
  MaskedSequence sample_ordinal(std::size_t ordinal, std::uint64_t epoch, masking::Strategy strategy) const;

  std::vector<MaskedSequence> collate(const std::vector<std::string>& ids, std::uint64_t epoch,
                                      masking::Strategy strategy) const;

  // Later queries throw; closing twice is harmless.
  void close() noexcept { open_.store(false); }
  bool is_open() const noexcept { return open_.load(); }

 private:
  void check_open() const;

  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> ordinal_of_;
  masking::MaskConfig config_;
  std::uint64_t master_seed_ = 0;
  std::atomic<bool> open_{true};
};

}  // namespace bucketmask
