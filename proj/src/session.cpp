#include "bucketmask/session.hpp"

#include "bucketmask/error.hpp"

namespace bucketmask {

std::string_view version() { return BUCKETMASK_VERSION; }

MaskSession::MaskSession(std::vector<Entry> entries, masking::MaskConfig config,
                         std::uint64_t master_seed)
    : entries_(std::move(entries)), config_(std::move(config)), master_seed_(master_seed) {
  config_.validate();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    require(!e.residues.empty(), "sequence '" + e.id + "' is empty");
    require(!e.contacts || e.contacts->length() == e.residues.size(),
            "contact graph for '" + e.id + "' does not match its length");
    require(ordinal_of_.emplace(e.id, i).second, "duplicate sequence id '" + e.id + "'");
  }
}

MaskSession MaskSession::from_msa(const msa::Msa& alignment,
                                  const std::optional<structures::ContactMap>& wt_contacts,
                                  const std::optional<std::vector<io::ProjectionRecord>>& projections,
                                  masking::MaskConfig config, std::uint64_t master_seed) {
  const auto& wt = alignment.wild_type().gapped;
  if (projections) {
    require(projections->size() == alignment.rows.size(),
            "projection file has " + std::to_string(projections->size()) + " records for " +
                std::to_string(alignment.rows.size()) + " alignment rows");
  }
  std::vector<Entry> entries;
  entries.reserve(alignment.rows.size());
  for (std::size_t i = 0; i < alignment.rows.size(); ++i) {
    const auto& row = alignment.rows[i];
    Entry e{row.id, msa::homolog_residues(wt, row.gapped), std::nullopt};
    if (projections && wt_contacts) {
      const auto& rec = (*projections)[i];
      require(rec.id == row.id, "projection record " + std::to_string(i) + " is '" + rec.id +
                                    "' but alignment row is '" + row.id + "'");
      require(rec.map.s_to_wt.size() == e.residues.size(),
              "projection for '" + row.id + "' does not match its sequence length");
      e.contacts = msa::project_contact_graph(*wt_contacts, rec.map);
    }
    entries.push_back(std::move(e));
  }
  return MaskSession(std::move(entries), std::move(config), master_seed);
}

MaskSession MaskSession::open(const std::filesystem::path& msa_file,
                              const std::optional<std::filesystem::path>& contact_file,
                              const std::optional<std::filesystem::path>& projections_file,
                              masking::MaskConfig config, std::uint64_t master_seed) {
  const auto alignment = msa::parse_msa(io::read_file(msa_file));
  std::optional<structures::ContactMap> contacts;
  if (contact_file) contacts = io::load_contact_map(*contact_file).map;
  std::optional<std::vector<io::ProjectionRecord>> projections;
  if (projections_file) projections = io::parse_projections(io::read_file(*projections_file));
  return from_msa(alignment, contacts, projections, std::move(config), master_seed);
}

void MaskSession::check_open() const {
  require(is_open(), "mask session is closed");
}

double MaskSession::epoch_rate(std::uint64_t epoch) const {
  check_open();
  Rng rng(stream_seed(master_seed_, epoch, kRateStream));
  return masking::sample_rate(rng, config_);
}

MaskedSequence MaskSession::sample_ordinal(std::size_t ordinal, std::uint64_t epoch,
                                           masking::Strategy strategy) const {
  check_open();
  require(ordinal < entries_.size(), "sequence ordinal out of range");
  const auto& e = entries_[ordinal];
  if (strategy != masking::Strategy::Random && !e.contacts) {
    fail(ErrorKind::Contract, std::string(masking::to_string(strategy)) +
                                  " masking of '" + e.id + "' needs projected contacts");
  }
  Rng rng(stream_seed(master_seed_, epoch, ordinal));
  MaskedSequence out;
  out.id = e.id;
  out.epoch = epoch;
  out.strategy = strategy;
  out.plan = masking::sample_plan(strategy, e.residues.size(), e.contacts ? &*e.contacts : nullptr,
                                  epoch_rate(epoch), config_, rng);
  out.corruption = masking::apply_corruption(e.residues, out.plan, config_.corruption, rng);
  return out;
}

MaskedSequence MaskSession::sample_plan(std::string_view id, std::uint64_t epoch,
                                        masking::Strategy strategy) const {
  check_open();
  const auto it = ordinal_of_.find(std::string(id));
  if (it == ordinal_of_.end()) fail(ErrorKind::NotFound, "unknown sequence id '" + std::string(id) + "'");
  return sample_ordinal(it->second, epoch, strategy);
}

std::vector<MaskedSequence> MaskSession::collate(const std::vector<std::string>& ids,
                                                 std::uint64_t epoch,
                                                 masking::Strategy strategy) const {
  std::vector<MaskedSequence> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(sample_plan(id, epoch, strategy));
  return out;
}

}  // namespace bucketmask
