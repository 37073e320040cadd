#pragma once

#include "bucketmask/structures.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bucketmask::msa {

struct MsaRow {
  std::string id;
  std::string gapped;  // uppercase residues, '-' and '.'
};

struct Msa {
  std::vector<MsaRow> rows;
  std::size_t wt_index = 0;

  std::size_t width() const { return rows.empty() ? 0 : rows.front().gapped.size(); }
  const MsaRow& wild_type() const { return rows[wt_index]; }
};

inline bool is_gap(char c) { return c == '-' || c == '.'; }

// FASTA / a2m reader. Lowercase insertions are uppercased and kept as
// residues. The wild type is the first record unless `wt_id` names another.
Msa parse_msa(std::string_view text, std::string_view wt_id = {});

// Residues of a gapped row, dropping '-' and '.'.
std::string ungapped(std::string_view gapped);

// Homolog residues as the projection sees them: '.' takes the wild-type
// character of its column.
std::string homolog_residues(std::string_view wt_gapped, std::string_view homolog_gapped);

struct ProjectionMap {
  std::vector<std::int64_t> s_to_wt;  // per homolog position, WT position or -1
  std::vector<std::int64_t> wt_to_s;  // per WT position, homolog position or -1

  friend bool operator==(const ProjectionMap&, const ProjectionMap&) = default;
};

// Single column sweep pairing residues that are non-gap in both rows. A '.'
// in the homolog is read as the WT character of that column; a '.' in the WT
// row is read as '-'.
ProjectionMap project_alignment(std::string_view wt_gapped, std::string_view homolog_gapped);

struct MsaProjection {
  std::vector<ProjectionMap> maps;  // one per MSA row, in row order
  std::size_t column_visits = 0;
};

MsaProjection project_msa(const Msa& msa);

// Wild-type contacts carried into homolog coordinates. Edges lose any endpoint
// that has no homolog partner; a homolog position keeps its diagonal only if
// its WT partner is resolved.
structures::ContactMap project_contact_graph(const structures::ContactMap& wt_map,
                                             const ProjectionMap& projection);

enum class GapPolicy {
  Exclude,  // '-' and '.' ignored; all-gap columns score 0
  Symbol,   // gaps counted as one extra symbol
};

// Per-column Shannon entropy in nats.
std::vector<double> column_entropy(const Msa& msa, GapPolicy gaps = GapPolicy::Exclude);

}  // namespace bucketmask::msa
