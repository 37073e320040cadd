#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bucketmask::structures {

using Vec3 = Eigen::Vector3d;

struct Residue {
  int author_number = 0;
  char insertion_code = ' ';
  char amino_acid = 'X';
  Vec3 coord = Vec3::Zero();
};

struct Structure {
  std::string chain_id;
  std::vector<Residue> residues;

  std::string one_letter() const;
};

// Which atom stands in for a residue's position.
enum class RepresentativeAtom {
  CbFallbackCa,  // beta-carbon, alpha-carbon when absent (glycine)
  Ca,
};

// Parses ATOM records of one chain from PDB text. Only the first model is
// read; HETATM and non-standard residues are skipped and the first altloc of
// each atom wins.
Structure parse_structure(std::string_view pdb_text, std::string_view chain,
                          RepresentativeAtom atom = RepresentativeAtom::CbFallbackCa);

inline constexpr std::ptrdiff_t kUnresolved = -1;

struct AlignmentMap {
  // Per sequence position, an index into Structure::residues or kUnresolved.
  std::vector<std::ptrdiff_t> seq_to_struct;
  double identity = 0.0;  // matches over aligned columns
  int score = 0;

  std::size_t resolved_count() const;
  double coverage() const;
};

struct AlignmentScoring {
  int match = 1;
  int mismatch = -1;
  int gap = -2;
};

// Global alignment of the full-length sequence against the structure's
// residue string. Ties prefer the diagonal move, then a sequence-side gap,
// then a structure-side gap. Throws Mismatch when identity < min_identity.
AlignmentMap align_structure(std::string_view sequence, const Structure& structure,
                             double min_identity = 0.5, AlignmentScoring scoring = {});

// Symmetric residue contact relation over the full sequence, stored as sorted
// neighbor lists. Resolved positions carry themselves as a neighbor; unresolved
// positions have empty rows.
class ContactMap {
 public:
  ContactMap() = default;
  ContactMap(std::size_t length, double tau);

  // Builds from off-diagonal edges (either orientation accepted) and the
  // resolved mask. Edges touching unresolved positions are rejected.
  static ContactMap from_edges(std::vector<bool> resolved, double tau,
                               const std::vector<std::pair<std::size_t, std::size_t>>& edges);

  std::size_t length() const { return neighbors_.size(); }
  double tau() const { return tau_; }

  bool resolved(std::size_t i) const { return resolved_[i]; }
  const std::vector<bool>& resolved_mask() const { return resolved_; }
  std::size_t resolved_count() const;

  bool contains(std::size_t i, std::size_t j) const;
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_[i]; }

  // Number of neighbors other than i itself.
  std::size_t off_diagonal_degree(std::size_t i) const;

  // Edges (i, j) with i < j in lexicographic order.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
  std::size_t edge_count() const;

  friend bool operator==(const ContactMap&, const ContactMap&) = default;

 private:
  double tau_ = 0.0;
  std::vector<bool> resolved_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

// d(i, j) <= tau on the representative atoms, plus the diagonal for resolved
// positions. Uses a uniform cell grid, so cost is near-linear in L.
ContactMap build_contact_map(const Structure& structure, const AlignmentMap& alignment,
                             double tau = 7.0);

// The single distance predicate used for contacts.
inline bool within_threshold(const Vec3& a, const Vec3& b, double tau) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return std::sqrt(dx * dx + dy * dy + dz * dz) <= tau;
}

char three_to_one(std::string_view residue_name);

}  // namespace bucketmask::structures
