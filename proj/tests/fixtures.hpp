#pragma once

#include "bucketmask/rng.hpp"
#include "bucketmask/splits.hpp"
#include "bucketmask/structures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

namespace fixtures {

// One fixed-column PDB ATOM/HETATM record. `atom` is the 4-column atom name
// field, e.g. " CA ".
inline std::string atom_line(int serial, const char* atom, const char* residue, char chain,
                             int residue_number, double x, double y, double z, char altloc = ' ',
                             char icode = ' ', const char* record = "ATOM  ") {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-6s%5d %-4s%c%3s %c%4d%c   %8.3f%8.3f%8.3f  1.00  0.00           C\n",
                record, serial, atom, altloc, residue, chain, residue_number, icode, x, y, z);
  return buf;
}

inline const char* three_letter(char aa) {
  switch (aa) {
    case 'A': return "ALA"; case 'R': return "ARG"; case 'N': return "ASN"; case 'D': return "ASP";
    case 'C': return "CYS"; case 'Q': return "GLN"; case 'E': return "GLU"; case 'G': return "GLY";
    case 'H': return "HIS"; case 'I': return "ILE"; case 'L': return "LEU"; case 'K': return "LYS";
    case 'M': return "MET"; case 'F': return "PHE"; case 'P': return "PRO"; case 'S': return "SER";
    case 'T': return "THR"; case 'W': return "TRP"; case 'Y': return "TYR"; case 'V': return "VAL";
  }
  return "UNK";
}

// Structure with one CA per residue (CB too for non-glycine, offset by +1 in x).
inline std::string pdb_text(const std::string& residues, const std::vector<bucketmask::structures::Vec3>& ca,
                            char chain = 'A', int first_number = 1) {
  std::string out;
  int serial = 1;
  for (std::size_t i = 0; i < residues.size(); ++i) {
    const auto& p = ca[i];
    const int number = first_number + static_cast<int>(i);
    out += atom_line(serial++, " CA ", three_letter(residues[i]), chain, number, p.x(), p.y(), p.z());
    if (residues[i] != 'G') {
      out += atom_line(serial++, " CB ", three_letter(residues[i]), chain, number, p.x() + 1.0, p.y(), p.z());
    }
  }
  return out + "END\n";
}

inline bucketmask::structures::Structure random_structure(bucketmask::Rng& rng, std::size_t n, double box) {
  bucketmask::structures::Structure s;
  s.chain_id = "A";
  for (std::size_t i = 0; i < n; ++i) {
    bucketmask::structures::Residue r;
    r.author_number = static_cast<int>(i + 1);
    r.amino_acid = 'A';
    r.coord = {box * rng.uniform01(), box * rng.uniform01(), box * rng.uniform01()};
    s.residues.push_back(r);
  }
  return s;
}

inline bucketmask::structures::AlignmentMap identity_alignment(std::size_t n) {
  bucketmask::structures::AlignmentMap a;
  for (std::size_t i = 0; i < n; ++i) a.seq_to_struct.push_back(static_cast<std::ptrdiff_t>(i));
  a.identity = 1.0;
  return a;
}

// Independent O(L^2) contact oracle over an alignment.
inline std::vector<std::vector<bool>> brute_force_contacts(const bucketmask::structures::Structure& s,
                                                           const bucketmask::structures::AlignmentMap& a,
                                                           double tau) {
  const auto n = a.seq_to_struct.size();
  std::vector<std::vector<bool>> c(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    if (a.seq_to_struct[i] < 0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (a.seq_to_struct[j] < 0) continue;
      const auto& p = s.residues[static_cast<std::size_t>(a.seq_to_struct[i])].coord;
      const auto& q = s.residues[static_cast<std::size_t>(a.seq_to_struct[j])].coord;
      const double d = std::sqrt((p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]) +
                                 (p[2] - q[2]) * (p[2] - q[2]));
      c[i][j] = (i == j) || d <= tau;
    }
  }
  return c;
}

// Random contact graph over all-resolved positions with the given pair density.
inline bucketmask::structures::ContactMap random_graph(bucketmask::Rng& rng, std::size_t n, double density) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform01() < density) edges.emplace_back(i, j);
    }
  }
  return bucketmask::structures::ContactMap::from_edges(std::vector<bool>(n, true), 7.0, edges);
}

// Random table of 1-3 substitution variants with unique codes over a random
// wild type of the given length.
inline std::vector<bucketmask::splits::Variant> random_variant_table(bucketmask::Rng& rng, std::size_t length,
                                                                     std::size_t count) {
  using bucketmask::splits::Substitution;
  const std::string aa = "ACDEFGHIKLMNPQRSTVWY";
  std::string wt;
  for (std::size_t i = 0; i < length; ++i) wt.push_back(aa[rng.uniform_index(aa.size())]);
  std::vector<std::size_t> all_positions;
  for (std::size_t i = 0; i < length; ++i) all_positions.push_back(i);
  std::set<std::string> seen;
  std::vector<bucketmask::splits::Variant> out;
  while (out.size() < count) {
    auto positions = rng.sample(all_positions, 1 + rng.uniform_index(3));
    std::sort(positions.begin(), positions.end());
    std::vector<Substitution> subs;
    for (auto p : positions) {
      char mut = wt[p];
      while (mut == wt[p]) mut = aa[rng.uniform_index(aa.size())];
      subs.push_back({wt[p], p, mut});
    }
    const auto code = bucketmask::splits::render_mutation_code(subs);
    if (seen.insert(code).second) out.push_back({subs, rng.uniform01(), code});
  }
  return out;
}

}  // namespace fixtures
