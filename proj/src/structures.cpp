#include "bucketmask/structures.hpp"

#include "bucketmask/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <map>
#include <unordered_map>

namespace bucketmask::structures {

namespace {

constexpr std::array<std::pair<std::string_view, char>, 20> kStandardResidues{{
    {"ALA", 'A'}, {"ARG", 'R'}, {"ASN", 'N'}, {"ASP", 'D'}, {"CYS", 'C'},
    {"GLN", 'Q'}, {"GLU", 'E'}, {"GLY", 'G'}, {"HIS", 'H'}, {"ILE", 'I'},
    {"LEU", 'L'}, {"LYS", 'K'}, {"MET", 'M'}, {"PHE", 'F'}, {"PRO", 'P'},
    {"SER", 'S'}, {"THR", 'T'}, {"TRP", 'W'}, {"TYR", 'Y'}, {"VAL", 'V'},
}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_failure(std::size_t line_no, const std::string& what) {
  fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + what);
}

template <typename T>
T parse_field(std::string_view line, std::size_t begin, std::size_t width,
              std::size_t line_no, const char* name) {
  const auto field = trim(line.substr(begin, width));
  T value{};
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc{} || ptr != last) {
    parse_failure(line_no, std::string("malformed ") + name + " field '" + std::string(field) + "'");
  }
  return value;
}

struct PendingResidue {
  int number = 0;
  char icode = ' ';
  char amino_acid = 'X';
  char altloc = ' ';
  std::optional<Vec3> ca;
  std::optional<Vec3> cb;
};

}  // namespace

char three_to_one(std::string_view residue_name) {
  for (const auto& [three, one] : kStandardResidues) {
    if (three == residue_name) return one;
  }
  return '\0';
}

std::string Structure::one_letter() const {
  std::string out;
  out.reserve(residues.size());
  for (const auto& r : residues) out.push_back(r.amino_acid);
  return out;
}

Structure parse_structure(std::string_view pdb_text, std::string_view chain,
                          RepresentativeAtom atom) {
  require(chain.size() == 1, "chain identifier must be a single character");
  const char chain_id = chain.front();

  std::vector<PendingResidue> pending;
  std::map<std::pair<int, char>, std::size_t> index_of;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= pdb_text.size()) {
    auto end = pdb_text.find('\n', pos);
    if (end == std::string_view::npos) end = pdb_text.size();
    std::string_view line = pdb_text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line.starts_with("ENDMDL")) break;
    if (!line.starts_with("ATOM  ")) continue;
    if (line.size() < 54) parse_failure(line_no, "ATOM record shorter than 54 columns");

    const auto residue_number = parse_field<int>(line, 22, 4, line_no, "residue number");
    const Vec3 xyz(parse_field<double>(line, 30, 8, line_no, "x"),
                   parse_field<double>(line, 38, 8, line_no, "y"),
                   parse_field<double>(line, 46, 8, line_no, "z"));
    if (!xyz.allFinite()) parse_failure(line_no, "non-finite coordinate");

    if (line[21] != chain_id) continue;
    const char aa = three_to_one(trim(line.substr(17, 3)));
    if (aa == '\0') continue;

    const char icode = line[26];
    const auto key = std::make_pair(residue_number, icode);
    auto [it, inserted] = index_of.try_emplace(key, pending.size());
    if (inserted) pending.push_back({residue_number, icode, aa, ' ', {}, {}});
    auto& residue = pending[it->second];

    const char altloc = line[16];
    if (altloc != ' ') {
      if (residue.altloc == ' ') residue.altloc = altloc;
      if (altloc != residue.altloc) continue;
    }
    const auto atom_name = trim(line.substr(12, 4));
    if (atom_name == "CA" && !residue.ca) residue.ca = xyz;
    if (atom_name == "CB" && !residue.cb) residue.cb = xyz;
  }

  if (pending.empty()) {
    fail(ErrorKind::NotFound, "chain '" + std::string(chain) + "' not found");
  }

  Structure out;
  out.chain_id = std::string(chain);
  for (const auto& p : pending) {
    std::optional<Vec3> coord = p.ca;
    if (atom == RepresentativeAtom::CbFallbackCa && p.cb) coord = p.cb;
    if (!coord) continue;
    out.residues.push_back({p.number, p.icode, p.amino_acid, *coord});
  }
  std::stable_sort(out.residues.begin(), out.residues.end(),
                   [](const Residue& a, const Residue& b) { return a.author_number < b.author_number; });
  return out;
}

std::size_t AlignmentMap::resolved_count() const {
  return static_cast<std::size_t>(
      std::count_if(seq_to_struct.begin(), seq_to_struct.end(),
                    [](std::ptrdiff_t v) { return v != kUnresolved; }));
}

double AlignmentMap::coverage() const {
  if (seq_to_struct.empty()) return 0.0;
  return static_cast<double>(resolved_count()) / static_cast<double>(seq_to_struct.size());
}

AlignmentMap align_structure(std::string_view sequence, const Structure& structure,
                             double min_identity, AlignmentScoring scoring) {
  require(!sequence.empty(), "align_structure: empty sequence");
  require(!structure.residues.empty(), "align_structure: empty structure");

  const std::string target = structure.one_letter();
  const std::size_t n = sequence.size();
  const std::size_t m = target.size();
  const std::size_t width = m + 1;
  std::vector<int> h((n + 1) * width);
  auto at = [&](std::size_t i, std::size_t j) -> int& { return h[i * width + j]; };
  auto pair_score = [&](std::size_t i, std::size_t j) {
    return sequence[i - 1] == target[j - 1] ? scoring.match : scoring.mismatch;
  };

  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<int>(i) * scoring.gap;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int>(j) * scoring.gap;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      at(i, j) = std::max({at(i - 1, j - 1) + pair_score(i, j), at(i - 1, j) + scoring.gap,
                           at(i, j - 1) + scoring.gap});
    }
  }

  AlignmentMap out;
  out.seq_to_struct.assign(n, kUnresolved);
  out.score = at(n, m);
  std::size_t matches = 0;
  std::size_t aligned = 0;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + pair_score(i, j)) {
      out.seq_to_struct[i - 1] = static_cast<std::ptrdiff_t>(j - 1);
      ++aligned;
      if (sequence[i - 1] == target[j - 1]) ++matches;
      --i;
      --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + scoring.gap) {
      --i;
    } else {
      --j;
    }
  }

  out.identity = aligned == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(aligned);
  if (out.identity < min_identity) {
    fail(ErrorKind::Mismatch, "sequence '" + std::string(sequence) + "' and structure chain " +
                                  structure.chain_id + " '" + target + "' align at identity " +
                                  std::to_string(out.identity) + " below floor " +
                                  std::to_string(min_identity));
  }
  return out;
}

ContactMap::ContactMap(std::size_t length, double tau)
    : tau_(tau), resolved_(length, false), neighbors_(length) {}

ContactMap ContactMap::from_edges(std::vector<bool> resolved, double tau,
                                  const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  ContactMap out(resolved.size(), tau);
  out.resolved_ = std::move(resolved);
  for (std::size_t i = 0; i < out.length(); ++i) {
    if (out.resolved_[i]) out.neighbors_[i].push_back(i);
  }
  for (auto [a, b] : edges) {
    require(a < out.length() && b < out.length(), "contact edge out of range");
    require(out.resolved_[a] && out.resolved_[b], "contact edge touches an unresolved position");
    if (a == b) continue;
    out.neighbors_[a].push_back(b);
    out.neighbors_[b].push_back(a);
  }
  for (auto& row : out.neighbors_) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return out;
}

std::size_t ContactMap::resolved_count() const {
  return static_cast<std::size_t>(std::count(resolved_.begin(), resolved_.end(), true));
}

bool ContactMap::contains(std::size_t i, std::size_t j) const {
  const auto& row = neighbors_[i];
  return std::binary_search(row.begin(), row.end(), j);
}

std::size_t ContactMap::off_diagonal_degree(std::size_t i) const {
  return neighbors_[i].size() - (resolved_[i] ? 1 : 0);
}

std::vector<std::pair<std::size_t, std::size_t>> ContactMap::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < length(); ++i) {
    for (auto j : neighbors_[i]) {
      if (j > i) out.emplace_back(i, j);
    }
  }
  return out;
}

std::size_t ContactMap::edge_count() const {
  std::size_t total = 0;
  for (std::size_t i = 0; i < length(); ++i) total += off_diagonal_degree(i);
  return total / 2;
}

namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    auto h = static_cast<std::uint64_t>(k.x) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 0xc2b2ae3d27d4eb4fULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667b19e3779f9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

ContactMap build_contact_map(const Structure& structure, const AlignmentMap& alignment,
                             double tau) {
  require(tau > 0.0, "build_contact_map: tau must be positive");
  const std::size_t length = alignment.seq_to_struct.size();

  std::vector<bool> resolved(length, false);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < length; ++i) {
    const auto s = alignment.seq_to_struct[i];
    if (s == kUnresolved) continue;
    require(s >= 0 && static_cast<std::size_t>(s) < structure.residues.size(),
            "alignment refers past the end of the structure");
    resolved[i] = true;
    members.push_back(i);
  }
  auto coord = [&](std::size_t i) -> const Vec3& {
    return structure.residues[static_cast<std::size_t>(alignment.seq_to_struct[i])].coord;
  };

  // Cells are padded so that any pair within tau lands in adjacent cells even
  // after rounding in the division.
  const double cell = tau * (1.0 + 1e-9);
  auto key_of = [&](const Vec3& p) {
    return CellKey{static_cast<std::int64_t>(std::floor(p.x() / cell)),
                   static_cast<std::int64_t>(std::floor(p.y() / cell)),
                   static_cast<std::int64_t>(std::floor(p.z() / cell))};
  };
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> grid;
  for (auto i : members) grid[key_of(coord(i))].push_back(i);

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (auto i : members) {
    const auto k = key_of(coord(i));
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto found = grid.find({k.x + dx, k.y + dy, k.z + dz});
          if (found == grid.end()) continue;
          for (auto j : found->second) {
            if (j > i && within_threshold(coord(i), coord(j), tau)) edges.emplace_back(i, j);
          }
        }
      }
    }
  }
  return ContactMap::from_edges(std::move(resolved), tau, edges);
}

}  // namespace bucketmask::structures
