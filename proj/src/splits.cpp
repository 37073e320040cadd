#include "bucketmask/splits.hpp"

#include "bucketmask/error.hpp"
#include "bucketmask/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <charconv>
#include <set>
#include <unordered_set>

namespace bucketmask::splits {

namespace {

bool is_residue_letter(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  bool quoted = false;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i < line.size() && line[i] == '"') quoted = !quoted;
    if (i == line.size() || (line[i] == ',' && !quoted)) {
      auto field = line.substr(start, i - start);
      if (field.size() >= 2 && field.front() == '"' && field.back() == '"') {
        field = field.substr(1, field.size() - 2);
      }
      fields.push_back(field);
      start = i + 1;
    }
  }
  return fields;
}

std::vector<std::string> ids_of(const std::vector<Variant>& variants,
                                const std::vector<std::size_t>& which) {
  std::vector<std::string> out;
  out.reserve(which.size());
  for (auto i : which) out.push_back(variants[i].raw_id);
  return out;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  return order;
}

// Variants go to train/test when every key lies in that group, else excluded.
template <typename Key, typename KeysOf>
SplitManifest partition_by_keys(SplitKind kind, const std::vector<Variant>& variants,
                                std::uint64_t seed, KeysOf keys_of) {
  std::set<Key> universe;
  for (const auto& v : variants) {
    for (const auto& k : keys_of(v)) universe.insert(k);
  }
  std::vector<Key> ordered(universe.begin(), universe.end());
  require(ordered.size() >= 2, std::string(to_string(kind)) +
                                   " split needs at least two distinct partition keys, found " +
                                   std::to_string(ordered.size()));
  Rng rng(seed);
  rng.shuffle(ordered);
  const auto n_train = ordered.size() * 4 / 5;
  const std::set<Key> train_keys(ordered.begin(), ordered.begin() + static_cast<std::ptrdiff_t>(n_train));

  SplitManifest out;
  out.kind = kind;
  out.seed = seed;
  for (const auto& v : variants) {
    std::size_t in_train = 0;
    const auto keys = keys_of(v);
    for (const auto& k : keys) in_train += train_keys.count(k);
    if (in_train == keys.size()) {
      out.train.push_back(v.raw_id);
    } else if (in_train == 0) {
      out.test.push_back(v.raw_id);
    } else {
      out.excluded.push_back(v.raw_id);
    }
  }
  return out;
}

}  // namespace

std::vector<Substitution> parse_mutation_code(std::string_view code) {
  std::vector<Substitution> out;
  std::size_t start = 0;
  while (start <= code.size()) {
    auto end = code.find(':', start);
    if (end == std::string_view::npos) end = code.size();
    const auto token = code.substr(start, end - start);
    start = end + 1;

    if (token.size() < 3 || !is_residue_letter(token.front()) || !is_residue_letter(token.back())) {
      fail(ErrorKind::Parse, "malformed substitution '" + std::string(token) + "'");
    }
    const auto digits = token.substr(1, token.size() - 2);
    std::size_t one_based = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), one_based);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || one_based == 0) {
      fail(ErrorKind::Parse, "malformed position in '" + std::string(token) + "'");
    }
    if (token.front() == token.back()) {
      fail(ErrorKind::Parse, "self-substitution '" + std::string(token) + "'");
    }
    out.push_back({token.front(), one_based - 1, token.back()});
  }
  std::sort(out.begin(), out.end(),
            [](const Substitution& a, const Substitution& b) { return a.position < b.position; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].position == out[i - 1].position) {
      fail(ErrorKind::Parse, "position " + std::to_string(out[i].position + 1) +
                                 " substituted twice in '" + std::string(code) + "'");
    }
  }
  return out;
}

std::string render_mutation_code(const std::vector<Substitution>& substitutions) {
  std::string out;
  for (const auto& s : substitutions) {
    if (!out.empty()) out.push_back(':');
    out.push_back(s.wt);
    out += std::to_string(s.position + 1);
    out.push_back(s.mut);
  }
  return out;
}

DmsTable parse_dms(std::string_view csv, std::optional<std::string_view> reference) {
  DmsTable table;
  std::unordered_set<std::string> seen;
  std::optional<std::size_t> mutant_col;
  std::optional<std::size_t> score_col;
  std::size_t row_no = 0;
  std::size_t pos = 0;
  bool header_done = false;
  while (pos < csv.size()) {
    auto end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(pos, end - pos);
    pos = end + 1;
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    const auto fields = split_csv_line(line);
    if (!header_done) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "mutant") mutant_col = i;
        if (fields[i] == "DMS_score") score_col = i;
      }
      if (!mutant_col || !score_col) {
        fail(ErrorKind::Format, "DMS header must contain 'mutant' and 'DMS_score' columns");
      }
      header_done = true;
      continue;
    }

    const auto where = "row " + std::to_string(row_no) + ": ";
    if (fields.size() <= std::max(*mutant_col, *score_col)) {
      fail(ErrorKind::Parse, where + "too few columns");
    }
    Variant v;
    v.raw_id = std::string(fields[*mutant_col]);
    try {
      v.substitutions = parse_mutation_code(v.raw_id);
    } catch (const Error& e) {
      fail(ErrorKind::Parse, where + e.what());
    }
    const auto score_text = fields[*score_col];
    const auto [ptr, ec] = std::from_chars(score_text.data(), score_text.data() + score_text.size(), v.score);
    if (score_text.empty() || ec != std::errc{} || ptr != score_text.data() + score_text.size() ||
        !std::isfinite(v.score)) {
      fail(ErrorKind::Parse, where + "malformed score '" + std::string(score_text) + "'");
    }
    if (reference) {
      for (const auto& s : v.substitutions) {
        if (s.position >= reference->size() || (*reference)[s.position] != s.wt) {
          fail(ErrorKind::Consistency,
               where + "'" + v.raw_id + "' disagrees with the reference sequence at position " +
                   std::to_string(s.position + 1));
        }
      }
    }
    if (!seen.insert(v.raw_id).second) {
      table.warnings.push_back(where + "duplicate mutant '" + v.raw_id + "' ignored");
      continue;
    }
    table.variants.push_back(std::move(v));
  }
  if (!header_done) fail(ErrorKind::Format, "DMS file is empty");
  return table;
}

std::string_view to_string(SplitKind kind) {
  switch (kind) {
    case SplitKind::ModelSelection: return "model_selection";
    case SplitKind::Regime: return "regime";
    case SplitKind::Position: return "position";
    case SplitKind::Mutation: return "mutation";
    case SplitKind::Neighborhood: return "neighborhood";
  }
  return "model_selection";
}

std::optional<SplitKind> parse_split_kind(std::string_view name) {
  if (name == "model_selection" || name == "model-selection") return SplitKind::ModelSelection;
  if (name == "regime") return SplitKind::Regime;
  if (name == "position") return SplitKind::Position;
  if (name == "mutation") return SplitKind::Mutation;
  if (name == "neighborhood") return SplitKind::Neighborhood;
  return std::nullopt;
}

SplitManifest model_selection_split(const std::vector<Variant>& variants, std::uint64_t seed) {
  require(variants.size() >= 10, "model selection split needs at least 10 variants");
  const auto order = shuffled_indices(variants.size(), seed);
  const auto n_select = variants.size() / 10;
  SplitManifest out;
  out.kind = SplitKind::ModelSelection;
  out.seed = seed;
  out.train = ids_of(variants, {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_select)});
  out.test = ids_of(variants, {order.begin() + static_cast<std::ptrdiff_t>(n_select), order.end()});
  return out;
}

SplitManifest regime_split(const std::vector<Variant>& variants) {
  SplitManifest out;
  out.kind = SplitKind::Regime;
  for (const auto& v : variants) {
    (v.substitutions.size() == 1 ? out.train : out.test).push_back(v.raw_id);
  }
  if (out.test.empty()) out.warnings.push_back("no higher-order variants; regime test set is empty");
  return out;
}

SplitManifest position_split(const std::vector<Variant>& variants, std::uint64_t seed) {
  return partition_by_keys<std::size_t>(SplitKind::Position, variants, seed, [](const Variant& v) {
    std::vector<std::size_t> keys;
    for (const auto& s : v.substitutions) keys.push_back(s.position);
    return keys;
  });
}

SplitManifest mutation_split(const std::vector<Variant>& variants, std::uint64_t seed) {
  using Key = std::tuple<std::size_t, char, char>;
  return partition_by_keys<Key>(SplitKind::Mutation, variants, seed, [](const Variant& v) {
    std::vector<Key> keys;
    for (const auto& s : v.substitutions) keys.emplace_back(s.position, s.wt, s.mut);
    return keys;
  });
}

SplitManifest neighborhood_split(const std::vector<Variant>& variants, std::uint64_t seed) {
  require(variants.size() >= 25, "neighborhood split needs at least 25 variants");
  const auto order = shuffled_indices(variants.size(), seed);
  const auto n_fit = variants.size() * 4 / 5;
  const auto n_train = n_fit * 4 / 5;
  auto at = [&](std::size_t i) { return order.begin() + static_cast<std::ptrdiff_t>(i); };
  SplitManifest out;
  out.kind = SplitKind::Neighborhood;
  out.seed = seed;
  out.train = ids_of(variants, {order.begin(), at(n_train)});
  out.val = ids_of(variants, {at(n_train), at(n_fit)});
  out.test = ids_of(variants, {at(n_fit), order.end()});
  return out;
}

SplitManifest make_split(SplitKind kind, const std::vector<Variant>& variants, std::uint64_t seed) {
  switch (kind) {
    case SplitKind::ModelSelection: return model_selection_split(variants, seed);
    case SplitKind::Regime: return regime_split(variants);
    case SplitKind::Position: return position_split(variants, seed);
    case SplitKind::Mutation: return mutation_split(variants, seed);
    case SplitKind::Neighborhood: return neighborhood_split(variants, seed);
  }
  return regime_split(variants);
}

std::string DistanceBin::label() const {
  if (!max) return std::to_string(min) + "+";
  return std::to_string(min) + "-" + std::to_string(*max);
}

std::vector<DistanceBin> default_distance_bins() {
  return {{1, 6}, {7, 24}, {25, std::nullopt}};
}

SecondOrderStrata stratify_second_order(const std::vector<Variant>& variants,
                                        const structures::ContactMap& contacts,
                                        const std::vector<DistanceBin>& bins) {
  SecondOrderStrata out;
  for (const auto& v : variants) {
    if (v.substitutions.size() != 2) continue;
    const auto a = v.substitutions[0].position;
    const auto b = v.substitutions[1].position;
    require(a < contacts.length() && b < contacts.length(),
            "variant '" + v.raw_id + "' lies outside the contact map");
    const auto distance = b > a ? b - a : a - b;
    for (const auto& bin : bins) {
      if (bin.contains(distance)) {
        out.by_sequence_distance[bin.label()].push_back(v.raw_id);
        break;
      }
    }
    const bool contact = contacts.contains(a, b);
    out.by_contact[contact ? "contact" : "no_contact"].push_back(v.raw_id);
    if (contact && distance > kLongRangeSeparation) out.long_range_contacts.push_back(v.raw_id);
  }
  return out;
}

}  // namespace bucketmask::splits
