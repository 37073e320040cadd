#include "bucketmask/msa.hpp"

#include "bucketmask/error.hpp"

#include <array>
#include <cctype>
#include <cmath>

namespace bucketmask::msa {

Msa parse_msa(std::string_view text, std::string_view wt_id) {
  Msa msa;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    if (line.front() == '>') {
      auto header = line.substr(1);
      const auto space = header.find_first_of(" \t");
      msa.rows.push_back({std::string(header.substr(0, space)), {}});
      continue;
    }
    if (msa.rows.empty()) {
      fail(ErrorKind::Format, "line " + std::to_string(line_no) + ": sequence before first header");
    }
    for (char c : line) {
      if (std::isalpha(static_cast<unsigned char>(c))) {
        msa.rows.back().gapped.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
      } else if (c == '-' || c == '.') {
        msa.rows.back().gapped.push_back(c);
      } else if (c == '*' || c == ' ' || c == '\t') {
        continue;
      } else {
        fail(ErrorKind::Format, "line " + std::to_string(line_no) + ": unexpected character '" +
                                    std::string(1, c) + "'");
      }
    }
  }

  if (msa.rows.empty()) fail(ErrorKind::Format, "alignment has no records");
  const auto width = msa.rows.front().gapped.size();
  for (const auto& row : msa.rows) {
    if (row.gapped.size() != width) {
      fail(ErrorKind::Format, "row '" + row.id + "' has width " + std::to_string(row.gapped.size()) +
                                  ", expected " + std::to_string(width));
    }
  }
  if (!wt_id.empty()) {
    bool found = false;
    for (std::size_t i = 0; i < msa.rows.size(); ++i) {
      if (msa.rows[i].id == wt_id) {
        msa.wt_index = i;
        found = true;
        break;
      }
    }
    if (!found) fail(ErrorKind::NotFound, "wild-type record '" + std::string(wt_id) + "' not found");
  }
  return msa;
}

std::string ungapped(std::string_view gapped) {
  std::string out;
  for (char c : gapped) {
    if (!is_gap(c)) out.push_back(c);
  }
  return out;
}

std::string homolog_residues(std::string_view wt_gapped, std::string_view homolog_gapped) {
  require(wt_gapped.size() == homolog_gapped.size(), "homolog_residues: width mismatch");
  std::string out;
  for (std::size_t c = 0; c < wt_gapped.size(); ++c) {
    const char w = wt_gapped[c] == '.' ? '-' : wt_gapped[c];
    const char s = homolog_gapped[c] == '.' ? w : homolog_gapped[c];
    if (s != '-') out.push_back(s);
  }
  return out;
}

ProjectionMap project_alignment(std::string_view wt_gapped, std::string_view homolog_gapped) {
  require(wt_gapped.size() == homolog_gapped.size(),
          "project_alignment: widths differ (" + std::to_string(wt_gapped.size()) + " vs " +
              std::to_string(homolog_gapped.size()) + ")");

  std::int64_t p_wt = 0;
  std::int64_t p_s = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  for (std::size_t c = 0; c < wt_gapped.size(); ++c) {
    const char w = wt_gapped[c] == '.' ? '-' : wt_gapped[c];
    const char s = homolog_gapped[c] == '.' ? w : homolog_gapped[c];
    if (w != '-' && s != '-') pairs.emplace_back(p_s, p_wt);
    if (w != '-') ++p_wt;
    if (s != '-') ++p_s;
  }

  ProjectionMap out;
  out.s_to_wt.assign(static_cast<std::size_t>(p_s), -1);
  out.wt_to_s.assign(static_cast<std::size_t>(p_wt), -1);
  for (auto [u, v] : pairs) {
    out.s_to_wt[static_cast<std::size_t>(u)] = v;
    out.wt_to_s[static_cast<std::size_t>(v)] = u;
  }
  return out;
}

MsaProjection project_msa(const Msa& msa) {
  MsaProjection out;
  const auto& wt = msa.wild_type().gapped;
  out.maps.reserve(msa.rows.size());
  for (const auto& row : msa.rows) {
    out.maps.push_back(project_alignment(wt, row.gapped));
    out.column_visits += row.gapped.size();
  }
  return out;
}

structures::ContactMap project_contact_graph(const structures::ContactMap& wt_map,
                                             const ProjectionMap& projection) {
  require(wt_map.length() == projection.wt_to_s.size(),
          "project_contact_graph: contact map length " + std::to_string(wt_map.length()) +
              " does not match wild-type length " + std::to_string(projection.wt_to_s.size()));

  const auto length = projection.s_to_wt.size();
  std::vector<bool> resolved(length, false);
  for (std::size_t u = 0; u < length; ++u) {
    const auto v = projection.s_to_wt[u];
    if (v >= 0) {
      require(static_cast<std::size_t>(v) < wt_map.length(), "projection refers past wild-type end");
      resolved[u] = wt_map.resolved(static_cast<std::size_t>(v));
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (auto [a, b] : wt_map.edges()) {
    const auto i = projection.wt_to_s[a];
    const auto j = projection.wt_to_s[b];
    if (i < 0 || j < 0) continue;
    edges.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  return structures::ContactMap::from_edges(std::move(resolved), wt_map.tau(), edges);
}

std::vector<double> column_entropy(const Msa& msa, GapPolicy gaps) {
  require(!msa.rows.empty(), "column_entropy: empty alignment");
  std::vector<double> out(msa.width(), 0.0);
  for (std::size_t c = 0; c < msa.width(); ++c) {
    std::array<std::size_t, 256> counts{};
    std::size_t total = 0;
    for (const auto& row : msa.rows) {
      char ch = row.gapped[c];
      if (is_gap(ch)) {
        if (gaps == GapPolicy::Exclude) continue;
        ch = '-';
      }
      ++counts[static_cast<unsigned char>(ch)];
      ++total;
    }
    if (total == 0) continue;
    double h = 0.0;
    for (auto n : counts) {
      if (n == 0) continue;
      const double p = static_cast<double>(n) / static_cast<double>(total);
      h -= p * std::log(p);
    }
    out[c] = h;
  }
  return out;
}

}  // namespace bucketmask::msa
