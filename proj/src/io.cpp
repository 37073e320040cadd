#include "bucketmask/io.hpp"

#include "bucketmask/error.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace bucketmask::io {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::NotFound, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
  }
  fs::rename(tmp, path);
}

std::string dump_line(const json& doc) { return doc.dump(); }

namespace {

template <typename T>
T field(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) {
    fail(ErrorKind::Format, std::string("missing field '") + key + "'");
  }
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("field '") + key + "': " + e.what());
  }
}

json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, what + ": " + e.what());
  }
}

}  // namespace

json contact_map_to_json(const std::string& protein, const structures::ContactMap& map) {
  json edges = json::array();
  for (auto [i, j] : map.edges()) edges.push_back({i, j});
  json resolved = json::array();
  for (std::size_t i = 0; i < map.length(); ++i) resolved.push_back(static_cast<bool>(map.resolved(i)));
  return {{"protein", protein},
          {"length", map.length()},
          {"tau", map.tau()},
          {"resolved", resolved},
          {"edges", edges}};
}

ContactFile contact_map_from_json(const json& doc) {
  ContactFile out;
  out.protein = field<std::string>(doc, "protein");
  const auto length = field<std::size_t>(doc, "length");
  const auto tau = field<double>(doc, "tau");
  auto resolved = field<std::vector<bool>>(doc, "resolved");
  const auto edges = field<std::vector<std::pair<std::size_t, std::size_t>>>(doc, "edges");
  if (resolved.size() != length) fail(ErrorKind::Format, "contact map 'resolved' length differs from 'length'");
  if (!(tau > 0.0)) fail(ErrorKind::Format, "contact map 'tau' must be positive");
  for (auto [i, j] : edges) {
    if (i >= j || j >= length) fail(ErrorKind::Format, "contact map edges must satisfy i < j < length");
  }
  try {
    out.map = structures::ContactMap::from_edges(std::move(resolved), tau, edges);
  } catch (const Error& e) {
    fail(ErrorKind::Format, std::string("contact map: ") + e.what());
  }
  return out;
}

ContactFile load_contact_map(const fs::path& path) {
  return contact_map_from_json(parse_json(read_file(path), path.string()));
}

json projection_to_json(const ProjectionRecord& record) {
  return {{"id", record.id}, {"s_to_wt", record.map.s_to_wt}, {"wt_to_s", record.map.wt_to_s}};
}

std::vector<ProjectionRecord> parse_projections(std::string_view jsonl) {
  std::vector<ProjectionRecord> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < jsonl.size()) {
    auto end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    const auto line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const auto doc = parse_json(line, "projection line " + std::to_string(line_no));
    ProjectionRecord r;
    r.id = field<std::string>(doc, "id");
    r.map.s_to_wt = field<std::vector<std::int64_t>>(doc, "s_to_wt");
    r.map.wt_to_s = field<std::vector<std::int64_t>>(doc, "wt_to_s");
    for (std::size_t u = 0; u < r.map.s_to_wt.size(); ++u) {
      const auto v = r.map.s_to_wt[u];
      if (v < -1 || v >= static_cast<std::int64_t>(r.map.wt_to_s.size()) ||
          (v >= 0 && r.map.wt_to_s[static_cast<std::size_t>(v)] != static_cast<std::int64_t>(u))) {
        fail(ErrorKind::Format, "projection line " + std::to_string(line_no) + " ('" + r.id +
                                    "') is not a consistent bidirectional map");
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

json mask_record_to_json(const std::string& id, std::uint64_t epoch, masking::Strategy strategy,
                         const masking::MaskPlan& plan, const masking::Corruption& corruption) {
  json actions = json::array();
  for (const auto& a : corruption.actions) {
    json replacement = nullptr;
    if (a.kind == masking::ActionKind::Random) replacement = std::string(1, a.replacement);
    actions.push_back({{"pos", a.pos}, {"action", masking::to_string(a.kind)}, {"replacement", replacement}});
  }
  json targets = json::array();
  for (const auto& t : corruption.targets) {
    targets.push_back({{"pos", t.pos}, {"token", std::string(1, t.token)}});
  }
  return {{"id", id},
          {"epoch", epoch},
          {"length", plan.length},
          {"rate", plan.rate},
          {"strategy", masking::to_string(strategy)},
          {"struct_indices", plan.struct_indices},
          {"rand_indices", plan.rand_indices},
          {"span_sizes", plan.span_sizes},
          {"actions", actions},
          {"targets", targets}};
}

json manifest_to_json(const splits::SplitManifest& manifest) {
  json doc = {{"name", splits::to_string(manifest.kind)},
              {"seed", manifest.seed ? json(*manifest.seed) : json(nullptr)},
              {"train", manifest.train},
              {"val", manifest.val},
              {"test", manifest.test},
              {"excluded", manifest.excluded}};
  if (!manifest.warnings.empty()) doc["warnings"] = manifest.warnings;
  return doc;
}

splits::SplitManifest manifest_from_json(const json& doc) {
  splits::SplitManifest m;
  const auto name = field<std::string>(doc, "name");
  const auto kind = splits::parse_split_kind(name);
  if (!kind) fail(ErrorKind::Format, "unknown split name '" + name + "'");
  m.kind = *kind;
  if (doc.contains("seed") && !doc.at("seed").is_null()) m.seed = field<std::uint64_t>(doc, "seed");
  m.train = field<std::vector<std::string>>(doc, "train");
  m.val = field<std::vector<std::string>>(doc, "val");
  m.test = field<std::vector<std::string>>(doc, "test");
  m.excluded = field<std::vector<std::string>>(doc, "excluded");
  if (doc.contains("warnings")) m.warnings = field<std::vector<std::string>>(doc, "warnings");
  return m;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(std::string_view text, double& value) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return !text.empty() && ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

probes::EmbeddingTable parse_embedding_csv(std::string_view csv) {
  std::vector<std::string> ids;
  std::vector<double> scores;
  std::vector<double> values;
  std::size_t dim = 0;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool first = true;
  while (pos < csv.size()) {
    auto end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    double score = 0.0;
    if (first) {
      first = false;
      if (fields.size() < 3) fail(ErrorKind::Format, "embedding CSV needs id, score and at least one dimension");
      dim = fields.size() - 2;
      if (!parse_double(fields[1], score)) continue;  // header row
    }
    const auto where = "embedding CSV line " + std::to_string(line_no) + ": ";
    if (fields.size() != dim + 2) fail(ErrorKind::Format, where + "expected " + std::to_string(dim + 2) + " columns");
    if (!parse_double(fields[1], score)) fail(ErrorKind::Parse, where + "malformed score");
    ids.emplace_back(fields[0]);
    scores.push_back(score);
    for (std::size_t k = 0; k < dim; ++k) {
      double v = 0.0;
      if (!parse_double(fields[k + 2], v)) fail(ErrorKind::Parse, where + "malformed value in column " + std::to_string(k + 3));
      values.push_back(v);
    }
  }
  probes::EmbeddingTable table;
  const auto n = static_cast<Eigen::Index>(ids.size());
  table.ids = std::move(ids);
  table.vectors = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, static_cast<Eigen::Index>(dim));
  table.scores = Eigen::Map<const probes::VectorXd>(scores.data(), n);
  table.validate();
  return table;
}

probes::EmbeddingTable parse_embedding_raw(std::string_view bytes, const json& sidecar) {
  probes::EmbeddingTable table;
  table.ids = field<std::vector<std::string>>(sidecar, "ids");
  const auto scores = field<std::vector<double>>(sidecar, "scores");
  const auto dim = field<std::size_t>(sidecar, "dim");
  const auto n = table.ids.size();
  if (scores.size() != n) fail(ErrorKind::Format, "sidecar 'scores' and 'ids' differ in length");
  if (bytes.size() != n * dim * 4) {
    fail(ErrorKind::Format, "raw embedding size " + std::to_string(bytes.size()) + " bytes, expected " +
                                std::to_string(n * dim * 4));
  }
  table.vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      std::uint32_t word = 0;
      const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + 4 * (r * dim + c);
      word = static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
             static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
      table.vectors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = std::bit_cast<float>(word);
    }
  }
  table.scores = Eigen::Map<const probes::VectorXd>(scores.data(), static_cast<Eigen::Index>(n));
  table.validate();
  return table;
}

probes::EmbeddingTable load_embeddings(const fs::path& path) {
  if (path.extension() == ".csv") return parse_embedding_csv(read_file(path));
  fs::path sidecar = path;
  sidecar += ".json";
  return parse_embedding_raw(read_file(path), parse_json(read_file(sidecar), sidecar.string()));
}

json probe_result_to_json(const probes::ProbeResult& result) {
  json scores = json::object();
  json degenerate = json::object();
  json sizes = json::object();
  for (const auto& s : result.scores) {
    scores[s.split] = s.rho;
    degenerate[s.split] = s.degenerate;
    sizes[s.split] = s.n;
  }
  json doc = {{"probe_kind", probes::to_string(result.kind)},
              {"selection_protocol", result.selection_protocol},
              {"grid", result.grid},
              {"rho", scores},
              {"n", sizes},
              {"degenerate", degenerate},
              {"spearman_rho", result.spearman_rho}};
  if (result.selected_alpha) doc["selected_alpha"] = *result.selected_alpha;
  if (result.selected_k) doc["selected_k"] = *result.selected_k;
  if (result.kind == probes::ProbeKind::Ridge) {
    doc["fold_mses"] = result.fold_mses;
    doc["standardized"] = result.standardized;
  } else {
    doc["grid_rhos"] = result.grid_rhos;
  }
  return doc;
}

json strata_to_json(const std::vector<probes::StratumScore>& strata) {
  json out = json::array();
  for (const auto& s : strata) {
    out.push_back({{"label", s.label}, {"n", s.n}, {"rho", s.rho}, {"degenerate", s.degenerate}, {"low_n", s.low_n}});
  }
  return out;
}

}  // namespace bucketmask::io
