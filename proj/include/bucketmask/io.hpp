#pragma once

#include "bucketmask/masking.hpp"
#include "bucketmask/msa.hpp"
#include "bucketmask/probes.hpp"
#include "bucketmask/splits.hpp"
#include "bucketmask/structures.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace bucketmask::io {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary and renames over `path`, so readers never see
// a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// Contact map document: {"protein", "length", "tau", "resolved", "edges"} with
// 0-based edges (i < j) in lexicographic order and an implicit diagonal.
struct ContactFile {
  std::string protein;
  structures::ContactMap map;
};

json contact_map_to_json(const std::string& protein, const structures::ContactMap& map);
ContactFile contact_map_from_json(const json& doc);
ContactFile load_contact_map(const std::filesystem::path& path);

// Projection JSON-lines: {"id", "s_to_wt", "wt_to_s"} per homolog.
struct ProjectionRecord {
  std::string id;
  msa::ProjectionMap map;
};

json projection_to_json(const ProjectionRecord& record);
std::vector<ProjectionRecord> parse_projections(std::string_view jsonl);

// Mask-batch JSON-lines record.
json mask_record_to_json(const std::string& id, std::uint64_t epoch, masking::Strategy strategy,
                         const masking::MaskPlan& plan, const masking::Corruption& corruption);

json manifest_to_json(const splits::SplitManifest& manifest);
splits::SplitManifest manifest_from_json(const json& doc);

// CSV "id,score,v0,...,v{D-1}" (header optional).
probes::EmbeddingTable parse_embedding_csv(std::string_view csv);

// Little-endian float32 matrix, row-major N x dim, with a sidecar
// {"ids", "scores", "dim"}.
probes::EmbeddingTable parse_embedding_raw(std::string_view bytes, const json& sidecar);

// Dispatches on extension: ".csv" reads CSV, anything else expects a
// "<path>.json" sidecar.
probes::EmbeddingTable load_embeddings(const std::filesystem::path& path);

json probe_result_to_json(const probes::ProbeResult& result);
json strata_to_json(const std::vector<probes::StratumScore>& strata);

// Serialization used for every JSON-lines record and document written to disk.
std::string dump_line(const json& doc);

}  // namespace bucketmask::io
