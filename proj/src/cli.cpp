#include "bucketmask/cli.hpp"

#include "bucketmask/error.hpp"
#include "bucketmask/io.hpp"
#include "bucketmask/session.hpp"
#include "bucketmask/stats.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <sstream>

namespace bucketmask::cli {

namespace {

namespace fs = std::filesystem;
using io::json;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

struct BuildContactsArgs {
  std::string pdb, chain = "A", sequence, protein, atom = "cb", out;
  double tau = 7.0;
  double min_identity = 0.5;
};

struct ProjectArgs {
  std::string msa, contacts, wt_id, out;
};

struct MaskArgs {
  std::string msa, projections, contacts, strategy = "bucket", seed_pool = "contact", out;
  std::uint64_t seed = 0;
  std::uint64_t epochs = 1;
  double lambda = 0.2, rate_min = 0.15, rate_max = 0.75;
};

struct SplitArgs {
  std::string dms, task, reference, out;
  std::uint64_t seed = 0;
};

struct ProbeArgs {
  std::string embeddings, manifest, probe = "ridge", contacts, metric = "euclidean",
      alpha_protocol = "holdout", out;
  std::uint64_t seed = 0;
};

struct StatsArgs {
  std::string masks, contacts, projections, out;
};

std::string first_sequence(const std::string& path, std::string* id) {
  const auto fasta = msa::parse_msa(io::read_file(path));
  if (id) *id = fasta.rows.front().id;
  return msa::ungapped(fasta.rows.front().gapped);
}

void emit(std::ostream& out, const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    out << contents;
  } else {
    io::write_file_atomic(path, contents);
  }
}

int build_contacts(const BuildContactsArgs& a, std::ostream& out) {
  std::string fasta_id;
  const auto sequence = first_sequence(a.sequence, &fasta_id);
  const auto atom = a.atom == "ca" ? structures::RepresentativeAtom::Ca
                                   : structures::RepresentativeAtom::CbFallbackCa;
  const auto structure = structures::parse_structure(io::read_file(a.pdb), a.chain, atom);
  const auto alignment = structures::align_structure(sequence, structure, a.min_identity);
  const auto map = structures::build_contact_map(structure, alignment, a.tau);
  const auto protein = a.protein.empty() ? fasta_id : a.protein;

  io::write_file_atomic(a.out, io::dump_line(io::contact_map_to_json(protein, map)) + "\n");

  json status = {{"protein", protein},
                 {"length", map.length()},
                 {"resolved", map.resolved_count()},
                 {"coverage_percent", 100.0 * alignment.coverage()},
                 {"identity", alignment.identity},
                 {"edges", map.edge_count()},
                 {"output", a.out}};
  if (alignment.coverage() < 0.5) {
    status["warning"] = "only " + std::to_string(map.resolved_count()) + " of " +
                        std::to_string(map.length()) + " positions are resolved in the structure";
  }
  out << status.dump() << "\n";
  return kExitOk;
}

int project_msa(const ProjectArgs& a, std::ostream& out) {
  const auto alignment = msa::parse_msa(io::read_file(a.msa), a.wt_id);
  const auto wt_length = msa::ungapped(alignment.wild_type().gapped).size();
  if (!a.contacts.empty()) {
    const auto contacts = io::load_contact_map(a.contacts);
    require(contacts.map.length() == wt_length,
            "wild-type row has " + std::to_string(wt_length) + " residues but the contact map has " +
                std::to_string(contacts.map.length()));
  }
  const auto projection = msa::project_msa(alignment);
  std::string body;
  for (std::size_t i = 0; i < alignment.rows.size(); ++i) {
    body += io::dump_line(io::projection_to_json({alignment.rows[i].id, projection.maps[i]})) + "\n";
  }
  io::write_file_atomic(a.out, body);
  out << json{{"records", alignment.rows.size()},
              {"width", alignment.width()},
              {"column_visits", projection.column_visits},
              {"output", a.out}}
             .dump()
      << "\n";
  return kExitOk;
}

int mask(const MaskArgs& a, std::ostream& out) {
  const auto strategy = masking::parse_strategy(a.strategy);
  require(strategy.has_value(), "unknown strategy '" + a.strategy + "'");
  if (*strategy != masking::Strategy::Random) {
    require(!a.projections.empty(), a.strategy + " masking requires --projections");
    require(!a.contacts.empty(), a.strategy + " masking requires --contacts");
  }
  masking::MaskConfig config;
  config.lambda = a.lambda;
  config.rate_min = a.rate_min;
  config.rate_max = a.rate_max;
  config.seed_pool = a.seed_pool == "all" ? masking::SeedPool::AllRemaining
                                          : masking::SeedPool::ContactBearing;
  config.validate();

  const auto session = MaskSession::open(
      a.msa, a.contacts.empty() ? std::nullopt : std::optional<fs::path>(a.contacts),
      a.projections.empty() ? std::nullopt : std::optional<fs::path>(a.projections), config, a.seed);

  std::string body;
  for (std::uint64_t epoch = 0; epoch < a.epochs; ++epoch) {
    for (std::size_t ordinal = 0; ordinal < session.size(); ++ordinal) {
      const auto m = session.sample_ordinal(ordinal, epoch, *strategy);
      body += io::dump_line(io::mask_record_to_json(m.id, m.epoch, m.strategy, m.plan, m.corruption)) + "\n";
    }
  }
  io::write_file_atomic(a.out, body);
  out << json{{"records", a.epochs * session.size()}, {"output", a.out}}.dump() << "\n";
  return kExitOk;
}

int split(const SplitArgs& a, std::ostream& out) {
  const auto kind = splits::parse_split_kind(a.task);
  require(kind.has_value(), "unknown task '" + a.task + "'");
  std::optional<std::string> reference;
  if (!a.reference.empty()) reference = first_sequence(a.reference, nullptr);
  const auto table = splits::parse_dms(io::read_file(a.dms),
                                       reference ? std::optional<std::string_view>(*reference) : std::nullopt);
  const auto manifest = splits::make_split(*kind, table.variants, a.seed);
  io::write_file_atomic(a.out, io::manifest_to_json(manifest).dump(2) + "\n");

  json status = {{"name", splits::to_string(manifest.kind)},
                 {"train", manifest.train.size()},
                 {"val", manifest.val.size()},
                 {"test", manifest.test.size()},
                 {"excluded", manifest.excluded.size()},
                 {"output", a.out}};
  std::vector<std::string> warnings = table.warnings;
  warnings.insert(warnings.end(), manifest.warnings.begin(), manifest.warnings.end());
  if (!warnings.empty()) status["warnings"] = warnings;
  out << status.dump() << "\n";
  return kExitOk;
}

json strata_report(const std::vector<probes::Prediction>& predictions, const structures::ContactMap& contacts) {
  std::vector<splits::Variant> variants;
  std::vector<probes::Prediction> second_order;
  for (const auto& p : predictions) {
    splits::Variant v;
    v.raw_id = p.id;
    v.substitutions = splits::parse_mutation_code(p.id);
    if (v.substitutions.size() != 2) continue;
    variants.push_back(std::move(v));
    second_order.push_back(p);
  }
  const auto strata = splits::stratify_second_order(variants, contacts);
  std::map<std::string, std::vector<std::string>> long_range;
  if (!strata.long_range_contacts.empty()) long_range["long_range_contact"] = strata.long_range_contacts;
  return {{"second_order", second_order.size()},
          {"sequence_distance", io::strata_to_json(probes::stratified_eval(second_order, strata.by_sequence_distance))},
          {"structure", io::strata_to_json(probes::stratified_eval(second_order, strata.by_contact))},
          {"long_range", io::strata_to_json(probes::stratified_eval(second_order, long_range))}};
}

int probe(const ProbeArgs& a, std::ostream& out) {
  const auto kind = probes::parse_probe_kind(a.probe);
  require(kind.has_value(), "unknown probe '" + a.probe + "'");
  const auto table = io::load_embeddings(a.embeddings);
  const auto manifest = io::manifest_from_json(json::parse(io::read_file(a.manifest)));

  probes::ProbeResult result;
  if (*kind == probes::ProbeKind::Ridge) {
    if (manifest.kind == splits::SplitKind::ModelSelection) {
      result = probes::selection_probe(table.select(manifest.train), a.seed);
    } else {
      probes::RidgeProbeOptions options;
      options.seed = a.seed;
      options.protocol = a.alpha_protocol == "kfold" ? probes::AlphaProtocol::KFold
                                                     : probes::AlphaProtocol::Holdout;
      std::vector<std::pair<std::string, probes::EmbeddingTable>> evaluations;
      if (!manifest.val.empty()) evaluations.emplace_back("val", table.select(manifest.val));
      require(!manifest.test.empty(), "manifest has an empty test set");
      evaluations.emplace_back("test", table.select(manifest.test));
      result = probes::ridge_probe(table.select(manifest.train), evaluations, options);
    }
  } else {
    require(!manifest.val.empty() && !manifest.test.empty(),
            "knn probe needs a manifest with train, val and test sets");
    result = probes::knn_probe(table.select(manifest.train), table.select(manifest.val),
                               table.select(manifest.test), {probes::kKGrid.begin(), probes::kKGrid.end()},
                               a.metric == "cosine" ? probes::Metric::Cosine : probes::Metric::Euclidean);
  }

  auto report = io::probe_result_to_json(result);
  report["task"] = splits::to_string(manifest.kind);
  report["seed"] = a.seed;
  if (!a.contacts.empty()) report["strata"] = strata_report(result.predictions, io::load_contact_map(a.contacts).map);
  emit(out, a.out, report.dump(2) + "\n");
  return kExitOk;
}

int stats_command(const StatsArgs& a, std::ostream& out) {
  const auto wt = io::load_contact_map(a.contacts).map;
  std::map<std::string, structures::ContactMap> graphs;
  if (!a.projections.empty()) {
    for (const auto& rec : io::parse_projections(io::read_file(a.projections))) {
      graphs.emplace(rec.id, msa::project_contact_graph(wt, rec.map));
    }
  }

  std::map<std::string, std::size_t> action_counts{{"MASK", 0}, {"RANDOM", 0}, {"KEEP", 0}};
  std::size_t total_actions = 0;
  std::size_t records = 0;
  std::vector<double> observed;
  std::vector<double> baseline;
  std::vector<std::size_t> position_counts(wt.length(), 0);
  std::size_t frequency_records = 0;

  std::istringstream lines(io::read_file(a.masks));
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const auto rec = json::parse(line);
    ++records;
    for (const auto& action : rec.at("actions")) {
      ++action_counts[action.at("action").get<std::string>()];
      ++total_actions;
    }
    std::vector<std::size_t> masked = rec.at("struct_indices").get<std::vector<std::size_t>>();
    const auto rand = rec.at("rand_indices").get<std::vector<std::size_t>>();
    masked.insert(masked.end(), rand.begin(), rand.end());
    std::sort(masked.begin(), masked.end());

    const auto id = rec.at("id").get<std::string>();
    const auto length = rec.at("length").get<std::size_t>();
    const structures::ContactMap* graph = nullptr;
    if (const auto it = graphs.find(id); it != graphs.end()) {
      graph = &it->second;
    } else if (graphs.empty() && length == wt.length()) {
      graph = &wt;
    }
    if (graph && graph->length() == length) {
      if (const auto f = stats::masked_pair_contact_fraction(masked, *graph)) {
        observed.push_back(*f);
        baseline.push_back(stats::contact_density(*graph));
      }
    }
    if (length == wt.length()) {
      ++frequency_records;
      for (auto p : masked) ++position_counts[p];
    }
  }

  json fractions = json::object();
  for (const auto& [name, count] : action_counts) {
    fractions[name] = total_actions ? static_cast<double>(count) / static_cast<double>(total_actions) : 0.0;
  }
  json report = {{"records", records}, {"masked_positions", total_actions}, {"action_fractions", fractions}};

  if (!observed.empty()) {
    double obs = 0.0;
    double base = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
      obs += observed[i];
      base += baseline[i];
    }
    obs /= static_cast<double>(observed.size());
    base /= static_cast<double>(baseline.size());
    report["contact_enrichment"] = {{"records_used", observed.size()},
                                    {"observed_pair_contact_fraction", obs},
                                    {"random_baseline", base},
                                    {"enrichment", base > 0.0 ? json(obs / base) : json(nullptr)}};
  }
  if (frequency_records > 0 && wt.length() >= 2) {
    const auto chi = stats::chi_square_uniform(position_counts);
    report["position_frequency"] = {{"records_used", frequency_records},
                                    {"counts", position_counts},
                                    {"chi_square", chi.statistic},
                                    {"dof", chi.dof},
                                    {"p_value", chi.p_value}};
  }
  emit(out, a.out, report.dump(2) + "\n");
  return kExitOk;
}

void report_error(std::ostream& err, std::string_view kind, std::string_view message) {
  err << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structure-aware masking toolkit for protein language models", "bucketmask"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  BuildContactsArgs bc;
  auto* cmd_bc = app.add_subcommand("build-contacts", "Align a PDB chain to a sequence and write its contact map");
  cmd_bc->add_option("--pdb", bc.pdb, "PDB file")->required()->check(CLI::ExistingFile);
  cmd_bc->add_option("--chain", bc.chain, "Chain identifier")->capture_default_str();
  cmd_bc->add_option("--sequence", bc.sequence, "FASTA file with the full-length sequence")->required()->check(CLI::ExistingFile);
  cmd_bc->add_option("--tau", bc.tau, "Contact distance threshold in angstroms")->capture_default_str();
  cmd_bc->add_option("--protein", bc.protein, "Protein id (defaults to the FASTA record id)");
  cmd_bc->add_option("--atom", bc.atom, "Representative atom")->check(CLI::IsMember({"cb", "ca"}))->capture_default_str();
  cmd_bc->add_option("--min-identity", bc.min_identity, "Alignment identity floor")->capture_default_str();
  cmd_bc->add_option("--out", bc.out, "Output contact map JSON")->required();

  ProjectArgs pa;
  auto* cmd_pa = app.add_subcommand("project-msa", "Project every MSA row onto wild-type coordinates");
  cmd_pa->add_option("--msa", pa.msa, "FASTA/a2m alignment")->required()->check(CLI::ExistingFile);
  cmd_pa->add_option("--contacts", pa.contacts, "Wild-type contact map to check lengths against")->check(CLI::ExistingFile);
  cmd_pa->add_option("--wt-id", pa.wt_id, "Record id of the wild type (default: first record)");
  cmd_pa->add_option("--out", pa.out, "Output projections JSON-lines")->required();

  MaskArgs ma;
  auto* cmd_ma = app.add_subcommand("mask", "Draw per-epoch mask plans for every MSA sequence");
  cmd_ma->add_option("--msa", ma.msa, "FASTA/a2m alignment")->required()->check(CLI::ExistingFile);
  cmd_ma->add_option("--projections", ma.projections, "Projections JSON-lines")->check(CLI::ExistingFile);
  cmd_ma->add_option("--contacts", ma.contacts, "Wild-type contact map")->check(CLI::ExistingFile);
  cmd_ma->add_option("--strategy", ma.strategy, "Masking strategy")
      ->check(CLI::IsMember({"random", "bucket", "gm-span", "gm_span"}))->capture_default_str();
  cmd_ma->add_option("--epochs", ma.epochs, "Number of epochs")->capture_default_str();
  cmd_ma->add_option("--seed", ma.seed, "Master seed")->capture_default_str();
  cmd_ma->add_option("--lambda", ma.lambda, "Exploration rate")->capture_default_str();
  cmd_ma->add_option("--rate-min", ma.rate_min, "Lower masking rate")->capture_default_str();
  cmd_ma->add_option("--rate-max", ma.rate_max, "Upper masking rate (exclusive)")->capture_default_str();
  cmd_ma->add_option("--seed-pool", ma.seed_pool, "Structural seed pool")
      ->check(CLI::IsMember({"contact", "all"}))->capture_default_str();
  cmd_ma->add_option("--out", ma.out, "Output mask-batch JSON-lines")->required();

  SplitArgs sa;
  auto* cmd_sa = app.add_subcommand("split", "Split a DMS table for one evaluation task");
  cmd_sa->add_option("--dms", sa.dms, "DMS CSV with mutant,DMS_score columns")->required()->check(CLI::ExistingFile);
  cmd_sa->add_option("--task", sa.task, "model-selection, regime, position, mutation or neighborhood")->required();
  cmd_sa->add_option("--seed", sa.seed, "Split seed")->capture_default_str();
  cmd_sa->add_option("--reference", sa.reference, "FASTA with the wild-type sequence to check codes against")->check(CLI::ExistingFile);
  cmd_sa->add_option("--out", sa.out, "Output manifest JSON")->required();

  ProbeArgs pr;
  auto* cmd_pr = app.add_subcommand("probe", "Fit a ridge or KNN probe on embeddings over a split manifest");
  cmd_pr->add_option("--embeddings", pr.embeddings, "Embedding CSV, or raw float32 with a .json sidecar")->required()->check(CLI::ExistingFile);
  cmd_pr->add_option("--manifest", pr.manifest, "Split manifest JSON")->required()->check(CLI::ExistingFile);
  cmd_pr->add_option("--probe", pr.probe, "Probe kind")->check(CLI::IsMember({"ridge", "knn"}))->capture_default_str();
  cmd_pr->add_option("--seed", pr.seed, "Seed for hyperparameter selection splits")->capture_default_str();
  cmd_pr->add_option("--contacts", pr.contacts, "Contact map for second-order strata")->check(CLI::ExistingFile);
  cmd_pr->add_option("--metric", pr.metric, "KNN distance")->check(CLI::IsMember({"euclidean", "cosine"}))->capture_default_str();
  cmd_pr->add_option("--alpha-protocol", pr.alpha_protocol, "Ridge alpha selection on the training set")
      ->check(CLI::IsMember({"holdout", "kfold"}))->capture_default_str();
  cmd_pr->add_option("--out", pr.out, "Output report JSON (stdout when omitted)");

  StatsArgs st;
  auto* cmd_st = app.add_subcommand("stats", "Summarize a mask batch against a contact map");
  cmd_st->add_option("--masks", st.masks, "Mask-batch JSON-lines")->required()->check(CLI::ExistingFile);
  cmd_st->add_option("--contacts", st.contacts, "Wild-type contact map")->required()->check(CLI::ExistingFile);
  cmd_st->add_option("--projections", st.projections, "Projections JSON-lines for homolog records")->check(CLI::ExistingFile);
  cmd_st->add_option("--out", st.out, "Output report JSON (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return kExitUsage;
  }

  try {
    if (*cmd_bc) return build_contacts(bc, out);
    if (*cmd_pa) return project_msa(pa, out);
    if (*cmd_ma) return mask(ma, out);
    if (*cmd_sa) return split(sa, out);
    if (*cmd_pr) return probe(pr, out);
    if (*cmd_st) return stats_command(st, out);
  } catch (const Error& e) {
    report_error(err, to_string(e.kind()), e.what());
    return kExitUsage;
  } catch (const json::exception& e) {
    report_error(err, "parse", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    report_error(err, "internal", e.what());
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace bucketmask::cli
