#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scpt/fingerprint.hpp"
#include "scpt/molgraph.hpp"
#include "scpt/properties.hpp"

namespace scpt {

// One source molecule with its generated candidates. Invalid or unscorable
// candidates are excluded at load time and counted; a record can end up with
// no valid candidates (automatic non-success).
struct EvalRecord {
  Molecule source;
  PropertyProfile source_profile;
  std::vector<Molecule> candidates;
  std::vector<PropertyProfile> candidate_profiles;
  size_t excluded_candidates = 0;
  std::optional<int> selected;
};

// Argmax over candidates of the weighted directional objective
// sum_i w_i * s_i * p_i(candidate); ties broken by lowest index.
int select_best(const EvalRecord &record, const std::vector<PropertySpec> &specs);

// True iff at least one candidate clears every per-property threshold
// (inclusive) against the source.
bool success(const EvalRecord &record, const std::vector<PropertySpec> &specs);

// Fraction of successful records. Throws EmptyBatch on an empty batch.
double sr(const std::vector<EvalRecord> &batch,
          const std::vector<PropertySpec> &specs);

// Tanimoto between source and the selected candidate. Selection must have
// run.
double sim_metric(const EvalRecord &record, int fp_radius = 2,
                  int fp_width = 2048);

// Mean over properties of direction * (p(selected) - p(source)) / p(source).
// Near-zero baselines raise DegenerateBaseline.
double ri(const EvalRecord &record, const std::vector<PropertySpec> &specs,
          double epsilon = 1e-6);

struct MetricsRow {
  std::string source;
  std::optional<std::string> selected;
  bool success = false;
  std::optional<double> sim;
  std::optional<double> ri;
  std::string note;  // "degenerate baseline", "no valid candidates", ...
};

// Batch evaluation. SR counts records where ANY candidate passes; SIM and RI
// are computed on the SELECTED candidate, which may differ from the success
// witness. Means skip records without a usable value.
struct MetricsReport {
  size_t records = 0;
  size_t successes = 0;
  double sr = 0.0;
  double mean_sim = 0.0;
  double mean_ri = 0.0;
  size_t sim_count = 0;
  size_t ri_count = 0;
  size_t excluded_candidates = 0;
  size_t degenerate_baselines = 0;
  size_t empty_records = 0;
  bool sr_uses_any_candidate = true;
  bool sim_uses_selected_candidate = true;
  std::vector<MetricsRow> rows;
};

MetricsReport evaluate(std::vector<EvalRecord> &batch,
                       const std::vector<PropertySpec> &specs,
                       int fp_radius = 2, int fp_width = 2048);

// Candidates file: TSV "source_smiles<TAB>cand_1<TAB>...<TAB>cand_k".
// Candidates that fail to parse or lack required properties are excluded and
// counted. Lines whose source fails to parse or score are skipped entirely
// (counted in skipped_lines).
struct CandidatesLoad {
  std::vector<EvalRecord> records;
  size_t skipped_lines = 0;
};
CandidatesLoad load_candidates_file(const std::string &path,
                                    const std::vector<OracleSource> &sources,
                                    const std::vector<PropertySpec> &specs);

}  // namespace scpt
