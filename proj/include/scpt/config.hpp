#pragma once

#include <string>
#include <vector>

#include "scpt/align_ref.hpp"
#include "scpt/pipeline.hpp"

namespace scpt {

// Oracle declaration from config; resolved to an OracleSource at run time.
struct OracleDecl {
  enum class Kind { kBuiltin, kFile };
  Kind kind = Kind::kBuiltin;
  std::string builtin_name;   // heavy_atom_count | ring_count | hetero_fraction | additive_logp_toy
  std::string property_name;  // published property name (builtin)
  std::string path;           // TSV path (file)
};

struct AlignConfig {
  double beta = 0.5;
  double lr = 0.1;
  int steps = 200;
  MarginMode mode = MarginMode::kReferenceNormalized;
  int context_order = 2;
};

struct RunConfig {
  std::string task;  // e.g. "plogp" or "bbbp,drd2,qed"
  PipelineConfig pipeline;
  std::vector<OracleDecl> oracles;
  AlignConfig align;
  int candidates_per_source = 20;  // best-of-k selection
  bool split_components = false;

  void validate() const;
};

// Built-in task table with the documented per-property margins:
// pLogP 1.0, QED 0.1, HIA 0.05, BBBP 0.2, DRD2 0.2, Mutag 0.1 (decrease),
// JNK3 0.05, GSK3b 0.05. Multi-property tasks ("bbbp,drd2,qed") switch the
// pair filter to the all-better criterion.
PropertySpec builtin_property_spec(const std::string &task_name);
RunConfig default_run_config(const std::string &task_names);

// Flat "key = value" sections; '#' comments; unknown sections or keys are
// errors. Starts from default_run_config of the [task] section.
RunConfig load_run_config(const std::string &path);
RunConfig parse_run_config(const std::string &text, const std::string &origin);

// Resolved oracle sources (loads file tables).
std::vector<OracleSource> resolve_oracles(const RunConfig &config);

// Key/value echo of every knob, for run reports.
std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig &config);

}  // namespace scpt
