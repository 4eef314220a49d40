#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scpt/molgraph.hpp"

namespace scpt {

// One optimization endpoint: direction (+1 increase, -1 decrease), relative
// weight, and the improvement margin used by filters and success checks.
struct PropertySpec {
  std::string name;
  int direction = +1;  // in {-1, +1}
  double weight = 1.0;  // >= 0
  double threshold = 0.0;

  bool operator==(const PropertySpec &) const = default;
};

// Property values for one molecule, keyed by property name.
class PropertyProfile {
 public:
  PropertyProfile() = default;
  explicit PropertyProfile(std::map<std::string, double> values)
      : values_(std::move(values)) {}

  void set(const std::string &name, double value) { values_[name] = value; }
  std::optional<double> get(const std::string &name) const;
  // Value or MissingProperty.
  double at(const std::string &name) const;
  bool has(const std::string &name) const { return values_.count(name) > 0; }
  const std::map<std::string, double> &values() const { return values_; }

 private:
  std::map<std::string, double> values_;
};

enum class BuiltinOracle {
  kHeavyAtomCount,
  kRingCount,
  kHeteroFraction,
  kAdditiveLogpToy,
};

// Scores a molecule on one or more properties. File-backed tables are keyed
// by canonical form and never invent values: a missing row is an OracleMiss.
class OracleSource {
 public:
  // Builtin oracle publishing a single property name.
  static OracleSource builtin(BuiltinOracle kind, std::string property_name);
  // TSV file "smiles<TAB>name1<TAB>name2...". Rows keyed by canonicalized
  // SMILES; duplicate keys with conflicting values are a load error.
  static OracleSource from_tsv(const std::string &path);
  // In-memory table (tests, pipeline fixtures).
  static OracleSource from_table(std::vector<std::string> names,
                                 std::map<std::string, std::vector<double>> rows);

  // Profile fragment holding this source's properties for the molecule.
  PropertyProfile lookup(const Molecule &m) const;

  const std::vector<std::string> &property_names() const { return names_; }
  bool file_backed() const { return kind_ == Kind::kTable; }

 private:
  enum class Kind { kBuiltin, kTable };
  Kind kind_ = Kind::kBuiltin;
  BuiltinOracle builtin_ = BuiltinOracle::kHeavyAtomCount;
  std::vector<std::string> names_;
  std::map<std::string, std::vector<double>> rows_;
};

// Directional property difference: sum_i w_i * s_i * (p_i(opt) - p_i(sou)).
double delta_p(const std::vector<PropertySpec> &specs,
               const PropertyProfile &profile_sou,
               const PropertyProfile &profile_opt);

// True iff every property improves by at least its threshold (inclusive).
bool all_better(const std::vector<PropertySpec> &specs,
                const PropertyProfile &profile_sou,
                const PropertyProfile &profile_opt);

// Weighted directional score of a single molecule:
// sum_i w_i * s_i * p_i(m). Candidate-selection objective.
double directional_score(const std::vector<PropertySpec> &specs,
                         const PropertyProfile &profile);

// Fixed per-element lipophilicity increments for the zero-dependency demo
// oracle. Additive over atoms, with an aromatic bonus.
double additive_logp_toy(const Molecule &m);

}  // namespace scpt
