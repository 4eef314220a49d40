#include "scpt/properties.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "scpt/errors.hpp"

namespace scpt {

std::optional<double> PropertyProfile::get(const std::string &name) const {
  auto it = values_.find(name);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

double PropertyProfile::at(const std::string &name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw MissingProperty(name);
  return it->second;
}

namespace {

double hetero_fraction(const Molecule &m) {
  int hetero = 0;
  int heavy = 0;
  for (const Atom &atom : m.atoms()) {
    if (atom.element == "*") continue;
    ++heavy;
    if (atom.element != "C") ++hetero;
  }
  return heavy == 0 ? 0.0 : static_cast<double>(hetero) / heavy;
}

}  // namespace

double additive_logp_toy(const Molecule &m) {
  // Per-element contributions, roughly tracking hydrophobicity: carbon and
  // halogens push up, polar atoms pull down. Values are fixed constants of
  // this toy oracle, not fitted to anything.
  double total = 0.0;
  for (const Atom &atom : m.atoms()) {
    double c = 0.0;
    if (atom.element == "C") c = 0.40;
    else if (atom.element == "F") c = 0.35;
    else if (atom.element == "Cl") c = 0.75;
    else if (atom.element == "Br") c = 0.95;
    else if (atom.element == "I") c = 1.10;
    else if (atom.element == "N") c = -0.60;
    else if (atom.element == "O") c = -0.70;
    else if (atom.element == "S") c = 0.15;
    else if (atom.element == "P") c = -0.30;
    else if (atom.element == "B") c = 0.10;
    if (atom.aromatic) c += 0.10;
    if (atom.charge != 0) c -= 1.50;
    total += c;
  }
  return total;
}

OracleSource OracleSource::builtin(BuiltinOracle kind, std::string property_name) {
  OracleSource source;
  source.kind_ = Kind::kBuiltin;
  source.builtin_ = kind;
  source.names_ = {std::move(property_name)};
  return source;
}

OracleSource OracleSource::from_table(std::vector<std::string> names,
                                      std::map<std::string, std::vector<double>> rows) {
  OracleSource source;
  source.kind_ = Kind::kTable;
  source.names_ = std::move(names);
  source.rows_ = std::move(rows);
  return source;
}

OracleSource OracleSource::from_tsv(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open property table: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty property table: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, '\t')) header.push_back(field);
  }
  if (header.size() < 2 || header[0] != "smiles") {
    throw IoError("property table header must be 'smiles<TAB>name...': " + path);
  }
  std::vector<std::string> names(header.begin() + 1, header.end());

  std::map<std::string, std::vector<double>> rows;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string field;
    std::vector<std::string> cols;
    while (std::getline(fields, field, '\t')) cols.push_back(field);
    if (cols.size() != header.size()) {
      throw IoError(path + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(header.size()) + " columns");
    }
    std::string key;
    try {
      key = parse_smiles(cols[0]).canonical_form();
    } catch (const Error &e) {
      throw IoError(path + ":" + std::to_string(line_no) + ": bad SMILES key: " +
                    e.what());
    }
    std::vector<double> values;
    for (size_t i = 1; i < cols.size(); ++i) {
      try {
        size_t used = 0;
        values.push_back(std::stod(cols[i], &used));
        if (used != cols[i].size()) throw std::invalid_argument(cols[i]);
      } catch (const std::exception &) {
        throw IoError(path + ":" + std::to_string(line_no) + ": bad number '" +
                      cols[i] + "'");
      }
    }
    auto it = rows.find(key);
    if (it != rows.end()) {
      if (it->second != values) {
        throw IoError(path + ":" + std::to_string(line_no) +
                      ": conflicting duplicate row for " + key);
      }
      continue;
    }
    rows.emplace(std::move(key), std::move(values));
  }
  return from_table(std::move(names), std::move(rows));
}

PropertyProfile OracleSource::lookup(const Molecule &m) const {
  PropertyProfile profile;
  if (kind_ == Kind::kBuiltin) {
    double value = 0.0;
    switch (builtin_) {
      case BuiltinOracle::kHeavyAtomCount:
        value = static_cast<double>(m.atom_count());
        break;
      case BuiltinOracle::kRingCount:
        value = static_cast<double>(m.rings().size());
        break;
      case BuiltinOracle::kHeteroFraction:
        value = hetero_fraction(m);
        break;
      case BuiltinOracle::kAdditiveLogpToy:
        value = additive_logp_toy(m);
        break;
    }
    profile.set(names_.front(), value);
    return profile;
  }
  auto it = rows_.find(m.canonical_form());
  if (it == rows_.end()) throw OracleMiss(m.canonical_form());
  for (size_t i = 0; i < names_.size(); ++i) {
    profile.set(names_[i], it->second[i]);
  }
  return profile;
}

double delta_p(const std::vector<PropertySpec> &specs,
               const PropertyProfile &profile_sou,
               const PropertyProfile &profile_opt) {
  double total = 0.0;
  for (const PropertySpec &spec : specs) {
    total += spec.weight * spec.direction *
             (profile_opt.at(spec.name) - profile_sou.at(spec.name));
  }
  return total;
}

bool all_better(const std::vector<PropertySpec> &specs,
                const PropertyProfile &profile_sou,
                const PropertyProfile &profile_opt) {
  for (const PropertySpec &spec : specs) {
    const double gain = spec.direction *
                        (profile_opt.at(spec.name) - profile_sou.at(spec.name));
    if (gain < spec.threshold) return false;
  }
  return true;
}

double directional_score(const std::vector<PropertySpec> &specs,
                         const PropertyProfile &profile) {
  double total = 0.0;
  for (const PropertySpec &spec : specs) {
    total += spec.weight * spec.direction * profile.at(spec.name);
  }
  return total;
}

}  // namespace scpt
