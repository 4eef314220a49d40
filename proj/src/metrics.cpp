#include "scpt/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "scpt/errors.hpp"

namespace scpt {

int select_best(const EvalRecord &record, const std::vector<PropertySpec> &specs) {
  if (record.candidates.empty()) throw EmptyBatch("record has no candidates");
  int best = 0;
  double best_score = directional_score(specs, record.candidate_profiles[0]);
  for (size_t i = 1; i < record.candidates.size(); ++i) {
    const double score = directional_score(specs, record.candidate_profiles[i]);
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }
  return best;
}

bool success(const EvalRecord &record, const std::vector<PropertySpec> &specs) {
  for (size_t i = 0; i < record.candidates.size(); ++i) {
    if (all_better(specs, record.source_profile, record.candidate_profiles[i])) {
      return true;
    }
  }
  return false;
}

double sr(const std::vector<EvalRecord> &batch,
          const std::vector<PropertySpec> &specs) {
  if (batch.empty()) throw EmptyBatch("empty evaluation batch");
  size_t successes = 0;
  for (const EvalRecord &record : batch) {
    if (success(record, specs)) ++successes;
  }
  return static_cast<double>(successes) / static_cast<double>(batch.size());
}

double sim_metric(const EvalRecord &record, int fp_radius, int fp_width) {
  if (!record.selected.has_value()) {
    throw Error("sim_metric requires a selected candidate");
  }
  return tanimoto(ecfp(record.source, fp_radius, fp_width),
                  ecfp(record.candidates[static_cast<size_t>(*record.selected)],
                       fp_radius, fp_width));
}

double ri(const EvalRecord &record, const std::vector<PropertySpec> &specs,
          double epsilon) {
  if (!record.selected.has_value()) {
    throw Error("ri requires a selected candidate");
  }
  const PropertyProfile &chosen =
      record.candidate_profiles[static_cast<size_t>(*record.selected)];
  double total = 0.0;
  for (const PropertySpec &spec : specs) {
    const double baseline = record.source_profile.at(spec.name);
    if (std::abs(baseline) <= epsilon) throw DegenerateBaseline(spec.name);
    total += spec.direction * (chosen.at(spec.name) - baseline) / baseline;
  }
  return total / static_cast<double>(specs.size());
}

MetricsReport evaluate(std::vector<EvalRecord> &batch,
                       const std::vector<PropertySpec> &specs, int fp_radius,
                       int fp_width) {
  MetricsReport report;
  report.records = batch.size();
  double sim_total = 0.0;
  double ri_total = 0.0;
  for (EvalRecord &record : batch) {
    MetricsRow row;
    row.source = record.source.canonical_form();
    report.excluded_candidates += record.excluded_candidates;
    if (record.candidates.empty()) {
      ++report.empty_records;
      row.note = "no valid candidates";
      report.rows.push_back(std::move(row));
      continue;
    }
    record.selected = select_best(record, specs);
    row.selected =
        record.candidates[static_cast<size_t>(*record.selected)].canonical_form();
    row.success = success(record, specs);
    if (row.success) ++report.successes;
    row.sim = sim_metric(record, fp_radius, fp_width);
    sim_total += *row.sim;
    ++report.sim_count;
    try {
      row.ri = ri(record, specs);
      ri_total += *row.ri;
      ++report.ri_count;
    } catch (const DegenerateBaseline &) {
      ++report.degenerate_baselines;
      row.note = "degenerate baseline";
    }
    report.rows.push_back(std::move(row));
  }
  if (report.records == 0) throw EmptyBatch("empty evaluation batch");
  report.sr = static_cast<double>(report.successes) /
              static_cast<double>(report.records);
  report.mean_sim = report.sim_count > 0
                        ? sim_total / static_cast<double>(report.sim_count)
                        : 0.0;
  report.mean_ri =
      report.ri_count > 0 ? ri_total / static_cast<double>(report.ri_count) : 0.0;
  return report;
}

CandidatesLoad load_candidates_file(const std::string &path,
                                    const std::vector<OracleSource> &sources,
                                    const std::vector<PropertySpec> &specs) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open candidates file: " + path);

  auto profile_for = [&](const Molecule &m) {
    PropertyProfile profile;
    for (const OracleSource &source : sources) {
      const PropertyProfile fragment = source.lookup(m);  // may throw OracleMiss
      for (const auto &[name, value] : fragment.values()) {
        profile.set(name, value);
      }
    }
    for (const PropertySpec &spec : specs) {
      if (!profile.has(spec.name)) throw OracleMiss(m.canonical_form());
    }
    return profile;
  };

  CandidatesLoad load;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string field;
    std::vector<std::string> cols;
    while (std::getline(fields, field, '\t')) cols.push_back(field);
    if (cols.size() < 2) {
      ++load.skipped_lines;
      continue;
    }
    EvalRecord record;
    try {
      record.source = parse_smiles(cols[0]);
      record.source_profile = profile_for(record.source);
    } catch (const Error &) {
      ++load.skipped_lines;
      continue;
    }
    for (size_t i = 1; i < cols.size(); ++i) {
      try {
        Molecule candidate = parse_smiles(cols[i]);
        PropertyProfile profile = profile_for(candidate);
        record.candidates.push_back(std::move(candidate));
        record.candidate_profiles.push_back(std::move(profile));
      } catch (const Error &) {
        ++record.excluded_candidates;
      }
    }
    load.records.push_back(std::move(record));
  }
  return load;
}

}  // namespace scpt
