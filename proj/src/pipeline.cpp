#include "scpt/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "scpt/errors.hpp"
#include "scpt/rng.hpp"

namespace scpt {

namespace {

void parallel_for(size_t n, int jobs, const std::function<void(size_t)> &fn) {
  if (jobs <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        break;
      }
    }
  };
  std::vector<std::thread> workers;
  const int count = std::min<int>(jobs, static_cast<int>(n));
  workers.reserve(static_cast<size_t>(count));
  for (int t = 0; t < count; ++t) workers.emplace_back(worker);
  for (auto &w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<int> involved_indices(const std::vector<CandidatePair> &pairs) {
  std::set<int> unique;
  for (const CandidatePair &pair : pairs) {
    unique.insert(pair.source);
    unique.insert(pair.target);
  }
  return {unique.begin(), unique.end()};
}

uint64_t string_seed(const std::string &text) {
  uint64_t h = 0x8f1bbcdcbfa53e0bULL;
  for (char c : text) {
    h = hash_combine(h, static_cast<uint64_t>(static_cast<unsigned char>(c)));
  }
  return h;
}

std::string format_value(const std::optional<double> &value) {
  if (!value.has_value()) return "-";
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6f", *value);
  return buffer;
}

}  // namespace

void PipelineConfig::validate() const {
  if (similarity.gamma < 0.0 || similarity.gamma > 1.0) {
    throw ConfigError("similarity gamma must be in [0, 1]");
  }
  if (similarity.mode == SimilarityFilter::Mode::kWindow &&
      !(similarity.window_lo < similarity.window_hi)) {
    throw ConfigError("similarity window requires lo < hi");
  }
  if (delta < 0.0) throw ConfigError("property margin delta must be >= 0");
  if (gamma_mcs <= 0.0 || gamma_mcs > 1.0) {
    throw ConfigError("gamma_mcs must be in (0, 1]");
  }
  if (mcs_budget <= 0) throw ConfigError("mcs budget must be positive");
  if (triplet_cap < 0) throw ConfigError("triplet cap must be >= 0");
  if (fp_radius < 0) throw ConfigError("fingerprint radius must be >= 0");
  if (fp_width < 64 || (fp_width & (fp_width - 1)) != 0) {
    throw ConfigError("fingerprint width must be a power of two >= 64");
  }
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (specs.empty()) throw ConfigError("at least one property spec is required");
  for (const PropertySpec &spec : specs) {
    if (spec.direction != 1 && spec.direction != -1) {
      throw ConfigError("property direction must be +1 or -1: " + spec.name);
    }
    if (spec.weight < 0.0) {
      throw ConfigError("property weight must be >= 0: " + spec.name);
    }
  }
}

// ---------------------------------------------------------------------------
// Corpus loading
// ---------------------------------------------------------------------------

CorpusLoad load_corpus_lines(const std::vector<std::string> &lines,
                             bool split_components) {
  CorpusLoad load;
  std::set<std::string> seen;
  std::vector<Molecule> molecules;
  for (const std::string &raw : lines) {
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t tab = line.find('\t');
    if (tab != std::string::npos) line.resize(tab);
    if (line.empty()) continue;
    ++load.total_lines;
    try {
      std::vector<Molecule> parsed;
      if (split_components) {
        parsed = parse_smiles_components(line);
      } else {
        parsed.push_back(parse_smiles(line));
      }
      for (Molecule &m : parsed) {
        if (seen.insert(m.canonical_form()).second) {
          molecules.push_back(std::move(m));
        } else {
          ++load.duplicates;
        }
      }
    } catch (const Error &) {
      ++load.invalid_lines;
    }
  }
  std::sort(molecules.begin(), molecules.end(),
            [](const Molecule &a, const Molecule &b) {
              return a.canonical_form() < b.canonical_form();
            });
  load.molecules = std::move(molecules);
  return load;
}

CorpusLoad load_corpus_file(const std::string &path, bool split_components) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return load_corpus_lines(lines, split_components);
}

PairFileLoad load_pair_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pair file: " + path);
  PairFileLoad load;
  std::map<std::string, int> index_of;
  std::vector<Molecule> molecules;
  auto intern = [&](Molecule m) {
    auto it = index_of.find(m.canonical_form());
    if (it != index_of.end()) return it->second;
    const int index = static_cast<int>(molecules.size());
    index_of.emplace(m.canonical_form(), index);
    molecules.push_back(std::move(m));
    return index;
  };
  std::string line;
  std::vector<std::pair<std::string, std::string>> raw_pairs;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      ++load.invalid_lines;
      continue;
    }
    raw_pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  for (const auto &[src, tgt] : raw_pairs) {
    try {
      Molecule a = parse_smiles(src);
      Molecule b = parse_smiles(tgt);
      if (a.canonical_form() == b.canonical_form()) {
        ++load.invalid_lines;  // source and target must differ
        continue;
      }
      CandidatePair pair;
      pair.source = intern(std::move(a));
      pair.target = intern(std::move(b));
      load.pairs.push_back(pair);
    } catch (const Error &) {
      ++load.invalid_lines;
    }
  }
  load.molecules = std::move(molecules);
  return load;
}

// ---------------------------------------------------------------------------
// CorpusIndex
// ---------------------------------------------------------------------------

CorpusIndex::CorpusIndex(const std::vector<Molecule> &molecules, int fp_radius,
                         int fp_width, int jobs)
    : molecules_(&molecules),
      fp_radius_(fp_radius),
      fp_width_(fp_width),
      fingerprints_(molecules.size()),
      scaffolds_(molecules.size()),
      trees_(molecules.size()) {
  (void)jobs;
}

const Fingerprint &CorpusIndex::fingerprint(int i) const {
  auto &slot = fingerprints_[static_cast<size_t>(i)];
  if (!slot.has_value()) slot = ecfp(molecule(i), fp_radius_, fp_width_);
  return *slot;
}

const Scaffold &CorpusIndex::scaffold(int i) const {
  auto &slot = scaffolds_[static_cast<size_t>(i)];
  if (!slot.has_value()) slot = murcko_scaffold(molecule(i));
  return *slot;
}

const JunctionTree &CorpusIndex::tree(int i) const {
  auto &slot = trees_[static_cast<size_t>(i)];
  if (!slot.has_value()) slot = junction_tree(molecule(i));
  return *slot;
}

// ---------------------------------------------------------------------------
// Mining and filters
// ---------------------------------------------------------------------------

namespace {

void sort_pairs_canonically(const CorpusIndex &index,
                            std::vector<CandidatePair> &pairs) {
  std::sort(pairs.begin(), pairs.end(),
            [&](const CandidatePair &x, const CandidatePair &y) {
              const auto kx = std::tie(index.molecule(x.source).canonical_form(),
                                       index.molecule(x.target).canonical_form());
              const auto ky = std::tie(index.molecule(y.source).canonical_form(),
                                       index.molecule(y.target).canonical_form());
              return kx < ky;
            });
}

}  // namespace

std::vector<CandidatePair> mine_pairs(const CorpusIndex &index,
                                      const PipelineConfig &config) {
  const auto &molecules = index.molecules();
  std::vector<CandidatePair> pairs;
  if (config.strategy == PairStrategy::kAllPairs) {
    if (molecules.size() > config.all_pairs_limit) {
      throw CorpusTooLarge("all-pairs mining limited to " +
                           std::to_string(config.all_pairs_limit) + " molecules");
    }
    for (size_t i = 0; i < molecules.size(); ++i) {
      for (size_t j = 0; j < molecules.size(); ++j) {
        if (i == j) continue;
        pairs.push_back({static_cast<int>(i), static_cast<int>(j), {}, {}, false,
                         false, false});
      }
    }
  } else {
    parallel_for(molecules.size(), config.jobs,
                 [&](size_t i) { index.scaffold(static_cast<int>(i)); });
    std::map<std::string, std::vector<int>> groups;
    for (size_t i = 0; i < molecules.size(); ++i) {
      groups[index.scaffold(static_cast<int>(i)).canonical_form].push_back(
          static_cast<int>(i));
    }
    for (const auto &[scaffold, members] : groups) {
      (void)scaffold;
      for (int i : members) {
        for (int j : members) {
          if (i == j) continue;
          pairs.push_back({i, j, {}, {}, false, false, false});
        }
      }
    }
  }
  sort_pairs_canonically(index, pairs);
  return pairs;
}

std::vector<PropertyProfile> annotate_profiles(
    const std::vector<Molecule> &molecules,
    const std::vector<OracleSource> &sources) {
  std::vector<PropertyProfile> profiles(molecules.size());
  for (size_t i = 0; i < molecules.size(); ++i) {
    for (const OracleSource &source : sources) {
      try {
        const PropertyProfile fragment = source.lookup(molecules[i]);
        for (const auto &[name, value] : fragment.values()) {
          profiles[i].set(name, value);
        }
      } catch (const OracleMiss &) {
        // Missing rows leave the profile partial; filters drop affected pairs.
      }
    }
  }
  return profiles;
}

std::vector<CandidatePair> filter_property(const std::vector<CandidatePair> &pairs,
                                           const std::vector<PropertyProfile> &profiles,
                                           const PipelineConfig &config,
                                           StageCounts *counts) {
  std::vector<CandidatePair> kept;
  for (CandidatePair pair : pairs) {
    const PropertyProfile &sou = profiles[static_cast<size_t>(pair.source)];
    const PropertyProfile &opt = profiles[static_cast<size_t>(pair.target)];
    bool complete = true;
    for (const PropertySpec &spec : config.specs) {
      if (!sou.has(spec.name) || !opt.has(spec.name)) {
        complete = false;
        break;
      }
    }
    if (!complete) {
      if (counts != nullptr) ++counts->oracle_miss_pairs;
      continue;
    }
    const double gain = delta_p(config.specs, sou, opt);
    if (gain < config.delta) continue;
    if (config.all_better && !all_better(config.specs, sou, opt)) continue;
    pair.gain = gain;
    pair.passed_property = true;
    kept.push_back(pair);
  }
  return kept;
}

std::vector<CandidatePair> filter_similarity(const CorpusIndex &index,
                                             const std::vector<CandidatePair> &pairs,
                                             const PipelineConfig &config) {
  const auto indices = involved_indices(pairs);
  parallel_for(indices.size(), config.jobs, [&](size_t k) {
    index.fingerprint(indices[k]);
  });
  std::vector<double> sims(pairs.size());
  parallel_for(pairs.size(), config.jobs, [&](size_t k) {
    sims[k] = tanimoto(index.fingerprint(pairs[k].source),
                       index.fingerprint(pairs[k].target));
  });
  std::vector<CandidatePair> kept;
  for (size_t k = 0; k < pairs.size(); ++k) {
    const double sim = sims[k];
    bool pass = false;
    if (config.similarity.mode == SimilarityFilter::Mode::kThreshold) {
      pass = sim >= config.similarity.gamma;
    } else {
      pass = sim >= config.similarity.window_lo && sim < config.similarity.window_hi;
    }
    if (!pass) continue;
    CandidatePair pair = pairs[k];
    pair.sim = sim;
    pair.passed_similarity = true;
    kept.push_back(pair);
  }
  return kept;
}

std::vector<CandidatePair> filter_structure(const CorpusIndex &index,
                                            const std::vector<CandidatePair> &pairs,
                                            const PipelineConfig &config,
                                            StageCounts *counts) {
  const auto indices = involved_indices(pairs);
  parallel_for(indices.size(), config.jobs,
               [&](size_t k) { index.tree(indices[k]); });

  struct Outcome {
    bool keep = false;
    bool budget_drop = false;
  };
  std::vector<Outcome> outcomes(pairs.size());
  parallel_for(pairs.size(), config.jobs, [&](size_t k) {
    const CandidatePair &pair = pairs[k];
    const EditVerdict verdict =
        dfged_le1(index.tree(pair.source), index.tree(pair.target));
    if (!verdict.is_single_fragment) return;
    const McsResult overlap = mcs(index.molecule(pair.source),
                                  index.molecule(pair.target), config.mcs_budget);
    if (!overlap.exact) {
      outcomes[k].budget_drop = true;
      return;
    }
    outcomes[k].keep = overlap.ratio >= config.gamma_mcs;
  });

  std::vector<CandidatePair> kept;
  for (size_t k = 0; k < pairs.size(); ++k) {
    if (outcomes[k].budget_drop && counts != nullptr) ++counts->mcs_budget_drops;
    if (!outcomes[k].keep) continue;
    CandidatePair pair = pairs[k];
    pair.passed_structure = true;
    kept.push_back(pair);
  }
  return kept;
}

std::vector<PreferenceTriplet> build_triplets(const CorpusIndex &index,
                                              const std::vector<CandidatePair> &pairs,
                                              const PipelineConfig &config) {
  std::vector<PreferenceTriplet> triplets;

  if (config.context == PipelineConfig::Context::kMcs) {
    // Per-pair context: the pair's common subgraph.
    for (const CandidatePair &pair : pairs) {
      PreferenceTriplet triplet;
      triplet.context = mcs_context(index.molecule(pair.source),
                                    index.molecule(pair.target), config.mcs_budget);
      triplet.better = index.molecule(pair.target).canonical_form();
      triplet.worse = index.molecule(pair.source).canonical_form();
      triplet.gain_better = pair.gain.value_or(0.0);
      triplet.gain_worse = 0.0;
      if (triplet.gain_better > triplet.gain_worse) {
        triplets.push_back(std::move(triplet));
      }
    }
  } else {
    // Candidates grouped by the scaffold of the pair source; a molecule
    // reachable by several edits keeps its best gain.
    std::map<std::string, std::map<std::string, double>> groups;
    for (const CandidatePair &pair : pairs) {
      if (!pair.gain.has_value()) continue;
      const std::string &scaffold =
          index.scaffold(pair.source).canonical_form;
      const std::string &target = index.molecule(pair.target).canonical_form();
      auto [it, inserted] = groups[scaffold].emplace(target, *pair.gain);
      if (!inserted && *pair.gain > it->second) it->second = *pair.gain;
    }
    for (const auto &[scaffold, candidates] : groups) {
      std::vector<PreferenceTriplet> group_triplets;
      for (const auto &[better, gain_better] : candidates) {
        for (const auto &[worse, gain_worse] : candidates) {
          if (gain_better > gain_worse) {
            group_triplets.push_back({scaffold, better, worse, gain_better,
                                      gain_worse});
          }
        }
      }
      if (config.triplet_cap > 0 &&
          group_triplets.size() > static_cast<size_t>(config.triplet_cap)) {
        Rng rng(hash_combine(config.seed, string_seed(scaffold)));
        rng.shuffle(group_triplets);
        group_triplets.resize(static_cast<size_t>(config.triplet_cap));
        std::sort(group_triplets.begin(), group_triplets.end(),
                  [](const PreferenceTriplet &x, const PreferenceTriplet &y) {
                    return std::tie(x.better, x.worse) < std::tie(y.better, y.worse);
                  });
      }
      triplets.insert(triplets.end(), group_triplets.begin(), group_triplets.end());
    }
  }

  std::sort(triplets.begin(), triplets.end(),
            [](const PreferenceTriplet &x, const PreferenceTriplet &y) {
              return std::tie(x.context, x.better, x.worse) <
                     std::tie(y.context, y.better, y.worse);
            });
  return triplets;
}

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

namespace {

std::string property_change_list(const std::vector<PropertySpec> &specs) {
  std::string out;
  for (size_t i = 0; i < specs.size(); ++i) {
    if (i > 0) out += ", ";
    out += specs[i].direction > 0 ? "increase " : "decrease ";
    out += specs[i].name;
  }
  return out;
}

std::string wrap_smiles(const std::string &smiles) {
  return "<smiles>" + smiles + "<smiles>";
}

}  // namespace

std::string sft_prompt(const std::vector<PropertySpec> &specs,
                       const std::string &source_smiles) {
  const bool multi = specs.size() > 1;
  std::string prompt = "You are an expert medicinal chemist.\n";
  if (multi) {
    prompt +=
        "Given a source molecule and several desired property changes, modify "
        "the molecule as little as possible while preserving its overall "
        "structure, and generate a new molecule that satisfies all of the "
        "requirements. Return only the molecule as a SMILES string wrapped in "
        "<smiles> tags, with no additional text.\n";
  } else {
    prompt +=
        "Given a source molecule and a desired property change, modify the "
        "molecule as little as possible while preserving its overall "
        "structure, and generate a new molecule that satisfies the "
        "requirement. Return only the molecule as a SMILES string wrapped in "
        "<smiles> tags, with no additional text.\n";
  }
  prompt += "Request: Given the source molecule " + wrap_smiles(source_smiles) +
            ", " + property_change_list(specs) + ".\nAnswer:";
  return prompt;
}

std::string sft_completion(const std::string &target_smiles) {
  return wrap_smiles(target_smiles);
}

std::string dpo_prompt(const std::vector<PropertySpec> &specs,
                       const std::string &context_smiles) {
  std::string prompt =
      "You are an expert medicinal chemist.\n"
      "Given a source molecule and several desired property changes, modify "
      "the molecule as little as possible while preserving its overall "
      "structure (scaffold), and generate a new molecule that satisfies all "
      "of the requirements. Return only the molecule as a SMILES string "
      "wrapped in <smiles> tags, with no additional text.\n";
  prompt += "Request: Given the source molecule " + wrap_smiles(context_smiles) +
            ", " + property_change_list(specs) + ".";
  return prompt;
}

void export_sft(const CorpusIndex &index, const std::vector<CandidatePair> &pairs,
                const std::vector<PropertySpec> &specs, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  size_t line_no = 0;
  for (const CandidatePair &pair : pairs) {
    nlohmann::json record;
    record["prompt"] =
        sft_prompt(specs, index.molecule(pair.source).canonical_form());
    record["completion"] =
        sft_completion(index.molecule(pair.target).canonical_form());
    out << record.dump() << "\n";
    ++line_no;
    if (!out) {
      throw IoError(path + ":" + std::to_string(line_no) + ": write failed");
    }
  }
}

void export_dpo(const std::vector<PreferenceTriplet> &triplets,
                const std::vector<PropertySpec> &specs, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  size_t line_no = 0;
  for (const PreferenceTriplet &triplet : triplets) {
    nlohmann::json record;
    record["prompt"] = dpo_prompt(specs, triplet.context);
    record["chosen"] = wrap_smiles(triplet.better);
    record["rejected"] = wrap_smiles(triplet.worse);
    out << record.dump() << "\n";
    ++line_no;
    if (!out) {
      throw IoError(path + ":" + std::to_string(line_no) + ": write failed");
    }
  }
}

void write_filtered_pairs(const CorpusIndex &index,
                          const std::vector<CandidatePair> &pairs,
                          const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (const CandidatePair &pair : pairs) {
    std::string flags;
    if (pair.passed_property) flags += 'P';
    if (pair.passed_similarity) flags += 'S';
    if (pair.passed_structure) flags += 'F';
    if (flags.empty()) flags = "-";
    out << index.molecule(pair.source).canonical_form() << '\t'
        << index.molecule(pair.target).canonical_form() << '\t'
        << format_value(pair.sim) << '\t' << format_value(pair.gain) << '\t'
        << flags << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Full chain and sweeps
// ---------------------------------------------------------------------------

PipelineResult run_pipeline(const CorpusIndex &index,
                            const std::vector<PropertyProfile> &profiles,
                            const PipelineConfig &config) {
  config.validate();
  PipelineResult result;
  result.counts.corpus = index.molecules().size();
  result.mined = mine_pairs(index, config);
  result.counts.mined = result.mined.size();
  result.scpt_prop = filter_property(result.mined, profiles, config, &result.counts);
  result.counts.property_survivors = result.scpt_prop.size();
  result.scpt_sim = filter_similarity(index, result.scpt_prop, config);
  result.counts.similarity_survivors = result.scpt_sim.size();
  result.scpt_sft = filter_structure(index, result.scpt_sim, config, &result.counts);
  result.counts.structure_survivors = result.scpt_sft.size();
  result.triplets = build_triplets(index, result.scpt_sft, config);
  result.counts.triplets = result.triplets.size();
  return result;
}

namespace {

double mean_of(const std::vector<double> &values) {
  if (values.empty()) return 0.0;
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

}  // namespace

SweepReport sweep(const CorpusIndex &index,
                  const std::vector<PropertyProfile> &profiles,
                  const PipelineConfig &config, SweepAxis axis,
                  size_t per_bin_sample, uint64_t seed) {
  config.validate();
  SweepReport report;
  report.axis = axis;

  PipelineConfig base = config;
  base.similarity.mode = SimilarityFilter::Mode::kWindow;

  const auto mined = mine_pairs(index, base);
  StageCounts counts;
  const auto prop = filter_property(mined, profiles, base, &counts);

  if (axis == SweepAxis::kSimilarityBins) {
    const std::vector<std::pair<double, double>> windows = {
        {0.3, 0.4}, {0.4, 0.5}, {0.5, 0.6}, {0.6, 0.7}, {0.7, 0.8}, {0.8, 0.9}};

    // Survivors per window.
    std::vector<std::vector<CandidatePair>> survivors;
    for (const auto &[lo, hi] : windows) {
      PipelineConfig win = base;
      win.similarity.window_lo = lo;
      win.similarity.window_hi = hi;
      survivors.push_back(filter_similarity(index, prop, win));
    }

    // Template strata: gain deciles of the strictest (last) window.
    std::vector<double> template_gains;
    for (const CandidatePair &pair : survivors.back()) {
      template_gains.push_back(pair.gain.value_or(0.0));
    }
    std::sort(template_gains.begin(), template_gains.end());
    constexpr int kStrata = 10;
    std::vector<double> cuts;  // kStrata - 1 internal boundaries
    for (int k = 1; k < kStrata; ++k) {
      if (template_gains.empty()) break;
      cuts.push_back(template_gains[template_gains.size() * static_cast<size_t>(k) /
                                    kStrata]);
    }
    auto stratum_of = [&](double gain) {
      int s = 0;
      for (double cut : cuts) {
        if (gain >= cut) ++s;
      }
      return s;
    };

    for (size_t w = 0; w < windows.size(); ++w) {
      SweepBin bin;
      bin.lo = windows[w].first;
      bin.hi = windows[w].second;
      bin.survivors = survivors[w].size();
      std::vector<double> sims, gains;
      for (const CandidatePair &pair : survivors[w]) {
        sims.push_back(pair.sim.value_or(0.0));
        gains.push_back(pair.gain.value_or(0.0));
      }
      bin.mean_sim = mean_of(sims);
      bin.mean_gain = mean_of(gains);

      if (per_bin_sample > 0) {
        std::vector<std::vector<size_t>> by_stratum(kStrata);
        for (size_t k = 0; k < survivors[w].size(); ++k) {
          by_stratum[static_cast<size_t>(stratum_of(gains[k]))].push_back(k);
        }
        Rng rng(hash_combine(seed, 1000 + w));
        std::vector<size_t> chosen;
        const size_t per_stratum = per_bin_sample / kStrata;
        size_t remainder = per_bin_sample % kStrata;
        for (int s = 0; s < kStrata; ++s) {
          size_t want = per_stratum + (remainder > 0 ? 1 : 0);
          if (remainder > 0) --remainder;
          auto &pool = by_stratum[static_cast<size_t>(s)];
          rng.shuffle(pool);
          for (size_t k = 0; k < std::min(want, pool.size()); ++k) {
            chosen.push_back(pool[k]);
          }
        }
        bin.sampled = chosen.size();
        bin.insufficient = bin.sampled < per_bin_sample;
        std::vector<double> sample_gains;
        for (size_t k : chosen) sample_gains.push_back(gains[k]);
        bin.mean_gain_sampled = mean_of(sample_gains);
      }
      report.bins.push_back(bin);
    }
    return report;
  }

  // Gap axis: similarity window fixed at [0.7, 0.8), gain deciles from the
  // largest gains down.
  PipelineConfig win = base;
  win.similarity.window_lo = 0.7;
  win.similarity.window_hi = 0.8;
  auto pool = filter_similarity(index, prop, win);
  std::sort(pool.begin(), pool.end(), [](const CandidatePair &x, const CandidatePair &y) {
    return x.gain.value_or(0.0) > y.gain.value_or(0.0);
  });
  constexpr int kDeciles = 9;
  for (int d = 0; d < kDeciles; ++d) {
    SweepBin bin;
    bin.lo = 0.1 * d;
    bin.hi = 0.1 * (d + 1);
    const size_t begin = pool.size() * static_cast<size_t>(d) / 10;
    const size_t end = pool.size() * static_cast<size_t>(d + 1) / 10;
    std::vector<double> sims, gains;
    for (size_t k = begin; k < end; ++k) {
      sims.push_back(pool[k].sim.value_or(0.0));
      gains.push_back(pool[k].gain.value_or(0.0));
    }
    bin.survivors = end - begin;
    bin.mean_sim = mean_of(sims);
    bin.mean_gain = mean_of(gains);
    if (per_bin_sample > 0) {
      std::vector<size_t> indices(end - begin);
      for (size_t k = 0; k < indices.size(); ++k) indices[k] = begin + k;
      Rng rng(hash_combine(seed, 2000 + static_cast<uint64_t>(d)));
      rng.shuffle(indices);
      bin.sampled = std::min(per_bin_sample, indices.size());
      bin.insufficient = bin.sampled < per_bin_sample;
      std::vector<double> sample_gains;
      for (size_t k = 0; k < bin.sampled; ++k) {
        sample_gains.push_back(pool[indices[k]].gain.value_or(0.0));
      }
      bin.mean_gain_sampled = mean_of(sample_gains);
    }
    report.bins.push_back(bin);
  }
  return report;
}

}  // namespace scpt
