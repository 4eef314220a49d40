#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scpt/decompose.hpp"
#include "scpt/fingerprint.hpp"
#include "scpt/molgraph.hpp"
#include "scpt/properties.hpp"

namespace scpt {

// Ordered molecule pair, by index into a corpus. Similarity and gain are
// filled by the filters that compute them; flags record which stages passed.
struct CandidatePair {
  int source = -1;
  int target = -1;
  std::optional<double> sim;
  std::optional<double> gain;
  bool passed_property = false;
  bool passed_similarity = false;
  bool passed_structure = false;
};

// <context, better, worse> with the directional gains that ranked them.
struct PreferenceTriplet {
  std::string context;  // scaffold canonical form (or MCS context string)
  std::string better;   // canonical SMILES
  std::string worse;
  double gain_better = 0.0;
  double gain_worse = 0.0;
};

enum class PairStrategy { kScaffoldBlocked, kAllPairs };

struct SimilarityFilter {
  enum class Mode { kThreshold, kWindow };
  Mode mode = Mode::kThreshold;
  double gamma = 0.6;      // threshold mode: keep Tan >= gamma
  double window_lo = 0.0;  // window mode: keep lo <= Tan < hi
  double window_hi = 1.0;
};

struct PipelineConfig {
  std::vector<PropertySpec> specs;
  double delta = 0.0;  // property margin; pairs kept when gain >= delta
  bool all_better = false;
  SimilarityFilter similarity;
  double gamma_mcs = 0.9;
  long mcs_budget = 1000000;
  PairStrategy strategy = PairStrategy::kScaffoldBlocked;
  size_t all_pairs_limit = 2000;
  int triplet_cap = 0;  // per scaffold group; 0 = unlimited
  uint64_t seed = 0;
  enum class Context { kScaffold, kMcs };
  Context context = Context::kScaffold;
  int fp_radius = 2;
  int fp_width = 2048;
  int jobs = 1;

  void validate() const;  // throws ConfigError on violated invariants
};

// One-SMILES-per-line corpus, trailing tab-separated fields ignored. Invalid
// lines are skipped and counted; duplicates (by canonical form) dropped. The
// result is sorted by canonical form so all downstream order is input-order
// independent.
struct CorpusLoad {
  std::vector<Molecule> molecules;
  size_t total_lines = 0;
  size_t invalid_lines = 0;
  size_t duplicates = 0;
};
CorpusLoad load_corpus_lines(const std::vector<std::string> &lines,
                             bool split_components = false);
CorpusLoad load_corpus_file(const std::string &path,
                            bool split_components = false);

// Pre-mined pair file: "src_smiles<TAB>tgt_smiles" per line. Returns the
// deduplicated molecule union plus index pairs.
struct PairFileLoad {
  std::vector<Molecule> molecules;
  std::vector<CandidatePair> pairs;
  size_t invalid_lines = 0;
};
PairFileLoad load_pair_file(const std::string &path);

// Cached per-molecule context shared by the filters.
class CorpusIndex {
 public:
  CorpusIndex(const std::vector<Molecule> &molecules, int fp_radius,
              int fp_width, int jobs = 1);

  const std::vector<Molecule> &molecules() const { return *molecules_; }
  const Molecule &molecule(int i) const { return (*molecules_)[static_cast<size_t>(i)]; }
  const Fingerprint &fingerprint(int i) const;
  const Scaffold &scaffold(int i) const;
  const JunctionTree &tree(int i) const;

 private:
  const std::vector<Molecule> *molecules_;
  int fp_radius_;
  int fp_width_;
  mutable std::vector<std::optional<Fingerprint>> fingerprints_;
  mutable std::vector<std::optional<Scaffold>> scaffolds_;
  mutable std::vector<std::optional<JunctionTree>> trees_;
};

// Pair mining. Scaffold-blocked (default): ordered pairs within each
// Bemis-Murcko scaffold group. All-pairs: every ordered pair, guarded by
// `all_pairs_limit` (CorpusTooLarge beyond). Output is sorted by
// (source canonical, target canonical).
std::vector<CandidatePair> mine_pairs(const CorpusIndex &index,
                                      const PipelineConfig &config);

struct StageCounts {
  size_t corpus = 0;
  size_t mined = 0;
  size_t property_survivors = 0;
  size_t similarity_survivors = 0;
  size_t structure_survivors = 0;
  size_t triplets = 0;
  size_t oracle_miss_pairs = 0;
  size_t mcs_budget_drops = 0;
};

// Per-molecule profiles from the configured oracle sources. Molecules a
// source cannot score simply lack that source's names.
std::vector<PropertyProfile> annotate_profiles(
    const std::vector<Molecule> &molecules,
    const std::vector<OracleSource> &sources);

// SCPT_prop: keeps pairs with delta_p >= delta (and the all-better criterion
// when configured); annotates gain. Pairs missing any referenced property are
// dropped and counted.
std::vector<CandidatePair> filter_property(const std::vector<CandidatePair> &pairs,
                                           const std::vector<PropertyProfile> &profiles,
                                           const PipelineConfig &config,
                                           StageCounts *counts = nullptr);

// SCPT_sim: threshold keeps Tan >= gamma, window keeps lo <= Tan < hi;
// annotates sim.
std::vector<CandidatePair> filter_similarity(const CorpusIndex &index,
                                             const std::vector<CandidatePair> &pairs,
                                             const PipelineConfig &config);

// SCPT_SFT: keeps single-fragment substitutions with MCS ratio >= gamma_mcs.
// Budget-exhausted MCS drops the pair (and counts it).
std::vector<CandidatePair> filter_structure(const CorpusIndex &index,
                                            const std::vector<CandidatePair> &pairs,
                                            const PipelineConfig &config,
                                            StageCounts *counts = nullptr);

// SCPT_DPO: groups pair targets by the scaffold of the pair source, ranks by
// gain, and emits ordered triplets (strictly greater gain wins), sampled down
// to `triplet_cap` per group with the config seed. With Context::kMcs the
// context is the pair's common-subgraph string and triplets are per-pair.
std::vector<PreferenceTriplet> build_triplets(const CorpusIndex &index,
                                              const std::vector<CandidatePair> &pairs,
                                              const PipelineConfig &config);

// Verbatim prompt templates with <smiles> wrapping.
std::string sft_prompt(const std::vector<PropertySpec> &specs,
                       const std::string &source_smiles);
std::string sft_completion(const std::string &target_smiles);
std::string dpo_prompt(const std::vector<PropertySpec> &specs,
                       const std::string &context_smiles);

// Line-delimited JSON records: {"prompt","completion"} per surviving pair,
// {"prompt","chosen","rejected"} per triplet. Writes to `path`.
void export_sft(const CorpusIndex &index, const std::vector<CandidatePair> &pairs,
                const std::vector<PropertySpec> &specs, const std::string &path);
void export_dpo(const std::vector<PreferenceTriplet> &triplets,
                const std::vector<PropertySpec> &specs, const std::string &path);

// TSV "src<TAB>tgt<TAB>sim<TAB>gain<TAB>stage_flags".
void write_filtered_pairs(const CorpusIndex &index,
                          const std::vector<CandidatePair> &pairs,
                          const std::string &path);

struct PipelineResult {
  std::vector<CandidatePair> mined;
  std::vector<CandidatePair> scpt_prop;
  std::vector<CandidatePair> scpt_sim;
  std::vector<CandidatePair> scpt_sft;
  std::vector<PreferenceTriplet> triplets;
  StageCounts counts;
};

// Full Algorithm-1 chain: mine, property, similarity, structure, triplets.
PipelineResult run_pipeline(const CorpusIndex &index,
                            const std::vector<PropertyProfile> &profiles,
                            const PipelineConfig &config);

// Knob sweeps. Similarity axis: six windows 0.3-0.4 ... 0.8-0.9, property
// filter applied first, gain distribution matched to the 0.8-0.9 template bin
// by 10-stratum sampling. Gap axis: gain deciles (row 0 = largest gains) with
// the similarity window fixed at [0.7, 0.8).
enum class SweepAxis { kSimilarityBins, kGapBins };

struct SweepBin {
  double lo = 0.0;  // window bounds (similarity axis) or decile rank (gap axis)
  double hi = 0.0;
  size_t survivors = 0;
  size_t sampled = 0;
  double mean_sim = 0.0;
  double mean_gain = 0.0;          // over all survivors in the bin
  double mean_gain_sampled = 0.0;  // over the matched sample
  bool insufficient = false;       // bin could not fill per_bin_sample
};

struct SweepReport {
  SweepAxis axis = SweepAxis::kSimilarityBins;
  std::vector<SweepBin> bins;
};

SweepReport sweep(const CorpusIndex &index,
                  const std::vector<PropertyProfile> &profiles,
                  const PipelineConfig &config, SweepAxis axis,
                  size_t per_bin_sample, uint64_t seed);

}  // namespace scpt
