#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scpt/decompose.hpp"
#include "scpt/molgraph.hpp"
#include "scpt/properties.hpp"

namespace scpt {

// Fragment vocabulary harvested from a corpus via junction trees. Labels are
// canonical fragment strings; fragments with zero attachments (whole
// molecules) are not collected. Terminal bond fragments additionally keep the
// structural data needed to splice them onto another molecule.
class FragmentLibrary {
 public:
  struct Entry {
    std::string label;
    int attachments = 0;
  };
  // A non-ring bond fragment whose private atom is a terminal heavy atom;
  // all attachments sit on the anchor.
  struct TerminalFragment {
    std::string label;
    Atom anchor;
    Atom terminal;
    BondOrder order = BondOrder::kSingle;
    int attachments = 0;
  };

  const std::vector<Entry> &fragments() const { return fragments_; }
  const std::vector<TerminalFragment> &terminal_fragments() const {
    return terminal_;
  }
  std::vector<const TerminalFragment *> terminal_with_attachments(int k) const;

  void add_molecule(const Molecule &m);
  size_t size() const { return fragments_.size(); }

 private:
  std::vector<Entry> fragments_;
  std::vector<TerminalFragment> terminal_;
};

FragmentLibrary harvest_fragments(const std::vector<Molecule> &corpus);

// Similarity-anchored objective: Tan(ecfp(x), ecfp(x0)) plus the weighted
// directional property score of x. Oracle misses make the candidate
// infeasible (-infinity).
double fitness(const Molecule &x, const Molecule &x0,
               const std::vector<PropertySpec> &specs,
               const std::vector<OracleSource> &oracles, int fp_radius = 2,
               int fp_width = 2048);

// Single-fragment substitution moves: replaces one terminal bond fragment of
// x with a library fragment of equal attachment count and matching anchor.
// Invalid reassemblies are discarded; the list is deduplicated, sorted by
// canonical form and capped at max_moves.
std::vector<Molecule> neighbors(const Molecule &x, const FragmentLibrary &library,
                                size_t max_moves = 64);

struct SearchState {
  Molecule current;
  Molecule source;
  double fitness = 0.0;
  int step = 0;
  uint64_t rng_seed = 0;
};

struct TraceRow {
  int step = 0;
  std::string smiles;
  double fitness = 0.0;
  double sim = 0.0;
};

struct ClimbResult {
  Molecule best;
  std::vector<TraceRow> trace;  // row 0 is the source molecule
};

// Best-improvement hill climbing over neighbors(). `budget` caps accepted
// moves; the search also stops when no neighbor strictly improves fitness.
// The seed only breaks exact fitness ties, so runs are deterministic.
ClimbResult hill_climb(const Molecule &x0, const FragmentLibrary &library,
                       const std::vector<PropertySpec> &specs,
                       const std::vector<OracleSource> &oracles, int budget,
                       uint64_t seed, size_t max_moves = 64, int fp_radius = 2,
                       int fp_width = 2048);

void write_trace_tsv(const std::string &path, const std::vector<TraceRow> &trace);

}  // namespace scpt
