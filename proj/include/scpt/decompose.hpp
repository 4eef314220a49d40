#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scpt/molgraph.hpp"

namespace scpt {

// Bemis-Murcko scaffold: ring systems plus linker paths, all acyclic side
// chains pruned. Acyclic molecules have an empty scaffold.
struct Scaffold {
  std::string canonical_form;
  bool operator==(const Scaffold &) const = default;
  bool empty() const { return canonical_form.empty(); }
};

Scaffold murcko_scaffold(const Molecule &m);

// Fragment tree: nodes are fused-ring clusters and non-ring bonds; edges join
// fragments sharing an atom. Labels are canonical fragment strings with one
// "[*]" placeholder per external bond. Node order, labels and edges are
// invariant under renumbering of the parent molecule's atoms.
struct JunctionTree {
  struct Node {
    std::string label;
    std::vector<int> atoms;  // member atom indices in the parent molecule
    int attachments = 0;     // number of [*] placeholders in the label
  };
  std::vector<Node> nodes;
  std::vector<std::pair<int, int>> edges;

  std::vector<std::vector<int>> adjacency() const;
};

JunctionTree junction_tree(const Molecule &m);

struct EditVerdict {
  bool distance_le_one = false;
  bool is_single_fragment = false;
  // (source fragment label, target fragment label) for the substitution case.
  std::optional<std::pair<std::string, std::string>> substitution;
};

// Decision procedure for fragment edit distance <= 1 between junction trees:
// distance 0 (label-preserving isomorphism), one node substitution, or one
// leaf insertion/deletion. is_single_fragment holds only for a substitution
// whose two fragments have equal attachment counts (the remaining tree
// already matches label-for-label).
EditVerdict dfged_le1(const JunctionTree &a, const JunctionTree &b);

// Exact unit-cost edit distance (insert/delete/substitute fragments, plus
// unit cost per unmatched adjacency between kept fragments) by exhaustive
// mapping search. Test oracle; trees of more than 8 nodes are rejected.
int exhaustive_tree_ged(const JunctionTree &a, const JunctionTree &b);

struct McsResult {
  int atoms = 0;     // atom count of the largest common subgraph found
  double ratio = 0;  // atoms / max(|a|, |b|)
  bool exact = true; // false when the expansion budget ran out
  std::vector<std::pair<int, int>> mapping;  // (atom in a, atom in b)
};

// Maximum common connected induced subgraph under (element, aromaticity,
// bond-order) compatibility, by backtracking over atom mappings. The budget
// caps search-tree expansions; on exhaustion the best mapping found so far is
// returned with exact = false.
McsResult mcs(const Molecule &a, const Molecule &b, long budget = 1000000);

double mcs_ratio(const Molecule &a, const Molecule &b, long budget = 1000000);

// Canonical string of the common subgraph (with hydrogen counts relaxed to
// absorb severed bonds). Context string for MCS-keyed triplets.
std::string mcs_context(const Molecule &a, const Molecule &b,
                        long budget = 1000000);

}  // namespace scpt
