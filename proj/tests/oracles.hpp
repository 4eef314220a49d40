// Brute-force reference implementations used only by tests. Each oracle
// recomputes a result via explicit enumeration, independent of the library
// code path it checks.
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "scpt/fingerprint.hpp"
#include "scpt/molgraph.hpp"

namespace testoracle {

// Every simple cycle of the molecular graph, as atom-index lists.
std::vector<std::vector<int>> enumerate_simple_cycles(const scpt::Molecule &m);

// Total edge count of a minimum cycle basis of rank k, found by greedy
// GF(2)-independent selection over the full cycle enumeration (matroid
// greedy is exact for minimum weight bases).
size_t minimum_cycle_basis_weight(const scpt::Molecule &m, int rank);

// Set-based Tanimoto: materializes explicit bit-index sets and applies the
// definition |A∩B| / |A∪B| directly.
double tanimoto_via_sets(const scpt::Fingerprint &a, const scpt::Fingerprint &b);

// Unfolded circular-fingerprint reference: for each atom and each radius it
// re-extracts the r-neighborhood as an explicit subgraph copy and computes
// the canonical environment code by recursive descent on that copy, then
// folds. No dynamic programming, no shared traversal state.
std::vector<uint64_t> ecfp_codes_by_subgraph_extraction(const scpt::Molecule &m,
                                                        int radius);

// Exact maximum common connected induced subgraph size (atom count) by
// exhaustive enumeration of connected atom subsets of the smaller molecule
// and exhaustive injective matching into the larger. Intended for molecules
// of at most ~12 atoms.
int exhaustive_mcs_atoms(const scpt::Molecule &a, const scpt::Molecule &b);

}  // namespace testoracle
