#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace scpt {

enum class BondOrder : uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

// Integer weight of a bond for valence accounting. Aromatic counts as one;
// aromatic atoms get an extra unit added separately.
int bond_order_units(BondOrder order);

struct Atom {
  std::string element;  // "C", "Cl", ... or "*" for attachment placeholders
  int charge = 0;
  bool aromatic = false;
  int hydrogens = 0;  // resolved implicit+explicit H count, never negative
  bool in_ring = false;
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::kSingle;
  bool in_ring = false;

  int other(int atom) const { return atom == a ? b : a; }
};

// Immutable attributed molecular graph. Construction runs ring perception and
// canonicalization eagerly, so instances are safe to share across threads.
class Molecule {
 public:
  Molecule() = default;

  int atom_count() const { return static_cast<int>(atoms_.size()); }
  int bond_count() const { return static_cast<int>(bonds_.size()); }
  const Atom &atom(int i) const { return atoms_[static_cast<size_t>(i)]; }
  const Bond &bond(int i) const { return bonds_[static_cast<size_t>(i)]; }
  const std::vector<Atom> &atoms() const { return atoms_; }
  const std::vector<Bond> &bonds() const { return bonds_; }

  // Bond indices incident to atom i.
  const std::vector<int> &bonds_of(int i) const {
    return adjacency_[static_cast<size_t>(i)];
  }
  int degree(int i) const {
    return static_cast<int>(adjacency_[static_cast<size_t>(i)].size());
  }
  // Bond between two atoms, or -1.
  int bond_between(int a, int b) const;

  // Minimum cycle basis; each ring is an atom-index cycle in traversal order.
  const std::vector<std::vector<int>> &rings() const { return rings_; }

  const std::string &canonical_form() const { return canonical_; }

  // Canonical rank of each atom (a permutation-invariant total order).
  const std::vector<int> &canonical_ranks() const { return canonical_ranks_; }

  bool empty() const { return atoms_.empty(); }

 private:
  friend class MolBuilder;

  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<std::vector<int>> rings_;
  std::vector<int> canonical_ranks_;
  std::string canonical_;
};

// Incremental construction for the parser and for graph surgery
// (fragments, scaffolds, grafts). finalize() validates and seals the graph.
class MolBuilder {
 public:
  struct Options {
    // Resolve hydrogen counts for atoms added with implicit_h = true.
    bool assign_implicit_hydrogens = true;
    // Enforce valence caps and aromatic-atoms-in-rings. Programmatic
    // fragments with placeholders need this off.
    bool strict = true;
    // Detect Kekule-form aromatic rings and normalize them to aromatic form.
    bool aromatize = true;
  };

  int add_atom(Atom atom, bool implicit_h = false);
  void add_bond(int a, int b, BondOrder order);

  Molecule finalize() { return finalize(Options{}); }
  Molecule finalize(const Options &options);

 private:
  std::vector<Atom> atoms_;
  std::vector<bool> pending_h_;
  std::vector<Bond> bonds_;
};

struct ParseOptions {
  // Accept "[*]" placeholder atoms and aromatic atoms outside rings;
  // used for fragment labels, never for corpus input.
  bool allow_wildcard = false;
};

// Parses the supported SMILES subset: organic-subset atoms, aromatic
// lowercase, brackets with charge and H-count, branches, ring closures
// (including %nn), bond symbols - = # : and directional / \ (accepted,
// treated as single). Rejects isotopes, atom maps, wildcards and
// multi-component input.
Molecule parse_smiles(std::string_view text, const ParseOptions &options = {});

// Splits on '.' and parses each component.
std::vector<Molecule> parse_smiles_components(std::string_view text,
                                              const ParseOptions &options = {});

// Deterministic canonical string. Byte-identical for isomorphic graphs;
// re-parsing yields an isomorphic graph. Ranking is iterative
// neighborhood-rank refinement over (element, charge, degree, H count,
// aromaticity, ring membership) with lexicographic tie resolution by
// exploring every split of the first ambiguous class and keeping the
// smallest resulting string.
std::string canonicalize(const Molecule &m);

// The stored minimum cycle basis (computed at construction).
const std::vector<std::vector<int>> &perceive_rings(const Molecule &m);

// True if the two molecules are isomorphic as attributed graphs. Uses
// canonical forms.
bool isomorphic(const Molecule &a, const Molecule &b);

// Renumbers atoms by `perm` (new index = perm[old index]); test helper for
// canonical-invariance checks.
Molecule permute_atoms(const Molecule &m, const std::vector<int> &perm);

namespace detail {
// Hydrogen count implied by the default valence list for an organic-subset
// element given the integer bond weight sum (aromatic increment included).
// Returns -1 when the element has no default valence.
int organic_implicit_hydrogens(const std::string &element, bool aromatic,
                               int bond_units);
bool organic_subset_element(const std::string &element);
}  // namespace detail

}  // namespace scpt
