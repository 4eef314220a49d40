#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "scpt/errors.hpp"
#include "scpt/molgraph.hpp"
#include "scpt/rng.hpp"

using namespace scpt;

TEST_CASE("parse_smiles basic chains") {
  Molecule m = parse_smiles("CCO");
  CHECK(m.atom_count() == 3);
  CHECK(m.bond_count() == 2);
  CHECK(m.rings().empty());
  CHECK(m.atom(0).element == "C");
  CHECK(m.atom(2).element == "O");
  CHECK(m.atom(0).hydrogens == 3);
  CHECK(m.atom(1).hydrogens == 2);
  CHECK(m.atom(2).hydrogens == 1);
}

TEST_CASE("parse_smiles benzene") {
  Molecule m = parse_smiles("c1ccccc1");
  CHECK(m.atom_count() == 6);
  REQUIRE(m.rings().size() == 1);
  CHECK(m.rings()[0].size() == 6);
  for (const Atom &a : m.atoms()) {
    CHECK(a.aromatic);
    CHECK(a.element == "C");
    CHECK(a.hydrogens == 1);
    CHECK(a.in_ring);
  }
}

TEST_CASE("parse_smiles ring plus substituent satisfies Euler formula") {
  Molecule m = parse_smiles("C1CC1C");
  CHECK(m.atom_count() == 4);
  CHECK(m.bond_count() == 4);
  REQUIRE(m.rings().size() == 1);
  CHECK(m.rings()[0].size() == 3);
}

TEST_CASE("parse_smiles branches, charges and bracket atoms") {
  Molecule m = parse_smiles("CC(=O)[O-]");
  CHECK(m.atom_count() == 4);
  CHECK(m.atom(3).charge == -1);
  CHECK(m.atom(3).hydrogens == 0);

  Molecule ammonium = parse_smiles("[NH4+]");
  CHECK(ammonium.atom(0).hydrogens == 4);
  CHECK(ammonium.atom(0).charge == 1);

  Molecule pyrrole = parse_smiles("c1cc[nH]c1");
  CHECK(pyrrole.atom_count() == 5);
  int n_index = -1;
  for (int i = 0; i < pyrrole.atom_count(); ++i) {
    if (pyrrole.atom(i).element == "N") n_index = i;
  }
  REQUIRE(n_index >= 0);
  CHECK(pyrrole.atom(n_index).hydrogens == 1);
}

TEST_CASE("parse_smiles accepts and discards stereo markers") {
  Molecule m = parse_smiles("C/C=C/C");
  CHECK(m.atom_count() == 4);
  CHECK(m.bond(1).order == BondOrder::kDouble);
  Molecule chiral = parse_smiles("N[C@H](C)C(=O)O");
  CHECK(chiral.atom_count() == 6);
}

TEST_CASE("parse_smiles percent ring closures") {
  // Two fused rings written with %10-style closures.
  Molecule a = parse_smiles("C%10CC%10");
  Molecule b = parse_smiles("C1CC1");
  CHECK(a.canonical_form() == b.canonical_form());
}

TEST_CASE("parse_smiles error paths") {
  CHECK_THROWS_AS(parse_smiles(""), SyntaxError);
  CHECK_THROWS_AS(parse_smiles("C(C"), SyntaxError);
  CHECK_THROWS_AS(parse_smiles("C)C"), SyntaxError);
  CHECK_THROWS_AS(parse_smiles("C1CC"), SyntaxError);       // dangling closure
  CHECK_THROWS_AS(parse_smiles("[CH"), SyntaxError);        // unterminated
  CHECK_THROWS_AS(parse_smiles("C="), SyntaxError);         // dangling bond
  CHECK_THROWS_AS(parse_smiles("C=)C"), SyntaxError);
  CHECK_THROWS_AS(parse_smiles("C12CC12"), SyntaxError);    // duplicate bond
  CHECK_THROWS_AS(parse_smiles("C11"), SyntaxError);        // self closure
  CHECK_THROWS_AS(parse_smiles("C(=O)(=O)(=O)F"), ValenceError);
  CHECK_THROWS_AS(parse_smiles("O=O=O"), ValenceError);
  CHECK_THROWS_AS(parse_smiles("[13C]"), UnsupportedFeature);
  CHECK_THROWS_AS(parse_smiles("[C:4]"), UnsupportedFeature);
  CHECK_THROWS_AS(parse_smiles("C*"), UnsupportedFeature);
  CHECK_THROWS_AS(parse_smiles("[*]C"), UnsupportedFeature);
  CHECK_THROWS_AS(parse_smiles("CC.CC"), UnsupportedFeature);
  CHECK_THROWS_AS(parse_smiles("cC"), SyntaxError);  // aromatic atom, no ring
}

TEST_CASE("parse_smiles wildcard allowed for fragment labels") {
  ParseOptions options;
  options.allow_wildcard = true;
  Molecule m = parse_smiles("[*]CO", options);
  CHECK(m.atom_count() == 3);
  CHECK(m.atom(0).element == "*");
}

TEST_CASE("multi-component split") {
  auto parts = parse_smiles_components("CCO.CCN");
  REQUIRE(parts.size() == 2);
  CHECK(parts[0].atom_count() == 3);
  CHECK(parts[1].atom_count() == 3);
}

TEST_CASE("canonicalize merges traversal orders") {
  CHECK(parse_smiles("OCC").canonical_form() == parse_smiles("CCO").canonical_form());
  CHECK(parse_smiles("C(C)O").canonical_form() == parse_smiles("CCO").canonical_form());
  CHECK(parse_smiles("c1ccccc1").canonical_form() ==
        parse_smiles("c1ccccc1").canonical_form());

  // Idempotence: canonicalizing a canonical form is a fixed point.
  const std::string canon = parse_smiles("CC(=O)Nc1ccc(O)cc1").canonical_form();
  CHECK(parse_smiles(canon).canonical_form() == canon);
}

TEST_CASE("kekule and aromatic dialects normalize to one form") {
  CHECK(parse_smiles("C1=CC=CC=C1").canonical_form() ==
        parse_smiles("c1ccccc1").canonical_form());
  CHECK(parse_smiles("C1=CC=CN1").canonical_form() ==
        parse_smiles("c1cc[nH]c1").canonical_form());
  CHECK(parse_smiles("C1=CC=CO1").canonical_form() ==
        parse_smiles("c1ccoc1").canonical_form());
  CHECK(parse_smiles("C1=CC=NC=C1").canonical_form() ==
        parse_smiles("c1ccncc1").canonical_form());
  // Non-aromatic rings stay untouched.
  CHECK(parse_smiles("C1=CCCCC1").canonical_form() !=
        parse_smiles("c1ccccc1").canonical_form());
}

TEST_CASE("canonical invariance under 500 random atom permutations") {
  // 12-atom molecule with a ring, an ester and an ortho methyl.
  const Molecule base = parse_smiles("CCOC(=O)c1ccccc1C");
  REQUIRE(base.atom_count() == 12);
  const std::string expected = base.canonical_form();
  Rng rng(20240811);
  std::vector<int> perm(static_cast<size_t>(base.atom_count()));
  std::iota(perm.begin(), perm.end(), 0);
  for (int trial = 0; trial < 500; ++trial) {
    rng.shuffle(perm);
    Molecule shuffled = permute_atoms(base, perm);
    CHECK(shuffled.canonical_form() == expected);
  }
}

TEST_CASE("round trip over a varied corpus") {
  const std::vector<std::string> corpus = {
      "CCO",
      "CC(C)CC",
      "c1ccccc1",
      "Cc1ccccc1",
      "c1ccc2ccccc2c1",
      "CC(=O)Nc1ccc(O)cc1",
      "C1CC2CCC12",
      "O=C(O)c1ccccc1O",
      "CN1CCC[C@H]1c1cccnc1",
      "ClC(Cl)(Cl)Cl",
      "C#N",
      "CC(=O)[O-]",
      "[NH3+]CC(=O)[O-]",
      "c1ccsc1",
      "c1ccoc1",
      "c1cc[nH]c1",
      "C1=CC=CC=C1",
      "CC1(C)CCCC1",
      "N#Cc1ccccc1",
      "FC(F)(F)c1ccc(Br)cc1",
      "S=C=S",
      "OCC1OC(O)C(O)C(O)C1O",
  };
  for (const std::string &s : corpus) {
    CAPTURE(s);
    Molecule m = parse_smiles(s);
    Molecule again = parse_smiles(m.canonical_form());
    CHECK(isomorphic(m, again));
    CHECK(again.canonical_form() == m.canonical_form());
    // Ring count equals the cyclomatic number.
    CHECK(static_cast<int>(m.rings().size()) ==
          m.bond_count() - m.atom_count() + 1);
  }
}

TEST_CASE("perceive_rings bicyclic basis verified by exhaustive enumeration") {
  Molecule m = parse_smiles("C1CC2CCC12");
  REQUIRE(m.rings().size() == 2);
  CHECK(m.bond_count() - m.atom_count() + 1 == 2);

  // Exhaustive check: every basis cycle is a real simple cycle, the basis is
  // independent, and its total length matches the minimum over all bases
  // found by enumerating every simple cycle.
  const auto all = testoracle::enumerate_simple_cycles(m);
  size_t basis_total = 0;
  for (const auto &ring : m.rings()) {
    basis_total += ring.size();
    bool found = false;
    for (const auto &cycle : all) {
      if (cycle.size() == ring.size() &&
          std::set<int>(cycle.begin(), cycle.end()) ==
              std::set<int>(ring.begin(), ring.end())) {
        found = true;
      }
    }
    CHECK(found);
  }
  CHECK(basis_total == testoracle::minimum_cycle_basis_weight(m, 2));

  for (const Bond &b : m.bonds()) CHECK(b.in_ring);
}

TEST_CASE("acyclic molecules have no rings and no in_ring flags") {
  Molecule m = parse_smiles("CCO");
  CHECK(perceive_rings(m).empty());
  for (const Bond &b : m.bonds()) CHECK_FALSE(b.in_ring);
  for (const Atom &a : m.atoms()) CHECK_FALSE(a.in_ring);
}

TEST_CASE("spiro and fused ring perception") {
  Molecule spiro = parse_smiles("C1CCC2(CC1)CCCCC2");
  CHECK(spiro.rings().size() == 2);
  Molecule naphthalene = parse_smiles("c1ccc2ccccc2c1");
  CHECK(naphthalene.rings().size() == 2);
  for (const auto &ring : naphthalene.rings()) CHECK(ring.size() == 6);
}
