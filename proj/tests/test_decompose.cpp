#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "scpt/decompose.hpp"
#include "scpt/errors.hpp"
#include "scpt/molgraph.hpp"
#include "scpt/rng.hpp"

using namespace scpt;

namespace {

JunctionTree random_tree(Rng &rng, int max_nodes,
                         const std::vector<std::string> &pool) {
  JunctionTree tree;
  const int n = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(max_nodes)));
  for (int i = 0; i < n; ++i) {
    JunctionTree::Node node;
    node.label = pool[rng.below(pool.size())];
    node.attachments = 1 + static_cast<int>(rng.below(3));
    tree.nodes.push_back(node);
    if (i > 0) tree.edges.emplace_back(static_cast<int>(rng.below(static_cast<uint64_t>(i))), i);
  }
  return tree;
}

// Applies `edits` random node relabels / leaf additions / leaf removals.
JunctionTree mutate_tree(Rng &rng, JunctionTree tree, int edits,
                         const std::vector<std::string> &pool) {
  for (int e = 0; e < edits; ++e) {
    const uint64_t kind = rng.below(3);
    if (kind == 0 || tree.nodes.size() <= 1) {
      auto &node = tree.nodes[rng.below(tree.nodes.size())];
      node.label = pool[rng.below(pool.size())];
    } else if (kind == 1) {
      JunctionTree::Node node;
      node.label = pool[rng.below(pool.size())];
      node.attachments = 1;
      const int parent = static_cast<int>(rng.below(tree.nodes.size()));
      tree.nodes.push_back(node);
      tree.edges.emplace_back(parent, static_cast<int>(tree.nodes.size()) - 1);
    } else {
      auto adj = tree.adjacency();
      std::vector<int> leaves;
      for (size_t i = 0; i < adj.size(); ++i) {
        if (adj[i].size() <= 1) leaves.push_back(static_cast<int>(i));
      }
      const int drop = leaves[rng.below(leaves.size())];
      JunctionTree pruned;
      std::vector<int> remap(tree.nodes.size(), -1);
      for (size_t i = 0; i < tree.nodes.size(); ++i) {
        if (static_cast<int>(i) == drop) continue;
        remap[i] = static_cast<int>(pruned.nodes.size());
        pruned.nodes.push_back(tree.nodes[i]);
      }
      for (auto [x, y] : tree.edges) {
        if (x == drop || y == drop) continue;
        pruned.edges.emplace_back(remap[static_cast<size_t>(x)], remap[static_cast<size_t>(y)]);
      }
      tree = std::move(pruned);
    }
  }
  return tree;
}

}  // namespace

TEST_CASE("murcko scaffold of acyclic molecules is empty") {
  CHECK(murcko_scaffold(parse_smiles("CCO")).empty());
  CHECK(murcko_scaffold(parse_smiles("CC(C)CC(=O)O")).empty());
}

TEST_CASE("murcko scaffold strips side chains") {
  const Scaffold toluene = murcko_scaffold(parse_smiles("Cc1ccccc1"));
  CHECK(toluene.canonical_form == parse_smiles("c1ccccc1").canonical_form());

  // Two rings, two-atom linker, terminal methyl pruned.
  const Scaffold bridged = murcko_scaffold(parse_smiles("c1ccccc1CCc1ccccc1C"));
  CHECK(bridged.canonical_form ==
        parse_smiles("c1ccccc1CCc1ccccc1").canonical_form());
}

TEST_CASE("murcko scaffold is idempotent and renumbering-invariant") {
  const std::vector<std::string> corpus = {
      "Cc1ccccc1", "CC(=O)Nc1ccc(O)cc1", "c1ccccc1CCc1ccccc1C",
      "OC1CCC(CC1)c1cccnc1", "CC1CC1c1ccco1"};
  Rng rng(4242);
  for (const auto &s : corpus) {
    CAPTURE(s);
    const Molecule m = parse_smiles(s);
    const Scaffold scaffold = murcko_scaffold(m);
    REQUIRE_FALSE(scaffold.empty());
    CHECK(murcko_scaffold(parse_smiles(scaffold.canonical_form)).canonical_form ==
          scaffold.canonical_form);

    std::vector<int> perm(static_cast<size_t>(m.atom_count()));
    std::iota(perm.begin(), perm.end(), 0);
    for (int trial = 0; trial < 10; ++trial) {
      rng.shuffle(perm);
      CHECK(murcko_scaffold(permute_atoms(m, perm)).canonical_form ==
            scaffold.canonical_form);
    }
  }
}

TEST_CASE("junction tree of a chain is a path of bond fragments") {
  const JunctionTree tree = junction_tree(parse_smiles("CCO"));
  REQUIRE(tree.nodes.size() == 2);
  CHECK(tree.edges.size() == 1);
  std::set<std::string> labels{tree.nodes[0].label, tree.nodes[1].label};
  CHECK(labels.count("CC[*]") + labels.count("[*]CC") == 1);
}

TEST_CASE("junction tree ring plus exocyclic bond") {
  const JunctionTree tree = junction_tree(parse_smiles("C1CC1C"));
  REQUIRE(tree.nodes.size() == 2);
  CHECK(tree.edges.size() == 1);
  int ring_nodes = 0;
  for (const auto &node : tree.nodes) {
    if (node.atoms.size() == 3) ++ring_nodes;
  }
  CHECK(ring_nodes == 1);
}

TEST_CASE("junction tree counts for substituted rings") {
  // k substituent bonds on one ring -> 1 + k nodes.
  CHECK(junction_tree(parse_smiles("Cc1ccccc1")).nodes.size() == 2);
  CHECK(junction_tree(parse_smiles("Cc1ccccc1C")).nodes.size() == 3);
  CHECK(junction_tree(parse_smiles("Cc1cc(N)ccc1O")).nodes.size() == 4);
}

TEST_CASE("junction tree covers all atoms and stays a tree") {
  const std::vector<std::string> corpus = {
      "C", "CC", "CCO", "c1ccccc1", "Cc1ccccc1", "CC1(C)CCCC1",
      "c1ccc2ccccc2c1", "C1CC2CCC12", "CC(=O)Nc1ccc(O)cc1",
      "C1CCC2(CC1)CCCCC2", "OCC1OC(O)C(O)C(O)C1O"};
  for (const auto &s : corpus) {
    CAPTURE(s);
    const Molecule m = parse_smiles(s);
    const JunctionTree tree = junction_tree(m);
    CHECK(tree.edges.size() + 1 == tree.nodes.size());
    std::set<int> covered;
    for (const auto &node : tree.nodes) {
      covered.insert(node.atoms.begin(), node.atoms.end());
    }
    CHECK(static_cast<int>(covered.size()) == m.atom_count());
    // Every bond lies inside exactly one fragment.
    for (int bi = 0; bi < m.bond_count(); ++bi) {
      int owners = 0;
      for (const auto &node : tree.nodes) {
        std::set<int> atoms(node.atoms.begin(), node.atoms.end());
        if (atoms.count(m.bond(bi).a) && atoms.count(m.bond(bi).b)) {
          // Bond fragments own their single bond; ring clusters own bonds
          // with both ends inside.
          ++owners;
        }
      }
      CHECK(owners == 1);
    }
  }
}

TEST_CASE("junction tree labels are invariant under renumbering") {
  const Molecule m = parse_smiles("CC(=O)Nc1ccc(O)cc1");
  const JunctionTree tree = junction_tree(m);
  Rng rng(11);
  std::vector<int> perm(static_cast<size_t>(m.atom_count()));
  std::iota(perm.begin(), perm.end(), 0);
  for (int trial = 0; trial < 10; ++trial) {
    rng.shuffle(perm);
    const JunctionTree shuffled = junction_tree(permute_atoms(m, perm));
    REQUIRE(shuffled.nodes.size() == tree.nodes.size());
    for (size_t i = 0; i < tree.nodes.size(); ++i) {
      CHECK(shuffled.nodes[i].label == tree.nodes[i].label);
      CHECK(shuffled.nodes[i].attachments == tree.nodes[i].attachments);
    }
    CHECK(shuffled.edges == tree.edges);
  }
}

TEST_CASE("dfged identical trees is distance zero, not a substitution") {
  const JunctionTree a = junction_tree(parse_smiles("CCO"));
  const EditVerdict verdict = dfged_le1(a, a);
  CHECK(verdict.distance_le_one);
  CHECK_FALSE(verdict.is_single_fragment);
  CHECK_FALSE(verdict.substitution.has_value());
}

TEST_CASE("dfged detects the CCO to CCN substitution") {
  const JunctionTree a = junction_tree(parse_smiles("CCO"));
  const JunctionTree b = junction_tree(parse_smiles("CCN"));
  const EditVerdict verdict = dfged_le1(a, b);
  CHECK(verdict.distance_le_one);
  CHECK(verdict.is_single_fragment);
  REQUIRE(verdict.substitution.has_value());
  CHECK(verdict.substitution->first.find('O') != std::string::npos);
  CHECK(verdict.substitution->second.find('N') != std::string::npos);
}

TEST_CASE("dfged rejects structurally unrelated molecules") {
  const EditVerdict verdict = dfged_le1(junction_tree(parse_smiles("CCO")),
                                        junction_tree(parse_smiles("c1ccccc1")));
  CHECK_FALSE(verdict.distance_le_one);
}

TEST_CASE("dfged accepts single leaf insertions") {
  // Chain p-q vs p-q-r: one leaf insertion.
  JunctionTree small;
  small.nodes.push_back({"p", {}, 1});
  small.nodes.push_back({"q", {}, 1});
  small.edges.emplace_back(0, 1);
  JunctionTree large = small;
  large.nodes.push_back({"r", {}, 1});
  large.edges.emplace_back(1, 2);
  const EditVerdict verdict = dfged_le1(small, large);
  CHECK(verdict.distance_le_one);
  CHECK_FALSE(verdict.is_single_fragment);
  CHECK(dfged_le1(large, small).distance_le_one);
}

TEST_CASE("exhaustive tree GED basics") {
  const JunctionTree a = junction_tree(parse_smiles("CCO"));
  CHECK(exhaustive_tree_ged(a, a) == 0);

  // 2-node vs 3-node chain sharing 2 labels: one insertion.
  JunctionTree small;
  small.nodes.push_back({"p", {}, 1});
  small.nodes.push_back({"q", {}, 1});
  small.edges.emplace_back(0, 1);
  JunctionTree large = small;
  large.nodes.push_back({"r", {}, 1});
  large.edges.emplace_back(1, 2);
  CHECK(exhaustive_tree_ged(small, large) == 1);

  // Inserting a fragment into the middle of a chain costs two edits
  // (one insertion, one adjacency repair): CCO -> CCCO.
  CHECK(exhaustive_tree_ged(a, junction_tree(parse_smiles("CCCO"))) == 2);
  CHECK_FALSE(dfged_le1(a, junction_tree(parse_smiles("CCCO"))).distance_le_one);

  JunctionTree big;
  for (int i = 0; i < 9; ++i) {
    big.nodes.push_back({"x", {}, 1});
    if (i > 0) big.edges.emplace_back(i - 1, i);
  }
  CHECK_THROWS_AS(exhaustive_tree_ged(big, big), SizeLimitExceeded);
}

TEST_CASE("dfged agrees with the exhaustive oracle on random tree pairs") {
  const std::vector<std::string> pool = {"p", "q", "r", "s", "t"};
  Rng rng(5150);
  int close_pairs = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const JunctionTree a = random_tree(rng, 6, pool);
    const JunctionTree b = (trial % 2 == 0)
                               ? mutate_tree(rng, a, static_cast<int>(rng.below(3)), pool)
                               : random_tree(rng, 6, pool);
    const int distance = exhaustive_tree_ged(a, b);
    const EditVerdict verdict = dfged_le1(a, b);
    CAPTURE(trial);
    CHECK(verdict.distance_le_one == (distance <= 1));
    if (distance <= 1) ++close_pairs;
  }
  CHECK(close_pairs > 50);  // the generator actually exercises the near cases
}

TEST_CASE("mcs of a molecule with itself is exact identity") {
  const Molecule m = parse_smiles("CC(=O)Nc1ccc(O)cc1");
  const McsResult result = mcs(m, m);
  CHECK(result.atoms == m.atom_count());
  CHECK(result.ratio == 1.0);
  CHECK(result.exact);
}

TEST_CASE("mcs spec examples") {
  CHECK(mcs_ratio(parse_smiles("CCO"), parse_smiles("CCN")) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(mcs_ratio(parse_smiles("c1ccccc1"), parse_smiles("Cc1ccccc1")) ==
        doctest::Approx(6.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("mcs is symmetric and matches the exhaustive oracle") {
  const std::vector<std::string> fixtures = {
      "CCO", "CCN", "CCC", "c1ccccc1", "Cc1ccccc1", "C1CC1C", "CC(=O)O",
      "c1ccncc1", "C1CCCCC1", "OCC=O", "CC(C)C"};
  for (size_t i = 0; i < fixtures.size(); ++i) {
    for (size_t j = i; j < fixtures.size(); ++j) {
      const Molecule a = parse_smiles(fixtures[i]);
      const Molecule b = parse_smiles(fixtures[j]);
      const McsResult forward = mcs(a, b);
      const McsResult backward = mcs(b, a);
      CAPTURE(fixtures[i]);
      CAPTURE(fixtures[j]);
      CHECK(forward.ratio == backward.ratio);
      CHECK(forward.exact);
      CHECK(forward.atoms == testoracle::exhaustive_mcs_atoms(a, b));
      if (forward.ratio == 1.0) CHECK(isomorphic(a, b));
    }
  }
}

TEST_CASE("mcs budget exhaustion is flagged, not fatal") {
  const Molecule a = parse_smiles("CC(=O)Nc1ccc(O)cc1");
  const Molecule b = parse_smiles("CC(=O)Nc1ccc(N)cc1");
  const McsResult result = mcs(a, b, /*budget=*/5);
  CHECK_FALSE(result.exact);
  CHECK(result.atoms <= a.atom_count());
  CHECK_THROWS_AS(mcs(a, b, 0), Error);
}

TEST_CASE("mcs context extracts the shared substructure") {
  const std::string context =
      mcs_context(parse_smiles("Cc1ccccc1"), parse_smiles("Nc1ccccc1"));
  CHECK(context == parse_smiles("c1ccccc1").canonical_form());
}
