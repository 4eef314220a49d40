#include "scpt/decompose.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "scpt/errors.hpp"

namespace scpt {

// ---------------------------------------------------------------------------
// Murcko scaffold
// ---------------------------------------------------------------------------

Scaffold murcko_scaffold(const Molecule &m) {
  const int n = m.atom_count();
  std::vector<bool> alive(static_cast<size_t>(n), true);
  std::vector<int> degree(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) degree[static_cast<size_t>(i)] = m.degree(i);

  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < n; ++i) {
      if (!alive[static_cast<size_t>(i)] || degree[static_cast<size_t>(i)] > 1) continue;
      alive[static_cast<size_t>(i)] = false;
      changed = true;
      for (int bi : m.bonds_of(i)) {
        const int w = m.bond(bi).other(i);
        if (alive[static_cast<size_t>(w)]) --degree[static_cast<size_t>(w)];
      }
      degree[static_cast<size_t>(i)] = 0;
    }
  }

  if (std::none_of(alive.begin(), alive.end(), [](bool v) { return v; })) {
    return Scaffold{};
  }

  MolBuilder builder;
  std::vector<int> remap(static_cast<size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    if (!alive[static_cast<size_t>(i)]) continue;
    Atom atom = m.atom(i);
    atom.in_ring = false;
    // Pruned substituents free valence back to hydrogens.
    for (int bi : m.bonds_of(i)) {
      const Bond &bond = m.bond(bi);
      if (!alive[static_cast<size_t>(bond.other(i))]) {
        atom.hydrogens += bond_order_units(bond.order);
      }
    }
    remap[static_cast<size_t>(i)] = builder.add_atom(atom);
  }
  for (const Bond &bond : m.bonds()) {
    if (alive[static_cast<size_t>(bond.a)] && alive[static_cast<size_t>(bond.b)]) {
      builder.add_bond(remap[static_cast<size_t>(bond.a)],
                       remap[static_cast<size_t>(bond.b)], bond.order);
    }
  }
  MolBuilder::Options options;
  options.assign_implicit_hydrogens = false;
  options.strict = false;
  options.aromatize = false;
  return Scaffold{builder.finalize(options).canonical_form()};
}

// ---------------------------------------------------------------------------
// Junction tree
// ---------------------------------------------------------------------------

std::vector<std::vector<int>> JunctionTree::adjacency() const {
  std::vector<std::vector<int>> adj(nodes.size());
  for (const auto &[a, b] : edges) {
    adj[static_cast<size_t>(a)].push_back(b);
    adj[static_cast<size_t>(b)].push_back(a);
  }
  return adj;
}

namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(static_cast<size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int v) {
    while (parent[static_cast<size_t>(v)] != v) {
      parent[static_cast<size_t>(v)] = parent[static_cast<size_t>(parent[static_cast<size_t>(v)])];
      v = parent[static_cast<size_t>(v)];
    }
    return v;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<size_t>(a)] = b;
    return true;
  }
};

// Canonical fragment label: fragment atoms and internal bonds, plus one [*]
// placeholder per external bond carrying that bond's order.
std::string fragment_label(const Molecule &m, const std::vector<int> &atoms,
                           const std::set<int> &internal_bonds,
                           int *attachment_count) {
  MolBuilder builder;
  std::map<int, int> remap;
  for (int atom_index : atoms) {
    Atom atom = m.atom(atom_index);
    atom.in_ring = false;
    remap[atom_index] = builder.add_atom(atom);
  }
  int attachments = 0;
  for (int atom_index : atoms) {
    for (int bi : m.bonds_of(atom_index)) {
      if (internal_bonds.count(bi)) continue;
      const int placeholder = builder.add_atom(Atom{"*", 0, false, 0, false});
      builder.add_bond(remap[atom_index], placeholder, m.bond(bi).order);
      ++attachments;
    }
  }
  for (int bi : internal_bonds) {
    const Bond &bond = m.bond(bi);
    builder.add_bond(remap[bond.a], remap[bond.b], bond.order);
  }
  MolBuilder::Options options;
  options.assign_implicit_hydrogens = false;
  options.strict = false;
  options.aromatize = false;
  if (attachment_count != nullptr) *attachment_count = attachments;
  return builder.finalize(options).canonical_form();
}

}  // namespace

JunctionTree junction_tree(const Molecule &m) {
  struct RawNode {
    std::vector<int> atoms;        // sorted atom indices
    std::set<int> internal_bonds;  // bond indices
    bool is_ring = false;
    std::vector<int> key;          // sorted canonical ranks, for ordering
  };
  std::vector<RawNode> raw;

  // Ring clusters: basis rings merged while sharing two or more atoms.
  const auto &rings = m.rings();
  if (!rings.empty()) {
    DisjointSets sets(static_cast<int>(rings.size()));
    for (size_t i = 0; i < rings.size(); ++i) {
      std::set<int> ri(rings[i].begin(), rings[i].end());
      for (size_t j = i + 1; j < rings.size(); ++j) {
        int shared = 0;
        for (int atom : rings[j]) shared += ri.count(atom) ? 1 : 0;
        if (shared >= 2) sets.unite(static_cast<int>(i), static_cast<int>(j));
      }
    }
    std::map<int, std::set<int>> cluster_atoms;
    for (size_t i = 0; i < rings.size(); ++i) {
      auto &atoms = cluster_atoms[sets.find(static_cast<int>(i))];
      atoms.insert(rings[i].begin(), rings[i].end());
    }
    for (auto &[root, atom_set] : cluster_atoms) {
      (void)root;
      RawNode node;
      node.atoms.assign(atom_set.begin(), atom_set.end());
      node.is_ring = true;
      for (int bi = 0; bi < m.bond_count(); ++bi) {
        const Bond &bond = m.bond(bi);
        if (atom_set.count(bond.a) && atom_set.count(bond.b)) {
          node.internal_bonds.insert(bi);
        }
      }
      raw.push_back(std::move(node));
    }
  }

  // Every bond outside rings is its own fragment.
  for (int bi = 0; bi < m.bond_count(); ++bi) {
    const Bond &bond = m.bond(bi);
    if (bond.in_ring) continue;
    RawNode node;
    node.atoms = {std::min(bond.a, bond.b), std::max(bond.a, bond.b)};
    node.internal_bonds.insert(bi);
    raw.push_back(std::move(node));
  }

  if (raw.empty()) {
    // Single atom, no bonds.
    RawNode node;
    node.atoms = {0};
    raw.push_back(std::move(node));
  }

  const auto &ranks = m.canonical_ranks();
  for (RawNode &node : raw) {
    for (int atom : node.atoms) node.key.push_back(ranks[static_cast<size_t>(atom)]);
    std::sort(node.key.begin(), node.key.end());
  }
  std::sort(raw.begin(), raw.end(), [](const RawNode &a, const RawNode &b) {
    return a.key < b.key;
  });

  JunctionTree tree;
  for (const RawNode &node : raw) {
    JunctionTree::Node out;
    out.atoms = node.atoms;
    out.label = fragment_label(m, node.atoms, node.internal_bonds, &out.attachments);
    tree.nodes.push_back(std::move(out));
  }

  // Fragment adjacency: spanning tree over atom-sharing pairs, ring-cluster
  // edges first, then canonical node order.
  struct CandidateEdge {
    int ring_endpoints;
    int a;
    int b;
  };
  std::vector<CandidateEdge> candidates;
  for (size_t i = 0; i < raw.size(); ++i) {
    for (size_t j = i + 1; j < raw.size(); ++j) {
      const auto &ai = raw[i].atoms;
      const auto &aj = raw[j].atoms;
      bool shares = false;
      for (int atom : aj) {
        if (std::binary_search(ai.begin(), ai.end(), atom)) {
          shares = true;
          break;
        }
      }
      if (!shares) continue;
      candidates.push_back({(raw[i].is_ring ? 1 : 0) + (raw[j].is_ring ? 1 : 0),
                            static_cast<int>(i), static_cast<int>(j)});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const CandidateEdge &x, const CandidateEdge &y) {
              return std::tuple(-x.ring_endpoints, x.a, x.b) <
                     std::tuple(-y.ring_endpoints, y.a, y.b);
            });
  DisjointSets sets(static_cast<int>(raw.size()));
  for (const CandidateEdge &edge : candidates) {
    if (sets.unite(edge.a, edge.b)) {
      tree.edges.emplace_back(edge.a, edge.b);
    }
  }
  if (tree.edges.size() + 1 != tree.nodes.size()) {
    throw Error("internal: fragment graph is not connected");
  }
  return tree;
}

// ---------------------------------------------------------------------------
// Fragment-tree edit distance
// ---------------------------------------------------------------------------

namespace {

// Canonical code of an unordered labeled tree (AHU with length-prefixed
// labels), minimized over the 1-2 tree centers.
std::string rooted_code(const JunctionTree &tree,
                        const std::vector<std::vector<int>> &adj,
                        const std::vector<const std::string *> &labels, int v,
                        int parent) {
  std::vector<std::string> children;
  for (int w : adj[static_cast<size_t>(v)]) {
    if (w == parent) continue;
    children.push_back(rooted_code(tree, adj, labels, w, v));
  }
  std::sort(children.begin(), children.end());
  std::string code = "L" + std::to_string(labels[static_cast<size_t>(v)]->size()) +
                     ":" + *labels[static_cast<size_t>(v)] + "[";
  for (const std::string &c : children) code += c;
  code += "]";
  return code;
}

std::vector<int> tree_centers(const std::vector<std::vector<int>> &adj) {
  const int n = static_cast<int>(adj.size());
  if (n == 1) return {0};
  std::vector<int> degree(static_cast<size_t>(n));
  std::vector<int> frontier;
  for (int i = 0; i < n; ++i) {
    degree[static_cast<size_t>(i)] = static_cast<int>(adj[static_cast<size_t>(i)].size());
    if (degree[static_cast<size_t>(i)] <= 1) frontier.push_back(i);
  }
  int remaining = n;
  while (remaining > 2) {
    std::vector<int> next;
    remaining -= static_cast<int>(frontier.size());
    for (int v : frontier) {
      degree[static_cast<size_t>(v)] = 0;
      for (int w : adj[static_cast<size_t>(v)]) {
        if (degree[static_cast<size_t>(w)] > 0 && --degree[static_cast<size_t>(w)] == 1) {
          next.push_back(w);
        }
      }
    }
    frontier = std::move(next);
  }
  return frontier;
}

std::string tree_code_with(const JunctionTree &tree,
                           const std::vector<const std::string *> &labels) {
  const auto adj = tree.adjacency();
  std::string best;
  for (int center : tree_centers(adj)) {
    std::string code = rooted_code(tree, adj, labels, center, -1);
    if (best.empty() || code < best) best = std::move(code);
  }
  return best;
}

std::string tree_code(const JunctionTree &tree) {
  std::vector<const std::string *> labels;
  for (const auto &node : tree.nodes) labels.push_back(&node.label);
  return tree_code_with(tree, labels);
}

// Tree with node `drop` removed (must be a leaf).
JunctionTree without_leaf(const JunctionTree &tree, int drop) {
  JunctionTree out;
  std::vector<int> remap(tree.nodes.size(), -1);
  for (size_t i = 0; i < tree.nodes.size(); ++i) {
    if (static_cast<int>(i) == drop) continue;
    remap[i] = static_cast<int>(out.nodes.size());
    out.nodes.push_back(tree.nodes[i]);
  }
  for (const auto &[a, b] : tree.edges) {
    if (a == drop || b == drop) continue;
    out.edges.emplace_back(remap[static_cast<size_t>(a)], remap[static_cast<size_t>(b)]);
  }
  return out;
}

}  // namespace

EditVerdict dfged_le1(const JunctionTree &a, const JunctionTree &b) {
  EditVerdict verdict;
  const int na = static_cast<int>(a.nodes.size());
  const int nb = static_cast<int>(b.nodes.size());

  if (na == nb) {
    if (tree_code(a) == tree_code(b)) {
      verdict.distance_le_one = true;  // distance 0
      return verdict;
    }
    // One substitution: wildcard each label-mismatched node pair and compare.
    static const std::string kWildcard = "\x01";
    std::vector<const std::string *> labels_a, labels_b;
    for (const auto &node : a.nodes) labels_a.push_back(&node.label);
    for (const auto &node : b.nodes) labels_b.push_back(&node.label);
    for (int u = 0; u < na; ++u) {
      const std::string *saved_a = labels_a[static_cast<size_t>(u)];
      labels_a[static_cast<size_t>(u)] = &kWildcard;
      const std::string code_a = tree_code_with(a, labels_a);
      for (int v = 0; v < nb; ++v) {
        if (b.nodes[static_cast<size_t>(v)].label == *saved_a) continue;
        const std::string *saved_b = labels_b[static_cast<size_t>(v)];
        labels_b[static_cast<size_t>(v)] = &kWildcard;
        const bool match = tree_code_with(b, labels_b) == code_a;
        labels_b[static_cast<size_t>(v)] = saved_b;
        if (match) {
          verdict.distance_le_one = true;
          verdict.substitution = {a.nodes[static_cast<size_t>(u)].label,
                                  b.nodes[static_cast<size_t>(v)].label};
          verdict.is_single_fragment =
              a.nodes[static_cast<size_t>(u)].attachments ==
              b.nodes[static_cast<size_t>(v)].attachments;
          return verdict;
        }
      }
      labels_a[static_cast<size_t>(u)] = saved_a;
    }
    return verdict;
  }

  if (std::abs(na - nb) == 1) {
    // One leaf insertion/deletion.
    const JunctionTree &large = na > nb ? a : b;
    const JunctionTree &small = na > nb ? b : a;
    const std::string small_code = tree_code(small);
    const auto adj = large.adjacency();
    for (size_t v = 0; v < large.nodes.size(); ++v) {
      if (adj[v].size() > 1) continue;
      if (tree_code(without_leaf(large, static_cast<int>(v))) == small_code) {
        verdict.distance_le_one = true;
        return verdict;
      }
    }
  }
  return verdict;
}

int exhaustive_tree_ged(const JunctionTree &a, const JunctionTree &b) {
  const int na = static_cast<int>(a.nodes.size());
  const int nb = static_cast<int>(b.nodes.size());
  if (na > 8 || nb > 8) {
    throw SizeLimitExceeded("exhaustive_tree_ged supports at most 8 nodes");
  }

  std::vector<std::vector<bool>> edge_a(static_cast<size_t>(na),
                                        std::vector<bool>(static_cast<size_t>(na), false));
  std::vector<std::vector<bool>> edge_b(static_cast<size_t>(nb),
                                        std::vector<bool>(static_cast<size_t>(nb), false));
  for (const auto &[x, y] : a.edges) {
    edge_a[static_cast<size_t>(x)][static_cast<size_t>(y)] = true;
    edge_a[static_cast<size_t>(y)][static_cast<size_t>(x)] = true;
  }
  for (const auto &[x, y] : b.edges) {
    edge_b[static_cast<size_t>(x)][static_cast<size_t>(y)] = true;
    edge_b[static_cast<size_t>(y)][static_cast<size_t>(x)] = true;
  }

  int best = na + nb;  // delete everything, insert everything
  std::vector<int> image(static_cast<size_t>(na), -1);
  std::vector<bool> used_b(static_cast<size_t>(nb), false);

  auto search = [&](auto &&self, int pos, int cost, int mapped) -> void {
    if (cost >= best) return;
    const int remaining_a = na - pos;
    const int unused_b = nb - mapped;
    // Unmapped leftovers on either side must be deleted or inserted.
    if (cost + std::abs(remaining_a - unused_b) >= best) return;
    if (pos == na) {
      best = std::min(best, cost + unused_b);
      return;
    }
    for (int j = 0; j < nb; ++j) {
      if (used_b[static_cast<size_t>(j)]) continue;
      int step = a.nodes[static_cast<size_t>(pos)].label !=
                         b.nodes[static_cast<size_t>(j)].label
                     ? 1
                     : 0;
      for (int k = 0; k < pos; ++k) {
        if (image[static_cast<size_t>(k)] < 0) continue;
        const bool in_a = edge_a[static_cast<size_t>(pos)][static_cast<size_t>(k)];
        const bool in_b = edge_b[static_cast<size_t>(j)]
                                [static_cast<size_t>(image[static_cast<size_t>(k)])];
        if (in_a != in_b) ++step;
      }
      used_b[static_cast<size_t>(j)] = true;
      image[static_cast<size_t>(pos)] = j;
      self(self, pos + 1, cost + step, mapped + 1);
      image[static_cast<size_t>(pos)] = -1;
      used_b[static_cast<size_t>(j)] = false;
    }
    self(self, pos + 1, cost + 1, mapped);  // delete a[pos]
  };
  search(search, 0, 0, 0);
  return best;
}

// ---------------------------------------------------------------------------
// Maximum common connected induced subgraph
// ---------------------------------------------------------------------------

namespace {

bool atoms_compatible(const Atom &a, const Atom &b) {
  return a.element == b.element && a.aromatic == b.aromatic;
}

struct McsSearch {
  const Molecule *a;
  const Molecule *b;
  long budget;
  long expansions = 0;
  bool exhausted = false;
  std::vector<std::pair<int, int>> mapping;
  std::vector<std::pair<int, int>> best;
  std::vector<int> image_a;  // atom in b mapped from atom in a, or -1
  std::vector<bool> used_b;
  std::vector<bool> excluded_a;

  bool consistent(int i, int j) const {
    if (!atoms_compatible(a->atom(i), b->atom(j))) return false;
    for (const auto &[u, v] : mapping) {
      const int bond_a = a->bond_between(i, u);
      const int bond_b = b->bond_between(j, v);
      if ((bond_a >= 0) != (bond_b >= 0)) return false;
      if (bond_a >= 0 &&
          a->bond(bond_a).order != b->bond(bond_b).order) {
        return false;
      }
    }
    return true;
  }

  void run(int seed_floor) {
    if (exhausted) return;
    if (++expansions > budget) {
      exhausted = true;
      return;
    }
    if (mapping.size() > best.size()) best = mapping;

    // Smallest unexcluded a-atom adjacent to the mapped set.
    int pivot = -1;
    for (const auto &[u, v] : mapping) {
      (void)v;
      for (int bi : a->bonds_of(u)) {
        const int w = a->bond(bi).other(u);
        if (w <= seed_floor || excluded_a[static_cast<size_t>(w)] ||
            image_a[static_cast<size_t>(w)] >= 0) {
          continue;
        }
        if (pivot < 0 || w < pivot) pivot = w;
      }
    }
    if (pivot < 0) return;

    // Bound: even mapping every remaining a-atom cannot beat the best.
    int available = 0;
    for (int i = 0; i < a->atom_count(); ++i) {
      if (i > seed_floor && !excluded_a[static_cast<size_t>(i)] &&
          image_a[static_cast<size_t>(i)] < 0) {
        ++available;
      }
    }
    if (mapping.size() + static_cast<size_t>(available) <= best.size()) return;

    for (int j = 0; j < b->atom_count(); ++j) {
      if (used_b[static_cast<size_t>(j)] || !consistent(pivot, j)) continue;
      mapping.emplace_back(pivot, j);
      image_a[static_cast<size_t>(pivot)] = j;
      used_b[static_cast<size_t>(j)] = true;
      run(seed_floor);
      used_b[static_cast<size_t>(j)] = false;
      image_a[static_cast<size_t>(pivot)] = -1;
      mapping.pop_back();
      if (exhausted) return;
    }
    excluded_a[static_cast<size_t>(pivot)] = true;
    run(seed_floor);
    excluded_a[static_cast<size_t>(pivot)] = false;
  }
};

}  // namespace

McsResult mcs(const Molecule &a, const Molecule &b, long budget) {
  if (budget <= 0) throw Error("mcs budget must be positive");
  McsSearch search;
  search.a = &a;
  search.b = &b;
  search.budget = budget;
  search.image_a.assign(static_cast<size_t>(a.atom_count()), -1);
  search.used_b.assign(static_cast<size_t>(b.atom_count()), false);
  search.excluded_a.assign(static_cast<size_t>(a.atom_count()), false);

  const int limit = std::min(a.atom_count(), b.atom_count());
  // Seed on each a-atom; atoms below the seed belong to earlier seed runs.
  for (int i = 0; i < a.atom_count() && !search.exhausted; ++i) {
    if (static_cast<int>(search.best.size()) == limit) break;
    for (int j = 0; j < b.atom_count() && !search.exhausted; ++j) {
      if (!atoms_compatible(a.atom(i), b.atom(j))) continue;
      search.mapping.emplace_back(i, j);
      search.image_a[static_cast<size_t>(i)] = j;
      search.used_b[static_cast<size_t>(j)] = true;
      search.run(i);
      search.used_b[static_cast<size_t>(j)] = false;
      search.image_a[static_cast<size_t>(i)] = -1;
      search.mapping.pop_back();
      if (static_cast<int>(search.best.size()) == limit) break;
    }
  }

  McsResult result;
  result.atoms = static_cast<int>(search.best.size());
  result.mapping = std::move(search.best);
  result.exact = !search.exhausted ||
                 result.atoms == limit;
  result.ratio = a.atom_count() == 0 && b.atom_count() == 0
                     ? 1.0
                     : static_cast<double>(result.atoms) /
                           static_cast<double>(std::max(a.atom_count(), b.atom_count()));
  return result;
}

double mcs_ratio(const Molecule &a, const Molecule &b, long budget) {
  return mcs(a, b, budget).ratio;
}

std::string mcs_context(const Molecule &a, const Molecule &b, long budget) {
  const McsResult result = mcs(a, b, budget);
  if (result.atoms == 0) return "";
  std::set<int> kept;
  for (const auto &[i, j] : result.mapping) {
    (void)j;
    kept.insert(i);
  }
  MolBuilder builder;
  std::map<int, int> remap;
  for (int atom_index : kept) {
    Atom atom = a.atom(atom_index);
    atom.in_ring = false;
    for (int bi : a.bonds_of(atom_index)) {
      if (!kept.count(a.bond(bi).other(atom_index))) {
        atom.hydrogens += bond_order_units(a.bond(bi).order);
      }
    }
    remap[atom_index] = builder.add_atom(atom);
  }
  for (int bi = 0; bi < a.bond_count(); ++bi) {
    const Bond &bond = a.bond(bi);
    if (kept.count(bond.a) && kept.count(bond.b)) {
      builder.add_bond(remap[bond.a], remap[bond.b], bond.order);
    }
  }
  MolBuilder::Options options;
  options.assign_implicit_hydrogens = false;
  options.strict = false;
  options.aromatize = false;
  return builder.finalize(options).canonical_form();
}

}  // namespace scpt
