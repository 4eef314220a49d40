#include "scpt/molgraph.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <queue>
#include <set>
#include <tuple>

#include "scpt/errors.hpp"

namespace scpt {

namespace {

struct ValenceInfo {
  const char *element;
  std::array<int, 3> valences;  // ascending, 0-terminated
};

// Default valence lists for the organic subset.
constexpr ValenceInfo kValences[] = {
    {"B", {3, 0, 0}},  {"C", {4, 0, 0}},  {"N", {3, 5, 0}}, {"O", {2, 0, 0}},
    {"P", {3, 5, 0}},  {"S", {2, 4, 6}},  {"F", {1, 0, 0}}, {"Cl", {1, 0, 0}},
    {"Br", {1, 0, 0}}, {"I", {1, 0, 0}},
};

const ValenceInfo *find_valence(const std::string &element) {
  for (const auto &v : kValences) {
    if (element == v.element) return &v;
  }
  return nullptr;
}

bool aromatic_capable(const std::string &element) {
  return element == "B" || element == "C" || element == "N" ||
         element == "O" || element == "P" || element == "S";
}

}  // namespace

int bond_order_units(BondOrder order) {
  switch (order) {
    case BondOrder::kSingle:
    case BondOrder::kAromatic:
      return 1;
    case BondOrder::kDouble:
      return 2;
    case BondOrder::kTriple:
      return 3;
  }
  return 1;
}

namespace detail {

bool organic_subset_element(const std::string &element) {
  return find_valence(element) != nullptr;
}

int organic_implicit_hydrogens(const std::string &element, bool aromatic,
                               int bond_units) {
  const ValenceInfo *info = find_valence(element);
  if (info == nullptr) return -1;
  for (int v : info->valences) {
    if (v == 0) break;
    if (bond_units <= v) return v - bond_units;
  }
  // Aromatic lone-pair donors (o, s in five-rings) overshoot their valence by
  // the aromatic increment; they carry no hydrogens.
  return aromatic ? 0 : -1;
}

}  // namespace detail

int Molecule::bond_between(int a, int b) const {
  for (int bi : adjacency_[static_cast<size_t>(a)]) {
    const Bond &bd = bonds_[static_cast<size_t>(bi)];
    if (bd.other(a) == b) return bi;
  }
  return -1;
}

// ---------------------------------------------------------------------------
// Structure analysis helpers
// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<int>> build_adjacency(int n,
                                              const std::vector<Bond> &bonds) {
  std::vector<std::vector<int>> adj(static_cast<size_t>(n));
  for (size_t i = 0; i < bonds.size(); ++i) {
    adj[static_cast<size_t>(bonds[i].a)].push_back(static_cast<int>(i));
    adj[static_cast<size_t>(bonds[i].b)].push_back(static_cast<int>(i));
  }
  return adj;
}

// Marks every non-bridge bond (equivalently: every bond on some cycle) and
// every atom incident to one. Iterative lowlink search.
void mark_rings(std::vector<Atom> &atoms, std::vector<Bond> &bonds,
                const std::vector<std::vector<int>> &adj) {
  const int n = static_cast<int>(atoms.size());
  std::vector<int> disc(static_cast<size_t>(n), -1);
  std::vector<int> low(static_cast<size_t>(n), 0);
  int timer = 0;

  struct Frame {
    int atom;
    int parent_bond;
    size_t next;
  };
  std::vector<Frame> stack;
  for (int root = 0; root < n; ++root) {
    if (disc[static_cast<size_t>(root)] >= 0) continue;
    disc[static_cast<size_t>(root)] = low[static_cast<size_t>(root)] = timer++;
    stack.push_back({root, -1, 0});
    while (!stack.empty()) {
      Frame &frame = stack.back();
      const auto &edges = adj[static_cast<size_t>(frame.atom)];
      if (frame.next < edges.size()) {
        const int bi = edges[frame.next++];
        if (bi == frame.parent_bond) continue;
        const int w = bonds[static_cast<size_t>(bi)].other(frame.atom);
        if (disc[static_cast<size_t>(w)] < 0) {
          disc[static_cast<size_t>(w)] = low[static_cast<size_t>(w)] = timer++;
          stack.push_back({w, bi, 0});
        } else {
          low[static_cast<size_t>(frame.atom)] =
              std::min(low[static_cast<size_t>(frame.atom)],
                       disc[static_cast<size_t>(w)]);
          if (disc[static_cast<size_t>(w)] < disc[static_cast<size_t>(frame.atom)]) {
            bonds[static_cast<size_t>(bi)].in_ring = true;  // back edge
          }
        }
      } else {
        const int atom = frame.atom;
        const int pb = frame.parent_bond;
        stack.pop_back();
        if (pb >= 0) {
          Bond &bond = bonds[static_cast<size_t>(pb)];
          const int parent = bond.other(atom);
          low[static_cast<size_t>(parent)] = std::min(
              low[static_cast<size_t>(parent)], low[static_cast<size_t>(atom)]);
          if (low[static_cast<size_t>(atom)] < disc[static_cast<size_t>(atom)] ||
              low[static_cast<size_t>(atom)] <= disc[static_cast<size_t>(parent)]) {
            if (low[static_cast<size_t>(atom)] <= disc[static_cast<size_t>(parent)]) {
              bond.in_ring = true;  // tree edge on a cycle
            }
          }
        }
      }
    }
  }
  for (const Bond &b : bonds) {
    if (b.in_ring) {
      atoms[static_cast<size_t>(b.a)].in_ring = true;
      atoms[static_cast<size_t>(b.b)].in_ring = true;
    }
  }
}

// Enumerates every simple cycle of length 5 or 6 (as bond-index lists).
// Used only for Kekule normalization, so the full set keeps the result
// independent of atom numbering.
std::vector<std::vector<int>> small_cycles(const std::vector<Atom> &atoms,
                                           const std::vector<Bond> &bonds,
                                           const std::vector<std::vector<int>> &adj) {
  const int n = static_cast<int>(atoms.size());
  std::vector<std::vector<int>> cycles;
  std::vector<int> path_atoms;
  std::vector<int> path_bonds;
  std::vector<bool> on_path(static_cast<size_t>(n), false);

  auto dfs = [&](auto &&self, int start, int current) -> void {
    for (int bi : adj[static_cast<size_t>(current)]) {
      const Bond &bond = bonds[static_cast<size_t>(bi)];
      if (!bond.in_ring) continue;
      const int w = bond.other(current);
      if (w == start && path_atoms.size() >= 5) {
        // Each cycle is found once with its smallest atom first and its
        // second atom smaller than its last.
        if (path_atoms[1] < path_atoms.back()) {
          auto cycle = path_bonds;
          cycle.push_back(bi);
          cycles.push_back(std::move(cycle));
        }
        continue;
      }
      if (w <= start || on_path[static_cast<size_t>(w)]) continue;
      if (path_atoms.size() >= 6) continue;
      on_path[static_cast<size_t>(w)] = true;
      path_atoms.push_back(w);
      path_bonds.push_back(bi);
      self(self, start, w);
      path_bonds.pop_back();
      path_atoms.pop_back();
      on_path[static_cast<size_t>(w)] = false;
    }
  };

  for (int s = 0; s < n; ++s) {
    if (!atoms[static_cast<size_t>(s)].in_ring) continue;
    on_path[static_cast<size_t>(s)] = true;
    path_atoms.assign(1, s);
    path_bonds.clear();
    dfs(dfs, s, s);
    on_path[static_cast<size_t>(s)] = false;
  }
  return cycles;
}

// Rewrites alternating Kekule rings (and five-ring lone-pair systems) into
// aromatic form so that both input dialects share one canonical form. A ring
// converts when every member is C/N/O/S/P, contributes either one pi electron
// via an in-ring double bond or two via a lone pair, has no exocyclic
// multiple bond, and the ring total is six.
void aromatize_kekule(std::vector<Atom> &atoms, std::vector<Bond> &bonds,
                      const std::vector<std::vector<int>> &adj) {
  const auto cycles = small_cycles(atoms, bonds, adj);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto &cycle : cycles) {
      bool plain = true;
      std::set<int> cycle_bonds(cycle.begin(), cycle.end());
      std::set<int> cycle_atoms;
      for (int bi : cycle) {
        const Bond &b = bonds[static_cast<size_t>(bi)];
        if (b.order != BondOrder::kSingle && b.order != BondOrder::kDouble) {
          plain = false;
        }
        cycle_atoms.insert(b.a);
        cycle_atoms.insert(b.b);
      }
      if (!plain) continue;

      int pi = 0;
      bool ok = true;
      for (int ai : cycle_atoms) {
        const Atom &atom = atoms[static_cast<size_t>(ai)];
        if (atom.aromatic || atom.charge != 0 || !aromatic_capable(atom.element)) {
          ok = false;
          break;
        }
        int doubles_in = 0;
        int multi_out = 0;
        for (int bi : adj[static_cast<size_t>(ai)]) {
          const Bond &b = bonds[static_cast<size_t>(bi)];
          const bool inside = cycle_bonds.count(bi) > 0;
          if (b.order == BondOrder::kDouble && inside) ++doubles_in;
          if ((b.order == BondOrder::kDouble || b.order == BondOrder::kTriple) &&
              !inside) {
            ++multi_out;
          }
        }
        if (doubles_in == 1 && multi_out == 0) {
          pi += 1;
        } else if (doubles_in == 0 && multi_out == 0 &&
                   (atom.element == "N" || atom.element == "O" ||
                    atom.element == "S" || atom.element == "P")) {
          pi += 2;
        } else {
          ok = false;
          break;
        }
      }
      if (!ok || pi != 6) continue;

      for (int ai : cycle_atoms) atoms[static_cast<size_t>(ai)].aromatic = true;
      for (int bi : cycle) {
        bonds[static_cast<size_t>(bi)].order = BondOrder::kAromatic;
      }
      changed = true;
    }
  }
}

// ---------------------------------------------------------------------------
// Canonical ranking
// ---------------------------------------------------------------------------

struct RankWork {
  const std::vector<Atom> *atoms;
  const std::vector<Bond> *bonds;
  const std::vector<std::vector<int>> *adj;
};

std::vector<int> dense_rank(const std::vector<std::vector<int64_t>> &keys) {
  const size_t n = keys.size();
  std::vector<int> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return keys[static_cast<size_t>(a)] < keys[static_cast<size_t>(b)]; });
  std::vector<int> ranks(n, 0);
  int rank = 0;
  for (size_t i = 0; i < n; ++i) {
    if (i > 0 && keys[static_cast<size_t>(order[i])] != keys[static_cast<size_t>(order[i - 1])]) {
      ++rank;
    }
    ranks[static_cast<size_t>(order[i])] = rank;
  }
  return ranks;
}

int64_t element_code(const std::string &element) {
  int64_t code = 0;
  for (char c : element) code = code * 256 + static_cast<unsigned char>(c);
  return code;
}

std::vector<int> initial_ranks(const RankWork &work) {
  const auto &atoms = *work.atoms;
  std::vector<std::vector<int64_t>> keys(atoms.size());
  for (size_t i = 0; i < atoms.size(); ++i) {
    const Atom &a = atoms[i];
    keys[i] = {element_code(a.element), a.charge,
               static_cast<int64_t>((*work.adj)[i].size()), a.hydrogens,
               a.aromatic ? 1 : 0, a.in_ring ? 1 : 0};
  }
  return dense_rank(keys);
}

int distinct_count(const std::vector<int> &ranks) {
  return ranks.empty() ? 0 : *std::max_element(ranks.begin(), ranks.end()) + 1;
}

// Iterative neighborhood refinement to a fixed point.
std::vector<int> refine_ranks(const RankWork &work, std::vector<int> ranks) {
  const size_t n = ranks.size();
  while (true) {
    std::vector<std::vector<int64_t>> keys(n);
    for (size_t i = 0; i < n; ++i) {
      std::vector<int64_t> nbr;
      for (int bi : (*work.adj)[i]) {
        const Bond &b = (*work.bonds)[static_cast<size_t>(bi)];
        const int w = b.other(static_cast<int>(i));
        nbr.push_back(static_cast<int64_t>(b.order) * 1000000 +
                      ranks[static_cast<size_t>(w)]);
      }
      std::sort(nbr.begin(), nbr.end());
      keys[i] = {ranks[i]};
      keys[i].insert(keys[i].end(), nbr.begin(), nbr.end());
    }
    std::vector<int> next = dense_rank(keys);
    if (distinct_count(next) == distinct_count(ranks)) return next;
    ranks = std::move(next);
  }
}

std::string write_smiles(const RankWork &work, const std::vector<int> &ranks);

// Resolves remaining symmetry by trying every member of the first tied class
// and keeping the lexicographically smallest serialization.
std::string canonical_from(const RankWork &work, const std::vector<int> &ranks) {
  const size_t n = ranks.size();
  if (static_cast<size_t>(distinct_count(ranks)) == n) {
    return write_smiles(work, ranks);
  }
  int tied_rank = -1;
  std::vector<int> members;
  for (int r = 0;; ++r) {
    members.clear();
    for (size_t i = 0; i < n; ++i) {
      if (ranks[i] == r) members.push_back(static_cast<int>(i));
    }
    if (members.size() > 1) {
      tied_rank = r;
      break;
    }
  }
  (void)tied_rank;
  std::string best;
  for (int chosen : members) {
    std::vector<std::vector<int64_t>> keys(n);
    for (size_t i = 0; i < n; ++i) {
      keys[i] = {ranks[i], static_cast<int>(i) == chosen ? 0 : 1};
    }
    std::string candidate =
        canonical_from(work, refine_ranks(work, dense_rank(keys)));
    if (best.empty() || candidate < best) best = std::move(candidate);
  }
  return best;
}

// ---------------------------------------------------------------------------
// SMILES writer
// ---------------------------------------------------------------------------

std::string charge_token(int charge) {
  if (charge == 0) return "";
  if (charge == 1) return "+";
  if (charge == -1) return "-";
  return (charge > 0 ? "+" : "-") + std::to_string(std::abs(charge));
}

std::string atom_token(const RankWork &work, int index) {
  const Atom &atom = (*work.atoms)[static_cast<size_t>(index)];
  int units = atom.aromatic ? 1 : 0;
  for (int bi : (*work.adj)[static_cast<size_t>(index)]) {
    units += bond_order_units((*work.bonds)[static_cast<size_t>(bi)].order);
  }
  std::string symbol = atom.element;
  if (atom.aromatic) {
    for (char &c : symbol) c = static_cast<char>(std::tolower(c));
  }
  const bool organic = detail::organic_subset_element(atom.element) &&
                       (!atom.aromatic || aromatic_capable(atom.element));
  if (organic && atom.charge == 0 &&
      detail::organic_implicit_hydrogens(atom.element, atom.aromatic, units) ==
          atom.hydrogens) {
    return symbol;
  }
  std::string token = "[" + symbol;
  if (atom.hydrogens == 1) {
    token += "H";
  } else if (atom.hydrogens > 1) {
    token += "H" + std::to_string(atom.hydrogens);
  }
  token += charge_token(atom.charge);
  token += "]";
  return token;
}

std::string bond_token(const RankWork &work, const Bond &bond) {
  const bool both_aromatic = (*work.atoms)[static_cast<size_t>(bond.a)].aromatic &&
                             (*work.atoms)[static_cast<size_t>(bond.b)].aromatic;
  switch (bond.order) {
    case BondOrder::kSingle:
      return both_aromatic ? "-" : "";
    case BondOrder::kAromatic:
      return both_aromatic ? "" : ":";
    case BondOrder::kDouble:
      return "=";
    case BondOrder::kTriple:
      return "#";
  }
  return "";
}

std::string digit_token(int digit) {
  if (digit < 10) return std::to_string(digit);
  return "%" + (digit < 100 ? std::to_string(digit)
                            : throw Error("ring closure digits exhausted"));
}

std::string write_smiles(const RankWork &work, const std::vector<int> &ranks) {
  const int n = static_cast<int>(ranks.size());
  if (n == 0) return "";

  // Neighbor lists sorted by canonical rank.
  std::vector<std::vector<int>> nbrs(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto edges = (*work.adj)[static_cast<size_t>(i)];
    std::sort(edges.begin(), edges.end(), [&](int x, int y) {
      const int wx = (*work.bonds)[static_cast<size_t>(x)].other(i);
      const int wy = (*work.bonds)[static_cast<size_t>(y)].other(i);
      return ranks[static_cast<size_t>(wx)] < ranks[static_cast<size_t>(wy)];
    });
    nbrs[static_cast<size_t>(i)] = std::move(edges);
  }

  int root = 0;
  for (int i = 0; i < n; ++i) {
    if (ranks[static_cast<size_t>(i)] < ranks[static_cast<size_t>(root)]) root = i;
  }

  // Pass 1: classify tree vs ring-closure bonds in DFS order.
  std::vector<int> visit_pos(static_cast<size_t>(n), -1);
  std::vector<int> tree_children(static_cast<size_t>(n), 0);
  std::vector<std::vector<int>> child_bonds(static_cast<size_t>(n));
  struct Closure {
    int bond;
    int open_atom;
    int close_atom;
    int digit = -1;
  };
  std::vector<Closure> closures;
  std::vector<bool> bond_used(work.bonds->size(), false);
  int pos = 0;

  auto dfs1 = [&](auto &&self, int u) -> void {
    visit_pos[static_cast<size_t>(u)] = pos++;
    for (int bi : nbrs[static_cast<size_t>(u)]) {
      if (bond_used[static_cast<size_t>(bi)]) continue;
      const int w = (*work.bonds)[static_cast<size_t>(bi)].other(u);
      bond_used[static_cast<size_t>(bi)] = true;
      if (visit_pos[static_cast<size_t>(w)] < 0) {
        child_bonds[static_cast<size_t>(u)].push_back(bi);
        self(self, w);
      } else {
        closures.push_back({bi, w, u, -1});
      }
    }
  };
  dfs1(dfs1, root);

  // Digit assignment: walk atoms in emission order, release digits that
  // close here, then open new ones (smallest free digit first).
  std::vector<std::vector<size_t>> opens_at(static_cast<size_t>(n));
  std::vector<std::vector<size_t>> closes_at(static_cast<size_t>(n));
  for (size_t ci = 0; ci < closures.size(); ++ci) {
    opens_at[static_cast<size_t>(closures[ci].open_atom)].push_back(ci);
    closes_at[static_cast<size_t>(closures[ci].close_atom)].push_back(ci);
  }
  std::vector<int> emit_order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) emit_order[static_cast<size_t>(visit_pos[static_cast<size_t>(i)])] = i;
  std::set<int> free_digits;
  for (int d = 1; d < 100; ++d) free_digits.insert(d);
  for (int p = 0; p < n; ++p) {
    const int atom = emit_order[static_cast<size_t>(p)];
    for (size_t ci : closes_at[static_cast<size_t>(atom)]) {
      free_digits.insert(closures[ci].digit);
    }
    auto &opening = opens_at[static_cast<size_t>(atom)];
    std::sort(opening.begin(), opening.end(), [&](size_t x, size_t y) {
      return visit_pos[static_cast<size_t>(closures[x].close_atom)] <
             visit_pos[static_cast<size_t>(closures[y].close_atom)];
    });
    for (size_t ci : opening) {
      closures[ci].digit = *free_digits.begin();
      free_digits.erase(free_digits.begin());
    }
  }

  // Pass 2: emit text.
  std::string out;
  auto dfs2 = [&](auto &&self, int u) -> void {
    out += atom_token(work, u);
    auto closing = closes_at[static_cast<size_t>(u)];
    std::sort(closing.begin(), closing.end(), [&](size_t x, size_t y) {
      return visit_pos[static_cast<size_t>(closures[x].open_atom)] <
             visit_pos[static_cast<size_t>(closures[y].open_atom)];
    });
    for (size_t ci : closing) out += digit_token(closures[ci].digit);
    for (size_t ci : opens_at[static_cast<size_t>(u)]) {
      out += bond_token(work, (*work.bonds)[static_cast<size_t>(closures[ci].bond)]);
      out += digit_token(closures[ci].digit);
    }
    const auto &children = child_bonds[static_cast<size_t>(u)];
    for (size_t k = 0; k < children.size(); ++k) {
      const Bond &bond = (*work.bonds)[static_cast<size_t>(children[k])];
      const bool last = k + 1 == children.size();
      if (!last) out += "(";
      out += bond_token(work, bond);
      self(self, bond.other(u));
      if (!last) out += ")";
    }
  };
  dfs2(dfs2, root);
  return out;
}

// ---------------------------------------------------------------------------
// Minimum cycle basis (Horton candidates + GF(2) greedy selection)
// ---------------------------------------------------------------------------

using BitRow = std::vector<uint64_t>;

BitRow make_row(size_t bits) { return BitRow((bits + 63) / 64, 0); }

void set_bit(BitRow &row, int i) {
  row[static_cast<size_t>(i) / 64] |= uint64_t{1} << (static_cast<size_t>(i) % 64);
}

bool any_bit(const BitRow &row) {
  for (uint64_t w : row) {
    if (w != 0) return true;
  }
  return false;
}

int lowest_bit(const BitRow &row) {
  for (size_t i = 0; i < row.size(); ++i) {
    if (row[i] != 0) {
      return static_cast<int>(i * 64 + static_cast<size_t>(__builtin_ctzll(row[i])));
    }
  }
  return -1;
}

void xor_row(BitRow &a, const BitRow &b) {
  for (size_t i = 0; i < a.size(); ++i) a[i] ^= b[i];
}

std::vector<std::vector<int>> minimum_cycle_basis(
    const std::vector<Atom> &atoms, const std::vector<Bond> &bonds,
    const std::vector<std::vector<int>> &adj, const std::vector<int> &ranks) {
  const int n = static_cast<int>(atoms.size());
  const int m = static_cast<int>(bonds.size());
  const int want = m - n + 1;
  if (want <= 0) return {};

  struct Candidate {
    std::vector<int64_t> key;  // (size, sorted invariant bond keys)
    BitRow row;
    std::vector<int> atom_cycle;
    std::vector<int> bond_set;
  };

  std::vector<int> by_rank(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) by_rank[static_cast<size_t>(i)] = i;
  std::sort(by_rank.begin(), by_rank.end(), [&](int a, int b) {
    return ranks[static_cast<size_t>(a)] < ranks[static_cast<size_t>(b)];
  });

  std::set<std::vector<int>> seen;
  std::vector<Candidate> candidates;

  std::vector<int> dist(static_cast<size_t>(n));
  std::vector<int> parent_bond(static_cast<size_t>(n));
  for (int v : by_rank) {
    // BFS with rank-ordered neighbor expansion: deterministic shortest paths
    // independent of input atom numbering.
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(parent_bond.begin(), parent_bond.end(), -1);
    std::queue<int> queue;
    dist[static_cast<size_t>(v)] = 0;
    queue.push(v);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop();
      std::vector<int> edges = adj[static_cast<size_t>(u)];
      std::sort(edges.begin(), edges.end(), [&](int x, int y) {
        return ranks[static_cast<size_t>(bonds[static_cast<size_t>(x)].other(u))] <
               ranks[static_cast<size_t>(bonds[static_cast<size_t>(y)].other(u))];
      });
      for (int bi : edges) {
        const int w = bonds[static_cast<size_t>(bi)].other(u);
        if (dist[static_cast<size_t>(w)] < 0) {
          dist[static_cast<size_t>(w)] = dist[static_cast<size_t>(u)] + 1;
          parent_bond[static_cast<size_t>(w)] = bi;
          queue.push(w);
        }
      }
    }

    auto root_path = [&](int x) {
      std::vector<int> atoms_on_path{x};
      std::vector<int> bonds_on_path;
      while (parent_bond[static_cast<size_t>(x)] >= 0) {
        const int bi = parent_bond[static_cast<size_t>(x)];
        bonds_on_path.push_back(bi);
        x = bonds[static_cast<size_t>(bi)].other(x);
        atoms_on_path.push_back(x);
      }
      return std::make_pair(atoms_on_path, bonds_on_path);
    };

    for (int bi = 0; bi < m; ++bi) {
      const Bond &bond = bonds[static_cast<size_t>(bi)];
      if (!bond.in_ring) continue;
      if (bi == parent_bond[static_cast<size_t>(bond.a)] ||
          bi == parent_bond[static_cast<size_t>(bond.b)]) {
        continue;
      }
      auto [ax, bx] = root_path(bond.a);
      auto [ay, by] = root_path(bond.b);
      // Paths must meet only at v.
      std::vector<bool> on_x(static_cast<size_t>(n), false);
      for (int a : ax) on_x[static_cast<size_t>(a)] = true;
      bool disjoint = true;
      for (int a : ay) {
        if (a != v && on_x[static_cast<size_t>(a)]) {
          disjoint = false;
          break;
        }
      }
      if (!disjoint) continue;

      std::vector<int> bond_set = bx;
      bond_set.insert(bond_set.end(), by.begin(), by.end());
      bond_set.push_back(bi);
      std::sort(bond_set.begin(), bond_set.end());
      if (!seen.insert(bond_set).second) continue;

      std::vector<int> cycle(ax.rbegin(), ax.rend());  // v ... bond.a
      cycle.insert(cycle.end(), ay.begin(), ay.end() - 1);  // bond.b ... (v)

      Candidate cand;
      cand.key.push_back(static_cast<int64_t>(bond_set.size()));
      std::vector<int64_t> bond_keys;
      for (int b2 : bond_set) {
        const Bond &bb = bonds[static_cast<size_t>(b2)];
        const int ra = std::min(ranks[static_cast<size_t>(bb.a)], ranks[static_cast<size_t>(bb.b)]);
        const int rb = std::max(ranks[static_cast<size_t>(bb.a)], ranks[static_cast<size_t>(bb.b)]);
        bond_keys.push_back((static_cast<int64_t>(ra) * 100000 + rb) * 8 +
                            static_cast<int64_t>(bb.order));
      }
      std::sort(bond_keys.begin(), bond_keys.end());
      cand.key.insert(cand.key.end(), bond_keys.begin(), bond_keys.end());
      cand.row = make_row(static_cast<size_t>(m));
      for (int b2 : bond_set) set_bit(cand.row, b2);
      cand.atom_cycle = std::move(cycle);
      cand.bond_set = std::move(bond_set);
      candidates.push_back(std::move(cand));
    }
  }

  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate &a, const Candidate &b) { return a.key < b.key; });

  std::vector<std::vector<int>> basis;
  std::map<int, BitRow> pivots;
  for (const auto &cand : candidates) {
    BitRow reduced = cand.row;
    while (any_bit(reduced)) {
      const int low = lowest_bit(reduced);
      auto it = pivots.find(low);
      if (it == pivots.end()) break;
      xor_row(reduced, it->second);
    }
    if (!any_bit(reduced)) continue;
    pivots[lowest_bit(reduced)] = reduced;
    basis.push_back(cand.atom_cycle);
    if (static_cast<int>(basis.size()) == want) break;
  }
  if (static_cast<int>(basis.size()) != want) {
    throw Error("internal: cycle basis incomplete");
  }
  return basis;
}

}  // namespace

// ---------------------------------------------------------------------------
// MolBuilder
// ---------------------------------------------------------------------------

int MolBuilder::add_atom(Atom atom, bool implicit_h) {
  atoms_.push_back(std::move(atom));
  pending_h_.push_back(implicit_h);
  return static_cast<int>(atoms_.size()) - 1;
}

void MolBuilder::add_bond(int a, int b, BondOrder order) {
  bonds_.push_back(Bond{a, b, order, false});
}

Molecule MolBuilder::finalize(const Options &options) {
  const int n = static_cast<int>(atoms_.size());
  if (n == 0) throw SyntaxError("empty molecule");

  for (const Bond &b : bonds_) {
    if (b.a < 0 || b.a >= n || b.b < 0 || b.b >= n || b.a == b.b) {
      throw SyntaxError("bond endpoints out of range");
    }
  }
  auto adjacency = build_adjacency(n, bonds_);
  for (int i = 0; i < n; ++i) {
    std::set<int> partners;
    for (int bi : adjacency[static_cast<size_t>(i)]) {
      const int w = bonds_[static_cast<size_t>(bi)].other(i);
      if (!partners.insert(w).second) {
        throw SyntaxError("duplicate bond between atoms");
      }
    }
  }

  // Connectivity.
  {
    std::vector<bool> seen(static_cast<size_t>(n), false);
    std::queue<int> queue;
    queue.push(0);
    seen[0] = true;
    int reached = 1;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop();
      for (int bi : adjacency[static_cast<size_t>(u)]) {
        const int w = bonds_[static_cast<size_t>(bi)].other(u);
        if (!seen[static_cast<size_t>(w)]) {
          seen[static_cast<size_t>(w)] = true;
          ++reached;
          queue.push(w);
        }
      }
    }
    if (reached != n) throw UnsupportedFeature("disconnected molecular graph");
  }

  mark_rings(atoms_, bonds_, adjacency);

  if (options.strict) {
    for (const Bond &b : bonds_) {
      if (b.order == BondOrder::kAromatic &&
          !(atoms_[static_cast<size_t>(b.a)].aromatic &&
            atoms_[static_cast<size_t>(b.b)].aromatic)) {
        throw SyntaxError("aromatic bond between non-aromatic atoms");
      }
    }
  }

  // Hydrogen resolution happens on the bond orders as written; Kekule
  // normalization afterwards relabels rings without touching hydrogens.
  if (options.assign_implicit_hydrogens) {
    for (int i = 0; i < n; ++i) {
      if (!pending_h_[static_cast<size_t>(i)]) continue;
      Atom &atom = atoms_[static_cast<size_t>(i)];
      int units = atom.aromatic ? 1 : 0;
      for (int bi : adjacency[static_cast<size_t>(i)]) {
        units += bond_order_units(bonds_[static_cast<size_t>(bi)].order);
      }
      const int h =
          detail::organic_implicit_hydrogens(atom.element, atom.aromatic, units);
      if (h < 0) {
        throw ValenceError("valence of " + atom.element + " exceeded");
      }
      atom.hydrogens = h;
    }
  }

  if (options.strict) {
    for (int i = 0; i < n; ++i) {
      const Atom &atom = atoms_[static_cast<size_t>(i)];
      int units = 0;
      for (int bi : adjacency[static_cast<size_t>(i)]) {
        units += bond_order_units(bonds_[static_cast<size_t>(bi)].order);
      }
      if (atom.aromatic && !atom.in_ring) {
        throw SyntaxError("aromatic atom outside a ring");
      }
      const ValenceInfo *info = find_valence(atom.element);
      if (info != nullptr && atom.charge == 0 && !pending_h_[static_cast<size_t>(i)]) {
        // Bracket atom of an organic-subset element: loose cap.
        if (units + atom.hydrogens > 6) {
          throw ValenceError("valence of " + atom.element + " exceeded");
        }
      } else if (info != nullptr && atom.charge == 0) {
        const int max_valence = *std::max_element(
            info->valences.begin(), info->valences.end());
        if (units > max_valence) {
          throw ValenceError("valence of " + atom.element + " exceeded");
        }
      } else if (units + atom.hydrogens > 6) {
        throw ValenceError("valence cap exceeded for bracket atom");
      }
    }
  }

  if (options.aromatize) {
    aromatize_kekule(atoms_, bonds_, adjacency);
  }

  Molecule mol;
  mol.atoms_ = std::move(atoms_);
  mol.bonds_ = std::move(bonds_);
  mol.adjacency_ = std::move(adjacency);

  RankWork work{&mol.atoms_, &mol.bonds_, &mol.adjacency_};
  std::vector<int> ranks = refine_ranks(work, initial_ranks(work));
  mol.canonical_ = canonical_from(work, ranks);

  // Final per-atom total order: refine until discrete, promoting by the
  // canonical string's atom emission order. Cheap equivalent: rank by
  // (refined rank, position in the canonical serialization). Re-deriving
  // positions would require re-walking; instead split ties deterministically
  // against the canonical string by re-running the branch search once and
  // keeping the winning discrete ranking.
  mol.canonical_ranks_ = ranks;
  if (distinct_count(ranks) != static_cast<int>(mol.atoms_.size())) {
    std::vector<int> current = ranks;
    while (distinct_count(current) != static_cast<int>(mol.atoms_.size())) {
      int tied = -1;
      std::vector<int> members;
      for (int r = 0; tied < 0; ++r) {
        members.clear();
        for (size_t i = 0; i < current.size(); ++i) {
          if (current[i] == r) members.push_back(static_cast<int>(i));
        }
        if (members.empty()) continue;
        if (members.size() > 1) tied = r;
      }
      std::string best;
      int best_atom = members.front();
      for (int chosen : members) {
        std::vector<std::vector<int64_t>> keys(current.size());
        for (size_t i = 0; i < current.size(); ++i) {
          keys[i] = {current[i], static_cast<int>(i) == chosen ? 0 : 1};
        }
        std::string candidate =
            canonical_from(work, refine_ranks(work, dense_rank(keys)));
        if (best.empty() || candidate < best) {
          best = std::move(candidate);
          best_atom = chosen;
        }
      }
      std::vector<std::vector<int64_t>> keys(current.size());
      for (size_t i = 0; i < current.size(); ++i) {
        keys[i] = {current[i], static_cast<int>(i) == best_atom ? 0 : 1};
      }
      current = refine_ranks(work, dense_rank(keys));
    }
    mol.canonical_ranks_ = current;
  }

  mol.rings_ = minimum_cycle_basis(mol.atoms_, mol.bonds_, mol.adjacency_,
                                   mol.canonical_ranks_);
  return mol;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct PendingBond {
  bool present = false;
  BondOrder order = BondOrder::kSingle;
  bool explicit_order = false;
};

struct RingSlot {
  int atom = -1;
  PendingBond bond;
};

class SmilesParser {
 public:
  SmilesParser(std::string_view text, const ParseOptions &options)
      : text_(text), options_(options) {}

  Molecule parse() {
    while (pos_ < text_.size()) {
      step();
    }
    if (!open_branches_.empty()) throw SyntaxError("unbalanced '('");
    if (pending_.present) throw SyntaxError("dangling bond symbol");
    for (const auto &[digit, slot] : ring_slots_) {
      (void)slot;
      throw SyntaxError("dangling ring closure " + std::to_string(digit));
    }
    if (builder_empty_) throw SyntaxError("no atoms in input");
    MolBuilder::Options opts;
    opts.strict = !options_.allow_wildcard;
    return builder_.finalize(opts);
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  char take() { return text_[pos_++]; }

  void step() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      if (prev_atom_ < 0) throw SyntaxError("branch before any atom");
      open_branches_.push_back(prev_atom_);
      return;
    }
    if (c == ')') {
      ++pos_;
      if (open_branches_.empty()) throw SyntaxError("unbalanced ')'");
      if (pending_.present) throw SyntaxError("bond symbol before ')'");
      prev_atom_ = open_branches_.back();
      open_branches_.pop_back();
      return;
    }
    if (c == '-' || c == '=' || c == '#' || c == ':' || c == '/' || c == '\\') {
      ++pos_;
      if (pending_.present) throw SyntaxError("doubled bond symbol");
      pending_.present = true;
      pending_.explicit_order = (c != '/' && c != '\\');
      pending_.order = c == '=' ? BondOrder::kDouble
                      : c == '#' ? BondOrder::kTriple
                      : c == ':' ? BondOrder::kAromatic
                                 : BondOrder::kSingle;
      return;
    }
    if (c >= '0' && c <= '9') {
      ++pos_;
      ring_closure(c - '0');
      return;
    }
    if (c == '%') {
      ++pos_;
      if (pos_ + 1 >= text_.size() + 0 || !std::isdigit(static_cast<unsigned char>(peek()))) {
        throw SyntaxError("malformed %nn ring closure");
      }
      const char d1 = take();
      if (!std::isdigit(static_cast<unsigned char>(peek()))) {
        throw SyntaxError("malformed %nn ring closure");
      }
      const char d2 = take();
      ring_closure((d1 - '0') * 10 + (d2 - '0'));
      return;
    }
    if (c == '[') {
      ++pos_;
      bracket_atom();
      return;
    }
    if (c == '.') {
      throw UnsupportedFeature("multi-component input (split it first)");
    }
    organic_atom();
  }

  void ring_closure(int digit) {
    if (prev_atom_ < 0) throw SyntaxError("ring closure before any atom");
    auto it = ring_slots_.find(digit);
    if (it == ring_slots_.end()) {
      RingSlot slot;
      slot.atom = prev_atom_;
      slot.bond = pending_;
      pending_ = PendingBond{};
      ring_slots_.emplace(digit, slot);
      return;
    }
    const RingSlot slot = it->second;
    ring_slots_.erase(it);
    if (slot.atom == prev_atom_) throw SyntaxError("ring closure to same atom");
    BondOrder order;
    if (slot.bond.explicit_order && pending_.explicit_order) {
      if (slot.bond.order != pending_.order) {
        throw SyntaxError("conflicting ring closure bond orders");
      }
      order = pending_.order;
    } else if (slot.bond.explicit_order) {
      order = slot.bond.order;
    } else if (pending_.explicit_order) {
      order = pending_.order;
    } else {
      order = default_order(slot.atom, prev_atom_);
    }
    pending_ = PendingBond{};
    auto key = std::minmax(slot.atom, prev_atom_);
    if (!bonded_pairs_.insert(key).second) {
      throw SyntaxError("duplicate bond via ring closure");
    }
    builder_.add_bond(slot.atom, prev_atom_, order);
  }

  BondOrder default_order(int a, int b) const {
    return aromatic_flags_[static_cast<size_t>(a)] &&
                   aromatic_flags_[static_cast<size_t>(b)]
               ? BondOrder::kAromatic
               : BondOrder::kSingle;
  }

  void attach(int atom_index) {
    if (prev_atom_ >= 0) {
      BondOrder order = pending_.explicit_order
                            ? pending_.order
                            : default_order(prev_atom_, atom_index);
      auto key = std::minmax(prev_atom_, atom_index);
      if (!bonded_pairs_.insert(key).second) {
        throw SyntaxError("duplicate bond between atoms");
      }
      builder_.add_bond(prev_atom_, atom_index, order);
    } else if (pending_.present) {
      throw SyntaxError("bond symbol before first atom");
    }
    pending_ = PendingBond{};
    prev_atom_ = atom_index;
  }

  void organic_atom() {
    const char c = peek();
    std::string element;
    bool aromatic = false;
    if (c == 'C' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'l') {
      element = "Cl";
      pos_ += 2;
    } else if (c == 'B' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'r') {
      element = "Br";
      pos_ += 2;
    } else if (c == 'B' || c == 'C' || c == 'N' || c == 'O' || c == 'P' ||
               c == 'S' || c == 'F' || c == 'I') {
      element = std::string(1, c);
      ++pos_;
    } else if (c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p' ||
               c == 's') {
      element = std::string(1, static_cast<char>(std::toupper(c)));
      aromatic = true;
      ++pos_;
    } else if (c == '*') {
      throw UnsupportedFeature("wildcard atom outside brackets");
    } else {
      throw SyntaxError(std::string("unexpected character '") + c + "'");
    }
    Atom atom;
    atom.element = element;
    atom.aromatic = aromatic;
    const int index = builder_.add_atom(atom, /*implicit_h=*/true);
    aromatic_flags_.push_back(aromatic);
    builder_empty_ = false;
    attach(index);
  }

  void bracket_atom() {
    if (std::isdigit(static_cast<unsigned char>(peek()))) {
      throw UnsupportedFeature("isotope specification");
    }
    Atom atom;
    const char c = peek();
    if (c == '*') {
      if (!options_.allow_wildcard) {
        throw UnsupportedFeature("wildcard atom");
      }
      atom.element = "*";
      ++pos_;
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      atom.element = std::string(1, take());
      if (pos_ < text_.size() && std::islower(static_cast<unsigned char>(peek())) &&
          peek() != 'h') {
        atom.element += take();
      }
    } else if (c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p' ||
               c == 's') {
      atom.element = std::string(1, static_cast<char>(std::toupper(take())));
      atom.aromatic = true;
    } else {
      throw SyntaxError("malformed bracket atom");
    }

    while (true) {
      const char t = peek();
      if (t == '\0') throw SyntaxError("unterminated bracket atom");
      if (t == ']') {
        ++pos_;
        break;
      }
      if (t == '@') {  // chirality parsed and discarded
        ++pos_;
        if (peek() == '@') ++pos_;
        continue;
      }
      if (t == 'H') {
        ++pos_;
        int count = 1;
        if (std::isdigit(static_cast<unsigned char>(peek()))) {
          count = take() - '0';
        }
        atom.hydrogens = count;
        continue;
      }
      if (t == '+' || t == '-') {
        const int sign = t == '+' ? 1 : -1;
        ++pos_;
        int magnitude = 1;
        if (std::isdigit(static_cast<unsigned char>(peek()))) {
          magnitude = 0;
          while (std::isdigit(static_cast<unsigned char>(peek()))) {
            magnitude = magnitude * 10 + (take() - '0');
          }
        } else {
          while (peek() == t) {
            ++magnitude;
            ++pos_;
          }
        }
        atom.charge = sign * magnitude;
        continue;
      }
      if (t == ':') {
        throw UnsupportedFeature("atom map labels");
      }
      throw SyntaxError(std::string("unexpected '") + t + "' in bracket atom");
    }

    const int index = builder_.add_atom(atom, /*implicit_h=*/false);
    aromatic_flags_.push_back(atom.aromatic);
    builder_empty_ = false;
    attach(index);
  }

  std::string_view text_;
  ParseOptions options_;
  size_t pos_ = 0;
  MolBuilder builder_;
  bool builder_empty_ = true;
  std::vector<bool> aromatic_flags_;
  int prev_atom_ = -1;
  std::vector<int> open_branches_;
  PendingBond pending_;
  std::map<int, RingSlot> ring_slots_;
  std::set<std::pair<int, int>> bonded_pairs_;
};

std::string_view trimmed(std::string_view text) {
  size_t begin = 0;
  size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return text.substr(begin, end - begin);
}

}  // namespace

Molecule parse_smiles(std::string_view text, const ParseOptions &options) {
  const std::string_view body = trimmed(text);
  if (body.empty()) throw SyntaxError("empty SMILES input");
  SmilesParser parser(body, options);
  return parser.parse();
}

std::vector<Molecule> parse_smiles_components(std::string_view text,
                                              const ParseOptions &options) {
  const std::string_view body = trimmed(text);
  std::vector<Molecule> out;
  size_t start = 0;
  for (size_t i = 0; i <= body.size(); ++i) {
    if (i == body.size() || body[i] == '.') {
      out.push_back(parse_smiles(body.substr(start, i - start), options));
      start = i + 1;
    }
  }
  return out;
}

std::string canonicalize(const Molecule &m) { return m.canonical_form(); }

const std::vector<std::vector<int>> &perceive_rings(const Molecule &m) {
  return m.rings();
}

bool isomorphic(const Molecule &a, const Molecule &b) {
  return a.canonical_form() == b.canonical_form();
}

Molecule permute_atoms(const Molecule &m, const std::vector<int> &perm) {
  const int n = m.atom_count();
  std::vector<int> inverse(static_cast<size_t>(n), -1);
  for (int i = 0; i < n; ++i) inverse[static_cast<size_t>(perm[static_cast<size_t>(i)])] = i;
  MolBuilder builder;
  for (int i = 0; i < n; ++i) {
    Atom atom = m.atom(inverse[static_cast<size_t>(i)]);
    atom.in_ring = false;
    builder.add_atom(atom, false);
  }
  for (int i = 0; i < m.bond_count(); ++i) {
    const Bond &bond = m.bond(i);
    builder.add_bond(perm[static_cast<size_t>(bond.a)], perm[static_cast<size_t>(bond.b)],
                     bond.order);
  }
  MolBuilder::Options options;
  options.assign_implicit_hydrogens = false;
  options.strict = false;
  options.aromatize = false;
  return builder.finalize(options);
}

}  // namespace scpt
