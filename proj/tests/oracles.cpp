#include "oracles.hpp"

#include <algorithm>
#include <map>
#include <queue>

#include "scpt/rng.hpp"

namespace testoracle {

using scpt::Atom;
using scpt::Bond;
using scpt::Fingerprint;
using scpt::Molecule;

std::vector<std::vector<int>> enumerate_simple_cycles(const Molecule &m) {
  const int n = m.atom_count();
  std::vector<std::vector<int>> cycles;
  std::vector<int> path;
  std::vector<bool> on_path(static_cast<size_t>(n), false);

  auto dfs = [&](auto &&self, int start, int current) -> void {
    for (int bi : m.bonds_of(current)) {
      const int w = m.bond(bi).other(current);
      if (w == start && path.size() >= 3) {
        if (path[1] < path.back()) cycles.push_back(path);
        continue;
      }
      if (w <= start || on_path[static_cast<size_t>(w)]) continue;
      on_path[static_cast<size_t>(w)] = true;
      path.push_back(w);
      self(self, start, w);
      path.pop_back();
      on_path[static_cast<size_t>(w)] = false;
    }
  };

  for (int s = 0; s < n; ++s) {
    on_path[static_cast<size_t>(s)] = true;
    path.assign(1, s);
    dfs(dfs, s, s);
    on_path[static_cast<size_t>(s)] = false;
  }
  return cycles;
}

namespace {

std::vector<uint64_t> cycle_to_bond_row(const Molecule &m,
                                        const std::vector<int> &cycle) {
  std::vector<uint64_t> row(static_cast<size_t>(m.bond_count() + 63) / 64, 0);
  for (size_t i = 0; i < cycle.size(); ++i) {
    const int a = cycle[i];
    const int b = cycle[(i + 1) % cycle.size()];
    const int bi = m.bond_between(a, b);
    row[static_cast<size_t>(bi) / 64] |= uint64_t{1} << (static_cast<size_t>(bi) % 64);
  }
  return row;
}

bool reduce_against(std::vector<uint64_t> &row,
                    const std::map<int, std::vector<uint64_t>> &pivots) {
  auto lowest = [](const std::vector<uint64_t> &r) {
    for (size_t i = 0; i < r.size(); ++i) {
      if (r[i] != 0) {
        return static_cast<int>(i * 64 +
                                static_cast<size_t>(__builtin_ctzll(r[i])));
      }
    }
    return -1;
  };
  while (true) {
    const int low = lowest(row);
    if (low < 0) return false;  // dependent
    auto it = pivots.find(low);
    if (it == pivots.end()) return true;
    for (size_t i = 0; i < row.size(); ++i) row[i] ^= it->second[i];
  }
}

}  // namespace

size_t minimum_cycle_basis_weight(const Molecule &m, int rank) {
  auto cycles = enumerate_simple_cycles(m);
  std::sort(cycles.begin(), cycles.end(),
            [](const auto &a, const auto &b) { return a.size() < b.size(); });
  std::map<int, std::vector<uint64_t>> pivots;
  size_t total = 0;
  int chosen = 0;
  for (const auto &cycle : cycles) {
    std::vector<uint64_t> row = cycle_to_bond_row(m, cycle);
    if (!reduce_against(row, pivots)) continue;
    int low = -1;
    for (size_t i = 0; i < row.size(); ++i) {
      if (row[i] != 0) {
        low = static_cast<int>(i * 64 + static_cast<size_t>(__builtin_ctzll(row[i])));
        break;
      }
    }
    pivots[low] = row;
    total += cycle.size();
    if (++chosen == rank) return total;
  }
  return total;
}

double tanimoto_via_sets(const Fingerprint &a, const Fingerprint &b) {
  std::set<int> sa, sb;
  for (int bit : a.set_bits()) sa.insert(bit);
  for (int bit : b.set_bits()) sb.insert(bit);
  std::vector<int> inter, uni;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                        std::back_inserter(inter));
  std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(),
                 std::back_inserter(uni));
  if (uni.empty()) return 1.0;
  return static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

namespace {

// Explicit copy of the <= r neighborhood around a root atom. Atom slots keep
// the ORIGINAL molecule's invariant data (degree and ring flags included) so
// codes describe the molecule, not the extracted slice.
struct Ball {
  struct Slot {
    uint64_t invariant;
    std::vector<std::pair<uint64_t, int>> edges;  // (bond code, slot index)
  };
  std::vector<Slot> slots;
  int root = 0;
};

uint64_t original_invariant(const Molecule &m, int index) {
  const Atom &atom = m.atom(index);
  uint64_t h = scpt::mix64(0x5c9f0e1d2b3a4857ULL);
  for (char c : atom.element) {
    h = scpt::hash_combine(h, static_cast<uint64_t>(static_cast<unsigned char>(c)));
  }
  h = scpt::hash_combine(h, static_cast<uint64_t>(atom.charge + 16));
  h = scpt::hash_combine(h, static_cast<uint64_t>(m.degree(index)));
  h = scpt::hash_combine(h, static_cast<uint64_t>(atom.hydrogens));
  h = scpt::hash_combine(h, atom.aromatic ? 1 : 0);
  h = scpt::hash_combine(h, atom.in_ring ? 1 : 0);
  return h;
}

Ball extract_ball(const Molecule &m, int root, int radius) {
  std::map<int, int> slot_of;
  std::queue<int> queue;
  std::map<int, int> dist;
  dist[root] = 0;
  queue.push(root);
  std::vector<int> members{root};
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop();
    if (dist[u] == radius) continue;
    for (int bi : m.bonds_of(u)) {
      const int w = m.bond(bi).other(u);
      if (dist.count(w)) continue;
      dist[w] = dist[u] + 1;
      members.push_back(w);
      queue.push(w);
    }
  }
  Ball ball;
  for (int atom : members) {
    slot_of[atom] = static_cast<int>(ball.slots.size());
    ball.slots.push_back({original_invariant(m, atom), {}});
  }
  for (int atom : members) {
    for (int bi : m.bonds_of(atom)) {
      const Bond &bond = m.bond(bi);
      const int w = bond.other(atom);
      if (!slot_of.count(w)) continue;
      ball.slots[static_cast<size_t>(slot_of[atom])].edges.emplace_back(
          static_cast<uint64_t>(bond.order), slot_of[w]);
    }
  }
  ball.root = slot_of[root];
  return ball;
}

// Recursive canonical environment code on the extracted copy; re-walks the
// whole dependency tree each call.
uint64_t ball_code(const Ball &ball, int slot, int depth) {
  if (depth == 0) return ball.slots[static_cast<size_t>(slot)].invariant;
  std::vector<std::pair<uint64_t, uint64_t>> nbrs;
  for (const auto &[bond, other] : ball.slots[static_cast<size_t>(slot)].edges) {
    nbrs.emplace_back(bond, ball_code(ball, other, depth - 1));
  }
  std::sort(nbrs.begin(), nbrs.end());
  uint64_t h = scpt::mix64(static_cast<uint64_t>(depth) + 0x9042ULL);
  h = scpt::hash_combine(h, ball_code(ball, slot, depth - 1));
  for (const auto &[bond, code] : nbrs) {
    h = scpt::hash_combine(h, bond);
    h = scpt::hash_combine(h, code);
  }
  return h;
}

}  // namespace

std::vector<uint64_t> ecfp_codes_by_subgraph_extraction(const Molecule &m,
                                                        int radius) {
  std::vector<uint64_t> codes;
  for (int r = 0; r <= radius; ++r) {
    for (int atom = 0; atom < m.atom_count(); ++atom) {
      const Ball ball = extract_ball(m, atom, r);
      codes.push_back(ball_code(ball, ball.root, r));
    }
  }
  return codes;
}

namespace {

bool atoms_compatible(const Atom &a, const Atom &b) {
  return a.element == b.element && a.aromatic == b.aromatic;
}

// All connected atom subsets of m (as sorted index vectors).
std::vector<std::vector<int>> connected_subsets(const Molecule &m) {
  const int n = m.atom_count();
  std::set<std::vector<int>> seen;
  // Grow sets breadth-first from every singleton.
  std::queue<std::vector<int>> queue;
  for (int i = 0; i < n; ++i) {
    std::vector<int> s{i};
    if (seen.insert(s).second) queue.push(s);
  }
  while (!queue.empty()) {
    auto s = queue.front();
    queue.pop();
    std::set<int> in_set(s.begin(), s.end());
    for (int atom : s) {
      for (int bi : m.bonds_of(atom)) {
        const int w = m.bond(bi).other(atom);
        if (in_set.count(w)) continue;
        std::vector<int> grown = s;
        grown.insert(std::lower_bound(grown.begin(), grown.end(), w), w);
        if (seen.insert(grown).second) queue.push(grown);
      }
    }
  }
  return {seen.begin(), seen.end()};
}

// Injective induced embedding of subset (from a) into b.
bool embeds(const Molecule &a, const std::vector<int> &subset, const Molecule &b) {
  const size_t k = subset.size();
  std::vector<int> image(k, -1);
  std::vector<bool> used(static_cast<size_t>(b.atom_count()), false);

  auto consistent = [&](size_t pos, int candidate) {
    if (!atoms_compatible(a.atom(subset[pos]), b.atom(candidate))) return false;
    for (size_t i = 0; i < pos; ++i) {
      const int bond_a = a.bond_between(subset[pos], subset[i]);
      const int bond_b = b.bond_between(candidate, image[i]);
      if ((bond_a >= 0) != (bond_b >= 0)) return false;
      if (bond_a >= 0 && a.bond(bond_a).order != b.bond(bond_b).order) return false;
    }
    return true;
  };

  auto search = [&](auto &&self, size_t pos) -> bool {
    if (pos == k) return true;
    for (int candidate = 0; candidate < b.atom_count(); ++candidate) {
      if (used[static_cast<size_t>(candidate)]) continue;
      if (!consistent(pos, candidate)) continue;
      used[static_cast<size_t>(candidate)] = true;
      image[pos] = candidate;
      if (self(self, pos + 1)) return true;
      used[static_cast<size_t>(candidate)] = false;
    }
    return false;
  };
  return search(search, 0);
}

}  // namespace

int exhaustive_mcs_atoms(const Molecule &a, const Molecule &b) {
  const Molecule &small = a.atom_count() <= b.atom_count() ? a : b;
  const Molecule &large = a.atom_count() <= b.atom_count() ? b : a;
  auto subsets = connected_subsets(small);
  std::sort(subsets.begin(), subsets.end(),
            [](const auto &x, const auto &y) { return x.size() > y.size(); });
  for (const auto &subset : subsets) {
    if (embeds(small, subset, large)) return static_cast<int>(subset.size());
  }
  return 0;
}

}  // namespace testoracle
