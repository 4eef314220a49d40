#include "scpt/search_baseline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "scpt/errors.hpp"
#include "scpt/fingerprint.hpp"
#include "scpt/rng.hpp"

namespace scpt {

namespace {

bool same_attrs(const Atom &a, const Atom &b) {
  return a.element == b.element && a.charge == b.charge &&
         a.aromatic == b.aromatic && a.hydrogens == b.hydrogens;
}

}  // namespace

std::vector<const FragmentLibrary::TerminalFragment *>
FragmentLibrary::terminal_with_attachments(int k) const {
  std::vector<const TerminalFragment *> out;
  for (const TerminalFragment &fragment : terminal_) {
    if (fragment.attachments == k) out.push_back(&fragment);
  }
  return out;
}

void FragmentLibrary::add_molecule(const Molecule &m) {
  const JunctionTree tree = junction_tree(m);

  // Atoms appearing in more than one fragment are anchors, not private.
  std::map<int, int> membership;
  for (const auto &node : tree.nodes) {
    for (int atom : node.atoms) ++membership[atom];
  }

  std::set<std::string> labels;
  for (const Entry &entry : fragments_) labels.insert(entry.label);
  std::set<std::string> terminal_labels;
  for (const TerminalFragment &fragment : terminal_) {
    terminal_labels.insert(fragment.label);
  }

  for (const auto &node : tree.nodes) {
    if (node.attachments < 1) continue;  // whole-molecule fragment
    if (labels.insert(node.label).second) {
      fragments_.push_back({node.label, node.attachments});
    }
    if (node.atoms.size() != 2) continue;
    const int a = node.atoms[0];
    const int b = node.atoms[1];
    const bool a_private = membership[a] == 1;
    const bool b_private = membership[b] == 1;
    if (a_private == b_private) continue;  // need exactly one terminal side
    const int anchor = a_private ? b : a;
    const int terminal = a_private ? a : b;
    const int bond = m.bond_between(a, b);
    if (bond < 0 || m.bond(bond).in_ring) continue;
    if (terminal_labels.insert(node.label).second) {
      TerminalFragment fragment;
      fragment.label = node.label;
      fragment.anchor = m.atom(anchor);
      fragment.terminal = m.atom(terminal);
      fragment.order = m.bond(bond).order;
      fragment.attachments = node.attachments;
      terminal_.push_back(std::move(fragment));
    }
  }
  std::sort(fragments_.begin(), fragments_.end(),
            [](const Entry &x, const Entry &y) { return x.label < y.label; });
  std::sort(terminal_.begin(), terminal_.end(),
            [](const TerminalFragment &x, const TerminalFragment &y) {
              return x.label < y.label;
            });
}

FragmentLibrary harvest_fragments(const std::vector<Molecule> &corpus) {
  FragmentLibrary library;
  for (const Molecule &m : corpus) library.add_molecule(m);
  return library;
}

double fitness(const Molecule &x, const Molecule &x0,
               const std::vector<PropertySpec> &specs,
               const std::vector<OracleSource> &oracles, int fp_radius,
               int fp_width) {
  PropertyProfile profile;
  for (const OracleSource &source : oracles) {
    try {
      const PropertyProfile fragment = source.lookup(x);
      for (const auto &[name, value] : fragment.values()) {
        profile.set(name, value);
      }
    } catch (const OracleMiss &) {
      return -std::numeric_limits<double>::infinity();
    }
  }
  for (const PropertySpec &spec : specs) {
    if (!profile.has(spec.name)) {
      return -std::numeric_limits<double>::infinity();
    }
  }
  const double sim = tanimoto(ecfp(x, fp_radius, fp_width),
                              ecfp(x0, fp_radius, fp_width));
  return sim + directional_score(specs, profile);
}

std::vector<Molecule> neighbors(const Molecule &x, const FragmentLibrary &library,
                                size_t max_moves) {
  const JunctionTree tree = junction_tree(x);
  std::map<int, int> membership;
  for (const auto &node : tree.nodes) {
    for (int atom : node.atoms) ++membership[atom];
  }

  std::map<std::string, Molecule> found;
  for (const auto &node : tree.nodes) {
    if (node.atoms.size() != 2) continue;
    const int a = node.atoms[0];
    const int b = node.atoms[1];
    const bool a_private = membership[a] == 1;
    const bool b_private = membership[b] == 1;
    if (a_private == b_private) continue;
    const int anchor = a_private ? b : a;
    const int terminal = a_private ? a : b;
    const int bond = x.bond_between(a, b);
    if (bond < 0 || x.bond(bond).in_ring) continue;

    for (const auto *candidate : library.terminal_with_attachments(node.attachments)) {
      if (candidate->order != x.bond(bond).order) continue;
      if (!same_attrs(candidate->anchor, x.atom(anchor))) continue;
      if (same_attrs(candidate->terminal, x.atom(terminal))) continue;

      MolBuilder builder;
      for (int i = 0; i < x.atom_count(); ++i) {
        Atom atom = i == terminal ? candidate->terminal : x.atom(i);
        atom.in_ring = false;
        builder.add_atom(atom);
      }
      for (int i = 0; i < x.bond_count(); ++i) {
        const Bond &edge = x.bond(i);
        builder.add_bond(edge.a, edge.b, edge.order);
      }
      MolBuilder::Options options;
      options.assign_implicit_hydrogens = false;
      options.strict = false;
      options.aromatize = false;
      try {
        const Molecule spliced = builder.finalize(options);
        // Valence recheck: the canonical form must survive a strict re-parse.
        const Molecule checked = parse_smiles(spliced.canonical_form());
        if (checked.canonical_form() == x.canonical_form()) continue;
        found.emplace(checked.canonical_form(), checked);
      } catch (const Error &) {
        // invalid reassembly
      }
    }
  }

  std::vector<Molecule> out;
  for (auto &[canonical, molecule] : found) {
    (void)canonical;
    out.push_back(std::move(molecule));
    if (out.size() == max_moves) break;
  }
  return out;
}

ClimbResult hill_climb(const Molecule &x0, const FragmentLibrary &library,
                       const std::vector<PropertySpec> &specs,
                       const std::vector<OracleSource> &oracles, int budget,
                       uint64_t seed, size_t max_moves, int fp_radius,
                       int fp_width) {
  Rng rng(seed);
  ClimbResult result;
  result.best = x0;
  double current_fitness = fitness(x0, x0, specs, oracles, fp_radius, fp_width);
  result.trace.push_back({0, x0.canonical_form(), current_fitness, 1.0});

  Molecule current = x0;
  for (int step = 1; step <= budget; ++step) {
    const auto moves = neighbors(current, library, max_moves);
    double best_fitness = current_fitness;
    std::vector<size_t> best_indices;
    std::vector<double> values(moves.size());
    for (size_t i = 0; i < moves.size(); ++i) {
      values[i] = fitness(moves[i], x0, specs, oracles, fp_radius, fp_width);
      if (values[i] > best_fitness) {
        best_fitness = values[i];
        best_indices.assign(1, i);
      } else if (values[i] == best_fitness && !best_indices.empty() &&
                 values[best_indices.front()] == best_fitness) {
        best_indices.push_back(i);
      }
    }
    if (best_indices.empty()) break;  // no strictly improving neighbor
    const size_t chosen =
        best_indices[best_indices.size() == 1 ? 0 : rng.below(best_indices.size())];
    current = moves[chosen];
    current_fitness = values[chosen];
    const double sim = tanimoto(ecfp(current, fp_radius, fp_width),
                                ecfp(x0, fp_radius, fp_width));
    result.trace.push_back({step, current.canonical_form(), current_fitness, sim});
  }
  result.best = current;
  return result;
}

void write_trace_tsv(const std::string &path, const std::vector<TraceRow> &trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "step\tsmiles\tfitness\tsim\n";
  char buffer[64];
  for (const TraceRow &row : trace) {
    out << row.step << '\t' << row.smiles << '\t';
    std::snprintf(buffer, sizeof(buffer), "%.6f\t%.6f\n", row.fitness, row.sim);
    out << buffer;
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace scpt
