#include "scpt/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "scpt/errors.hpp"

namespace scpt {

namespace {

struct TaskRow {
  const char *key;
  const char *display;
  int direction;
  double threshold;
};

// Documented per-task improvement margins.
constexpr TaskRow kTasks[] = {
    {"plogp", "pLogP", +1, 1.0}, {"qed", "QED", +1, 0.1},
    {"hia", "HIA", +1, 0.05},    {"bbbp", "BBBP", +1, 0.2},
    {"drd2", "DRD2", +1, 0.2},   {"mutag", "Mutag", -1, 0.1},
    {"jnk3", "JNK3", +1, 0.05},  {"gsk3b", "GSK3b", +1, 0.05},
};

std::string lower(std::string text) {
  for (char &c : text) c = static_cast<char>(std::tolower(c));
  return text;
}

std::string trim(const std::string &text) {
  size_t begin = 0;
  size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return text.substr(begin, end - begin);
}

std::vector<std::string> split_ws(const std::string &text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

double parse_double(const std::string &value, const std::string &where) {
  try {
    size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception &) {
    throw ConfigError(where + ": expected a number, got '" + value + "'");
  }
}

long parse_long(const std::string &value, const std::string &where) {
  try {
    size_t used = 0;
    const long parsed = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception &) {
    throw ConfigError(where + ": expected an integer, got '" + value + "'");
  }
}

bool parse_bool(const std::string &value, const std::string &where) {
  const std::string v = lower(value);
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ConfigError(where + ": expected a boolean, got '" + value + "'");
}

}  // namespace

PropertySpec builtin_property_spec(const std::string &task_name) {
  const std::string key = lower(trim(task_name));
  for (const TaskRow &row : kTasks) {
    if (key == row.key) {
      return PropertySpec{row.display, row.direction, 1.0, row.threshold};
    }
  }
  throw ConfigError("unknown task '" + task_name + "'");
}

RunConfig default_run_config(const std::string &task_names) {
  RunConfig config;
  config.task = task_names;
  std::istringstream in(task_names);
  std::string name;
  while (std::getline(in, name, ',')) {
    config.pipeline.specs.push_back(builtin_property_spec(name));
  }
  if (config.pipeline.specs.empty()) {
    throw ConfigError("no task names given");
  }
  if (config.pipeline.specs.size() == 1) {
    config.pipeline.delta = config.pipeline.specs.front().threshold;
    config.pipeline.all_better = false;
  } else {
    config.pipeline.delta = 0.0;
    config.pipeline.all_better = true;
  }
  // Default scorer so demos run with no external files.
  OracleDecl toy;
  toy.kind = OracleDecl::Kind::kBuiltin;
  toy.builtin_name = "additive_logp_toy";
  toy.property_name = config.pipeline.specs.front().name;
  config.oracles.push_back(toy);
  return config;
}

void RunConfig::validate() const {
  pipeline.validate();
  if (align.beta <= 0) throw ConfigError("align beta must be positive");
  if (align.lr <= 0) throw ConfigError("align lr must be positive");
  if (align.steps < 0) throw ConfigError("align steps must be >= 0");
  if (candidates_per_source < 1) {
    throw ConfigError("candidates per source must be >= 1");
  }
  if (oracles.empty()) throw ConfigError("at least one oracle is required");
}

RunConfig parse_run_config(const std::string &text, const std::string &origin) {
  struct Item {
    std::string section;
    std::string key;
    std::string value;
    size_t line;
  };
  std::vector<Item> items;
  {
    std::istringstream in(text);
    std::string line;
    std::string section;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          throw ConfigError(origin + ":" + std::to_string(line_no) +
                            ": malformed section header");
        }
        section = lower(trim(line.substr(1, line.size() - 2)));
        continue;
      }
      const size_t eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(origin + ":" + std::to_string(line_no) +
                          ": expected 'key = value'");
      }
      items.push_back({section, lower(trim(line.substr(0, eq))),
                       trim(line.substr(eq + 1)), line_no});
    }
  }

  // The task determines the spec defaults, so find it first.
  std::string task = "plogp";
  for (const Item &item : items) {
    if (item.section == "task" && item.key == "name") task = item.value;
  }
  RunConfig config = default_run_config(task);
  bool oracles_cleared = false;
  bool custom_specs = false;

  for (const Item &item : items) {
    const std::string where = origin + ":" + std::to_string(item.line);
    auto &pipeline = config.pipeline;
    if (item.section == "task") {
      if (item.key == "name") continue;
      if (item.key == "property") {
        // "property = name direction weight threshold" replaces the builtin
        // spec list (first occurrence clears it).
        const auto fields = split_ws(item.value);
        if (fields.size() != 4) {
          throw ConfigError(where + ": property needs 'name dir weight threshold'");
        }
        if (!custom_specs) {
          pipeline.specs.clear();
          custom_specs = true;
        }
        PropertySpec spec;
        spec.name = fields[0];
        spec.direction = static_cast<int>(parse_long(fields[1], where));
        spec.weight = parse_double(fields[2], where);
        spec.threshold = parse_double(fields[3], where);
        pipeline.specs.push_back(spec);
        continue;
      }
      throw ConfigError(where + ": unknown key '" + item.key + "' in [task]");
    }
    if (item.section == "pipeline") {
      if (item.key == "gamma") {
        pipeline.similarity.mode = SimilarityFilter::Mode::kThreshold;
        pipeline.similarity.gamma = parse_double(item.value, where);
      } else if (item.key == "window") {
        const auto fields = split_ws(item.value);
        if (fields.size() != 2) {
          throw ConfigError(where + ": window needs 'lo hi'");
        }
        pipeline.similarity.mode = SimilarityFilter::Mode::kWindow;
        pipeline.similarity.window_lo = parse_double(fields[0], where);
        pipeline.similarity.window_hi = parse_double(fields[1], where);
      } else if (item.key == "delta") {
        pipeline.delta = parse_double(item.value, where);
      } else if (item.key == "all_better") {
        pipeline.all_better = parse_bool(item.value, where);
      } else if (item.key == "gamma_mcs") {
        pipeline.gamma_mcs = parse_double(item.value, where);
      } else if (item.key == "mcs_budget") {
        pipeline.mcs_budget = parse_long(item.value, where);
      } else if (item.key == "strategy") {
        const std::string v = lower(item.value);
        if (v == "scaffold-blocked") {
          pipeline.strategy = PairStrategy::kScaffoldBlocked;
        } else if (v == "all-pairs") {
          pipeline.strategy = PairStrategy::kAllPairs;
        } else {
          throw ConfigError(where + ": strategy is scaffold-blocked or all-pairs");
        }
      } else if (item.key == "all_pairs_limit") {
        pipeline.all_pairs_limit = static_cast<size_t>(parse_long(item.value, where));
      } else if (item.key == "triplet_cap") {
        pipeline.triplet_cap = static_cast<int>(parse_long(item.value, where));
      } else if (item.key == "context") {
        const std::string v = lower(item.value);
        if (v == "scaffold") {
          pipeline.context = PipelineConfig::Context::kScaffold;
        } else if (v == "mcs") {
          pipeline.context = PipelineConfig::Context::kMcs;
        } else {
          throw ConfigError(where + ": context is scaffold or mcs");
        }
      } else if (item.key == "seed") {
        pipeline.seed = static_cast<uint64_t>(parse_long(item.value, where));
      } else {
        throw ConfigError(where + ": unknown key '" + item.key + "' in [pipeline]");
      }
      continue;
    }
    if (item.section == "fingerprint") {
      if (item.key == "radius") {
        pipeline.fp_radius = static_cast<int>(parse_long(item.value, where));
      } else if (item.key == "width") {
        pipeline.fp_width = static_cast<int>(parse_long(item.value, where));
      } else {
        throw ConfigError(where + ": unknown key '" + item.key + "' in [fingerprint]");
      }
      continue;
    }
    if (item.section == "oracle") {
      if (!oracles_cleared) {
        config.oracles.clear();
        oracles_cleared = true;
      }
      if (item.key == "builtin") {
        const auto fields = split_ws(item.value);
        if (fields.size() != 2) {
          throw ConfigError(where + ": builtin needs '<kind> <property-name>'");
        }
        OracleDecl decl;
        decl.kind = OracleDecl::Kind::kBuiltin;
        decl.builtin_name = lower(fields[0]);
        decl.property_name = fields[1];
        config.oracles.push_back(decl);
      } else if (item.key == "file") {
        OracleDecl decl;
        decl.kind = OracleDecl::Kind::kFile;
        decl.path = item.value;
        config.oracles.push_back(decl);
      } else {
        throw ConfigError(where + ": unknown key '" + item.key + "' in [oracle]");
      }
      continue;
    }
    if (item.section == "align") {
      if (item.key == "beta") {
        config.align.beta = parse_double(item.value, where);
      } else if (item.key == "lr") {
        config.align.lr = parse_double(item.value, where);
      } else if (item.key == "steps") {
        config.align.steps = static_cast<int>(parse_long(item.value, where));
      } else if (item.key == "mode") {
        const std::string v = lower(item.value);
        if (v == "reference-normalized") {
          config.align.mode = MarginMode::kReferenceNormalized;
        } else if (v == "as-written") {
          config.align.mode = MarginMode::kAsWritten;
        } else {
          throw ConfigError(where + ": mode is reference-normalized or as-written");
        }
      } else if (item.key == "context_order") {
        config.align.context_order = static_cast<int>(parse_long(item.value, where));
      } else {
        throw ConfigError(where + ": unknown key '" + item.key + "' in [align]");
      }
      continue;
    }
    if (item.section == "eval") {
      if (item.key == "candidates") {
        config.candidates_per_source = static_cast<int>(parse_long(item.value, where));
      } else {
        throw ConfigError(where + ": unknown key '" + item.key + "' in [eval]");
      }
      continue;
    }
    if (item.section == "corpus") {
      if (item.key == "multi_component") {
        const std::string v = lower(item.value);
        if (v == "split") {
          config.split_components = true;
        } else if (v == "reject") {
          config.split_components = false;
        } else {
          throw ConfigError(where + ": multi_component is reject or split");
        }
      } else {
        throw ConfigError(where + ": unknown key '" + item.key + "' in [corpus]");
      }
      continue;
    }
    throw ConfigError(where + ": unknown section '[" + item.section + "]'");
  }

  config.validate();
  return config;
}

RunConfig load_run_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str(), path);
}

std::vector<OracleSource> resolve_oracles(const RunConfig &config) {
  std::vector<OracleSource> sources;
  for (const OracleDecl &decl : config.oracles) {
    if (decl.kind == OracleDecl::Kind::kFile) {
      sources.push_back(OracleSource::from_tsv(decl.path));
      continue;
    }
    BuiltinOracle kind;
    if (decl.builtin_name == "heavy_atom_count") {
      kind = BuiltinOracle::kHeavyAtomCount;
    } else if (decl.builtin_name == "ring_count") {
      kind = BuiltinOracle::kRingCount;
    } else if (decl.builtin_name == "hetero_fraction") {
      kind = BuiltinOracle::kHeteroFraction;
    } else if (decl.builtin_name == "additive_logp_toy") {
      kind = BuiltinOracle::kAdditiveLogpToy;
    } else {
      throw ConfigError("unknown builtin oracle '" + decl.builtin_name + "'");
    }
    sources.push_back(OracleSource::builtin(kind, decl.property_name));
  }
  return sources;
}

std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig &config) {
  std::vector<std::pair<std::string, std::string>> echo;
  auto num = [](double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%g", v);
    return std::string(buffer);
  };
  echo.emplace_back("task.name", config.task);
  for (const PropertySpec &spec : config.pipeline.specs) {
    echo.emplace_back("task.property",
                      spec.name + " " + std::to_string(spec.direction) + " " +
                          num(spec.weight) + " " + num(spec.threshold));
  }
  const auto &sim = config.pipeline.similarity;
  if (sim.mode == SimilarityFilter::Mode::kThreshold) {
    echo.emplace_back("pipeline.gamma", num(sim.gamma));
  } else {
    echo.emplace_back("pipeline.window", num(sim.window_lo) + " " + num(sim.window_hi));
  }
  echo.emplace_back("pipeline.delta", num(config.pipeline.delta));
  echo.emplace_back("pipeline.all_better", config.pipeline.all_better ? "true" : "false");
  echo.emplace_back("pipeline.gamma_mcs", num(config.pipeline.gamma_mcs));
  echo.emplace_back("pipeline.mcs_budget", std::to_string(config.pipeline.mcs_budget));
  echo.emplace_back("pipeline.strategy",
                    config.pipeline.strategy == PairStrategy::kScaffoldBlocked
                        ? "scaffold-blocked"
                        : "all-pairs");
  echo.emplace_back("pipeline.triplet_cap", std::to_string(config.pipeline.triplet_cap));
  echo.emplace_back("pipeline.context",
                    config.pipeline.context == PipelineConfig::Context::kScaffold
                        ? "scaffold"
                        : "mcs");
  echo.emplace_back("pipeline.seed", std::to_string(config.pipeline.seed));
  echo.emplace_back("fingerprint.radius", std::to_string(config.pipeline.fp_radius));
  echo.emplace_back("fingerprint.width", std::to_string(config.pipeline.fp_width));
  for (const OracleDecl &decl : config.oracles) {
    if (decl.kind == OracleDecl::Kind::kBuiltin) {
      echo.emplace_back("oracle.builtin", decl.builtin_name + " " + decl.property_name);
    } else {
      echo.emplace_back("oracle.file", decl.path);
    }
  }
  echo.emplace_back("align.beta", num(config.align.beta));
  echo.emplace_back("align.lr", num(config.align.lr));
  echo.emplace_back("align.steps", std::to_string(config.align.steps));
  echo.emplace_back("align.mode", config.align.mode == MarginMode::kReferenceNormalized
                                      ? "reference-normalized"
                                      : "as-written");
  echo.emplace_back("eval.candidates", std::to_string(config.candidates_per_source));
  return echo;
}

}  // namespace scpt
