#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scpt/config.hpp"
#include "scpt/errors.hpp"

using namespace scpt;

TEST_CASE("default config snapshot: per-task margins and pipeline knobs") {
  // Per-property improvement margins.
  CHECK(builtin_property_spec("plogp").threshold == 1.0);
  CHECK(builtin_property_spec("plogp").direction == +1);
  CHECK(builtin_property_spec("qed").threshold == 0.1);
  CHECK(builtin_property_spec("hia").threshold == 0.05);
  CHECK(builtin_property_spec("bbbp").threshold == 0.2);
  CHECK(builtin_property_spec("drd2").threshold == 0.2);
  CHECK(builtin_property_spec("mutag").threshold == 0.1);
  CHECK(builtin_property_spec("mutag").direction == -1);
  CHECK(builtin_property_spec("jnk3").threshold == 0.05);
  CHECK(builtin_property_spec("gsk3b").threshold == 0.05);
  for (const char *name : {"plogp", "qed", "hia", "bbbp", "drd2", "mutag",
                           "jnk3", "gsk3b"}) {
    CHECK(builtin_property_spec(name).weight == 1.0);
  }

  const RunConfig config = default_run_config("plogp");
  CHECK(config.pipeline.similarity.gamma == 0.6);
  CHECK(config.pipeline.gamma_mcs == 0.9);
  CHECK(config.candidates_per_source == 20);
  CHECK(config.align.beta == 0.5);
  CHECK(config.pipeline.delta == 1.0);  // single-property margin
  CHECK_FALSE(config.pipeline.all_better);
}

TEST_CASE("multi-property tasks switch to the all-better criterion") {
  const RunConfig config = default_run_config("bbbp,drd2,qed");
  REQUIRE(config.pipeline.specs.size() == 3);
  CHECK(config.pipeline.all_better);
  CHECK(config.pipeline.delta == 0.0);
  CHECK(config.pipeline.specs[0].name == "BBBP");
  CHECK(config.pipeline.specs[1].name == "DRD2");
  CHECK(config.pipeline.specs[2].name == "QED");
}

TEST_CASE("config text round trip") {
  const std::string text = R"(
# pipeline settings
[task]
name = drd2

[pipeline]
gamma = 0.7
delta = 0.3
gamma_mcs = 0.85
triplet_cap = 10
seed = 42

[fingerprint]
radius = 3
width = 1024

[oracle]
builtin = additive_logp_toy DRD2

[align]
beta = 0.3
lr = 0.05
steps = 100
mode = as-written
)";
  const RunConfig config = parse_run_config(text, "<test>");
  CHECK(config.task == "drd2");
  CHECK(config.pipeline.similarity.gamma == 0.7);
  CHECK(config.pipeline.delta == 0.3);
  CHECK(config.pipeline.gamma_mcs == 0.85);
  CHECK(config.pipeline.triplet_cap == 10);
  CHECK(config.pipeline.seed == 42);
  CHECK(config.pipeline.fp_radius == 3);
  CHECK(config.pipeline.fp_width == 1024);
  REQUIRE(config.oracles.size() == 1);
  CHECK(config.oracles[0].property_name == "DRD2");
  CHECK(config.align.beta == 0.3);
  CHECK(config.align.mode == MarginMode::kAsWritten);
}

TEST_CASE("window mode and custom properties") {
  const std::string text = R"(
[task]
name = plogp
property = toxicity -1 2.0 0.1
property = potency 1 1.0 0.5

[pipeline]
window = 0.7 0.8
)";
  const RunConfig config = parse_run_config(text, "<test>");
  REQUIRE(config.pipeline.specs.size() == 2);
  CHECK(config.pipeline.specs[0].name == "toxicity");
  CHECK(config.pipeline.specs[0].direction == -1);
  CHECK(config.pipeline.specs[0].weight == 2.0);
  CHECK(config.pipeline.specs[1].name == "potency");
  CHECK(config.pipeline.similarity.mode == SimilarityFilter::Mode::kWindow);
  CHECK(config.pipeline.similarity.window_lo == 0.7);
  CHECK(config.pipeline.similarity.window_hi == 0.8);
}

TEST_CASE("unknown keys, sections and tasks are errors") {
  CHECK_THROWS_AS(parse_run_config("[pipeline]\nbogus = 1\n", "<t>"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[nonsense]\nx = 1\n", "<t>"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[task]\nname = unobtainium\n", "<t>"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[pipeline]\ngamma\n", "<t>"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[pipeline]\ngamma = high\n", "<t>"), ConfigError);
  CHECK_THROWS_AS(default_run_config("unobtainium"), ConfigError);
}

TEST_CASE("validation catches bad values from config files") {
  CHECK_THROWS_AS(parse_run_config("[pipeline]\ngamma = 1.5\n", "<t>"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[align]\nbeta = 0\n", "<t>"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[eval]\ncandidates = 0\n", "<t>"), ConfigError);
}

TEST_CASE("config echo covers every knob deterministically") {
  const RunConfig config = default_run_config("plogp");
  const auto echo = config_echo(config);
  auto find = [&](const std::string &key) {
    for (const auto &[k, v] : echo) {
      if (k == key) return v;
    }
    return std::string("<missing>");
  };
  CHECK(find("pipeline.gamma") == "0.6");
  CHECK(find("pipeline.gamma_mcs") == "0.9");
  CHECK(find("align.beta") == "0.5");
  CHECK(find("eval.candidates") == "20");
  CHECK(find("pipeline.delta") == "1");
}
