#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "scpt/errors.hpp"
#include "scpt/molgraph.hpp"
#include "scpt/properties.hpp"

using namespace scpt;

namespace {

PropertyProfile profile2(double a, double b) {
  PropertyProfile p;
  p.set("alpha", a);
  p.set("beta", b);
  return p;
}

}  // namespace

TEST_CASE("delta_p direct arithmetic") {
  const std::vector<PropertySpec> specs = {{"alpha", +1, 1.0, 0.0},
                                           {"beta", -1, 1.0, 0.0}};
  // (0.5-0.2) + (-(0.3-0.5)) = 0.3 + 0.2 = 0.5
  CHECK(delta_p(specs, profile2(0.2, 0.5), profile2(0.5, 0.3)) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(delta_p(specs, profile2(0.2, 0.5), profile2(0.2, 0.5)) == 0.0);
}

TEST_CASE("delta_p is antisymmetric and scales with weights") {
  const std::vector<PropertySpec> specs = {{"alpha", +1, 2.0, 0.0},
                                           {"beta", -1, 0.5, 0.0}};
  const PropertyProfile a = profile2(1.0, -0.4);
  const PropertyProfile b = profile2(0.1, 2.25);
  CHECK(delta_p(specs, a, b) == doctest::Approx(-delta_p(specs, b, a)));

  std::vector<PropertySpec> scaled = specs;
  for (auto &s : scaled) s.weight *= 3.0;
  CHECK(delta_p(scaled, a, b) == doctest::Approx(3.0 * delta_p(specs, a, b)));
}

TEST_CASE("delta_p paper threshold boundaries") {
  // Single-property pass tests at the documented margins.
  const std::vector<PropertySpec> drd2 = {{"drd2", +1, 1.0, 0.2}};
  PropertyProfile ds, dz;
  ds.set("drd2", 0.1);
  dz.set("drd2", 0.3);
  CHECK(delta_p(drd2, ds, dz) == doctest::Approx(0.2));
  const std::vector<PropertySpec> plogp = {{"plogp", +1, 1.0, 1.0}};
  PropertyProfile sou, opt;
  sou.set("plogp", 1.4);
  opt.set("plogp", 2.4);
  CHECK(delta_p(plogp, sou, opt) >= 1.0);
  const std::vector<PropertySpec> mutag = {{"mutag", -1, 1.0, 0.1}};
  PropertyProfile ms, mo;
  ms.set("mutag", -0.2);
  mo.set("mutag", -0.3);
  CHECK(delta_p(mutag, ms, mo) == doctest::Approx(0.1));
}

TEST_CASE("delta_p missing property raises") {
  const std::vector<PropertySpec> specs = {{"gamma", +1, 1.0, 0.0}};
  CHECK_THROWS_AS(delta_p(specs, profile2(0, 0), profile2(0, 0)), MissingProperty);
}

TEST_CASE("all_better thresholds are inclusive") {
  // Thresholds and values chosen binary-exact so the inclusive boundary is
  // testable without tolerance.
  const std::vector<PropertySpec> specs = {{"alpha", +1, 1.0, 0.25},
                                           {"beta", -1, 1.0, 0.25}};
  // Gains exactly at threshold: kept.
  CHECK(all_better(specs, profile2(0.0, 1.0), profile2(0.25, 0.75)));
  // One property regressing: dropped.
  CHECK_FALSE(all_better(specs, profile2(0.0, 1.0), profile2(0.5, 1.25)));
  // Single property reduces to the threshold test.
  const std::vector<PropertySpec> one = {{"alpha", +1, 1.0, 0.25}};
  CHECK(all_better(one, profile2(0.0, 0), profile2(0.25, 0)));
  CHECK_FALSE(all_better(one, profile2(0.0, 0), profile2(0.249, 0)));
}

TEST_CASE("all_better with zero thresholds means every component non-negative") {
  const std::vector<PropertySpec> specs = {{"alpha", +1, 1.0, 0.0},
                                           {"beta", -1, 1.0, 0.0}};
  CHECK(all_better(specs, profile2(0.5, 0.5), profile2(0.5, 0.5)));
  CHECK_FALSE(all_better(specs, profile2(0.5, 0.5), profile2(0.4999, 0.5)));
}

TEST_CASE("builtin oracles") {
  const auto heavy = OracleSource::builtin(BuiltinOracle::kHeavyAtomCount, "heavy");
  CHECK(heavy.lookup(parse_smiles("CCO")).at("heavy") == 3.0);
  const auto rings = OracleSource::builtin(BuiltinOracle::kRingCount, "rings");
  CHECK(rings.lookup(parse_smiles("c1ccccc1")).at("rings") == 1.0);
  CHECK(rings.lookup(parse_smiles("CCO")).at("rings") == 0.0);
  const auto hetero = OracleSource::builtin(BuiltinOracle::kHeteroFraction, "hf");
  CHECK(hetero.lookup(parse_smiles("CCO")).at("hf") == doctest::Approx(1.0 / 3.0));

  const auto toy = OracleSource::builtin(BuiltinOracle::kAdditiveLogpToy, "plogp");
  // Additivity: disjoint fragments sum.
  const double c2 = toy.lookup(parse_smiles("CC")).at("plogp");
  const double c4 = toy.lookup(parse_smiles("CCCC")).at("plogp");
  CHECK(c4 == doctest::Approx(2.0 * c2));
}

TEST_CASE("file-backed oracle returns exact fixture rows") {
  const std::string path = "props_fixture_test.tsv";
  {
    std::ofstream out(path);
    out << "smiles\tplogp\tqed\n";
    out << "CCO\t1.5\t0.61\n";
    out << "CCN\t0.9\t0.55\n";
    out << "OCC\t1.5\t0.61\n";  // duplicate key, same values: fine
    out << "c1ccccc1\t2.2\t0.41\n";
    out << "CCC\t2.0\t0.50\n";
    out << "CCCC\t2.5\t0.45\n";
    out << "CCOC\t1.1\t0.62\n";
    out << "CCCO\t1.3\t0.58\n";
    out << "CC(C)C\t2.4\t0.47\n";
    out << "CC(=O)O\t0.2\t0.33\n";
  }
  const OracleSource oracle = OracleSource::from_tsv(path);
  CHECK(oracle.property_names() == std::vector<std::string>{"plogp", "qed"});
  const PropertyProfile row = oracle.lookup(parse_smiles("OCC"));
  CHECK(row.at("plogp") == 1.5);
  CHECK(row.at("qed") == 0.61);
  CHECK_THROWS_AS(oracle.lookup(parse_smiles("CBr")), OracleMiss);
  std::remove(path.c_str());
}

TEST_CASE("file-backed oracle rejects conflicting duplicates") {
  const std::string path = "props_conflict_test.tsv";
  {
    std::ofstream out(path);
    out << "smiles\tplogp\n";
    out << "CCO\t1.5\n";
    out << "OCC\t1.6\n";  // same canonical key, different value
  }
  CHECK_THROWS_AS(OracleSource::from_tsv(path), IoError);
  std::remove(path.c_str());
}

TEST_CASE("file-backed oracle rejects malformed tables") {
  const std::string path = "props_bad_test.tsv";
  {
    std::ofstream out(path);
    out << "plogp\tsmiles\n";
  }
  CHECK_THROWS_AS(OracleSource::from_tsv(path), IoError);
  {
    std::ofstream out(path);
    out << "smiles\tplogp\n";
    out << "CCO\tnot_a_number\n";
  }
  CHECK_THROWS_AS(OracleSource::from_tsv(path), IoError);
  std::remove(path.c_str());
}
