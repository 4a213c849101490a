#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "pitomo/serialization.hpp"
#include "support.hpp"

using namespace pitomo;

TEST_SUITE("serialization") {

TEST_CASE("ensembles round-trip bit-exactly") {
  for (int n = 1; n <= 6; ++n) {
    const SpinEnsemble e = random_pi_state(SpinSectorLayout(n), PurityMode::HilbertSchmidtMixed, 10 + n);
    const SpinEnsemble back = ensemble_from_json(Json::parse(ensemble_to_json(e).dump()));
    for (std::size_t s = 0; s < e.blocks.size(); ++s) CHECK((back.blocks[s].array() == e.blocks[s].array()).all());
  }
  const Json j = ensemble_to_json(ghz_ensemble(2));
  CHECK(j["n_qubits"] == 2);
  CHECK(j["blocks"][1]["two_j"] == 2);
  CHECK(j["blocks"][1]["matrix"][0][2][0].get<double>() == 0.5);
}

TEST_CASE("ensemble schema errors") {
  Json j = ensemble_to_json(ghz_ensemble(3));
  // Omitted sectors are zero blocks.
  Json zero = j;
  zero["blocks"].erase(0);
  CHECK(trace_distance(ensemble_from_json(zero), ghz_ensemble(3)) == 0.0);
  Json missing = j;
  missing["blocks"].erase(1);
  CHECK_THROWS_AS(ensemble_from_json(missing), SchemaError);
  Json wrong = j;
  wrong["blocks"][0]["two_j"] = 2;
  CHECK_THROWS_AS(ensemble_from_json(wrong), SchemaError);
  Json shape = j;
  shape["blocks"][0]["matrix"][0].erase(0);
  CHECK_THROWS_AS(ensemble_from_json(shape), SchemaError);
  Json invalid = j;
  invalid["blocks"][1]["matrix"][0][0][0] = 2.0;
  CHECK_THROWS(ensemble_from_json(invalid));
  CHECK_NOTHROW(ensemble_from_json(invalid, false));
  CHECK_THROWS_AS(ensemble_from_json(Json::parse("[1, 2]")), SchemaError);
  Json big = j;
  big["n_qubits"] = 40;
  CHECK_THROWS(ensemble_from_json(big));
}

TEST_CASE("settings") {
  std::vector<std::string> warnings;
  const auto s = settings_from_json(Json::parse("[[0, 0, 2], [1, 0, 0], [0.6, 0.8, 0]]"), &warnings);
  REQUIRE(s.size() == 3);
  CHECK(s[0].axis == Vector3::UnitZ());
  CHECK(warnings.size() == 1);
  CHECK(settings_to_json(s)[2][1].get<double>() == 0.8);
  CHECK_THROWS_AS(settings_from_json(Json::parse("[[0, 0, 0]]")), SchemaError);
  CHECK_THROWS_AS(settings_from_json(Json::parse("[[0, 1]]")), SchemaError);
  CHECK_THROWS_AS(settings_from_json(Json::parse("{\"a\": 1}")), SchemaError);
}

TEST_CASE("datasets") {
  Rng rng(4);
  const SpinEnsemble e = random_pi_state(SpinSectorLayout(4), PurityMode::HaarPure, rng);
  const auto settings = random_settings(7, rng);
  for (const Dataset& d : {sample_dataset(e, settings, 321, rng), exact_dataset(e, settings)}) {
    const Dataset back = dataset_from_json(Json::parse(dataset_to_json(d).dump()));
    CHECK(back.exact == d.exact);
    CHECK(back.n_qubits == 4);
    REQUIRE(back.records.size() == d.records.size());
    for (std::size_t i = 0; i < d.records.size(); ++i) {
      CHECK((back.records[i].counts.array() == d.records[i].counts.array()).all());
      CHECK((back.records[i].setting.axis.array() == d.records[i].setting.axis.array()).all());
      CHECK(back.records[i].repetitions == d.records[i].repetitions);
    }
  }
  const Json sampled = dataset_to_json(sample_dataset(e, settings, 10, 1));
  CHECK(sampled["records"][0]["counts"][0].is_number_integer());

  Json bad = sampled;
  bad["records"][0]["counts"][0] = bad["records"][0]["counts"][0].get<int>() + 1;
  CHECK_THROWS_AS(dataset_from_json(bad), std::invalid_argument);
  bad = sampled;
  bad["records"][0].erase("repetitions");
  CHECK_THROWS_AS(dataset_from_json(bad), SchemaError);
  bad = sampled;
  bad["exact"] = "yes";
  CHECK_THROWS_AS(dataset_from_json(bad), SchemaError);
}

TEST_CASE("witness and result documents") {
  PretestWitness w;
  w.n_qubits = 2;
  w.settings = standard_settings();
  Rng rng(3);
  for (int a = 0; a < 3; ++a) w.z.push_back(RealVector::Random(3));
  const PretestWitness back = witness_from_json(Json::parse(witness_to_json(w).dump()));
  REQUIRE(back.z.size() == 3);
  for (int a = 0; a < 3; ++a) CHECK((back.z[a].array() == w.z[a].array()).all());
  CHECK(witness_to_json(w)["c_z_squared"].get<double>() == w.c_z_squared());
  Json bad = witness_to_json(w);
  bad["z"].erase(0);
  CHECK_THROWS(witness_from_json(bad));

  const Dataset d = sample_dataset(ghz_ensemble(2), standard_settings(), 100, 5);
  const ReconstructionResult r = reconstruct(d, FitSpec::hedged(1e-3));
  const Json jr = result_to_json(r, FitSpec::hedged(1e-3));
  CHECK(jr["principle"] == "hedged");
  CHECK(jr["beta"].get<double>() == 1e-3);
  CHECK(jr["gap_bound"].get<double>() == r.gap_bound);
  CHECK(jr["trace"].size() == r.trace.size());
  CHECK_NOTHROW(ensemble_from_json(jr["estimate"]));
}

TEST_CASE("files") {
  const auto path = std::filesystem::temp_directory_path() / "pitomo_serialization_test.json";
  const Json j = ensemble_to_json(dicke_ensemble(3, 1));
  write_json_file(path.string(), j);
  CHECK(read_json_file(path.string()) == j);
  std::filesystem::remove(path);
  CHECK_THROWS(read_json_file(path.string()));
  {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    std::fputs("{ not json", f);
    std::fclose(f);
  }
  CHECK_THROWS(read_json_file(path.string()));
  std::filesystem::remove(path);
}

}  // TEST_SUITE
