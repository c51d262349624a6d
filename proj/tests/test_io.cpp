#include "doctest.h"

#include <bit>
#include <cstdio>
#include <random>
#include <sstream>

#include "odex/bundled.hpp"
#include "odex/error.hpp"
#include "odex/io.hpp"

using namespace odex;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::string dataset_text(const Dataset& d) {
  std::ostringstream os;
  write_dataset_csv(os, d);
  return os.str();
}

std::string design_text(const Design& d) {
  std::ostringstream os;
  write_design_csv(os, d);
  return os.str();
}

// Canonical text of every bundled table.
std::string bundled_text() {
  std::string s;
  s += dataset_text(bundled::ccd30());
  s += dataset_text(bundled::reference_runs());
  s += dataset_text(bundled::bayes_runs());
  s += dataset_text(bundled::validation14());
  for (const auto& m : bundled::models()) {
    s += to_json(m).dump();
    for (Eigen::Index j = 0; j < bundled::estimates(m.name).beta.size(); ++j)
      s += format_number(bundled::estimates(m.name).beta(j)) + ",";
    s += format_number(bundled::default_gamma(m.name)) + "\n";
  }
  for (const auto& key : bundled::published_keys()) s += key + "\n" + design_text(bundled::published(key));
  return s;
}

}  // namespace

TEST_CASE("numbers round-trip at full precision") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int k = 0; k < 2000; ++k) {
    const double x = k % 2 ? u(rng) : std::bit_cast<double>(bits(rng) & 0x7fefffffffffffffULL);
    CHECK(std::stod(format_number(x)) == x);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-2.0) == "-2");
  CHECK(format_number(1450.5706) == "1450.5706");
}

TEST_CASE("design CSV round trip") {
  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> u(-2, 2);
  Design d;
  for (int i = 0; i < 20; ++i) d.runs.push_back(Run{{u(rng), u(rng), u(rng), u(rng)}, i % 2});
  std::istringstream in(design_text(d));
  const Design back = read_design_csv(in);
  CHECK(back.runs == d.runs);
}

TEST_CASE("dataset CSV round trip") {
  for (const Dataset& d : {bundled::ccd30(), bundled::validation14()}) {
    std::istringstream in(dataset_text(d));
    const Dataset back = read_dataset_csv(in);
    CHECK(back.runs == d.runs);
    CHECK(back.responses == d.responses);
  }
}

TEST_CASE("dataset CSV: optional day column and extra responses") {
  std::istringstream in("run,L,K,D,FDV,yield\n1,0,0,0,0,2.5\n2,1,-1,0.5,2,3\n");
  const Dataset d = read_dataset_csv(in);
  CHECK(d.size() == 2);
  CHECK(d.runs[1].day == 0);
  CHECK(d.runs[1].coords == std::array<double, 4>{1, -1, 0.5, 2});
  CHECK(d.response("yield") == std::vector<double>{2.5, 3});
  CHECK(dataset_text(d) == "run,L,K,D,FDV,day,yield\n1,0,0,0,0,0,2.5\n2,1,-1,0.5,2,0,3\n");
}

TEST_CASE("CSV errors name the line and field") {
  {
    std::istringstream in("run,L,K,D,FDV,day,temperature\n1,0,0,0,0,0,1500\n2,1,1,1,1,0,-3\n");
    std::string msg;
    CHECK(kind_of([&] { read_dataset_csv(in, "bad.csv"); }) == ErrorKind::Parse);
  }
  {
    std::istringstream in("run,L,K,D,FDV,day,temperature\n1,0,0,0,0,0,1500\n2,1,1,1,1,0,-3\n");
    const std::string msg = message_of([&] { read_dataset_csv(in, "bad.csv"); });
    CHECK(msg.find("bad.csv: line 3") != std::string::npos);
    CHECK(msg.find("temperature") != std::string::npos);
  }
  {
    std::istringstream in("run,L,K,D,FDV,day\n1,0,x,0,0,1\n");
    const std::string msg = message_of([&] { read_design_csv(in, "d.csv"); });
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("'K'") != std::string::npos);
  }
  std::istringstream out_of_box("run,L,K,D,FDV,day\n1,0,0,2.5,0,1\n");
  CHECK(kind_of([&] { read_design_csv(out_of_box); }) == ErrorKind::Parse);
  std::istringstream bad_day("run,L,K,D,FDV,day\n1,0,0,0,0,2\n");
  CHECK(kind_of([&] { read_design_csv(bad_day); }) == ErrorKind::Parse);
  std::istringstream no_day("run,L,K,D,FDV\n1,0,0,0,0\n");
  CHECK(kind_of([&] { read_design_csv(no_day); }) == ErrorKind::Parse);
  std::istringstream ragged("run,L,K,D,FDV,day\n1,0,0,0,1\n");
  CHECK(kind_of([&] { read_design_csv(ragged); }) == ErrorKind::Parse);
  std::istringstream empty("");
  CHECK(kind_of([&] { read_design_csv(empty); }) == ErrorKind::Parse);
  CHECK(kind_of([] { read_design_csv_file("/nonexistent/design.csv"); }) == ErrorKind::Parse);
}

TEST_CASE("model spec JSON round trip") {
  for (const auto& m : bundled::models()) {
    const ModelSpec back = model_spec_from_json(json::parse(to_json(m).dump()));
    CHECK(back.name == m.name);
    CHECK(back.link == m.link);
    CHECK(back.factors == m.factors);
    CHECK(back.terms == m.terms);
  }
  const json j = to_json(bundled::model("flame_intensity"));
  CHECK(j["terms"].back() == json::array({"interaction", "D", "FDV"}));
  json bad = j;
  bad["terms"].push_back(json::array({"cubic", "L"}));
  CHECK(kind_of([&] { model_spec_from_json(bad); }) == ErrorKind::Parse);
  json missing = j;
  missing.erase("link");
  CHECK(kind_of([&] { model_spec_from_json(missing); }) == ErrorKind::Parse);
}

TEST_CASE("fitted model JSON round trip is exact") {
  const Dataset data = bundled::ccd30().concat(bundled::reference_runs());
  for (const auto& name : bundled::all_model_names()) {
    for (bool day : {false, true}) {
      const FittedModel m = fit(bundled::model(name), day ? data : bundled::ccd30(), name, day);
      const FittedModel back = fitted_model_from_json(json::parse(to_json(m).dump()));
      CHECK(back.beta_hat == m.beta_hat);
      CHECK(back.gamma_hat == m.gamma_hat);
      CHECK(back.nu_hat == m.nu_hat);
      CHECK(back.dispersion == m.dispersion);
      CHECK(back.covariance == m.covariance);
      CHECK(back.std_errors == m.std_errors);
      CHECK(back.log_likelihood == m.log_likelihood);
      CHECK(back.bic == m.bic);
      CHECK(back.n == m.n);
      CHECK(back.response == m.response);
      CHECK(back.spec.terms == m.spec.terms);
    }
  }
  json j = to_json(fit(bundled::model("velocity"), bundled::ccd30(), "velocity", false));
  j["beta_hat"].erase(0);
  CHECK(kind_of([&] { fitted_model_from_json(j); }) == ErrorKind::Dimension);
}

TEST_CASE("file round trip") {
  const std::string path = "odex_io_test.json";
  const FittedModel m = fit(bundled::model("temperature"), bundled::ccd30(), "temperature", false);
  write_json_file(path, to_json(m));
  CHECK(fitted_model_from_json(read_json_file(path)).beta_hat == m.beta_hat);
  std::remove(path.c_str());
  CHECK(kind_of([] { read_json_file("/nonexistent/x.json"); }) == ErrorKind::Parse);
}

TEST_CASE("PSO config JSON") {
  PsoConfig c;
  c.swarm_size = 17;
  c.seed = 12345678901234ULL;
  c.inertia = 0.6;
  const PsoConfig back = pso_config_from_json(json::parse(to_json(c).dump()));
  CHECK(back.swarm_size == 17);
  CHECK(back.seed == c.seed);
  CHECK(back.inertia == 0.6);
  const PsoConfig partial = pso_config_from_json(json{{"iterations", 50}});
  CHECK(partial.iterations == 50);
  CHECK(partial.swarm_size == PsoConfig{}.swarm_size);
  CHECK_THROWS_AS(pso_config_from_json(json{{"swarm_size", 1}}), Error);
  CHECK(kind_of([] { pso_config_from_json(json{{"swarm_size", "many"}}); }) == ErrorKind::Parse);
}

TEST_CASE("ensemble JSON") {
  const auto ens = bundled::ensemble(bundled::all_model_names(), bundled::GammaSpread::Pm10);
  Design initial;
  initial.runs = bundled::ccd30().runs;
  const ScenarioEnsemble back = ensemble_from_json(json::parse(ensemble_to_json(ens).dump()), initial);
  REQUIRE(back.size() == ens.size());
  for (std::size_t i = 0; i < ens.size(); ++i) {
    CHECK(back.scenario(i).params.beta == ens.scenario(i).params.beta);
    CHECK(back.scenario(i).params.gamma == ens.scenario(i).params.gamma);
    CHECK(back.scenario(i).weight == ens.scenario(i).weight);
    CHECK(back.scenario(i).label == ens.scenario(i).label);
  }
  const json named = json::parse(R"({"scenarios": [{"model": "velocity"}, {"model": "temperature", "gamma": -20, "weight": 3}], "m": 6})");
  const ScenarioEnsemble e = ensemble_from_json(named, initial);
  CHECK(e.m() == 6);
  CHECK(e.scenario(0).params.beta == bundled::estimates("velocity").beta);
  CHECK(*e.scenario(1).params.gamma == -20.0);
  CHECK(e.scenario(1).weight == doctest::Approx(0.75));
  const json wrong = json::parse(R"({"scenarios": [{"model": "velocity", "beta": [1, 2]}]})");
  CHECK(kind_of([&] { ensemble_from_json(wrong, initial); }) == ErrorKind::Dimension);
}

TEST_CASE("bundled tables") {
  CHECK(bundled::ccd30().size() == 30);
  CHECK(bundled::validation14().size() == 14);
  CHECK(bundled::reference_design().size() == 4);
  for (const Run& r : bundled::reference_design().runs) CHECK(r.day == 1);
  for (const Run& r : bundled::ccd30().runs) CHECK(r.day == 0);
  int centers = 0;
  for (const Run& r : bundled::ccd30().runs) centers += r.coords == std::array<double, 4>{0, 0, 0, 0};
  CHECK(centers == 6);
  CHECK_NOTHROW(bundled::ccd30().validate());
  CHECK_NOTHROW(bundled::validation14().validate());
  CHECK(bundled::ccd30().response("temperature")[0] == 1450.5706);
  CHECK(bundled::validation14().response("flame_intensity")[13] == 27.9703);
  for (const auto& key : bundled::published_keys()) CHECK(bundled::published(key).size() == 4);
  CHECK(bundled::published_keys().size() == 14);
  for (const Run& r : bundled::published("local-D/temperature").runs) CHECK(r.coords[3] == 0.0);
  CHECK_THROWS_AS(bundled::published("local-D/pressure"), Error);
  CHECK_THROWS_AS(bundled::model("pressure"), Error);
}

TEST_CASE("bundled tables are locked by a checksum") {
  CHECK(bundled::fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(bundled::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(bundled::fnv1a(bundled_text()) == 0x75792768e9bfab31ULL);
}
