#include "doctest.h"

#include <sstream>

#include "cgdist/harness.hpp"

using namespace cgdist;
using nlohmann::json;

TEST_CASE("manifest parsing") {
  const auto one = parse_manifest(json::parse(R"({"n":1,"h":[[1]],"v":[[1]]})"));
  REQUIRE(one.size() == 1);
  CHECK(one[0].build()->surface().complexity() == 1);

  const auto pair = parse_manifest(json::parse(R"({"surface":"T1","xi":[0,1],"zeta":[5,8]})"));
  CHECK(pair[0].build()->size() == 5);

  const auto list = parse_manifest(json::parse(
      R"({"instances":[{"id":"a","n":1,"h":[[1]],"v":[[1]]},{"id":"b","surface":"T1","xi":[1,0],"zeta":[0,1],"oracle":1}]})"));
  CHECK(list.size() == 2);
  CHECK(list[1].oracle == 1);

  CHECK_THROWS_AS(parse_manifest(json::parse(R"([{"id":"a","n":1,"h":[[1]],"v":[[1]]},{"id":"a","n":1,"h":[[1]],"v":[[1]]}])")),
                  InputError);
  CHECK_THROWS_AS(parse_manifest(json::parse(R"({"surface":"T1","xi":[2,4],"zeta":[0,1]})")), InputError);
  CHECK_THROWS_AS(parse_manifest(json::parse(R"({"surface":"T1","xi":[0,1],"zeta":[0,1]})")), InputError);
  CHECK_THROWS_AS(parse_manifest(json::parse(R"({"n":2,"h":[[1,2]],"v":[[1,3]]})")), InputError);
  CHECK_THROWS_AS(parse_manifest(json::parse(R"({"n":2,"h":"x","v":[[1,2]]})")), InputError);
  CHECK_THROWS_AS(parse_manifest(json::parse(R"([])")), InputError);
}

TEST_CASE("configuration") {
  RunConfig c;
  CHECK(c.estimator().epsilon == doctest::Approx(0.0025));
  c.epsilon = c.delta * c.delta;
  CHECK_THROWS_AS(c.estimator(), InputError);
  c.epsilon.reset();
  c.margin = -1;
  CHECK_THROWS_AS(c.estimator(), InputError);
}

TEST_CASE("cache keys") {
  const auto a = parse_manifest(json::parse(R"({"id":"x","surface":"T1","xi":[0,1],"zeta":[5,8]})"))[0];
  const auto b = parse_manifest(json::parse(R"({"zeta":[5,8],"xi":[0,1],"surface":"T1","id":"y"})"))[0];
  RunConfig c;
  const auto k = cache_key("estimate", a, config_json(c));
  CHECK(k == cache_key("estimate", b, config_json(c)));
  RunConfig seeded = c;
  seeded.seed = 42;
  CHECK(k == cache_key("estimate", a, config_json(seeded)));
  RunConfig wide = c;
  wide.delta = 0.2;
  CHECK(k != cache_key("estimate", a, config_json(wide)));
  CHECK(k != cache_key("trace", a, config_json(c)));
  // Equivalent cycle notations of one origami share a key.
  const auto o1 = parse_manifest(json::parse(R"({"n":4,"h":[[1,2,3,4]],"v":[[1,2,4,3]]})"))[0];
  const auto o2 = parse_manifest(json::parse(R"({"n":4,"h":[[2,3,4,1]],"v":[[4,3,1,2]]})"))[0];
  CHECK(cache_key("estimate", o1, config_json(c)) == cache_key("estimate", o2, config_json(c)));
}

TEST_CASE("estimate and validate round trip") {
  const auto manifest = parse_manifest(json::parse(
      R"([{"id":"p","surface":"T1","xi":[0,1],"zeta":[5,8]},{"id":"g","n":4,"h":[[1,2,3,4]],"v":[[1,2,4,3]]}])"));
  RunConfig c;
  std::ostringstream out1, out2, log;
  CHECK(run_estimate(c, manifest, {}, Cache(std::nullopt), out1, log) == 0);
  CHECK(run_estimate(c, manifest, {}, Cache(std::nullopt), out2, log) == 0);
  CHECK(out1.str() == out2.str());

  std::vector<json> reports;
  std::istringstream in(out1.str());
  for (std::string line; std::getline(in, line);) reports.push_back(json::parse(line));
  REQUIRE(reports.size() == 2);
  CHECK(reports[0]["oracle"] == 3);
  std::ostringstream vout;
  CHECK(run_validate(c, reports, manifest, vout, log) == 0);

  auto tampered = reports;
  auto& t = tampered[0]["breakpoints"];
  REQUIRE(t.size() >= 2);
  t[1] = t[0].get<double>() + 0.5;
  std::ostringstream tout;
  CHECK(run_validate(c, tampered, std::nullopt, tout, log) == 1);
  CHECK(tout.str().find("unit-gap") != std::string::npos);

  tampered = reports;
  tampered[1]["upper"] = 100.0;
  CHECK(run_validate(c, tampered, std::nullopt, tout, log) == 1);
}

TEST_CASE("trace output") {
  const auto manifest = parse_manifest(json::parse(R"({"n":1,"h":[[1]],"v":[[1]]})"));
  RunConfig c;
  c.step = 1;
  c.window = Window{-2, 2};
  std::ostringstream out, log;
  CHECK(run_trace(c, manifest, out, log) == 0);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,upsilon_id,len_xi,len_zeta,systole,breakpoint");
  int rows = 0;
  while (std::getline(in, line)) {
    const double t = std::stod(line.substr(0, line.find(',')));
    const auto rest = line.substr(line.find(',', line.find(',') + 1) + 1);
    CHECK(std::stod(rest.substr(0, rest.find(','))) == doctest::Approx(std::exp(t)));
    ++rows;
  }
  CHECK(rows == 5);
}
