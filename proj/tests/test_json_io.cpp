#include <gtest/gtest.h>

#include "zetaforge/json_io.hpp"

using namespace zetaforge;

namespace {

ErrorKind kind_of(const ojson& j) {
  try {
    divisor_from_json(j);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Argument;  // sentinel: no error
}

}  // namespace

TEST(JsonIo, DivisorRoundTrip) {
  std::vector<SpectralDivisor> cases{make_dualP(), make_naturals(2.0), make_Dj(3), make_finite({{0.5, 2}, {7.25, 1}}, 3),
                                     direct_sum(make_Ej(1), make_finite({{1.0, 4}})),
                                     make_Dsigma(PolyQ({Rational(0), Rational(0), Rational(1, 2)}, Parity::Even))};
  for (auto& d : cases) {
    ojson j = divisor_to_json(d);
    SpectralDivisor back = divisor_from_json(ojson::parse(j.dump()));
    EXPECT_EQ(back, d) << j.dump();
    EXPECT_EQ(divisor_to_json(back).dump(), j.dump());
  }
}

TEST(JsonIo, RationalStringsAndFloats) {
  EXPECT_EQ(rational_from_json(ojson("3/8"), "x"), Rational(3, 8));
  EXPECT_EQ(rational_from_json(ojson(0.25), "x"), Rational(1, 4));
  EXPECT_EQ(rational_from_json(ojson(-7), "x"), Rational(-7));
  EXPECT_EQ(rational_to_json(Rational(5, 3)), ojson("5/3"));
  EXPECT_EQ(rational_to_json(Rational(12)), ojson(12));
  EXPECT_THROW(rational_from_json(ojson("three"), "x"), Error);
}

TEST(JsonIo, SchemaViolationsAreReported) {
  EXPECT_EQ(kind_of(ojson::parse(R"({"finite": [[1, 1]], "colour": 3})")), ErrorKind::Schema);
  EXPECT_EQ(kind_of(ojson::parse(R"({"finite": [[1]]})")), ErrorKind::Schema);
  EXPECT_EQ(kind_of(ojson::parse(R"({"tail": {"poly": [1], "bogus": 1}})")), ErrorKind::Schema);
  EXPECT_EQ(kind_of(ojson::parse(R"({"tail": {"poly": [1]}, "tails": []})")), ErrorKind::Schema);
  EXPECT_EQ(kind_of(ojson::parse(R"({"tail": {"poly": [1], "parity": "sideways"}})")), ErrorKind::Schema);
  EXPECT_EQ(kind_of(ojson::parse(R"({"finite": [[-1, 1]]})")), ErrorKind::Domain);
  EXPECT_EQ(kind_of(ojson::parse(R"({"finite": [[1, -1]]})")), ErrorKind::Domain);
  EXPECT_EQ(kind_of(ojson::parse(R"({"tail": {"offset": 0, "step": 2, "start": 1, "poly": ["1/4", 0]}})")), ErrorKind::Domain);
}

TEST(JsonIo, TailDefaults) {
  auto d = divisor_from_json(ojson::parse(R"({"tail": {"start": 1}})"));
  EXPECT_EQ(d, make_naturals());
}

TEST(JsonIo, ManifestRoundTripKeepsKeyOrder) {
  RunManifest m;
  m.command = "detreg";
  m.parameters["--divisor"] = {"a.json"};
  m.parameters["--csv"] = {};
  m.tool_version = "1.0.0";
  m.truncation_metadata["points"] = 12;
  m.outputs = {"value"};
  ojson j = m.to_json();
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"command", "parameters", "tool_version", "truncation_metadata", "outputs"}));
  EXPECT_EQ(j["parameters"].begin().key(), "--csv");
  EXPECT_EQ(RunManifest::from_json(j).to_json().dump(), j.dump());
  ojson bad = j;
  bad["extra"] = 1;
  EXPECT_THROW(RunManifest::from_json(bad), Error);
}
