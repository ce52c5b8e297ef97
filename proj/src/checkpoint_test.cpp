#include "spheresteer/checkpoint.hpp"

#include "spheresteer/error.hpp"
#include "spheresteer/number_format.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace spheresteer;

namespace {

Checkpoint ancestor_checkpoint() {
  Checkpoint c;
  c.model = spheresteer::testing::trained_tetris().params;
  c.class_names = tetris_dataset().class_names;
  c.seed = 0;
  c.config = {{"hidden_units", 5}};
  return c;
}

ErrorCode parse_code(const std::string& text) {
  try {
    parse_checkpoint(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("number formatting") {
  SUBCASE("hex text is exact") {
    CHECK(format_hex(1.5) == "0x1.8p+0");
    CHECK(format_hex(-0.125) == "-0x1p-3");
    for (double v : {0.1, -2.0 / 3.0, 1e-300, 6.02214076e23, std::numeric_limits<double>::denorm_min()}) {
      CHECK(parse_double(format_hex(v), "v") == v);
      CHECK(parse_double(format_shortest(v), "v") == v);
    }
  }
  SUBCASE("shortest decimal") {
    CHECK(format_shortest(0.1) == "0.1");
    CHECK(format_shortest(-3.0) == "-3");
  }
  SUBCASE("rejects partial numbers") {
    CHECK_THROWS_AS(parse_double("1.5x", "v"), Error);
    CHECK_THROWS_AS(parse_double("", "v"), Error);
    CHECK_THROWS_AS(parse_double("0x", "v"), Error);
    CHECK(parse_double("+0x1p1", "v") == 2.0);
  }
}

TEST_CASE("ancestor checkpoints round trip bitwise") {
  const Checkpoint c = ancestor_checkpoint();
  const std::string text = format_checkpoint(c);
  const Checkpoint back = parse_checkpoint(text);
  CHECK(back.kind() == ModelKind::Ancestor);
  CHECK(back.ancestor() == c.ancestor());
  CHECK(back.class_names == c.class_names);
  CHECK(back.config == c.config);
  CHECK(format_checkpoint(back) == text);
  CHECK_THROWS_AS(back.steerable(), Error);
}

TEST_CASE("steerable checkpoints round trip bitwise") {
  Checkpoint c = ancestor_checkpoint();
  Rng rng(6);
  c.model = set_rotation(build_steerable(c.ancestor()), sample_rotation(rng));
  const std::string text = format_checkpoint(c);
  const Checkpoint back = parse_checkpoint(text);
  REQUIRE(back.kind() == ModelKind::Steerable);
  CHECK(back.steerable() == c.steerable());
  CHECK(format_checkpoint(back) == text);

  SUBCASE("files") {
    const auto path = std::filesystem::temp_directory_path() / "spheresteer_ckpt_test.json";
    save_checkpoint(c, path);
    CHECK(load_checkpoint(path).steerable() == c.steerable());
    std::filesystem::remove(path);
  }
}

TEST_CASE("checkpoint errors") {
  const nlohmann::json good = nlohmann::json::parse(format_checkpoint(ancestor_checkpoint()));
  CHECK(parse_code("{not json") == ErrorCode::ParseError);
  CHECK(parse_code("[]") == ErrorCode::SchemaMismatch);

  nlohmann::json j = good;
  j["schema"] = "other";
  CHECK(parse_code(j.dump()) == ErrorCode::SchemaMismatch);
  j = good;
  j["version"] = 2;
  CHECK(parse_code(j.dump()) == ErrorCode::SchemaMismatch);
  j = good;
  j["kind"] = "mystery";
  CHECK(parse_code(j.dump()) == ErrorCode::SchemaMismatch);
  j = good;
  j["model"]["output"][0][1] = "not-a-number";
  CHECK(parse_code(j.dump()) == ErrorCode::ParseError);
  j = good;
  j["model"]["hidden"].erase(0);
  CHECK(parse_code(j.dump()) == ErrorCode::ParseError);
  j = good;
  j["class_names"].erase(0);
  CHECK(parse_code(j.dump()) == ErrorCode::ParseError);
  j = good;
  j.erase("seed");
  CHECK(parse_code(j.dump()) == ErrorCode::ParseError);

  try {
    load_checkpoint("/nonexistent/model.json");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
  }
}

TEST_CASE("steerable checkpoints with a corrupted origin rotation are rejected") {
  Checkpoint c = ancestor_checkpoint();
  c.model = build_steerable(c.ancestor());
  nlohmann::json j = nlohmann::json::parse(format_checkpoint(c));
  j["model"]["banks"][0][0]["origin_rotation"][0] = format_hex(2.0);
  CHECK(parse_code(j.dump()) == ErrorCode::ParseError);
}
