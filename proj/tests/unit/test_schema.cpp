#include "doctest.h"

#include <set>

#include "../support.hpp"
#include "mextract/schema.hpp"

using namespace mextract;

namespace {

ErrorCode parse_error(std::string_view text) {
  try {
    parse_schema(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("schema parsed unexpectedly: " << text);
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("model schema parses with 16 attributes in source order") {
  const Schema s = testing::model_schema();
  CHECK(s.name() == "model");
  REQUIRE(s.size() == 16);
  CHECK(s.attributes().front().name == "Name");
  CHECK(s.attributes().back().name == "Paper_Link");

  const AttributeSpec* models = s.find("Models");
  REQUIRE(models != nullptr);
  CHECK(models->answer_type.kind() == TypeKind::StructList);
  std::vector<std::string> field_names;
  for (const auto& f : models->answer_type.fields()) field_names.push_back(f.name);
  CHECK(field_names == std::vector<std::string>{"Name", "Num_Parameters", "Unit", "Type", "Think"});
  CHECK(models->answer_type.fields()[2].allows_option("Billion"));

  const AttributeSpec* version = s.find("Version");
  REQUIRE(version != nullptr);
  CHECK(version->answer_min == 0.0);
  CHECK_FALSE(version->answer_max.has_value());
  CHECK(s.find("Year")->answer_type.kind() == TypeKind::Year);
  CHECK(s.find("Benchmarks")->answer_type.kind() == TypeKind::List);
  CHECK(s.find("Paper_Link")->answer_type.kind() == TypeKind::Url);
}

TEST_CASE("repeated options keep their first occurrence") {
  const Schema s = testing::model_schema();
  const auto& options = *s.find("License")->options;
  std::set<std::string> unique(options.begin(), options.end());
  CHECK(unique.size() == options.size());
  CHECK(options.front() == "Apache-1.0");
}

TEST_CASE("empty and single-attribute schemas") {
  CHECK(parse_schema("{}").empty());
  const Schema unit = parse_schema(
      R"({"Unit": {"answer_type":"str","answer_min":1,"answer_max":1,"options":["Million","Billion","Trillion"]}})");
  REQUIRE(unit.size() == 1);
  CHECK(unit.attributes()[0].has_options());
  const auto rec = default_metadata(unit);
  REQUIRE(rec.size() == 1);
  CHECK(rec.at("Unit") == Value(std::string{}));
}

TEST_CASE("each schema error class has its own code") {
  CHECK(parse_error("{not json") == ErrorCode::MalformedJson);
  CHECK(parse_error("[1,2]") == ErrorCode::MalformedJson);
  CHECK(parse_error(R"({"A": {"answer_type": "tuple"}})") == ErrorCode::UnknownAnswerType);
  CHECK(parse_error(R"({"A": {"answer_type": "list[list]"}})") == ErrorCode::UnknownAnswerType);
  CHECK(parse_error(R"({"A": {"answer_type": "int", "answer_min": 5, "answer_max": 1}})") == ErrorCode::InvalidBounds);
  CHECK(parse_error(R"({"A": {"answer_type": "int", "options": ["1"]}})") == ErrorCode::OptionsOnNonString);
  CHECK(parse_error(R"({"A": {"answer_type": "list[dict[B, C]]"}, "B": {"answer_type": "str"}})") ==
        ErrorCode::StructFieldUnresolved);
  CHECK(parse_error(R"({"A": {"answer_type": "str", "answer_maximum": 3}})") == ErrorCode::UnknownSpecKey);
  CHECK(parse_error(R"({"A": {"answer_type": "str"}, "A": {"answer_type": "int"}})") == ErrorCode::DuplicateKey);
  CHECK(parse_error(R"({"A": {"answer_min": 1}})") != ErrorCode::Io);
}

TEST_CASE("serialize then parse yields an equal schema") {
  const Schema s = testing::model_schema();
  const Schema again = parse_schema(serialize_schema(s), s.name());
  CHECK(again == s);
  CHECK(serialize_schema(again) == serialize_schema(s));

  const Schema small = parse_schema(R"({"Tags": {"answer_type": "list[str]", "answer_max": 3},
                                        "Summary": {"answer_type": "longstr"}})");
  CHECK(parse_schema(serialize_schema(small)) == small);
}

TEST_CASE("default metadata follows the type table and is type-valid") {
  const Schema s = testing::model_schema();
  const MetadataRecord d = default_metadata(s);
  REQUIRE(d.size() == 16);
  CHECK(d.at("Name") == Value(std::string{}));
  CHECK(d.at("Num_Parameters") == Value(0.0));
  CHECK(d.at("Year") == Value(std::int64_t{0}));
  CHECK(d.at("Context") == Value(std::int64_t{0}));
  CHECK(d.at("Think") == Value(false));
  CHECK(d.at("Benchmarks") == Value(ValueList{}));
  CHECK(d.at("Models") == Value(ValueList{}));
  CHECK(is_record_type_valid(d, s));
  CHECK(default_metadata(s) == d);
  CHECK(default_metadata(Schema("empty")).empty());
}

TEST_CASE("load_schema names the schema after the file stem") {
  testing::TempDir dir("schema");
  write_file(dir / "ar.json", R"({"Name": {"answer_type": "str"}})");
  CHECK(load_schema((dir / "ar.json").string()).name() == "ar");
  CHECK_THROWS_AS(load_schema((dir / "missing.json").string()), Error);
}
