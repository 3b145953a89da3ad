#include "doctest.h"

#include "../support.hpp"
#include "mextract/benchmark.hpp"

using namespace mextract;
namespace fs = std::filesystem;

namespace {

Json bert_line() {
  const Schema s = testing::model_schema();
  Json line = Json::object();
  line["paper_id"] = "bert";
  line["year"] = 2018;
  line["gold"] = parse_json_strict(testing::bert_text());
  Json exists = Json::object();
  for (const auto& a : s.attributes()) exists[a.name] = 1;
  line["exists"] = exists;
  return line;
}

void write_root(const fs::path& root, const std::vector<Json>& lines, bool with_texts = true) {
  write_file(root / "schemas/model.json", read_file(testing::data_dir() / "schemas/model.json"));
  write_file(root / "guidelines/model.md", "Guidelines.");
  write_jsonl(root / "gold/model.jsonl", lines);
  if (with_texts) {
    for (const auto& l : lines) write_file(root / "texts" / (l["paper_id"].get<std::string>() + ".txt"), "text");
  }
}

ErrorCode load_error(const fs::path& root) {
  try {
    load_dataset(root);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("dataset loaded unexpectedly");
  return ErrorCode::InvalidArgument;
}

bool has_kind(const std::vector<Diagnostic>& ds, const std::string& kind) {
  for (const auto& d : ds) {
    if (d.kind == kind) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("shipped sample dataset loads with no hard diagnostics") {
  const Dataset ds = load_dataset(testing::data_dir() / "sample");
  CHECK(ds.entries.size() == 2);
  CHECK(ds.schema_by_category.count("model") == 1);
  for (const auto& d : verify_dataset(ds)) CHECK(d.severity != Severity::Error);
  CHECK(read_entry_text(ds, ds.entries[0]).find("BERT") != std::string::npos);
}

TEST_CASE("one-entry dataset and deterministic loading") {
  testing::TempDir dir("bench");
  write_root(dir.path(), {bert_line()});
  const Dataset a = load_dataset(dir.path());
  const Dataset b = load_dataset(dir.path());
  REQUIRE(a.entries.size() == 1);
  CHECK(a.entries == b.entries);
  CHECK(a.entries[0].year == 2018);
  CHECK(a.entries[0].gold.cast_log().empty());
}

TEST_CASE("load errors") {
  testing::TempDir dir("bench-err");
  SUBCASE("uncastable year") {
    Json line = bert_line();
    line["gold"]["Year"] = "twenty-eighteen";
    write_root(dir.path(), {line});
    CHECK(load_error(dir.path()) == ErrorCode::GoldTypeError);
    bool named = false;
    for (const auto& d : verify_dataset(load_dataset_unchecked(dir.path()))) {
      named = named || (d.kind == "GoldTypeError" && d.message.find("Year") != std::string::npos);
    }
    CHECK(named);
  }
  SUBCASE("missing existence flag") {
    Json line = bert_line();
    line["exists"].erase("License");
    write_root(dir.path(), {line});
    CHECK(load_error(dir.path()) == ErrorCode::ExistenceKeyMismatch);
  }
  SUBCASE("missing text") {
    write_root(dir.path(), {bert_line()}, false);
    CHECK(load_error(dir.path()) == ErrorCode::MissingText);
  }
  SUBCASE("missing schema") {
    write_root(dir.path(), {bert_line()});
    fs::remove(dir / "schemas/model.json");
    CHECK(load_error(dir.path()) == ErrorCode::MissingSchema);
  }
  SUBCASE("missing guidelines") {
    write_root(dir.path(), {bert_line()});
    fs::remove(dir / "guidelines/model.md");
    CHECK(load_error(dir.path()) == ErrorCode::MissingGuidelines);
  }
}

TEST_CASE("verify_dataset warnings and notes") {
  testing::TempDir dir("bench-verify");
  Json empty_list = bert_line();
  empty_list["paper_id"] = "empty";
  empty_list["gold"]["Benchmarks"] = Json::array();
  Json old = bert_line();
  old["paper_id"] = "old";
  old["gold"]["Year"] = 1899;
  write_root(dir.path(), {empty_list, old});
  const auto diags = verify_dataset(load_dataset_unchecked(dir.path()));
  CHECK(has_kind(diags, "ExistenceEmptyConflict"));
  CHECK(has_kind(diags, "GoldLengthViolation"));
  for (const auto& d : diags) CHECK(d.severity != Severity::Error);
}

TEST_CASE("duplicate paper ids are reported") {
  testing::TempDir dir("bench-dup");
  write_root(dir.path(), {bert_line(), bert_line()});
  CHECK(has_kind(verify_dataset(load_dataset_unchecked(dir.path())), "DuplicatePaperId"));
}

TEST_CASE("gold entries round-trip through JSON") {
  const Dataset ds = testing::synthetic_dataset(20, 3);
  for (const auto& e : ds.entries) {
    GoldEntry again = gold_from_json(parse_json_strict(dump_compact(gold_to_json(e))), e.category);
    again.gold = coerce_record(again.gold, ds.schema_for(e));
    again.gold.cast_log().clear();
    CHECK(again == e);
  }
}

TEST_CASE("read_jsonl skips blank lines and reports bad ones") {
  testing::TempDir dir("jsonl");
  write_file(dir / "a.jsonl", "{\"a\":1}\n\n{\"b\":2}\n");
  CHECK(read_jsonl(dir / "a.jsonl").size() == 2);
  write_file(dir / "b.jsonl", "{\"a\":1}\n{oops\n");
  CHECK_THROWS_AS(read_jsonl(dir / "b.jsonl"), Error);
}
