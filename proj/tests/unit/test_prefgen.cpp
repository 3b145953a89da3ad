#include "doctest.h"

#include "../support.hpp"
#include "mextract/prefgen.hpp"
#include "mextract/scorer.hpp"

using namespace mextract;

namespace {

const Schema& schema() {
  static const Schema s = testing::model_schema();
  return s;
}

MetadataRecord bert() { return coerce_record(parse_metadata(testing::bert_text()), schema()); }

std::vector<SftRecord> clean_records(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SftRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto rec = coerce_record(record_from_json(testing::random_model_gold(rng)), schema());
    rec.cast_log().clear();
    out.push_back({"r" + std::to_string(i), std::move(rec)});
  }
  return out;
}

std::size_t violations(const MetadataRecord& r) {
  std::size_t n = 0;
  for (const auto& spec : schema().attributes()) n += check_constraint(r.at(spec.name), spec) ? 0 : 1;
  return n;
}

}  // namespace

TEST_CASE("constraint filter") {
  auto year_1899 = bert();
  year_1899.set("Year", Value(std::int64_t{1899}));
  const auto kept = filter_constraint_clean({{"bert", bert()}, {"old", year_1899}}, schema());
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].paper_id == "bert");
  CHECK(filter_constraint_clean({}, schema()).empty());
}

TEST_CASE("malformed transform") {
  CHECK_THROWS_AS(transform_malformed("not json", 1), Error);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    for (const char* text : {R"({"Name": "BERT"})", R"({"A":1,"B":2})", R"({"Name":"X"})", "{}", "[1]"}) {
      const std::string out = transform_malformed(text, seed);
      CHECK_FALSE(parse_json(out).has_value());
      CHECK_FALSE(try_parse_metadata(out).has_value());
      CHECK(out != text);
    }
  }
  CHECK(transform_malformed(R"({"Name": "BERT"})", 5) == transform_malformed(R"({"Name": "BERT"})", 5));
}

TEST_CASE("reformat transforms") {
  CHECK(transform_answer_wrap(R"({"Name":"BERT"})") == R"({"answer": {"Name":"BERT"}})");
  CHECK(transform_answer_wrap("{}") == R"({"answer": {}})");
  CHECK(transform_markdown(R"({"Name":"BERT","Year":2018})") == "**Name**: BERT\n**Year**: 2018");
  CHECK(transform_markdown(R"({"L":["a","b"],"S":[{"x":1}],"B":true})") ==
        "**L**: a, b\n**S**: {\"x\":1}\n**B**: true");
  const std::string chosen = serialize_record(bert());
  bool saw_wrap = false, saw_md = false;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto r = transform_reformat(chosen, seed);
    CHECK_FALSE(strict_format_ok(r.text, schema()));
    saw_wrap = saw_wrap || r.transform == Transform::ReformatAnswerWrap;
    saw_md = saw_md || r.transform == Transform::ReformatMarkdown;
  }
  CHECK(saw_wrap);
  CHECK(saw_md);
  CHECK(strict_format_ok(chosen, schema()));
}

TEST_CASE("length violation breaks at least one constraint") {
  const auto records = clean_records(200, 8);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string out = transform_length_violation(records[i].record, schema(), i);
    const auto parsed = coerce_record(parse_metadata(out), schema());
    CHECK(is_record_type_valid(parsed, schema()));
    CHECK(violations(parsed) >= 1);
  }
  Schema unbounded("u");
  unbounded.add(AttributeSpec{"Free", AnswerType::scalar(TypeKind::Str), std::nullopt, std::nullopt, std::nullopt});
  MetadataRecord r;
  r.set("Free", Value(std::string("x")));
  try {
    transform_length_violation(r, unbounded, 1);
    FAIL("expected NoEligibleAttribute");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoEligibleAttribute);
  }
}

TEST_CASE("pairs are sound, tagged and deterministic") {
  const auto records = clean_records(300, 21);
  PrefGenOptions opt;
  opt.seed = 77;
  const auto pairs = generate_pairs(records, schema(), opt);
  REQUIRE(pairs.size() == records.size());
  std::map<Transform, int> seen;
  for (const auto& p : pairs) {
    ++seen[p.transform];
    CHECK(p.rejected != p.chosen);
    auto chosen = parse_metadata(p.chosen);
    CHECK(is_record_type_valid(chosen, schema()));
    CHECK(passes_constraints(chosen, schema()));
    switch (p.transform) {
      case Transform::Malformed:
        CHECK_FALSE(parse_json(p.rejected).has_value());
        break;
      case Transform::ReformatAnswerWrap:
      case Transform::ReformatMarkdown:
        CHECK_FALSE(strict_format_ok(p.rejected, schema()));
        break;
      case Transform::LengthViolation:
        CHECK(violations(coerce_record(parse_metadata(p.rejected), schema())) >= 1);
        break;
    }
  }
  CHECK(seen.size() == 4);
  CHECK(generate_pairs(records, schema(), opt) == pairs);
  opt.seed = 78;
  CHECK(generate_pairs(records, schema(), opt) != pairs);
}

TEST_CASE("mix restricted to one family") {
  const auto records = clean_records(100, 4);
  PrefGenOptions opt;
  opt.mix = {1.0, 0.0, 0.0};
  for (const auto& p : generate_pairs(records, schema(), opt)) CHECK(p.transform == Transform::Malformed);
  opt.mix = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(generate_pairs(records, schema(), opt), Error);
}

TEST_CASE("split sizes and JSON round trip") {
  std::vector<PreferencePair> pairs(1174);
  for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i].paper_id = "p" + std::to_string(i);
  const auto split = split_pairs(pairs, 0.8, 3);
  CHECK(split.train.size() == 939);
  CHECK(split.validation.size() == 235);
  CHECK(split_pairs(pairs, 0.8, 3).train == split.train);
  CHECK_THROWS_AS(split_pairs(pairs, 1.5, 3), Error);

  PrefGenOptions opt;
  const auto real = generate_pairs(clean_records(10, 1), schema(), opt);
  for (const auto& p : real) CHECK(pair_from_json(parse_json_strict(dump_compact(pair_to_json(p)))) == p);
  const Json j = pair_to_json(real[0]);
  CHECK(j["prompt_ref"]["template_id"] == "extract-v1");
}
