#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mextract/metadata.hpp"
#include "mextract/schema.hpp"

namespace mextract {

enum class Transform { Malformed, ReformatAnswerWrap, ReformatMarkdown, LengthViolation };

std::string_view to_string(Transform t);
Transform transform_from_string(std::string_view s);

/// An annotated record used as the chosen side of a pair.
struct SftRecord {
  std::string paper_id;
  MetadataRecord record;
};

struct PreferencePair {
  std::string paper_id;
  std::string template_id;
  std::string chosen;
  std::string rejected;
  Transform transform = Transform::Malformed;
  std::uint64_t seed = 0;

  friend bool operator==(const PreferencePair&, const PreferencePair&) = default;
};

/// Relative weights of the three corruption families.
struct TransformMix {
  double malformed = 1.0;
  double reformat = 1.0;
  double length_violation = 1.0;
};

struct PrefGenOptions {
  std::uint64_t seed = 0;
  TransformMix mix;
  double train_ratio = 0.8;
  std::string template_id = "extract-v1";
  /// Upper bound for the number of characters cut by the strip mutation.
  int max_strip = 10;
};

struct PairSplit {
  std::vector<PreferencePair> train;
  std::vector<PreferencePair> validation;
};

/// True when every attribute of the record satisfies check_constraint.
bool passes_constraints(const MetadataRecord& record, const Schema& schema);

/// Keeps the records that are type-valid and satisfy every length constraint.
std::vector<SftRecord> filter_constraint_clean(const std::vector<SftRecord>& records, const Schema& schema);

/// True when `text` is a single JSON object whose keys are exactly the
/// schema's attribute names.
bool strict_format_ok(std::string_view text, const Schema& schema);

/// Corrupts valid JSON so that parse_metadata rejects it: strips 1..max_strip
/// characters from the head or tail, swaps double quotes for single quotes,
/// or deletes the commas between top-level members. Throws Error(NotJson).
std::string transform_malformed(std::string_view json_text, std::uint64_t seed, int max_strip = 10);

/// {"answer": <json_text>}
std::string transform_answer_wrap(std::string_view json_text);
/// One "**<key>**: <value>" line per top-level attribute.
std::string transform_markdown(std::string_view json_text);

struct Reformatted {
  std::string text;
  Transform transform;
};

/// Seeded choice between transform_answer_wrap and transform_markdown.
Reformatted transform_reformat(std::string_view json_text, std::uint64_t seed);

/// Pushes one bounded attribute outside its length constraint and returns the
/// record as canonical JSON. Throws Error(NoEligibleAttribute).
std::string transform_length_violation(const MetadataRecord& record, const Schema& schema,
                                       std::uint64_t seed);

/// Per-record seed: global seed xor FNV-1a of the paper id.
std::uint64_t record_seed(std::uint64_t global_seed, std::string_view paper_id);

/// One pair per record, in input order. Records without an eligible bounded
/// attribute fall back to the malformed family.
std::vector<PreferencePair> generate_pairs(const std::vector<SftRecord>& records, const Schema& schema,
                                           const PrefGenOptions& options);

/// Seeded shuffle assigns round(ratio * n) pairs to train; each split keeps
/// input order.
PairSplit split_pairs(const std::vector<PreferencePair>& pairs, double train_ratio, std::uint64_t seed);

Json pair_to_json(const PreferencePair& pair);
PreferencePair pair_from_json(const Json& j);

/// Format note written next to generated pairs.
std::string_view markdown_format_note();

}  // namespace mextract
