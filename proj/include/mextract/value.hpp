#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace mextract {

using Json = nlohmann::ordered_json;

class Value;
using ValueList = std::vector<Value>;
/// Ordered field map. Field order is significant (schema order).
using Struct = std::vector<std::pair<std::string, Value>>;

enum class ValueKind { Text, Number, Integer, Boolean, List, Struct };

std::string_view to_string(ValueKind kind);

/// A typed metadata value as extracted from model output or gold annotations.
class Value {
 public:
  Value() : data_(std::string{}) {}
  Value(std::string text) : data_(std::move(text)) {}
  Value(const char* text) : data_(std::string(text)) {}
  Value(double number) : data_(number) {}
  Value(std::int64_t integer) : data_(integer) {}
  Value(int integer) : data_(static_cast<std::int64_t>(integer)) {}
  Value(bool boolean) : data_(boolean) {}
  Value(ValueList list) : data_(std::move(list)) {}
  Value(Struct fields) : data_(std::move(fields)) {}

  ValueKind kind() const { return static_cast<ValueKind>(data_.index()); }

  bool is_text() const { return kind() == ValueKind::Text; }
  bool is_number() const { return kind() == ValueKind::Number; }
  bool is_integer() const { return kind() == ValueKind::Integer; }
  bool is_boolean() const { return kind() == ValueKind::Boolean; }
  bool is_list() const { return kind() == ValueKind::List; }
  bool is_struct() const { return kind() == ValueKind::Struct; }

  const std::string& text() const { return std::get<std::string>(data_); }
  double number() const { return std::get<double>(data_); }
  std::int64_t integer() const { return std::get<std::int64_t>(data_); }
  bool boolean() const { return std::get<bool>(data_); }
  const ValueList& list() const { return std::get<ValueList>(data_); }
  ValueList& list() { return std::get<ValueList>(data_); }
  const Struct& fields() const { return std::get<Struct>(data_); }
  Struct& fields() { return std::get<Struct>(data_); }

  /// Field lookup on a Struct value; nullptr when absent or not a struct.
  const Value* field(std::string_view name) const;

  friend bool operator==(const Value& a, const Value& b) { return a.data_ == b.data_; }

 private:
  std::variant<std::string, double, std::int64_t, bool, ValueList, Struct> data_;
};

/// Converts JSON into a Value. Nulls inside arrays and objects are dropped;
/// a top-level null becomes empty Text. Nesting deeper than `max_depth`
/// is flattened into Text holding the compact JSON.
Value value_from_json(const Json& j, int max_depth = 32);
Json value_to_json(const Value& v);

/// Canonical single-line rendering: Text verbatim, numbers and booleans as
/// their JSON literal, lists comma-joined, structs as compact JSON.
std::string render_text(const Value& v);

/// Parses `text` as JSON; nullopt on any syntax error. Keys that occur more
/// than once in an object resolve to the last occurrence and are appended to
/// `duplicates` when provided.
std::optional<Json> parse_json(std::string_view text,
                               std::vector<std::string>* duplicates = nullptr);

/// Compact JSON dump that never throws on invalid UTF-8.
std::string dump_compact(const Json& j);
std::string dump_pretty(const Json& j);

}  // namespace mextract
