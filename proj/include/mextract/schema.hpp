#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mextract/value.hpp"

namespace mextract {

struct AttributeSpec;

enum class TypeKind { Str, LongStr, Float, Int, Bool, Year, Url, List, StructList };

/// Answer type of an attribute. `List` carries a scalar element kind;
/// `StructList` carries its ordered field specs.
class AnswerType {
 public:
  AnswerType() = default;
  static AnswerType scalar(TypeKind kind);
  static AnswerType list(TypeKind element = TypeKind::Str);
  static AnswerType struct_list(std::vector<AttributeSpec> fields);

  TypeKind kind() const { return kind_; }
  TypeKind element() const { return element_; }
  const std::vector<AttributeSpec>& fields() const;

  bool is_scalar() const { return kind_ != TypeKind::List && kind_ != TypeKind::StructList; }
  bool is_collection() const { return !is_scalar(); }
  bool is_textual() const {
    return kind_ == TypeKind::Str || kind_ == TypeKind::LongStr || kind_ == TypeKind::Url;
  }
  bool is_numeric() const {
    return kind_ == TypeKind::Float || kind_ == TypeKind::Int || kind_ == TypeKind::Year;
  }

  /// The answer_type string as written in schema files.
  std::string to_string() const;

  friend bool operator==(const AnswerType& a, const AnswerType& b);

 private:
  TypeKind kind_ = TypeKind::Str;
  TypeKind element_ = TypeKind::Str;
  std::shared_ptr<const std::vector<AttributeSpec>> fields_;
};

std::string_view scalar_type_name(TypeKind kind);

struct AttributeSpec {
  std::string name;
  AnswerType answer_type;
  std::optional<double> answer_min;
  std::optional<double> answer_max;
  std::optional<std::vector<std::string>> options;

  bool has_options() const { return options.has_value() && !options->empty(); }
  bool allows_option(std::string_view s) const;

  friend bool operator==(const AttributeSpec&, const AttributeSpec&) = default;
};

class Schema {
 public:
  Schema() = default;
  explicit Schema(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  const std::vector<AttributeSpec>& attributes() const { return attributes_; }
  std::size_t size() const { return attributes_.size(); }
  bool empty() const { return attributes_.empty(); }

  const AttributeSpec* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  /// Appends an attribute, checking spec invariants. Throws Error.
  void add(AttributeSpec spec);

  friend bool operator==(const Schema&, const Schema&) = default;

 private:
  std::string name_;
  std::vector<AttributeSpec> attributes_;
};

/// Parses a schema document (attribute name -> spec object). Throws Error with
/// MalformedJson, DuplicateKey, UnknownSpecKey, UnknownAnswerType,
/// InvalidBounds, OptionsOnNonString or StructFieldUnresolved.
Schema parse_schema(std::string_view text, std::string name = {});
Schema load_schema(const std::string& path);

Json schema_to_json(const Schema& schema);
/// Pretty, deterministic serialization; re-parses to an equal Schema.
std::string serialize_schema(const Schema& schema);

/// Type-correct placeholder for one attribute.
Value default_value(const AttributeSpec& spec);

/// True when `v` already has the runtime shape `spec` declares.
bool is_type_valid(const Value& v, const AttributeSpec& spec);

/// Parses JSON rejecting duplicate object keys (throws Error DuplicateKey)
/// and syntax errors (throws Error MalformedJson).
Json parse_json_strict(std::string_view text);

}  // namespace mextract
