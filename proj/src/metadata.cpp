#include "mextract/metadata.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "mextract/error.hpp"
#include "mextract/text_util.hpp"

namespace mextract {

std::string_view to_string(CastOutcome outcome) {
  switch (outcome) {
    case CastOutcome::CastOk: return "cast_ok";
    case CastOutcome::Defaulted: return "defaulted";
    case CastOutcome::Dropped: return "dropped";
  }
  return "unknown";
}

const Value* MetadataRecord::find(std::string_view name) const {
  for (const auto& [key, value] : values_) {
    if (key == name) return &value;
  }
  return nullptr;
}

const Value& MetadataRecord::at(std::string_view name) const {
  if (const Value* v = find(name)) return *v;
  throw Error(ErrorCode::InvalidArgument, "record has no attribute '" + std::string(name) + "'");
}

void MetadataRecord::set(std::string name, Value value) {
  for (auto& [key, existing] : values_) {
    if (key == name) {
      existing = std::move(value);
      return;
    }
  }
  values_.emplace_back(std::move(name), std::move(value));
}

MetadataRecord default_metadata(const Schema& schema) {
  MetadataRecord record;
  for (const auto& spec : schema.attributes()) record.set(spec.name, default_value(spec));
  return record;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::optional<std::string_view> first_fenced_block(std::string_view text) {
  auto open = text.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  auto body_start = text.find('\n', open + 3);
  if (body_start == std::string_view::npos) return std::nullopt;
  ++body_start;
  auto close = text.find("```", body_start);
  if (close == std::string_view::npos) return std::nullopt;
  return text.substr(body_start, close - body_start);
}

// Span from the first '{' to its matching '}', skipping braces inside JSON
// string literals.
std::optional<std::string_view> first_balanced_object(std::string_view text) {
  auto start = text.find('{');
  if (start == std::string_view::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return text.substr(start, i - start + 1);
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<Json> find_json_object(std::string_view text, std::vector<std::string>* duplicates) {
  auto attempt = [&](std::string_view candidate) -> std::optional<Json> {
    std::vector<std::string> dups;
    auto parsed = parse_json(candidate, &dups);
    if (!parsed || !parsed->is_object()) return std::nullopt;
    if (duplicates != nullptr) duplicates->insert(duplicates->end(), dups.begin(), dups.end());
    return parsed;
  };
  if (auto whole = attempt(text)) return whole;
  if (auto fenced = first_fenced_block(text)) {
    if (auto parsed = attempt(*fenced)) return parsed;
  }
  if (auto braces = first_balanced_object(text)) {
    if (auto parsed = attempt(*braces)) return parsed;
  }
  return std::nullopt;
}

MetadataRecord record_from_json(const Json& object) {
  MetadataRecord record;
  if (!object.is_object()) return record;
  for (const auto& [key, element] : object.items()) {
    if (element.is_null()) continue;
    record.set(key, value_from_json(element));
  }
  return record;
}

std::optional<MetadataRecord> try_parse_metadata(std::string_view text) {
  std::vector<std::string> duplicates;
  auto object = find_json_object(text, &duplicates);
  if (!object) return std::nullopt;
  MetadataRecord record = record_from_json(*object);
  for (auto& key : duplicates) {
    record.cast_log().push_back(
        {key, "json", "json", CastOutcome::CastOk, "duplicate key; last occurrence kept"});
  }
  return record;
}

MetadataRecord parse_metadata(std::string_view text) {
  auto record = try_parse_metadata(text);
  if (!record) throw Error(ErrorCode::NoJsonFound, "no JSON object found in model output");
  return std::move(*record);
}

Json record_to_json(const MetadataRecord& record) {
  Json out = Json::object();
  for (const auto& [key, value] : record.values()) out[key] = value_to_json(value);
  return out;
}

std::string serialize_record(const MetadataRecord& record) {
  return dump_pretty(record_to_json(record));
}

// ---------------------------------------------------------------------------
// Coercion

namespace {

std::optional<double> parse_number_text(std::string_view raw) {
  std::string cleaned;
  for (char c : trim(raw)) {
    if (c != ',') cleaned.push_back(c);
  }
  std::string_view s = cleaned;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(out)) return std::nullopt;
  return out;
}

std::optional<std::int64_t> truncate_to_int(double d) {
  if (!std::isfinite(d)) return std::nullopt;
  double t = std::trunc(d);
  // 2^63 is exactly representable; anything at or beyond it overflows.
  if (t >= 9223372036854775808.0 || t < -9223372036854775808.0) return std::nullopt;
  return static_cast<std::int64_t>(t);
}

bool kind_matches(const Value& v, TypeKind kind) {
  switch (kind) {
    case TypeKind::Str:
    case TypeKind::LongStr:
    case TypeKind::Url:
      return v.is_text();
    case TypeKind::Float:
      return v.is_number() && std::isfinite(v.number());
    case TypeKind::Int:
    case TypeKind::Year:
      return v.is_integer();
    case TypeKind::Bool:
      return v.is_boolean();
    default:
      return false;
  }
}

struct ScalarCast {
  Value value;
  bool silent = false;  // lossless widening, not logged
  std::string note;
};

std::optional<ScalarCast> cast_scalar(const Value& v, TypeKind kind) {
  if (v.is_list() && v.list().size() == 1) {
    const Value& inner = v.list().front();
    if (kind_matches(inner, kind)) return ScalarCast{inner, false, "unwrapped singleton list"};
    if (auto cast = cast_scalar(inner, kind)) {
      cast->silent = false;
      cast->note = "unwrapped singleton list; " + cast->note;
      return cast;
    }
    return std::nullopt;
  }
  switch (kind) {
    case TypeKind::Str:
    case TypeKind::LongStr:
    case TypeKind::Url:
      if (v.is_number() || v.is_integer() || v.is_boolean()) {
        return ScalarCast{Value(render_text(v)), false, "rendered as text"};
      }
      return std::nullopt;
    case TypeKind::Float:
      if (v.is_integer()) return ScalarCast{Value(static_cast<double>(v.integer())), true, {}};
      if (v.is_text()) {
        if (auto d = parse_number_text(v.text())) return ScalarCast{Value(*d), false, "parsed number"};
      }
      return std::nullopt;
    case TypeKind::Int:
    case TypeKind::Year:
      if (v.is_number()) {
        if (auto i = truncate_to_int(v.number())) {
          return ScalarCast{Value(*i), false, "truncated toward zero"};
        }
      }
      if (v.is_text()) {
        if (auto d = parse_number_text(v.text())) {
          if (auto i = truncate_to_int(*d)) return ScalarCast{Value(*i), false, "parsed integer"};
        }
      }
      return std::nullopt;
    case TypeKind::Bool:
      if (v.is_text()) {
        auto word = ascii_lower(trim(v.text()));
        if (word == "true" || word == "yes") return ScalarCast{Value(true), false, "parsed boolean"};
        if (word == "false" || word == "no") return ScalarCast{Value(false), false, "parsed boolean"};
      }
      if (v.is_integer() && (v.integer() == 0 || v.integer() == 1)) {
        return ScalarCast{Value(v.integer() == 1), false, "integer as boolean"};
      }
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

// Splits on commas that are not inside quotes or brackets.
std::vector<std::string> split_top_level_commas(std::string_view s) {
  std::vector<std::string> parts;
  int depth = 0;
  char quote = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i < s.size()) {
      char c = s[i];
      if (quote != 0) {
        if (c == quote) quote = 0;
        continue;
      }
      if (c == '"' || c == '\'') {
        quote = c;
        continue;
      }
      if (c == '(' || c == '[' || c == '{') ++depth;
      if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
      if (c != ',' || depth != 0) continue;
    }
    auto piece = trim(s.substr(start, i - start));
    if (!piece.empty()) parts.emplace_back(piece);
    start = i + 1;
  }
  return parts;
}

bool has_top_level_comma(std::string_view s) { return split_top_level_commas(s).size() > 1; }

class Coercer {
 public:
  explicit Coercer(std::vector<CastEvent>& events) : events_(events) {}

  Value run(const Value& v, const AttributeSpec& spec, const std::string& path) {
    const auto& t = spec.answer_type;
    if (is_type_valid(v, spec)) return v;
    if (t.kind() == TypeKind::List) return to_list(v, spec, path);
    if (t.kind() == TypeKind::StructList) return to_struct_list(v, spec, path);
    return to_scalar(v, spec, path);
  }

 private:
  void log(const std::string& path, const Value& from, const AttributeSpec& spec, CastOutcome outcome,
           std::string note) {
    events_.push_back({path, std::string(to_string(from.kind())), spec.answer_type.to_string(), outcome,
                       std::move(note)});
  }

  Value defaulted(const Value& v, const AttributeSpec& spec, const std::string& path) {
    log(path, v, spec, CastOutcome::Defaulted, "no conversion applies");
    return default_value(spec);
  }

  Value to_scalar(const Value& v, const AttributeSpec& spec, const std::string& path) {
    auto cast = cast_scalar(v, spec.answer_type.kind());
    if (!cast) return defaulted(v, spec, path);
    if (!cast->silent) log(path, v, spec, CastOutcome::CastOk, cast->note);
    return std::move(cast->value);
  }

  Value to_list(const Value& v, const AttributeSpec& spec, const std::string& path) {
    const TypeKind element = spec.answer_type.element();
    AttributeSpec element_spec{spec.name, AnswerType::scalar(element), {}, {}, {}};

    if (v.is_list()) {
      ValueList out;
      for (std::size_t i = 0; i < v.list().size(); ++i) {
        const Value& item = v.list()[i];
        const std::string item_path = path + "[" + std::to_string(i) + "]";
        if (kind_matches(item, element)) {
          out.push_back(item);
        } else if (auto cast = cast_scalar(item, element)) {
          if (!cast->silent) log(item_path, item, element_spec, CastOutcome::CastOk, cast->note);
          out.push_back(std::move(cast->value));
        } else {
          log(item_path, item, element_spec, CastOutcome::Dropped, "list element dropped");
        }
      }
      return Value(std::move(out));
    }
    if (v.is_text()) {
      if (trim(v.text()).empty()) {
        log(path, v, spec, CastOutcome::CastOk, "empty text as empty list");
        return Value(ValueList{});
      }
      if (has_top_level_comma(v.text())) {
        ValueList out;
        for (auto& piece : split_top_level_commas(v.text())) {
          Value part(std::move(piece));
          if (kind_matches(part, element)) {
            out.push_back(std::move(part));
          } else if (auto cast = cast_scalar(part, element)) {
            out.push_back(std::move(cast->value));
          }
        }
        log(path, v, spec, CastOutcome::CastOk, "split on top-level commas");
        return Value(std::move(out));
      }
    }
    if (!v.is_struct()) {
      if (kind_matches(v, element)) {
        log(path, v, spec, CastOutcome::CastOk, "wrapped as singleton list");
        return Value(ValueList{v});
      }
      if (auto cast = cast_scalar(v, element)) {
        log(path, v, spec, CastOutcome::CastOk, "wrapped as singleton list; " + cast->note);
        return Value(ValueList{std::move(cast->value)});
      }
    }
    return defaulted(v, spec, path);
  }

  Value coerce_struct(const Value& v, const AttributeSpec& spec, const std::string& path) {
    const auto& fields = spec.answer_type.fields();
    Struct out;
    out.reserve(fields.size());
    for (const auto& field : fields) {
      const std::string field_path = path + "." + field.name;
      if (const Value* present = v.field(field.name)) {
        out.emplace_back(field.name, run(*present, field, field_path));
      } else {
        log(field_path, Value(std::string{}), field, CastOutcome::Defaulted, "missing field");
        out.emplace_back(field.name, default_value(field));
      }
    }
    for (const auto& [key, value] : v.fields()) {
      bool known = false;
      for (const auto& field : fields) known = known || field.name == key;
      if (!known) log(path + "." + key, value, spec, CastOutcome::Dropped, "field not in schema");
    }
    return Value(std::move(out));
  }

  Value to_struct_list(const Value& v, const AttributeSpec& spec, const std::string& path) {
    if (v.is_struct()) {
      log(path, v, spec, CastOutcome::CastOk, "wrapped as singleton list");
      return Value(ValueList{coerce_struct(v, spec, path + "[0]")});
    }
    if (!v.is_list()) return defaulted(v, spec, path);
    ValueList out;
    for (std::size_t i = 0; i < v.list().size(); ++i) {
      const Value& item = v.list()[i];
      const std::string item_path = path + "[" + std::to_string(i) + "]";
      if (item.is_struct()) {
        out.push_back(coerce_struct(item, spec, item_path));
      } else {
        log(item_path, item, spec, CastOutcome::Dropped, "non-struct element dropped");
      }
    }
    return Value(std::move(out));
  }

  std::vector<CastEvent>& events_;
};

}  // namespace

CoerceResult coerce(const Value& value, const AttributeSpec& spec) {
  CoerceResult result;
  Coercer coercer(result.events);
  result.value = coercer.run(value, spec, spec.name);
  return result;
}

MetadataRecord coerce_record(const MetadataRecord& record, const Schema& schema) {
  MetadataRecord out;
  out.cast_log() = record.cast_log();
  Coercer coercer(out.cast_log());
  for (const auto& spec : schema.attributes()) {
    if (const Value* present = record.find(spec.name)) {
      out.set(spec.name, coercer.run(*present, spec, spec.name));
    } else {
      out.cast_log().push_back({spec.name, "absent", spec.answer_type.to_string(),
                                CastOutcome::Defaulted, "missing attribute"});
      out.set(spec.name, default_value(spec));
    }
  }
  for (const auto& [key, value] : record.values()) {
    if (!schema.contains(key)) {
      out.cast_log().push_back({key, std::string(to_string(value.kind())), "absent",
                                CastOutcome::Dropped, "attribute not in schema"});
    }
  }
  return out;
}

bool is_record_type_valid(const MetadataRecord& record, const Schema& schema) {
  if (record.size() != schema.size()) return false;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& [key, value] = record.values()[i];
    const auto& spec = schema.attributes()[i];
    if (key != spec.name || !is_type_valid(value, spec)) return false;
  }
  return true;
}

}  // namespace mextract
