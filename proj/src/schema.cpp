#include "mextract/schema.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mextract/error.hpp"
#include "mextract/text_util.hpp"

namespace mextract {

namespace {

const std::vector<AttributeSpec> kNoFields;

std::optional<TypeKind> scalar_from_name(std::string_view name) {
  if (name == "str") return TypeKind::Str;
  if (name == "longstr") return TypeKind::LongStr;
  if (name == "float") return TypeKind::Float;
  if (name == "int") return TypeKind::Int;
  if (name == "bool") return TypeKind::Bool;
  if (name == "year") return TypeKind::Year;
  if (name == "url") return TypeKind::Url;
  return std::nullopt;
}

bool strip_wrapper(std::string_view& s, std::string_view open) {
  if (s.size() < open.size() + 1 || s.substr(0, open.size()) != open || s.back() != ']') {
    return false;
  }
  s = s.substr(open.size(), s.size() - open.size() - 1);
  return true;
}

// Result of the syntactic pass over an answer_type string. Struct field
// names are resolved against sibling attributes afterwards.
struct ParsedType {
  AnswerType type;
  std::vector<std::string> struct_fields;
};

ParsedType parse_type_string(const std::string& attribute, std::string_view raw) {
  auto fail = [&]() -> ParsedType {
    throw Error(ErrorCode::UnknownAnswerType,
                "attribute '" + attribute + "': unsupported answer_type '" + std::string(raw) + "'");
  };
  std::string_view s = trim(raw);
  if (auto kind = scalar_from_name(s)) return {AnswerType::scalar(*kind), {}};
  if (s == "list") return {AnswerType::list(TypeKind::Str), {}};
  if (!strip_wrapper(s, "list[")) return fail();
  s = trim(s);
  if (auto kind = scalar_from_name(s)) return {AnswerType::list(*kind), {}};
  if (!strip_wrapper(s, "dict[")) return fail();

  ParsedType parsed;
  std::set<std::string> seen;
  for (auto piece : split(s, ',')) {
    std::string field(trim(piece));
    if (field.empty() || !seen.insert(field).second) return fail();
    parsed.struct_fields.push_back(std::move(field));
  }
  if (parsed.struct_fields.empty()) return fail();
  parsed.type = AnswerType::list(TypeKind::Str);
  return parsed;
}

std::optional<double> parse_bound(const std::string& attribute, const Json& spec,
                                  const char* key) {
  auto it = spec.find(key);
  if (it == spec.end()) return std::nullopt;
  if (!it->is_number()) {
    throw Error(ErrorCode::MalformedJson,
                "attribute '" + attribute + "': " + key + " must be a number");
  }
  double v = it->get<double>();
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::MalformedJson, "attribute '" + attribute + "': " + key + " is not finite");
  }
  return v;
}

Json bound_to_json(double v) {
  if (std::abs(v) < 9007199254740992.0 && std::trunc(v) == v) {
    return Json(static_cast<std::int64_t>(v));
  }
  return Json(v);
}

void check_spec(const AttributeSpec& spec) {
  if (spec.name.empty()) {
    throw Error(ErrorCode::MalformedJson, "attribute name must be non-empty");
  }
  if (spec.answer_min && spec.answer_max && *spec.answer_min > *spec.answer_max) {
    std::ostringstream msg;
    msg << "attribute '" << spec.name << "': answer_min " << *spec.answer_min
        << " > answer_max " << *spec.answer_max;
    throw Error(ErrorCode::InvalidBounds, msg.str());
  }
  if (spec.options) {
    const auto& t = spec.answer_type;
    bool string_like = t.kind() == TypeKind::Str ||
                       (t.kind() == TypeKind::List && t.element() == TypeKind::Str);
    if (!string_like) {
      throw Error(ErrorCode::OptionsOnNonString,
                  "attribute '" + spec.name + "': options require answer_type str or list, got '" +
                      t.to_string() + "'");
    }
    if (spec.options->empty()) {
      throw Error(ErrorCode::MalformedJson, "attribute '" + spec.name + "': options is empty");
    }
  }
}

}  // namespace

AnswerType AnswerType::scalar(TypeKind kind) {
  AnswerType t;
  t.kind_ = kind;
  return t;
}

AnswerType AnswerType::list(TypeKind element) {
  AnswerType t;
  t.kind_ = TypeKind::List;
  t.element_ = element;
  return t;
}

AnswerType AnswerType::struct_list(std::vector<AttributeSpec> fields) {
  AnswerType t;
  t.kind_ = TypeKind::StructList;
  t.fields_ = std::make_shared<const std::vector<AttributeSpec>>(std::move(fields));
  return t;
}

const std::vector<AttributeSpec>& AnswerType::fields() const {
  return fields_ ? *fields_ : kNoFields;
}

std::string_view scalar_type_name(TypeKind kind) {
  switch (kind) {
    case TypeKind::Str: return "str";
    case TypeKind::LongStr: return "longstr";
    case TypeKind::Float: return "float";
    case TypeKind::Int: return "int";
    case TypeKind::Bool: return "bool";
    case TypeKind::Year: return "year";
    case TypeKind::Url: return "url";
    case TypeKind::List: return "list";
    case TypeKind::StructList: return "list[dict]";
  }
  return "?";
}

std::string AnswerType::to_string() const {
  if (kind_ == TypeKind::List) {
    if (element_ == TypeKind::Str) return "list";
    return "list[" + std::string(scalar_type_name(element_)) + "]";
  }
  if (kind_ == TypeKind::StructList) {
    std::string out = "list[dict[";
    bool first = true;
    for (const auto& f : fields()) {
      if (!first) out += ", ";
      out += f.name;
      first = false;
    }
    return out + "]]";
  }
  return std::string(scalar_type_name(kind_));
}

bool operator==(const AnswerType& a, const AnswerType& b) {
  if (a.kind_ != b.kind_) return false;
  if (a.kind_ == TypeKind::List) return a.element_ == b.element_;
  if (a.kind_ == TypeKind::StructList) return a.fields() == b.fields();
  return true;
}

bool AttributeSpec::allows_option(std::string_view s) const {
  if (!options) return true;
  return std::find(options->begin(), options->end(), s) != options->end();
}

const AttributeSpec* Schema::find(std::string_view name) const {
  for (const auto& spec : attributes_) {
    if (spec.name == name) return &spec;
  }
  return nullptr;
}

void Schema::add(AttributeSpec spec) {
  check_spec(spec);
  if (contains(spec.name)) {
    throw Error(ErrorCode::DuplicateKey, "attribute '" + spec.name + "' defined twice");
  }
  attributes_.push_back(std::move(spec));
}

Json parse_json_strict(std::string_view text) {
  std::vector<std::string> duplicates;
  auto parsed = parse_json(text, &duplicates);
  if (!parsed) throw Error(ErrorCode::MalformedJson, "document is not valid JSON");
  if (!duplicates.empty()) {
    throw Error(ErrorCode::DuplicateKey, "key '" + duplicates.front() + "' occurs more than once");
  }
  return *parsed;
}

Schema parse_schema(std::string_view text, std::string name) {
  Json doc = parse_json_strict(text);
  if (!doc.is_object()) {
    throw Error(ErrorCode::MalformedJson, "schema must be a JSON object");
  }

  std::vector<AttributeSpec> specs;
  std::vector<std::vector<std::string>> pending_fields;
  for (const auto& [attribute, body] : doc.items()) {
    if (!body.is_object()) {
      throw Error(ErrorCode::MalformedJson, "attribute '" + attribute + "': spec must be an object");
    }
    for (const auto& [key, unused] : body.items()) {
      if (key != "answer_type" && key != "answer_min" && key != "answer_max" && key != "options") {
        throw Error(ErrorCode::UnknownSpecKey, "attribute '" + attribute + "': unknown key '" + key + "'");
      }
    }
    auto type_it = body.find("answer_type");
    if (type_it == body.end() || !type_it->is_string()) {
      throw Error(ErrorCode::MalformedJson,
                  "attribute '" + attribute + "': answer_type missing or not a string");
    }

    AttributeSpec spec;
    spec.name = attribute;
    ParsedType parsed = parse_type_string(attribute, type_it->get<std::string>());
    spec.answer_type = parsed.type;
    spec.answer_min = parse_bound(attribute, body, "answer_min");
    spec.answer_max = parse_bound(attribute, body, "answer_max");

    if (auto opt = body.find("options"); opt != body.end()) {
      if (!opt->is_array()) {
        throw Error(ErrorCode::MalformedJson, "attribute '" + attribute + "': options must be a list");
      }
      std::vector<std::string> options;
      for (const auto& o : *opt) {
        if (!o.is_string()) {
          throw Error(ErrorCode::MalformedJson,
                      "attribute '" + attribute + "': options must be strings");
        }
        auto s = o.get<std::string>();
        // Published schemas repeat some license strings; keep the first.
        if (std::find(options.begin(), options.end(), s) == options.end()) {
          options.push_back(std::move(s));
        }
      }
      spec.options = std::move(options);
    }
    if (!parsed.struct_fields.empty() && spec.options) {
      throw Error(ErrorCode::OptionsOnNonString,
                  "attribute '" + attribute + "': options are not allowed on a dict list");
    }
    check_spec(spec);
    specs.push_back(std::move(spec));
    pending_fields.push_back(std::move(parsed.struct_fields));
  }

  // Struct fields take the spec of the same-named top-level attribute.
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (pending_fields[i].empty()) continue;
    std::vector<AttributeSpec> fields;
    for (const auto& field_name : pending_fields[i]) {
      auto it = std::find_if(specs.begin(), specs.end(),
                             [&](const AttributeSpec& s) { return s.name == field_name; });
      if (it == specs.end() || !pending_fields[it - specs.begin()].empty() ||
          it->answer_type.kind() == TypeKind::StructList) {
        throw Error(ErrorCode::StructFieldUnresolved,
                    "attribute '" + specs[i].name + "': dict field '" + field_name +
                        "' has no top-level scalar or list spec");
      }
      fields.push_back(*it);
    }
    specs[i].answer_type = AnswerType::struct_list(std::move(fields));
  }

  Schema schema(std::move(name));
  for (auto& spec : specs) schema.add(std::move(spec));
  return schema;
}

Schema load_schema(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open schema file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schema(buf.str(), file_stem(path));
}

Json schema_to_json(const Schema& schema) {
  Json out = Json::object();
  for (const auto& spec : schema.attributes()) {
    Json body = Json::object();
    body["answer_type"] = spec.answer_type.to_string();
    if (spec.answer_min) body["answer_min"] = bound_to_json(*spec.answer_min);
    if (spec.answer_max) body["answer_max"] = bound_to_json(*spec.answer_max);
    if (spec.options) body["options"] = *spec.options;
    out[spec.name] = std::move(body);
  }
  return out;
}

std::string serialize_schema(const Schema& schema) { return dump_pretty(schema_to_json(schema)); }

Value default_value(const AttributeSpec& spec) {
  switch (spec.answer_type.kind()) {
    case TypeKind::Str:
    case TypeKind::LongStr:
    case TypeKind::Url:
      return Value(std::string{});
    case TypeKind::Float:
      return Value(0.0);
    case TypeKind::Int:
    case TypeKind::Year:
      return Value(std::int64_t{0});
    case TypeKind::Bool:
      return Value(false);
    case TypeKind::List:
    case TypeKind::StructList:
      return Value(ValueList{});
  }
  return Value(std::string{});
}

namespace {

bool scalar_matches(const Value& v, TypeKind kind) {
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
    case TypeKind::List:
    case TypeKind::StructList:
      return false;
  }
  return false;
}

}  // namespace

bool is_type_valid(const Value& v, const AttributeSpec& spec) {
  const auto& t = spec.answer_type;
  if (t.is_scalar()) return scalar_matches(v, t.kind());
  if (!v.is_list()) return false;
  if (t.kind() == TypeKind::List) {
    return std::all_of(v.list().begin(), v.list().end(),
                       [&](const Value& e) { return scalar_matches(e, t.element()); });
  }
  const auto& fields = t.fields();
  for (const auto& element : v.list()) {
    if (!element.is_struct() || element.fields().size() != fields.size()) return false;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto& [key, value] = element.fields()[i];
      if (key != fields[i].name || !is_type_valid(value, fields[i])) return false;
    }
  }
  return true;
}

}  // namespace mextract
