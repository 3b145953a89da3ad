#include "mextract/value.hpp"

#include <limits>
#include <set>

namespace mextract {

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::Text: return "text";
    case ValueKind::Number: return "number";
    case ValueKind::Integer: return "integer";
    case ValueKind::Boolean: return "boolean";
    case ValueKind::List: return "list";
    case ValueKind::Struct: return "struct";
  }
  return "unknown";
}

const Value* Value::field(std::string_view name) const {
  if (!is_struct()) return nullptr;
  for (const auto& [key, value] : fields()) {
    if (key == name) return &value;
  }
  return nullptr;
}

Value value_from_json(const Json& j, int max_depth) {
  if (max_depth <= 0 && (j.is_array() || j.is_object())) return Value(dump_compact(j));
  switch (j.type()) {
    case Json::value_t::null:
      return Value(std::string{});
    case Json::value_t::string:
      return Value(j.get<std::string>());
    case Json::value_t::boolean:
      return Value(j.get<bool>());
    case Json::value_t::number_integer:
      return Value(j.get<std::int64_t>());
    case Json::value_t::number_unsigned: {
      auto u = j.get<std::uint64_t>();
      if (u <= static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        return Value(static_cast<std::int64_t>(u));
      }
      return Value(static_cast<double>(u));
    }
    case Json::value_t::number_float:
      return Value(j.get<double>());
    case Json::value_t::array: {
      ValueList items;
      items.reserve(j.size());
      for (const auto& element : j) {
        if (element.is_null()) continue;
        items.push_back(value_from_json(element, max_depth - 1));
      }
      return Value(std::move(items));
    }
    case Json::value_t::object: {
      Struct fields;
      fields.reserve(j.size());
      for (const auto& [key, element] : j.items()) {
        if (element.is_null()) continue;
        fields.emplace_back(key, value_from_json(element, max_depth - 1));
      }
      return Value(std::move(fields));
    }
    case Json::value_t::binary:
    case Json::value_t::discarded:
      break;
  }
  return Value(std::string{});
}

Json value_to_json(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Text: return Json(v.text());
    case ValueKind::Number: return Json(v.number());
    case ValueKind::Integer: return Json(v.integer());
    case ValueKind::Boolean: return Json(v.boolean());
    case ValueKind::List: {
      Json out = Json::array();
      for (const auto& item : v.list()) out.push_back(value_to_json(item));
      return out;
    }
    case ValueKind::Struct: {
      Json out = Json::object();
      for (const auto& [key, item] : v.fields()) out[key] = value_to_json(item);
      return out;
    }
  }
  return Json();
}

std::string render_text(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Text: return v.text();
    case ValueKind::Number:
    case ValueKind::Integer:
    case ValueKind::Boolean:
    case ValueKind::Struct:
      return dump_compact(value_to_json(v));
    case ValueKind::List: {
      std::string out;
      for (const auto& item : v.list()) {
        if (!out.empty()) out += ", ";
        out += render_text(item);
      }
      return out;
    }
  }
  return {};
}

std::optional<Json> parse_json(std::string_view text, std::vector<std::string>* duplicates) {
  std::vector<std::set<std::string>> open_objects;
  Json::parser_callback_t callback = [&](int /*depth*/, Json::parse_event_t event, Json& parsed) {
    switch (event) {
      case Json::parse_event_t::object_start:
        open_objects.emplace_back();
        break;
      case Json::parse_event_t::object_end:
        if (!open_objects.empty()) open_objects.pop_back();
        break;
      case Json::parse_event_t::key:
        if (!open_objects.empty()) {
          auto key = parsed.get<std::string>();
          if (!open_objects.back().insert(key).second && duplicates != nullptr) {
            duplicates->push_back(std::move(key));
          }
        }
        break;
      default:
        break;
    }
    return true;
  };
  Json parsed = Json::parse(text.begin(), text.end(), callback, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) return std::nullopt;
  return parsed;
}

std::string dump_compact(const Json& j) {
  return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

std::string dump_pretty(const Json& j) {
  return j.dump(4, ' ', false, Json::error_handler_t::replace);
}

}  // namespace mextract
