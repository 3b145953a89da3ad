#include "mextract/benchmark.hpp"

#include <algorithm>
#include <set>

#include "mextract/scorer.hpp"
#include "mextract/text_util.hpp"

namespace fs = std::filesystem;

namespace mextract {

std::string_view to_string(Severity severity) {
  switch (severity) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Info: return "info";
  }
  return "unknown";
}

const Schema& Dataset::schema_for(const GoldEntry& entry) const {
  auto it = schema_by_category.find(entry.category);
  if (it == schema_by_category.end()) {
    throw Error(ErrorCode::MissingSchema, "no schema for category '" + entry.category + "'");
  }
  return it->second;
}

const std::string& Dataset::guidelines_for(const GoldEntry& entry) const {
  auto it = guidelines_by_category.find(entry.category);
  if (it == guidelines_by_category.end()) {
    throw Error(ErrorCode::MissingGuidelines, "no guidelines for category '" + entry.category + "'");
  }
  return it->second;
}

std::vector<const GoldEntry*> Dataset::category(const std::string& name) const {
  std::vector<const GoldEntry*> out;
  for (const auto& e : entries) {
    if (e.category == name) out.push_back(&e);
  }
  return out;
}

Json gold_to_json(const GoldEntry& entry) {
  Json line = Json::object();
  line["paper_id"] = entry.paper_id;
  line["year"] = entry.year;
  if (!entry.title.empty()) line["title"] = entry.title;
  if (entry.inline_text) line["text"] = *entry.inline_text;
  line["gold"] = record_to_json(entry.gold);
  Json exists = Json::object();
  for (const auto& [key, flag] : entry.exists) exists[key] = flag ? 1 : 0;
  line["exists"] = std::move(exists);
  return line;
}

GoldEntry gold_from_json(const Json& line, const std::string& category) {
  auto bad = [](const std::string& what) { return Error(ErrorCode::MalformedJson, what); };
  if (!line.is_object()) throw bad("gold line must be an object");
  GoldEntry entry;
  entry.category = category;
  auto id = line.find("paper_id");
  if (id == line.end() || !id->is_string() || id->get<std::string>().empty()) {
    throw bad("gold line needs a non-empty string paper_id");
  }
  entry.paper_id = id->get<std::string>();
  auto year = line.find("year");
  if (year == line.end() || !year->is_number_integer()) {
    throw bad("paper '" + entry.paper_id + "': year must be an integer");
  }
  entry.year = year->get<int>();
  if (auto t = line.find("title"); t != line.end() && t->is_string()) entry.title = t->get<std::string>();
  if (auto t = line.find("text"); t != line.end() && t->is_string()) entry.inline_text = t->get<std::string>();
  entry.text_ref = (fs::path("texts") / (entry.paper_id + ".txt")).generic_string();

  auto gold = line.find("gold");
  if (gold == line.end() || !gold->is_object()) throw bad("paper '" + entry.paper_id + "': gold must be an object");
  entry.gold = record_from_json(*gold);

  auto exists = line.find("exists");
  if (exists == line.end() || !exists->is_object()) {
    throw bad("paper '" + entry.paper_id + "': exists must be an object");
  }
  for (const auto& [key, flag] : exists->items()) {
    if (flag.is_boolean()) {
      entry.exists[key] = flag.get<bool>();
    } else if (flag.is_number_integer() && (flag.get<int>() == 0 || flag.get<int>() == 1)) {
      entry.exists[key] = flag.get<int>() == 1;
    } else {
      throw bad("paper '" + entry.paper_id + "': exists['" + key + "'] must be 0 or 1");
    }
  }
  return entry;
}

std::vector<Json> read_jsonl(const fs::path& path) {
  const std::string content = read_file(path);
  std::vector<Json> lines;
  std::size_t line_no = 0;
  for (auto raw : split(content, '\n')) {
    ++line_no;
    if (trim(raw).empty()) continue;
    auto parsed = parse_json(raw);
    if (!parsed) {
      throw Error(ErrorCode::MalformedJson, path.string() + ":" + std::to_string(line_no) + ": invalid JSON");
    }
    lines.push_back(std::move(*parsed));
  }
  return lines;
}

void write_jsonl(const fs::path& path, const std::vector<Json>& lines) {
  std::string out;
  for (const auto& line : lines) {
    out += dump_compact(line);
    out += '\n';
  }
  write_file(path, out);
}

Dataset load_dataset_unchecked(const fs::path& root) {
  Dataset ds;
  ds.root = root;
  const fs::path gold_dir = root / "gold";
  if (!fs::is_directory(gold_dir)) throw Error(ErrorCode::Io, "missing directory " + gold_dir.string());

  std::vector<std::string> categories;
  for (const auto& file : fs::directory_iterator(gold_dir)) {
    if (file.is_regular_file() && file.path().extension() == ".jsonl") {
      categories.push_back(file.path().stem().string());
    }
  }
  std::sort(categories.begin(), categories.end());

  for (const auto& category : categories) {
    const fs::path schema_path = root / "schemas" / (category + ".json");
    if (fs::exists(schema_path)) {
      ds.schema_by_category.emplace(category, parse_schema(read_file(schema_path), category));
    }
    const fs::path guide_path = root / "guidelines" / (category + ".md");
    if (fs::exists(guide_path)) ds.guidelines_by_category.emplace(category, read_file(guide_path));
    for (const auto& line : read_jsonl(gold_dir / (category + ".jsonl"))) {
      ds.entries.push_back(gold_from_json(line, category));
    }
  }
  return ds;
}

Dataset load_dataset(const fs::path& root) {
  Dataset ds = load_dataset_unchecked(root);
  for (const auto& d : verify_dataset(ds)) {
    if (d.severity != Severity::Error) continue;
    ErrorCode code = ErrorCode::InvalidArgument;
    if (d.kind == "MissingSchema") code = ErrorCode::MissingSchema;
    if (d.kind == "MissingGuidelines") code = ErrorCode::MissingGuidelines;
    if (d.kind == "GoldTypeError") code = ErrorCode::GoldTypeError;
    if (d.kind == "ExistenceKeyMismatch") code = ErrorCode::ExistenceKeyMismatch;
    if (d.kind == "MissingText") code = ErrorCode::MissingText;
    throw Error(code, (d.paper_id.empty() ? "" : "paper '" + d.paper_id + "': ") + d.message);
  }
  for (auto& entry : ds.entries) {
    MetadataRecord coerced = coerce_record(entry.gold, ds.schema_for(entry));
    coerced.cast_log().clear();
    entry.gold = std::move(coerced);
  }
  return ds;
}

std::vector<Diagnostic> verify_dataset(const Dataset& ds) {
  std::vector<Diagnostic> out;
  auto report = [&](Severity s, std::string kind, std::string paper, std::string message) {
    out.push_back({s, std::move(kind), std::move(paper), std::move(message)});
  };

  std::set<std::string> categories;
  for (const auto& e : ds.entries) categories.insert(e.category);
  for (const auto& category : categories) {
    if (!ds.schema_by_category.count(category)) {
      report(Severity::Error, "MissingSchema", "", "category '" + category + "' has no schema");
    }
    if (!ds.guidelines_by_category.count(category)) {
      report(Severity::Error, "MissingGuidelines", "", "category '" + category + "' has no guidelines");
    }
  }

  std::set<std::string> seen_ids;
  for (const auto& entry : ds.entries) {
    const std::string& id = entry.paper_id;
    if (!seen_ids.insert(id).second) {
      report(Severity::Error, "DuplicatePaperId", id, "paper_id occurs more than once");
    }
    if (!entry.inline_text && !fs::exists(ds.root / entry.text_ref)) {
      report(Severity::Error, "MissingText", id, "text file " + entry.text_ref + " not found");
    }
    auto schema_it = ds.schema_by_category.find(entry.category);
    if (schema_it == ds.schema_by_category.end()) continue;
    const Schema& schema = schema_it->second;

    for (const auto& spec : schema.attributes()) {
      if (!entry.exists.count(spec.name)) {
        report(Severity::Error, "ExistenceKeyMismatch", id, "exists has no flag for '" + spec.name + "'");
      }
    }
    for (const auto& [key, flag] : entry.exists) {
      if (!schema.contains(key)) {
        report(Severity::Error, "ExistenceKeyMismatch", id, "exists flags unknown attribute '" + key + "'");
      }
    }

    MetadataRecord coerced = coerce_record(entry.gold, schema);
    for (const auto& ev : coerced.cast_log()) {
      if (ev.outcome == CastOutcome::Defaulted) {
        report(Severity::Error, "GoldTypeError", id,
               "gold attribute '" + ev.attribute + "' (" + ev.from_type + ") cannot be read as " +
                   ev.to_type);
      } else if (ev.outcome == CastOutcome::Dropped) {
        report(Severity::Warning, "GoldExtraValue", id, "gold value '" + ev.attribute + "' ignored: " + ev.note);
      }
    }

    for (const auto& spec : schema.attributes()) {
      const Value& v = coerced.at(spec.name);
      if (!check_constraint(v, spec)) {
        report(Severity::Info, "GoldLengthViolation", id,
               "gold '" + spec.name + "' is outside its answer_min/answer_max range");
      }
      auto flag = entry.exists.find(spec.name);
      if (flag != entry.exists.end() && flag->second && v == default_value(spec) &&
          spec.answer_type.kind() != TypeKind::Bool) {
        report(Severity::Warning, "ExistenceEmptyConflict", id,
               "'" + spec.name + "' is flagged as present but its gold value is empty");
      }
    }
  }
  return out;
}

std::string read_entry_text(const Dataset& ds, const GoldEntry& entry) {
  if (entry.inline_text) return *entry.inline_text;
  const fs::path path = ds.root / entry.text_ref;
  if (!fs::exists(path)) throw Error(ErrorCode::MissingText, "text file " + path.string() + " not found");
  return read_file(path);
}

}  // namespace mextract
