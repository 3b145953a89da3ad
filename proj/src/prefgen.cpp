#include "mextract/prefgen.hpp"

#include <cmath>
#include <functional>

#include "mextract/error.hpp"
#include "mextract/hashing.hpp"
#include "mextract/random.hpp"
#include "mextract/scorer.hpp"
#include "mextract/text_util.hpp"

namespace mextract {

std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::Malformed: return "malformed";
    case Transform::ReformatAnswerWrap: return "reformat_answer_wrap";
    case Transform::ReformatMarkdown: return "reformat_markdown";
    case Transform::LengthViolation: return "length_violation";
  }
  return "unknown";
}

Transform transform_from_string(std::string_view s) {
  for (auto t : {Transform::Malformed, Transform::ReformatAnswerWrap, Transform::ReformatMarkdown,
                 Transform::LengthViolation}) {
    if (to_string(t) == s) return t;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown transform '" + std::string(s) + "'");
}

bool passes_constraints(const MetadataRecord& record, const Schema& schema) {
  if (!is_record_type_valid(record, schema)) return false;
  for (const auto& spec : schema.attributes()) {
    if (!check_constraint(record.at(spec.name), spec)) return false;
  }
  return true;
}

std::vector<SftRecord> filter_constraint_clean(const std::vector<SftRecord>& records, const Schema& schema) {
  std::vector<SftRecord> kept;
  for (const auto& r : records) {
    if (passes_constraints(r.record, schema)) kept.push_back(r);
  }
  return kept;
}

bool strict_format_ok(std::string_view text, const Schema& schema) {
  auto parsed = parse_json(text);
  if (!parsed || !parsed->is_object() || parsed->size() != schema.size()) return false;
  for (const auto& spec : schema.attributes()) {
    if (!parsed->contains(spec.name)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Malformed JSON

namespace {

bool still_parses(std::string_view text) {
  return parse_json(text).has_value() || try_parse_metadata(text).has_value();
}

std::string swap_quotes(std::string_view text) {
  std::string out(text);
  for (auto& c : out) {
    if (c == '"') c = '\'';
  }
  return out;
}

// Removes commas separating the members of the outermost container.
std::string drop_top_level_commas(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (char c : text) {
    if (in_string) {
      out.push_back(c);
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') in_string = true;
    if (c == '{' || c == '[') ++depth;
    if (c == '}' || c == ']') --depth;
    if (c == ',' && depth == 1) continue;
    out.push_back(c);
  }
  return out;
}

std::string strip(std::string_view text, Rng& rng, int max_strip) {
  auto k = static_cast<std::size_t>(rng.between(1, std::max(1, max_strip)));
  k = std::min(k, text.size());
  bool head = rng.below(2) == 0;
  return std::string(head ? text.substr(k) : text.substr(0, text.size() - k));
}

}  // namespace

std::string transform_malformed(std::string_view json_text, std::uint64_t seed, int max_strip) {
  if (!parse_json(json_text)) throw Error(ErrorCode::NotJson, "input to transform_malformed is not JSON");
  Rng rng(seed);
  for (int draw = 0; draw <= 10; ++draw) {
    std::string out;
    switch (rng.below(3)) {
      case 0: out = strip(json_text, rng, max_strip); break;
      case 1: out = swap_quotes(json_text); break;
      default: out = drop_top_level_commas(json_text); break;
    }
    if (!still_parses(out)) return out;
  }
  std::string out = swap_quotes(json_text);
  // Only string-free JSON survives the quote swap; shorten it until it breaks.
  while (!out.empty() && still_parses(out)) out.pop_back();
  return out;
}

// ---------------------------------------------------------------------------
// Format drift

std::string transform_answer_wrap(std::string_view json_text) {
  return "{\"answer\": " + std::string(trim(json_text)) + "}";
}

std::string transform_markdown(std::string_view json_text) {
  auto parsed = parse_json(json_text);
  if (!parsed || !parsed->is_object()) throw Error(ErrorCode::NotJson, "markdown input must be a JSON object");
  std::string out;
  for (const auto& [key, value] : parsed->items()) {
    if (!out.empty()) out += '\n';
    out += "**" + key + "**: " + render_text(value_from_json(value));
  }
  return out;
}

Reformatted transform_reformat(std::string_view json_text, std::uint64_t seed) {
  Rng rng(seed);
  if (rng.below(2) == 0) return {transform_answer_wrap(json_text), Transform::ReformatAnswerWrap};
  return {transform_markdown(json_text), Transform::ReformatMarkdown};
}

// ---------------------------------------------------------------------------
// Length violations

namespace {

constexpr double kMaxPadding = 10000.0;

using Mutation = std::function<Value(const Value&, Rng&)>;

Value synthetic_element(const AttributeSpec& spec, std::size_t n) {
  const std::string label = "item_" + std::to_string(n);
  if (spec.answer_type.kind() != TypeKind::StructList) {
    Value text(label);
    return spec.answer_type.element() == TypeKind::Str ? text : coerce(text, {spec.name, AnswerType::scalar(spec.answer_type.element()), {}, {}, {}}).value;
  }
  Struct fields;
  bool labelled = false;
  for (const auto& f : spec.answer_type.fields()) {
    if (!labelled && f.answer_type.is_textual() && !f.has_options()) {
      fields.emplace_back(f.name, Value(label));
      labelled = true;
    } else {
      fields.emplace_back(f.name, default_value(f));
    }
  }
  return Value(std::move(fields));
}

// Candidate mutations for one attribute, each guaranteed to break its bound.
std::vector<Mutation> mutations_for(const AttributeSpec& spec) {
  std::vector<Mutation> out;
  const auto kind = spec.answer_type.kind();
  const auto& lo = spec.answer_min;
  const auto& hi = spec.answer_max;

  if (kind == TypeKind::Int || kind == TypeKind::Year) {
    if (hi && std::abs(*hi) < 1e15) {
      out.push_back([hi](const Value&, Rng& rng) {
        return Value(static_cast<std::int64_t>(std::floor(*hi)) + rng.between(1, 100));
      });
    }
    if (lo && std::abs(*lo) < 1e15) {
      out.push_back([lo](const Value&, Rng& rng) {
        return Value(static_cast<std::int64_t>(std::ceil(*lo)) - rng.between(1, 100));
      });
    }
  } else if (kind == TypeKind::Float) {
    if (hi) {
      out.push_back([hi](const Value&, Rng& rng) {
        return Value(*hi + static_cast<double>(rng.between(1, 100)));
      });
    }
    if (lo) {
      out.push_back([lo](const Value&, Rng& rng) {
        return Value(*lo - static_cast<double>(rng.between(1, 100)));
      });
    }
  } else if (kind == TypeKind::List || kind == TypeKind::StructList) {
    if (hi && *hi < kMaxPadding && (kind == TypeKind::StructList || !spec.has_options())) {
      out.push_back([hi, spec](const Value& v, Rng& rng) {
        ValueList items = v.list();
        const auto target = static_cast<std::size_t>(std::floor(*hi)) + static_cast<std::size_t>(rng.between(1, 10));
        while (items.size() < target) items.push_back(synthetic_element(spec, items.size() + 1));
        return Value(std::move(items));
      });
    }
    if (lo && *lo > 0.0) {
      out.push_back([lo](const Value& v, Rng&) {
        ValueList items = v.list();
        items.resize(static_cast<std::size_t>(std::ceil(*lo)) - 1);
        return Value(std::move(items));
      });
    }
  } else if (spec.answer_type.is_textual() && !spec.has_options()) {
    if (hi && *hi < kMaxPadding) {
      out.push_back([hi](const Value& v, Rng& rng) {
        std::string text = v.text();
        std::size_t words = split_whitespace(text).size();
        const auto target = static_cast<std::size_t>(std::floor(*hi)) + static_cast<std::size_t>(rng.between(1, 10));
        while (words < target) {
          if (!text.empty()) text += ' ';
          text += "word" + std::to_string(++words);
        }
        return Value(std::move(text));
      });
    }
  }
  return out;
}

}  // namespace

std::string transform_length_violation(const MetadataRecord& record, const Schema& schema, std::uint64_t seed) {
  std::vector<std::pair<const AttributeSpec*, std::vector<Mutation>>> eligible;
  for (const auto& spec : schema.attributes()) {
    auto m = mutations_for(spec);
    if (!m.empty()) eligible.emplace_back(&spec, std::move(m));
  }
  if (eligible.empty()) {
    throw Error(ErrorCode::NoEligibleAttribute, "schema has no bounded attribute to violate");
  }
  Rng rng(seed);
  const auto& [spec, mutations] = eligible[rng.below(eligible.size())];
  const auto& mutate = mutations[rng.below(mutations.size())];

  MetadataRecord out = coerce_record(record, schema);
  out.set(spec->name, mutate(out.at(spec->name), rng));
  return serialize_record(out);
}

// ---------------------------------------------------------------------------
// Pairs

std::uint64_t record_seed(std::uint64_t global_seed, std::string_view paper_id) {
  return global_seed ^ fnv1a64(paper_id);
}

std::vector<PreferencePair> generate_pairs(const std::vector<SftRecord>& records, const Schema& schema,
                                           const PrefGenOptions& options) {
  const TransformMix& mix = options.mix;
  const double total = mix.malformed + mix.reformat + mix.length_violation;
  if (!(total > 0.0) || mix.malformed < 0.0 || mix.reformat < 0.0 || mix.length_violation < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "transform mix weights must be non-negative with a positive sum");
  }

  std::vector<PreferencePair> pairs;
  pairs.reserve(records.size());
  for (const auto& r : records) {
    PreferencePair pair;
    pair.paper_id = r.paper_id;
    pair.template_id = options.template_id;
    pair.seed = record_seed(options.seed, r.paper_id);
    const MetadataRecord canonical = coerce_record(r.record, schema);
    pair.chosen = serialize_record(canonical);

    Rng rng(pair.seed);
    const double u = rng.unit() * total;
    const std::uint64_t transform_seed = rng.next();
    if (u >= mix.malformed + mix.reformat) {
      try {
        pair.rejected = transform_length_violation(canonical, schema, transform_seed);
        pair.transform = Transform::LengthViolation;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoEligibleAttribute) throw;
        pair.rejected = transform_malformed(pair.chosen, transform_seed, options.max_strip);
        pair.transform = Transform::Malformed;
      }
    } else if (u >= mix.malformed) {
      auto reformatted = transform_reformat(pair.chosen, transform_seed);
      pair.rejected = std::move(reformatted.text);
      pair.transform = reformatted.transform;
    } else {
      pair.rejected = transform_malformed(pair.chosen, transform_seed, options.max_strip);
      pair.transform = Transform::Malformed;
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

PairSplit split_pairs(const std::vector<PreferencePair>& pairs, double train_ratio, std::uint64_t seed) {
  if (!(train_ratio >= 0.0 && train_ratio <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "train ratio must lie in [0, 1]");
  }
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(std::llround(train_ratio * static_cast<double>(pairs.size())));
  std::vector<bool> in_train(pairs.size(), false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;

  PairSplit split;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    (in_train[i] ? split.train : split.validation).push_back(pairs[i]);
  }
  return split;
}

Json pair_to_json(const PreferencePair& pair) {
  return Json{{"prompt_ref", {{"paper_id", pair.paper_id}, {"template_id", pair.template_id}}},
              {"chosen", pair.chosen},
              {"rejected", pair.rejected},
              {"transform", to_string(pair.transform)},
              {"seed", pair.seed}};
}

PreferencePair pair_from_json(const Json& j) {
  try {
    PreferencePair pair;
    const Json& ref = j.at("prompt_ref");
    pair.paper_id = ref.at("paper_id").get<std::string>();
    pair.template_id = ref.at("template_id").get<std::string>();
    pair.chosen = j.at("chosen").get<std::string>();
    pair.rejected = j.at("rejected").get<std::string>();
    pair.transform = transform_from_string(j.at("transform").get<std::string>());
    pair.seed = j.at("seed").get<std::uint64_t>();
    return pair;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::MalformedJson, std::string("bad preference pair: ") + e.what());
  }
}

std::string_view markdown_format_note() {
  return "reformat_markdown rejected samples: one line per top-level attribute, in record order,\n"
         "formatted as **<Key>**: <value>. Strings are written verbatim, numbers and booleans as\n"
         "JSON literals, lists joined with \", \", and objects as compact JSON. Lines are separated\n"
         "by a single \\n with no trailing newline.\n";
}

}  // namespace mextract
