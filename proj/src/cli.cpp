#include "mextract/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "mextract/benchmark.hpp"
#include "mextract/corpus.hpp"
#include "mextract/extractor.hpp"
#include "mextract/manifest.hpp"
#include "mextract/prefgen.hpp"
#include "mextract/schema.hpp"
#include "mextract/scorer.hpp"
#include "mextract/text_util.hpp"

namespace mextract {

namespace {

namespace fs = std::filesystem;

// Raised by command handlers for option combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string join_args(const std::vector<std::string>& args) {
  std::string s = "mextract";
  for (const auto& a : args) s += " " + a;
  return s;
}

// ---------------------------------------------------------------------------
// Config file: a JSON object keyed by long flag names. Its entries become
// command line tokens placed before the user's own flags; every option takes
// its last value, so flags override the file.

std::vector<std::string> config_tokens(const fs::path& path) {
  Json j;
  try {
    j = parse_json_strict(read_file(path));
  } catch (const Error& e) {
    throw UsageError("config file " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError("config file " + path.string() + " must hold a JSON object");
  std::vector<std::string> tokens;
  auto scalar = [&](const std::string& key, const Json& v) {
    if (v.is_string()) {
      tokens.push_back(v.get<std::string>());
    } else if (v.is_number() || v.is_boolean()) {
      tokens.push_back(v.dump());
    } else {
      throw UsageError("config key '" + key + "' must be a string, number or boolean");
    }
  };
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& item : value) {
        tokens.push_back(flag);
        scalar(key, item);
      }
    } else if (!value.is_null()) {
      tokens.push_back(flag);
      scalar(key, value);
    }
  }
  return tokens;
}

std::optional<std::string> find_config_arg(const std::vector<std::string>& args, std::size_t from) {
  for (std::size_t i = from; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

// Snapshot of a leaf command's effective options for the run manifest.
Json options_snapshot(const CLI::App& leaf) {
  Json j = Json::object();
  for (const CLI::Option* opt : leaf.get_options()) {
    const std::string name = opt->get_single_name();
    if (opt->get_lnames().empty() || name == "help" || name == "config") continue;
    if (opt->get_type_size() == 0) {
      j[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      j[name] = opt->results().back();
    } else if (!opt->get_default_str().empty()) {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

// ---------------------------------------------------------------------------
// Shared option groups

struct InferenceFlags {
  std::string endpoint;
  std::string model;
  std::string auth_env = "MEXTRACT_API_KEY";
  std::string replay;
  std::size_t context_budget = 8192;
  std::size_t output_reserve = 2048;
  int attempts = 3;
  int parallelism = 4;
  double timeout = 300.0;
  double temperature = 0.0;
};

void add_inference_flags(CLI::App* sub, InferenceFlags& f) {
  sub->add_option("--endpoint", f.endpoint, "Chat-completion endpoint URL");
  sub->add_option("--model", f.model, "Model name sent with each request");
  sub->add_option("--auth-env", f.auth_env, "Environment variable holding the bearer token");
  sub->add_option("--attempts", f.attempts, "Attempts per paper before falling back")->check(CLI::PositiveNumber);
  sub->add_option("--parallelism", f.parallelism, "Requests in flight")->check(CLI::PositiveNumber);
  sub->add_option("--context-budget", f.context_budget, "Context window in tokens");
  sub->add_option("--output-reserve", f.output_reserve, "Tokens reserved for the answer");
  sub->add_option("--timeout", f.timeout, "Per-request timeout in seconds");
  sub->add_option("--temperature", f.temperature, "Sampling temperature");
  sub->add_option("--replay", f.replay, "Answer from a JSON file of canned responses instead of the network");
}

InferenceConfig to_config(const InferenceFlags& f) {
  InferenceConfig cfg;
  cfg.endpoint_url = f.endpoint;
  cfg.model_name = f.model;
  cfg.auth_token_env = f.auth_env;
  cfg.context_budget = f.context_budget;
  cfg.output_reserve = f.output_reserve;
  cfg.max_attempts = f.attempts;
  cfg.parallelism = f.parallelism;
  cfg.request_timeout = f.timeout;
  cfg.temperature = f.temperature;
  cfg.validate();
  return cfg;
}

// Replay files hold either an array of responses or
// {"default": [...], "tags": {"<paper or stub id>": [...]}}.
std::unique_ptr<ChatBackend> load_replay(const fs::path& path) {
  const Json j = parse_json_strict(read_file(path));
  auto strings = [&](const Json& arr) {
    if (!arr.is_array()) throw Error(ErrorCode::MalformedJson, "replay responses must be arrays of strings");
    std::vector<std::string> out;
    for (const auto& s : arr) {
      if (!s.is_string()) throw Error(ErrorCode::MalformedJson, "replay responses must be strings");
      out.push_back(s.get<std::string>());
    }
    return out;
  };
  if (j.is_array()) return std::make_unique<ScriptedChatBackend>(strings(j));
  if (!j.is_object()) throw Error(ErrorCode::MalformedJson, "replay file must hold an array or an object");
  auto backend = std::make_unique<ScriptedChatBackend>(j.contains("default") ? strings(j["default"])
                                                                             : std::vector<std::string>{});
  if (auto tags = j.find("tags"); tags != j.end()) {
    for (const auto& [tag, responses] : tags->items()) backend->script(tag, strings(responses));
  }
  return backend;
}

std::unique_ptr<ChatBackend> make_backend(const InferenceFlags& f, const InferenceConfig& cfg) {
  if (!f.replay.empty()) return load_replay(f.replay);
  if (f.endpoint.empty() || f.model.empty()) throw UsageError("--endpoint and --model are required without --replay");
  return std::make_unique<HttpChatBackend>(cfg);
}

struct ReportFlags {
  std::string format;
  std::string by;
  std::string out;
};

void add_report_flags(CLI::App* sub, ReportFlags& f) {
  sub->add_option("--format", f.format, "json, csv or table (default: table on a terminal, json otherwise)")
      ->check(CLI::IsMember({"json", "csv", "table"}));
  sub->add_option("--by", f.by, "Group the table by category, year or attribute")
      ->check(CLI::IsMember({"category", "year", "attribute"}));
  sub->add_option("--out", f.out, "Write the report to a file");
}

void emit_report(const ScoreReport& report, const ReportFlags& f, bool interactive, std::ostream& out) {
  std::string format = f.format;
  if (format.empty()) format = (interactive && f.out.empty()) ? "table" : "json";
  std::string text;
  if (format == "csv") {
    text = report_to_csv(report);
  } else if (format == "table") {
    text = report_to_table(report, f.by);
  } else {
    text = dump_pretty(report_to_json(report)) + "\n";
  }
  if (f.out.empty()) {
    out << text;
  } else {
    write_file(f.out, text);
  }
}

// Prediction lines: {"paper_id": ..., "metadata": {...}}.
std::map<std::string, MetadataRecord> load_predictions(const fs::path& path) {
  std::map<std::string, MetadataRecord> preds;
  for (const auto& line : read_jsonl(path)) {
    auto id = line.find("paper_id");
    auto md = line.find("metadata");
    if (id == line.end() || !id->is_string() || md == line.end() || !md->is_object()) {
      throw Error(ErrorCode::MalformedJson, path.string() + ": prediction lines need paper_id and a metadata object");
    }
    preds.insert_or_assign(id->get<std::string>(), record_from_json(*md));
  }
  return preds;
}

PaperScore score_entry(const GoldEntry& entry, const Schema& schema,
                       const std::map<std::string, MetadataRecord>& preds, std::ostream& err) {
  auto it = preds.find(entry.paper_id);
  if (it == preds.end()) {
    err << "warning: no prediction for " << entry.paper_id << "; scoring the default record\n";
    return score_paper(default_metadata(schema), entry, schema);
  }
  return score_paper(it->second, entry, schema);
}

std::vector<PaperStub> read_stubs(const fs::path& path) {
  std::vector<PaperStub> stubs;
  for (const auto& line : read_jsonl(path)) stubs.push_back(stub_from_json(line));
  return stubs;
}

void write_stubs(const fs::path& path, const std::vector<PaperStub>& stubs) {
  std::vector<Json> lines;
  lines.reserve(stubs.size());
  for (const auto& s : stubs) lines.push_back(stub_to_json(s));
  write_jsonl(path, lines);
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p += suffix;
  return p;
}

std::map<std::string, std::size_t> count_categories(const std::vector<PaperStub>& stubs) {
  std::map<std::string, std::size_t> counts;
  for (const auto& s : stubs) ++counts[s.category.value_or("")];
  return counts;
}

Json counts_json(const std::map<std::string, std::size_t>& counts) {
  Json j = Json::object();
  for (const auto& [k, v] : counts) j[k] = v;
  return j;
}

TransformMix parse_mix(const std::string& text) {
  auto parts = split(text, ',');
  if (parts.size() != 3) throw UsageError("--mix takes three comma-separated weights");
  double w[3];
  for (int i = 0; i < 3; ++i) {
    try {
      w[i] = std::stod(std::string(trim(parts[i])));
    } catch (const std::exception&) {
      throw UsageError("--mix weight '" + std::string(parts[i]) + "' is not a number");
    }
  }
  return {w[0], w[1], w[2]};
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
             const DispatchOptions& options) {
  CLI::App app{"Schema-constrained metadata extraction and evaluation", "mextract"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tool_version()));

  std::string config_path;
  RunManifest manifest;
  manifest.command = join_args(args);
  std::map<CLI::App*, std::function<int(CLI::App*)>> handlers;
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& description) {
    CLI::App* sub = parent->add_subcommand(name, description);
    sub->add_option("--config", config_path, "JSON file of flag values; flags given here take precedence");
    return sub;
  };

  // schema validate
  CLI::App* schema_cmd = app.add_subcommand("schema", "Schema files")->require_subcommand(1);
  std::string schema_path;
  CLI::App* schema_validate = leaf(schema_cmd, "validate", "Check a schema file");
  schema_validate->add_option("path", schema_path, "Schema JSON file")->required();
  handlers[schema_validate] = [&](CLI::App*) {
    try {
      Schema s = load_schema(schema_path);
      out << "ok: " << s.name() << " (" << s.size() << " attributes)\n";
      return kExitOk;
    } catch (const Error& e) {
      err << schema_path << ": " << e.what() << "\n";
      return kExitFailure;
    }
  };

  // data verify
  CLI::App* data_cmd = app.add_subcommand("data", "Benchmark datasets")->require_subcommand(1);
  std::string data_root;
  CLI::App* data_verify = leaf(data_cmd, "verify", "Check every dataset invariant");
  data_verify->add_option("root", data_root, "Dataset root directory")->required();
  handlers[data_verify] = [&](CLI::App*) {
    const Dataset ds = load_dataset_unchecked(data_root);
    const auto diagnostics = verify_dataset(ds);
    std::map<Severity, std::size_t> counts;
    for (const auto& d : diagnostics) {
      ++counts[d.severity];
      out << to_string(d.severity) << " " << d.kind;
      if (!d.paper_id.empty()) out << " " << d.paper_id;
      out << ": " << d.message << "\n";
    }
    out << ds.entries.size() << " entries, " << counts[Severity::Error] << " errors, "
        << counts[Severity::Warning] << " warnings, " << counts[Severity::Info] << " notes\n";
    return counts[Severity::Error] == 0 ? kExitOk : kExitFailure;
  };

  // extract
  InferenceFlags extract_flags;
  std::string extract_root, extract_category, extract_out, template_path;
  CLI::App* extract_cmd = leaf(&app, "extract", "Extract metadata for dataset papers");
  extract_cmd->add_option("--root", extract_root, "Dataset root directory")->required();
  extract_cmd->add_option("--category", extract_category, "Only papers of this category");
  extract_cmd->add_option("--out", extract_out, "Predictions JSONL")->required();
  extract_cmd->add_option("--template", template_path, "Prompt template file (default: built-in)");
  add_inference_flags(extract_cmd, extract_flags);
  handlers[extract_cmd] = [&](CLI::App*) {
    const InferenceConfig cfg = to_config(extract_flags);
    const Dataset ds = load_dataset(extract_root);
    const PromptTemplate tmpl = template_path.empty() ? PromptTemplate::builtin() : PromptTemplate::load(template_path);
    auto backend = make_backend(extract_flags, cfg);

    std::vector<BatchItem> items;
    for (const auto& e : ds.entries) {
      if (!extract_category.empty() && e.category != extract_category) continue;
      items.push_back({e.paper_id, read_entry_text(ds, e), &ds.schema_for(e), ds.guidelines_for(e)});
    }
    if (items.empty()) {
      err << "no papers to extract\n";
      return kExitFailure;
    }
    const auto outcomes = extract_batch(items, cfg, *backend, tmpl);

    std::vector<Json> lines;
    int failures = 0;
    for (const auto& o : outcomes) {
      if (!o.result) {
        ++failures;
        err << o.paper_id << ": " << o.error_message << "\n";
        continue;
      }
      Json line = Json::object();
      line["paper_id"] = o.paper_id;
      line["metadata"] = record_to_json(o.result->record);
      line["attempts_used"] = o.result->attempts_used;
      line["fallback_used"] = o.result->fallback_used;
      lines.push_back(std::move(line));
      manifest.attempts[o.paper_id] = o.result->attempts_used;
    }
    write_jsonl(extract_out, lines);
    manifest.add_input(extract_root);
    if (!extract_flags.replay.empty()) manifest.add_input(extract_flags.replay);
    manifest.template_hash = tmpl.hash();
    manifest.config["inference"] = config_to_json(cfg);
    manifest.config["template_id"] = tmpl.id;
    out << lines.size() << " extracted, " << failures << " failed\n";
    return failures == 0 ? kExitOk : kExitFailure;
  };

  // score
  ReportFlags score_flags;
  std::string score_schema, score_gold, score_pred;
  CLI::App* score_cmd = leaf(&app, "score", "Score predictions for one category");
  score_cmd->add_option("--schema", score_schema, "Schema JSON file")->required();
  score_cmd->add_option("--gold", score_gold, "Gold JSONL; the file stem names the category")->required();
  score_cmd->add_option("--pred", score_pred, "Predictions JSONL")->required();
  add_report_flags(score_cmd, score_flags);
  handlers[score_cmd] = [&](CLI::App*) {
    const Schema schema = load_schema(score_schema);
    const std::string category = file_stem(score_gold);
    const auto preds = load_predictions(score_pred);
    std::vector<PaperScore> scores;
    for (const auto& line : read_jsonl(score_gold)) {
      GoldEntry entry = gold_from_json(line, category);
      entry.gold = coerce_record(entry.gold, schema);
      scores.push_back(score_entry(entry, schema, preds, err));
    }
    emit_report(aggregate(scores), score_flags, options.interactive, out);
    manifest.add_input(score_schema);
    manifest.add_input(score_gold);
    manifest.add_input(score_pred);
    return kExitOk;
  };

  // report
  ReportFlags report_flags;
  std::string report_root, report_pred;
  CLI::App* report_cmd = leaf(&app, "report", "Score predictions against a whole dataset");
  report_cmd->add_option("--root", report_root, "Dataset root directory")->required();
  report_cmd->add_option("--pred", report_pred, "Predictions JSONL")->required();
  add_report_flags(report_cmd, report_flags);
  handlers[report_cmd] = [&](CLI::App*) {
    const Dataset ds = load_dataset(report_root);
    const auto preds = load_predictions(report_pred);
    std::vector<PaperScore> scores;
    for (const auto& e : ds.entries) scores.push_back(score_entry(e, ds.schema_for(e), preds, err));
    emit_report(aggregate(scores), report_flags, options.interactive, out);
    manifest.add_input(report_root);
    manifest.add_input(report_pred);
    return kExitOk;
  };

  // prefgen
  std::string pg_in, pg_schema, pg_out, pg_mix = "1,1,1";
  PrefGenOptions pg;
  CLI::App* prefgen_cmd = leaf(&app, "prefgen", "Build chosen/rejected pairs from annotated records");
  prefgen_cmd->add_option("--in", pg_in, "JSONL of {paper_id, metadata}")->required();
  prefgen_cmd->add_option("--schema", pg_schema, "Schema JSON file")->required();
  prefgen_cmd->add_option("--out", pg_out, "Output directory")->required();
  prefgen_cmd->add_option("--seed", pg.seed, "Random seed");
  prefgen_cmd->add_option("--ratio", pg.train_ratio, "Train fraction")->check(CLI::Range(0.0, 1.0));
  prefgen_cmd->add_option("--mix", pg_mix, "Weights for malformed,reformat,length_violation");
  prefgen_cmd->add_option("--template-id", pg.template_id, "Prompt template id recorded in each pair");
  handlers[prefgen_cmd] = [&](CLI::App*) {
    pg.mix = parse_mix(pg_mix);
    const Schema schema = load_schema(pg_schema);
    std::vector<SftRecord> records;
    for (const auto& line : read_jsonl(pg_in)) {
      auto id = line.find("paper_id");
      auto md = line.find("metadata");
      if (id == line.end() || !id->is_string() || md == line.end() || !md->is_object()) {
        throw Error(ErrorCode::MalformedJson, pg_in + ": lines need paper_id and a metadata object");
      }
      records.push_back({id->get<std::string>(), coerce_record(record_from_json(*md), schema)});
    }
    const auto clean = filter_constraint_clean(records, schema);
    const auto pairs = generate_pairs(clean, schema, pg);
    const auto split = split_pairs(pairs, pg.train_ratio, pg.seed);

    auto to_lines = [](const std::vector<PreferencePair>& ps) {
      std::vector<Json> lines;
      for (const auto& p : ps) lines.push_back(pair_to_json(p));
      return lines;
    };
    fs::create_directories(pg_out);
    write_jsonl(fs::path(pg_out) / "train.jsonl", to_lines(split.train));
    write_jsonl(fs::path(pg_out) / "validation.jsonl", to_lines(split.validation));
    write_file(fs::path(pg_out) / "FORMAT.md", markdown_format_note());

    std::map<std::string, std::size_t> by_transform;
    for (const auto& p : pairs) ++by_transform[std::string(to_string(p.transform))];
    Json summary = Json::object();
    summary["records"] = records.size();
    summary["constraint_clean"] = clean.size();
    summary["train"] = split.train.size();
    summary["validation"] = split.validation.size();
    summary["by_transform"] = counts_json(by_transform);
    out << dump_pretty(summary) << "\n";
    manifest.add_input(pg_in);
    manifest.add_input(pg_schema);
    manifest.seed = pg.seed;
    return kExitOk;
  };

  // corpus classify|dedup|balance
  CLI::App* corpus_cmd = app.add_subcommand("corpus", "Candidate paper corpus")->require_subcommand(1);
  std::string corpus_in, corpus_out;

  InferenceFlags classify_flags;
  CLI::App* classify_cmd = leaf(corpus_cmd, "classify", "Label stubs with a dataset category");
  classify_cmd->add_option("--in", corpus_in, "Stub JSONL")->required();
  classify_cmd->add_option("--out", corpus_out, "Classified stub JSONL")->required();
  add_inference_flags(classify_cmd, classify_flags);
  handlers[classify_cmd] = [&](CLI::App*) {
    const InferenceConfig cfg = to_config(classify_flags);
    auto stubs = read_stubs(corpus_in);
    auto backend = make_backend(classify_flags, cfg);
    classify_stubs(stubs, cfg, *backend);
    write_stubs(corpus_out, stubs);
    std::size_t flagged = 0;
    for (const auto& s : stubs) flagged += s.flagged ? 1 : 0;
    Json summary = Json::object();
    summary["stubs"] = stubs.size();
    summary["flagged"] = flagged;
    summary["by_category"] = counts_json(count_categories(stubs));
    out << dump_pretty(summary) << "\n";
    manifest.add_input(corpus_in);
    if (!classify_flags.replay.empty()) manifest.add_input(classify_flags.replay);
    manifest.config["inference"] = config_to_json(cfg);
    return kExitOk;
  };

  std::string benchmark_root, titles_path;
  CLI::App* dedup_cmd = leaf(corpus_cmd, "dedup", "Remove duplicate and benchmark papers");
  dedup_cmd->add_option("--in", corpus_in, "Stub JSONL")->required();
  dedup_cmd->add_option("--out", corpus_out, "Deduplicated stub JSONL")->required();
  dedup_cmd->add_option("--benchmark", benchmark_root, "Dataset root whose papers are removed");
  dedup_cmd->add_option("--exclude-titles", titles_path, "Text file with one title per line to remove");
  handlers[dedup_cmd] = [&](CLI::App*) {
    const auto stubs = read_stubs(corpus_in);
    DedupResult result = dedup(stubs);
    std::vector<PaperStub> kept = std::move(result.stubs);
    const std::size_t after_dedup = kept.size();
    if (!benchmark_root.empty()) {
      kept = exclude_benchmark(kept, load_dataset_unchecked(benchmark_root));
      manifest.add_input(benchmark_root);
    }
    if (!titles_path.empty()) {
      std::vector<std::string> titles;
      for (auto line : split(read_file(titles_path), '\n')) titles.emplace_back(trim(line));
      kept = exclude_benchmark(kept, titles);
      manifest.add_input(titles_path);
    }
    write_stubs(corpus_out, kept);
    std::vector<Json> log;
    for (const auto& l : result.log) {
      log.push_back(Json{{"kept", l.kept_id}, {"removed", l.removed_id}, {"abstract_similarity", l.abstract_similarity}});
    }
    write_jsonl(sibling(corpus_out, ".dedup-log.jsonl"), log);
    Json summary = Json::object();
    summary["input"] = stubs.size();
    summary["duplicates_removed"] = result.removed_count;
    summary["benchmark_removed"] = after_dedup - kept.size();
    summary["output"] = kept.size();
    out << dump_pretty(summary) << "\n";
    manifest.add_input(corpus_in);
    return kExitOk;
  };

  std::size_t cap = 350;
  std::uint64_t balance_seed = 0;
  CLI::App* balance_cmd = leaf(corpus_cmd, "balance", "Cap the number of stubs per category");
  balance_cmd->add_option("--in", corpus_in, "Classified stub JSONL")->required();
  balance_cmd->add_option("--out", corpus_out, "Balanced stub JSONL")->required();
  balance_cmd->add_option("--cap", cap, "Maximum stubs per category");
  balance_cmd->add_option("--seed", balance_seed, "Random seed");
  handlers[balance_cmd] = [&](CLI::App*) {
    const auto stubs = read_stubs(corpus_in);
    std::vector<PaperStub> eligible, excluded;
    for (const auto& s : stubs) {
      const bool ok = s.category && is_balanced_category(*s.category) && !s.flagged;
      (ok ? eligible : excluded).push_back(s);
    }
    const auto kept = balance(eligible, cap, balance_seed);
    write_stubs(corpus_out, kept);
    write_stubs(sibling(corpus_out, ".excluded.jsonl"), excluded);
    Json summary = Json::object();
    summary["before"] = counts_json(count_categories(eligible));
    summary["after"] = counts_json(count_categories(kept));
    summary["excluded"] = excluded.size();
    out << dump_pretty(summary) << "\n";
    manifest.add_input(corpus_in);
    manifest.seed = balance_seed;
    return kExitOk;
  };

  // Find the addressed command so config-file tokens can be placed after it.
  std::vector<std::string> argv = args;
  CLI::App* node = &app;
  std::size_t pos = 0;
  while (pos < argv.size()) {
    CLI::App* next = nullptr;
    for (CLI::App* sub : node->get_subcommands({})) {
      if (sub->check_name(argv[pos])) next = sub;
    }
    if (next == nullptr) break;
    node = next;
    ++pos;
  }

  try {
    if (auto cfg = find_config_arg(argv, pos)) {
      auto tokens = config_tokens(*cfg);
      argv.insert(argv.begin() + static_cast<std::ptrdiff_t>(pos), tokens.begin(), tokens.end());
    }
    // CLI11 consumes arguments from the back.
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << tool_version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << node->help();
    return kExitUsage;
  }

  CLI::App* selected = &app;
  while (!selected->get_subcommands().empty()) selected = selected->get_subcommands().front();
  auto handler = handlers.find(selected);
  if (handler == handlers.end()) {
    err << selected->help();
    return kExitUsage;
  }

  manifest.start();
  int code = kExitFailure;
  try {
    code = handler->second(selected);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << selected->help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  manifest.finish();

  // Commands with a file or directory output get a manifest beside it.
  std::string output;
  if (auto* o = selected->get_option_no_throw("--out"); o != nullptr && o->count() > 0) output = o->as<std::string>();
  if (!output.empty()) {
    Json snapshot = options_snapshot(*selected);
    for (const auto& [k, v] : manifest.config.items()) snapshot[k] = v;
    manifest.config = std::move(snapshot);
    try {
      write_manifest(output, manifest);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return kExitFailure;
    }
  }
  return code;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const DispatchOptions& options) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, out, err, options);
}

}  // namespace mextract
