#include "mextract/extractor.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include "builtin_template.hpp"
#include "mextract/hashing.hpp"
#include "mextract/text_util.hpp"

namespace mextract {

// ---------------------------------------------------------------------------
// Token estimation

std::size_t TokenEstimator::max_prefix_bytes(std::string_view text, std::size_t budget) const {
  if (count(text) <= budget) return text.size();
  std::size_t lo = 0;
  std::size_t hi = utf8_length(text);
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo + 1) / 2;
    if (count(text.substr(0, utf8_prefix_bytes(text, mid))) <= budget) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return utf8_prefix_bytes(text, lo);
}

std::size_t CharTokenEstimator::count(std::string_view text) const {
  return (utf8_length(text) + chars_per_token_ - 1) / chars_per_token_;
}

std::size_t CharTokenEstimator::max_prefix_bytes(std::string_view text, std::size_t budget) const {
  return utf8_prefix_bytes(text, budget * chars_per_token_);
}

std::size_t estimate_tokens(std::string_view text) { return CharTokenEstimator().count(text); }

// ---------------------------------------------------------------------------
// Config

void InferenceConfig::validate() const {
  if (output_reserve >= context_budget) {
    throw Error(ErrorCode::InvalidArgument, "output_reserve must be smaller than context_budget");
  }
  if (max_attempts < 1) throw Error(ErrorCode::InvalidArgument, "max_attempts must be at least 1");
  if (parallelism < 1) throw Error(ErrorCode::InvalidArgument, "parallelism must be at least 1");
}

Json config_to_json(const InferenceConfig& cfg) {
  return Json{{"endpoint_url", cfg.endpoint_url},   {"model_name", cfg.model_name},
              {"context_budget", cfg.context_budget}, {"output_reserve", cfg.output_reserve},
              {"max_attempts", cfg.max_attempts},     {"request_timeout", cfg.request_timeout},
              {"parallelism", cfg.parallelism},       {"auth_token_env", cfg.auth_token_env},
              {"temperature", cfg.temperature}};
}

InferenceConfig config_from_json(const Json& j) {
  InferenceConfig cfg;
  try {
    cfg.endpoint_url = j.value("endpoint_url", cfg.endpoint_url);
    cfg.model_name = j.value("model_name", cfg.model_name);
    cfg.context_budget = j.value("context_budget", cfg.context_budget);
    cfg.output_reserve = j.value("output_reserve", cfg.output_reserve);
    cfg.max_attempts = j.value("max_attempts", cfg.max_attempts);
    cfg.request_timeout = j.value("request_timeout", cfg.request_timeout);
    cfg.parallelism = j.value("parallelism", cfg.parallelism);
    cfg.auth_token_env = j.value("auth_token_env", cfg.auth_token_env);
    cfg.temperature = j.value("temperature", cfg.temperature);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad inference config: ") + e.what());
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Prompt assembly

PromptTemplate PromptTemplate::builtin() {
  return PromptTemplate{detail::kBuiltinTemplateId, detail::kBuiltinTemplateBody};
}

PromptTemplate PromptTemplate::load(const std::string& path) {
  return PromptTemplate{file_stem(path), read_file(path)};
}

std::string PromptTemplate::hash() const { return sha256_hex(body); }

namespace {

std::string render(std::string_view body, std::string_view guidelines, std::string_view schema,
                   std::string_view paper) {
  std::string out;
  out.reserve(body.size() + guidelines.size() + schema.size() + paper.size());
  std::size_t i = 0;
  while (i < body.size()) {
    auto open = body.find("{{", i);
    if (open == std::string_view::npos) break;
    auto close = body.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    auto name = body.substr(open + 2, close - open - 2);
    std::string_view replacement;
    bool known = true;
    if (name == "guidelines") {
      replacement = guidelines;
    } else if (name == "schema") {
      replacement = schema;
    } else if (name == "paper") {
      replacement = paper;
    } else {
      known = false;
    }
    out.append(body.substr(i, open - i));
    if (known) {
      out.append(replacement);
    } else {
      out.append(body.substr(open, close + 2 - open));
    }
    i = close + 2;
  }
  out.append(body.substr(std::min(i, body.size())));
  return out;
}

}  // namespace

PromptBundle build_prompt(std::string_view text, const Schema& schema, std::string_view guidelines,
                          const InferenceConfig& cfg, const PromptTemplate& tmpl,
                          const TokenEstimator& estimator) {
  cfg.validate();
  PromptBundle bundle;
  bundle.schema_json = serialize_schema(schema);
  bundle.guidelines = std::string(guidelines);
  bundle.template_id = tmpl.id;

  const std::size_t limit = cfg.prompt_budget();
  const std::size_t base = estimator.count(render(tmpl.body, guidelines, bundle.schema_json, ""));
  if (base > limit) {
    throw Error(ErrorCode::BudgetImpossible,
                "schema and guidelines need " + std::to_string(base) + " tokens; budget is " +
                    std::to_string(limit));
  }

  std::size_t allowed = limit - base;
  std::string_view paper = text;
  if (base + estimator.count(text) > limit) {
    paper = text.substr(0, estimator.max_prefix_bytes(text, allowed));
    bundle.truncated = true;
  }
  bundle.rendered = render(tmpl.body, guidelines, bundle.schema_json, paper);
  bundle.token_estimate = estimator.count(bundle.rendered);
  // Estimators that are not subadditive may still overshoot; shave further.
  while (bundle.token_estimate > limit && !paper.empty()) {
    allowed = allowed > 0 ? allowed - 1 : 0;
    paper = text.substr(0, estimator.max_prefix_bytes(text, allowed));
    bundle.truncated = true;
    bundle.rendered = render(tmpl.body, guidelines, bundle.schema_json, paper);
    bundle.token_estimate = estimator.count(bundle.rendered);
  }
  bundle.paper_text = std::string(paper);
  return bundle;
}

// ---------------------------------------------------------------------------
// Wire format

Json chat_request_to_json(const ChatRequest& request) {
  Json messages = Json::array();
  for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  return Json{{"model", request.model},
              {"messages", std::move(messages)},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens}};
}

std::optional<std::string> chat_response_content(std::string_view body) {
  auto parsed = parse_json(body);
  if (!parsed || !parsed->is_object()) return std::nullopt;
  auto choices = parsed->find("choices");
  if (choices == parsed->end() || !choices->is_array() || choices->empty()) return std::nullopt;
  const Json& first = (*choices)[0];
  if (!first.is_object()) return std::nullopt;
  auto message = first.find("message");
  if (message == first.end() || !message->is_object()) return std::nullopt;
  auto content = message->find("content");
  if (content == message->end() || !content->is_string()) return std::nullopt;
  return content->get<std::string>();
}

// ---------------------------------------------------------------------------
// Scripted backend

ScriptedChatBackend::ScriptedChatBackend(std::vector<std::string> default_responses)
    : default_queue_(default_responses.begin(), default_responses.end()) {}

void ScriptedChatBackend::script(const std::string& tag, std::vector<std::string> responses) {
  std::lock_guard lock(mutex_);
  queues_[tag] = std::deque<std::string>(responses.begin(), responses.end());
}

std::string ScriptedChatBackend::complete(const ChatRequest& request) {
  std::string response;
  {
    std::lock_guard lock(mutex_);
    requests_.push_back(request);
    auto it = queues_.find(request.tag);
    auto& queue = it != queues_.end() ? it->second : default_queue_;
    if (queue.empty()) throw Error(ErrorCode::EndpointUnreachable, "scripted backend has no response");
    response = queue.front();
    if (queue.size() > 1) queue.pop_front();
  }
  if (response == kUnreachable) {
    throw Error(ErrorCode::EndpointUnreachable, "scripted endpoint unreachable");
  }
  return response;
}

std::size_t ScriptedChatBackend::calls() const {
  std::lock_guard lock(mutex_);
  return requests_.size();
}

std::vector<ChatRequest> ScriptedChatBackend::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

// ---------------------------------------------------------------------------
// Extraction

ExtractionResult extract(std::string_view text, const Schema& schema, std::string_view guidelines,
                         const InferenceConfig& cfg, ChatBackend& backend, const PromptTemplate& tmpl,
                         const TokenEstimator& estimator, const std::string& tag) {
  const PromptBundle bundle = build_prompt(text, schema, guidelines, cfg, tmpl, estimator);
  ChatRequest request;
  request.model = cfg.model_name;
  request.messages.push_back({"user", bundle.rendered});
  request.temperature = cfg.temperature;
  request.max_tokens = cfg.output_reserve;
  request.tag = tag;

  ExtractionResult result;
  for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
    const auto started = std::chrono::steady_clock::now();
    std::string response = backend.complete(request);
    result.attempt_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
    result.attempts_used = attempt;
    auto parsed = try_parse_metadata(response);
    result.raw_responses.push_back(std::move(response));
    if (parsed) {
      result.record = coerce_record(*parsed, schema);
      return result;
    }
  }
  result.record = default_metadata(schema);
  result.fallback_used = true;
  return result;
}

std::vector<BatchOutcome> extract_batch(const std::vector<BatchItem>& items, const InferenceConfig& cfg,
                                        ChatBackend& backend, const PromptTemplate& tmpl,
                                        const TokenEstimator& estimator) {
  cfg.validate();
  std::vector<BatchOutcome> outcomes(items.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      const BatchItem& item = items[i];
      BatchOutcome& slot = outcomes[i];
      slot.paper_id = item.paper_id;
      try {
        if (item.schema == nullptr) throw Error(ErrorCode::MissingSchema, "batch item has no schema");
        slot.result = extract(item.text, *item.schema, item.guidelines, cfg, backend, tmpl, estimator,
                              item.paper_id);
      } catch (const Error& e) {
        slot.error = e.code();
        slot.error_message = e.what();
      } catch (const std::exception& e) {
        slot.error = ErrorCode::Io;
        slot.error_message = e.what();
      }
    }
  };

  const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.parallelism), items.size());
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return outcomes;
}

}  // namespace mextract
