#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <deque>
#include <string>
#include <string_view>
#include <vector>

#include "mextract/error.hpp"
#include "mextract/metadata.hpp"
#include "mextract/schema.hpp"

namespace mextract {

// ---------------------------------------------------------------------------
// Token estimation

/// Token counter used for prompt budgeting. Implementations must be
/// monotone in prefix length.
class TokenEstimator {
 public:
  virtual ~TokenEstimator() = default;
  virtual std::size_t count(std::string_view text) const = 0;
  /// Byte length of the longest UTF-8 prefix of `text` whose count is at most
  /// `budget`. The default bisects over code point boundaries.
  virtual std::size_t max_prefix_bytes(std::string_view text, std::size_t budget) const;
};

/// ceil(code points / chars_per_token).
class CharTokenEstimator final : public TokenEstimator {
 public:
  explicit CharTokenEstimator(std::size_t chars_per_token = 4) : chars_per_token_(chars_per_token) {}
  std::size_t count(std::string_view text) const override;
  std::size_t max_prefix_bytes(std::string_view text, std::size_t budget) const override;

 private:
  std::size_t chars_per_token_;
};

std::size_t estimate_tokens(std::string_view text);

// ---------------------------------------------------------------------------
// Prompt assembly

struct InferenceConfig {
  std::string endpoint_url;
  std::string model_name;
  std::size_t context_budget = 8192;
  std::size_t output_reserve = 2048;
  int max_attempts = 3;
  double request_timeout = 300.0;  // seconds
  int parallelism = 4;
  std::string auth_token_env = "MEXTRACT_API_KEY";
  double temperature = 0.0;

  /// Throws Error(InvalidArgument) when output_reserve >= context_budget,
  /// max_attempts < 1 or parallelism < 1.
  void validate() const;
  std::size_t prompt_budget() const { return context_budget - output_reserve; }
};

Json config_to_json(const InferenceConfig& cfg);
/// Missing keys keep their defaults.
InferenceConfig config_from_json(const Json& j);

/// Extraction prompt template with {{guidelines}}, {{schema}} and {{paper}}
/// placeholders.
struct PromptTemplate {
  std::string id;
  std::string body;

  /// The template shipped in templates/extract-v1.txt.
  static PromptTemplate builtin();
  static PromptTemplate load(const std::string& path);
  /// Hex SHA-256 of the body.
  std::string hash() const;
};

struct PromptBundle {
  std::string paper_text;
  std::string schema_json;
  std::string guidelines;
  std::string template_id;
  std::string rendered;
  std::size_t token_estimate = 0;
  bool truncated = false;
};

/// Renders the prompt, cutting the tail of the paper text until the estimate
/// fits in context_budget - output_reserve. Throws Error(BudgetImpossible)
/// when the prompt without any paper text is already over budget.
PromptBundle build_prompt(std::string_view text, const Schema& schema, std::string_view guidelines,
                          const InferenceConfig& cfg,
                          const PromptTemplate& tmpl = PromptTemplate::builtin(),
                          const TokenEstimator& estimator = CharTokenEstimator());

// ---------------------------------------------------------------------------
// Chat completion transport

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  std::size_t max_tokens = 0;
  /// Caller-side label (paper or stub id); never sent on the wire.
  std::string tag;
};

/// {model, messages:[{role, content}], temperature, max_tokens}
Json chat_request_to_json(const ChatRequest& request);
/// choices[0].message.content, or nullopt when the body does not have it.
std::optional<std::string> chat_response_content(std::string_view body);

/// Sends one chat request and returns the assistant text. Implementations
/// throw Error(EndpointUnreachable) on transport failure and must be safe to
/// call from several threads.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

/// OpenAI-style HTTP endpoint. The bearer token is read from the environment
/// variable cfg.auth_token_env (no header when that name is empty).
class HttpChatBackend final : public ChatBackend {
 public:
  /// Throws Error(AuthMissing) when the token variable is unset.
  explicit HttpChatBackend(const InferenceConfig& cfg);
  std::string complete(const ChatRequest& request) override;

 private:
  std::string scheme_host_port_;
  std::string path_;
  std::string token_;
  double timeout_;
};

/// Replays canned responses. Each tag has its own queue; requests whose tag
/// has no queue draw from the shared default queue. A response equal to
/// kUnreachable raises EndpointUnreachable. An exhausted queue repeats its
/// last response.
class ScriptedChatBackend final : public ChatBackend {
 public:
  static constexpr std::string_view kUnreachable = "<<unreachable>>";

  explicit ScriptedChatBackend(std::vector<std::string> default_responses = {});
  void script(const std::string& tag, std::vector<std::string> responses);
  std::string complete(const ChatRequest& request) override;
  std::size_t calls() const;
  std::vector<ChatRequest> requests() const;

 private:
  mutable std::mutex mutex_;
  std::deque<std::string> default_queue_;
  std::map<std::string, std::deque<std::string>> queues_;
  std::vector<ChatRequest> requests_;
};

// ---------------------------------------------------------------------------
// Extraction

struct ExtractionResult {
  MetadataRecord record;
  int attempts_used = 0;
  bool fallback_used = false;
  std::vector<std::string> raw_responses;
  std::vector<double> attempt_seconds;
};

/// Sends the prompt up to cfg.max_attempts times, returning the first response
/// that parses as a JSON object (coerced onto the schema). When every attempt
/// fails to parse, returns default_metadata with fallback_used set. Transport
/// errors propagate immediately.
ExtractionResult extract(std::string_view text, const Schema& schema, std::string_view guidelines,
                         const InferenceConfig& cfg, ChatBackend& backend,
                         const PromptTemplate& tmpl = PromptTemplate::builtin(),
                         const TokenEstimator& estimator = CharTokenEstimator(),
                         const std::string& tag = {});

struct BatchItem {
  std::string paper_id;
  std::string text;
  const Schema* schema = nullptr;
  std::string guidelines;
};

struct BatchOutcome {
  std::string paper_id;
  std::optional<ExtractionResult> result;
  std::optional<ErrorCode> error;
  std::string error_message;
};

/// Runs extract over `items` with at most cfg.parallelism requests in flight.
/// Output order follows input order; a failing item fills its own slot.
std::vector<BatchOutcome> extract_batch(const std::vector<BatchItem>& items, const InferenceConfig& cfg,
                                        ChatBackend& backend,
                                        const PromptTemplate& tmpl = PromptTemplate::builtin(),
                                        const TokenEstimator& estimator = CharTokenEstimator());

}  // namespace mextract
