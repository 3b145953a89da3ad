#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <cstdlib>

#include "mextract/extractor.hpp"

namespace mextract {

namespace {

// Splits "scheme://host[:port]/path" into the client origin and request path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "endpoint url needs a scheme: '" + url + "'");
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/v1/chat/completions"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpChatBackend::HttpChatBackend(const InferenceConfig& cfg) : timeout_(cfg.request_timeout) {
  std::tie(scheme_host_port_, path_) = split_url(cfg.endpoint_url);
  if (!cfg.auth_token_env.empty()) {
    const char* token = std::getenv(cfg.auth_token_env.c_str());
    if (token == nullptr || *token == '\0') {
      throw Error(ErrorCode::AuthMissing, "environment variable " + cfg.auth_token_env + " is not set");
    }
    token_ = token;
  }
}

std::string HttpChatBackend::complete(const ChatRequest& request) {
  httplib::Client client(scheme_host_port_);
  if (!client.is_valid()) {
    throw Error(ErrorCode::EndpointUnreachable, "invalid endpoint " + scheme_host_port_);
  }
  const auto seconds = static_cast<time_t>(timeout_);
  const auto micros = static_cast<time_t>((timeout_ - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  auto res = client.Post(path_, headers, dump_compact(chat_request_to_json(request)), "application/json");
  if (!res) {
    throw Error(ErrorCode::EndpointUnreachable,
                scheme_host_port_ + path_ + ": " + httplib::to_string(res.error()));
  }
  if (res->status == 401 || res->status == 403) {
    throw Error(ErrorCode::AuthMissing, "endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::EndpointUnreachable, "endpoint returned HTTP " + std::to_string(res->status));
  }
  // A body without choices[0].message.content counts as an unparseable answer.
  return chat_response_content(res->body).value_or(std::string{});
}

}  // namespace mextract
