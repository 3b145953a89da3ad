#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "doctest.h"

#include <cstdlib>
#include <thread>

#include "../support.hpp"
#include "mextract/extractor.hpp"
#include "mextract/scorer.hpp"

using namespace mextract;

namespace {

InferenceConfig test_config() {
  InferenceConfig cfg;
  cfg.endpoint_url = "http://127.0.0.1:1";
  cfg.model_name = "test-model";
  cfg.auth_token_env = "";
  return cfg;
}

const Schema& schema() {
  static const Schema s = testing::model_schema();
  return s;
}

}  // namespace

TEST_CASE("estimate_tokens") {
  CHECK(estimate_tokens("") == 0);
  CHECK(estimate_tokens(std::string(400, 'a')) == 100);
  CHECK(estimate_tokens(std::string(401, 'a')) == 101);
  CHECK(estimate_tokens("日本語") == 1);
  CHECK(estimate_tokens(std::string(8 << 20, 'x')) > 8192);
}

TEST_CASE("config validation and JSON round trip") {
  InferenceConfig cfg = test_config();
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.prompt_budget() == 6144);
  cfg.output_reserve = cfg.context_budget;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = test_config();
  cfg.max_attempts = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = test_config();
  cfg.parallelism = 7;
  const InferenceConfig again = config_from_json(config_to_json(cfg));
  CHECK(again.parallelism == 7);
  CHECK(again.model_name == "test-model");
}

TEST_CASE("build_prompt renders the three sections") {
  const auto bundle = build_prompt("A short paper.", schema(), "Be precise.", test_config());
  CHECK_FALSE(bundle.truncated);
  CHECK(bundle.paper_text == "A short paper.");
  CHECK(bundle.rendered.find("A short paper.") != std::string::npos);
  CHECK(bundle.rendered.find("Be precise.") != std::string::npos);
  CHECK(bundle.rendered.find("\"Paper_Link\"") != std::string::npos);
  CHECK(bundle.rendered.find("{{") == std::string::npos);
  CHECK(bundle.template_id == "extract-v1");
  CHECK(bundle.token_estimate == estimate_tokens(bundle.rendered));
}

TEST_CASE("long papers are cut at the tail to fit the budget") {
  std::string text;
  for (int i = 0; text.size() < 240000; ++i) text += "word" + std::to_string(i) + " ";
  const auto bundle = build_prompt(text, schema(), "Guidelines.", test_config());
  CHECK(bundle.truncated);
  CHECK(bundle.token_estimate <= 6144);
  CHECK(text.rfind(bundle.paper_text, 0) == 0);
  CHECK(bundle.token_estimate > 6000);
}

TEST_CASE("oversized guidelines make the budget impossible") {
  const std::string guidelines(7000 * 4, 'g');
  try {
    build_prompt("paper", schema(), guidelines, test_config());
    FAIL("expected BudgetImpossible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BudgetImpossible);
  }
}

TEST_CASE("custom templates must keep the placeholders usable") {
  PromptTemplate tmpl{"mini", "G={{guidelines}} S={{schema}} P={{paper}}"};
  const auto bundle = build_prompt("txt", schema(), "gd", test_config(), tmpl);
  CHECK(bundle.rendered.rfind("G=gd S=", 0) == 0);
  CHECK(bundle.rendered.size() > 10);
  CHECK(bundle.template_id == "mini");
  CHECK(tmpl.hash().size() == 64);
}

TEST_CASE("wire format") {
  ChatRequest r;
  r.model = "m";
  r.messages.push_back({"user", "hi"});
  r.max_tokens = 2048;
  r.tag = "internal";
  const Json j = chat_request_to_json(r);
  CHECK(j["model"] == "m");
  CHECK(j["messages"][0]["role"] == "user");
  CHECK(j["max_tokens"] == 2048);
  CHECK(j["temperature"] == 0.0);
  CHECK_FALSE(j.contains("tag"));
  CHECK(chat_response_content(R"({"choices":[{"message":{"content":"x"}}]})") == std::optional<std::string>("x"));
  CHECK_FALSE(chat_response_content("{}").has_value());
  CHECK_FALSE(chat_response_content("garbage").has_value());
}

TEST_CASE("retry protocol") {
  const std::string bert = testing::bert_text();
  SUBCASE("first attempt succeeds") {
    ScriptedChatBackend backend({bert});
    const auto r = extract("paper", schema(), "g", test_config(), backend);
    CHECK(r.attempts_used == 1);
    CHECK_FALSE(r.fallback_used);
    CHECK(r.record.at("Name") == Value(std::string("BERT")));
    CHECK(r.attempt_seconds.size() == 1);
  }
  SUBCASE("prose then fenced JSON") {
    ScriptedChatBackend backend({"I think the answer is BERT.", "```json\n" + bert + "\n```"});
    const auto r = extract("paper", schema(), "g", test_config(), backend);
    CHECK(r.attempts_used == 2);
    CHECK(r.raw_responses.size() == 2);
  }
  SUBCASE("garbage three times falls back to the default record") {
    ScriptedChatBackend backend({"no", "nope", "never"});
    const auto r = extract("paper", schema(), "g", test_config(), backend);
    CHECK(r.attempts_used == 3);
    CHECK(r.fallback_used);
    CHECK(r.record == default_metadata(schema()));
    CHECK(backend.calls() == 3);
    GoldEntry gold;
    gold.paper_id = "x";
    gold.gold = coerce_record(parse_metadata(bert), schema());
    for (const auto& a : schema().attributes()) gold.exists[a.name] = true;
    CHECK_NOTHROW(score_paper(r.record, gold, schema()));
  }
  SUBCASE("identical prompt on every attempt") {
    ScriptedChatBackend backend({"a", "b", "c"});
    extract("paper", schema(), "g", test_config(), backend);
    const auto reqs = backend.requests();
    REQUIRE(reqs.size() == 3);
    CHECK(reqs[0].messages[0].content == reqs[2].messages[0].content);
    CHECK(reqs[0].max_tokens == 2048);
  }
  SUBCASE("unreachable endpoint surfaces immediately") {
    ScriptedChatBackend backend({std::string(ScriptedChatBackend::kUnreachable)});
    try {
      extract("paper", schema(), "g", test_config(), backend);
      FAIL("expected EndpointUnreachable");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EndpointUnreachable);
    }
    CHECK(backend.calls() == 1);
  }
  SUBCASE("deterministic under a scripted endpoint") {
    ScriptedChatBackend a({"x", bert});
    ScriptedChatBackend b({"x", bert});
    const auto ra = extract("paper", schema(), "g", test_config(), a);
    const auto rb = extract("paper", schema(), "g", test_config(), b);
    CHECK(ra.record == rb.record);
    CHECK(ra.raw_responses == rb.raw_responses);
    CHECK(ra.attempts_used == rb.attempts_used);
  }
}

TEST_CASE("batches keep input order and isolate failures") {
  const std::string bert = testing::bert_text();
  ScriptedChatBackend backend;
  std::vector<BatchItem> items;
  for (int i = 0; i < 21; ++i) {
    const std::string id = "p" + std::to_string(i);
    items.push_back({id, "text " + id, &schema(), "g"});
    Json rec = parse_json_strict(bert);
    rec["Name"] = id;
    backend.script(id, {dump_compact(rec)});
  }
  backend.script("p3", {std::string(ScriptedChatBackend::kUnreachable)});
  InferenceConfig cfg = test_config();
  cfg.parallelism = 4;
  const auto out = extract_batch(items, cfg, backend);
  REQUIRE(out.size() == 21);
  for (int i = 0; i < 21; ++i) {
    const std::string id = "p" + std::to_string(i);
    CHECK(out[i].paper_id == id);
    if (i == 3) {
      CHECK_FALSE(out[i].result.has_value());
      CHECK(out[i].error == ErrorCode::EndpointUnreachable);
    } else {
      REQUIRE(out[i].result.has_value());
      CHECK(out[i].result->record.at("Name") == Value(id));
    }
  }
  CHECK(extract_batch({}, cfg, backend).empty());
}

TEST_CASE("HTTP backend speaks the chat-completion protocol") {
  httplib::Server server;
  std::string seen_auth, seen_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"{\"Name\":\"X\"}"}}]})",
                    "application/json");
  });
  server.Post("/forbidden", [](const httplib::Request&, httplib::Response& res) { res.status = 401; });
  server.Post("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("MEXTRACT_TEST_TOKEN", "secret", 1);
  InferenceConfig cfg = test_config();
  cfg.endpoint_url = "http://127.0.0.1:" + std::to_string(port);
  cfg.auth_token_env = "MEXTRACT_TEST_TOKEN";
  cfg.request_timeout = 5;

  HttpChatBackend backend(cfg);
  const auto r = extract("paper", schema(), "g", cfg, backend);
  CHECK(r.attempts_used == 1);
  CHECK(r.record.at("Name") == Value(std::string("X")));
  CHECK(seen_auth == "Bearer secret");
  const Json body = parse_json_strict(seen_body);
  CHECK(body["model"] == "test-model");
  CHECK(body["max_tokens"] == 2048);
  CHECK(body["messages"][0]["role"] == "user");

  auto error_for = [&](const std::string& path) {
    InferenceConfig c = cfg;
    c.endpoint_url += path;
    HttpChatBackend b(c);
    try {
      b.complete(ChatRequest{});
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(error_for("/forbidden") == ErrorCode::AuthMissing);
  CHECK(error_for("/broken") == ErrorCode::EndpointUnreachable);

  server.stop();
  thread.join();

  InferenceConfig dead = cfg;
  dead.endpoint_url = "http://127.0.0.1:" + std::to_string(port);
  dead.request_timeout = 1;
  HttpChatBackend gone(dead);
  CHECK_THROWS_AS(gone.complete(ChatRequest{}), Error);

  ::unsetenv("MEXTRACT_TEST_TOKEN");
  try {
    HttpChatBackend missing(cfg);
    FAIL("expected AuthMissing");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AuthMissing);
  }
}
