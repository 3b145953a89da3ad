#include "mextract/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <set>
#include <thread>

#include "mextract/hashing.hpp"
#include "mextract/random.hpp"
#include "mextract/similarity.hpp"
#include "mextract/text_util.hpp"

namespace mextract {

std::string_view to_string(StubSource s) { return s == StubSource::Acl ? "acl" : "arxiv"; }

Json stub_to_json(const PaperStub& stub) {
  Json j = Json::object();
  j["stub_id"] = stub.stub_id;
  j["title"] = stub.title;
  j["abstract"] = stub.abstract;
  j["source"] = to_string(stub.source);
  if (stub.category) j["category"] = *stub.category;
  if (stub.reasoning) j["reasoning"] = *stub.reasoning;
  if (stub.flagged) {
    j["flagged"] = true;
    j["flag_note"] = stub.flag_note;
  }
  return j;
}

PaperStub stub_from_json(const Json& j) {
  try {
    PaperStub stub;
    stub.stub_id = j.at("stub_id").get<std::string>();
    stub.title = j.at("title").get<std::string>();
    stub.abstract = j.value("abstract", std::string{});
    const std::string source = j.value("source", std::string("arxiv"));
    if (source == "acl") {
      stub.source = StubSource::Acl;
    } else if (source == "arxiv") {
      stub.source = StubSource::Arxiv;
    } else {
      throw Error(ErrorCode::MalformedJson, "stub '" + stub.stub_id + "': unknown source '" + source + "'");
    }
    if (auto c = j.find("category"); c != j.end() && c->is_string()) stub.category = c->get<std::string>();
    if (auto r = j.find("reasoning"); r != j.end() && r->is_string()) stub.reasoning = r->get<std::string>();
    stub.flagged = j.value("flagged", false);
    stub.flag_note = j.value("flag_note", std::string{});
    if (trim(stub.title).empty()) {
      throw Error(ErrorCode::MalformedJson, "stub '" + stub.stub_id + "' has an empty title");
    }
    return stub;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::MalformedJson, std::string("bad paper stub: ") + e.what());
  }
}

const std::vector<std::string>& stub_categories() {
  static const std::vector<std::string> kCategories = {"ar", "en", "fr", "ru", "jp", "other", "multi", "none"};
  return kCategories;
}

bool is_balanced_category(std::string_view category) {
  return category == "ar" || category == "en" || category == "fr" || category == "ru" ||
         category == "jp" || category == "multi";
}

std::string_view classifier_system_prompt() {
  return R"(You are an AI assistant that classifies papers into multiple categories using the title and abstract of the paper.
You should predict if the paper introduces or releases a new dataset or benchmark for nlp, computer vision or speech.
The abstract MUST explicitly mention the creation of a new dataset. Do NOT make any assumptions.
Each dataset paper must be classified in one of the following categories:
- ar: the paper introduces a new  dataset in Arabic or its dialects
- en: the paper introduces a new dataset in English, if the language is not mentioned then assume it is English.
- fr: the paper introduces a new dataset in French
- ru: the paper introduces a new dataset in Russian
- jp: the paper introduces a new dataset in Japanese
- other: the paper introduces a new dataset in another language not in the list above
- multi: the paper introduces a new multilingual or cross-lingual dataset
If the paper is doesn't belong to any of the categories above, the category should be "none".
The output should be a JSON object with the following fields:
{
    "reasoning": "reasoning why the paper is in the category",
    "category": "one item from the list [ar, en, fr, ru, jp, other, multi, none]"
})";
}

Classification classify_stub(const PaperStub& stub, const InferenceConfig& cfg, ChatBackend& backend) {
  cfg.validate();
  ChatRequest request;
  request.model = cfg.model_name;
  request.messages.push_back({"system", std::string(classifier_system_prompt())});
  request.messages.push_back({"user", "Title: " + stub.title + "\nAbstract: " + stub.abstract});
  request.temperature = cfg.temperature;
  request.max_tokens = cfg.output_reserve;
  request.tag = stub.stub_id;

  const auto& allowed = stub_categories();
  std::string last_problem = "no response";
  for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
    const std::string response = backend.complete(request);
    auto object = find_json_object(response);
    if (!object) {
      last_problem = "response is not JSON";
      continue;
    }
    auto category = object->find("category");
    if (category == object->end() || !category->is_string()) {
      last_problem = "response has no category";
      continue;
    }
    const std::string value = category->get<std::string>();
    if (std::find(allowed.begin(), allowed.end(), value) == allowed.end()) {
      last_problem = "category '" + value + "' is not in the closed set";
      continue;
    }
    Classification out;
    out.category = value;
    if (auto r = object->find("reasoning"); r != object->end() && r->is_string()) out.reasoning = r->get<std::string>();
    out.attempts = attempt;
    return out;
  }
  throw Error(ErrorCode::InvalidCategory,
              "stub '" + stub.stub_id + "' after " + std::to_string(cfg.max_attempts) + " attempts: " + last_problem);
}

void classify_stubs(std::vector<PaperStub>& stubs, const InferenceConfig& cfg, ChatBackend& backend) {
  cfg.validate();
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < stubs.size(); i = next++) {
      PaperStub& stub = stubs[i];
      try {
        Classification c = classify_stub(stub, cfg, backend);
        stub.category = c.category;
        stub.reasoning = c.reasoning;
        stub.flagged = false;
        stub.flag_note.clear();
      } catch (const Error& e) {
        stub.category = "none";
        stub.reasoning.reset();
        stub.flagged = true;
        stub.flag_note = e.what();
      }
    }
  };
  const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.parallelism), stubs.size());
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < n_workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
}

std::string normalize_title(std::string_view title) {
  std::string out;
  out.reserve(title.size());
  bool pending_space = false;
  for (char c : title) {
    auto u = static_cast<unsigned char>(c);
    if (std::ispunct(u)) continue;
    if (std::isspace(u)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(u)));
  }
  return out;
}

DedupResult dedup(const std::vector<PaperStub>& stubs) {
  // Best candidate index per key: ACL first, then smallest stub_id.
  std::map<std::string, std::size_t> best;
  auto better = [&](std::size_t a, std::size_t b) {
    const auto& x = stubs[a];
    const auto& y = stubs[b];
    if (x.source != y.source) return x.source == StubSource::Acl;
    return x.stub_id < y.stub_id;
  };
  std::vector<std::string> keys;
  keys.reserve(stubs.size());
  for (std::size_t i = 0; i < stubs.size(); ++i) {
    keys.push_back(normalize_title(stubs[i].title));
    auto [it, inserted] = best.emplace(keys.back(), i);
    if (!inserted && better(i, it->second)) it->second = i;
  }

  DedupResult result;
  for (std::size_t i = 0; i < stubs.size(); ++i) {
    const std::size_t keep = best.at(keys[i]);
    if (keep == i) {
      result.stubs.push_back(stubs[i]);
    } else {
      ++result.removed_count;
      result.log.push_back({stubs[keep].stub_id, stubs[i].stub_id,
                            sim_longstr(stubs[keep].abstract, stubs[i].abstract)});
    }
  }
  return result;
}

std::vector<PaperStub> exclude_benchmark(const std::vector<PaperStub>& stubs, const std::vector<std::string>& titles) {
  std::set<std::string> excluded;
  for (const auto& t : titles) {
    auto key = normalize_title(t);
    if (!key.empty()) excluded.insert(std::move(key));
  }
  std::vector<PaperStub> out;
  for (const auto& stub : stubs) {
    if (!excluded.count(normalize_title(stub.title))) out.push_back(stub);
  }
  return out;
}

std::vector<PaperStub> exclude_benchmark(const std::vector<PaperStub>& stubs, const Dataset& dataset) {
  std::vector<std::string> titles;
  for (const auto& e : dataset.entries) titles.push_back(e.title);
  return exclude_benchmark(stubs, titles);
}

std::vector<PaperStub> balance(const std::vector<PaperStub>& stubs, std::size_t cap, std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < stubs.size(); ++i) groups[stubs[i].category.value_or("")].push_back(i);

  std::vector<bool> keep(stubs.size(), false);
  for (auto& [category, members] : groups) {
    if (members.size() > cap) {
      Rng rng(seed ^ fnv1a64(category));
      rng.shuffle(members);
      members.resize(cap);
    }
    for (auto i : members) keep[i] = true;
  }
  std::vector<PaperStub> out;
  for (std::size_t i = 0; i < stubs.size(); ++i) {
    if (keep[i]) out.push_back(stubs[i]);
  }
  return out;
}

}  // namespace mextract
