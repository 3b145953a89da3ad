#include "mextract/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mextract/text_util.hpp"

namespace mextract {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

std::size_t levenshtein(std::string_view a, std::string_view b) {
  const std::u32string s = utf8_decode(a);
  const std::u32string t = utf8_decode(b);
  if (s.empty()) return t.size();
  if (t.empty()) return s.size();
  std::vector<std::size_t> row(t.size() + 1);
  for (std::size_t j = 0; j <= t.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= s.size(); ++i) {
    std::size_t diagonal = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= t.size(); ++j) {
      std::size_t above = row[j];
      std::size_t substitution = diagonal + (s[i - 1] == t[j - 1] ? 0 : 1);
      row[j] = std::min({above + 1, row[j - 1] + 1, substitution});
      diagonal = above;
    }
  }
  return row[t.size()];
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double sim_number(double gold, double pred) {
  if (gold == pred) return 1.0;
  double denom = std::max(gold, pred);
  if (!(denom > 0.0)) return 0.0;
  return clamp01(1.0 - std::abs(gold - pred) / denom);
}

double sim_year(long long gold, long long pred) {
  auto offset = [](long long year) { return static_cast<double>(std::max(year - 2010, 1LL)); };
  return clamp01(sim_number(offset(gold), offset(pred)));
}

double sim_string(std::string_view gold, std::string_view pred,
                  const std::vector<std::string>* options) {
  auto g = trim(gold);
  auto p = trim(pred);
  if (options != nullptr) return g == p ? 1.0 : 0.0;
  std::size_t longest = std::max(utf8_length(g), utf8_length(p));
  if (longest == 0) return 1.0;
  return clamp01(1.0 - static_cast<double>(levenshtein(g, p)) / static_cast<double>(longest));
}

double sim_longstr(std::string_view gold, std::string_view pred) {
  auto tokens = [](std::string_view s) {
    std::vector<std::string> out;
    for (auto word : split_whitespace(s)) out.push_back(ascii_lower(word));
    return out;
  };
  auto g = tokens(gold);
  auto p = tokens(pred);
  if (g.empty() && p.empty()) return 1.0;
  if (g.empty() || p.empty()) return 0.0;
  double lcs = static_cast<double>(lcs_length(g, p));
  if (lcs == 0.0) return 0.0;
  double precision = lcs / static_cast<double>(p.size());
  double recall = lcs / static_cast<double>(g.size());
  return clamp01(2.0 * precision * recall / (precision + recall));
}

double sim_url(std::string_view gold, std::string_view pred) { return sim_string(gold, pred); }

double sim_list(const std::vector<std::string>& gold, const std::vector<std::string>& pred) {
  auto to_set = [](const std::vector<std::string>& items) {
    std::set<std::string, std::less<>> out;
    for (const auto& item : items) out.emplace(trim(item));
    return out;
  };
  auto g = to_set(gold);
  auto p = to_set(pred);
  if (g.empty() && p.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& item : g) common += p.count(item);
  return static_cast<double>(common) / static_cast<double>(std::max(g.size(), p.size()));
}

}  // namespace mextract
