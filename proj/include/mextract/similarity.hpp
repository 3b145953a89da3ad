#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mextract {

/// Levenshtein distance over UTF-8 code points (unit costs).
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Length of the longest common subsequence of two token sequences.
std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// 1 - |gold - pred| / max(gold, pred), clamped to [0, 1]; 1 when equal.
/// A non-positive max with unequal operands scores 0.
double sim_number(double gold, double pred);

/// sim_number on years shifted by 2010, each offset floored at 1.
double sim_year(long long gold, long long pred);

/// Exact match on trimmed strings when `options` is given; otherwise
/// 1 - levenshtein / max length on trimmed strings (both empty -> 1).
double sim_string(std::string_view gold, std::string_view pred,
                  const std::vector<std::string>* options = nullptr);

/// ROUGE-L F-measure over lowercased whitespace tokens.
double sim_longstr(std::string_view gold, std::string_view pred);

double sim_url(std::string_view gold, std::string_view pred);

/// |set(gold) ∩ set(pred)| / max(|set(gold)|, |set(pred)|) on trimmed items.
double sim_list(const std::vector<std::string>& gold, const std::vector<std::string>& pred);

}  // namespace mextract
