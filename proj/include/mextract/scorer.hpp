#pragma once

#include <map>
#include <string>
#include <vector>

#include "mextract/benchmark.hpp"
#include "mextract/metadata.hpp"
#include "mextract/schema.hpp"

namespace mextract {

struct AttributeScore {
  std::string attribute;
  double similarity = 0.0;
  bool exists_in_paper = false;
  bool constraint_ok = false;
};

struct PaperScore {
  std::string paper_id;
  std::string category;
  int year = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double length_score = 0.0;
  std::vector<AttributeScore> per_attribute;
};

struct MeanScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double length = 0.0;
  std::size_t count = 0;
};

struct AttributeMeans {
  double similarity = 0.0;
  double constraint = 0.0;
  std::size_t count = 0;
};

struct ScoreReport {
  std::vector<PaperScore> per_paper;
  std::map<std::string, MeanScores> by_category;
  std::map<int, MeanScores> by_year;
  std::map<std::string, AttributeMeans> by_attribute;
  MeanScores overall;
};

/// Whether a type-correct value respects the spec's length constraint:
/// word count for strings (option membership when options exist), element
/// count for lists, numeric range for numbers and years. Booleans always pass.
bool check_constraint(const Value& value, const AttributeSpec& spec);

/// List overlap on canonical compact-JSON renderings of each struct.
double sim_structlist(const Value& gold, const Value& pred, const AttributeSpec& spec);

/// Similarity for one attribute, dispatched on the spec's answer type.
double attribute_similarity(const Value& gold, const Value& pred, const AttributeSpec& spec);

/// Precision averages similarity over every schema attribute, recall over
/// the attributes that exist in the paper, F1 is their harmonic mean.
/// Throws Error(EmptyExistenceSet) when no attribute exists in the paper.
PaperScore score_paper(const MetadataRecord& pred, const GoldEntry& gold, const Schema& schema);

/// Macro averages over papers, rounded to 12 decimal places. Throws Error(InvalidArgument) on empty input.
ScoreReport aggregate(const std::vector<PaperScore>& scores);

Json report_to_json(const ScoreReport& report);
/// id,category,year,precision,recall,f1,length
std::string report_to_csv(const ScoreReport& report);
/// Human readable table (percentages) grouped by "category", "year",
/// "attribute" or overall when `by` is empty.
std::string report_to_table(const ScoreReport& report, const std::string& by);

}  // namespace mextract
