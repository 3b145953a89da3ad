#include "mextract/scorer.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "mextract/error.hpp"
#include "mextract/similarity.hpp"
#include "mextract/text_util.hpp"

namespace mextract {

namespace {

bool within(double v, const AttributeSpec& spec, double absent_min) {
  double lo = spec.answer_min.value_or(absent_min);
  double hi = spec.answer_max.value_or(std::numeric_limits<double>::infinity());
  return v >= lo && v <= hi;
}

std::vector<std::string> rendered_items(const Value& v) {
  std::vector<std::string> out;
  if (!v.is_list()) return out;
  for (const auto& item : v.list()) out.push_back(render_text(item));
  return out;
}

std::vector<std::string> canonical_structs(const Value& v) {
  std::vector<std::string> out;
  if (!v.is_list()) return out;
  for (const auto& item : v.list()) out.push_back(dump_compact(value_to_json(item)));
  return out;
}

}  // namespace

bool check_constraint(const Value& value, const AttributeSpec& spec) {
  if (!is_type_valid(value, spec)) return false;
  const double kInf = std::numeric_limits<double>::infinity();
  switch (spec.answer_type.kind()) {
    case TypeKind::Str:
    case TypeKind::LongStr:
    case TypeKind::Url:
      if (spec.has_options()) return spec.allows_option(trim(value.text()));
      return within(static_cast<double>(split_whitespace(value.text()).size()), spec, 0.0);
    case TypeKind::List:
      if (spec.has_options()) {
        for (const auto& item : value.list()) {
          if (!spec.allows_option(trim(render_text(item)))) return false;
        }
      }
      return within(static_cast<double>(value.list().size()), spec, 0.0);
    case TypeKind::StructList:
      return within(static_cast<double>(value.list().size()), spec, 0.0);
    case TypeKind::Float:
      return within(value.number(), spec, -kInf);
    case TypeKind::Int:
    case TypeKind::Year:
      return within(static_cast<double>(value.integer()), spec, -kInf);
    case TypeKind::Bool:
      return true;
  }
  return false;
}

double sim_structlist(const Value& gold, const Value& pred, const AttributeSpec& spec) {
  auto canonical = [&](const Value& v) {
    return canonical_structs(is_type_valid(v, spec) ? v : coerce(v, spec).value);
  };
  return sim_list(canonical(gold), canonical(pred));
}

double attribute_similarity(const Value& gold_in, const Value& pred_in, const AttributeSpec& spec) {
  const Value gold = is_type_valid(gold_in, spec) ? gold_in : coerce(gold_in, spec).value;
  const Value pred = is_type_valid(pred_in, spec) ? pred_in : coerce(pred_in, spec).value;
  switch (spec.answer_type.kind()) {
    case TypeKind::Str:
      return sim_string(gold.text(), pred.text(), spec.has_options() ? &*spec.options : nullptr);
    case TypeKind::LongStr:
      return sim_longstr(gold.text(), pred.text());
    case TypeKind::Url:
      return sim_url(gold.text(), pred.text());
    case TypeKind::Float:
      return sim_number(gold.number(), pred.number());
    case TypeKind::Int:
      return sim_number(static_cast<double>(gold.integer()), static_cast<double>(pred.integer()));
    case TypeKind::Year:
      return sim_year(gold.integer(), pred.integer());
    case TypeKind::Bool:
      return gold.boolean() == pred.boolean() ? 1.0 : 0.0;
    case TypeKind::List:
      return sim_list(rendered_items(gold), rendered_items(pred));
    case TypeKind::StructList:
      return sim_structlist(gold, pred, spec);
  }
  return 0.0;
}

PaperScore score_paper(const MetadataRecord& pred_in, const GoldEntry& gold_entry, const Schema& schema) {
  const MetadataRecord pred = coerce_record(pred_in, schema);
  const MetadataRecord gold = coerce_record(gold_entry.gold, schema);

  PaperScore score;
  score.paper_id = gold_entry.paper_id;
  score.category = gold_entry.category;
  score.year = gold_entry.year;

  double sim_all = 0.0;
  double sim_existing = 0.0;
  std::size_t n_existing = 0;
  std::size_t n_constraint_ok = 0;
  for (const auto& spec : schema.attributes()) {
    AttributeScore attr;
    attr.attribute = spec.name;
    attr.similarity = attribute_similarity(gold.at(spec.name), pred.at(spec.name), spec);
    auto flag = gold_entry.exists.find(spec.name);
    attr.exists_in_paper = flag != gold_entry.exists.end() && flag->second;
    attr.constraint_ok = check_constraint(pred.at(spec.name), spec);

    sim_all += attr.similarity;
    if (attr.exists_in_paper) {
      sim_existing += attr.similarity;
      ++n_existing;
    }
    if (attr.constraint_ok) ++n_constraint_ok;
    score.per_attribute.push_back(std::move(attr));
  }
  if (n_existing == 0) {
    throw Error(ErrorCode::EmptyExistenceSet,
                "paper '" + gold_entry.paper_id + "' has no attribute marked as existing");
  }
  const auto n = static_cast<double>(schema.size());
  score.precision = sim_all / n;
  score.recall = sim_existing / static_cast<double>(n_existing);
  double sum = score.precision + score.recall;
  score.f1 = sum > 0.0 ? 2.0 * score.precision * score.recall / sum : 0.0;
  score.length_score = static_cast<double>(n_constraint_ok) / n;
  return score;
}

namespace {

// Means are rounded to 12 decimal places so that averages of decimal scores
// come out as the decimal mean (0.4 and 0.8 average to 0.6, not 0.6000000000000001).
double tidy_mean(double sum, std::size_t n) {
  const double mean = sum / static_cast<double>(n);
  return std::round(mean * 1e12) / 1e12;
}

struct MeanAccumulator {
  double precision = 0, recall = 0, f1 = 0, length = 0;
  std::size_t count = 0;

  void add(const PaperScore& s) {
    precision += s.precision;
    recall += s.recall;
    f1 += s.f1;
    length += s.length_score;
    ++count;
  }

  MeanScores mean() const {
    return MeanScores{tidy_mean(precision, count), tidy_mean(recall, count), tidy_mean(f1, count),
                      tidy_mean(length, count), count};
  }
};

struct AttributeAccumulator {
  double similarity = 0, constraint = 0;
  std::size_t count = 0;
};

Json means_to_json(const MeanScores& m) {
  return Json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
              {"length", m.length}, {"count", m.count}};
}

std::string pct(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << v * 100.0;
  return out.str();
}

}  // namespace

ScoreReport aggregate(const std::vector<PaperScore>& scores) {
  if (scores.empty()) throw Error(ErrorCode::InvalidArgument, "cannot aggregate zero papers");
  MeanAccumulator overall;
  std::map<std::string, MeanAccumulator> by_category;
  std::map<int, MeanAccumulator> by_year;
  std::map<std::string, AttributeAccumulator> by_attribute;
  for (const auto& s : scores) {
    overall.add(s);
    by_category[s.category].add(s);
    by_year[s.year].add(s);
    for (const auto& a : s.per_attribute) {
      auto& m = by_attribute[a.attribute];
      m.similarity += a.similarity;
      m.constraint += a.constraint_ok ? 1.0 : 0.0;
      ++m.count;
    }
  }
  ScoreReport report;
  report.per_paper = scores;
  report.overall = overall.mean();
  for (const auto& [key, m] : by_category) report.by_category[key] = m.mean();
  for (const auto& [key, m] : by_year) report.by_year[key] = m.mean();
  for (const auto& [key, m] : by_attribute) {
    report.by_attribute[key] = AttributeMeans{tidy_mean(m.similarity, m.count), tidy_mean(m.constraint, m.count),
                                              m.count};
  }
  return report;
}

Json report_to_json(const ScoreReport& report) {
  Json papers = Json::array();
  for (const auto& s : report.per_paper) {
    Json attrs = Json::array();
    for (const auto& a : s.per_attribute) {
      attrs.push_back({{"attribute", a.attribute}, {"similarity", a.similarity},
                       {"exists", a.exists_in_paper}, {"constraint_ok", a.constraint_ok}});
    }
    papers.push_back({{"paper_id", s.paper_id}, {"category", s.category}, {"year", s.year},
                      {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1},
                      {"length", s.length_score}, {"attributes", std::move(attrs)}});
  }
  Json by_category = Json::object();
  for (const auto& [key, m] : report.by_category) by_category[key] = means_to_json(m);
  Json by_year = Json::object();
  for (const auto& [key, m] : report.by_year) by_year[std::to_string(key)] = means_to_json(m);
  Json by_attribute = Json::object();
  for (const auto& [key, m] : report.by_attribute) {
    by_attribute[key] = {{"similarity", m.similarity}, {"constraint", m.constraint}, {"count", m.count}};
  }
  return Json{{"overall", means_to_json(report.overall)},
              {"by_category", std::move(by_category)},
              {"by_year", std::move(by_year)},
              {"by_attribute", std::move(by_attribute)},
              {"papers", std::move(papers)}};
}

std::string report_to_csv(const ScoreReport& report) {
  std::ostringstream out;
  out << "id,category,year,precision,recall,f1,length\n";
  out << std::setprecision(17);
  for (const auto& s : report.per_paper) {
    out << s.paper_id << ',' << s.category << ',' << s.year << ',' << s.precision << ','
        << s.recall << ',' << s.f1 << ',' << s.length_score << '\n';
  }
  return out.str();
}

std::string report_to_table(const ScoreReport& report, const std::string& by) {
  std::ostringstream out;
  auto row = [&](const std::string& key, const MeanScores& m) {
    out << std::left << std::setw(16) << key << std::right << std::setw(10) << pct(m.precision)
        << std::setw(10) << pct(m.recall) << std::setw(10) << pct(m.f1) << std::setw(10)
        << pct(m.length) << std::setw(8) << m.count << '\n';
  };
  if (by == "attribute") {
    out << std::left << std::setw(20) << "attribute" << std::right << std::setw(12) << "similarity"
        << std::setw(12) << "constraint" << std::setw(8) << "n" << '\n';
    for (const auto& [key, m] : report.by_attribute) {
      out << std::left << std::setw(20) << key << std::right << std::setw(12) << pct(m.similarity)
          << std::setw(12) << pct(m.constraint) << std::setw(8) << m.count << '\n';
    }
    return out.str();
  }
  out << std::left << std::setw(16) << (by.empty() ? "group" : by) << std::right << std::setw(10)
      << "P" << std::setw(10) << "R" << std::setw(10) << "F1" << std::setw(10) << "length"
      << std::setw(8) << "n" << '\n';
  if (by == "category") {
    for (const auto& [key, m] : report.by_category) row(key, m);
  } else if (by == "year") {
    for (const auto& [key, m] : report.by_year) row(std::to_string(key), m);
  }
  row("Average", report.overall);
  return out.str();
}

}  // namespace mextract
