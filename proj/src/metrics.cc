#include "batchqa/metrics.h"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>

#include "batchqa/error.h"

namespace batchqa {

namespace {

std::string reference_key(std::string_view transcript_id,
                          std::string_view question_id) {
  std::string key(transcript_id);
  key.push_back('\x1f');
  key.append(question_id);
  return key;
}

struct ClassCounts {
  int true_positive = 0;
  int false_positive = 0;
  int false_negative = 0;
};

}  // namespace

double judgment_accuracy(std::span<const JudgmentPair> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyInput, "no judgment pairs");
  const auto correct = std::count_if(pairs.begin(), pairs.end(), [](const JudgmentPair& p) {
    return p.predicted.has_value() && *p.predicted == p.reference;
  });
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

MaeResult navigation_mae(std::span<const NavigationPair> pairs) {
  MaeResult result;
  long long total = 0;
  for (const auto& p : pairs) {
    if (!p.reference.is_index() || !p.predicted.is_index()) continue;
    total += std::llabs(static_cast<long long>(p.reference.value()) - p.predicted.value());
    ++result.pairs_used;
  }
  if (result.pairs_used > 0) {
    result.mae = static_cast<double>(total) / result.pairs_used;
  }
  return result;
}

double navigation_f1(std::span<const NavigationPair> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyInput, "no navigation pairs");
  // Ordered map: the averaging order, and so the rounding, is fixed.
  std::map<NavLabel, ClassCounts> classes;
  for (const auto& p : pairs) {
    if (!p.reference.is_unanswered()) classes[p.reference];
    if (!p.predicted.is_unanswered()) classes[p.predicted];
  }
  for (const auto& p : pairs) {
    const bool hit = !p.predicted.is_unanswered() && p.predicted == p.reference;
    if (hit) {
      ++classes[p.reference].true_positive;
      continue;
    }
    if (!p.reference.is_unanswered()) ++classes[p.reference].false_negative;
    if (!p.predicted.is_unanswered()) ++classes[p.predicted].false_positive;
  }
  if (classes.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [label, c] : classes) {
    const int predicted = c.true_positive + c.false_positive;
    const int actual = c.true_positive + c.false_negative;
    const double precision = predicted == 0 ? 0.0 : static_cast<double>(c.true_positive) / predicted;
    const double recall = actual == 0 ? 0.0 : static_cast<double>(c.true_positive) / actual;
    if (precision + recall > 0.0) {
      sum += 2.0 * precision * recall / (precision + recall);
    }
  }
  return sum / static_cast<double>(classes.size());
}

std::string_view to_string(AccuracyMode mode) {
  return mode == AccuracyMode::kExcludeDecodeFailures ? "exclude" : "wrong";
}

std::optional<AccuracyMode> accuracy_mode_from_string(std::string_view text) {
  if (text == "exclude") return AccuracyMode::kExcludeDecodeFailures;
  if (text == "wrong" || text == "count-as-wrong") return AccuracyMode::kCountAsWrong;
  return std::nullopt;
}

ReferenceTable ReferenceTable::from_corpus(const Corpus& corpus) {
  ReferenceTable table;
  for (const auto& t : corpus.transcripts()) table.set_utterance_count(t.id, t.m());
  for (const auto& r : corpus.references()) table.add(r);
  return table;
}

void ReferenceTable::set_utterance_count(const std::string& transcript_id, int m) {
  utterance_counts_[transcript_id] = m;
}

void ReferenceTable::add(const ReferenceAnswer& reference) {
  references_[reference_key(reference.transcript_id, reference.question_id)] = reference;
}

std::optional<int> ReferenceTable::utterance_count(std::string_view transcript_id) const {
  auto it = utterance_counts_.find(std::string(transcript_id));
  if (it == utterance_counts_.end()) return std::nullopt;
  return it->second;
}

const ReferenceAnswer* ReferenceTable::find(std::string_view transcript_id,
                                            std::string_view question_id) const {
  auto it = references_.find(reference_key(transcript_id, question_id));
  return it == references_.end() ? nullptr : &it->second;
}

ScoringPairs collect_scoring_pairs(std::span<const ScoredUnit> units,
                                   const ReferenceTable& references,
                                   AccuracyMode mode) {
  // Sort by transcript id so reduction order never depends on input order.
  std::vector<const ScoredUnit*> order;
  order.reserve(units.size());
  for (const auto& u : units) order.push_back(&u);
  std::stable_sort(order.begin(), order.end(), [](const ScoredUnit* a, const ScoredUnit* b) {
    return a->transcript_id < b->transcript_id;
  });

  ScoringPairs pairs;
  for (const ScoredUnit* unit : order) {
    const auto m = references.utterance_count(unit->transcript_id);
    if (!m) {
      throw Error(ErrorCode::kAlignmentError,
                  "unknown transcript '" + unit->transcript_id + "'");
    }
    std::vector<const ReferenceAnswer*> refs;
    refs.reserve(unit->question_ids.size());
    for (const auto& qid : unit->question_ids) {
      const ReferenceAnswer* ref = references.find(unit->transcript_id, qid);
      if (ref == nullptr) {
        throw Error(ErrorCode::kAlignmentError,
                    "no reference for (" + unit->transcript_id + ", " + qid + ")");
      }
      refs.push_back(ref);
    }

    if (!unit->outcome.ok()) {
      ++pairs.counts.decode_failures;
      if (mode == AccuracyMode::kExcludeDecodeFailures) continue;
      for (const ReferenceAnswer* ref : refs) {
        pairs.judgments.push_back({ref->judgment, std::nullopt});
        pairs.navigations.push_back({ref->navigation, NavLabel::unanswered()});
        ++pairs.counts.scored_questions;
        ++pairs.counts.unanswered;
      }
      continue;
    }

    for (std::size_t i = 0; i < refs.size(); ++i) {
      const ReferenceAnswer* ref = refs[i];
      ++pairs.counts.scored_questions;
      auto it = unit->outcome.answers.find(static_cast<int>(i) + 1);
      if (it == unit->outcome.answers.end()) {
        ++pairs.counts.unanswered;
        pairs.judgments.push_back({ref->judgment, std::nullopt});
        pairs.navigations.push_back({ref->navigation, NavLabel::unanswered()});
        continue;
      }
      NavLabel predicted = it->second.navigation;
      if (predicted.is_index() && predicted.value() > *m) {
        ++pairs.counts.out_of_range_navigation;
        predicted = NavLabel::unanswered();
      }
      pairs.judgments.push_back({ref->judgment, it->second.judgment});
      pairs.navigations.push_back({ref->navigation, predicted});
    }
  }
  return pairs;
}

EvalReport aggregate_report(std::string model_name, int n,
                            std::span<const ScoredUnit> units,
                            const ReferenceTable& references, AccuracyMode mode) {
  if (units.empty()) throw Error(ErrorCode::kEmptyInput, "no evaluation units");
  for (const auto& u : units) {
    if (static_cast<int>(u.question_ids.size()) != n) {
      throw Error(ErrorCode::kAlignmentError,
                  "unit for '" + u.transcript_id + "' has " +
                      std::to_string(u.question_ids.size()) +
                      " questions, report is for N=" + std::to_string(n));
    }
  }
  ScoringPairs pairs = collect_scoring_pairs(units, references, mode);

  EvalReport report;
  report.model_name = std::move(model_name);
  report.n = n;
  report.units = static_cast<int>(units.size());
  report.json_decode_error_rate =
      static_cast<double>(pairs.counts.decode_failures) / static_cast<double>(units.size());
  if (pairs.judgments.empty()) {
    report.empty_scoring = true;
  } else {
    report.judgment_accuracy = judgment_accuracy(pairs.judgments);
    report.navigation_f1 = navigation_f1(pairs.navigations);
    const MaeResult mae = navigation_mae(pairs.navigations);
    report.navigation_mae = mae.mae;
    pairs.counts.nav_pairs_used = mae.pairs_used;
  }
  report.counts = pairs.counts;
  return report;
}

}  // namespace batchqa
