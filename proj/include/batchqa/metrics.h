#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "batchqa/corpus.h"
#include "batchqa/parser.h"
#include "batchqa/types.h"

namespace batchqa {

struct JudgmentPair {
  Judgment reference;
  std::optional<Judgment> predicted;  // nullopt = Unanswered
};

struct NavigationPair {
  NavLabel reference;  // index or NA
  NavLabel predicted;  // index, NA or Unanswered
};

// correct / total; Unanswered counts as wrong. Throws kEmptyInput.
double judgment_accuracy(std::span<const JudgmentPair> pairs);

struct MaeResult {
  double mae = 0.0;
  int pairs_used = 0;
};

// Mean |y - y_hat| over pairs where both sides are indices. mae = 0 and
// pairs_used = 0 when nothing qualifies.
MaeResult navigation_mae(std::span<const NavigationPair> pairs);

// Macro F1 over every index/NA label seen on either side. Unanswered is a
// reserved class that never matches and is not averaged. Throws kEmptyInput.
double navigation_f1(std::span<const NavigationPair> pairs);

enum class AccuracyMode {
  kExcludeDecodeFailures,  // default: decode-failed responses leave the
                           // denominators
  kCountAsWrong,           // their questions count as Unanswered
};

std::string_view to_string(AccuracyMode mode);
std::optional<AccuracyMode> accuracy_mode_from_string(std::string_view text);

struct EvalCounts {
  int scored_questions = 0;
  int decode_failures = 0;
  int unanswered = 0;
  int nav_pairs_used = 0;
  int out_of_range_navigation = 0;
};

struct EvalReport {
  std::string model_name;
  int n = 0;
  double judgment_accuracy = 0.0;
  double navigation_f1 = 0.0;
  double navigation_mae = 0.0;
  double json_decode_error_rate = 0.0;
  EvalCounts counts;
  int units = 0;
  // No question was scored (e.g. every response failed to decode); the three
  // answer metrics are reported as 0.
  bool empty_scoring = false;
};

// Reference answers plus utterance counts, keyed by (transcript, question).
// Built from a Corpus, or from an archive when rescoring offline.
class ReferenceTable {
 public:
  static ReferenceTable from_corpus(const Corpus& corpus);

  void set_utterance_count(const std::string& transcript_id, int m);
  void add(const ReferenceAnswer& reference);

  std::optional<int> utterance_count(std::string_view transcript_id) const;
  const ReferenceAnswer* find(std::string_view transcript_id,
                              std::string_view question_id) const;

 private:
  std::unordered_map<std::string, int> utterance_counts_;
  std::unordered_map<std::string, ReferenceAnswer> references_;
};

// One evaluation unit: a parsed response for one (transcript, group).
struct ScoredUnit {
  std::string transcript_id;
  std::vector<std::string> question_ids;  // position i -> question_ids[i-1]
  ParseOutcome outcome;
};

// Per-question pairs fed into the three metrics for a set of units, after
// decode-failure handling and range checks. Exposed so callers can
// recompute any metric from the exact filtered sets.
struct ScoringPairs {
  std::vector<JudgmentPair> judgments;
  std::vector<NavigationPair> navigations;
  EvalCounts counts;
};

ScoringPairs collect_scoring_pairs(std::span<const ScoredUnit> units,
                                   const ReferenceTable& references,
                                   AccuracyMode mode);

// Throws kAlignmentError when a unit names an unknown transcript, a question
// without a reference, or a group size other than n; kEmptyInput for no units.
EvalReport aggregate_report(std::string model_name, int n,
                            std::span<const ScoredUnit> units,
                            const ReferenceTable& references,
                            AccuracyMode mode = AccuracyMode::kExcludeDecodeFailures);

}  // namespace batchqa
