#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "batchqa/corpus.h"
#include "batchqa/rng.h"

namespace batchqa {

// N questions bound to one transcript. Position i (1-based) in `questions`
// is answered under key "Q{i}".
struct QuestionGroup {
  std::string transcript_id;
  std::vector<Question> questions;

  int n() const { return static_cast<int>(questions.size()); }
  std::vector<std::string> question_ids() const;
};

struct SamplerConfig {
  std::uint64_t seed = 0;
  int k_min = 5;
  int n_max = 10;
};

// One group of exactly n distinct referenced questions per transcript, drawn
// uniformly without replacement from a substream keyed by (seed, n,
// transcript id). Questions keep their reference-file order inside the group.
std::vector<QuestionGroup> make_eval_groups(const Corpus& corpus, int n,
                                            std::uint64_t seed);

// Inclusive bounds [lo, hi] of the group-size draw for a pool of this size:
// [min(k_min, pool), min(n_max, pool)].
struct KRange {
  int lo;
  int hi;
};
KRange clamp_group_size_range(const SamplerConfig& config, int pool_size);

int draw_group_size(Rng& rng, KRange range);

// Per transcript: draw K uniformly from the clamped [k_min, n_max] interval,
// then K distinct referenced questions.
std::vector<QuestionGroup> make_training_groups(const Corpus& corpus,
                                                const SamplerConfig& config);

// Consecutive partition of each transcript's referenced questions into groups
// of fold_size; the last fold may be shorter. Outer vector is aligned with
// corpus.transcripts(); transcripts without references get no folds.
std::vector<std::vector<QuestionGroup>> make_folds(const Corpus& corpus,
                                                   int fold_size = 10);

}  // namespace batchqa
