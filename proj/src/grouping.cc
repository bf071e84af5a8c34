#include "batchqa/grouping.h"

#include <algorithm>

#include "batchqa/error.h"

namespace batchqa {

namespace {

// Stream tags keep eval, training and other draws from sharing sequences.
constexpr std::uint64_t kEvalTag = 0x6576616c;      // "eval"
constexpr std::uint64_t kTrainingTag = 0x747261696e;  // "train"

QuestionGroup group_from_indices(const Corpus& corpus, const std::string& transcript_id,
                                 const std::vector<std::string>& pool,
                                 std::vector<std::size_t> picked) {
  std::sort(picked.begin(), picked.end());
  QuestionGroup group;
  group.transcript_id = transcript_id;
  group.questions.reserve(picked.size());
  for (std::size_t i : picked) group.questions.push_back(*corpus.find_question(pool[i]));
  return group;
}

[[noreturn]] void insufficient(const std::string& transcript_id,
                               std::size_t available, int wanted) {
  throw Error(ErrorCode::kInsufficientQuestions,
              "transcript '" + transcript_id + "' has " +
                  std::to_string(available) + " referenced questions, need " +
                  std::to_string(wanted));
}

}  // namespace

std::vector<std::string> QuestionGroup::question_ids() const {
  std::vector<std::string> ids;
  ids.reserve(questions.size());
  for (const auto& q : questions) ids.push_back(q.id);
  return ids;
}

std::vector<QuestionGroup> make_eval_groups(const Corpus& corpus, int n,
                                            std::uint64_t seed) {
  if (n < 1) {
    throw Error(ErrorCode::kConfigError,
                "group size must be >= 1, got " + std::to_string(n));
  }
  std::vector<QuestionGroup> groups;
  groups.reserve(corpus.transcripts().size());
  for (const auto& t : corpus.transcripts()) {
    const auto& pool = corpus.referenced_questions(t.id);
    if (pool.size() < static_cast<std::size_t>(n)) insufficient(t.id, pool.size(), n);
    Rng rng = Rng::for_stream(
        seed, {kEvalTag, static_cast<std::uint64_t>(n), fnv1a64(t.id)});
    groups.push_back(group_from_indices(corpus, t.id, pool,
                                        rng.sample_indices(pool.size(), n)));
  }
  return groups;
}

KRange clamp_group_size_range(const SamplerConfig& config, int pool_size) {
  return {std::min(config.k_min, pool_size), std::min(config.n_max, pool_size)};
}

int draw_group_size(Rng& rng, KRange range) {
  return static_cast<int>(rng.between(range.lo, range.hi));
}

std::vector<QuestionGroup> make_training_groups(const Corpus& corpus,
                                                const SamplerConfig& config) {
  if (config.k_min < 1 || config.k_min > config.n_max) {
    throw Error(ErrorCode::kConfigError,
                "need 1 <= k_min <= n_max, got k_min=" +
                    std::to_string(config.k_min) +
                    " n_max=" + std::to_string(config.n_max));
  }
  std::vector<QuestionGroup> groups;
  groups.reserve(corpus.transcripts().size());
  for (const auto& t : corpus.transcripts()) {
    const auto& pool = corpus.referenced_questions(t.id);
    if (pool.empty()) insufficient(t.id, 0, 1);
    Rng rng = Rng::for_stream(
        config.seed, {kTrainingTag, static_cast<std::uint64_t>(config.k_min),
                      static_cast<std::uint64_t>(config.n_max), fnv1a64(t.id)});
    const int k = draw_group_size(
        rng, clamp_group_size_range(config, static_cast<int>(pool.size())));
    groups.push_back(group_from_indices(corpus, t.id, pool,
                                        rng.sample_indices(pool.size(), k)));
  }
  return groups;
}

std::vector<std::vector<QuestionGroup>> make_folds(const Corpus& corpus,
                                                   int fold_size) {
  if (fold_size < 1) {
    throw Error(ErrorCode::kConfigError,
                "fold size must be >= 1, got " + std::to_string(fold_size));
  }
  std::vector<std::vector<QuestionGroup>> folds;
  folds.reserve(corpus.transcripts().size());
  for (const auto& t : corpus.transcripts()) {
    const auto& pool = corpus.referenced_questions(t.id);
    auto& per_transcript = folds.emplace_back();
    for (std::size_t start = 0; start < pool.size(); start += fold_size) {
      QuestionGroup group;
      group.transcript_id = t.id;
      const std::size_t end = std::min(pool.size(), start + fold_size);
      for (std::size_t i = start; i < end; ++i) {
        group.questions.push_back(*corpus.find_question(pool[i]));
      }
      per_transcript.push_back(std::move(group));
    }
  }
  return folds;
}

}  // namespace batchqa
