#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "batchqa/corpus.h"
#include "batchqa/grouping.h"
#include "batchqa/prompt.h"

namespace batchqa {

struct TrainingExample {
  std::string transcript_id;
  int k = 0;
  std::string prompt_text;
  std::string completion_text;  // canonical answer object from references
};

// The completion for a group, built from the reference answers with the
// canonical serializer.
std::string reference_completion(const Corpus& corpus,
                                 const QuestionGroup& group);

std::vector<TrainingExample> build_training_examples(
    const Corpus& corpus, const SamplerConfig& config,
    const RenderOptions& render = {});

struct TrainingManifest {
  std::size_t records = 0;
  SamplerConfig config;
  std::map<int, std::size_t> k_histogram;
};

// Writes one {"prompt","completion"} line per transcript, in corpus order.
TrainingManifest export_training_set(const Corpus& corpus,
                                     const SamplerConfig& config,
                                     const std::filesystem::path& out_path,
                                     const RenderOptions& render = {});

std::string to_json(const TrainingManifest& manifest);

struct EvalManifestEntry {
  int n = 0;
  std::string transcript_id;
  std::vector<std::string> question_ids;
  std::vector<ReferenceAnswer> references;  // aligned with question_ids
};

struct EvalManifest {
  std::uint64_t seed = 0;
  std::string tool_version;
  std::vector<EvalManifestEntry> entries;
  std::vector<std::string> warnings;

  std::size_t question_entries() const;
  std::vector<int> group_sizes() const;  // ascending, distinct
};

// Groups for each n come from make_eval_groups, so each n uses its own
// substream and adding sizes never changes existing sections.
EvalManifest build_eval_manifest(const Corpus& corpus,
                                 std::span<const int> n_list,
                                 std::uint64_t seed);

// Header line {"seed","tool_version"} followed by one line per entry.
EvalManifest export_eval_manifest(const Corpus& corpus,
                                  std::span<const int> n_list,
                                  std::uint64_t seed,
                                  const std::filesystem::path& out_path);

void write_eval_manifest(const EvalManifest& manifest,
                         const std::filesystem::path& out_path);
EvalManifest load_eval_manifest(const std::filesystem::path& path);

// Rebuilds the question groups of one size from a manifest. Throws
// kDanglingReference when the manifest names ids the corpus lacks.
std::vector<QuestionGroup> manifest_groups(const EvalManifest& manifest,
                                           const Corpus& corpus, int n);

}  // namespace batchqa
