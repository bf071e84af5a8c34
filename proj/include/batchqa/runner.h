#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "batchqa/corpus.h"
#include "batchqa/llm_backend.h"
#include "batchqa/metrics.h"
#include "batchqa/parser.h"
#include "batchqa/prompt.h"

namespace batchqa {

struct RunConfig {
  CorpusPaths corpus;
  std::vector<BackendConfig> backends;
  std::vector<int> n_list;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  ParseMode parse_mode = ParseMode::kStrict;
  AccuracyMode accuracy_mode = AccuracyMode::kExcludeDecodeFailures;
  bool include_speaker = false;
  std::size_t max_prompt_chars = 0;
  std::optional<std::filesystem::path> template_path;
  // Take groups from an eval manifest instead of sampling.
  std::optional<std::filesystem::path> manifest;
  // Stop after dispatching this many new requests (0 = no cap). The sweep is
  // then incomplete and a rerun resumes it.
  std::size_t max_new_requests = 0;

  // Throws kConfigError.
  void validate() const;
};

// JSON config file; relative paths resolve against the file's directory.
RunConfig load_run_config(const std::filesystem::path& path);

// Replaces make_backend, e.g. to inject instrumented backends in tests.
using BackendFactory = std::function<std::unique_ptr<Backend>(
    const BackendConfig&, std::shared_ptr<const ReferenceTable>)>;

struct SweepResult {
  std::vector<EvalReport> reports;  // backend order x ascending N
  std::size_t dispatched = 0;
  std::size_t skipped = 0;  // already archived
  std::size_t failed = 0;   // transport/auth errors, retried on rerun
  bool complete = true;
};

// Files under output_dir: run.json, archive.jsonl, report.csv, report.jsonl,
// plus a lock file while running.
SweepResult run_sweep(const RunConfig& config,
                      const BackendFactory& factory = {});

struct ArchiveRecord {
  std::string key;
  std::string backend;
  std::string model;
  int n = 0;
  std::string transcript_id;
  std::vector<std::string> question_ids;
  int m = 0;
  std::vector<ReferenceAnswer> references;
  std::string prompt_hash;
  std::optional<std::string> raw_text;  // nullopt when the request failed
  std::string error;
  int attempts = 0;
  long long latency_ms = 0;
  std::string request_id;
  std::string started_at;
  std::string finished_at;
};

// Reads archive.jsonl (or the given file). A torn final line is ignored;
// any other malformed line raises kCorruptArchive. When a key appears more
// than once, the last successful record wins.
std::vector<ArchiveRecord> load_archive(const std::filesystem::path& path);

// Recomputes reports from archived raw text, offline. Throws kEmptyInput for
// an archive with no scorable records.
std::vector<EvalReport> rescore(const std::filesystem::path& archive_path,
                                ParseMode parse_mode = ParseMode::kStrict,
                                AccuracyMode accuracy_mode =
                                    AccuracyMode::kExcludeDecodeFailures);

// Columns: model,N,judgment_accuracy,navigation_f1,navigation_mae,
// json_decode_error_rate,scored_questions,decode_failures,unanswered,
// nav_pairs_used
std::string report_csv(std::span<const EvalReport> reports);
std::string report_jsonl(std::span<const EvalReport> reports);

}  // namespace batchqa
