// batchqa: batch conversational-QA harness.
//
//   batchqa stats --transcripts F
//   batchqa sweep --config run.json
//   batchqa rescore --archive DIR [--parse-mode strict|lenient] [--accuracy-mode exclude|wrong]
//   batchqa export-train --corpus DIR --n-max 10 --seed S --out F
//   batchqa export-eval --corpus DIR --n-list 10,20,30,40,50 --seed S --out F
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error,
// 3 corpus validation error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "batchqa/corpus.h"
#include "batchqa/dataset_builder.h"
#include "batchqa/error.h"
#include "batchqa/runner.h"
#include "batchqa/version.h"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCorpus = 3;

struct CorpusFlags {
  std::string dir;
  std::string transcripts;
  std::string questions;
  std::string references;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--corpus", dir,
                    "Directory with transcripts.jsonl, questions.jsonl, references.jsonl");
    cmd->add_option("--transcripts", transcripts, "Transcripts file (overrides --corpus)");
    cmd->add_option("--questions", questions, "Questions file (overrides --corpus)");
    cmd->add_option("--references", references, "References file (overrides --corpus)");
  }

  batchqa::CorpusPaths paths() const {
    batchqa::CorpusPaths p;
    if (!dir.empty()) p = batchqa::CorpusPaths::in_directory(dir);
    if (!transcripts.empty()) p.transcripts = transcripts;
    if (!questions.empty()) p.questions = questions;
    if (!references.empty()) p.references = references;
    if (p.transcripts.empty() || p.questions.empty() || p.references.empty()) {
      throw batchqa::Error(batchqa::ErrorCode::kConfigError,
                           "pass --corpus DIR or all of --transcripts/--questions/--references");
    }
    return p;
  }
};

void print_reports(const std::vector<batchqa::EvalReport>& reports) {
  std::cout << batchqa::report_csv(reports);
}

int run_stats(const std::string& transcripts_path) {
  const auto transcripts = batchqa::load_transcripts(transcripts_path);
  const auto stats = batchqa::compute_token_stats(transcripts);
  std::cout << "transcripts: " << stats.token_counts.size() << "\n"
            << "tokenizer: whitespace\n"
            << "percentile,tokens\n";
  for (const auto& [p, tokens] : stats.percentiles) std::cout << p << "," << tokens << "\n";
  return 0;
}

std::vector<int> parse_n_list(const std::string& text) {
  std::vector<int> sizes;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) {
      try {
        std::size_t used = 0;
        const int n = std::stoi(item, &used);
        if (used != item.size() || n < 1) throw std::invalid_argument(item);
        sizes.push_back(n);
      } catch (const std::exception&) {
        throw batchqa::Error(batchqa::ErrorCode::kConfigError, "bad group size '" + item + "'");
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return sizes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch conversational-QA harness"};
  app.set_version_flag("--version", std::string(batchqa::tool_version()));
  app.require_subcommand(1);

  std::string transcripts_path;
  auto* stats = app.add_subcommand("stats", "Token-count percentiles over transcripts");
  stats->add_option("--transcripts", transcripts_path, "Transcripts file")->required();

  std::string config_path;
  auto* sweep = app.add_subcommand("sweep", "Run a group-size sweep across backends");
  sweep->add_option("--config", config_path, "Run configuration (JSON)")->required();

  std::string archive_path;
  std::string parse_mode = "strict";
  std::string accuracy_mode = "exclude";
  std::string rescore_out;
  auto* rescore = app.add_subcommand("rescore", "Recompute reports from an archive, offline");
  rescore->add_option("--archive", archive_path, "Sweep output directory or archive file")->required();
  rescore->add_option("--parse-mode", parse_mode)->check(CLI::IsMember({"strict", "lenient"}));
  rescore->add_option("--accuracy-mode", accuracy_mode)->check(CLI::IsMember({"exclude", "wrong"}));
  rescore->add_option("--out", rescore_out, "Write the CSV report here instead of stdout");

  CorpusFlags train_corpus;
  batchqa::SamplerConfig sampler;
  std::string train_out;
  bool include_speaker = false;
  auto* export_train = app.add_subcommand("export-train", "Write a fine-tuning prompt/completion file");
  train_corpus.add_to(export_train);
  export_train->add_option("--n-max", sampler.n_max, "Largest group size K")->required();
  export_train->add_option("--k-min", sampler.k_min, "Smallest group size K")->capture_default_str();
  export_train->add_option("--seed", sampler.seed, "Sampling seed")->required();
  export_train->add_option("--out", train_out, "Output file (JSONL)")->required();
  export_train->add_flag("--include-speaker", include_speaker, "Prefix utterances with the speaker");

  CorpusFlags eval_corpus;
  std::string n_list_text;
  std::uint64_t eval_seed = 0;
  std::string eval_out;
  auto* export_eval = app.add_subcommand("export-eval", "Write an evaluation manifest");
  eval_corpus.add_to(export_eval);
  export_eval->add_option("--n-list", n_list_text, "Comma-separated group sizes")->required();
  export_eval->add_option("--seed", eval_seed, "Sampling seed")->required();
  export_eval->add_option("--out", eval_out, "Output file (JSONL)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (stats->parsed()) return run_stats(transcripts_path);

    if (sweep->parsed()) {
      const auto config = batchqa::load_run_config(config_path);
      const auto result = batchqa::run_sweep(config);
      print_reports(result.reports);
      std::cerr << "dispatched " << result.dispatched << ", resumed " << result.skipped
                << ", failed " << result.failed << "\n";
      if (!result.complete) std::cerr << "sweep incomplete; rerun to resume\n";
      return 0;
    }

    if (rescore->parsed()) {
      const auto reports = batchqa::rescore(archive_path, *batchqa::parse_mode_from_string(parse_mode),
                                            *batchqa::accuracy_mode_from_string(accuracy_mode));
      if (rescore_out.empty()) {
        print_reports(reports);
      } else {
        std::ofstream out(rescore_out, std::ios::binary | std::ios::trunc);
        out << batchqa::report_csv(reports);
        if (!out) throw batchqa::Error(batchqa::ErrorCode::kIoError, "cannot write " + rescore_out);
      }
      return 0;
    }

    if (export_train->parsed()) {
      const auto corpus = batchqa::load_corpus(train_corpus.paths());
      batchqa::RenderOptions render;
      render.include_speaker = include_speaker;
      const auto manifest = batchqa::export_training_set(corpus, sampler, train_out, render);
      std::cout << batchqa::to_json(manifest) << "\n";
      return 0;
    }

    if (export_eval->parsed()) {
      const auto corpus = batchqa::load_corpus(eval_corpus.paths());
      const auto sizes = parse_n_list(n_list_text);
      const auto manifest = batchqa::export_eval_manifest(corpus, sizes, eval_seed, eval_out);
      for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "entries " << manifest.entries.size() << ", question entries "
                << manifest.question_entries() << "\n";
      return 0;
    }
  } catch (const batchqa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == batchqa::ErrorCode::kConfigError) return kExitConfig;
    if (batchqa::is_corpus_error(e.code())) return kExitCorpus;
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
