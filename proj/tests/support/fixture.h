#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "batchqa/corpus.h"

namespace batchqa::testing {

struct FixtureSpec {
  int transcripts = 20;
  int min_m = 4;
  int max_m = 60;
  int questions_per_transcript = 50;
  double yes_probability = 0.5;
  std::uint64_t seed = 1;
  bool with_speakers = true;
};

// Synthetic corpus: transcript ids "t0000".., question ids "q000"..; every
// transcript references the first questions_per_transcript questions. Yes
// answers cite a uniform utterance, No answers use NA.
Corpus make_fixture_corpus(const FixtureSpec& spec);

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "batchqa");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace batchqa::testing
