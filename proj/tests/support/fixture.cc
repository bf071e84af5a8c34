#include "fixture.h"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace batchqa::testing {

Corpus make_fixture_corpus(const FixtureSpec& spec) {
  // Deliberately std::mt19937_64, not the library generator.
  std::mt19937_64 gen(spec.seed);
  Corpus corpus;
  for (int q = 0; q < spec.questions_per_transcript; ++q) {
    char id[16];
    std::snprintf(id, sizeof id, "q%03d", q);
    corpus.add_question({id, "Synthetic yes/no question number " + std::to_string(q) + "?"});
  }
  std::uniform_int_distribution<int> m_dist(spec.min_m, spec.max_m);
  std::uniform_int_distribution<int> words(3, 25);
  std::bernoulli_distribution yes(spec.yes_probability);
  for (int t = 0; t < spec.transcripts; ++t) {
    char id[16];
    std::snprintf(id, sizeof id, "t%04d", t);
    Transcript transcript;
    transcript.id = id;
    const int m = m_dist(gen);
    for (int u = 1; u <= m; ++u) {
      Utterance utt;
      utt.index = u;
      if (spec.with_speakers) utt.speaker = (u % 2 == 1) ? Speaker::kAgent : Speaker::kCustomer;
      const int w = words(gen);
      for (int k = 0; k < w; ++k) utt.text += (k ? " w" : "w") + std::to_string(gen() % 1000);
      transcript.utterances.push_back(std::move(utt));
    }
    corpus.add_transcript(transcript);
    std::uniform_int_distribution<int> nav(1, m);
    for (int q = 0; q < spec.questions_per_transcript; ++q) {
      ReferenceAnswer ref;
      ref.transcript_id = id;
      ref.question_id = corpus.questions()[q].id;
      if (yes(gen)) {
        ref.judgment = Judgment::kYes;
        ref.navigation = NavLabel::index(nav(gen));
      } else {
        ref.judgment = Judgment::kNo;
        ref.navigation = NavLabel::na();
      }
      corpus.add_reference(ref);
    }
  }
  return corpus;
}

TempDir::TempDir(const std::string& prefix) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          (prefix + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace batchqa::testing
