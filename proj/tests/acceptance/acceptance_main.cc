// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "batchqa/corpus.h"
#include "batchqa/dataset_builder.h"
#include "batchqa/error.h"
#include "batchqa/grouping.h"
#include "batchqa/llm_backend.h"
#include "batchqa/metrics.h"
#include "batchqa/parser.h"
#include "batchqa/prompt.h"
#include "batchqa/runner.h"
#include "support/fixture.h"
#include "support/metric_oracle.h"

namespace {

using namespace batchqa;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double value) {
  char buf[96];
  std::snprintf(buf, sizeof buf, pattern, value);
  return buf;
}

testing::FixtureSpec standard_fixture() {
  return {.transcripts = 20, .min_m = 4, .max_m = 60, .questions_per_transcript = 50, .seed = 1};
}

RunConfig sweep_config(const testing::TempDir& dir, const testing::FixtureSpec& spec,
                       std::vector<BackendConfig> backends, std::vector<int> n_list,
                       const std::string& out) {
  RunConfig config;
  config.corpus = CorpusPaths::in_directory(dir / "corpus");
  if (!fs::exists(config.corpus.transcripts)) {
    fs::create_directories(dir / "corpus");
    write_corpus(testing::make_fixture_corpus(spec), config.corpus);
  }
  config.backends = std::move(backends);
  config.n_list = std::move(n_list);
  config.seed = 2024;
  config.output_dir = dir / out;
  return config;
}

Check oracle_closure() {
  Check c;
  const auto start = Clock::now();
  testing::TempDir dir("acc-oracle");
  BackendConfig oracle;
  oracle.name = "oracle";
  oracle.kind = BackendKind::kMockOracle;
  const auto result = run_sweep(sweep_config(dir, standard_fixture(), {oracle}, {10, 20, 50}, "out"));
  const double elapsed = seconds_since(start);
  c.require(result.reports.size() == 3, "expected 3 reports");
  for (const auto& r : result.reports) {
    c.require(r.judgment_accuracy == 1.0, "accuracy != 1 at N=" + std::to_string(r.n));
    c.require(r.navigation_f1 == 1.0, "F1 != 1 at N=" + std::to_string(r.n));
    c.require(r.navigation_mae == 0.0, "MAE != 0 at N=" + std::to_string(r.n));
    c.require(r.json_decode_error_rate == 0.0, "decode rate != 0 at N=" + std::to_string(r.n));
    c.require(r.counts.scored_questions == 20 * r.n, "wrong question count");
  }
  c.require(elapsed < 10.0, fmt("runtime %.2fs >= 10s", elapsed));
  if (c.ok) c.detail = "3 reports exact, " + fmt("%.2fs", elapsed);
  return c;
}

Check metric_brute_force() {
  Check c;
  std::mt19937_64 gen(31337);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 50);
    std::vector<JudgmentPair> judgments;
    std::vector<NavigationPair> navigations;
    std::vector<testing::OraclePair> judgment_oracle;
    std::vector<testing::OraclePair> nav_oracle;
    for (int i = 0; i < n; ++i) {
      const bool ref_na = u(gen) < 0.2;
      const NavLabel ref = ref_na ? NavLabel::na() : NavLabel::index(1 + static_cast<int>(gen() % 20));
      NavLabel pred = NavLabel::unanswered();
      if (u(gen) >= 0.1) {
        pred = u(gen) < 0.2 ? NavLabel::na() : NavLabel::index(1 + static_cast<int>(gen() % 20));
      }
      navigations.push_back({ref, pred});
      auto label = [](const NavLabel& l) { return l.is_unanswered() ? std::string("?") : l.to_string(); };
      nav_oracle.push_back({label(ref), label(pred)});

      const Judgment ref_j = ref_na ? Judgment::kNo : Judgment::kYes;
      std::optional<Judgment> pred_j;
      if (!pred.is_unanswered()) pred_j = u(gen) < 0.5 ? Judgment::kYes : Judgment::kNo;
      judgments.push_back({ref_j, pred_j});
      judgment_oracle.push_back({ref_j == Judgment::kYes ? "Y" : "N",
                                 !pred_j ? "?" : (*pred_j == Judgment::kYes ? "Y" : "N")});
    }
    const double da = std::abs(judgment_accuracy(judgments) - testing::oracle_accuracy(judgment_oracle));
    const double df = std::abs(navigation_f1(navigations) - testing::oracle_macro_f1(nav_oracle));
    int used = 0;
    const double mae = testing::oracle_mae(nav_oracle, &used);
    const auto got = navigation_mae(navigations);
    const double dm = std::abs(got.mae - mae);
    worst = std::max({worst, da, df, dm});
    c.require(got.pairs_used == used, "pairs_used mismatch in trial " + std::to_string(trial));
  }
  c.require(worst <= 1e-9, fmt("max deviation %.3g > 1e-9", worst));
  if (c.ok) c.detail = "1000 sets, " + fmt("max deviation %.3g", worst);
  return c;
}

Check mae_spot_values() {
  Check c;
  const auto idx = NavLabel::index;
  const std::vector<NavigationPair> same = {{idx(3), idx(3)}, {idx(7), idx(7)}};
  const std::vector<NavigationPair> off = {{idx(3), idx(5)}, {idx(7), idx(7)}};
  const std::vector<NavigationPair> na = {{idx(4), idx(6)}, {NavLabel::na(), idx(2)}};
  c.require(navigation_mae(same).mae == 0.0, "identity != 0");
  c.require(navigation_mae(off).mae == 1.0, "[3,7] vs [5,7] != 1");
  c.require(navigation_mae(na).mae == 2.0 && navigation_mae(na).pairs_used == 1, "NA exclusion case wrong");
  if (c.ok) c.detail = "0.0, 1.0, (2.0, 1)";
  return c;
}

// Smallest k with P[X <= k] >= q for X ~ Binomial(n, p).
int binomial_quantile(int n, double p, double q) {
  double cdf = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double log_pmf = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                           k * std::log(p) + (n - k) * std::log1p(-p);
    cdf += std::exp(log_pmf);
    if (cdf >= q) return k;
  }
  return n;
}

Check decode_rate_calibration() {
  Check c;
  const auto start = Clock::now();
  const int responses = 2000;
  const Corpus corpus = testing::make_fixture_corpus(
      {.transcripts = responses, .min_m = 4, .max_m = 12, .questions_per_transcript = 10, .seed = 3});
  auto table = std::make_shared<const ReferenceTable>(ReferenceTable::from_corpus(corpus));
  const auto groups = make_eval_groups(corpus, 10, 99);
  std::vector<RenderedPrompt> prompts;
  for (std::size_t t = 0; t < groups.size(); ++t) prompts.push_back(render_prompt(corpus.transcripts()[t], groups[t]));
  std::ostringstream summary;
  for (double p : {0.1, 0.25, 0.5}) {
    MockCorruptorBackend backend(table, p, CorruptMode::kTruncate, 7);
    const auto items = complete_batch(backend, prompts, 4);
    std::vector<ParseOutcome> outcomes;
    for (std::size_t i = 0; i < items.size(); ++i) {
      outcomes.push_back(parse_response(items[i].completion->raw_text, prompts[i].n));
    }
    const double rate = decode_error_rate(outcomes);
    const int failures = static_cast<int>(std::lround(rate * responses));
    const int lo = binomial_quantile(responses, p, 0.005);
    const int hi = binomial_quantile(responses, p, 0.995);
    c.require(failures >= lo && failures <= hi,
              fmt("p=%.2f: ", p) + std::to_string(failures) + " outside [" + std::to_string(lo) + ", " +
                  std::to_string(hi) + "]");
    summary << fmt("p=%.2f", p) << " rate " << fmt("%.4f", rate) << " in [" << lo << "," << hi << "]/2000; ";
  }
  const double elapsed = seconds_since(start);
  c.require(elapsed < 30.0, fmt("runtime %.2fs >= 30s", elapsed));
  if (c.ok) c.detail = summary.str() + fmt("%.2fs", elapsed);
  return c;
}

Check parser_totality() {
  Check c;
  std::mt19937_64 gen(4242);
  std::vector<std::string> seeds;
  {
    std::mt19937 g(1);
    for (int s = 0; s < 64; ++s) {
      const int n = 1 + static_cast<int>(g() % 12);
      std::vector<CanonicalAnswer> answers(n);
      for (auto& a : answers) {
        if (g() % 2) a = {Judgment::kYes, g() % 2 ? "see utterance" : "", NavLabel::index(1 + static_cast<int>(g() % 40))};
      }
      std::string text = serialize_canonical(answers);
      if (s % 3 == 0) text = "Here you go:\n```json\n" + text + "\n```";
      seeds.push_back(text);
    }
  }
  const std::string alphabet = "{}[]\":,QYesNoNA0123456789 \n'\\";
  int cases = 0;
  int crashes = 0;
  int decode_errors = 0;
  for (int i = 0; i < 100000; ++i) {
    std::string input;
    if (i % 2 == 0) {
      input.resize(gen() % 96);
      for (auto& ch : input) ch = static_cast<char>(gen() & 0xFF);
    } else {
      input = seeds[gen() % seeds.size()];
      const int edits = 1 + static_cast<int>(gen() % 6);
      for (int e = 0; e < edits && !input.empty(); ++e) {
        const std::size_t pos = gen() % input.size();
        switch (gen() % 4) {
          case 0: input.erase(pos, 1 + gen() % 4); break;
          case 1: input.insert(pos, 1, alphabet[gen() % alphabet.size()]); break;
          case 2: input[pos] = static_cast<char>(gen() & 0xFF); break;
          default: input = input.substr(0, pos); break;
        }
      }
    }
    const int n = 1 + static_cast<int>(gen() % 12);
    const ParseMode mode = (i % 5 == 0) ? ParseMode::kLenient : ParseMode::kStrict;
    ++cases;
    try {
      const ParseOutcome o = parse_response(input, n, mode);
      const bool decode = o.status == ParseStatus::kDecodeError;
      decode_errors += decode;
      c.require(decode == o.error_class.has_value(), "status/error_class disagree on case " + std::to_string(i));
      if (decode) c.require(o.answers.empty(), "DecodeError with answers on case " + std::to_string(i));
      for (const auto& [pos, a] : o.answers) {
        c.require(pos >= 1 && pos <= n, "answer position out of range on case " + std::to_string(i));
        c.require(!a.navigation.is_index() || a.navigation.value() >= 1, "navigation < 1");
      }
    } catch (...) {
      ++crashes;
    }
  }
  c.require(crashes == 0, std::to_string(crashes) + " exceptions escaped");
  if (c.ok) {
    c.detail = std::to_string(cases) + " cases, 0 crashes, " + std::to_string(decode_errors) + " decode errors";
  }
  return c;
}

Check template_conformance() {
  Check c;
  const char* example = R"({
    "Q1": ["Yes, the agent verified customer's information at the start of the call", "5"],
    "Q2": ["No, the agent did not send a copy to the customer.", "NA"]
})";
  const auto o = parse_response(example, 2);
  c.require(o.ok(), "example did not decode");
  c.require(o.anomalies.empty(), "example has anomalies");
  c.require(o.answers.size() == 2, "example answer count");
  if (c.ok) {
    c.require(o.answers.at(1).judgment == Judgment::kYes && o.answers.at(1).navigation == NavLabel::index(5),
              "Q1 != (Yes, 5)");
    c.require(o.answers.at(2).judgment == Judgment::kNo && o.answers.at(2).navigation == NavLabel::na(),
              "Q2 != (No, NA)");
  }
  const Transcript transcript{"t1",
                              {{1, Speaker::kAgent, "Hello, how can I help?"},
                               {2, Speaker::kCustomer, "I want to cancel my order."}}};
  const QuestionGroup group{"t1", {{"q1", "Did the agent greet the customer?"}}};
  const std::string golden = testing::read_file(BATCHQA_TEST_GOLDEN "/prompt_m2_n1.txt");
  c.require(render_prompt(transcript, group).text == golden, "rendered prompt differs from golden file");
  if (c.ok) c.detail = "Q1=(Yes,5) Q2=(No,NA), golden " + std::to_string(golden.size()) + " bytes identical";
  return c;
}

Check sampler_distribution() {
  Check c;
  const int draws = 10000;
  const Corpus corpus = testing::make_fixture_corpus(
      {.transcripts = draws, .min_m = 4, .max_m = 4, .questions_per_transcript = 10, .seed = 5});
  const auto groups = make_training_groups(corpus, {.seed = 77, .k_min = 5, .n_max = 10});
  std::vector<int> counts(11, 0);
  for (const auto& g : groups) {
    c.require(g.n() >= 5 && g.n() <= 10, "K outside [5, 10]");
    if (g.n() >= 5 && g.n() <= 10) ++counts[g.n()];
  }
  const double expected = draws / 6.0;
  double chi2 = 0.0;
  std::ostringstream freq;
  for (int k = 5; k <= 10; ++k) {
    const double f = counts[k] / static_cast<double>(draws);
    c.require(std::abs(f - 1.0 / 6.0) <= 0.02, fmt("K=%.0f frequency off", k));
    chi2 += (counts[k] - expected) * (counts[k] - expected) / expected;
    freq << k << ":" << fmt("%.4f", f) << " ";
  }
  // 0.999 quantile of chi-square with 5 degrees of freedom.
  constexpr double kCritical = 20.515;
  c.require(chi2 < kCritical, fmt("chi-square %.3f >= 20.515", chi2));
  if (c.ok) c.detail = freq.str() + fmt("chi2=%.3f", chi2);
  return c;
}

Check dataset_arithmetic() {
  Check c;
  testing::TempDir dir("acc-dataset");
  const Corpus corpus = testing::make_fixture_corpus(
      {.transcripts = 300, .min_m = 4, .max_m = 60, .questions_per_transcript = 50, .seed = 8});
  const std::vector<int> sizes = {10};
  const auto manifest = export_eval_manifest(corpus, sizes, 1, dir / "eval.jsonl");
  const auto loaded = load_eval_manifest(dir / "eval.jsonl");
  c.require(manifest.question_entries() == 3000, "manifest has " + std::to_string(manifest.question_entries()));
  c.require(loaded.question_entries() == 3000, "reloaded manifest count differs");

  const auto train = export_training_set(corpus, {.seed = 1, .k_min = 5, .n_max = 10}, dir / "train.jsonl");
  std::istringstream lines(testing::read_file(dir / "train.jsonl"));
  std::size_t records = 0;
  for (std::string line; std::getline(lines, line);) {
    ++records;
    const auto doc = nlohmann::json::parse(line);
    const std::string completion = doc.at("completion").get<std::string>();
    const std::string prompt = doc.at("prompt").get<std::string>();
    int k = 0;
    while (prompt.find("\nQuestion " + std::to_string(k + 1) + ": ") != std::string::npos) ++k;
    const auto o = parse_response(completion, k);
    c.require(o.ok() && o.anomalies.empty() && static_cast<int>(o.answers.size()) == k,
              "completion " + std::to_string(records) + " does not round-trip");
  }
  c.require(records == train.records && records == 300, "training record count");
  if (c.ok) c.detail = "3000 question entries; 300 completions round-trip with 0 anomalies";
  return c;
}

Check determinism_and_resume() {
  Check c;
  testing::TempDir dir("acc-resume");
  BackendConfig oracle;
  oracle.name = "oracle";
  BackendConfig corruptor;
  corruptor.name = "corruptor";
  corruptor.kind = BackendKind::kMockCorruptor;
  corruptor.corrupt_probability = 0.3;
  corruptor.corrupt_mode = CorruptMode::kQuoteMismatch;
  corruptor.seed = 11;
  const std::vector<BackendConfig> backends = {oracle, corruptor};
  const std::vector<int> sizes = {10, 20, 50};

  auto read_csv = [&](const std::string& out) { return testing::read_file(dir / out / "report.csv"); };
  run_sweep(sweep_config(dir, standard_fixture(), backends, sizes, "a"));
  run_sweep(sweep_config(dir, standard_fixture(), backends, sizes, "b"));
  c.require(read_csv("a") == read_csv("b"), "repeat sweep CSV differs");

  auto interrupted = sweep_config(dir, standard_fixture(), backends, sizes, "c");
  interrupted.max_new_requests = 50;
  const auto first = run_sweep(interrupted);
  c.require(!first.complete, "budgeted sweep should be incomplete");
  // Simulate a crash mid-write: tear the last archive line in half.
  const fs::path archive = dir / "c" / "archive.jsonl";
  std::string content = testing::read_file(archive);
  const auto last_start = content.rfind('\n', content.size() - 2) + 1;
  testing::write_file(archive, content.substr(0, last_start + (content.size() - last_start) / 2));
  interrupted.max_new_requests = 0;
  const auto resumed = run_sweep(interrupted);
  c.require(resumed.complete, "resumed sweep incomplete");
  c.require(resumed.skipped == 49, "expected 49 resumed items, got " + std::to_string(resumed.skipped));
  c.require(read_csv("c") == read_csv("a"), "resumed CSV differs from uninterrupted");
  c.require(report_csv(rescore(dir / "c")) == read_csv("a"), "rescore differs from sweep");
  if (c.ok) c.detail = "byte-identical CSV across repeat, resume (49 skipped) and rescore";
  return c;
}

Check percentile_oracle() {
  Check c;
  std::vector<std::size_t> counts(100);
  std::iota(counts.begin(), counts.end(), 1);
  std::shuffle(counts.begin(), counts.end(), std::mt19937(6));
  std::vector<Transcript> transcripts;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    Transcript t;
    t.id = "t" + std::to_string(i);
    std::string text;
    for (std::size_t w = 0; w < counts[i]; ++w) text += "w ";
    t.utterances.push_back({1, std::nullopt, text});
    transcripts.push_back(std::move(t));
  }
  const auto stats = compute_token_stats(transcripts);
  auto sorted = counts;
  std::sort(sorted.begin(), sorted.end());
  const std::vector<std::pair<int, std::size_t>> expected = {{25, 25}, {50, 50}, {75, 75}, {95, 95}};
  for (const auto& [p, value] : expected) {
    const std::size_t oracle = sorted[static_cast<std::size_t>(std::ceil(p / 100.0 * sorted.size())) - 1];
    c.require(stats.percentiles.at(p) == value && oracle == value, "p" + std::to_string(p) + " mismatch");
  }
  if (c.ok) c.detail = "p25=25 p50=50 p75=75 p95=95";
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"1 oracle closure", oracle_closure},
      {"2 metric brute-force equivalence", metric_brute_force},
      {"3 MAE spot values", mae_spot_values},
      {"4 decode-rate calibration", decode_rate_calibration},
      {"5 parser totality", parser_totality},
      {"6 template and example conformance", template_conformance},
      {"7 sampler distribution", sampler_distribution},
      {"8 dataset arithmetic", dataset_arithmetic},
      {"9 determinism and resume", determinism_and_resume},
      {"10 percentile oracle", percentile_oracle},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Check result;
    try {
      result = run();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    failures += !result.ok;
    std::cout << (result.ok ? "PASS " : "FAIL ") << name << ": " << result.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
