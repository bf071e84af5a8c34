#include "batchqa/runner.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "batchqa/dataset_builder.h"
#include "batchqa/error.h"
#include "batchqa/grouping.h"
#include "batchqa/rng.h"
#include "batchqa/version.h"

namespace batchqa {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kArchiveFile = "archive.jsonl";
constexpr const char* kRunFile = "run.json";
constexpr const char* kLockFile = ".batchqa.lock";

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::kConfigError, what);
}

std::string dump(const ordered_json& value) {
  return value.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      now.time_since_epoch()) % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03lldZ", buf, static_cast<long long>(ms.count()));
  return out;
}

// Resume key: content hash of what was sent and to whom.
std::string archive_key(const RenderedPrompt& prompt, const BackendConfig& backend, int n) {
  std::string material = prompt.text;
  for (const std::string* part : {&backend.label(), &backend.model_name, &prompt.transcript_id}) {
    material.push_back('\0');
    material += *part;
  }
  material.push_back('\0');
  material += std::to_string(n);
  return hex64(fnv1a64(material));
}

class LockFile {
 public:
  explicit LockFile(fs::path path) : path_(std::move(path)) {
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (f == nullptr) {
      config_error("output directory is locked by another sweep (remove " +
                   path_.string() + " if stale)");
    }
    std::fclose(f);
  }
  ~LockFile() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

 private:
  fs::path path_;
};

ordered_json navigation_json(const NavLabel& nav) {
  return nav.is_index() ? ordered_json(nav.value()) : ordered_json("NA");
}

ordered_json outcome_json(const ParseOutcome& outcome) {
  ordered_json doc;
  doc["status"] = std::string(to_string(outcome.status));
  doc["error_class"] = outcome.error_class
                           ? ordered_json(std::string(to_string(*outcome.error_class)))
                           : ordered_json(nullptr);
  ordered_json anomalies = ordered_json::array();
  for (const auto& a : outcome.anomalies) {
    ordered_json item;
    item["kind"] = std::string(to_string(a.kind));
    if (a.kind == AnomalyKind::kExtraKey) {
      item["key"] = a.key;
    } else {
      item["position"] = a.position;
    }
    anomalies.push_back(std::move(item));
  }
  doc["anomalies"] = std::move(anomalies);
  doc["answered"] = outcome.answers.size();
  return doc;
}

ordered_json record_json(const ArchiveRecord& r, const ParseOutcome* outcome) {
  ordered_json doc;
  doc["key"] = r.key;
  doc["backend"] = r.backend;
  doc["model"] = r.model;
  doc["N"] = r.n;
  doc["transcript_id"] = r.transcript_id;
  doc["question_ids"] = r.question_ids;
  doc["M"] = r.m;
  ordered_json refs = ordered_json::array();
  for (const auto& ref : r.references) {
    refs.push_back({{"judgment", std::string(to_string(ref.judgment))},
                    {"navigation", navigation_json(ref.navigation)}});
  }
  doc["references"] = std::move(refs);
  doc["prompt_hash"] = r.prompt_hash;
  doc["raw_text"] = r.raw_text ? ordered_json(*r.raw_text) : ordered_json(nullptr);
  doc["error"] = r.error.empty() ? ordered_json(nullptr) : ordered_json(r.error);
  doc["attempts"] = r.attempts;
  doc["latency_ms"] = r.latency_ms;
  doc["request_id"] = r.request_id;
  doc["started_at"] = r.started_at;
  doc["finished_at"] = r.finished_at;
  doc["parse"] = outcome != nullptr ? outcome_json(*outcome) : ordered_json(nullptr);
  return doc;
}

ArchiveRecord record_from_json(const json& doc) {
  ArchiveRecord r;
  r.key = doc.at("key").get<std::string>();
  r.backend = doc.at("backend").get<std::string>();
  r.model = doc.value("model", "");
  r.n = doc.at("N").get<int>();
  r.transcript_id = doc.at("transcript_id").get<std::string>();
  r.question_ids = doc.at("question_ids").get<std::vector<std::string>>();
  r.m = doc.at("M").get<int>();
  const auto& refs = doc.at("references");
  if (!refs.is_array() || refs.size() != r.question_ids.size() ||
      static_cast<int>(r.question_ids.size()) != r.n || r.n < 1 || r.m < 1) {
    throw std::runtime_error("inconsistent group fields");
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    ReferenceAnswer ref;
    ref.transcript_id = r.transcript_id;
    ref.question_id = r.question_ids[i];
    auto judgment = judgment_from_string(refs[i].at("judgment").get<std::string>());
    if (!judgment) throw std::runtime_error("bad judgment");
    ref.judgment = *judgment;
    const auto& nav = refs[i].at("navigation");
    if (nav.is_number_integer()) {
      ref.navigation = NavLabel::index(nav.get<int>());
    } else if (nav.is_string() && nav.get<std::string>() == "NA") {
      ref.navigation = NavLabel::na();
    } else {
      throw std::runtime_error("bad navigation");
    }
    r.references.push_back(std::move(ref));
  }
  r.prompt_hash = doc.value("prompt_hash", "");
  if (const auto& raw = doc.at("raw_text"); raw.is_string()) r.raw_text = raw.get<std::string>();
  if (const auto it = doc.find("error"); it != doc.end() && it->is_string()) r.error = it->get<std::string>();
  r.attempts = doc.value("attempts", 0);
  r.latency_ms = doc.value("latency_ms", 0LL);
  r.request_id = doc.value("request_id", "");
  r.started_at = doc.value("started_at", "");
  r.finished_at = doc.value("finished_at", "");
  return r;
}

// Drops a torn final line left by an interrupted write.
void trim_torn_tail(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec) || fs::file_size(path, ec) == 0) return;
  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  if (content.back() == '\n') return;
  const auto last_newline = content.rfind('\n');
  fs::resize_file(path, last_newline == std::string::npos ? 0 : last_newline + 1);
}

ReferenceTable references_from_records(std::span<const ArchiveRecord> records) {
  ReferenceTable table;
  for (const auto& r : records) {
    table.set_utterance_count(r.transcript_id, r.m);
    for (const auto& ref : r.references) table.add(ref);
  }
  return table;
}

ScoredUnit unit_from_record(const ArchiveRecord& r, ParseMode mode) {
  return ScoredUnit{r.transcript_id, r.question_ids, parse_response(*r.raw_text, r.n, mode)};
}

std::string format_metric(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  return p.is_absolute() ? p : base / p;
}

BackendConfig backend_from_json(const json& doc) {
  static const std::set<std::string> kKnown = {
      "name", "kind", "endpoint", "model", "credentials_env", "timeout_s",
      "max_retries", "initial_backoff_ms", "max_backoff_ms", "max_parallel",
      "temperature", "corrupt_probability", "corrupt_mode", "seed"};
  if (!doc.is_object()) config_error("backend entry must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (!kKnown.contains(key)) config_error("unknown backend field '" + key + "'");
  }
  BackendConfig b;
  b.name = doc.value("name", "");
  const auto kind = backend_kind_from_string(doc.value("kind", "mock_oracle"));
  if (!kind) config_error("unknown backend kind '" + doc.value("kind", "") + "'");
  b.kind = *kind;
  b.endpoint = doc.value("endpoint", "");
  b.model_name = doc.value("model", b.kind == BackendKind::kHttpChat ? "" : "mock");
  if (b.model_name.empty()) config_error("backend '" + b.name + "' needs a model");
  b.credentials_env = doc.value("credentials_env", "");
  b.timeout_seconds = doc.value("timeout_s", b.timeout_seconds);
  b.retry.max_retries = doc.value("max_retries", b.retry.max_retries);
  b.retry.initial_backoff =
      std::chrono::milliseconds(doc.value("initial_backoff_ms", b.retry.initial_backoff.count()));
  b.retry.max_backoff =
      std::chrono::milliseconds(doc.value("max_backoff_ms", b.retry.max_backoff.count()));
  b.max_parallel = doc.value("max_parallel", b.max_parallel);
  b.temperature = doc.value("temperature", b.temperature);
  b.corrupt_probability = doc.value("corrupt_probability", b.corrupt_probability);
  if (doc.contains("corrupt_mode")) {
    const auto mode = corrupt_mode_from_string(doc.at("corrupt_mode").get<std::string>());
    if (!mode) config_error("unknown corrupt_mode");
    b.corrupt_mode = *mode;
  }
  b.seed = doc.value("seed", b.seed);
  return b;
}

ordered_json run_snapshot(const RunConfig& config, const std::string& template_version) {
  ordered_json doc;
  doc["tool_version"] = std::string(tool_version());
  doc["seed"] = config.seed;
  doc["n_list"] = config.n_list;
  doc["parse_mode"] = std::string(to_string(config.parse_mode));
  doc["accuracy_mode"] = std::string(to_string(config.accuracy_mode));
  doc["template"] = template_version;
  doc["include_speaker"] = config.include_speaker;
  doc["transcripts"] = config.corpus.transcripts.string();
  doc["questions"] = config.corpus.questions.string();
  doc["references"] = config.corpus.references.string();
  if (config.manifest) doc["manifest"] = config.manifest->string();
  ordered_json backends = ordered_json::array();
  for (const auto& b : config.backends) {
    ordered_json item;
    item["name"] = b.label();
    item["kind"] = std::string(to_string(b.kind));
    item["model"] = b.model_name;
    if (b.kind == BackendKind::kHttpChat) {
      item["endpoint"] = b.endpoint;
      item["credentials_env"] = b.credentials_env;
      item["temperature"] = b.temperature;
    }
    if (b.kind == BackendKind::kMockCorruptor) {
      item["corrupt_probability"] = b.corrupt_probability;
      item["corrupt_mode"] = std::string(to_string(b.corrupt_mode));
      item["seed"] = b.seed;
    }
    backends.push_back(std::move(item));
  }
  doc["backends"] = std::move(backends);
  return doc;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text) || !out.flush()) {
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  }
}

}  // namespace

void RunConfig::validate() const {
  if (backends.empty()) config_error("at least one backend is required");
  if (n_list.empty()) config_error("n_list must not be empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1) config_error("group sizes must be >= 1");
    if (i > 0 && n_list[i] <= n_list[i - 1]) config_error("n_list must be strictly ascending");
  }
  if (output_dir.empty()) config_error("output_dir is required");
  std::set<std::string> labels;
  for (const auto& b : backends) {
    b.validate();
    if (!labels.insert(b.label()).second) config_error("duplicate backend name '" + b.label() + "'");
  }
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot open config " + path.string());
  json doc = json::parse(in, nullptr, false, /*ignore_comments=*/true);
  if (!doc.is_object()) config_error("config " + path.string() + " is not a JSON object");
  static const std::set<std::string> kKnown = {
      "corpus_dir", "transcripts", "questions", "references", "backends", "n_list",
      "seed", "output_dir", "parse_mode", "accuracy_mode", "include_speaker",
      "max_prompt_chars", "template", "manifest", "max_new_requests"};
  for (const auto& [key, value] : doc.items()) {
    if (!kKnown.contains(key)) config_error("unknown config field '" + key + "'");
  }
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  RunConfig config;
  try {
    if (doc.contains("corpus_dir")) {
      config.corpus = CorpusPaths::in_directory(resolve(base, doc.at("corpus_dir").get<std::string>()));
    }
    if (doc.contains("transcripts")) config.corpus.transcripts = resolve(base, doc.at("transcripts").get<std::string>());
    if (doc.contains("questions")) config.corpus.questions = resolve(base, doc.at("questions").get<std::string>());
    if (doc.contains("references")) config.corpus.references = resolve(base, doc.at("references").get<std::string>());
    if (config.corpus.transcripts.empty() || config.corpus.questions.empty() ||
        config.corpus.references.empty()) {
      config_error("config needs corpus_dir or transcripts/questions/references");
    }
    for (const auto& b : doc.at("backends")) config.backends.push_back(backend_from_json(b));
    config.n_list = doc.at("n_list").get<std::vector<int>>();
    config.seed = doc.value("seed", std::uint64_t{0});
    config.output_dir = resolve(base, doc.at("output_dir").get<std::string>());
    if (auto mode = parse_mode_from_string(doc.value("parse_mode", "strict"))) {
      config.parse_mode = *mode;
    } else {
      config_error("parse_mode must be strict or lenient");
    }
    if (auto mode = accuracy_mode_from_string(doc.value("accuracy_mode", "exclude"))) {
      config.accuracy_mode = *mode;
    } else {
      config_error("accuracy_mode must be exclude or wrong");
    }
    config.include_speaker = doc.value("include_speaker", false);
    config.max_prompt_chars = doc.value("max_prompt_chars", std::size_t{0});
    if (doc.contains("template")) config.template_path = resolve(base, doc.at("template").get<std::string>());
    if (doc.contains("manifest")) config.manifest = resolve(base, doc.at("manifest").get<std::string>());
    config.max_new_requests = doc.value("max_new_requests", std::size_t{0});
  } catch (const json::exception& e) {
    config_error(std::string("config ") + path.string() + ": " + e.what());
  }
  config.validate();
  return config;
}

SweepResult run_sweep(const RunConfig& config, const BackendFactory& factory) {
  config.validate();
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) config_error("cannot create output directory " + config.output_dir.string());
  LockFile lock(config.output_dir / kLockFile);

  const Corpus corpus = load_corpus(config.corpus);
  std::optional<PromptTemplate> custom_template;
  if (config.template_path) custom_template = PromptTemplate::from_file(*config.template_path);
  const PromptTemplate& tpl = custom_template ? *custom_template : PromptTemplate::builtin_v1();
  RenderOptions render;
  render.include_speaker = config.include_speaker;
  render.max_chars = config.max_prompt_chars;
  render.prompt_template = &tpl;

  std::optional<EvalManifest> manifest;
  if (config.manifest) {
    manifest = load_eval_manifest(*config.manifest);
    const auto sizes = manifest->group_sizes();
    for (int n : config.n_list) {
      if (!std::binary_search(sizes.begin(), sizes.end(), n)) {
        config_error("manifest has no groups for N=" + std::to_string(n));
      }
    }
  }

  write_text(config.output_dir / kRunFile, run_snapshot(config, tpl.version()).dump(2) + "\n");

  const fs::path archive_path = config.output_dir / kArchiveFile;
  trim_torn_tail(archive_path);
  std::unordered_map<std::string, ArchiveRecord> done;
  if (fs::exists(archive_path)) {
    for (auto& r : load_archive(archive_path)) {
      if (r.raw_text) done[r.key] = std::move(r);
    }
  }
  std::ofstream archive(archive_path, std::ios::binary | std::ios::app);
  if (!archive) throw Error(ErrorCode::kIoError, "cannot open " + archive_path.string());

  auto references = std::make_shared<const ReferenceTable>(ReferenceTable::from_corpus(corpus));
  SweepResult result;
  std::size_t budget_left = config.max_new_requests;

  struct Cell {
    const BackendConfig* backend;
    int n;
    std::vector<std::string> keys;
  };
  std::vector<Cell> cells;

  for (const auto& backend_config : config.backends) {
    std::unique_ptr<Backend> backend = factory ? factory(backend_config, references)
                                               : make_backend(backend_config, references);
    for (int n : config.n_list) {
      const auto groups = manifest ? manifest_groups(*manifest, corpus, n)
                                   : make_eval_groups(corpus, n, config.seed);
      Cell cell{&backend_config, n, {}};
      std::vector<RenderedPrompt> pending;
      std::vector<std::string> pending_keys;
      for (const auto& group : groups) {
        RenderedPrompt prompt = render_prompt(*corpus.find_transcript(group.transcript_id), group, render);
        std::string key = archive_key(prompt, backend_config, n);
        cell.keys.push_back(key);
        if (done.contains(key)) {
          ++result.skipped;
          continue;
        }
        pending.push_back(std::move(prompt));
        pending_keys.push_back(std::move(key));
      }
      cells.push_back(std::move(cell));

      if (config.max_new_requests > 0 && pending.size() > budget_left) {
        pending.resize(budget_left);
        result.complete = false;
      }
      if (pending.empty()) continue;
      budget_left -= config.max_new_requests > 0 ? pending.size() : 0;

      std::vector<std::string> started(pending.size(), utc_now());
      complete_batch(*backend, pending, backend_config.max_parallel,
                     [&](std::size_t i, const BatchItem& item) {
                       const RenderedPrompt& prompt = pending[i];
                       ArchiveRecord record;
                       record.key = pending_keys[i];
                       record.backend = backend_config.label();
                       record.model = backend_config.model_name;
                       record.n = n;
                       record.transcript_id = prompt.transcript_id;
                       record.question_ids = prompt.question_ids;
                       record.m = prompt.m;
                       for (const auto& qid : prompt.question_ids) {
                         record.references.push_back(*references->find(prompt.transcript_id, qid));
                       }
                       record.prompt_hash = hex64(fnv1a64(prompt.text));
                       record.attempts = item.attempts;
                       record.started_at = started[i];
                       record.finished_at = utc_now();
                       std::optional<ParseOutcome> outcome;
                       if (item.ok()) {
                         record.raw_text = item.completion->raw_text;
                         record.latency_ms = item.completion->latency.count();
                         record.request_id = item.completion->request_id;
                         outcome = parse_response(*record.raw_text, n, config.parse_mode);
                       } else {
                         record.error = std::string(to_string(*item.error_code)) + ": " + item.error_message;
                         ++result.failed;
                       }
                       ++result.dispatched;
                       archive << dump(record_json(record, outcome ? &*outcome : nullptr)) << '\n';
                       archive.flush();
                       if (!archive) throw Error(ErrorCode::kIoError, "archive write failed");
                       if (record.raw_text) done[record.key] = std::move(record);
                     });
    }
  }
  if (result.failed > 0) result.complete = false;

  for (const auto& cell : cells) {
    std::vector<ScoredUnit> units;
    for (const auto& key : cell.keys) {
      auto it = done.find(key);
      if (it == done.end()) continue;
      units.push_back(unit_from_record(it->second, config.parse_mode));
    }
    if (units.empty()) {
      std::cerr << "warning: no completed responses for " << cell.backend->label()
                << " N=" << cell.n << "; report skipped\n";
      continue;
    }
    result.reports.push_back(
        aggregate_report(cell.backend->label(), cell.n, units, *references, config.accuracy_mode));
  }

  write_text(config.output_dir / "report.csv", report_csv(result.reports));
  write_text(config.output_dir / "report.jsonl", report_jsonl(result.reports));
  return result;
}

std::vector<ArchiveRecord> load_archive(const fs::path& path) {
  const fs::path file = fs::is_directory(path) ? path / kArchiveFile : path;
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::kCorruptArchive, "cannot open archive " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(std::move(line));
  // A final line without its newline was torn by an interrupted write.
  in.clear();
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::streamoff>(in.tellg());
  bool torn_tail = false;
  if (size > 0) {
    in.seekg(size - 1);
    torn_tail = in.get() != '\n';
  }

  std::vector<ArchiveRecord> records;
  std::unordered_map<std::string, std::size_t> by_key;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t\r") == std::string::npos) continue;
    const bool last = i + 1 == lines.size();
    ArchiveRecord record;
    try {
      record = record_from_json(json::parse(lines[i]));
    } catch (const std::exception& e) {
      if (last && torn_tail) {
        std::cerr << "warning: ignoring torn final archive line\n";
        break;
      }
      throw Error(ErrorCode::kCorruptArchive,
                  file.string() + ":" + std::to_string(i + 1) + ": " + e.what());
    }
    auto it = by_key.find(record.key);
    if (it == by_key.end()) {
      by_key.emplace(record.key, records.size());
      records.push_back(std::move(record));
    } else if (record.raw_text || !records[it->second].raw_text) {
      records[it->second] = std::move(record);
    }
  }
  return records;
}

std::vector<EvalReport> rescore(const fs::path& archive_path, ParseMode parse_mode,
                                AccuracyMode accuracy_mode) {
  const auto records = load_archive(archive_path);

  // One unit per (backend, N, transcript); the last archived response wins.
  std::map<std::tuple<std::string, int, std::string>, const ArchiveRecord*> latest;
  for (const auto& r : records) {
    if (r.raw_text) latest[{r.backend, r.n, r.transcript_id}] = &r;
  }
  if (latest.empty()) throw Error(ErrorCode::kEmptyInput, "archive has no completed responses");

  std::vector<const ArchiveRecord*> scorable;
  for (const auto& [key, r] : latest) scorable.push_back(r);
  std::vector<ArchiveRecord> copies;
  copies.reserve(scorable.size());
  for (const auto* r : scorable) copies.push_back(*r);
  const ReferenceTable references = references_from_records(copies);

  // Backend order from run.json when available, else alphabetical.
  std::vector<std::string> backend_order;
  const fs::path dir = fs::is_directory(archive_path) ? archive_path : archive_path.parent_path();
  if (std::ifstream run(dir / kRunFile); run) {
    auto doc = json::parse(run, nullptr, false);
    if (doc.is_object() && doc.contains("backends") && doc["backends"].is_array()) {
      for (const auto& b : doc["backends"]) {
        if (b.is_object() && b.contains("name") && b["name"].is_string()) {
          backend_order.push_back(b["name"].get<std::string>());
        }
      }
    }
  }
  std::map<std::pair<std::string, int>, std::vector<ScoredUnit>> cells;
  for (const auto* r : scorable) cells[{r->backend, r->n}].push_back(unit_from_record(*r, parse_mode));
  auto rank = [&](const std::string& backend) {
    auto it = std::find(backend_order.begin(), backend_order.end(), backend);
    return static_cast<std::size_t>(it - backend_order.begin());
  };
  std::vector<std::pair<std::string, int>> keys;
  for (const auto& [key, units] : cells) keys.push_back(key);
  std::stable_sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) {
    return std::make_tuple(rank(a.first), a.first, a.second) <
           std::make_tuple(rank(b.first), b.first, b.second);
  });

  std::vector<EvalReport> reports;
  for (const auto& key : keys) {
    reports.push_back(aggregate_report(key.first, key.second, cells[key], references, accuracy_mode));
  }
  return reports;
}

std::string report_csv(std::span<const EvalReport> reports) {
  std::ostringstream out;
  out << "model,N,judgment_accuracy,navigation_f1,navigation_mae,json_decode_error_rate,"
         "scored_questions,decode_failures,unanswered,nav_pairs_used\n";
  for (const auto& r : reports) {
    std::string model = r.model_name;
    if (model.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : model) {
        if (c == '"') quoted.push_back('"');
        quoted.push_back(c);
      }
      model = quoted + "\"";
    }
    out << model << ',' << r.n << ',' << format_metric(r.judgment_accuracy) << ','
        << format_metric(r.navigation_f1) << ',' << format_metric(r.navigation_mae) << ','
        << format_metric(r.json_decode_error_rate) << ',' << r.counts.scored_questions << ','
        << r.counts.decode_failures << ',' << r.counts.unanswered << ','
        << r.counts.nav_pairs_used << '\n';
  }
  return out.str();
}

std::string report_jsonl(std::span<const EvalReport> reports) {
  std::string out;
  for (const auto& r : reports) {
    ordered_json doc;
    doc["model"] = r.model_name;
    doc["N"] = r.n;
    doc["judgment_accuracy"] = r.judgment_accuracy;
    doc["navigation_f1"] = r.navigation_f1;
    doc["navigation_mae"] = r.navigation_mae;
    doc["json_decode_error_rate"] = r.json_decode_error_rate;
    doc["units"] = r.units;
    doc["scored_questions"] = r.counts.scored_questions;
    doc["decode_failures"] = r.counts.decode_failures;
    doc["unanswered"] = r.counts.unanswered;
    doc["nav_pairs_used"] = r.counts.nav_pairs_used;
    doc["out_of_range_navigation"] = r.counts.out_of_range_navigation;
    doc["empty_scoring"] = r.empty_scoring;
    out += dump(doc);
    out.push_back('\n');
  }
  return out;
}

}  // namespace batchqa
