#include "batchqa/dataset_builder.h"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "batchqa/error.h"
#include "batchqa/parser.h"
#include "batchqa/version.h"

namespace batchqa {

namespace {

using nlohmann::ordered_json;

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  return out;
}

std::string dump(const ordered_json& value) {
  return value.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

ordered_json navigation_json(const NavLabel& nav) {
  return nav.is_index() ? ordered_json(nav.value()) : ordered_json("NA");
}

[[noreturn]] void bad_manifest(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kMalformedRecord, where + ": " + what);
}

}  // namespace

std::string reference_completion(const Corpus& corpus, const QuestionGroup& group) {
  std::vector<CanonicalAnswer> answers;
  answers.reserve(group.questions.size());
  for (const auto& q : group.questions) {
    const ReferenceAnswer* ref = corpus.find_reference(group.transcript_id, q.id);
    if (ref == nullptr) {
      throw Error(ErrorCode::kDanglingReference,
                  "no reference for (" + group.transcript_id + ", " + q.id + ")");
    }
    answers.push_back({ref->judgment, {}, ref->navigation});
  }
  return serialize_canonical(answers);
}

std::vector<TrainingExample> build_training_examples(const Corpus& corpus,
                                                     const SamplerConfig& config,
                                                     const RenderOptions& render) {
  const auto groups = make_training_groups(corpus, config);
  std::vector<TrainingExample> examples;
  examples.reserve(groups.size());
  for (const auto& group : groups) {
    const Transcript* transcript = corpus.find_transcript(group.transcript_id);
    TrainingExample example;
    example.transcript_id = group.transcript_id;
    example.k = group.n();
    example.prompt_text = render_prompt(*transcript, group, render).text;
    example.completion_text = reference_completion(corpus, group);
    examples.push_back(std::move(example));
  }
  return examples;
}

TrainingManifest export_training_set(const Corpus& corpus, const SamplerConfig& config,
                                     const std::filesystem::path& out_path,
                                     const RenderOptions& render) {
  const auto examples = build_training_examples(corpus, config, render);
  TrainingManifest manifest;
  manifest.config = config;
  auto out = open_for_write(out_path);
  for (const auto& ex : examples) {
    ordered_json record;
    record["prompt"] = ex.prompt_text;
    record["completion"] = ex.completion_text;
    out << dump(record) << '\n';
    ++manifest.records;
    ++manifest.k_histogram[ex.k];
  }
  if (!out.flush()) throw Error(ErrorCode::kIoError, "write failed: " + out_path.string());
  return manifest;
}

std::string to_json(const TrainingManifest& manifest) {
  ordered_json histogram = ordered_json::object();
  for (const auto& [k, count] : manifest.k_histogram) histogram[std::to_string(k)] = count;
  ordered_json doc;
  doc["records"] = manifest.records;
  doc["seed"] = manifest.config.seed;
  doc["k_min"] = manifest.config.k_min;
  doc["n_max"] = manifest.config.n_max;
  doc["k_histogram"] = std::move(histogram);
  doc["tool_version"] = std::string(tool_version());
  return dump(doc);
}

std::size_t EvalManifest::question_entries() const {
  std::size_t total = 0;
  for (const auto& e : entries) total += e.question_ids.size();
  return total;
}

std::vector<int> EvalManifest::group_sizes() const {
  std::set<int> sizes;
  for (const auto& e : entries) sizes.insert(e.n);
  return {sizes.begin(), sizes.end()};
}

EvalManifest build_eval_manifest(const Corpus& corpus, std::span<const int> n_list,
                                 std::uint64_t seed) {
  EvalManifest manifest;
  manifest.seed = seed;
  manifest.tool_version = std::string(tool_version());
  if (n_list.empty()) {
    manifest.warnings.push_back("empty group-size list; manifest has no entries");
    return manifest;
  }
  for (int n : n_list) {
    for (auto& group : make_eval_groups(corpus, n, seed)) {
      EvalManifestEntry entry;
      entry.n = n;
      entry.transcript_id = group.transcript_id;
      for (const auto& q : group.questions) {
        entry.question_ids.push_back(q.id);
        entry.references.push_back(*corpus.find_reference(group.transcript_id, q.id));
      }
      manifest.entries.push_back(std::move(entry));
    }
  }
  return manifest;
}

void write_eval_manifest(const EvalManifest& manifest, const std::filesystem::path& out_path) {
  auto out = open_for_write(out_path);
  ordered_json header;
  header["seed"] = manifest.seed;
  header["tool_version"] = manifest.tool_version;
  out << dump(header) << '\n';
  for (const auto& e : manifest.entries) {
    ordered_json record;
    record["N"] = e.n;
    record["transcript_id"] = e.transcript_id;
    record["question_ids"] = e.question_ids;
    ordered_json refs = ordered_json::array();
    for (const auto& r : e.references) {
      refs.push_back({{"judgment", std::string(to_string(r.judgment))},
                      {"navigation", navigation_json(r.navigation)}});
    }
    record["references"] = std::move(refs);
    out << dump(record) << '\n';
  }
  if (!out.flush()) throw Error(ErrorCode::kIoError, "write failed: " + out_path.string());
}

EvalManifest export_eval_manifest(const Corpus& corpus, std::span<const int> n_list,
                                  std::uint64_t seed, const std::filesystem::path& out_path) {
  EvalManifest manifest = build_eval_manifest(corpus, n_list, seed);
  write_eval_manifest(manifest, out_path);
  return manifest;
}

EvalManifest load_eval_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  EvalManifest manifest;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    auto record = ordered_json::parse(line, nullptr, false);
    if (!record.is_object()) bad_manifest(where, "record must be a JSON object");
    try {
      if (!have_header) {
        manifest.seed = record.at("seed").get<std::uint64_t>();
        manifest.tool_version = record.value("tool_version", "");
        have_header = true;
        continue;
      }
      EvalManifestEntry entry;
      entry.n = record.at("N").get<int>();
      entry.transcript_id = record.at("transcript_id").get<std::string>();
      entry.question_ids = record.at("question_ids").get<std::vector<std::string>>();
      if (static_cast<int>(entry.question_ids.size()) != entry.n) {
        bad_manifest(where, "question_ids length differs from N");
      }
      if (auto refs = record.find("references"); refs != record.end()) {
        for (std::size_t i = 0; i < refs->size(); ++i) {
          const auto& r = (*refs)[i];
          ReferenceAnswer ref;
          ref.transcript_id = entry.transcript_id;
          ref.question_id = i < entry.question_ids.size() ? entry.question_ids[i] : "";
          auto judgment = judgment_from_string(r.at("judgment").get<std::string>());
          if (!judgment) bad_manifest(where, "bad judgment");
          ref.judgment = *judgment;
          const auto& nav = r.at("navigation");
          ref.navigation = nav.is_number_integer() ? NavLabel::index(nav.get<int>()) : NavLabel::na();
          entry.references.push_back(std::move(ref));
        }
      }
      manifest.entries.push_back(std::move(entry));
    } catch (const ordered_json::exception& e) {
      bad_manifest(where, e.what());
    }
  }
  if (!have_header) bad_manifest(path.string(), "missing header record");
  return manifest;
}

std::vector<QuestionGroup> manifest_groups(const EvalManifest& manifest, const Corpus& corpus,
                                           int n) {
  std::vector<QuestionGroup> groups;
  for (const auto& e : manifest.entries) {
    if (e.n != n) continue;
    if (corpus.find_transcript(e.transcript_id) == nullptr) {
      throw Error(ErrorCode::kDanglingReference,
                  "manifest transcript '" + e.transcript_id + "' not in corpus");
    }
    QuestionGroup group;
    group.transcript_id = e.transcript_id;
    for (const auto& qid : e.question_ids) {
      const Question* q = corpus.find_question(qid);
      if (q == nullptr || corpus.find_reference(e.transcript_id, qid) == nullptr) {
        throw Error(ErrorCode::kDanglingReference,
                    "manifest question '" + qid + "' has no reference for '" +
                        e.transcript_id + "'");
      }
      group.questions.push_back(*q);
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

}  // namespace batchqa
