#include "decorate/pipeline.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "decorate/corpus_io.hpp"
#include "decorate/errors.hpp"
#include "decorate/hashing.hpp"
#include "decorate/metrics.hpp"
#include "decorate/remote_backend.hpp"
#include "decorate/samplers.hpp"
#include "decorate/taxonomy.hpp"

namespace decorate {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::ostream& log_of(const GlobalOptions& g) { return g.log != nullptr ? *g.log : std::cerr; }

ReadOptions read_options(const GlobalOptions& g) {
  ReadOptions o;
  o.skip_malformed = g.skip_malformed;
  return o;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Errc::IoFailure, "cannot write " + path.string());
  out << text;
  if (!out) raise(Errc::IoFailure, "write failed for " + path.string());
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::MissingShard, "cannot open " + path.string());
  auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) raise(Errc::MalformedRecord, path.string() + " is not valid JSON");
  return j;
}

struct LoadedCorpus {
  std::vector<Document> docs;
  std::string fingerprint;
  std::string tokenizer_id;
};

LoadedCorpus load_corpus(const GlobalOptions& g, const fs::path& path) {
  auto manifest = open_corpus(path);
  LoadedCorpus out;
  out.fingerprint = manifest.content_fingerprint;
  out.tokenizer_id = manifest.tokenizer_id;
  auto options = read_options(g);
  options.tokenizer_id = manifest.tokenizer_id;
  out.docs = read_documents(manifest, options);
  return out;
}

std::vector<AnnotatedDocument> load_annotated(const GlobalOptions& g, const std::optional<fs::path>& corpus,
                                              const std::vector<fs::path>& annotation_files,
                                              const std::vector<std::string>& accepted_stages,
                                              std::map<std::string, std::string>& inputs) {
  std::vector<AnnotatedDocument> merged;
  if (corpus) {
    auto c = load_corpus(g, *corpus);
    inputs["corpus"] = c.fingerprint;
    merged.reserve(c.docs.size());
    for (auto& d : c.docs) merged.push_back(AnnotatedDocument{std::move(d), {}, {}, {}, {}});
  }
  for (std::size_t k = 0; k < annotation_files.size(); ++k) {
    const auto& file = annotation_files[k];
    require_stage(file, accepted_stages, {}, log_of(g));
    inputs["annotations[" + std::to_string(k) + "]"] = sha256_file(file);
    merged = merge_annotations(std::move(merged), read_annotations(file, read_options(g)));
  }
  return merged;
}

std::string fingerprint_of(const json& j) { return sha256_hex(j.dump()); }

// Reads the lines of a partially written output keyed by request id. A final
// line that does not parse is treated as cut off by an interruption.
std::unordered_map<std::string, std::string> read_existing(const fs::path& path, const GlobalOptions& g) {
  std::unordered_map<std::string, std::string> done;
  if (!fs::exists(path)) return done;
  std::vector<std::string> lines;
  {
    LineReader reader(path);
    std::string line;
    while (reader.next(line)) lines.push_back(line);
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto j = json::parse(lines[i], nullptr, false);
    const bool ok = !j.is_discarded() && j.is_object() && j.contains("request_id") && j["request_id"].is_string();
    if (!ok) {
      if (i + 1 == lines.size()) {
        log_of(g) << "warning: dropping truncated last line of " << path.string() << "\n";
        continue;
      }
      if (g.skip_malformed) {
        log_of(g) << "warning: skipping malformed line " << (i + 1) << " of " << path.string() << "\n";
        continue;
      }
      raise(Errc::MalformedRecord, path.string() + ":" + std::to_string(i + 1) + ": not a resumable record");
    }
    done.emplace(j["request_id"].get<std::string>(), lines[i]);
  }
  return done;
}

struct Request {
  std::string id;
  std::function<json()> run;
};

struct RunOutcome {
  std::size_t reused = 0;
  std::size_t computed = 0;
  bool complete = true;
};

// Runs requests with bounded parallelism and writes results in request order.
RunOutcome run_requests(const std::vector<Request>& requests, const fs::path& out_path, const GlobalOptions& g,
                        std::optional<std::size_t> limit) {
  auto existing = read_existing(out_path, g);
  const fs::path partial = out_path.string() + ".partial";
  std::ofstream out(partial, std::ios::binary | std::ios::trunc);
  if (!out) raise(Errc::IoFailure, "cannot write " + partial.string());

  RunOutcome outcome;
  std::unordered_set<std::string> emitted;
  const auto finish = [&] {
    // Keep earlier answers that were not reached so a rerun can reuse them.
    for (const auto& r : requests) {
      if (emitted.count(r.id)) continue;
      if (auto it = existing.find(r.id); it != existing.end()) out << it->second << '\n';
    }
    out.close();
    if (!out) raise(Errc::IoFailure, "write failed for " + partial.string());
    fs::rename(partial, out_path);
  };

  const std::size_t jobs = static_cast<std::size_t>(std::max(1, g.jobs));
  const std::size_t batch = jobs * 8;
  std::size_t next = 0;
  try {
    while (next < requests.size()) {
      // Collect up to `batch` requests that still need an answer.
      std::vector<std::size_t> pending;
      std::size_t scan = next;
      while (scan < requests.size() && pending.size() < batch) {
        if (!existing.count(requests[scan].id)) {
          if (limit && outcome.computed + pending.size() >= *limit) break;
          pending.push_back(scan);
        }
        ++scan;
      }
      std::vector<std::string> results(pending.size());
      std::vector<std::exception_ptr> errors(pending.size());
      std::atomic<std::size_t> cursor{0};
      const auto worker = [&] {
        for (std::size_t k = cursor++; k < pending.size(); k = cursor++) {
          try {
            auto j = requests[pending[k]].run();
            j["request_id"] = requests[pending[k]].id;
            results[k] = dump_line(j);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        }
      };
      std::vector<std::thread> threads;
      const std::size_t n_threads = std::min(jobs, pending.size());
      for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
      worker();
      for (auto& t : threads) t.join();

      std::size_t k = 0;
      for (; next < scan; ++next) {
        const auto& r = requests[next];
        if (auto it = existing.find(r.id); it != existing.end()) {
          out << it->second << '\n';
          ++outcome.reused;
        } else {
          if (errors[k]) {
            try {
              std::rethrow_exception(errors[k]);
            } catch (const Error& e) {
              raise(e.code(), "request " + r.id + ": " + e.detail());
            }
          }
          out << results[k++] << '\n';
          ++outcome.computed;
        }
        emitted.insert(r.id);
      }
      out.flush();
      if (limit && outcome.computed >= *limit && next < requests.size()) {
        outcome.complete = false;
        break;
      }
    }
  } catch (...) {
    finish();
    throw;
  }
  finish();
  return outcome;
}

std::unique_ptr<AnnotatorBackend> make_backend(const AnnotateArgs& args, const std::vector<Document>& docs) {
  if (args.backend == "mock") {
    auto config = MockConfig::with_default_keywords();
    if (args.mock_latents) {
      const auto latents = load_mock_latents(*args.mock_latents);
      for (const auto& d : docs) {
        if (auto it = latents.find(d.id); it != latents.end()) config.latent_by_text[d.text] = it->second;
      }
    }
    return std::make_unique<MockBackend>(std::move(config));
  }
  if (args.backend == "remote") return std::make_unique<RemoteBackend>(RemoteConfig::from_env());
  raise(Errc::InvalidArgument, "unknown backend '" + args.backend + "' (expected mock or remote)");
}

std::string_view task_name(AnnotateTask t) {
  switch (t) {
    case AnnotateTask::Compare: return "compare";
    case AnnotateTask::Tag: return "tag";
    case AnnotateTask::Edit: return "edit";
    case AnnotateTask::Summarize: return "summarize";
  }
  return "unknown";
}

}  // namespace

// ---------------------------------------------------------------------------
// Sidecars

fs::path sidecar_path(const fs::path& artifact) { return fs::path(artifact.string() + ".meta.json"); }

void write_sidecar(const fs::path& artifact, StageMeta meta) {
  meta.output_sha256 = sha256_file(artifact);
  const json j = {{"stage", meta.stage},
                  {"config_fingerprint", meta.config_fingerprint},
                  {"output_sha256", meta.output_sha256},
                  {"inputs", meta.inputs}};
  write_text_file(sidecar_path(artifact), j.dump(2) + "\n");
}

std::optional<StageMeta> read_sidecar(const fs::path& artifact) {
  const auto path = sidecar_path(artifact);
  if (!fs::exists(path)) return std::nullopt;
  const auto j = read_json_file(path);
  try {
    StageMeta m;
    m.stage = j.at("stage").get<std::string>();
    m.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    m.output_sha256 = j.at("output_sha256").get<std::string>();
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    return m;
  } catch (const json::exception& e) {
    raise(Errc::MalformedRecord, path.string() + ": " + e.what());
  }
}

void require_stage(const fs::path& artifact, const std::vector<std::string>& accepted_stages,
                   const std::map<std::string, std::string>& inputs, std::ostream& log) {
  if (!fs::exists(artifact)) raise(Errc::StageNotReady, "missing artifact " + artifact.string());
  const auto meta = read_sidecar(artifact);
  if (!meta) {
    log << "warning: " << artifact.string() << " has no stage metadata; skipping fingerprint checks\n";
    return;
  }
  if (std::find(accepted_stages.begin(), accepted_stages.end(), meta->stage) == accepted_stages.end()) {
    raise(Errc::StageNotReady, artifact.string() + " was written by stage '" + meta->stage + "'");
  }
  if (meta->output_sha256 != sha256_file(artifact)) {
    raise(Errc::StageNotReady, artifact.string() + " changed after stage '" + meta->stage + "' wrote it");
  }
  for (const auto& [role, digest] : inputs) {
    auto it = meta->inputs.find(role);
    if (it != meta->inputs.end() && it->second != digest) {
      raise(Errc::StageNotReady, artifact.string() + " was built from a different " + role);
    }
  }
}

// ---------------------------------------------------------------------------
// Schedules and mock latents

json schedule_header_json(const PairSchedule& schedule, const std::string& corpus_fingerprint) {
  return {{"type", "schedule"},
          {"pairs_per_doc", schedule.pairs_per_doc},
          {"seed", schedule.seed},
          {"corpus_fingerprint", corpus_fingerprint},
          {"total_pairs", schedule.total_pairs()}};
}

std::string comparison_request_id(Criterion criterion, const std::string& doc_a, const std::string& doc_b) {
  return std::string(criterion_id(criterion)) + ":" + doc_a + ":" + doc_b;
}

void save_schedule(const PairSchedule& schedule, const std::string& corpus_fingerprint, const fs::path& path) {
  std::vector<json> lines;
  lines.reserve(schedule.total_pairs() + 1);
  lines.push_back(schedule_header_json(schedule, corpus_fingerprint));
  for (auto c : canonical_criterion_order()) {
    for (const auto& [a, b] : schedule.for_criterion(c)) {
      lines.push_back({{"criterion", std::string(criterion_id(c))}, {"doc_a", a}, {"doc_b", b}});
    }
  }
  write_json_lines(lines, path);
}

PairSchedule load_schedule(const fs::path& path) {
  PairSchedule schedule;
  bool have_header = false;
  for_each_json_line(path, [&](const json& j, std::uint64_t line) {
    try {
      if (!have_header) {
        if (j.value("type", "") != "schedule") raise(Errc::MalformedRecord, "schedule must start with a header");
        schedule.pairs_per_doc = j.at("pairs_per_doc").get<std::uint32_t>();
        schedule.seed = j.at("seed").get<std::uint64_t>();
        have_header = true;
        return;
      }
      const auto c = parse_criterion(j.at("criterion").get<std::string>());
      if (!c) raise(Errc::MalformedRecord, "unknown criterion");
      schedule.pairs[criterion_index(*c)].emplace_back(j.at("doc_a").get<std::string>(), j.at("doc_b").get<std::string>());
    } catch (const json::exception& e) {
      raise(Errc::MalformedRecord, path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  if (!have_header) raise(Errc::MalformedRecord, path.string() + " has no schedule header");
  return schedule;
}

std::map<std::string, std::array<double, kCriterionCount>> load_mock_latents(const fs::path& path) {
  std::map<std::string, std::array<double, kCriterionCount>> out;
  for_each_json_line(path, [&](const json& j, std::uint64_t line) {
    try {
      std::array<double, kCriterionCount> values{};
      const auto& latent = j.at("latent");
      for (auto c : canonical_criterion_order()) values[criterion_index(c)] = latent.at(std::string(criterion_id(c))).get<double>();
      out[j.at("id").get<std::string>()] = values;
    } catch (const json::exception& e) {
      raise(Errc::MalformedRecord, path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

void save_mock_latents(const std::map<std::string, std::array<double, kCriterionCount>>& latents, const fs::path& path) {
  std::vector<json> lines;
  for (const auto& [id, values] : latents) {
    json latent = json::object();
    for (auto c : canonical_criterion_order()) latent[std::string(criterion_id(c))] = values[criterion_index(c)];
    lines.push_back({{"id", id}, {"latent", latent}});
  }
  write_json_lines(lines, path);
}

// ---------------------------------------------------------------------------
// Commands

ExitCode cmd_schedule(const GlobalOptions& g, const ScheduleArgs& args) {
  if (args.pairs_per_doc == 0) raise(Errc::InvalidArgument, "--pairs-per-doc must be at least 1");
  const auto corpus = load_corpus(g, args.corpus);
  std::vector<std::string> ids;
  ids.reserve(corpus.docs.size());
  for (const auto& d : corpus.docs) ids.push_back(d.id);
  const auto schedule = schedule_pairs(ids, args.pairs_per_doc, g.seed);
  save_schedule(schedule, corpus.fingerprint, args.out);
  write_sidecar(args.out, {"schedule",
                           fingerprint_of({{"pairs_per_doc", args.pairs_per_doc}, {"seed", g.seed}}),
                           "",
                           {{"corpus", corpus.fingerprint}}});
  log_of(g) << "scheduled " << schedule.total_pairs() << " pairs over " << ids.size() << " documents\n";
  return ExitCode::Ok;
}

std::optional<AnnotateTask> parse_annotate_task(std::string_view name) {
  for (auto t : {AnnotateTask::Compare, AnnotateTask::Tag, AnnotateTask::Edit, AnnotateTask::Summarize})
    if (task_name(t) == name) return t;
  return std::nullopt;
}

ExitCode cmd_annotate(const GlobalOptions& g, const AnnotateArgs& args) {
  const auto corpus = load_corpus(g, args.corpus);
  std::unordered_map<std::string, const Document*> by_id;
  for (const auto& d : corpus.docs) by_id.emplace(d.id, &d);
  const auto doc = [&](const std::string& id) -> const Document& {
    auto it = by_id.find(id);
    if (it == by_id.end()) raise(Errc::MalformedRecord, "document '" + id + "' is not in the corpus");
    return *it->second;
  };

  std::map<std::string, std::string> inputs{{"corpus", corpus.fingerprint}};
  json config = {{"task", std::string(task_name(args.task))}, {"backend", args.backend}, {"seed", g.seed}};
  if (args.mock_latents) config["mock_latents"] = sha256_file(*args.mock_latents);

  auto backend = make_backend(args, corpus.docs);
  const auto judge = backend->judge();
  const TagTaxonomy taxonomy = args.taxonomy ? load_taxonomy(*args.taxonomy) : default_taxonomy();
  if (args.taxonomy) config["taxonomy"] = sha256_file(*args.taxonomy);

  std::vector<Request> requests;
  switch (args.task) {
    case AnnotateTask::Compare: {
      if (!args.schedule) raise(Errc::InvalidArgument, "--task compare needs --schedule");
      require_stage(*args.schedule, {"schedule"}, inputs, log_of(g));
      inputs["schedule"] = sha256_file(*args.schedule);
      const auto schedule = load_schedule(*args.schedule);
      for (auto c : canonical_criterion_order()) {
        for (const auto& [a, b] : schedule.for_criterion(c)) {
          const auto& da = doc(a);
          const auto& db = doc(b);
          auto id = comparison_request_id(c, a, b);
          requests.push_back({id, [&, c, id, a, b, pa = &da, pb = &db] {
                                const auto r = compare_randomized(*backend, c, pa->text, pb->text, g.seed, id);
                                ComparisonRecord rec{c, a, b, r.winner, judge, std::nullopt};
                                if (!r.rationale.empty()) rec.rationale = r.rationale;
                                auto j = comparison_to_json(rec);
                                j["presented_order"] = r.swapped ? "BA" : "AB";
                                return j;
                              }});
        }
      }
      break;
    }
    case AnnotateTask::Tag:
      for (const auto& d : corpus.docs) {
        requests.push_back({"tag:" + d.id, [&, pd = &d] {
                              const auto path = assign_tag_path(*backend, pd->text, taxonomy);
                              return json{{"id", pd->id}, {"tags", {path.level1, path.level2, path.level3}}};
                            }});
      }
      break;
    case AnnotateTask::Edit:
      for (const auto& d : corpus.docs) {
        requests.push_back({"edit:" + d.id, [&, pd = &d] {
                              if (!eligible_for_editing(pd->token_count)) {
                                return json{{"id", pd->id}, {"skipped", "length"}};
                              }
                              auto edited = edit(*backend, pd->text);
                              const auto tokens = count_tokens(edited, corpus.tokenizer_id);
                              return json{{"id", pd->id}, {"edited", std::move(edited)}, {"edited_token_count", tokens}};
                            }});
      }
      break;
    case AnnotateTask::Summarize:
      for (const auto& d : corpus.docs) {
        requests.push_back({"summarize:" + d.id, [&, pd = &d] {
                              return json{{"id", pd->id}, {"summary", summarize(*backend, pd->text)}};
                            }});
      }
      break;
  }

  // A previous complete run leaves a sidecar; it no longer describes the file
  // once we start rewriting it.
  fs::remove(sidecar_path(args.out));
  const auto outcome = run_requests(requests, args.out, g, args.limit);
  log_of(g) << "annotate " << task_name(args.task) << ": " << outcome.computed << " new, " << outcome.reused
            << " reused, " << requests.size() << " total\n";
  if (!outcome.complete) {
    log_of(g) << "stopped early; rerun to resume\n";
    return ExitCode::Ok;
  }
  write_sidecar(args.out, {"annotate:" + std::string(task_name(args.task)), fingerprint_of(config), "", inputs});
  return ExitCode::Ok;
}

ExitCode cmd_fit(const GlobalOptions& g, const FitArgs& args) {
  if (args.comparisons.empty()) raise(Errc::InvalidArgument, "--comparisons is required");
  std::map<std::string, std::string> inputs;
  std::array<std::vector<ComparisonRecord>, kCriterionCount> by_criterion;
  std::size_t total = 0;
  for (std::size_t k = 0; k < args.comparisons.size(); ++k) {
    const auto& file = args.comparisons[k];
    require_stage(file, {"annotate:compare"}, {}, log_of(g));
    inputs["comparisons[" + std::to_string(k) + "]"] = sha256_file(file);
    for (auto& r : read_comparisons(file, read_options(g))) {
      by_criterion[criterion_index(r.criterion)].push_back(std::move(r));
      ++total;
    }
  }
  if (total == 0) raise(Errc::NoComparisons, "no comparison records in the input");

  std::map<std::string, std::map<Criterion, double>> scores;
  json report = json::array();
  bool all_converged = true;
  for (auto c : canonical_criterion_order()) {
    const auto& records = by_criterion[criterion_index(c)];
    if (records.empty()) raise(Errc::NoComparisons, "no comparisons for " + std::string(criterion_id(c)));
    const auto fit = fit_bradley_terry(records, args.options);
    auto entry = fit_report_json(fit);
    entry["converged"] = fit.converged;
    report.push_back(entry);
    if (!fit.converged) {
      all_converged = false;
      log_of(g) << "warning: " << criterion_id(c) << " did not converge after " << fit.iterations
                << " iterations (delta " << fit.final_delta << ")\n";
    }
    for (const auto& [id, score] : normalize_scores(fit).scores) scores[id][c] = score;
  }

  std::vector<AnnotatedDocument> out;
  out.reserve(scores.size());
  for (const auto& [id, per] : scores) {
    if (per.size() != kCriterionCount) {
      for (auto c : canonical_criterion_order()) {
        if (!per.count(c)) {
          raise(Errc::MissingRatings, "document '" + id + "' has no comparisons for " + std::string(criterion_id(c)));
        }
      }
    }
    AnnotatedDocument a;
    a.doc.id = id;
    a.ratings = RatingVector::from_map(per);
    out.push_back(std::move(a));
  }
  write_annotations(out, args.out);
  const auto report_path = args.report ? *args.report : fs::path(args.out.string() + ".report.json");
  write_text_file(report_path, report.dump(2) + "\n");

  const json config = {{"prior", args.options.prior}, {"tol", args.options.tol}, {"max_iter", args.options.max_iter}};
  write_sidecar(args.out, {"fit", fingerprint_of(config), "", inputs});
  return all_converged ? ExitCode::Ok : ExitCode::NonConvergence;
}

ExitCode cmd_sample(const GlobalOptions& g, const SampleArgs& args) {
  if (!g.config) raise(Errc::InvalidArgument, "sample needs --config with the strategy JSON");
  auto config = strategy_config_from_json(read_json_file(*g.config));
  if (g.seed_given) config.seed = g.seed;
  if (g.allow_partial) config.allow_partial = true;

  std::map<std::string, std::string> inputs;
  const auto corpus =
      load_annotated(g, args.corpus, args.annotations, {"fit", "annotate:tag", "annotate:edit"}, inputs);
  if (corpus.empty()) raise(Errc::MissingRatings, "no documents to sample from");

  const auto manifest = run_strategy(corpus, config);
  save_sample_manifest(manifest, args.out);
  write_text_file(fs::path(args.out.string() + ".summary.txt"), manifest_summary(manifest, corpus));
  write_sidecar(args.out, {"sample", manifest.config_fingerprint, "", inputs});
  log_of(g) << "sampled " << manifest.entries.size() << " documents, " << manifest.total_tokens << " tokens\n";
  return ExitCode::Ok;
}

ExitCode cmd_stats(const GlobalOptions& g, const StatsArgs& args, std::ostream& out) {
  std::map<std::string, std::string> inputs;
  const auto annotations =
      load_annotated(g, args.corpus, args.annotations, {"fit", "annotate:tag", "annotate:edit"}, inputs);
  const TagTaxonomy taxonomy = args.taxonomy ? load_taxonomy(*args.taxonomy) : default_taxonomy();
  const auto summary = dataset_summary(annotations, taxonomy);

  const auto counts = count_tags(annotations, taxonomy);
  json j = to_json(summary);
  j["level1_distribution"] = tag_distribution(counts, 1);
  j["level1_cross_entropy"] = tag_cross_entropy(tag_distribution(counts, 1), taxonomy, 1);
  write_text_file(args.out, j.dump(2) + "\n");
  auto csv_path = args.out;
  csv_path.replace_extension(".csv");
  write_text_file(csv_path, to_csv(summary));
  write_sidecar(args.out, {"stats", fingerprint_of({{"taxonomy", args.taxonomy ? sha256_file(*args.taxonomy) : "default"}}),
                           "", inputs});
  out << to_text_table(summary);
  return ExitCode::Ok;
}

}  // namespace decorate
