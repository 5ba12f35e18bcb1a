#include <algorithm>
#include <iostream>

#include <CLI11.hpp>

#include "decorate/errors.hpp"
#include "decorate/pipeline.hpp"

namespace decorate {

namespace {

int exit_code_for(const Error& e) { return static_cast<int>(error_class(e.code())); }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rating, tagging and editing driven corpus curation", "decorate"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  g.log = &err;
  std::string config_path;
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker parallelism")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--config", config_path, "Strategy config JSON (sample)");
  app.add_flag("--skip-malformed", g.skip_malformed, "Skip malformed input lines instead of failing");
  app.add_flag("--allow-partial", g.allow_partial, "Only mix in edits that exist");

  ScheduleArgs schedule;
  auto* sc = app.add_subcommand("schedule", "Build the per-criterion comparison pair schedule");
  sc->add_option("--corpus", schedule.corpus, "Corpus shard or manifest")->required();
  sc->add_option("--pairs-per-doc", schedule.pairs_per_doc, "Average comparisons per document")->capture_default_str();
  sc->add_option("--out", schedule.out, "Schedule output (JSONL)")->required();

  AnnotateArgs annotate;
  std::string task = "compare";
  std::string schedule_path, latents_path, taxonomy_path;
  std::size_t limit = 0;
  auto* an = app.add_subcommand("annotate", "Run comparisons, tagging, editing or summaries through a backend");
  an->add_option("--corpus", annotate.corpus, "Corpus shard or manifest")->required();
  an->add_option("--schedule", schedule_path, "Pair schedule (compare)");
  an->add_option("--backend", annotate.backend, "mock or remote")->check(CLI::IsMember({"mock", "remote"}))->capture_default_str();
  an->add_option("--task", task, "compare, tag, edit or summarize")
      ->check(CLI::IsMember({"compare", "tag", "edit", "summarize"}))
      ->capture_default_str();
  an->add_option("--out", annotate.out, "Output records (JSONL)")->required();
  an->add_option("--mock-latents", latents_path, "Latent qualities for the mock backend");
  an->add_option("--taxonomy", taxonomy_path, "Taxonomy JSON (tag); defaults to the bundled one");
  auto* limit_opt = an->add_option("--limit", limit, "Stop after this many new requests")->group("");

  FitArgs fit;
  std::string report_path;
  auto* fi = app.add_subcommand("fit", "Fit Bradley-Terry strengths and write 0-100 ratings");
  fi->add_option("--comparisons", fit.comparisons, "Comparison records (JSONL)")->required();
  fi->add_option("--out", fit.out, "Ratings output (JSONL)")->required();
  fi->add_option("--report", report_path, "Fit report JSON (default <out>.report.json)");
  fi->add_option("--tol", fit.options.tol, "Convergence tolerance")->capture_default_str();
  fi->add_option("--max-iter", fit.options.max_iter, "Iteration cap")->capture_default_str();
  fi->add_option("--prior", fit.options.prior, "Pseudo-wins and losses per document")->capture_default_str();

  SampleArgs sample;
  std::string sample_corpus;
  auto* sa = app.add_subcommand("sample", "Select a training subset with a sampling strategy");
  sa->add_option("--annotations", sample.annotations, "Annotation records; repeat to merge")->required();
  sa->add_option("--corpus", sample_corpus, "Corpus providing text, source and token counts");
  sa->add_option("--out", sample.out, "Sample manifest (JSONL)")->required();

  StatsArgs stats;
  std::string stats_corpus, stats_taxonomy;
  auto* st = app.add_subcommand("stats", "Per-source rating means and tag diversity");
  st->add_option("--annotations", stats.annotations, "Annotation records; repeat to merge")->required();
  st->add_option("--corpus", stats_corpus, "Corpus providing text, source and token counts");
  st->add_option("--taxonomy", stats_taxonomy, "Taxonomy JSON; defaults to the bundled one");
  st->add_option("--out", stats.out, "Summary JSON; a CSV is written next to it")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::Usage);
  }

  if (!config_path.empty()) g.config = config_path;
  g.seed_given = seed_opt->count() > 0;

  try {
    ExitCode code = ExitCode::Ok;
    if (sc->parsed()) {
      code = cmd_schedule(g, schedule);
    } else if (an->parsed()) {
      annotate.task = *parse_annotate_task(task);
      if (!schedule_path.empty()) annotate.schedule = schedule_path;
      if (!latents_path.empty()) annotate.mock_latents = latents_path;
      if (!taxonomy_path.empty()) annotate.taxonomy = taxonomy_path;
      if (limit_opt->count() > 0) annotate.limit = limit;
      code = cmd_annotate(g, annotate);
    } else if (fi->parsed()) {
      if (!report_path.empty()) fit.report = report_path;
      code = cmd_fit(g, fit);
    } else if (sa->parsed()) {
      if (!sample_corpus.empty()) sample.corpus = sample_corpus;
      code = cmd_sample(g, sample);
    } else if (st->parsed()) {
      if (!stats_corpus.empty()) stats.corpus = stats_corpus;
      if (!stats_taxonomy.empty()) stats.taxonomy = stats_taxonomy;
      code = cmd_stats(g, stats, out);
    }
    return static_cast<int>(code);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::Data);
  }
}

}  // namespace decorate
