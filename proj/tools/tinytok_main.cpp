// tinytok: corpus hygiene, tokenizer diagnostics, story-generation
// orchestration and model spectra in one command-line workbench.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <iostream>
#include <optional>

#include "cli_helpers.hpp"
#include "tinytok/corpus.hpp"
#include "tinytok/diversity.hpp"
#include "tinytok/entropy.hpp"
#include "tinytok/error.hpp"
#include "tinytok/judgestats.hpp"
#include "tinytok/morph.hpp"
#include "tinytok/orchestrator.hpp"
#include "tinytok/promptgen.hpp"
#include "tinytok/provider.hpp"
#include "tinytok/spectral.hpp"
#include "tinytok/stats.hpp"
#include "tinytok/tokenizer.hpp"
#include "tinytok/version.hpp"

namespace {

using nlohmann::json;
using namespace tinytok;
using cli::logger;

struct GlobalArgs {
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0 = hardware concurrency
  std::string out_dir = ".";
  std::string log_level = "info";
  std::string config_path;
};

json skip_json(const SkipReport& skips) {
  json j;
  j["count"] = skips.skipped;
  json reasons = json::array();
  for (const auto& [line, why] : skips.reasons) {
    reasons.push_back({{"line", line}, {"reason", why}});
  }
  j["reasons"] = reasons;
  return j;
}

corpus::StoryCorpus load_corpus_logged(const std::string& path, SkipReport& skips,
                                       const std::string& language = "") {
  corpus::StoryCorpus c = corpus::load_jsonl(path, corpus::Split::unsplit, &skips);
  c.language = language;
  if (skips.skipped > 0) {
    logger().warn(path + ": skipped " + std::to_string(skips.skipped) + " malformed line(s)");
  }
  logger().debug(path + ": loaded " + std::to_string(c.size()) + " stories");
  return c;
}

std::vector<std::pair<std::string, std::string>> model_inputs(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::pair<std::string, std::string>> inputs;
  inputs.push_back(cli::input_digest((fs::path(dir) / "vocab.json").string()));
  inputs.push_back(cli::input_digest((fs::path(dir) / "merges.txt").string()));
  const fs::path opts = fs::path(dir) / "tokenizer-options.json";
  if (fs::exists(opts)) inputs.push_back(cli::input_digest(opts.string()));
  return inputs;
}

// ---------------------------------------------------------------------------
// corpus

void cmd_corpus_dedup(const GlobalArgs& g, const std::string& corpus_path,
                      const std::string& report_path, const std::string& csv_path) {
  cli::OutDir out(g.out_dir);
  SkipReport skips;
  const corpus::StoryCorpus c = load_corpus_logged(corpus_path, skips);
  const corpus::DedupReport report = corpus::dedup_report(c, g.threads);

  json j;
  j["provenance"] = cli::provenance(g.seed, {cli::input_digest(corpus_path)},
                                    {{"corpus", corpus_path}});
  j["total"] = report.total;
  j["unique"] = report.unique;
  j["duplicates"] = report.duplicates;
  j["duplicate_ratio"] = report.duplicate_ratio;
  j["skipped_lines"] = skip_json(skips);
  json groups = json::array();
  for (const auto& g2 : report.duplicate_groups) {
    groups.push_back({{"digest", g2.digest}, {"ids", g2.member_ids}});
  }
  j["duplicate_groups"] = groups;
  cli::write_report(out, report_path, j);

  if (!csv_path.empty()) {
    std::string csv = "digest,count,ids\n";
    for (const auto& g2 : report.duplicate_groups) {
      csv += g2.digest + "," + std::to_string(g2.member_ids.size()) + ",\"";
      for (std::size_t i = 0; i < g2.member_ids.size(); ++i) {
        if (i) csv += ';';
        csv += g2.member_ids[i];
      }
      csv += "\"\n";
    }
    cli::write_text(out, csv_path, csv);
  }
  std::cout << "dedup: " << report.total << " stories, " << report.unique << " unique, "
            << report.duplicates << " duplicates ("
            << json(report.duplicate_ratio * 100.0).dump() << "%)\n";
}

void cmd_corpus_overlap(const GlobalArgs& g, const std::string& a_path, const std::string& b_path,
                        const std::string& report_path) {
  cli::OutDir out(g.out_dir);
  SkipReport skips_a, skips_b;
  const corpus::StoryCorpus a = load_corpus_logged(a_path, skips_a);
  const corpus::StoryCorpus b = load_corpus_logged(b_path, skips_b);
  const corpus::OverlapReport report = corpus::split_overlap(a, b, g.threads);

  json j;
  j["provenance"] = cli::provenance(
      g.seed, {cli::input_digest(a_path), cli::input_digest(b_path)},
      {{"corpus_a", a_path}, {"corpus_b", b_path}});
  j["overlap"] = report.overlap;
  json groups = json::array();
  for (const auto& grp : report.groups) {
    groups.push_back({{"digest", grp.digest}, {"ids_a", grp.ids_a}, {"ids_b", grp.ids_b}});
  }
  j["groups"] = groups;
  cli::write_report(out, report_path, j);
  std::cout << "overlap: " << report.overlap << " shared stories\n";
}

void cmd_corpus_merge(const GlobalArgs& g, const std::string& a_path, const std::string& b_path,
                      const std::string& out_path, const std::string& report_path) {
  cli::OutDir out(g.out_dir);
  SkipReport skips_a, skips_b;
  const corpus::StoryCorpus a = load_corpus_logged(a_path, skips_a);
  const corpus::StoryCorpus b = load_corpus_logged(b_path, skips_b);
  const corpus::StoryCorpus merged = corpus::merge_dedup(a, b, g.threads);
  corpus::save_jsonl(out.resolve(out_path), merged);
  logger().info("wrote " + out.resolve(out_path));

  if (!report_path.empty()) {
    json j;
    j["provenance"] = cli::provenance(
        g.seed, {cli::input_digest(a_path), cli::input_digest(b_path)},
        {{"corpus_a", a_path}, {"corpus_b", b_path}, {"out", out_path}});
    j["input_a"] = a.size();
    j["input_b"] = b.size();
    j["merged"] = merged.size();
    j["removed"] = a.size() + b.size() - merged.size();
    cli::write_report(out, report_path, j);
  }
  std::cout << "merge: " << a.size() << " + " << b.size() << " -> " << merged.size()
            << " stories\n";
}

// ---------------------------------------------------------------------------
// tok

void cmd_tok_encode(const GlobalArgs& g, const std::string& model_dir, const std::string& text_arg,
                    const std::string& report_path) {
  const bpe::Tokenizer tok = bpe::load_tokenizer_dir(model_dir);
  const std::vector<int> ids = tok.encode(text_arg);
  const std::string round_trip = tok.decode(ids);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) std::cout << ' ';
    std::cout << ids[i];
  }
  std::cout << "\n";
  if (!report_path.empty()) {
    cli::OutDir out(g.out_dir);
    json j;
    j["provenance"] = cli::provenance(g.seed, model_inputs(model_dir), {{"model", model_dir}});
    j["text"] = text_arg;
    j["ids"] = ids;
    j["tokens"] = [&] {
      json arr = json::array();
      for (int id : ids) arr.push_back(tok.id_to_token.at(id));
      return arr;
    }();
    j["round_trip_ok"] = round_trip == text_arg;
    cli::write_report(out, report_path, j);
  }
}

void cmd_tok_fertility(const GlobalArgs& g, const std::string& model_dir,
                       const std::string& corpus_path, const std::string& report_path) {
  cli::OutDir out(g.out_dir);
  const bpe::Tokenizer tok = bpe::load_tokenizer_dir(model_dir);
  SkipReport skips;
  const corpus::StoryCorpus c = load_corpus_logged(corpus_path, skips);
  const bpe::FertilityReport report = bpe::fertility(tok, c, g.threads);

  auto inputs = model_inputs(model_dir);
  inputs.push_back(cli::input_digest(corpus_path));
  json j;
  j["provenance"] =
      cli::provenance(g.seed, inputs, {{"model", model_dir}, {"corpus", corpus_path}});
  j["tokenizer"] = tok.name;
  j["vocab_size"] = tok.vocab_size();
  j["tokens"] = report.tokens;
  j["words"] = report.words;
  j["fertility"] = report.fertility;
  j["skipped_lines"] = skip_json(skips);
  cli::write_report(out, report_path, j);
  std::cout << "fertility: " << json(report.fertility).dump() << " tokens/word over "
            << report.words << " words\n";
}

// ---------------------------------------------------------------------------
// entropy

void cmd_entropy(const GlobalArgs& g, const std::string& model_dir, const std::string& corpus_path,
                 const std::string& alphas_csv, double base, const std::string& report_path) {
  cli::OutDir out(g.out_dir);
  const bpe::Tokenizer tok = bpe::load_tokenizer_dir(model_dir);
  SkipReport skips;
  const corpus::StoryCorpus c = load_corpus_logged(corpus_path, skips);
  const entropy::FrequencyDistribution dist = entropy::build_distribution(tok, c, g.threads);
  const auto sweep = entropy::entropy_sweep(dist, cli::parse_double_list(alphas_csv), base);

  auto inputs = model_inputs(model_dir);
  inputs.push_back(cli::input_digest(corpus_path));
  json j;
  j["provenance"] = cli::provenance(g.seed, inputs,
                                    {{"model", model_dir},
                                     {"corpus", corpus_path},
                                     {"alphas", alphas_csv},
                                     {"log_base", base}});
  json alphas = json::array();
  json values = json::array();
  for (const auto& [a, h] : sweep) {
    alphas.push_back(a);
    values.push_back(h);
  }
  j["alphas"] = alphas;
  j["entropy_bits"] = values;
  j["vocab_observed"] = dist.observed_vocab();
  j["total_tokens"] = dist.total;
  j["skipped_lines"] = skip_json(skips);
  cli::write_report(out, report_path, j);
  for (const auto& [a, h] : sweep) {
    std::cout << "H_" << json(a).dump() << " = " << json(h).dump() << "\n";
  }
}

// ---------------------------------------------------------------------------
// morph

void cmd_morph(const GlobalArgs& g, const std::string& model_dir, const std::string& set_path,
               bool exact, const std::string& marker, const std::string& report_path) {
  cli::OutDir out(g.out_dir);
  const bpe::Tokenizer tok = bpe::load_tokenizer_dir(model_dir);
  SkipReport skips;
  const auto entries = morph::load_morph_set(set_path, &skips);
  if (skips.skipped > 0) {
    logger().warn(set_path + ": skipped " + std::to_string(skips.skipped) + " line(s)");
  }
  morph::MorphOptions options;
  options.exact = exact;
  options.word_marker = marker;
  const morph::MorphReport report = morph::morph_score(tok, entries, options);

  auto inputs = model_inputs(model_dir);
  inputs.push_back(cli::input_digest(set_path));
  json j;
  j["provenance"] = cli::provenance(
      g.seed, inputs,
      {{"model", model_dir}, {"set", set_path}, {"exact", exact}, {"marker", marker}});
  j["evaluated"] = report.evaluated;
  j["correct"] = report.correct;
  j["morph_score"] = report.score;
  j["skipped_lines"] = skip_json(skips);
  json words = json::array();
  for (const auto& w : report.per_word) {
    words.push_back({{"word", w.word}, {"correct", w.correct}});
  }
  j["per_word"] = words;
  cli::write_report(out, report_path, j);
  std::cout << "morph score: " << json(report.score).dump() << " (" << report.correct << "/"
            << report.evaluated << ")\n";
}

// ---------------------------------------------------------------------------
// diversity

void cmd_diversity(const GlobalArgs& g, const std::string& corpus_path, std::size_t pairs,
                   bool all_pairs, const std::string& report_path, const std::string& csv_path) {
  cli::OutDir out(g.out_dir);
  SkipReport skips;
  const corpus::StoryCorpus c = load_corpus_logged(corpus_path, skips);
  diversity::DiversityOptions options;
  options.pairing = all_pairs ? diversity::Pairing::all_ordered : diversity::Pairing::random_sample;
  options.sample_size = pairs;
  options.seed = g.seed;
  const diversity::DiversityReport report = diversity::diversity_report(c, options, g.threads);

  json j;
  j["provenance"] = cli::provenance(
      g.seed, {cli::input_digest(corpus_path)},
      {{"corpus", corpus_path}, {"pairs", all_pairs ? json("all") : json(pairs)}});
  j["pair_count"] = report.pairs.size();
  j["mean"] = report.mean;
  j["stddev"] = report.stddev;
  json corr = json::object();
  for (std::size_t a = 0; a < diversity::kMetricNames.size(); ++a) {
    json row = json::object();
    for (std::size_t b = 0; b < diversity::kMetricNames.size(); ++b) {
      const auto& cell = report.correlation[a][b];
      row[diversity::kMetricNames[b]] = cell ? json(*cell) : json(nullptr);
    }
    corr[diversity::kMetricNames[a]] = row;
  }
  j["correlation"] = corr;
  j["skipped_lines"] = skip_json(skips);
  cli::write_report(out, report_path, j);

  if (!csv_path.empty()) {
    std::string csv = "cand_id,ref_id,rouge1,rouge2,rougeL,bleu,meteor\n";
    for (const auto& row : report.pairs) {
      csv += row.cand_id + "," + row.ref_id + "," + json(row.scores.rouge1.f1).dump() + "," +
             json(row.scores.rouge2.f1).dump() + "," + json(row.scores.rougeL.f1).dump() + "," +
             json(row.scores.bleu).dump() + "," + json(row.scores.meteor).dump() + "\n";
    }
    cli::write_text(out, csv_path, csv);
  }
  std::cout << "diversity over " << report.pairs.size()
            << " pairs: rouge1=" << json(report.mean.at("rouge1")).dump()
            << " bleu=" << json(report.mean.at("bleu")).dump()
            << " meteor=" << json(report.mean.at("meteor")).dump() << "\n";
}

// ---------------------------------------------------------------------------
// promptgen

void cmd_promptgen(const GlobalArgs& g, const std::string& lexicon_dir, std::size_t target,
                   const std::string& language, const std::string& mode_name,
                   const std::string& out_path, const std::string& report_path,
                   std::size_t estimate_trials) {
  cli::OutDir out(g.out_dir);
  const promptgen::Lexicon lex = promptgen::load_lexicon_dir(lexicon_dir);
  const promptgen::UniquenessMode mode = [&] {
    if (mode_name == "triplet") return promptgen::UniquenessMode::triplet;
    if (mode_name == "quad") return promptgen::UniquenessMode::quad;
    throw UserError("--mode must be triplet or quad");
  }();
  const promptgen::PromptBatch batch = promptgen::generate(lex, target, g.seed, language, mode);

  std::string lines;
  for (const auto& p : batch.prompts) {
    json j;
    j["id"] = p.id;
    j["prompt"] = p.text;
    lines += j.dump();
    lines += '\n';
  }
  cli::write_text(out, out_path, lines);

  if (!report_path.empty()) {
    namespace fs = std::filesystem;
    std::vector<std::pair<std::string, std::string>> inputs;
    for (const char* f : {"nouns.txt", "verbs.txt", "adjectives.txt", "features.json"}) {
      inputs.push_back(cli::input_digest((fs::path(lexicon_dir) / f).string()));
    }
    json j;
    j["provenance"] = cli::provenance(g.seed, inputs,
                                      {{"lexicon", lexicon_dir},
                                       {"target", target},
                                       {"language", language},
                                       {"mode", mode_name}});
    j["prompts"] = batch.prompts.size();
    j["draws"] = batch.draws;
    j["duplicate_count"] = batch.duplicate_count;
    j["capacity"] = promptgen::capacity(lex, mode);
    if (estimate_trials > 0) {
      const auto est =
          promptgen::dedup_rate_estimate(lex, target, estimate_trials, g.seed, mode);
      j["dedup_estimate"] = {{"trials", est.trials},
                             {"mean_duplicates", est.mean_duplicates},
                             {"stddev_duplicates", est.stddev_duplicates},
                             {"expected_duplicates", est.expected_duplicates}};
    }
    cli::write_report(out, report_path, j);
  }
  std::cout << "promptgen: " << batch.prompts.size() << " prompts, " << batch.duplicate_count
            << " duplicate draws rejected\n";
}

// ---------------------------------------------------------------------------
// generate

void cmd_generate(const GlobalArgs& g, const std::string& prompts_path,
                  const std::string& provider_path, bool resume, const std::string& stories_path,
                  const std::string& ledger_path, const std::string& report_path,
                  orch::OrchestratorOptions options) {
  cli::OutDir out(g.out_dir);
  options.seed = g.seed;
  auto provider = orch::make_provider(provider_path);
  const orch::RunSummary summary =
      orch::run_generation(prompts_path, *provider, options, out.resolve(stories_path),
                           out.resolve(ledger_path), resume);

  if (!report_path.empty()) {
    json j;
    j["provenance"] = cli::provenance(
        g.seed, {cli::input_digest(prompts_path), cli::input_digest(provider_path)},
        {{"prompts", prompts_path},
         {"provider", provider_path},
         {"parallelism", options.parallelism},
         {"rps_limit", options.rps_limit},
         {"max_attempts", options.retry.max_attempts},
         {"resume", resume}});
    j["prompts"] = summary.prompts;
    j["submitted"] = summary.submitted;
    j["completed"] = summary.completed;
    j["failed"] = summary.failed;
    j["cache_hits"] = summary.cache_hits;
    j["retries"] = summary.retries;
    j["stopped_early"] = summary.stopped_early;
    json failures = json::array();
    for (const auto& [id, why] : summary.failures) {
      failures.push_back({{"prompt_id", id}, {"error", why}});
    }
    j["failures"] = failures;
    cli::write_report(out, report_path, j);
  }
  std::cout << "generate: " << summary.completed << "/" << summary.prompts << " stories, "
            << summary.failed << " failed, " << summary.cache_hits << " cache hits, "
            << summary.retries << " retries\n";
  if (summary.failed > 0) {
    throw UserError(std::to_string(summary.failed) + " prompt(s) failed permanently");
  }
}

// ---------------------------------------------------------------------------
// judgestats

std::vector<judge::ScoreRecord> load_scores_logged(const std::string& path, SkipReport& skips) {
  auto records = judge::load_scores(path, &skips);
  if (skips.skipped > 0) {
    logger().warn(path + ": skipped " + std::to_string(skips.skipped) + " line(s)");
  }
  return records;
}

void cmd_judge_summary(const GlobalArgs& g, const std::string& scores_path,
                       const std::string& report_path) {
  cli::OutDir out(g.out_dir);
  SkipReport skips;
  const auto records = load_scores_logged(scores_path, skips);
  const judge::SummaryReport report = judge::summarize(records);
  const auto ms_corr = judge::mean_std_correlation(records);

  json j;
  j["provenance"] =
      cli::provenance(g.seed, {cli::input_digest(scores_path)}, {{"scores", scores_path}});
  j["n"] = report.n;
  json metrics = json::object();
  for (const auto& [name, m] : report.metrics) {
    metrics[name] = {{"mean", m.mean}, {"median", m.median}, {"stddev", m.stddev}};
  }
  j["metrics"] = metrics;
  j["mean_std_correlation"] = {{"r", ms_corr.r}, {"n", ms_corr.n}};
  j["skipped_lines"] = skip_json(skips);
  cli::write_report(out, report_path, j);
  for (const auto& [name, m] : report.metrics) {
    std::cout << name << ": mean=" << json(m.mean).dump() << " median=" << json(m.median).dump()
              << " std=" << json(m.stddev).dump() << "\n";
  }
  std::cout << "mean-std correlation r=" << json(ms_corr.r).dump() << "\n";
}

void cmd_judge_corr(const GlobalArgs& g, const std::string& scores_path,
                    const std::string& metric_a, const std::string& metric_b, bool all_pairs,
                    const std::string& report_path) {
  cli::OutDir out(g.out_dir);
  SkipReport skips;
  const auto records = load_scores_logged(scores_path, skips);

  json j;
  j["provenance"] =
      cli::provenance(g.seed, {cli::input_digest(scores_path)}, {{"scores", scores_path}});
  j["n"] = records.size();
  json pairs = json::array();
  auto add_pair = [&](const std::string& a, const std::string& b) {
    const judge::CorrelationReport rep = judge::correlate(records, a, b);
    pairs.push_back({{"metric_a", rep.metric_a},
                     {"metric_b", rep.metric_b},
                     {"r", rep.pearson.r},
                     {"t", std::isinf(rep.pearson.t)
                               ? json(rep.pearson.t > 0 ? "inf" : "-inf")
                               : json(rep.pearson.t)},
                     {"df", rep.pearson.n - 2},
                     {"significant_001", std::fabs(rep.pearson.r) > rep.critical_r_001}});
    std::cout << rep.metric_a << " vs " << rep.metric_b << ": r=" << json(rep.pearson.r).dump()
              << " t(" << rep.pearson.n - 2 << ")=" << json(rep.pearson.t).dump() << "\n";
  };
  if (all_pairs) {
    for (std::size_t a = 0; a < judge::kMetricNames.size(); ++a) {
      for (std::size_t b = a + 1; b < judge::kMetricNames.size(); ++b) {
        add_pair(judge::kMetricNames[a], judge::kMetricNames[b]);
      }
    }
  } else {
    add_pair(metric_a, metric_b);
  }
  j["pairs"] = pairs;
  j["critical_r_001"] = stats::critical_r(records.size(), 0.001);
  j["skipped_lines"] = skip_json(skips);
  cli::write_report(out, report_path, j);
}

void cmd_judge_gaps(const GlobalArgs& g, const std::string& scores_path,
                    const std::string& report_path) {
  cli::OutDir out(g.out_dir);
  SkipReport skips;
  const auto records = load_scores_logged(scores_path, skips);
  const judge::GapMatrix matrix = judge::gap_matrix(records);

  json j;
  j["provenance"] =
      cli::provenance(g.seed, {cli::input_digest(scores_path)}, {{"scores", scores_path}});
  j["metrics"] = matrix.metrics;
  j["gap"] = matrix.gap;
  j["skipped_lines"] = skip_json(skips);
  cli::write_report(out, report_path, j);
  std::cout << "gap matrix over " << records.size() << " records\n";
}

void cmd_judge_hist(const GlobalArgs& g, const std::string& scores_path, const std::string& metric,
                    std::size_t bins, const std::string& report_path) {
  cli::OutDir out(g.out_dir);
  SkipReport skips;
  const auto records = load_scores_logged(scores_path, skips);
  const judge::Histogram hist = judge::histogram(records, metric, bins);

  json j;
  j["provenance"] = cli::provenance(g.seed, {cli::input_digest(scores_path)},
                                    {{"scores", scores_path}, {"metric", metric}, {"bins", bins}});
  j["metric"] = hist.metric;
  j["lo"] = hist.lo;
  j["hi"] = hist.hi;
  j["bins"] = hist.bins;
  j["quantiles"] = hist.quantiles;
  j["skipped_lines"] = skip_json(skips);
  cli::write_report(out, report_path, j);
  std::cout << "histogram of " << metric << " over " << records.size() << " records\n";
}

// ---------------------------------------------------------------------------
// spectral

void cmd_spectral(const GlobalArgs& g, const std::string& manifest_path,
                  const std::string& csv_path, const std::string& report_path,
                  std::optional<double> lambda_min, std::size_t min_tail) {
  cli::OutDir out(g.out_dir);
  spectral::PowerlawOptions options;
  options.fixed_lambda_min = lambda_min;
  options.min_tail = min_tail;
  const spectral::ModelReport report = spectral::analyze_manifest(manifest_path, options);

  cli::write_text(out, csv_path, spectral::report_csv(report));
  if (!report_path.empty()) {
    json j;
    j["provenance"] = cli::provenance(
        g.seed, {cli::input_digest(manifest_path)},
        {{"manifest", manifest_path},
         {"lambda_min", lambda_min ? json(*lambda_min) : json(nullptr)},
         {"min_tail", min_tail}});
    json layers = json::array();
    for (const auto& layer : report.layers) {
      json lj;
      lj["layer"] = layer.layer;
      lj["rows"] = layer.rows;
      lj["cols"] = layer.cols;
      lj["spectral_norm"] = layer.spectral_norm;
      lj["stable_rank"] = layer.stable_rank;
      lj["entropy"] = layer.esd_entropy;
      if (layer.fit) {
        lj["alpha"] = layer.fit->alpha;
        lj["lambda_min"] = layer.fit->lambda_min;
        lj["ks"] = layer.fit->ks;
        lj["tail_n"] = layer.fit->tail_n;
      } else {
        lj["alpha"] = nullptr;
      }
      lj["under_trained"] = layer.under_trained;
      layers.push_back(lj);
    }
    j["layers"] = layers;
    j["summary"] = {{"layers", report.layers.size()},
                    {"under_trained", report.under_trained_count},
                    {"mean_alpha", report.mean_alpha},
                    {"min_alpha", report.min_alpha},
                    {"max_alpha", report.max_alpha},
                    {"mean_entropy", report.mean_entropy},
                    {"mean_spectral_norm", report.mean_spectral_norm},
                    {"mean_stable_rank", report.mean_stable_rank}};
    cli::write_report(out, report_path, j);
  }
  std::cout << "spectral: " << report.under_trained_count << "/" << report.layers.size()
            << " layers flagged under-trained, mean alpha " << json(report.mean_alpha).dump()
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const cli::Cfg cfg = cli::Cfg::preload(argc, argv);

    CLI::App app{"corpus, tokenizer and story-generation analysis workbench"};
    app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
    app.require_subcommand(1);

    GlobalArgs g;
    g.seed = static_cast<std::uint64_t>(cfg.integer("", "seed", 0));
    g.threads = static_cast<std::size_t>(cfg.integer("", "threads", 0));
    g.out_dir = cfg.str("", "out_dir", ".");
    g.log_level = cfg.str("", "log_level", "info");
    app.add_option("--config", g.config_path, "JSON config file (flags override it)");
    app.add_option("--seed", g.seed, "RNG seed for all sampling");
    app.add_option("--threads", g.threads, "worker threads (0 = hardware)");
    app.add_option("--out-dir", g.out_dir, "directory all outputs are written into");
    app.add_option("--log-level", g.log_level, "debug|info|warn|error|off");

    // ---- corpus ----
    auto* corpus_cmd = app.add_subcommand("corpus", "dedup, overlap and merge story corpora");
    corpus_cmd->require_subcommand(1);

    std::string cd_corpus, cd_report = "dedup.json", cd_csv;
    auto* dedup_cmd = corpus_cmd->add_subcommand("dedup", "exact-duplicate analysis");
    dedup_cmd->add_option("corpus", cd_corpus, "stories JSONL")->required();
    dedup_cmd->add_option("--report", cd_report, "report filename");
    dedup_cmd->add_option("--csv", cd_csv, "duplicate groups CSV filename");

    std::string co_a, co_b, co_report = "overlap.json";
    auto* overlap_cmd = corpus_cmd->add_subcommand("overlap", "cross-corpus contamination check");
    overlap_cmd->add_option("a", co_a, "first stories JSONL")->required();
    overlap_cmd->add_option("b", co_b, "second stories JSONL")->required();
    overlap_cmd->add_option("--report", co_report, "report filename");

    std::string cm_a, cm_b, cm_out = "merged.jsonl", cm_report;
    auto* merge_cmd = corpus_cmd->add_subcommand("merge", "dedup-union of two corpora");
    merge_cmd->add_option("a", cm_a, "first stories JSONL")->required();
    merge_cmd->add_option("b", cm_b, "second stories JSONL")->required();
    merge_cmd->add_option("--out", cm_out, "merged JSONL filename");
    merge_cmd->add_option("--report", cm_report, "optional report filename");

    // ---- tok ----
    auto* tok_cmd = app.add_subcommand("tok", "BPE encode/decode and fertility");
    tok_cmd->require_subcommand(1);

    std::string te_model, te_text, te_report;
    auto* encode_cmd = tok_cmd->add_subcommand("encode", "encode a text and print token ids");
    encode_cmd->add_option("--model", te_model, "tokenizer directory")->required();
    encode_cmd->add_option("--text", te_text, "text to encode")->required();
    encode_cmd->add_option("--report", te_report, "optional report filename");

    std::string tf_model, tf_corpus, tf_report = "fertility.json";
    auto* fert_cmd = tok_cmd->add_subcommand("fertility", "tokens-per-word over a corpus");
    fert_cmd->add_option("--model", tf_model, "tokenizer directory")->required();
    fert_cmd->add_option("--corpus", tf_corpus, "stories JSONL")->required();
    fert_cmd->add_option("--report", tf_report, "report filename");

    // ---- entropy ----
    std::string en_model, en_corpus, en_report = "entropy.json";
    std::string en_alphas = cfg.str("entropy", "alphas", "0.5,1,2,2.5");
    double en_base = cfg.num("entropy", "log_base", 2.0);
    auto* entropy_cmd = app.add_subcommand("entropy", "Renyi entropy sweep of token usage");
    entropy_cmd->add_option("--model", en_model, "tokenizer directory")->required();
    entropy_cmd->add_option("--corpus", en_corpus, "stories JSONL")->required();
    entropy_cmd->add_option("--alphas", en_alphas, "comma-separated entropy orders");
    entropy_cmd->add_option("--base", en_base, "logarithm base (2 = bits)");
    entropy_cmd->add_option("--report", en_report, "report filename");

    // ---- morph ----
    std::string mo_model, mo_set, mo_marker, mo_report = "morph.json";
    bool mo_exact = cfg.boolean("morph", "exact", false);
    auto* morph_cmd = app.add_subcommand("morph", "morpheme-boundary alignment score");
    morph_cmd->add_option("--model", mo_model, "tokenizer directory")->required();
    morph_cmd->add_option("--set", mo_set, "gold segmentation JSONL")->required();
    morph_cmd->add_flag("--exact", mo_exact, "require boundary sets to match exactly");
    morph_cmd->add_option("--marker", mo_marker, "word-initial marker prepended before encoding");
    morph_cmd->add_option("--report", mo_report, "report filename");

    // ---- diversity ----
    std::string dv_corpus, dv_report = "diversity.json", dv_csv;
    std::size_t dv_pairs = static_cast<std::size_t>(cfg.integer("diversity", "pairs", 10));
    bool dv_all = false;
    auto* div_cmd = app.add_subcommand("diversity", "cross-story lexical similarity");
    div_cmd->add_option("--corpus", dv_corpus, "stories JSONL")->required();
    div_cmd->add_option("--pairs", dv_pairs, "random ordered pairs to score");
    div_cmd->add_flag("--all-pairs", dv_all, "score every ordered pair");
    div_cmd->add_option("--report", dv_report, "report filename");
    div_cmd->add_option("--csv", dv_csv, "per-pair scores CSV filename");

    // ---- promptgen ----
    std::string pg_lexicon, pg_language, pg_out = "prompts.jsonl", pg_report;
    std::string pg_mode = cfg.str("promptgen", "mode", "triplet");
    std::size_t pg_target = static_cast<std::size_t>(cfg.integer("promptgen", "target", 0));
    std::size_t pg_trials = static_cast<std::size_t>(cfg.integer("promptgen", "estimate_trials", 0));
    auto* pg_cmd = app.add_subcommand("promptgen", "sample unique story prompts from a lexicon");
    pg_cmd->add_option("--lexicon", pg_lexicon, "lexicon directory")->required();
    pg_cmd->add_option("--target", pg_target, "prompts to generate")->required();
    pg_cmd->add_option("--language", pg_language, "language named in the template")->required();
    pg_cmd->add_option("--mode", pg_mode, "uniqueness mode: triplet|quad");
    pg_cmd->add_option("--out", pg_out, "prompts JSONL filename");
    pg_cmd->add_option("--report", pg_report, "optional report filename");
    pg_cmd->add_option("--estimate-trials", pg_trials, "Monte-Carlo duplicate-rate trials");

    // ---- generate ----
    std::string gn_prompts, gn_provider, gn_out = "stories.jsonl", gn_ledger = "ledger.jsonl";
    std::string gn_report;
    bool gn_resume = false;
    bool gn_no_cache = false;
    orch::OrchestratorOptions gn_opts;
    gn_opts.parallelism = static_cast<std::size_t>(cfg.integer("generate", "parallelism", 4));
    gn_opts.rps_limit = cfg.num("generate", "rps_limit", 5.0);
    gn_opts.retry.max_attempts = static_cast<int>(cfg.integer("generate", "max_attempts", 5));
    gn_opts.retry.base_backoff_ms = cfg.num("generate", "base_backoff_ms", 100.0);
    gn_opts.checkpoint_every =
        static_cast<std::size_t>(cfg.integer("generate", "checkpoint_every", 100));
    gn_opts.cache_capacity =
        static_cast<std::size_t>(cfg.integer("generate", "cache_capacity", 4096));
    gn_opts.stop_after_results =
        static_cast<std::size_t>(cfg.integer("generate", "stop_after_results", 0));
    auto* gen_cmd = app.add_subcommand("generate", "drive prompts through a story provider");
    gen_cmd->add_option("--prompts", gn_prompts, "prompts JSONL")->required();
    gen_cmd->add_option("--provider", gn_provider, "provider config JSON")->required();
    gen_cmd->add_flag("--resume", gn_resume, "continue from the ledger checkpoint");
    gen_cmd->add_option("--out", gn_out, "stories JSONL filename");
    gen_cmd->add_option("--ledger", gn_ledger, "ledger JSONL filename");
    gen_cmd->add_option("--report", gn_report, "optional run report filename");
    gen_cmd->add_option("--parallelism", gn_opts.parallelism, "worker threads");
    gen_cmd->add_option("--rps", gn_opts.rps_limit, "request rate limit per second");
    gen_cmd->add_option("--max-attempts", gn_opts.retry.max_attempts, "attempts per prompt");
    gen_cmd->add_option("--backoff-ms", gn_opts.retry.base_backoff_ms, "base retry backoff");
    gen_cmd->add_option("--checkpoint-every", gn_opts.checkpoint_every,
                        "fsync the ledger every N results");
    gen_cmd->add_flag("--no-cache", gn_no_cache, "disable the duplicate-prompt cache");
    gen_cmd->add_option("--cache-capacity", gn_opts.cache_capacity, "cached results to keep");
    gen_cmd->add_option("--stop-after", gn_opts.stop_after_results,
                        "stop claiming new prompts after N results (0 = off)");

    // ---- judgestats ----
    auto* judge_cmd = app.add_subcommand("judgestats", "statistics over judge score files");
    judge_cmd->require_subcommand(1);

    std::string js_scores, js_report = "summary.json";
    auto* jsum_cmd = judge_cmd->add_subcommand("summary", "per-metric mean/median/std");
    jsum_cmd->add_option("--scores", js_scores, "scores JSONL")->required();
    jsum_cmd->add_option("--report", js_report, "report filename");

    std::string jc_scores, jc_a = "creativity", jc_b = "overall", jc_report = "correlation.json";
    bool jc_all = false;
    auto* jcorr_cmd = judge_cmd->add_subcommand("corr", "metric-pair correlation with t stats");
    jcorr_cmd->add_option("--scores", jc_scores, "scores JSONL")->required();
    jcorr_cmd->add_option("--metric-a", jc_a, "first metric");
    jcorr_cmd->add_option("--metric-b", jc_b, "second metric");
    jcorr_cmd->add_flag("--all-pairs", jc_all, "every one of the fifteen metric pairs");
    jcorr_cmd->add_option("--report", jc_report, "report filename");

    std::string jg_scores, jg_report = "gaps.json";
    auto* jgaps_cmd = judge_cmd->add_subcommand("gaps", "pairwise mean-gap matrix");
    jgaps_cmd->add_option("--scores", jg_scores, "scores JSONL")->required();
    jgaps_cmd->add_option("--report", jg_report, "report filename");

    std::string jh_scores, jh_metric = "overall", jh_report = "histogram.json";
    std::size_t jh_bins = static_cast<std::size_t>(cfg.integer("judgestats", "bins", 20));
    auto* jhist_cmd = judge_cmd->add_subcommand("hist", "score histogram and quantiles");
    jhist_cmd->add_option("--scores", jh_scores, "scores JSONL")->required();
    jhist_cmd->add_option("--metric", jh_metric, "metric to bin");
    jhist_cmd->add_option("--bins", jh_bins, "bin count over the 0-10 scale");
    jhist_cmd->add_option("--report", jh_report, "report filename");

    // ---- spectral ----
    std::string sp_manifest, sp_csv = "spectral.csv", sp_report;
    double sp_lambda_min = cfg.num("spectral", "lambda_min", 0.0);
    std::size_t sp_min_tail = static_cast<std::size_t>(cfg.integer("spectral", "min_tail", 10));
    auto* spec_cmd = app.add_subcommand("spectral", "weight-matrix spectra and power-law fits");
    spec_cmd->add_option("--manifest", sp_manifest, "model manifest JSON")->required();
    auto* sp_lm_opt =
        spec_cmd->add_option("--lambda-min", sp_lambda_min, "pin the power-law tail cutoff");
    spec_cmd->add_option("--min-tail", sp_min_tail, "smallest usable tail for a fit");
    spec_cmd->add_option("--csv", sp_csv, "per-layer CSV filename");
    spec_cmd->add_option("--report", sp_report, "optional JSON report filename");

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
      app.exit(e);
      return 1;
    }

    logger().set_level(cli::log_level_from_string(g.log_level));
    if (cfg.loaded()) logger().debug("config loaded from " + cfg.path());

    if (*dedup_cmd) {
      cmd_corpus_dedup(g, cd_corpus, cd_report, cd_csv);
    } else if (*overlap_cmd) {
      cmd_corpus_overlap(g, co_a, co_b, co_report);
    } else if (*merge_cmd) {
      cmd_corpus_merge(g, cm_a, cm_b, cm_out, cm_report);
    } else if (*encode_cmd) {
      cmd_tok_encode(g, te_model, te_text, te_report);
    } else if (*fert_cmd) {
      cmd_tok_fertility(g, tf_model, tf_corpus, tf_report);
    } else if (*entropy_cmd) {
      cmd_entropy(g, en_model, en_corpus, en_alphas, en_base, en_report);
    } else if (*morph_cmd) {
      cmd_morph(g, mo_model, mo_set, mo_exact, mo_marker, mo_report);
    } else if (*div_cmd) {
      cmd_diversity(g, dv_corpus, dv_pairs, dv_all, dv_report, dv_csv);
    } else if (*pg_cmd) {
      cmd_promptgen(g, pg_lexicon, pg_target, pg_language, pg_mode, pg_out, pg_report, pg_trials);
    } else if (*gen_cmd) {
      gn_opts.cache_enabled = !gn_no_cache && cfg.boolean("generate", "cache", true);
      cmd_generate(g, gn_prompts, gn_provider, gn_resume, gn_out, gn_ledger, gn_report, gn_opts);
    } else if (*jsum_cmd) {
      cmd_judge_summary(g, js_scores, js_report);
    } else if (*jcorr_cmd) {
      cmd_judge_corr(g, jc_scores, jc_a, jc_b, jc_all, jc_report);
    } else if (*jgaps_cmd) {
      cmd_judge_gaps(g, jg_scores, jg_report);
    } else if (*jhist_cmd) {
      cmd_judge_hist(g, jh_scores, jh_metric, jh_bins, jh_report);
    } else if (*spec_cmd) {
      std::optional<double> pinned;
      if (sp_lm_opt->count() > 0 || cfg.num("spectral", "lambda_min", 0.0) > 0.0) {
        pinned = sp_lambda_min;
      }
      cmd_spectral(g, sp_manifest, sp_csv, sp_report, pinned, sp_min_tail);
    }
    return 0;
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
