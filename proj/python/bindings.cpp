// Python bindings for the core library.  The surface mirrors the CLI verbs:
// corpus loading and dedup, BPE encode/decode and fertility, entropy,
// morpheme alignment, lexical diversity, judge-score statistics, prompt
// generation, story generation, and spectral diagnostics.  Reports come back
// as plain dicts so callers can feed them straight into pandas or json.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tinytok/corpus.hpp"
#include "tinytok/diversity.hpp"
#include "tinytok/entropy.hpp"
#include "tinytok/error.hpp"
#include "tinytok/judgestats.hpp"
#include "tinytok/morph.hpp"
#include "tinytok/orchestrator.hpp"
#include "tinytok/promptgen.hpp"
#include "tinytok/provider.hpp"
#include "tinytok/sha256.hpp"
#include "tinytok/spectral.hpp"
#include "tinytok/stats.hpp"
#include "tinytok/tokenizer.hpp"

namespace py = pybind11;
using namespace tinytok;

namespace {

py::dict rouge_dict(const diversity::RougeScore& s) {
  py::dict d;
  d["precision"] = s.precision;
  d["recall"] = s.recall;
  d["f1"] = s.f1;
  return d;
}

py::dict pearson_dict(const stats::PearsonResult& p) {
  py::dict d;
  d["r"] = p.r;
  d["t"] = p.t;
  d["n"] = p.n;
  return d;
}

entropy::FrequencyDistribution dist_from_counts(const std::map<int, std::uint64_t>& counts) {
  entropy::FrequencyDistribution dist;
  for (const auto& [id, n] : counts) dist.add(id, n);
  return dist;
}

promptgen::UniquenessMode mode_from_string(const std::string& mode) {
  if (mode == "triplet") return promptgen::UniquenessMode::triplet;
  if (mode == "quad") return promptgen::UniquenessMode::quad;
  throw UserError("uniqueness mode must be \"triplet\" or \"quad\", got \"" + mode + "\"");
}

}  // namespace

PYBIND11_MODULE(_tinytok, m) {
  m.doc() = "Corpus, tokenizer, and evaluation workbench (C++ core)";

  py::register_exception<UserError>(m, "UserError", PyExc_ValueError);

  m.def("sha256_hex", [](const std::string& data) { return sha256_hex(data); },
        py::arg("data"), "Hex SHA-256 of a byte string.");

  // ---- corpus ------------------------------------------------------------

  m.def("dedup_key", [](const std::string& text) { return corpus::dedup_key(text); },
        py::arg("text"),
        "Digest of the canonical text form (NFC, whitespace collapsed, trimmed).");

  m.def(
      "load_corpus",
      [](const std::string& path) {
        SkipReport skips;
        const auto corpus = corpus::load_jsonl(path, corpus::Split::unsplit, &skips);
        py::list records;
        for (const auto& rec : corpus.records) {
          py::dict d;
          d["id"] = rec.id;
          d["story"] = rec.text;
          d["metadata"] = rec.metadata;
          records.append(d);
        }
        py::dict out;
        out["records"] = records;
        out["skipped"] = skips.skipped;
        return out;
      },
      py::arg("path"), "Load a stories JSONL file; malformed lines are skipped and counted.");

  m.def(
      "dedup_report",
      [](const std::string& path, std::size_t threads) {
        const auto corpus = corpus::load_jsonl(path);
        const auto rep = corpus::dedup_report(corpus, threads);
        py::dict out;
        out["total"] = rep.total;
        out["unique"] = rep.unique;
        out["duplicates"] = rep.duplicates;
        out["duplicate_ratio"] = rep.duplicate_ratio;
        py::list groups;
        for (const auto& g : rep.duplicate_groups) {
          py::dict gd;
          gd["digest"] = g.digest;
          gd["member_ids"] = g.member_ids;
          groups.append(gd);
        }
        out["duplicate_groups"] = groups;
        return out;
      },
      py::arg("path"), py::arg("threads") = 1,
      "Exact-duplicate analysis of a stories JSONL file.");

  // ---- tokenizer ---------------------------------------------------------

  py::class_<bpe::Tokenizer>(m, "Tokenizer")
      .def_readonly("name", &bpe::Tokenizer::name)
      .def_property_readonly("vocab_size", &bpe::Tokenizer::vocab_size)
      .def("encode",
           [](const bpe::Tokenizer& tok, const std::string& text) { return tok.encode(text); },
           py::arg("text"), "Greedy lowest-rank BPE encoding.")
      .def("decode", &bpe::Tokenizer::decode, py::arg("ids"),
           "Concatenation of the token strings for the given ids.")
      .def("__repr__", [](const bpe::Tokenizer& tok) {
        return "<Tokenizer " + (tok.name.empty() ? std::string("?") : tok.name) + " vocab " +
               std::to_string(tok.vocab_size()) + ">";
      });

  py::class_<bpe::TokenizerOptions>(m, "TokenizerOptions")
      .def(py::init<>())
      .def_readwrite("byte_fallback", &bpe::TokenizerOptions::byte_fallback)
      .def_readwrite("unk", &bpe::TokenizerOptions::unk)
      .def_readwrite("pre_split", &bpe::TokenizerOptions::pre_split);

  m.def("load_tokenizer", &bpe::load_tokenizer, py::arg("vocab_path"), py::arg("merges_path"),
        py::arg("options") = bpe::TokenizerOptions{}, py::arg("name") = "",
        "Build a tokenizer from a vocab JSON and a merges list.");

  m.def("load_tokenizer_dir", &bpe::load_tokenizer_dir, py::arg("dir"),
        "Load vocab.json / merges.txt / tokenizer-options.json from a directory.");

  m.def(
      "fertility",
      [](const bpe::Tokenizer& tok, const std::string& corpus_path, std::size_t threads) {
        const auto corpus = corpus::load_jsonl(corpus_path);
        const auto rep = bpe::fertility(tok, corpus, threads);
        py::dict out;
        out["tokens"] = rep.tokens;
        out["words"] = rep.words;
        out["fertility"] = rep.fertility;
        return out;
      },
      py::arg("tokenizer"), py::arg("corpus_path"), py::arg("threads") = 1,
      "Corpus-level tokens-per-word ratio.");

  // ---- entropy -----------------------------------------------------------

  m.def(
      "renyi_entropy",
      [](const std::map<int, std::uint64_t>& counts, double alpha, double log_base) {
        return entropy::renyi_entropy(dist_from_counts(counts), alpha, log_base);
      },
      py::arg("counts"), py::arg("alpha"), py::arg("log_base") = 2.0,
      "Renyi entropy of a {token id: count} distribution (alpha = 1 is Shannon).");

  m.def(
      "entropy_sweep",
      [](const std::map<int, std::uint64_t>& counts, std::vector<double> alphas,
         double log_base) {
        return entropy::entropy_sweep(dist_from_counts(counts), std::move(alphas), log_base);
      },
      py::arg("counts"), py::arg("alphas"), py::arg("log_base") = 2.0,
      "Entropy at each alpha, returned as (alpha, entropy) pairs.");

  m.def(
      "token_distribution",
      [](const bpe::Tokenizer& tok, const std::string& corpus_path, std::size_t threads) {
        const auto corpus = corpus::load_jsonl(corpus_path);
        const auto dist = entropy::build_distribution(tok, corpus, threads);
        std::map<int, std::uint64_t> out(dist.counts.begin(), dist.counts.end());
        return out;
      },
      py::arg("tokenizer"), py::arg("corpus_path"), py::arg("threads") = 1,
      "Token usage counts of a corpus under a tokenizer.");

  // ---- morphology ----------------------------------------------------------

  m.def(
      "morph_score",
      [](const bpe::Tokenizer& tok, const std::string& morph_path, bool exact,
         const std::string& word_marker) {
        const auto entries = morph::load_morph_set(morph_path);
        morph::MorphOptions options;
        options.exact = exact;
        options.word_marker = word_marker;
        const auto rep = morph::morph_score(tok, entries, options);
        py::dict out;
        out["evaluated"] = rep.evaluated;
        out["correct"] = rep.correct;
        out["score"] = rep.score;
        return out;
      },
      py::arg("tokenizer"), py::arg("morph_path"), py::arg("exact") = false,
      py::arg("word_marker") = "",
      "Morpheme-boundary alignment score against a gold segmentation file.");

  // ---- statistics ----------------------------------------------------------

  m.def(
      "pearson",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return pearson_dict(stats::pearson(x, y));
      },
      py::arg("x"), py::arg("y"), "Pearson r with its t statistic (df = n - 2).");

  m.def("critical_r", &stats::critical_r, py::arg("n"), py::arg("p_two_tailed"),
        "Smallest significant |r| for n pairs at a two-tailed level.");

  // ---- diversity -----------------------------------------------------------

  m.def(
      "score_pair",
      [](const std::string& cand, const std::string& ref) {
        const auto s = diversity::score_pair(cand, ref);
        py::dict out;
        out["rouge1"] = rouge_dict(s.rouge1);
        out["rouge2"] = rouge_dict(s.rouge2);
        out["rougeL"] = rouge_dict(s.rougeL);
        out["bleu"] = s.bleu;
        out["meteor"] = s.meteor;
        return out;
      },
      py::arg("candidate"), py::arg("reference"),
      "ROUGE-1/2/L, BLEU, and METEOR for one ordered text pair.");

  m.def(
      "diversity_report",
      [](const std::string& corpus_path, std::size_t pairs, std::uint64_t seed,
         std::size_t threads) {
        const auto corpus = corpus::load_jsonl(corpus_path);
        diversity::DiversityOptions options;
        options.sample_size = pairs;
        options.seed = seed;
        const auto rep = diversity::diversity_report(corpus, options, threads);
        py::dict out;
        out["mean"] = rep.mean;
        out["stddev"] = rep.stddev;
        py::list rows;
        for (const auto& row : rep.pairs) {
          py::dict rd;
          rd["candidate"] = row.cand_id;
          rd["reference"] = row.ref_id;
          rd["bleu"] = row.scores.bleu;
          rd["meteor"] = row.scores.meteor;
          rd["rouge1"] = row.scores.rouge1.f1;
          rd["rouge2"] = row.scores.rouge2.f1;
          rd["rougeL"] = row.scores.rougeL.f1;
          rows.append(rd);
        }
        out["pairs"] = rows;
        return out;
      },
      py::arg("corpus_path"), py::arg("pairs") = 10, py::arg("seed") = 0, py::arg("threads") = 1,
      "Cross-story similarity over sampled ordered pairs of distinct stories.");

  // ---- judge statistics ------------------------------------------------------

  m.def(
      "judge_summary",
      [](const std::string& scores_path) {
        SkipReport skips;
        const auto records = judge::load_scores(scores_path, &skips);
        const auto rep = judge::summarize(records);
        py::dict metrics;
        for (const auto& [name, s] : rep.metrics) {
          py::dict sd;
          sd["mean"] = s.mean;
          sd["median"] = s.median;
          sd["stddev"] = s.stddev;
          metrics[name.c_str()] = sd;
        }
        py::dict out;
        out["n"] = rep.n;
        out["skipped"] = skips.skipped;
        out["metrics"] = metrics;
        return out;
      },
      py::arg("scores_path"), "Per-metric mean / median / sample std of a judge scores file.");

  m.def(
      "judge_gaps",
      [](const std::string& scores_path) {
        const auto matrix = judge::gap_matrix(judge::load_scores(scores_path));
        py::dict out;
        out["metrics"] = matrix.metrics;
        out["gap"] = matrix.gap;
        return out;
      },
      py::arg("scores_path"), "Pairwise mean-gap matrix: gap[i][j] = mean_i - mean_j.");

  m.def(
      "judge_correlation",
      [](const std::string& scores_path, const std::string& metric_a,
         const std::string& metric_b) {
        const auto rep = judge::correlate(judge::load_scores(scores_path), metric_a, metric_b);
        py::dict out;
        out["metric_a"] = rep.metric_a;
        out["metric_b"] = rep.metric_b;
        out["pearson"] = pearson_dict(rep.pearson);
        out["critical_r_001"] = rep.critical_r_001;
        return out;
      },
      py::arg("scores_path"), py::arg("metric_a"), py::arg("metric_b"),
      "Correlation between two judge metrics with its significance threshold.");

  // ---- prompt generation -------------------------------------------------

  m.def(
      "generate_prompts",
      [](const std::string& lexicon_dir, std::size_t target, std::uint64_t seed,
         const std::string& language, const std::string& mode) {
        const auto lex = promptgen::load_lexicon_dir(lexicon_dir);
        const auto batch =
            promptgen::generate(lex, target, seed, language, mode_from_string(mode));
        py::list prompts;
        for (const auto& p : batch.prompts) {
          py::dict pd;
          pd["id"] = p.id;
          pd["text"] = p.text;
          prompts.append(pd);
        }
        py::dict out;
        out["prompts"] = prompts;
        out["draws"] = batch.draws;
        out["duplicate_count"] = batch.duplicate_count;
        return out;
      },
      py::arg("lexicon_dir"), py::arg("target"), py::arg("seed"), py::arg("language"),
      py::arg("mode") = "triplet",
      "Rejection-sample unique story prompts from a lexicon directory.");

  // ---- generation orchestration ----------------------------------------------

  m.def(
      "generate_stories",
      [](const std::string& prompts_path, const std::string& provider_config,
         const std::string& stories_path, const std::string& ledger_path,
         std::size_t parallelism, double rps, int max_attempts, bool resume,
         std::uint64_t seed) {
        const auto provider = orch::make_provider(provider_config);
        orch::OrchestratorOptions options;
        options.parallelism = parallelism;
        options.rps_limit = rps;
        options.retry.max_attempts = max_attempts;
        options.seed = seed;
        orch::RunSummary summary;
        {
          py::gil_scoped_release release;
          summary = orch::run_generation(prompts_path, *provider, options, stories_path,
                                         ledger_path, resume);
        }
        py::dict out;
        out["prompts"] = summary.prompts;
        out["submitted"] = summary.submitted;
        out["completed"] = summary.completed;
        out["failed"] = summary.failed;
        out["cache_hits"] = summary.cache_hits;
        out["retries"] = summary.retries;
        out["stopped_early"] = summary.stopped_early;
        out["failures"] = summary.failures;
        return out;
      },
      py::arg("prompts_path"), py::arg("provider_config"), py::arg("stories_path"),
      py::arg("ledger_path"), py::arg("parallelism") = 4, py::arg("rps") = 5.0,
      py::arg("max_attempts") = 5, py::arg("resume") = false, py::arg("seed") = 0,
      "Drive a prompts file through a provider config with retries and a resume ledger.");

  // ---- spectral ------------------------------------------------------------

  m.def(
      "singular_values",
      [](const std::vector<std::vector<double>>& rows) {
        spectral::Matrix mat;
        mat.rows = rows.size();
        mat.cols = rows.empty() ? 0 : rows.front().size();
        for (const auto& row : rows) {
          if (row.size() != mat.cols) throw UserError("matrix rows must have equal length");
          mat.values.insert(mat.values.end(), row.begin(), row.end());
        }
        return spectral::singular_values(mat);
      },
      py::arg("rows"), "Singular values (descending) of a dense row-major matrix.");

  m.def(
      "analyze_matrix",
      [](const std::string& path, std::optional<double> fixed_lambda_min,
         std::size_t min_tail) {
        spectral::PowerlawOptions options;
        options.fixed_lambda_min = fixed_lambda_min;
        options.min_tail = min_tail;
        const auto name = std::filesystem::path(path).filename().string();
        const auto rep = spectral::analyze_layer(name, spectral::load_matrix(path), options);
        py::dict out;
        out["layer"] = rep.layer;
        out["rows"] = rep.rows;
        out["cols"] = rep.cols;
        out["spectral_norm"] = rep.spectral_norm;
        out["stable_rank"] = rep.stable_rank;
        out["esd_entropy"] = rep.esd_entropy;
        out["under_trained"] = rep.under_trained;
        if (rep.fit) {
          py::dict fit;
          fit["alpha"] = rep.fit->alpha;
          fit["lambda_min"] = rep.fit->lambda_min;
          fit["ks"] = rep.fit->ks;
          fit["tail_n"] = rep.fit->tail_n;
          out["fit"] = fit;
        } else {
          out["fit"] = py::none();
        }
        return out;
      },
      py::arg("path"), py::arg("fixed_lambda_min") = py::none(), py::arg("min_tail") = 10,
      "Spectral diagnostics (norms, ESD entropy, power-law tail fit) of a saved matrix.");

  m.def(
      "fit_powerlaw",
      [](std::vector<double> lambdas, std::optional<double> fixed_lambda_min,
         std::size_t min_tail) {
        spectral::PowerlawOptions options;
        options.fixed_lambda_min = fixed_lambda_min;
        options.min_tail = min_tail;
        const auto fit = spectral::fit_powerlaw(std::move(lambdas), options);
        py::dict out;
        out["alpha"] = fit.alpha;
        out["lambda_min"] = fit.lambda_min;
        out["ks"] = fit.ks;
        out["tail_n"] = fit.tail_n;
        return out;
      },
      py::arg("lambdas"), py::arg("fixed_lambda_min") = py::none(), py::arg("min_tail") = 10,
      "Clauset-style continuous power-law fit of an eigenvalue tail.");
}
