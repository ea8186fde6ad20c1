"""Corpus, tokenizer, and evaluation workbench for tiny-story language models.

Thin Python surface over the C++ core: corpus dedup, BPE encode/decode and
fertility, Renyi entropy, morpheme alignment, lexical diversity metrics,
judge-score statistics, prompt generation, story-generation orchestration,
and spectral diagnostics of weight matrices.
"""

from ._tinytok import (
    Tokenizer,
    TokenizerOptions,
    UserError,
    analyze_matrix,
    critical_r,
    dedup_key,
    dedup_report,
    diversity_report,
    entropy_sweep,
    fertility,
    fit_powerlaw,
    generate_prompts,
    generate_stories,
    judge_correlation,
    judge_gaps,
    judge_summary,
    load_corpus,
    load_tokenizer,
    load_tokenizer_dir,
    morph_score,
    pearson,
    renyi_entropy,
    score_pair,
    sha256_hex,
    singular_values,
    token_distribution,
)

__version__ = "0.1.0"

__all__ = [
    "Tokenizer",
    "TokenizerOptions",
    "UserError",
    "analyze_matrix",
    "critical_r",
    "dedup_key",
    "dedup_report",
    "diversity_report",
    "entropy_sweep",
    "fertility",
    "fit_powerlaw",
    "generate_prompts",
    "generate_stories",
    "judge_correlation",
    "judge_gaps",
    "judge_summary",
    "load_corpus",
    "load_tokenizer",
    "load_tokenizer_dir",
    "morph_score",
    "pearson",
    "renyi_entropy",
    "score_pair",
    "sha256_hex",
    "singular_values",
    "token_distribution",
]
