#!/usr/bin/env python3
"""Regenerates the demo assets under fixtures/.

The outputs are committed, so this only needs to run when the demo data
should change.  Everything is seeded; reruns are byte-identical.
"""

import json
import struct
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent / "fixtures"


def write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path}")


def jsonl(records) -> str:
    return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)


# ---------------------------------------------------------------------------
# Toy lower-case English BPE model.

def make_tokenizer() -> None:
    base = [chr(c) for c in range(ord("a"), ord("z") + 1)]
    base += [" ", ".", ",", "!", "?", "'", "-"]
    # "oo" must outrank "on" or greedy merging turns "moon" into m|o|on.
    # "litt"+"le" ranks above "l"+"e" on purpose: the pair only becomes
    # adjacent after the later merge fires, which exercises the BPE re-scan.
    merges = [
        ("t", "h"), ("th", "e"),
        ("a", "n"), ("an", "d"),
        ("i", "n"), ("in", "g"),
        ("o", "o"), ("m", "oo"), ("moo", "n"),
        ("e", "r"), ("o", "n"), ("s", "t"),
        ("a", "t"), ("e", "d"),
        ("l", "l"), ("e", "e"), ("t", "t"),
        ("st", "a"), ("sta", "r"),
        ("l", "i"), ("li", "tt"), ("litt", "le"),
        ("l", "e"),
    ]
    vocab = {}
    for tok in ["<unk>"] + base:
        vocab[tok] = len(vocab)
    for left, right in merges:
        joined = left + right
        if joined not in vocab:
            vocab[joined] = len(vocab)
    lines = ["# toy lower-case english model"]
    lines += [f"{l} {r}" for l, r in merges]
    write(ROOT / "tokenizer" / "vocab.json",
          json.dumps(vocab, indent=2, ensure_ascii=False) + "\n")
    write(ROOT / "tokenizer" / "merges.txt", "\n".join(lines) + "\n")
    write(ROOT / "tokenizer" / "tokenizer-options.json",
          json.dumps({"byte_fallback": False, "pre_split": True, "unk": "<unk>"},
                     indent=2) + "\n")


# ---------------------------------------------------------------------------
# Two tiny story corpora.  stories_a has one internal exact duplicate pair
# (after whitespace canonicalization); stories_b shares two texts with it.

STORIES = [
    "the little star looked at the moon and smiled.",
    "a dog ran in the park and found a red ball.",
    "the moon sang a song for the sleeping town.",
    "tim and the cat sat on the warm stone steps.",
    "the little star looked at the moon and smiled.",   # dup of s001
    "rain fell all morning, and the garden turned green.",
    "a small boat drifted on the calm and quiet lake.",
    "the baker made sweet bread for the village feast.",
    "grandma told a story about a brave little ant.",
    "the wind carried a paper kite over the old mill.",
]

STORIES_B = [
    "the moon sang a song for the sleeping town.",       # shared with a
    "a fox slept under the tall oak tree at noon.",
    "the baker made   sweet bread for the village feast.",  # shared modulo spaces
    "two frogs argued about the best lily pad in town.",
    "the lighthouse blinked slowly through the night fog.",
]


def make_corpora() -> None:
    recs = [{"id": f"s{i + 1:03d}", "story": s, "language": "english"}
            for i, s in enumerate(STORIES)]
    # one record with extra whitespace that canonicalizes onto s002
    recs.append({"id": "s011", "story": "  a dog ran  in the park and found a red ball. ",
                 "language": "english"})
    write(ROOT / "stories_a.jsonl", jsonl(recs))

    recs_b = [{"id": f"t{i + 1:03d}", "story": s, "language": "english"}
              for i, s in enumerate(STORIES_B)]
    write(ROOT / "stories_b.jsonl", jsonl(recs_b))


# ---------------------------------------------------------------------------
# Prompt lexicon.

def make_lexicon() -> None:
    nouns = ["moon", "river", "basket", "lantern", "feather", "pebble",
             "umbrella", "whistle", "ladder", "mitten", "saucer", "acorn"]
    verbs = ["jump", "whisper", "gather", "paint", "carry", "measure",
             "plant", "share", "follow", "build"]
    adjectives = ["quiet", "shiny", "round", "gentle", "brave", "curious",
                  "sleepy", "bright"]
    features = ["kindness wins", "patience pays off", "honesty matters",
                "teamwork helps", "curiosity rewarded", "small acts count"]
    write(ROOT / "lexicon" / "nouns.txt", "\n".join(nouns) + "\n")
    write(ROOT / "lexicon" / "verbs.txt", "\n".join(verbs) + "\n")
    write(ROOT / "lexicon" / "adjectives.txt", "\n".join(adjectives) + "\n")
    write(ROOT / "lexicon" / "features.json",
          json.dumps(features, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Gold segmentations for the morph score demo.

def make_morph_set() -> None:
    entries = [
        {"word": "unhappiness", "morphemes": ["un", "happi", "ness"]},
        {"word": "restarted", "morphemes": ["re", "start", "ed"]},
        {"word": "moonlight", "morphemes": ["moon", "light"]},
        {"word": "starfish", "morphemes": ["star", "fish"]},
        {"word": "singing", "morphemes": ["sing", "ing"]},
        {"word": "sleepless", "morphemes": ["sleep", "less"]},
        {"word": "rainfall", "morphemes": ["rain", "fall"]},
        {"word": "playground", "morphemes": ["play", "ground"]},
    ]
    write(ROOT / "morph_set.jsonl", jsonl(entries))


# ---------------------------------------------------------------------------
# Judge scores with a plausible correlation structure.

def make_scores() -> None:
    rng = np.random.default_rng(7)
    n = 60
    quality = rng.normal(7.2, 1.1, n)

    def metric(shift, noise):
        return np.clip(quality + rng.normal(shift, noise, n), 0.0, 10.0)

    recs = []
    cols = {
        "context": metric(0.4, 0.5),
        "completeness": metric(0.1, 0.6),
        "creativity": metric(-1.2, 0.9),
        "fluency": metric(0.8, 0.4),
        "grammar": metric(1.0, 0.35),
        "overall": metric(0.0, 0.3),
    }
    for i in range(n):
        rec = {"id": f"g{i + 1:03d}"}
        rec.update({k: round(float(v[i]), 2) for k, v in cols.items()})
        recs.append(rec)
    write(ROOT / "judge_scores.jsonl", jsonl(recs))


# ---------------------------------------------------------------------------
# Provider configs for the generation demo.

def make_providers() -> None:
    write(ROOT / "provider_mock.json",
          json.dumps({"type": "mock", "latency_ms": 2}, indent=2) + "\n")
    write(ROOT / "provider_flaky.json",
          json.dumps({
              "type": "mock",
              "latency_ms": 2,
              "default": {"fail_attempts": 1, "kind": "transient"},
          }, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Weight matrices with controlled spectral tails.

def orthogonal(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))


def matrix_with_tail(rng, rows, cols, alpha, lam_min=1.0):
    """rows x cols matrix whose squared singular values follow a Pareto(alpha) tail."""
    k = min(rows, cols)
    u = rng.uniform(size=k)
    lam = lam_min * u ** (-1.0 / (alpha - 1.0))     # density exponent alpha
    sigma = np.sort(np.sqrt(lam))[::-1]
    left = orthogonal(rng, rows)[:, :k]
    right = orthogonal(rng, cols)[:, :k]
    return (left * sigma) @ right.T


def save_csv(path, m):
    lines = [",".join(f"{v:.9g}" for v in row) for row in m]
    write(path, "\n".join(lines) + "\n")


def save_binary(path, m):
    header = json.dumps({"rows": m.shape[0], "cols": m.shape[1], "dtype": "f32"})
    payload = b"".join(struct.pack("<f", float(v)) for v in m.flatten())
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(header.encode() + b"\n" + payload)
    print(f"wrote {path}")


def make_model() -> None:
    rng = np.random.default_rng(42)
    layers = {
        "embed": matrix_with_tail(rng, 48, 32, alpha=3.0),
        "attn.0": matrix_with_tail(rng, 32, 32, alpha=3.5),
        "mlp.0": matrix_with_tail(rng, 40, 32, alpha=8.0),   # too heavy: flagged
        "head": matrix_with_tail(rng, 32, 24, alpha=2.5),
    }
    manifest = {"layers": {}}
    for name, m in layers.items():
        fname = name.replace(".", "_") + ".csv"
        save_csv(ROOT / "model" / fname, m)
        manifest["layers"][name] = fname
    # one binary-format layer to exercise that reader too
    mb = matrix_with_tail(rng, 36, 28, alpha=4.0)
    save_binary(ROOT / "model" / "proj_out.bin", mb)
    manifest["layers"]["proj.out"] = "proj_out.bin"
    write(ROOT / "model" / "manifest.json", json.dumps(manifest, indent=2) + "\n")


def main() -> None:
    make_tokenizer()
    make_corpora()
    make_lexicon()
    make_morph_set()
    make_scores()
    make_providers()
    make_model()


if __name__ == "__main__":
    main()
