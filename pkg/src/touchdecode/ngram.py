"""Backoff n-gram language models: training, scoring, ARPA serialization.

Smoothing is interpolated Witten-Bell, stored exactly in backoff form:
observed n-grams carry their interpolated probability and every observed
context carries bow(h) = N1+(h) / (c(h) + N1+(h)), so backoff evaluation
reproduces the interpolated model and every context's probabilities sum to
one. ARPA files produced by other toolkits (e.g. Kneser-Ney smoothed)
load through the same parser.

Scores are log10 throughout (the ARPA convention); callers working in
nats multiply by LN10. A literal space cannot be a whitespace-delimited
ARPA token, so character models store it as the token "<space>".
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .keyboard import CHAR_VOCAB

LN10 = math.log(10.0)

SOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
SPACE_TOKEN = "<space>"

# log10 probability assigned to the start marker (never predicted).
SOS_LOG10 = -99.0


def char_to_token(ch: str) -> str:
    return SPACE_TOKEN if ch == " " else ch


def token_to_char(tok: str) -> str:
    return " " if tok == SPACE_TOKEN else tok


def char_tokens(text: str) -> list[str]:
    """Character tokenization over the keyboard vocabulary.

    Characters outside the vocabulary are dropped (uppercase is folded
    first); space becomes the <space> token.
    """
    allowed = set(CHAR_VOCAB)
    return [char_to_token(c) for c in text.lower() if c in allowed]


def word_tokens(text: str) -> list[str]:
    """Lowercased words split on the word-boundary characters (space,
    comma, period), matching the decoder's notion of a completed word."""
    return [w for w in re.split(r"[ ,.]+", text.lower()) if w]


@dataclass(frozen=True)
class NgramModel:
    """Backoff model: log10 probabilities plus log10 backoff weights.

    probs maps k-gram token tuples (k = 1..order, last token predicted) to
    log10 probability; backoffs maps context tuples (length 1..order-1) to
    log10 backoff weight. vocab is the predictable token set (includes
    EOS and UNK, excludes SOS).
    """

    order: int
    probs: dict[tuple[str, ...], float]
    backoffs: dict[tuple[str, ...], float]
    vocab: frozenset[str] = field(repr=False)
    sos: str = SOS
    eos: str = EOS
    unk: str = UNK

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        for ctx in self.backoffs:
            if ctx not in self.probs:
                raise ValueError(f"backoff context {ctx!r} has no n-gram entry")

    def score(self, context: Sequence[str], token: str) -> float:
        """Standard backoff evaluation, log10; total over all queries."""
        return score(self, context, token)

    def _map(self, tok: str) -> str:
        if tok == self.sos or tok in self.vocab:
            return tok
        return self.unk


def score(model: NgramModel, context: Sequence[str], token: str) -> float:
    token = model._map(token)
    if model.order == 1:
        ctx: tuple[str, ...] = ()
    else:
        ctx = tuple(model._map(t) for t in context[-(model.order - 1):])
    probs = model.probs
    backoffs = model.backoffs
    acc = 0.0
    while True:
        hit = probs.get(ctx + (token,))
        if hit is not None:
            return acc + hit
        if not ctx:
            # unigram level: every vocab token (incl. unk) has an entry
            return acc + probs[(token,)]
        acc += backoffs.get(ctx, 0.0)
        ctx = ctx[1:]


def train(corpus: Iterable[Sequence[str]], order: int,
          smoothing: str = "witten-bell",
          vocab: Iterable[str] | None = None) -> NgramModel:
    """Interpolated Witten-Bell model from tokenized sentences.

    Each sentence is padded with one SOS and one EOS. An explicit vocab
    extends the unigram table beyond observed tokens (each extra token
    gets the uniform interpolation share); UNK is always included.
    """
    if smoothing != "witten-bell":
        raise ValueError(f"unsupported smoothing {smoothing!r}")
    if order < 1:
        raise ValueError("order must be >= 1")

    counts: list[Counter] = [Counter() for _ in range(order + 1)]
    n_sentences = 0
    for sent in corpus:
        toks = [SOS] + list(sent) + [EOS]
        n_sentences += 1
        for k in range(1, order + 1):
            for i in range(len(toks) - k + 1):
                gram = tuple(toks[i:i + k])
                if gram[-1] == SOS:
                    continue  # the start marker is never predicted
                counts[k][gram] += 1
    if n_sentences == 0:
        raise ValueError("empty corpus")

    vocab_set = {g[0] for g in counts[1]}
    if vocab is not None:
        vocab_set |= set(vocab)
    vocab_set.discard(SOS)
    vocab_set.add(EOS)
    vocab_set.add(UNK)
    v_size = len(vocab_set)

    # context totals and distinct-continuation counts per level
    ctx_total: list[Counter] = [Counter() for _ in range(order + 1)]
    ctx_types: list[Counter] = [Counter() for _ in range(order + 1)]
    for k in range(1, order + 1):
        for gram, c in counts[k].items():
            ctx_total[k][gram[:-1]] += c
            ctx_types[k][gram[:-1]] += 1

    probs: dict[tuple[str, ...], float] = {}
    backoffs: dict[tuple[str, ...], float] = {}

    # unigrams: interpolate ML with the uniform distribution over the vocab
    total1 = ctx_total[1][()]
    types1 = ctx_types[1][()]
    lam1 = total1 / (total1 + types1)
    uniform = 1.0 / v_size
    p_interp: dict[tuple[str, ...], float] = {}
    for w in vocab_set:
        p = lam1 * counts[1].get((w,), 0) / total1 + (1.0 - lam1) * uniform
        p_interp[(w,)] = p
        probs[(w,)] = math.log10(p)
    probs[(SOS,)] = SOS_LOG10

    for k in range(2, order + 1):
        for gram, c in sorted(counts[k].items()):
            h = gram[:-1]
            lam = ctx_total[k][h] / (ctx_total[k][h] + ctx_types[k][h])
            lower = p_interp[gram[1:]]
            p = lam * c / ctx_total[k][h] + (1.0 - lam) * lower
            p_interp[gram] = p
            probs[gram] = math.log10(p)
        for h in ctx_total[k]:
            bow = ctx_types[k][h] / (ctx_total[k][h] + ctx_types[k][h])
            backoffs[h] = math.log10(bow)

    return NgramModel(order=order, probs=probs, backoffs=backoffs,
                      vocab=frozenset(vocab_set))


def train_char_lm(lines: Iterable[str], order: int = 6) -> NgramModel:
    """Character 6-gram over the keyboard vocabulary (space tokenized)."""
    corpus = [char_tokens(line) for line in lines if line.strip()]
    corpus = [c for c in corpus if c]
    return train(corpus, order=order,
                 vocab=[char_to_token(c) for c in CHAR_VOCAB])


def train_word_lm(lines: Iterable[str], order: int = 3,
                  vocab_size: int = 100_000) -> NgramModel:
    """Word model over the most frequent vocab_size words; rest become UNK."""
    sents = [word_tokens(line) for line in lines if line.strip()]
    sents = [s for s in sents if s]
    freq = Counter(w for s in sents for w in s)
    keep = {w for w, _ in freq.most_common(vocab_size)}
    corpus = [[w if w in keep else UNK for w in s] for s in sents]
    return train(corpus, order=order)


# ---------------------------------------------------------------------------
# ARPA format
# ---------------------------------------------------------------------------

class ArpaFormatError(ValueError):
    pass


def write_arpa(model: NgramModel, stream) -> None:
    r"""Canonical ARPA: \data\ counts, per-order sections, \end\.

    log10 values are written with repr (shortest round-trip decimal), so
    parsing the output reproduces every score bit-exactly.
    """
    by_order: dict[int, list] = {k: [] for k in range(1, model.order + 1)}
    for gram in model.probs:
        by_order[len(gram)].append(gram)
    for k in by_order:
        by_order[k].sort()

    stream.write("\\data\\\n")
    for k in range(1, model.order + 1):
        stream.write(f"ngram {k}={len(by_order[k])}\n")
    for k in range(1, model.order + 1):
        stream.write(f"\n\\{k}-grams:\n")
        for gram in by_order[k]:
            line = f"{_fmt(model.probs[gram])}\t{' '.join(gram)}"
            if gram in model.backoffs:
                line += f"\t{_fmt(model.backoffs[gram])}"
            stream.write(line + "\n")
    stream.write("\n\\end\\\n")


def _fmt(x: float) -> str:
    return repr(float(x))


def parse_arpa(stream) -> NgramModel:
    """Parse an ARPA model; errors carry the offending line number."""
    declared: dict[int, int] = {}
    probs: dict[tuple[str, ...], float] = {}
    backoffs: dict[tuple[str, ...], float] = {}
    section = None  # None -> before \data\, 0 -> in \data\, k -> k-grams
    counts: Counter = Counter()
    saw_data = False
    saw_end = False

    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        if line == "\\data\\":
            saw_data = True
            section = 0
            continue
        if line == "\\end\\":
            saw_end = True
            break
        if line.startswith("\\") and line.endswith("-grams:"):
            try:
                k = int(line[1:-7])
            except ValueError:
                raise ArpaFormatError(f"line {lineno}: bad section header {line!r}")
            section = k
            continue
        if section == 0:
            if line.startswith("ngram"):
                try:
                    lhs, rhs = line.split("=")
                    declared[int(lhs.split()[1])] = int(rhs)
                except (ValueError, IndexError):
                    raise ArpaFormatError(f"line {lineno}: bad count declaration {line!r}")
                continue
            raise ArpaFormatError(f"line {lineno}: unexpected line in data section")
        if section is None:
            continue  # preamble before \data\
        parts = line.split()
        k = section
        if len(parts) == k + 1:
            logp, toks, bow = parts[0], parts[1:], None
        elif len(parts) == k + 2:
            logp, toks, bow = parts[0], parts[1:-1], parts[-1]
        else:
            raise ArpaFormatError(f"line {lineno}: malformed {k}-gram line {line!r}")
        try:
            p = float(logp)
            b = float(bow) if bow is not None else None
        except ValueError:
            raise ArpaFormatError(f"line {lineno}: non-numeric field in {line!r}")
        gram = tuple(toks)
        probs[gram] = p
        if b is not None:
            backoffs[gram] = b
        counts[k] += 1

    if not saw_data:
        raise ArpaFormatError("no \\data\\ section found")
    if not saw_end:
        raise ArpaFormatError("missing \\end\\ marker")
    for k, n in declared.items():
        if counts.get(k, 0) != n:
            raise ArpaFormatError(
                f"count mismatch for {k}-grams: declared {n}, found {counts.get(k, 0)}")
    order = max(declared) if declared else max(counts)
    vocab = frozenset(g[0] for g in probs if len(g) == 1 and g[0] != SOS)
    return NgramModel(order=order, probs=probs, backoffs=backoffs, vocab=vocab)


def save_arpa(model: NgramModel, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        write_arpa(model, f)


def load_arpa(path) -> NgramModel:
    with open(path, encoding="utf-8") as f:
        return parse_arpa(f)
