"""Probabilistic text decoder.

Greedy per-character decoding and trie-constrained beam search, both
fusing per-key location likelihoods (closed-form Gaussian product) with
n-gram language priors in log domain (nats).

Beam semantics per observation: every hypothesis either MATCHes it
(append a character allowed by the trie, or a word-closing character) or
treats it as an INSERTION (consume without appending, fixed penalty);
afterwards one OMISSION round lets each surviving hypothesis append one
extra character without consuming an observation (fixed penalty plus the
LM term), so omissions never chain. Hypotheses with identical text are
merged by log-sum-exp, then pruned to the beam width with lexicographic
tie-breaking. Word-closing characters are space, comma and period; a
close adds the word LM prior for the completed word. Out-of-vocabulary
words are reachable only through the session's literal channel.

Sessions treat space as a commit trigger (it never arrives as an
observation); batch greedy/beam decoding treats the space bar as an
ordinary key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .gaussians import Gaussian2
from .keyboard import KeyTouchModel
from .lexicon import Trie, TrieNode
from .losses import BLANK, FrameDistribution
from .ngram import LN10, SOS, NgramModel, char_to_token

WORD_CLOSERS = (" ", ",", ".")


@dataclass(frozen=True)
class TouchObservation:
    """One decoded touch event at 30 Hz frame resolution."""

    frame: int
    finger_dist: FrameDistribution
    location: Gaussian2
    source_ref: str | None = None

    def __post_init__(self):
        if self.finger_dist.argmax == BLANK:
            raise ValueError("blank-argmax frames must be filtered upstream")

    @property
    def finger(self) -> int:
        return self.finger_dist.argmax


@dataclass(frozen=True)
class DecoderConfig:
    beam_width: int = 20
    lambda_omission: float = -10.0
    lambda_insertion: float = -10.0
    char_lm_weight: float = 1.0
    word_lm_weight: float = 1.0
    uncertainty_enabled: bool = True

    def __post_init__(self):
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.lambda_omission > 0 or self.lambda_insertion > 0:
            raise ValueError("penalties must be <= 0 (log domain)")
        if self.char_lm_weight < 0 or self.word_lm_weight < 0:
            raise ValueError("LM weights must be nonnegative")


@dataclass(frozen=True)
class Hypothesis:
    """Beam state: full text, in-progress word, trie position, score."""

    text: str
    word: str
    node: TrieNode | None
    words: tuple[str, ...]
    log_score: float
    op_trace: tuple[tuple[str, str], ...] = field(repr=False, default=())


def key_likelihoods(obs: TouchObservation, keys: KeyTouchModel,
                    cfg: DecoderConfig, key_ids=None) -> dict[str, float]:
    """log rho per key: log N(obs mean | key mean, obs cov + key cov).

    With uncertainty disabled the observation covariance is replaced by
    the zero matrix (the deterministic limit).
    """
    from . import kernels

    ids = list(key_ids) if key_ids is not None else sorted(keys.gaussians)
    means, covs = keys.arrays(ids)
    obs_cov = obs.location.cov if cfg.uncertainty_enabled else np.zeros((2, 2))
    vals = kernels.fuse_log_rho_batch(obs.location.mean, obs_cov, means, covs)
    return dict(zip(ids, vals.tolist()))


def debounce(stream) -> list[TouchObservation]:
    """Collapse adjacent-frame runs with the same argmax finger to the first."""
    out: list[TouchObservation] = []
    prev: TouchObservation | None = None
    for obs in stream:
        if prev is not None and obs.frame == prev.frame + 1 and obs.finger == prev.finger:
            prev = obs  # run continues; keep only its first element
            continue
        out.append(obs)
        prev = obs
    return out


class _LmCache:
    """Memoized nat-domain scores for one immutable n-gram model."""

    def __init__(self, model: NgramModel | None):
        self.model = model
        self.order = model.order if model is not None else 1
        self._cache: dict[tuple, float] = {}

    def score_nats(self, context: tuple[str, ...], token: str) -> float:
        if self.model is None:
            return 0.0
        ctx = context[-(self.order - 1):] if self.order > 1 else ()
        key = (ctx, token)
        hit = self._cache.get(key)
        if hit is None:
            hit = LN10 * self.model.score(list(ctx), token)
            self._cache[key] = hit
        return hit


def _char_context(context_text: str, order: int) -> tuple[str, ...]:
    toks = [SOS] + [char_to_token(c) for c in context_text]
    return tuple(toks[-(order - 1):]) if order > 1 else ()


def greedy_decode(stream, keys: KeyTouchModel, char_lm: NgramModel | None,
                  cfg: DecoderConfig, context: str = "") -> str:
    """Emit the argmax key per debounced observation; no revision.

    Score per key: location log-likelihood plus char_lm_weight times the
    char LM prior given everything decoded so far. Ties break to the
    lexicographically smaller key.
    """
    keys.require_positive_definite()
    lm = _LmCache(char_lm)
    key_ids = sorted(keys.gaussians)
    out: list[str] = []
    for obs in debounce(stream):
        logliks = key_likelihoods(obs, keys, cfg, key_ids)
        ctx = _char_context(context + "".join(out), lm.order)
        best_key = None
        best_score = -math.inf
        for kid in key_ids:
            s = logliks[kid] + cfg.char_lm_weight * lm.score_nats(ctx, char_to_token(kid))
            if s > best_score:
                best_score, best_key = s, kid
        out.append(best_key)
    return "".join(out)


def completed_words(text: str) -> tuple[str, ...]:
    """Words closed by a boundary character, in order."""
    words = []
    cur = ""
    for ch in text:
        if ch in WORD_CLOSERS:
            if cur:
                words.append(cur)
            cur = ""
        else:
            cur += ch
    return tuple(words)


def _expand_append(hyp: Hypothesis, loglik: dict[str, float], consumes: bool,
                   cfg: DecoderConfig, trie: Trie, char_lm: _LmCache,
                   word_lm: _LmCache, context: str, op: str,
                   lam: float = 0.0) -> list[Hypothesis]:
    """Character-appending expansions of one hypothesis.

    A match (consumes=True) pays the observation's location likelihood; an
    omission pays the fixed penalty lam instead. Candidate characters are
    the trie children of the current word position plus, when the word is
    closeable, the word closers.
    """
    out = []
    ctx = _char_context(context + hyp.text, char_lm.order)
    node = hyp.node if hyp.word else trie.root

    def emit(ch, base, new_word, new_node, closes):
        s = hyp.log_score + base + cfg.char_lm_weight * char_lm.score_nats(
            ctx, char_to_token(ch))
        words = hyp.words
        if closes and hyp.word:
            s += cfg.word_lm_weight * word_lm.score_nats(hyp.words, hyp.word)
            words = hyp.words + (hyp.word,)
        out.append(Hypothesis(
            text=hyp.text + ch, word=new_word, node=new_node, words=words,
            log_score=s, op_trace=hyp.op_trace + ((op, ch),)))

    for ch, child in node.sorted_children():
        if ch not in loglik:
            continue  # vocab char without a key cannot be typed or intended
        emit(ch, loglik[ch] if consumes else lam, hyp.word + ch, child, closes=False)
    if not hyp.word or trie.is_word(node):
        for ch in WORD_CLOSERS:
            if ch not in loglik:
                continue
            emit(ch, loglik[ch] if consumes else lam, "", None, closes=True)
    return out


def _merge_and_prune(hyps: list[Hypothesis], width: int) -> list[Hypothesis]:
    merged: dict[str, Hypothesis] = {}
    for h in hyps:
        prev = merged.get(h.text)
        if prev is None:
            merged[h.text] = h
        else:
            total = float(np.logaddexp(prev.log_score, h.log_score))
            keep = prev if prev.log_score >= h.log_score else h
            merged[h.text] = replace(keep, log_score=total)
    ranked = sorted(merged.values(), key=lambda h: (-h.log_score, h.text))
    return ranked[:width]


def beam_decode(stream, keys: KeyTouchModel, char_lm: NgramModel | None,
                word_lm: NgramModel | None, trie: Trie, cfg: DecoderConfig,
                context: str = "") -> list[tuple[str, float]]:
    """Ranked (text, log score) hypotheses for the observation stream."""
    keys.require_positive_definite()
    clm = _LmCache(char_lm)
    wlm = _LmCache(word_lm)
    key_ids = sorted(keys.gaussians)
    beam = [Hypothesis(text="", word="", node=None, words=(), log_score=0.0)]
    for obs in debounce(stream):
        loglik = key_likelihoods(obs, keys, cfg, key_ids)
        stage: list[Hypothesis] = []
        for hyp in beam:
            stage.extend(_expand_append(hyp, loglik, True, cfg, trie, clm, wlm,
                                        context, "match"))
            stage.append(replace(hyp, log_score=hyp.log_score + cfg.lambda_insertion,
                                 op_trace=hyp.op_trace + (("insertion", ""),)))
        stage = _merge_and_prune(stage, cfg.beam_width)
        # one omission round: append a character without consuming anything
        omitted: list[Hypothesis] = []
        for hyp in stage:
            omitted.extend(_expand_append(hyp, loglik, False, cfg, trie, clm, wlm,
                                          context, "omission",
                                          lam=cfg.lambda_omission))
        beam = _merge_and_prune(stage + omitted, cfg.beam_width)
    return [(h.text, h.log_score) for h in beam]


@dataclass
class SessionState:
    committed: str
    literal: str
    suggestion: str


class Session:
    """Interactive decoding session: gray literal text plus a white
    beam-search suggestion for the in-progress word.

    feed() appends one greedy character per observation and refreshes the
    suggestion eagerly; commit_space() enters the suggested word (or the
    literal once autocorrect is disabled), commit_literal() enters the
    literal verbatim, backspace() deletes one literal character and
    disables autocorrect for the current word. Single-owner mutable state.
    """

    def __init__(self, keys: KeyTouchModel, char_lm: NgramModel | None,
                 word_lm: NgramModel | None, trie: Trie, cfg: DecoderConfig):
        keys.require_positive_definite()
        self.keys = keys
        self.char_lm = char_lm
        self.word_lm = word_lm
        self.trie = trie
        self.cfg = cfg
        self.committed = ""
        self.literal = ""
        self.suggestion = ""
        self.autocorrect_disabled = False
        self._word_obs: list[TouchObservation] = []

    def state(self) -> SessionState:
        return SessionState(committed=self.committed, literal=self.literal,
                            suggestion=self.suggestion)

    def feed(self, obs: TouchObservation) -> SessionState:
        ch = greedy_decode([obs], self.keys, self.char_lm, self.cfg,
                           context=self.committed + self.literal)
        self.literal += ch
        self._word_obs.append(obs)
        self._refresh_suggestion()
        return self.state()

    def _refresh_suggestion(self):
        """Best complete vocabulary word for the current buffer.

        Beam texts over an in-progress word carry no word prior yet (the
        word has not been closed); committing on space closes it, so
        candidates are rescored with the word LM bonus the close would
        add. Hypotheses that are not complete words cannot be committed
        and are skipped; with none, the suggestion is empty.
        """
        if not self._word_obs:
            self.suggestion = ""
            return
        ranked = beam_decode(self._word_obs, self.keys, self.char_lm,
                             self.word_lm, self.trie, self.cfg,
                             context=self.committed)
        wlm = _LmCache(self.word_lm)
        prev_words = completed_words(self.committed)
        best, best_score = "", -math.inf
        for text, score in ranked:
            if not text or not self.trie.contains(text):
                continue
            s = score + self.cfg.word_lm_weight * wlm.score_nats(prev_words, text)
            if s > best_score or (s == best_score and text < best):
                best, best_score = text, s
        self.suggestion = best

    def commit_space(self) -> SessionState:
        use_literal = self.autocorrect_disabled or not self.suggestion
        word = self.literal if use_literal else self.suggestion
        self.committed += word + " "
        self._reset_word()
        return self.state()

    def commit_literal(self) -> SessionState:
        self.committed += self.literal
        self._reset_word()
        return self.state()

    def backspace(self) -> SessionState:
        if not self.literal:
            return self.state()
        self.literal = self.literal[:-1]
        if self._word_obs:
            self._word_obs.pop()
        self.autocorrect_disabled = True
        self._refresh_suggestion()
        return self.state()

    def _reset_word(self):
        self.literal = ""
        self.suggestion = ""
        self.autocorrect_disabled = False
        self._word_obs = []
