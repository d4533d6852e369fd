"""Evaluation metrics for touch-event prediction and text entry.

Event alignment follows the edit-distance idea over finger-id sequences:
minimize edit cost, then maximize matched pairs (the counts missed, ghost
and finger-wrong are fully determined by that pair of objectives).
Aligned pairs whose frame offset falls outside the accepted window count
as one miss plus one ghost instead of a match.

Undefined metrics (empty denominators) are reported as None, never as a
silent zero.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .gaussians import log_pdf
from .keyboard import KeyboardLayout, contact_key, nearest_key

FRAME_MS = 1000.0 / 30.0
ACCEPT_BEFORE = 5   # frames a prediction may lead the contact
ACCEPT_AFTER = 15   # frames it may trail


@dataclass(frozen=True)
class AlignmentReport:
    """Outcome of aligning predicted events against ground truth."""

    pairs: tuple[tuple[int, int], ...]       # (predicted idx, truth idx)
    offsets: tuple[int, ...]                 # predicted frame - truth frame
    finger_pairs: tuple[tuple[int, int], ...]  # (truth finger, predicted finger)
    missed: int
    ghosts: int
    window: tuple[int, int]
    out_of_window: int = 0

    @property
    def matched(self) -> int:
        return len(self.pairs)

    @property
    def finger_correct(self) -> int:
        return sum(1 for t, p in self.finger_pairs if t == p)

    @property
    def finger_wrong(self) -> int:
        return sum(1 for t, p in self.finger_pairs if t != p)


def align_events(predicted, truth,
                 window: tuple[int, int] = (-ACCEPT_BEFORE, ACCEPT_AFTER)
                 ) -> AlignmentReport:
    """Levenshtein-style alignment of two frame-ordered event sequences.

    Events need .frame and .finger. DP value is (edit cost, -matches),
    minimized lexicographically; backtrace prefers match over ghost over
    miss so the pairing is deterministic.
    """
    P, T = len(predicted), len(truth)
    INF = (10 ** 9, 0)
    val = [[INF] * (T + 1) for _ in range(P + 1)]
    val[0][0] = (0, 0)
    for i in range(1, P + 1):
        val[i][0] = (i, 0)
    for j in range(1, T + 1):
        val[0][j] = (j, 0)
    for i in range(1, P + 1):
        pf = predicted[i - 1].finger
        for j in range(1, T + 1):
            sub = 0 if pf == truth[j - 1].finger else 1
            diag = (val[i - 1][j - 1][0] + sub, val[i - 1][j - 1][1] - 1)
            up = (val[i - 1][j][0] + 1, val[i - 1][j][1])      # ghost
            left = (val[i][j - 1][0] + 1, val[i][j - 1][1])    # miss
            val[i][j] = min(diag, up, left)

    pairs: list[tuple[int, int]] = []
    i, j = P, T
    while i > 0 or j > 0:
        cur = val[i][j]
        if i > 0 and j > 0:
            sub = 0 if predicted[i - 1].finger == truth[j - 1].finger else 1
            if cur == (val[i - 1][j - 1][0] + sub, val[i - 1][j - 1][1] - 1):
                pairs.append((i - 1, j - 1))
                i, j = i - 1, j - 1
                continue
        if i > 0 and cur == (val[i - 1][j][0] + 1, val[i - 1][j][1]):
            i -= 1
            continue
        j -= 1
    pairs.reverse()

    kept: list[tuple[int, int]] = []
    out_of_window = 0
    for pi, tj in pairs:
        off = predicted[pi].frame - truth[tj].frame
        if window[0] <= off <= window[1]:
            kept.append((pi, tj))
        else:
            out_of_window += 1  # reclassified: one miss plus one ghost
    missed = T - len(pairs) + out_of_window
    ghosts = P - len(pairs) + out_of_window
    return AlignmentReport(
        pairs=tuple(kept),
        offsets=tuple(predicted[pi].frame - truth[tj].frame for pi, tj in kept),
        finger_pairs=tuple((truth[tj].finger, predicted[pi].finger)
                           for pi, tj in kept),
        missed=missed, ghosts=ghosts, window=window,
        out_of_window=out_of_window)


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def _f1(p: float | None, r: float | None) -> float | None:
    if p is None or r is None or p + r == 0:
        return None
    return 2 * p * r / (p + r)


@dataclass(frozen=True)
class ClassificationScores:
    touch_precision: float | None
    touch_recall: float | None
    touch_f1: float | None
    finger_precision: float | None
    finger_recall: float | None
    finger_f1: float | None


def classification_scores(report: AlignmentReport) -> ClassificationScores:
    """Touch-detection P/R/F1 plus macro-averaged finger scores.

    Finger scores are computed over matched pairs only; per-class values
    with empty denominators are excluded from the macro average.
    """
    m = report.matched
    tp = _ratio(m, m + report.ghosts)
    tr = _ratio(m, m + report.missed)
    per_p, per_r, per_f = [], [], []
    truth_count = Counter(t for t, _ in report.finger_pairs)
    pred_count = Counter(p for _, p in report.finger_pairs)
    correct = Counter(t for t, p in report.finger_pairs if t == p)
    for c in range(10):
        p = _ratio(correct[c], pred_count[c])
        r = _ratio(correct[c], truth_count[c])
        if p is not None:
            per_p.append(p)
        if r is not None:
            per_r.append(r)
        f = _f1(p, r)
        if f is not None:
            per_f.append(f)
    return ClassificationScores(
        touch_precision=tp, touch_recall=tr, touch_f1=_f1(tp, tr),
        finger_precision=float(np.mean(per_p)) if per_p else None,
        finger_recall=float(np.mean(per_r)) if per_r else None,
        finger_f1=float(np.mean(per_f)) if per_f else None)


def temporal_offset(report: AlignmentReport, d: int = 2,
                    frame_ms: float = FRAME_MS) -> float | None:
    """Mean (predicted - truth - d) frames in ms over matched pairs."""
    if not report.offsets:
        return None
    return float(np.mean([(off - d) * frame_ms for off in report.offsets]))


def cher(decoded: str, target: str) -> float | None:
    """Levenshtein(decoded, target) / len(target); None for empty target
    unless both are empty."""
    if not target:
        return 0.0 if not decoded else None
    return kernels.levenshtein(decoded, target) / len(target)


def coer(observations, truth_events, layout: KeyboardLayout,
         window: tuple[int, int] = (-ACCEPT_BEFORE, ACCEPT_AFTER)) -> float | None:
    """Fraction of matched events where the key nearest the estimated
    location differs from the key containing the true contact.

    Truth contacts landing in inter-key gaps have no contact key and are
    excluded from the denominator.
    """
    report = align_events(observations, truth_events, window=window)
    total = 0
    wrong = 0
    for pi, tj in report.pairs:
        true_key = contact_key(layout, truth_events[tj].contact)
        if true_key is None:
            continue
        total += 1
        if nearest_key(layout, observations[pi].location.mean) != true_key:
            wrong += 1
    return _ratio(wrong, total)


def nll_report(observations, truth_events,
               window: tuple[int, int] = (-ACCEPT_BEFORE, ACCEPT_AFTER)) -> float | None:
    """Mean negative log-likelihood of true contacts under the predicted
    location distributions, over matched events."""
    report = align_events(observations, truth_events, window=window)
    if not report.pairs:
        return None
    vals = [-log_pdf(observations[pi].location, truth_events[tj].contact)
            for pi, tj in report.pairs]
    return float(np.mean(vals))


# ---------------------------------------------------------------------------
# Text-entry metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Keystroke:
    time: float  # seconds
    key: str     # single character, or "backspace"


@dataclass(frozen=True)
class TextEntryStats:
    wpm: float | None
    uer: float | None
    cer: float | None
    transcribed: str
    correct: int
    incorrect_not_fixed: int
    incorrect_fixed: int
    fixes: int


def replay_keystrokes(log) -> tuple[str, int, int]:
    """Final text, erased-character count, backspace count."""
    text: list[str] = []
    erased = 0
    fixes = 0
    for ks in log:
        if ks.key == "backspace":
            fixes += 1
            if text:
                text.pop()
                erased += 1
        else:
            text.append(ks.key)
    return "".join(text), erased, fixes


def error_decomposition(transcribed: str, target: str, erased: int
                        ) -> tuple[int, int, int]:
    """(C, INF, IF): INF is the transcribed-vs-target edit distance, C the
    remaining correct characters, IF the erased-character count."""
    inf = kernels.levenshtein(transcribed, target)
    c = max(len(target), len(transcribed)) - inf
    return c, inf, erased


def words_per_minute(n_chars: int, first_time: float, last_time: float) -> float | None:
    """((chars - 1) / 5) words over the first-to-last keystroke interval."""
    minutes = (last_time - first_time) / 60.0
    if minutes <= 0:
        return None
    return ((n_chars - 1) / 5.0) / minutes


def text_entry_stats(log, target: str) -> TextEntryStats:
    """WPM and the standard keystroke-log error decomposition.

    WPM is undefined below two keystrokes; UER = INF/(C+INF+IF) and
    CER = IF/(C+INF+IF).
    """
    transcribed, erased, fixes = replay_keystrokes(log)
    c, inf, if_ = error_decomposition(transcribed, target, erased)
    denom = c + inf + if_
    wpm = None
    if len(log) >= 2:
        wpm = words_per_minute(len(transcribed), log[0].time, log[-1].time)
    return TextEntryStats(
        wpm=wpm,
        uer=_ratio(inf, denom),
        cer=_ratio(if_, denom),
        transcribed=transcribed,
        correct=c, incorrect_not_fixed=inf, incorrect_fixed=if_,
        fixes=fixes)


# ---------------------------------------------------------------------------
# Report formatting
# ---------------------------------------------------------------------------

def format_table(rows: list[dict], columns: list[str] | None = None) -> str:
    """Aligned plain-text table; None renders as 'n/a'."""
    if not rows:
        return ""
    columns = columns or list(rows[0])

    def cell(v):
        if v is None:
            return "n/a"
        if isinstance(v, float):
            return f"{v:.4f}"
        return str(v)

    grid = [columns] + [[cell(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(row[i]) for row in grid) for i in range(len(columns))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
             for row in grid]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)
