"""Bundled phrase set and default model construction.

The package ships a 561-phrase evaluation set (short lowercase English
sentences over the keyboard vocabulary, one per line) that doubles as the
default LM training corpus at desk scale. Any phrase/corpus file in the
same one-sentence-per-line format can be substituted via CLI flags.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .keyboard import KeyboardLayout, KeyTouchModel, default_layout, fit_key_models
from .lexicon import Trie
from .ngram import NgramModel, train_char_lm, train_word_lm, word_tokens

PHRASES_RESOURCE = "phrases.txt"


def bundled_phrases() -> list[str]:
    text = resources.files("touchdecode.data").joinpath(PHRASES_RESOURCE).read_text("utf-8")
    return [line.strip() for line in text.splitlines() if line.strip()]


def load_phrases(path=None) -> list[str]:
    if path is None:
        return bundled_phrases()
    with open(path, encoding="utf-8") as f:
        return [line.strip() for line in f if line.strip()]


def vocabulary_from_lines(lines) -> list[str]:
    """Unique word tokens, sorted; the trie/word-LM vocabulary."""
    words = {w for line in lines for w in word_tokens(line)}
    return sorted(words)


@dataclass(frozen=True)
class ModelBundle:
    """Everything a decoder needs, built from one corpus."""

    layout: KeyboardLayout
    keys: KeyTouchModel
    char_lm: NgramModel
    word_lm: NgramModel
    trie: Trie


def build_models(corpus_lines=None, layout: KeyboardLayout | None = None,
                 keys: KeyTouchModel | None = None,
                 char_order: int = 6, word_order: int = 3,
                 vocab_size: int = 100_000) -> ModelBundle:
    """Train the default models: char 6-gram, word trigram, trie, and the
    prior key-touch model on the default layout."""
    lines = corpus_lines if corpus_lines is not None else bundled_phrases()
    layout = layout or default_layout()
    keys = keys or fit_key_models(layout, [])
    char_lm = train_char_lm(lines, order=char_order)
    word_lm = train_word_lm(lines, order=word_order, vocab_size=vocab_size)
    vocab = vocabulary_from_lines(lines)
    alphabet = {k.id for k in layout.keys} - {" "}
    trie = Trie.build(vocab, alphabet=alphabet)
    return ModelBundle(layout=layout, keys=keys, char_lm=char_lm,
                       word_lm=word_lm, trie=trie)
