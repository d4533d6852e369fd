"""Prefix trie over the word vocabulary, constraining beam hypotheses."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class TrieNode:
    children: dict[str, "TrieNode"] = field(default_factory=dict)
    is_word: bool = False

    def sorted_children(self):
        """Deterministic iteration order; beam tie-breaking relies on it."""
        for ch in sorted(self.children):
            yield ch, self.children[ch]


@dataclass
class Trie:
    root: TrieNode = field(default_factory=TrieNode)
    word_count: int = 0
    rejected: tuple[str, ...] = ()

    @classmethod
    def build(cls, words, alphabet=None) -> "Trie":
        """Trie over unique words; words with out-of-alphabet characters
        are rejected and reported via .rejected."""
        trie = cls()
        allowed = set(alphabet) if alphabet is not None else None
        rejected = []
        seen = set()
        for word in words:
            if word in seen or not word:
                continue
            if allowed is not None and any(c not in allowed for c in word):
                rejected.append(word)
                continue
            seen.add(word)
            node = trie.root
            for c in word:
                node = node.children.setdefault(c, TrieNode())
            node.is_word = True
            trie.word_count += 1
        trie.rejected = tuple(rejected)
        return trie

    def step(self, node: TrieNode | None, char: str) -> TrieNode | None:
        """Child for char, or None when the extended prefix leads nowhere."""
        if node is None:
            return None
        return node.children.get(char)

    def lookup(self, prefix: str) -> TrieNode | None:
        node = self.root
        for c in prefix:
            node = self.step(node, c)
            if node is None:
                return None
        return node

    def is_word(self, node: TrieNode | None) -> bool:
        return node is not None and node.is_word

    def accepts_prefix(self, prefix: str) -> bool:
        return self.lookup(prefix) is not None

    def contains(self, word: str) -> bool:
        return self.is_word(self.lookup(word))


def load_vocabulary(path) -> list[str]:
    """Vocabulary file: UTF-8, one word per line, blanks skipped."""
    with open(path, encoding="utf-8") as f:
        return [line.strip() for line in f if line.strip()]
