import random
import string

from touchdecode.lexicon import Trie


class TestBuild:
    def test_word_and_prefix_can_coincide(self):
        trie = Trie.build(["a", "ab"])
        assert trie.word_count == 2
        node_a = trie.lookup("a")
        assert trie.is_word(node_a) and node_a.children  # terminal and internal

    def test_empty_vocabulary_accepts_nothing(self):
        trie = Trie.build([])
        assert trie.word_count == 0
        assert not trie.accepts_prefix("a")
        assert trie.accepts_prefix("")  # the empty prefix is always valid

    def test_out_of_alphabet_words_rejected_with_report(self):
        trie = Trie.build(["cat", "naïve", "dog"], alphabet=string.ascii_lowercase)
        assert trie.word_count == 2
        assert trie.rejected == ("naïve",)

    def test_duplicates_counted_once(self):
        trie = Trie.build(["cat", "cat"])
        assert trie.word_count == 1

    def test_membership_matches_set_oracle(self):
        rng = random.Random(31)
        words = {"".join(rng.choices(string.ascii_lowercase[:6], k=rng.randint(1, 8)))
                 for _ in range(100)}
        trie = Trie.build(sorted(words))
        for _ in range(10_000):
            probe = "".join(rng.choices(string.ascii_lowercase[:6], k=rng.randint(1, 8)))
            assert trie.contains(probe) == (probe in words)


class TestStep:
    def test_walk_to_terminal(self):
        trie = Trie.build(["cat", "car"])
        node = trie.root
        for c in "cat":
            node = trie.step(node, c)
        assert trie.is_word(node)

    def test_dead_end_is_none(self):
        trie = Trie.build(["cat", "car"])
        node = trie.step(trie.root, "c")
        assert trie.step(node, "z") is None
        assert trie.step(None, "a") is None

    def test_random_walk_matches_prefix_scan(self):
        rng = random.Random(32)
        words = ["".join(rng.choices("abc", k=rng.randint(1, 5))) for _ in range(40)]
        trie = Trie.build(words)
        vocab = set(words)
        for _ in range(2000):
            prefix = "".join(rng.choices("abcd", k=rng.randint(0, 6)))
            scan_hit = any(w.startswith(prefix) for w in vocab)
            assert trie.accepts_prefix(prefix) == scan_hit

    def test_sorted_children_iteration(self):
        trie = Trie.build(["cb", "ca", "cc"])
        node = trie.lookup("c")
        assert [c for c, _ in node.sorted_children()] == ["a", "b", "c"]


class TestPrefixProperty:
    def test_prefix_accepted_iff_some_word_starts_with_it(self):
        rng = random.Random(33)
        words = ["".join(rng.choices("xyz", k=rng.randint(1, 6))) for _ in range(30)]
        trie = Trie.build(words)
        probes = {w[:k] for w in words for k in range(len(w) + 1)}
        probes |= {"".join(rng.choices("wxyz", k=rng.randint(1, 6))) for _ in range(200)}
        for s in probes:
            assert trie.accepts_prefix(s) == any(w.startswith(s) for w in set(words))
