"""Seed translation dictionaries and scored word-pair evaluation sets.

Dictionaries are two-column TSV (tab or whitespace separated), UTF-8,
with '#'-prefixed comment lines ignored. Source words may repeat with
different targets: many-to-many entries are kept.
"""

from dataclasses import dataclass, field


@dataclass
class TranslationLexicon:
    pairs: list  # ordered (src_word, tgt_word) tuples, no exact duplicates
    role: str = "train"  # train | test
    skipped_lines: int = 0

    def __len__(self):
        return len(self.pairs)

    def pair_set(self):
        return set(self.pairs)


@dataclass
class ScoredWordPairs:
    triples: list = field(default_factory=list)  # (src, tgt, gold_score)
    skipped_lines: int = 0

    def __len__(self):
        return len(self.triples)


def load_lexicon(path, role="train"):
    """Load a two-column dictionary, deduplicated and order-preserving.
    Lines without exactly two columns are skipped and counted."""
    pairs = []
    seen = set()
    skipped = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cols = line.split("\t") if "\t" in line else line.split()
            if len(cols) != 2:
                skipped += 1
                continue
            pair = (cols[0], cols[1])
            if pair in seen:
                continue
            seen.add(pair)
            pairs.append(pair)
    return TranslationLexicon(pairs, role=role, skipped_lines=skipped)


def load_scored_pairs(path):
    """Load a three-column (src, tgt, score) similarity set."""
    triples = []
    skipped = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cols = line.split("\t") if "\t" in line else line.split()
            if len(cols) != 3:
                skipped += 1
                continue
            try:
                score = float(cols[2])
            except ValueError:
                skipped += 1
                continue
            triples.append((cols[0], cols[1], score))
    return ScoredWordPairs(triples, skipped_lines=skipped)


def remove_test_leakage(train, test_pairs):
    """Drop every train pair that appears in the test set, in either
    orientation (similarity test pairs are unordered). Returns the
    filtered lexicon and the removal count."""
    if isinstance(test_pairs, ScoredWordPairs):
        test = {(s, t) for s, t, _ in test_pairs.triples}
    else:
        test = set(test_pairs.pairs)
    test |= {(t, s) for s, t in test}
    kept = [p for p in train.pairs if p not in test]
    removed = len(train.pairs) - len(kept)
    return TranslationLexicon(kept, role=train.role), removed


def filter_to_vocab(lex, src_space, tgt_space):
    """Keep pairs whose words exist in both vocabularies."""
    kept = [(s, t) for s, t in lex.pairs
            if s in src_space.vocab and t in tgt_space.vocab]
    dropped = len(lex.pairs) - len(kept)
    return TranslationLexicon(kept, role=lex.role), dropped


def decouple_pairs(lex):
    """Split pairs into per-word anchors: one ('word', side) entry per
    distinct word on each side, first-occurrence order. side is
    'src' or 'tgt'. Used to pool both languages into a single
    static-to-encoder mapping problem."""
    anchors = []
    seen = set()
    for side, pick in (("src", 0), ("tgt", 1)):
        for pair in lex.pairs:
            key = (pair[pick], side)
            if key not in seen:
                seen.add(key)
                anchors.append(key)
    return anchors
