"""Dictionary-based aligned code-switching augmentation.

Source words found in a bilingual dictionary are independently replaced, with
probability p, by a uniformly sampled translation alternative; the target side
is never touched. Replacement decisions come from a counter-based hash keyed
by (seed, pair index, word index), so augmentation of one sentence does not
depend on how the data is ordered or batched.
"""

import hashlib
import logging
from dataclasses import dataclass

from .corpus import SentencePair, check_lang

log = logging.getLogger(__name__)


class DictionaryError(ValueError):
    pass


class MalformedLine(DictionaryError):
    pass


class EmptyDictionary(DictionaryError):
    pass


class LanguageMismatch(DictionaryError):
    pass


@dataclass
class BilingualDictionary:
    entries: dict           # source word -> list of target words, file order
    src_lang: str
    tgt_lang: str
    lowercase: bool = False  # fold lookups for inconsistently cased sources

    def __post_init__(self):
        check_lang(self.src_lang)
        check_lang(self.tgt_lang)

    def lookup(self, word: str):
        return self.entries.get(word.lower() if self.lowercase else word)

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class RasConfig:
    substitution_prob: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.substitution_prob <= 1.0:
            raise ValueError(f"substitution probability {self.substitution_prob} not in [0, 1]")


def load_dictionary(path, src_lang: str, tgt_lang: str,
                    lowercase: bool = False) -> BilingualDictionary:
    """Load a two-column `src tgt` dictionary file (MUSE ground-truth format).

    Words with the same source aggregate into one entry, alternatives kept in
    file order. Multiword targets (lines with more than two fields) would
    break the 1:1 substitution invariant and are dropped with a warning.
    """
    entries = {}
    dropped = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) == 1:
                raise MalformedLine(f"{path}:{lineno}: expected `src tgt`, got {line.strip()!r}")
            if len(fields) > 2:
                dropped += 1
                continue
            src, tgt = fields
            if lowercase:
                src = src.lower()
            entries.setdefault(src, [])
            if tgt not in entries[src]:
                entries[src].append(tgt)
    if dropped:
        log.warning("%s: dropped %d multiword entries", path, dropped)
    if not entries:
        raise EmptyDictionary(f"{path} contains no usable entries")
    return BilingualDictionary(entries, src_lang, tgt_lang, lowercase)


def invert_dictionary(dictionary: BilingualDictionary) -> BilingualDictionary:
    """Swap translation direction, preserving first-seen alternative order."""
    inverted = {}
    for src, targets in dictionary.entries.items():
        for tgt in targets:
            inverted.setdefault(tgt, [])
            if src not in inverted[tgt]:
                inverted[tgt].append(src)
    return BilingualDictionary(inverted, dictionary.tgt_lang, dictionary.src_lang,
                               dictionary.lowercase)


def _word_draws(seed: int, pair_index: int, word_index: int):
    """Two uniform [0,1) draws derived from a stable counter-based hash."""
    digest = hashlib.blake2b(
        f"{seed}:{pair_index}:{word_index}".encode(), digest_size=16).digest()
    a = int.from_bytes(digest[:8], "little") / 2.0 ** 64
    b = int.from_bytes(digest[8:], "little") / 2.0 ** 64
    return a, b


def ras_substitute(pair: SentencePair, dictionary: BilingualDictionary,
                   cfg: RasConfig, pair_index: int = 0) -> SentencePair:
    """Apply aligned code-switching to one sentence pair's source side.

    Word order and token count are preserved; uncovered words and the target
    sentence are never altered.
    """
    if dictionary.src_lang != pair.src_lang:
        raise LanguageMismatch(
            f"dictionary is {dictionary.src_lang}->{dictionary.tgt_lang} but pair "
            f"source is {pair.src_lang}")
    words = pair.src_text.split()
    out = []
    changed = False
    for wi, word in enumerate(words):
        alternatives = dictionary.lookup(word)
        if alternatives:
            u, v = _word_draws(cfg.seed, pair_index, wi)
            if u < cfg.substitution_prob:
                out.append(alternatives[int(v * len(alternatives))])
                changed = True
                continue
        out.append(word)
    if not changed:
        return pair
    return SentencePair(pair.src_lang, pair.tgt_lang, " ".join(out), pair.tgt_text)
