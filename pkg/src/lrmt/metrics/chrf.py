"""chrF: character (and optional word) n-gram F-beta, corpus-aggregated.

Statistics for each order are summed over the corpus; each order yields an
F-beta score (recall weighted beta-fold), and the final score averages the
per-order F values. Empty-count sides smooth to a vanishing epsilon, and
orders with no hypothesis or reference n-grams anywhere do not count toward
the average. Whitespace is stripped before character n-grams are taken, so
word_order=0 ignores all spacing differences. chrF2 is (6, 0, 2); chrF++ is
(6, 2, 2).
"""

from collections import Counter
from dataclasses import dataclass

from .common import check_pairs

_EPS = 1e-16


@dataclass(frozen=True)
class ChrfConfig:
    char_order: int = 6
    word_order: int = 0
    beta: float = 2.0

    def __post_init__(self):
        if self.char_order < 1 or self.word_order < 0 or self.beta <= 0:
            raise ValueError(f"bad chrF configuration {self}")


CHRF2 = ChrfConfig(6, 0, 2.0)
CHRF_PP = ChrfConfig(6, 2, 2.0)


def _char_ngrams(text, n):
    s = "".join(text.split())
    return Counter(s[i:i + n] for i in range(len(s) - n + 1))


def _word_ngrams(text, n):
    w = text.split()
    return Counter(tuple(w[i:i + n]) for i in range(len(w) - n + 1))


def chrf_corpus(pairs, cfg: ChrfConfig = CHRF2) -> float:
    """Corpus chrF in [0, 100]."""
    pairs = check_pairs(pairs)
    n_orders = cfg.char_order + cfg.word_order
    hyp_totals = [0] * n_orders
    ref_totals = [0] * n_orders
    matches = [0] * n_orders
    for pair in pairs:
        for i in range(cfg.char_order):
            h = _char_ngrams(pair.hypothesis, i + 1)
            r = _char_ngrams(pair.reference, i + 1)
            hyp_totals[i] += sum(h.values())
            ref_totals[i] += sum(r.values())
            matches[i] += sum((h & r).values())
        for j in range(cfg.word_order):
            h = _word_ngrams(pair.hypothesis, j + 1)
            r = _word_ngrams(pair.reference, j + 1)
            hyp_totals[cfg.char_order + j] += sum(h.values())
            ref_totals[cfg.char_order + j] += sum(r.values())
            matches[cfg.char_order + j] += sum((h & r).values())

    factor = cfg.beta ** 2
    score = 0.0
    effective_orders = 0
    for i in range(n_orders):
        precision = matches[i] / hyp_totals[i] if hyp_totals[i] > 0 else _EPS
        recall = matches[i] / ref_totals[i] if ref_totals[i] > 0 else _EPS
        denom = factor * precision + recall
        score += ((1 + factor) * precision * recall / denom) if denom > 0 else _EPS
        if hyp_totals[i] > 0 or ref_totals[i] > 0:
            effective_orders += 1
    if effective_orders == 0:
        return 0.0
    return 100.0 * score / effective_orders
