"""RIBES: rank-correlation word-order metric with precision/brevity penalties.

Each hypothesis word is aligned to a reference position by unigram matching;
words occurring more than once are disambiguated by growing context windows
(right context first, then left) and stay unaligned when no window is unique
in both sentences. The sentence score is NKT * P**alpha * BP**beta, where
NKT is the normalized Kendall tau of the aligned positions (ascending pairs
over all pairs), P is unigram precision (aligned words / hypothesis length),
and BP the brevity penalty min(1, exp(1 - r/h)). Corpus score is the mean.
"""

import math

from .common import check_pairs

ALPHA = 0.25  # precision exponent
BETA = 0.10   # brevity-penalty exponent


def _count_sublist(seq, sub):
    n, m = len(seq), len(sub)
    return sum(1 for i in range(n - m + 1) if seq[i:i + m] == sub)


def _find_sublist(seq, sub):
    m = len(sub)
    for i in range(len(seq) - m + 1):
        if seq[i:i + m] == sub:
            return i
    return -1


def word_rank_alignment(reference, hypothesis) -> list:
    """Reference positions of hypothesis words, in hypothesis order."""
    worder = []
    for i, word in enumerate(hypothesis):
        if word not in reference:
            continue
        if hypothesis.count(word) == 1 and reference.count(word) == 1:
            worder.append(reference.index(word))
            continue
        for window in range(1, len(hypothesis)):
            right = hypothesis[i:i + window + 1]
            if i + window < len(hypothesis):
                if _count_sublist(hypothesis, right) == 1 and _count_sublist(reference, right) == 1:
                    worder.append(_find_sublist(reference, right))
                    break
            left = hypothesis[i - window:i + 1]
            if window <= i:
                if _count_sublist(hypothesis, left) == 1 and _count_sublist(reference, left) == 1:
                    worder.append(_find_sublist(reference, left) + window)
                    break
    return worder


def _normalized_kendall_tau(worder, ref_len) -> float:
    n = len(worder)
    if n == 0:
        return 0.0
    if n == 1:
        # order of a single alignment is only trivially perfect when the
        # reference itself has a single word
        return 1.0 if ref_len == 1 else 0.0
    ascending = sum(1 for i in range(n - 1) for j in range(i + 1, n)
                    if worder[i] < worder[j])
    return ascending / (n * (n - 1) / 2)


def ribes_sentence(hypothesis: str, reference: str, alpha: float = ALPHA,
                   beta: float = BETA) -> float:
    hyp = hypothesis.split()
    ref = reference.split()
    if not hyp:
        return 0.0
    worder = word_rank_alignment(ref, hyp)
    nkt = _normalized_kendall_tau(worder, len(ref))
    if nkt == 0.0:
        return 0.0
    precision = len(worder) / len(hyp)
    bp = min(1.0, math.exp(1.0 - len(ref) / len(hyp)))
    return nkt * precision ** alpha * bp ** beta


def ribes_corpus(pairs, alpha: float = ALPHA, beta: float = BETA) -> float:
    """Mean sentence RIBES in [0, 1]."""
    pairs = check_pairs(pairs)
    return sum(ribes_sentence(p.hypothesis, p.reference, alpha, beta)
               for p in pairs) / len(pairs)
