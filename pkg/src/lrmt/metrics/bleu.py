"""Corpus BLEU with mteval-13a tokenization and exponential smoothing.

Counts clipped n-gram matches for orders 1-4 over the whole corpus, applies
the brevity penalty exp(1 - r/c) for c < r, and replaces zero-match
precisions by 1 / (2^k * total) with k incrementing per zero order. An order
with no hypothesis n-grams at all makes the score 0 (no effective-order
rescaling, matching the `eff:no` convention).
"""

import math
import re
from collections import Counter

from .common import check_pairs

MAX_ORDER = 4

_13A_RULES = (
    (re.compile(r"<skipped>"), ""),
    (re.compile(r"-\n"), ""),
    (re.compile(r"\n"), " "),
    (re.compile(r"&quot;"), '"'),
    (re.compile(r"&amp;"), "&"),
    (re.compile(r"&lt;"), "<"),
    (re.compile(r"&gt;"), ">"),
)
_13A_SPLITS = (
    # split punctuation/symbols; keep period/comma attached inside numbers
    (re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])"), r" \1 "),
    (re.compile(r"([^0-9])([\.,])"), r"\1 \2 "),
    (re.compile(r"([\.,])([^0-9])"), r" \1 \2"),
    (re.compile(r"([0-9])(-)"), r"\1 \2 "),
)


def tokenize_13a(line: str) -> list:
    """The WMT mteval-v13a tokenizer (language-independent branch)."""
    norm = line
    for pattern, repl in _13A_RULES:
        norm = pattern.sub(repl, norm)
    norm = f" {norm} "
    for pattern, repl in _13A_SPLITS:
        norm = pattern.sub(repl, norm)
    return norm.split()


def _ngram_counts(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu_corpus(pairs) -> float:
    """Corpus BLEU in [0, 100]."""
    pairs = check_pairs(pairs)
    correct = [0] * MAX_ORDER
    total = [0] * MAX_ORDER
    hyp_len = 0
    ref_len = 0
    for pair in pairs:
        hyp = tokenize_13a(pair.hypothesis)
        ref = tokenize_13a(pair.reference)
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, MAX_ORDER + 1):
            hyp_ngrams = _ngram_counts(hyp, n)
            ref_ngrams = _ngram_counts(ref, n)
            correct[n - 1] += sum((hyp_ngrams & ref_ngrams).values())
            total[n - 1] += sum(hyp_ngrams.values())

    if hyp_len == 0:
        return 0.0
    smooth = 1.0
    log_sum = 0.0
    for n in range(1, MAX_ORDER + 1):
        if total[n - 1] == 0:
            return 0.0
        if correct[n - 1] == 0:
            smooth *= 2.0
            precision = 1.0 / (smooth * total[n - 1])
        else:
            precision = correct[n - 1] / total[n - 1]
        log_sum += math.log(precision)
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * bp * math.exp(log_sum / MAX_ORDER)
