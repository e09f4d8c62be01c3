"""Translation edit rate: DP edit distance plus greedy phrase-shift search.

Words are whitespace tokens. A shift candidate moves a hypothesis phrase of
up to 10 words over a distance of up to 50 positions onto an exact match in
the reference; each applied shift costs one edit. The search greedily takes
the shift that most reduces the remaining edit distance (ties: longer phrase,
then smaller source index, then smaller destination index) and stops when no
shift strictly reduces it. TER = 100 * total edits / total reference words.
"""

from .common import check_pairs

MAX_SHIFT_SIZE = 10
MAX_SHIFT_DIST = 50


def _edit_distance(a, b):
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, y in enumerate(b, start=1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y))
        prev = cur
    return prev[-1]


def _shift_candidates(hyp, ref):
    for i in range(len(hyp)):
        for length in range(1, min(MAX_SHIFT_SIZE, len(hyp) - i) + 1):
            phrase = hyp[i:i + length]
            for j in range(len(ref) - length + 1):
                if j == i or abs(i - j) > MAX_SHIFT_DIST:
                    continue
                if ref[j:j + length] == phrase:
                    yield i, j, length


def _apply_shift(hyp, i, j, length):
    phrase = hyp[i:i + length]
    rest = hyp[:i] + hyp[i + length:]
    return rest[:j] + phrase + rest[j:]


def ter_sentence_edits(hypothesis: str, reference: str):
    """Returns (edits, reference word count) for one segment pair."""
    hyp = hypothesis.split()
    ref = reference.split()
    shifts = 0
    distance = _edit_distance(hyp, ref)
    while distance > 0:
        best = None
        for i, j, length in _shift_candidates(hyp, ref):
            gain = distance - _edit_distance(_apply_shift(hyp, i, j, length), ref)
            key = (gain, length, -i, -j)
            if gain >= 1 and (best is None or key > best[0]):
                best = (key, i, j, length)
        if best is None:
            break
        _, i, j, length = best
        hyp = _apply_shift(hyp, i, j, length)
        distance = _edit_distance(hyp, ref)
        shifts += 1
    return shifts + distance, len(ref)


def ter_corpus(pairs) -> float:
    """Corpus TER as a percentage (0 = perfect; can exceed 100)."""
    pairs = check_pairs(pairs)
    edits = 0
    words = 0
    for pair in pairs:
        e, w = ter_sentence_edits(pair.hypothesis, pair.reference)
        edits += e
        words += w
    return 100.0 * edits / words
