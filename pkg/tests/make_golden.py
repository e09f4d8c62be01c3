"""Generate the frozen 50-case metric golden corpus.

Run once (python tests/make_golden.py); the output JSON is committed. Every
expected value is computed by the independent oracles in tests/oracles.py,
never by the package implementations. Cases cover identity, word drops and
substitutions, reorderings (exercising TER shifts and RIBES rank
correlation), punctuation and digits (13a tokenization), Bengali script,
length mismatches, empty hypotheses, and disjoint pairs.
"""

import json
import random
from pathlib import Path

from oracles import oracle_bleu, oracle_chrf, oracle_ribes, oracle_ter

OUT = Path(__file__).parent / "data" / "golden_metrics.json"
SEED = 20240801

LATIN = ["river", "stone", "moon", "basket", "walks", "sings", "green",
         "hill", "rice", "cloud", "fire", "road", "bird", "slowly", "market",
         "rain", "child", "speaks", "old", "boat"]
BENGALI = ["অমার", "নদী", "পাহাড়",
           "বাতি", "খান", "মেঘ",
           "সাগর", "দিন"]
PUNCT_TAIL = [".", "!", "?", ","]


def _sentence(rng, pool, min_len=4, max_len=11):
    length = rng.randint(min_len, max_len)
    words = rng.sample(pool, min(length, len(pool)))
    if rng.random() < 0.4:
        words[-1] = words[-1] + rng.choice(PUNCT_TAIL)
    if rng.random() < 0.25:
        words.insert(rng.randrange(len(words)), str(rng.randint(1, 2024)))
    return " ".join(words)


def _perturb(rng, ref):
    words = ref.split()
    kind = rng.random()
    if kind < 0.15:
        return ref  # identical
    if kind < 0.30:  # local swap: one shift for TER, order error for RIBES
        if len(words) > 2:
            i = rng.randrange(len(words) - 1)
            words[i], words[i + 1] = words[i + 1], words[i]
        return " ".join(words)
    if kind < 0.45:  # move a phrase
        if len(words) > 3:
            i = rng.randrange(len(words) - 1)
            phrase = words[i:i + 2]
            rest = words[:i] + words[i + 2:]
            j = rng.randrange(len(rest) + 1)
            words = rest[:j] + phrase + rest[j:]
        return " ".join(words)
    if kind < 0.65:  # substitutions
        for _ in range(rng.randint(1, 2)):
            words[rng.randrange(len(words))] = rng.choice(LATIN + BENGALI)
        return " ".join(words)
    if kind < 0.80:  # drop words
        keep = [w for w in words if rng.random() > 0.3]
        return " ".join(keep) if keep else words[0]
    if kind < 0.90:  # repeat a word (no longer unique for RIBES alignment)
        w = rng.choice(words)
        words.insert(rng.randrange(len(words)), w)
        return " ".join(words)
    return _sentence(rng, LATIN + BENGALI)  # unrelated


def build_cases():
    rng = random.Random(SEED)
    cases = []
    # hand-picked boundary cases first
    cases.append(("the cat sat on the mat .", "the cat sat on the mat ."))
    cases.append(("", "nothing aligns with an empty hypothesis"))
    cases.append(("zebra quartz", "river stone moon"))
    cases.append(("stone river", "river stone"))
    cases.append(("c a b", "a b c"))
    while len(cases) < 50:
        pool = BENGALI if rng.random() < 0.2 else LATIN
        ref = _sentence(rng, pool)
        hyp = _perturb(rng, ref)
        cases.append((hyp, ref))
    return cases


def score_all(pairs):
    return {
        "BLEU": oracle_bleu(pairs),
        "chrF2": oracle_chrf(pairs, 6, 0, 2.0),
        "chrF++": oracle_chrf(pairs, 6, 2, 2.0),
        "TER": oracle_ter(pairs),
        "RIBES": oracle_ribes(pairs),
    }


def main():
    cases = build_cases()
    # the identity panel must be exact, so every reference needs to
    # self-align fully under the RIBES context rules
    for _, ref in cases:
        assert oracle_ribes([(ref, ref)]) == 1.0, f"ref not self-alignable: {ref!r}"
    blocks = {f"block_{i}": list(range(i * 10, (i + 1) * 10)) for i in range(5)}
    payload = {
        "seed": SEED,
        "cases": [{"hyp": h, "ref": r} for h, r in cases],
        "expected": {"corpus": score_all(cases)},
    }
    for name, idxs in blocks.items():
        payload["expected"][name] = score_all([cases[i] for i in idxs])
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True) + "\n",
                   encoding="utf-8")
    print(f"wrote {OUT} with {len(cases)} cases")
    for metric, value in payload["expected"]["corpus"].items():
        print(f"  {metric:7s} {value:.6f}")


if __name__ == "__main__":
    main()
