"""Synthetic patterned toy corpora for tests, demos, and smoke runs.

Every language renders a shared concept inventory into its own lexicon:
Latin-script languages use per-language syllable sets, Bengali-script
languages use per-language letter sets from the Bengali Unicode block, so
script detection and grouping behave exactly as on real data. A sentence is
a concept sequence; its translation renders the same concepts in the other
language, making the mapping learnable by a tiny model. Nothing here derives
from any real corpus.
"""

import random
from pathlib import Path

from .corpus import check_lang

_LATIN_SYLLABLES = {
    "en": ("ba", "de", "ki", "lo", "mu", "ne", "po", "ra", "si", "tu"),
    "kha": ("ja", "khe", "li", "no", "pu", "re", "sho", "ti", "wa", "yn"),
    "lus": ("aw", "chi", "du", "hle", "ka", "mi", "pa", "ral", "tha", "zo"),
}
_BENGALI_LETTERS = {
    "as": "অআকখগঊতদনম",
    "mni": "ইউঙচজটডপবস",
}


def toy_word(lang: str, concept: int) -> str:
    """Deterministic word for a concept id; unique within a language.

    Base-10 digits map to syllables/letters positionally; every per-language
    syllable set is a prefix code, so concatenations cannot collide.
    """
    check_lang(lang)
    digits = []
    c = concept
    while c:
        digits.append(c % 10)
        c //= 10
    while len(digits) < 2:
        digits.append(0)
    digits.reverse()
    units = _LATIN_SYLLABLES.get(lang) or _BENGALI_LETTERS[lang]
    return "".join(units[d] for d in digits)


def toy_lexicon(lang: str, n_concepts: int = 120) -> list:
    return [toy_word(lang, c) for c in range(n_concepts)]


def toy_parallel_lines(src_lang: str, tgt_lang: str, n: int, seed: int = 0,
                       n_concepts: int = 120, min_len: int = 3,
                       max_len: int = 8):
    """n parallel sentence pairs as (source lines, target lines)."""
    rng = random.Random(seed)
    src_lines, tgt_lines = [], []
    for _ in range(n):
        length = rng.randint(min_len, max_len)
        concepts = [rng.randrange(n_concepts) for _ in range(length)]
        src_lines.append(" ".join(toy_word(src_lang, c) for c in concepts))
        tgt_lines.append(" ".join(toy_word(tgt_lang, c) for c in concepts))
    return src_lines, tgt_lines


def toy_dictionary_lines(src_lang: str, tgt_lang: str,
                         n_concepts: int = 120) -> list:
    """MUSE-format `src tgt` lines covering the whole concept inventory."""
    return [f"{toy_word(src_lang, c)} {toy_word(tgt_lang, c)}"
            for c in range(n_concepts)]


def write_toy_pair(out_dir, src_lang: str, tgt_lang: str, sizes=None,
                   seed: int = 0, n_concepts: int = 120) -> dict:
    """Write train/valid/test files for one pair; returns their paths."""
    sizes = sizes or {"train": 500, "valid": 50, "test": 50}
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for i, (split, n) in enumerate(sizes.items()):
        src_lines, tgt_lines = toy_parallel_lines(
            src_lang, tgt_lang, n, seed=seed + 7919 * i, n_concepts=n_concepts)
        src_path = out_dir / f"{split}.{src_lang}-{tgt_lang}.{src_lang}"
        tgt_path = out_dir / f"{split}.{src_lang}-{tgt_lang}.{tgt_lang}"
        src_path.write_text("\n".join(src_lines) + "\n", encoding="utf-8")
        tgt_path.write_text("\n".join(tgt_lines) + "\n", encoding="utf-8")
        paths[split] = (src_path, tgt_path)
    dict_path = out_dir / f"dict.{src_lang}-{tgt_lang}.txt"
    dict_path.write_text(
        "\n".join(toy_dictionary_lines(src_lang, tgt_lang, n_concepts)) + "\n",
        encoding="utf-8")
    paths["dictionary"] = dict_path
    return paths
