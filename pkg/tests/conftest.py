import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # oracles.py importable

from lrmt.bpe import train_bpe
from lrmt.corpus import ParallelCorpus, SentencePair
from lrmt.toydata import toy_parallel_lines

SPECIALS = ["<pad>", "<bos>", "<eos>", "<unk>",
            "<2en>", "<2as>", "<2kha>", "<2lus>", "<2mni>"]


def toy_corpus(src_lang, tgt_lang, n, seed, n_concepts=120, split="train"):
    src_lines, tgt_lines = toy_parallel_lines(src_lang, tgt_lang, n, seed=seed,
                                              n_concepts=n_concepts)
    pairs = [SentencePair(src_lang, tgt_lang, s, t)
             for s, t in zip(src_lines, tgt_lines)]
    return ParallelCorpus(pairs, split)


@pytest.fixture(scope="session")
def toy_enkha():
    return toy_corpus("en", "kha", 200, seed=21)


@pytest.fixture(scope="session")
def toy_enkha_dev():
    return toy_corpus("en", "kha", 30, seed=500, split="valid")


@pytest.fixture(scope="session")
def toy_bpe(toy_enkha):
    lines = [p.src_text for p in toy_enkha.pairs] + [p.tgt_text for p in toy_enkha.pairs]
    return train_bpe(lines, 700, SPECIALS)


@pytest.fixture(scope="session")
def golden():
    import json
    path = Path(__file__).parent / "data" / "golden_metrics.json"
    return json.loads(path.read_text(encoding="utf-8"))
