"""Greedy and beam-search decoding over a trained model.

Scores are sum-of-logprobs divided by length**alpha, where length counts
every generated token including the terminating eos. Hypotheses cut off at
max_len score over the tokens actually generated. Returned token lists carry
neither bos nor eos.
"""

import math
from dataclasses import dataclass

import numpy as np

from .model import (EmptySource, ModelConfig, Parameters, _log_softmax,
                    decoder_logits, encode_source)


@dataclass(frozen=True)
class Hypothesis:
    ids: tuple    # generated tokens, eos stripped
    score: float  # logprob / length**alpha
    logprob: float


def _hyp_score(logprob: float, length: int, alpha: float) -> float:
    return logprob / (length ** alpha) if alpha != 0.0 else logprob


def beam_decode(params: Parameters, cfg: ModelConfig, src_ids, beam: int,
                max_len: int, length_penalty: float = 0.0, *, bos_id: int,
                eos_id: int, pad_id: int) -> list:
    """Beam search over one source sentence; returns Hypotheses sorted by score.

    Each step keeps the `beam` best continuations; those ending in eos move
    to the finished pool, the rest stay active. beam=1 therefore reproduces
    step-wise argmax decoding, and with beam >= vocab**max_len every
    generation trace is explored, making the search exhaustive.
    """
    if beam < 1:
        raise ValueError("beam must be >= 1")
    src_ids = list(src_ids)
    if not src_ids:
        raise EmptySource("cannot decode an empty source")
    src = np.array([src_ids], dtype=np.int64)
    enc_out, src_mask = encode_source(params, cfg, src, pad_id)

    beams = [((), 0.0)]  # (generated ids, cumulative logprob)
    finished = []
    for step in range(max_len):
        prefixes = np.full((len(beams), step + 1), bos_id, dtype=np.int64)
        for bi, (ids, _) in enumerate(beams):
            prefixes[bi, 1:] = ids
        enc_rep = np.repeat(enc_out, len(beams), axis=0)
        mask_rep = np.repeat(src_mask, len(beams), axis=0)
        logits = decoder_logits(params, cfg, enc_rep, mask_rep, prefixes)
        logp = _log_softmax(logits[:, -1, :].astype(np.float64))

        candidates = []
        for bi, (ids, lp) in enumerate(beams):
            for tok in range(logp.shape[1]):
                candidates.append((lp + float(logp[bi, tok]), ids + (tok,)))
        candidates.sort(key=lambda c: (-c[0], c[1]))

        beams = []
        for lp, ids in candidates[:beam]:
            if ids[-1] == eos_id:
                finished.append(Hypothesis(ids[:-1], _hyp_score(lp, len(ids), length_penalty), lp))
            else:
                beams.append((ids, lp))
        if not beams:
            break
    for ids, lp in beams:  # ran into max_len without eos
        finished.append(Hypothesis(ids, _hyp_score(lp, len(ids), length_penalty), lp))

    finished.sort(key=lambda h: (-h.score, h.ids))
    return finished[:beam]


def greedy_decode_batch(params: Parameters, cfg: ModelConfig, src_list,
                        max_len: int, *, bos_id: int, eos_id: int,
                        pad_id: int) -> list:
    """Step-wise argmax decoding of many sentences at once."""
    if not src_list:
        return []
    for ids in src_list:
        if not len(ids):
            raise EmptySource("cannot decode an empty source")
    n = len(src_list)
    s = max(len(ids) for ids in src_list)
    src = np.full((n, s), pad_id, dtype=np.int64)
    for i, ids in enumerate(src_list):
        src[i, : len(ids)] = ids
    enc_out, src_mask = encode_source(params, cfg, src, pad_id)

    prefix = np.full((n, 1), bos_id, dtype=np.int64)
    done = np.zeros(n, dtype=bool)
    outputs = [[] for _ in range(n)]
    for _ in range(max_len):
        logits = decoder_logits(params, cfg, enc_out, src_mask, prefix)
        nxt = logits[:, -1, :].argmax(axis=-1)
        for i in range(n):
            if not done[i]:
                if nxt[i] == eos_id:
                    done[i] = True
                else:
                    outputs[i].append(int(nxt[i]))
        if done.all():
            break
        prefix = np.concatenate([prefix, nxt[:, None]], axis=1)
    return outputs
