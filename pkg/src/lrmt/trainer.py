"""Training driver for the four fine-tuning regimes.

Packs micro-batches under a token budget, steps Adam through a gradient
accumulator, evaluates dev at fixed checkpoint intervals, applies
patience-based early stopping, and snapshots the best checkpoint. Checkpoints
serialize to a versioned little-endian binary: magic, version, a JSON
metadata block, then raw float32 tensors in declared order, so any
implementation language can read them back.
"""

import hashlib
import json
import random
import struct
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bpe import BpeModel, model_hash
from .corpus import ParallelCorpus, TaggedExample, LANGUAGE_TAGS
from .decoding import greedy_decode_batch
from .metrics.chrf import CHRF2, chrf_corpus
from .metrics.common import EvalPair
from .model import (Batch, ModelConfig, NonFiniteLoss, Parameters, eval_loss,
                    init_parameters, loss_and_grads)
from .optim import (AdamHyper, FreezeSpec, GradAccumulator, LrSchedule,
                    OptState, adam_step, lr_at)

CKPT_MAGIC = b"NMTCKPT\x00"
CKPT_VERSION = 1


class TrainerError(ValueError):
    pass


class VocabMismatch(TrainerError):
    pass


class ConfigMismatch(TrainerError):
    pass


class DivergedLoss(TrainerError):
    pass


class MissingLanguageTag(TrainerError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    regime: str = "bilingual"
    direction: str = "en2xx"  # en2xx | xx2en
    max_tokens_per_batch: int = 512
    accumulation: int = 2
    max_updates: int = 1_000_000
    checkpoint_interval: int = 2500
    patience: int = 10
    freeze: FreezeSpec = FreezeSpec("none")
    schedule: LrSchedule = LrSchedule()
    adam: AdamHyper = AdamHyper()
    label_smoothing: float = 0.1
    seed: int = 1
    eval_metric: str = "dev_loss"  # dev_loss | dev_chrf2
    select: str = "best"           # best | last checkpoint returned
    shuffle_window: int = 512
    dev_decode_len: int = 48

    def __post_init__(self):
        if self.direction not in ("en2xx", "xx2en"):
            raise TrainerError(f"direction {self.direction!r} not en2xx/xx2en")
        for name in ("max_tokens_per_batch", "accumulation", "max_updates",
                     "checkpoint_interval", "patience", "shuffle_window"):
            if getattr(self, name) < 1:
                raise TrainerError(f"{name} must be positive")
        if self.eval_metric not in ("dev_loss", "dev_chrf2"):
            raise TrainerError(f"unknown eval metric {self.eval_metric!r}")
        if self.select not in ("best", "last"):
            raise TrainerError(f"select must be best or last")


@dataclass
class Checkpoint:
    model_config: ModelConfig
    bpe_hash: str
    params: Parameters
    opt_state: OptState
    update_count: int
    dev_history: list  # [update, dev_loss, dev_chrf2] triples
    provenance: dict   # regime, direction, seed, language_tags, parent, ...


@dataclass
class TrainLog:
    columns = ("update", "train_loss", "dev_loss", "dev_chrf2", "lr", "wall_clock")
    rows: list = field(default_factory=list)

    def append(self, **kw):
        self.rows.append({c: kw[c] for c in self.columns})

    def to_tsv(self) -> str:
        lines = ["\t".join(self.columns)]
        for row in self.rows:
            lines.append("\t".join(
                [str(row["update"]),
                 f"{row['train_loss']:.6f}", f"{row['dev_loss']:.6f}",
                 f"{row['dev_chrf2']:.4f}", f"{row['lr']:.3e}",
                 f"{row['wall_clock']:.2f}"]))
        return "\n".join(lines) + "\n"

    def save(self, path):
        Path(path).write_text(self.to_tsv(), encoding="utf-8")


def derive_seed(*parts) -> int:
    digest = hashlib.blake2b(":".join(str(p) for p in parts).encode(),
                             digest_size=8).digest()
    return int.from_bytes(digest, "little")


def orient_corpus(corpus: ParallelCorpus, direction: str) -> ParallelCorpus:
    """Flip a corpus so that `direction` holds (en2xx: English source)."""
    src_is_en = corpus.src_lang == "en"
    if (direction == "en2xx") != src_is_en:
        return corpus.swapped()
    return corpus


def encode_example(example: TaggedExample, bpe: BpeModel, max_positions: int):
    """Token ids for one tagged example: (src ids, full target ids)."""
    pair = example.pair
    src = [bpe.tag_id(t) for t in example.source_tokens_prefix]
    src += bpe.encode(pair.src_text)
    src.append(bpe.eos_id)
    tgt = [bpe.bos_id] + bpe.encode(pair.tgt_text) + [bpe.eos_id]
    return src[:max_positions], tgt[: max_positions + 1]


def _row_cost(src_ids, tgt_ids) -> int:
    # packed cost of one example: the longer of its padded source/target rows
    return max(len(src_ids), len(tgt_ids) - 1)


def pack_batches(encoded, budget: int, window: int, rng=None) -> list:
    """Greedy length-sorted packing inside shuffled windows.

    Returns lists of indices into `encoded`; every batch satisfies
    rows * max_row_length <= budget.
    """
    order = list(range(len(encoded)))
    if rng is not None:
        rng.shuffle(order)
    batches = []
    for start in range(0, len(order), window):
        chunk = sorted(order[start:start + window],
                       key=lambda i: (_row_cost(*encoded[i]), i))
        current, cur_max = [], 0
        for i in chunk:
            cost = _row_cost(*encoded[i])
            if cost > budget:
                raise TrainerError(
                    f"sentence of {cost} tokens exceeds the {budget}-token batch budget")
            new_max = max(cur_max, cost)
            if current and (len(current) + 1) * new_max > budget:
                batches.append(current)
                current, cur_max = [i], cost
            else:
                current.append(i)
                cur_max = new_max
        if current:
            batches.append(current)
    return batches


def make_batch(encoded, indices, pad_id: int) -> Batch:
    rows = [encoded[i] for i in indices]
    s = max(len(src) for src, _ in rows)
    t = max(len(tgt) - 1 for _, tgt in rows)
    src = np.full((len(rows), s), pad_id, dtype=np.int64)
    tgt_in = np.full((len(rows), t), pad_id, dtype=np.int64)
    tgt_out = np.full((len(rows), t), pad_id, dtype=np.int64)
    for r, (src_ids, tgt_ids) in enumerate(rows):
        src[r, : len(src_ids)] = src_ids
        tgt_in[r, : len(tgt_ids) - 1] = tgt_ids[:-1]
        tgt_out[r, : len(tgt_ids) - 1] = tgt_ids[1:]
    return Batch(src, tgt_in, tgt_out, pad_id)


def evaluate_dev(params: Parameters, model_cfg: ModelConfig,
                 dev: ParallelCorpus, bpe: BpeModel,
                 label_smoothing: float = 0.1, max_decode_len: int = 48,
                 max_tokens: int = 1024):
    """(dev loss, dev chrF2) with dropout off and greedy decodes."""
    if not len(dev):
        raise TrainerError("dev corpus is empty")
    tag = LANGUAGE_TAGS[dev.tgt_lang]
    encoded = [encode_example(TaggedExample((tag,), p), bpe, model_cfg.max_positions)
               for p in dev.pairs]
    total_loss = 0.0
    total_tokens = 0
    for idx in pack_batches(encoded, max_tokens, window=len(encoded)):
        batch = make_batch(encoded, idx, bpe.pad_id)
        n = batch.n_tokens
        total_loss += eval_loss(params, model_cfg, batch, label_smoothing) * n
        total_tokens += n
    dev_loss = total_loss / total_tokens

    hyps = []
    src_lists = [src for src, _ in encoded]
    for start in range(0, len(src_lists), 64):
        outs = greedy_decode_batch(params, model_cfg, src_lists[start:start + 64],
                                   max_decode_len, bos_id=bpe.bos_id,
                                   eos_id=bpe.eos_id, pad_id=bpe.pad_id)
        hyps.extend(bpe.decode(ids) for ids in outs)
    pairs = [EvalPair(h, p.tgt_text) for h, p in zip(hyps, dev.pairs)]
    dev_chrf2 = chrf_corpus(pairs, CHRF2)
    return dev_loss, dev_chrf2


def _criterion(cfg: TrainConfig, dev_loss: float, dev_chrf2: float) -> float:
    # packed so that larger is always better
    return -dev_loss if cfg.eval_metric == "dev_loss" else dev_chrf2


def run_training(mixture: list, cfg: TrainConfig, model_cfg: ModelConfig,
                 bpe: BpeModel, dev: ParallelCorpus, init: Checkpoint | None = None,
                 checkpoint_dir=None):
    """Train on a tagged mixture; returns (selected Checkpoint, TrainLog).

    `init` supplies initialization parameters only: the optimizer state is
    reset and the update counter starts at zero. Its BPE hash and model
    config must match the current run.
    """
    if not mixture:
        raise TrainerError("training mixture is empty")
    bpe_hash = model_hash(bpe)
    if init is not None:
        if init.bpe_hash != bpe_hash:
            raise VocabMismatch("initialization checkpoint was built with a different "
                                "BPE model")
        if init.model_config != model_cfg:
            raise ConfigMismatch(f"checkpoint config {init.model_config} != {model_cfg}")
        params = init.params.copy()
    else:
        params = init_parameters(model_cfg, derive_seed(cfg.seed, "init"))
    state = OptState.fresh(params)

    encoded = [encode_example(ex, bpe, model_cfg.max_positions) for ex in mixture]
    if checkpoint_dir is not None:
        checkpoint_dir = Path(checkpoint_dir)
        checkpoint_dir.mkdir(parents=True, exist_ok=True)

    provenance = {
        "regime": cfg.regime,
        "direction": cfg.direction,
        "seed": cfg.seed,
        "language_tags": bpe.language_tags,
        "parent": init.provenance.get("run") if init is not None else None,
        "run": f"{cfg.regime}:{cfg.direction}:{cfg.seed}",
    }

    log = TrainLog()
    accum = GradAccumulator(cfg.accumulation)
    best = None          # (criterion, update, params copy, opt copy)
    bad_evals = 0
    updates = 0
    epoch = 0
    micro = 0
    dev_history = []
    interval_losses = []
    t0 = time.monotonic()
    stop = False

    while not stop:
        epoch_rng = random.Random(derive_seed(cfg.seed, "epoch", epoch))
        for idx in pack_batches(encoded, cfg.max_tokens_per_batch,
                                cfg.shuffle_window, epoch_rng):
            batch = make_batch(encoded, idx, bpe.pad_id)
            micro += 1
            rng = (np.random.default_rng(derive_seed(cfg.seed, "drop", micro))
                   if model_cfg.dropout > 0 else None)
            try:
                loss, grads = loss_and_grads(params, model_cfg, batch,
                                             cfg.label_smoothing, rng)
            except NonFiniteLoss as exc:
                raise DivergedLoss(str(exc)) from None
            interval_losses.append(loss)
            flushed = accum.add(grads, batch.n_tokens)
            if flushed is None:
                continue
            updates += 1
            adam_step(params, flushed, state, cfg.adam,
                      lr_at(updates, cfg.schedule), cfg.freeze)

            if updates % cfg.checkpoint_interval == 0:
                dev_loss, dev_chrf2 = evaluate_dev(
                    params, model_cfg, dev, bpe, cfg.label_smoothing,
                    cfg.dev_decode_len)
                dev_history.append([updates, dev_loss, dev_chrf2])
                log.append(update=updates,
                           train_loss=sum(interval_losses) / len(interval_losses),
                           dev_loss=dev_loss, dev_chrf2=dev_chrf2,
                           lr=lr_at(updates, cfg.schedule),
                           wall_clock=time.monotonic() - t0)
                interval_losses = []
                crit = _criterion(cfg, dev_loss, dev_chrf2)
                if best is None or crit > best[0]:
                    best = (crit, updates, params.copy(),
                            OptState(state.step,
                                     {k: v.copy() for k, v in state.m.items()},
                                     {k: v.copy() for k, v in state.v.items()}))
                    bad_evals = 0
                else:
                    bad_evals += 1
                if checkpoint_dir is not None:
                    save_checkpoint(
                        Checkpoint(model_cfg, bpe_hash, params, state, updates,
                                   list(dev_history), dict(provenance)),
                        checkpoint_dir / f"checkpoint_{updates:08d}.ckpt")
                if bad_evals >= cfg.patience:
                    stop = True
                    break
            if updates >= cfg.max_updates:
                stop = True
                break
        epoch += 1

    if best is not None and cfg.select == "best":
        _, upd, best_params, best_state = best
        final = Checkpoint(model_cfg, bpe_hash, best_params, best_state, upd,
                           list(dev_history), dict(provenance))
    else:
        final = Checkpoint(model_cfg, bpe_hash, params, state, updates,
                           list(dev_history), dict(provenance))
    if checkpoint_dir is not None:
        save_checkpoint(final, checkpoint_dir / "best.ckpt")
        log.save(checkpoint_dir / "trainlog.tsv")
    return final, log


def init_bilingual_from_multilingual(multi: Checkpoint, pair) -> Checkpoint:
    """Exact-copy initialization of a bilingual run from a multilingual model."""
    src_lang, tgt_lang = pair
    tags = multi.provenance.get("language_tags", [])
    for lang in (src_lang, tgt_lang):
        if LANGUAGE_TAGS[lang] not in tags:
            raise MissingLanguageTag(
                f"parent model has no language tag for {lang!r}")
    params = multi.params.copy()
    provenance = {
        "regime": "bilingual",
        "direction": multi.provenance.get("direction"),
        "seed": multi.provenance.get("seed"),
        "language_tags": list(tags),
        "parent": multi.provenance.get("run"),
        "parent_hash": multi.params.full_hash(),
        "parent_update": multi.update_count,
        "run": f"multi2bi:{src_lang}-{tgt_lang}",
    }
    return Checkpoint(multi.model_config, multi.bpe_hash, params,
                      OptState.fresh(params), 0, [], provenance)


# ---------------------------------------------------------------------------
# checkpoint serialization
# ---------------------------------------------------------------------------

def save_checkpoint(ckpt: Checkpoint, path) -> None:
    names = sorted(ckpt.params.tensors)
    meta = {
        "model_config": ckpt.model_config.to_dict(),
        "bpe_hash": ckpt.bpe_hash,
        "update_count": ckpt.update_count,
        "opt_step": ckpt.opt_state.step,
        "dev_history": ckpt.dev_history,
        "provenance": ckpt.provenance,
        "tensors": [{"name": n, "group": ckpt.params.groups[n],
                     "shape": list(ckpt.params.tensors[n].shape)} for n in names],
    }
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CKPT_MAGIC)
        fh.write(struct.pack("<I", CKPT_VERSION))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for store in (ckpt.params.tensors, ckpt.opt_state.m, ckpt.opt_state.v):
            for name in names:
                fh.write(np.ascontiguousarray(store[name], dtype="<f4").tobytes())


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        magic = fh.read(len(CKPT_MAGIC))
        if magic != CKPT_MAGIC:
            raise TrainerError(f"{path} is not a checkpoint file")
        version = struct.unpack("<I", fh.read(4))[0]
        if version != CKPT_VERSION:
            raise TrainerError(f"unsupported checkpoint version {version}")
        meta = json.loads(fh.read(struct.unpack("<Q", fh.read(8))[0]))
        model_cfg = ModelConfig(**meta["model_config"])
        stores = []
        for _ in range(3):
            tensors = {}
            for spec in meta["tensors"]:
                size = int(np.prod(spec["shape"])) if spec["shape"] else 1
                raw = fh.read(4 * size)
                tensors[spec["name"]] = np.frombuffer(raw, dtype="<f4").reshape(
                    spec["shape"]).copy()
            stores.append(tensors)
    groups = {spec["name"]: spec["group"] for spec in meta["tensors"]}
    params = Parameters(stores[0], groups)
    state = OptState(meta["opt_step"], stores[1], stores[2])
    return Checkpoint(model_cfg, meta["bpe_hash"], params, state,
                      meta["update_count"], meta["dev_history"], meta["provenance"])
