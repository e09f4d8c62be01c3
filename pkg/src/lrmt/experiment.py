"""Config-driven experiment pipeline and regime comparison.

An experiment is an INI-style config (flat key = value under section
headers) describing data paths, tokenizer, model, optional code-switching
pre-training, fine-tuning regime, decoding, and reporting. Stages write
their artifacts under the experiment output directory and record a manifest
entry (config hash, seed, code version); re-running a stage whose manifest
entry is current is a no-op unless forced. CLI flag overrides take
precedence over file values.
"""

import configparser
import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .augment import RasConfig, invert_dictionary, load_dictionary, ras_substitute
from .bpe import load_model, model_hash, save_model, train_bpe
from .corpus import (DEFAULT_GROUPS, INDIC_CODES, LANGUAGE_TAGS, LanguageGroup,
                     ParallelCorpus, SentencePair, TaggedExample, build_mixture,
                     check_lang, load_parallel_corpus)
from .decoding import beam_decode
from .metrics import EvalPair, score_panel, write_report_files
from .model import ModelConfig
from .optim import AdamHyper, FreezeSpec, LrSchedule
from .trainer import (Checkpoint, TrainConfig, derive_seed, load_checkpoint,
                      orient_corpus, run_training, save_checkpoint)

STAGES = ("tokenizer", "preprocess", "pretrain", "finetune", "decode",
          "score", "report")

OUTPUT_ROOT_ENV = "LRMT_OUTPUT_ROOT"


class ConfigError(ValueError):
    pass


class DataError(ValueError):
    pass


class IncompatibleTokenizers(ValueError):
    pass


@dataclass
class PairData:
    src_lang: str
    tgt_lang: str
    files: dict       # split -> (src path, tgt path)
    dictionary: object = None  # path or None


@dataclass
class ExperimentConfig:
    name: str
    seed: int
    out_dir: Path
    direction: str
    pairs: list
    vocab_size: int
    model: ModelConfig
    regime: str
    group: object            # LanguageGroup or None
    freeze: FreezeSpec
    init_from: object        # Path or None
    train: TrainConfig
    pretrain_enabled: bool
    pretrain_prob: float
    pretrain_updates: int
    beam: int
    max_len: int
    length_penalty: float
    figures: bool
    allow_novel: bool
    config_hash: str

    @property
    def indic_langs(self) -> list:
        return [p.src_lang if p.src_lang != "en" else p.tgt_lang for p in self.pairs]


def _get(cp, section, key, default=None, cast=str):
    if cp.has_option(section, key):
        raw = cp.get(section, key).strip()
        if raw == "":
            return default
        if cast is bool:
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ConfigError(f"[{section}] {key}: expected boolean, got {raw!r}")
        try:
            return cast(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key}: {exc}") from None
    return default


def parse_experiment_config(path, overrides=()) -> ExperimentConfig:
    """Parse and validate an experiment config file plus flag overrides."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser()
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} is not section.key=value")
        target, value = item.split("=", 1)
        section, key = target.split(".", 1)
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section.strip(), key.strip(), value.strip())

    base = path.parent

    def respath(raw):
        p = Path(raw)
        return p if p.is_absolute() else base / p

    name = _get(cp, "experiment", "name", path.stem)
    seed = _get(cp, "experiment", "seed", 1, int)
    out_root = os.environ.get(OUTPUT_ROOT_ENV)
    out_raw = _get(cp, "experiment", "output_dir", f"runs/{name}")
    out_dir = Path(out_raw)
    if not out_dir.is_absolute():
        out_dir = (Path(out_root) if out_root else base) / out_dir
    allow_novel = _get(cp, "experiment", "allow_novel", False, bool)

    direction = _get(cp, "data", "direction", "en2xx")
    if direction not in ("en2xx", "xx2en"):
        raise ConfigError(f"direction {direction!r} must be en2xx or xx2en")
    pair_names = _get(cp, "data", "pairs")
    if not pair_names:
        raise ConfigError("[data] pairs is required (e.g. `pairs = en-kha`)")
    pairs = []
    for pair_name in pair_names.replace(",", " ").split():
        try:
            src_lang, tgt_lang = pair_name.split("-")
            check_lang(src_lang)
            check_lang(tgt_lang)
        except ValueError as exc:
            raise ConfigError(f"bad pair {pair_name!r}: {exc}") from None
        section = f"data.{pair_name}"
        if not cp.has_section(section):
            raise ConfigError(f"missing section [{section}]")
        files = {}
        for split, key in (("train", "train"), ("valid", "valid"), ("test", "test")):
            src = _get(cp, section, f"{key}_src")
            tgt = _get(cp, section, f"{key}_tgt")
            if not src or not tgt:
                raise ConfigError(f"[{section}] needs {key}_src and {key}_tgt")
            files[split] = (respath(src), respath(tgt))
        dictionary = _get(cp, section, "dictionary")
        pairs.append(PairData(src_lang, tgt_lang, files,
                              respath(dictionary) if dictionary else None))

    vocab_size = _get(cp, "tokenizer", "vocab_size", 8000, int)

    try:
        model = ModelConfig(
            vocab_size=vocab_size,
            layers_enc=_get(cp, "model", "layers_enc", 2, int),
            layers_dec=_get(cp, "model", "layers_dec", 2, int),
            d_model=_get(cp, "model", "d_model", 128, int),
            d_ff=_get(cp, "model", "d_ff", 256, int),
            heads=_get(cp, "model", "heads", 4, int),
            dropout=_get(cp, "model", "dropout", 0.3, float),
            max_positions=_get(cp, "model", "max_positions", 256, int),
            shared_embeddings=_get(cp, "model", "shared_embeddings", True, bool),
        )
    except ValueError as exc:
        raise ConfigError(f"[model] {exc}") from None

    regime = _get(cp, "train", "regime", "bilingual")
    if regime not in ("bilingual", "multilingual", "grouped"):
        raise ConfigError(f"unknown regime {regime!r}")
    group = None
    if regime == "grouped":
        raw_group = _get(cp, "train", "group")
        if raw_group:
            group = LanguageGroup("config", frozenset(
                c.strip() for c in raw_group.replace(",", " ").split()))
        else:
            indic = {p.src_lang if p.src_lang != "en" else p.tgt_lang for p in pairs}
            for candidate in DEFAULT_GROUPS:
                if indic <= candidate.members:
                    group = candidate
                    break
            if group is None:
                raise ConfigError(
                    f"languages {sorted(indic)} fit no default script group; set "
                    "[train] group explicitly")

    try:
        freeze = FreezeSpec(_get(cp, "train", "freeze", "none"))
        schedule = LrSchedule(
            warmup_init_lr=_get(cp, "train", "warmup_init_lr", 1e-7, float),
            peak_lr=_get(cp, "train", "peak_lr", 3e-5, float),
            warmup_updates=_get(cp, "train", "warmup_updates", 4000, int),
            decay=_get(cp, "train", "decay", "inverse_sqrt"),
        )
        adam = AdamHyper(
            beta1=_get(cp, "train", "beta1", 0.9, float),
            beta2=_get(cp, "train", "beta2", 0.98, float),
            eps=_get(cp, "train", "adam_eps", 1e-8, float),
            weight_decay=_get(cp, "train", "weight_decay", 0.0, float),
        )
        train = TrainConfig(
            regime=regime,
            direction=direction,
            max_tokens_per_batch=_get(cp, "train", "max_tokens_per_batch", 512, int),
            accumulation=_get(cp, "train", "accumulation", 2, int),
            max_updates=_get(cp, "train", "max_updates", 1_000_000, int),
            checkpoint_interval=_get(cp, "train", "checkpoint_interval", 2500, int),
            patience=_get(cp, "train", "patience", 10, int),
            freeze=freeze,
            schedule=schedule,
            adam=adam,
            label_smoothing=_get(cp, "train", "label_smoothing", 0.1, float),
            seed=seed,
            eval_metric=_get(cp, "train", "eval_metric", "dev_loss"),
            select=_get(cp, "train", "select", "best"),
        )
    except ValueError as exc:
        raise ConfigError(f"[train] {exc}") from None

    if train.max_tokens_per_batch < model.max_positions:
        raise ConfigError("max_tokens_per_batch must be at least model max_positions")

    init_from = _get(cp, "train", "init_from")
    pretrain_enabled = _get(cp, "pretrain", "enabled", False, bool)
    if pretrain_enabled and init_from:
        raise ConfigError("choose either [pretrain] enabled or [train] init_from")

    cfg = ExperimentConfig(
        name=name, seed=seed, out_dir=out_dir, direction=direction, pairs=pairs,
        vocab_size=vocab_size, model=model, regime=regime, group=group,
        freeze=freeze, init_from=respath(init_from) if init_from else None,
        train=train,
        pretrain_enabled=pretrain_enabled,
        pretrain_prob=_get(cp, "pretrain", "substitution_prob", 0.3, float),
        pretrain_updates=_get(cp, "pretrain", "updates", 200, int),
        beam=_get(cp, "decode", "beam", 4, int),
        max_len=_get(cp, "decode", "max_len", 48, int),
        length_penalty=_get(cp, "decode", "length_penalty", 0.0, float),
        figures=_get(cp, "report", "figures", True, bool),
        allow_novel=allow_novel,
        config_hash="",
    )
    cfg.config_hash = _config_hash(cp)
    _validate(cfg)
    return cfg


def _config_hash(cp) -> str:
    h = hashlib.sha256()
    h.update(__version__.encode())
    for section in sorted(cp.sections()):
        for key in sorted(cp.options(section)):
            h.update(f"{section}\x00{key}\x00{cp.get(section, key)}\x01".encode())
    return h.hexdigest()


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.regime == "bilingual" and len(cfg.pairs) != 1:
        raise ConfigError("bilingual regime takes exactly one language pair")
    if cfg.regime == "multilingual" and len(cfg.pairs) < 2:
        raise ConfigError("multilingual regime needs at least two language pairs")
    if not cfg.allow_novel:
        # the studied combinations: freezing only on bilingual fine-tuning
        if cfg.freeze.mode != "none" and cfg.regime != "bilingual":
            raise ConfigError(
                f"freeze={cfg.freeze.mode} with regime={cfg.regime} is outside the "
                "studied matrix; pass allow_novel to run it anyway")
        if cfg.init_from and cfg.regime != "bilingual":
            raise ConfigError(
                "init_from is for multilingual-to-bilingual transfer; pass "
                "allow_novel for other combinations")
    for pair in cfg.pairs:
        for split, (src, tgt) in pair.files.items():
            for p in (src, tgt):
                if not Path(p).exists():
                    raise DataError(f"missing corpus file: {p}")
        if cfg.pretrain_enabled and pair.dictionary is None:
            raise ConfigError(
                f"[data.{pair.src_lang}-{pair.tgt_lang}] needs a dictionary for "
                "the code-switching pre-training stage")
        if pair.dictionary is not None and not Path(pair.dictionary).exists():
            raise DataError(f"missing dictionary file: {pair.dictionary}")


# ---------------------------------------------------------------------------
# manifest-backed staged execution
# ---------------------------------------------------------------------------

class Manifest:
    def __init__(self, out_dir: Path):
        self.path = Path(out_dir) / "manifest.json"
        if self.path.exists():
            self.data = json.loads(self.path.read_text(encoding="utf-8"))
        else:
            self.data = {"stages": {}}

    def current(self, stage: str, stage_hash: str) -> bool:
        entry = self.data["stages"].get(stage)
        return bool(entry) and entry.get("hash") == stage_hash

    def record(self, stage: str, stage_hash: str, seed: int, artifacts) -> None:
        self.data["stages"][stage] = {
            "hash": stage_hash,
            "seed": seed,
            "version": __version__,
            "artifacts": [str(a) for a in artifacts],
        }
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(json.dumps(self.data, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")


def _load_corpora(cfg: ExperimentConfig, split: str) -> list:
    corpora = []
    for pair in cfg.pairs:
        src, tgt = pair.files[split]
        corpus = load_parallel_corpus(src, tgt, pair.src_lang, pair.tgt_lang, split)
        corpora.append(orient_corpus(corpus, cfg.direction))
    return corpora


def run_experiment(config_path, overrides=(), force: bool = False,
                   through: str = "report") -> dict:
    """Execute pipeline stages up to `through`; returns artifact paths."""
    if through not in STAGES:
        raise ConfigError(f"unknown stage {through!r}")
    cfg = parse_experiment_config(config_path, overrides)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(out)
    artifacts = {"out_dir": out}
    last = STAGES.index(through)

    def stage_hash(stage):
        return hashlib.sha256(f"{cfg.config_hash}:{stage}".encode()).hexdigest()

    def wants(stage):
        return STAGES.index(stage) <= last

    def fresh(stage):
        return force or not manifest.current(stage, stage_hash(stage))

    # -- tokenizer ----------------------------------------------------------
    bpe_path = out / "bpe.model"
    artifacts["bpe"] = bpe_path
    if wants("tokenizer") and (fresh("tokenizer") or not bpe_path.exists()):
        lines = []
        for corpus in _load_corpora(cfg, "train"):
            for p in corpus.pairs:
                lines.append(p.src_text)
                lines.append(p.tgt_text)
        specials = list(("<pad>", "<bos>", "<eos>", "<unk>")) + [
            LANGUAGE_TAGS[c] for c in ("en", "as", "kha", "lus", "mni")]
        bpe = train_bpe(lines, cfg.vocab_size, specials)
        save_model(bpe, bpe_path)
        manifest.record("tokenizer", stage_hash("tokenizer"), cfg.seed, [bpe_path])
    if not wants("preprocess"):
        return artifacts
    bpe = load_model(bpe_path)

    # -- preprocess: tagged mixture -----------------------------------------
    mixture_path = out / "mixture.tsv"
    artifacts["mixture"] = mixture_path
    if fresh("preprocess") or not mixture_path.exists():
        corpora = _load_corpora(cfg, "train")
        mixture = build_mixture(corpora, cfg.regime,
                                derive_seed(cfg.seed, "mixture"), cfg.group)
        with open(mixture_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("tag\tsrc_lang\ttgt_lang\tsrc_text\ttgt_text\n")
            for ex in mixture:
                p = ex.pair
                fh.write(f"{ex.source_tokens_prefix[0]}\t{p.src_lang}\t{p.tgt_lang}"
                         f"\t{p.src_text}\t{p.tgt_text}\n")
        manifest.record("preprocess", stage_hash("preprocess"), cfg.seed,
                        [mixture_path])
    if not wants("pretrain"):
        return artifacts
    mixture = _read_mixture(mixture_path)

    # -- optional code-switching pre-training --------------------------------
    parent_path = None
    if cfg.pretrain_enabled:
        parent_path = out / "pretrain" / "best.ckpt"
        artifacts["parent"] = parent_path
        if fresh("pretrain") or not parent_path.exists():
            augmented = _augment_mixture(cfg, mixture)
            pre_cfg = TrainConfig(
                regime=cfg.regime, direction=cfg.direction,
                max_tokens_per_batch=cfg.train.max_tokens_per_batch,
                accumulation=cfg.train.accumulation,
                max_updates=cfg.pretrain_updates,
                checkpoint_interval=cfg.pretrain_updates,
                patience=cfg.train.patience, freeze=FreezeSpec("none"),
                schedule=cfg.train.schedule, adam=cfg.train.adam,
                label_smoothing=cfg.train.label_smoothing,
                seed=derive_seed(cfg.seed, "pretrain"),
                eval_metric=cfg.train.eval_metric, select="last")
            dev = orient_corpus(_dev_corpus(cfg), cfg.direction)
            ckpt, _log = run_training(augmented, pre_cfg, cfg.model, bpe, dev,
                                      checkpoint_dir=out / "pretrain")
            manifest.record("pretrain", stage_hash("pretrain"), cfg.seed,
                            [parent_path])
    if not wants("finetune"):
        return artifacts

    # -- fine-tune ------------------------------------------------------------
    best_path = out / "train" / "best.ckpt"
    artifacts["checkpoint"] = best_path
    artifacts["trainlog"] = out / "train" / "trainlog.tsv"
    if fresh("finetune") or not best_path.exists():
        init = None
        if cfg.init_from is not None:
            if not Path(cfg.init_from).exists():
                raise DataError(f"missing parent checkpoint: {cfg.init_from}")
            init = load_checkpoint(cfg.init_from)
        elif parent_path is not None:
            init = load_checkpoint(parent_path)
        dev = orient_corpus(_dev_corpus(cfg), cfg.direction)
        ckpt, _log = run_training(mixture, cfg.train, cfg.model, bpe, dev,
                                  init=init, checkpoint_dir=out / "train")
        manifest.record("finetune", stage_hash("finetune"), cfg.seed,
                        [best_path, artifacts["trainlog"]])
    if not wants("decode"):
        return artifacts

    # -- decode test sets -----------------------------------------------------
    decode_dir = out / "decode"
    artifacts["decodes"] = decode_dir
    if fresh("decode") or not decode_dir.exists():
        decode_dir.mkdir(parents=True, exist_ok=True)
        ckpt = load_checkpoint(best_path)
        if ckpt.bpe_hash != model_hash(bpe):
            raise IncompatibleTokenizers("checkpoint BPE hash differs from bpe.model")
        written = []
        for corpus in _load_corpora(cfg, "test"):
            hyp_path = decode_dir / f"test.{corpus.src_lang}-{corpus.tgt_lang}.hyp"
            tag = LANGUAGE_TAGS[corpus.tgt_lang]
            with open(hyp_path, "w", encoding="utf-8", newline="\n") as fh:
                for pair in corpus.pairs:
                    src_ids = ([bpe.tag_id(tag)] + bpe.encode(pair.src_text)
                               + [bpe.eos_id])[: cfg.model.max_positions]
                    hyps = beam_decode(ckpt.params, cfg.model, src_ids, cfg.beam,
                                       cfg.max_len, cfg.length_penalty,
                                       bos_id=bpe.bos_id, eos_id=bpe.eos_id,
                                       pad_id=bpe.pad_id)
                    fh.write(bpe.decode(hyps[0].ids) + "\n")
            written.append(hyp_path)
        manifest.record("decode", stage_hash("decode"), cfg.seed, written)
    if not wants("score"):
        return artifacts

    # -- score ----------------------------------------------------------------
    scores_path = out / "scores.json"
    artifacts["scores"] = scores_path
    if fresh("score") or not scores_path.exists():
        cells = []
        for corpus in _load_corpora(cfg, "test"):
            hyp_path = decode_dir / f"test.{corpus.src_lang}-{corpus.tgt_lang}.hyp"
            hyp_lines = hyp_path.read_text(encoding="utf-8").splitlines()
            pairs = [EvalPair(h, p.tgt_text) for h, p in zip(hyp_lines, corpus.pairs)]
            lang = corpus.indic_lang
            cells.append({
                "regime": _row_regime(cfg),
                "direction": cfg.direction,
                "language": lang,
                "scores": score_panel(pairs),
            })
        payload = {
            "name": cfg.name,
            "bpe_hash": model_hash(bpe),
            "test_files": sorted(
                f"{Path(p.files['test'][0]).resolve()}|{Path(p.files['test'][1]).resolve()}"
                for p in cfg.pairs),
            "cells": cells,
        }
        scores_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                               encoding="utf-8")
        manifest.record("score", stage_hash("score"), cfg.seed, [scores_path])
    if not wants("report"):
        return artifacts

    # -- report ---------------------------------------------------------------
    report_dir = out / "report"
    artifacts["report"] = report_dir
    if fresh("report") or not report_dir.exists():
        payload = json.loads(scores_path.read_text(encoding="utf-8"))
        results = {(c["regime"], c["direction"], c["language"]): c["scores"]
                   for c in payload["cells"]}
        paths = write_report_files(results, report_dir, figures=cfg.figures)
        manifest.record("report", stage_hash("report"), cfg.seed,
                        [paths["txt"], paths["tsv"], *paths["figures"]])
    return artifacts


def _row_regime(cfg: ExperimentConfig) -> str:
    if cfg.init_from is not None:
        return "multi2bi"
    if cfg.freeze.mode == "encoder":
        return "frozen_encoder"
    if cfg.freeze.mode == "encoder_and_embedding":
        return "frozen_encoder_embedding"
    return cfg.regime


def _dev_corpus(cfg: ExperimentConfig) -> ParallelCorpus:
    # single-pair dev for bilingual; first pair's dev otherwise (cheap proxy)
    pair = cfg.pairs[0]
    src, tgt = pair.files["valid"]
    return load_parallel_corpus(src, tgt, pair.src_lang, pair.tgt_lang, "valid")


def _read_mixture(path) -> list:
    mixture = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        for line in fh:
            tag, src_lang, tgt_lang, src_text, tgt_text = line.rstrip("\n").split("\t")
            mixture.append(TaggedExample(
                (tag,), SentencePair(src_lang, tgt_lang, src_text, tgt_text)))
    return mixture


def _augment_mixture(cfg: ExperimentConfig, mixture: list) -> list:
    """Source-side code-switching over the mixture, one dictionary per pair."""
    dictionaries = {}
    for pair in cfg.pairs:
        d = load_dictionary(pair.dictionary, pair.src_lang, pair.tgt_lang)
        dictionaries[(d.src_lang, d.tgt_lang)] = d
        dictionaries.setdefault((d.tgt_lang, d.src_lang), invert_dictionary(d))
    ras = RasConfig(cfg.pretrain_prob, derive_seed(cfg.seed, "ras"))
    out = []
    for i, ex in enumerate(mixture):
        d = dictionaries.get((ex.pair.src_lang, ex.pair.tgt_lang))
        if d is None:
            out.append(ex)
            continue
        out.append(TaggedExample(ex.source_tokens_prefix,
                                 ras_substitute(ex.pair, d, ras, pair_index=i)))
    return out


def compare_regimes(config_paths, out_dir=None, baseline: str | None = None,
                    force: bool = False, figures: bool = True) -> dict:
    """Run (or reuse) several experiments and render the combined table.

    All runs must share the tokenizer hash and per-pair test sets.
    """
    if not config_paths:
        raise ConfigError("compare needs at least one experiment config")
    results = {}
    regimes = []
    seen_hash = None
    seen_tests = {}
    for config_path in config_paths:
        artifacts = run_experiment(config_path, force=force, through="score")
        payload = json.loads(Path(artifacts["scores"]).read_text(encoding="utf-8"))
        if seen_hash is None:
            seen_hash = payload["bpe_hash"]
        elif payload["bpe_hash"] != seen_hash:
            raise IncompatibleTokenizers(
                f"{config_path} used a different BPE model than the first config")
        for cell in payload["cells"]:
            key = (cell["direction"], cell["language"])
            tests = [t for t in payload["test_files"]]
            if key in seen_tests and seen_tests[key] != tests:
                raise IncompatibleTokenizers(
                    f"{config_path} scores {key} against different test files")
            seen_tests.setdefault(key, tests)
            results[(cell["regime"], cell["direction"], cell["language"])] = cell["scores"]
            if cell["regime"] not in regimes:
                regimes.append(cell["regime"])
    if baseline is None:
        baseline = regimes[0] if len(regimes) > 1 else None
    elif baseline not in regimes:
        raise ConfigError(f"baseline regime {baseline!r} not among {regimes}")
    if out_dir is None:
        out_dir = Path(config_paths[0]).parent / "compare"
    paths = write_report_files(results, out_dir, baseline=baseline, figures=figures)
    return {"results": results, "paths": paths, "baseline": baseline}
