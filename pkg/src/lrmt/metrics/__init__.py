"""Automatic MT evaluation panel: BLEU, chrF/chrF++, TER, RIBES, reports."""

from .common import EmptyCorpus, EvalPair
from .bleu import bleu_corpus, tokenize_13a
from .chrf import ChrfConfig, chrf_corpus
from .ter import ter_corpus, ter_sentence_edits
from .ribes import ribes_corpus, ribes_sentence
from .report import (METRIC_COLUMNS, REGIME_LABELS, render_report,
                     render_report_tsv, score_panel, write_report_files)

__all__ = [
    "EvalPair", "EmptyCorpus", "bleu_corpus", "tokenize_13a",
    "ChrfConfig", "chrf_corpus", "ter_corpus", "ter_sentence_edits",
    "ribes_corpus", "ribes_sentence", "render_report", "render_report_tsv",
    "score_panel", "write_report_files", "REGIME_LABELS", "METRIC_COLUMNS",
]
