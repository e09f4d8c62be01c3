"""Score-table rendering: text tables, a TSV twin, and bar-chart figures.

Tables have one row per training regime and two four-column blocks
(English -> Indic, Indic -> English, languages as/kha/lus/mni); one table is
emitted per metric and missing cells render as an em dash. A machine-readable
TSV and per-metric PNG figures can be written alongside.
"""

from .common import EvalPair, check_pairs
from .bleu import bleu_corpus
from .chrf import CHRF2, CHRF_PP, chrf_corpus
from .ter import ter_corpus
from .ribes import ribes_corpus

INDIC_ORDER = ("as", "kha", "lus", "mni")
DIRECTIONS = ("en2xx", "xx2en")
DIRECTION_LABELS = {"en2xx": "English > Indic", "xx2en": "Indic > English"}

REGIME_LABELS = {
    "bilingual": "Bilingual FT",
    "multilingual": "Multilingual FT",
    "multi2bi": "Multilingual init, bilingual FT",
    "frozen_encoder": "Bilingual FT, frozen encoder",
    "frozen_encoder_embedding": "Bilingual FT, frozen encoder+embedding",
    "grouped": "Script-grouped multilingual FT",
}
REGIME_ORDER = tuple(REGIME_LABELS)

METRIC_COLUMNS = ("chrF2", "BLEU", "chrF++", "TER", "RIBES")
MISSING = "—"  # em dash marks absent cells

_LABEL_W = 40
_CELL_W = 8


def score_panel(pairs) -> dict:
    """All panel metrics for one hypothesis/reference corpus."""
    pairs = check_pairs(pairs)
    return {
        "chrF2": chrf_corpus(pairs, CHRF2),
        "BLEU": bleu_corpus(pairs),
        "chrF++": chrf_corpus(pairs, CHRF_PP),
        "TER": ter_corpus(pairs),
        "RIBES": ribes_corpus(pairs),
    }


def _fmt(metric: str, value) -> str:
    if value is None:
        return MISSING
    return f"{value:.4f}" if metric == "RIBES" else f"{value:.2f}"


def _regimes_in(results):
    seen = [r for r in REGIME_ORDER if any(key[0] == r for key in results)]
    extra = sorted({key[0] for key in results} - set(seen))
    return seen + extra


def render_report(results: dict, metrics=METRIC_COLUMNS, baseline: str | None = None) -> str:
    """Render one text table per metric.

    results maps (regime, direction, language) -> {metric: value}. With a
    baseline regime, other rows show their per-cell delta against it.
    """
    regimes = _regimes_in(results)
    cell_w = _CELL_W + (9 if baseline else 0)
    lines = []
    for metric in metrics:
        width = _LABEL_W + 2 * 4 * cell_w
        lines.append(metric)
        lines.append("=" * len(metric))
        block = "".join(
            DIRECTION_LABELS[d].center(4 * cell_w) for d in DIRECTIONS)
        lines.append(" " * _LABEL_W + block)
        header = "".join(lang.rjust(cell_w) for _ in DIRECTIONS for lang in INDIC_ORDER)
        lines.append("Regime".ljust(_LABEL_W) + header)
        lines.append("-" * width)
        for regime in regimes:
            row = [REGIME_LABELS.get(regime, regime).ljust(_LABEL_W)]
            for direction in DIRECTIONS:
                for lang in INDIC_ORDER:
                    scores = results.get((regime, direction, lang))
                    value = scores.get(metric) if scores else None
                    cell = _fmt(metric, value)
                    if baseline and regime != baseline and value is not None:
                        base = results.get((baseline, direction, lang), {}).get(metric)
                        if base is not None:
                            cell += f" ({value - base:+.2f})"
                    row.append(cell.rjust(cell_w))
            lines.append("".join(row))
        lines.append("")
    return "\n".join(lines) + "\n"


def render_report_tsv(results: dict, metrics=METRIC_COLUMNS) -> str:
    """Flat tab-separated twin of the text report."""
    rows = ["metric\tregime\tdirection\tlanguage\tscore"]
    for metric in metrics:
        for regime in _regimes_in(results):
            for direction in DIRECTIONS:
                for lang in INDIC_ORDER:
                    scores = results.get((regime, direction, lang))
                    value = scores.get(metric) if scores else None
                    rows.append("\t".join(
                        [metric, regime, direction, lang, _fmt(metric, value)]))
    return "\n".join(rows) + "\n"


def render_figures(results: dict, out_dir, metrics=METRIC_COLUMNS) -> list:
    """One grouped bar chart per metric; returns the written paths."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from pathlib import Path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    regimes = _regimes_in(results)
    columns = [(d, lang) for d in DIRECTIONS for lang in INDIC_ORDER]
    written = []
    for metric in metrics:
        fig, ax = plt.subplots(figsize=(9, 4))
        n = len(regimes)
        for ri, regime in enumerate(regimes):
            xs, ys = [], []
            for ci, (direction, lang) in enumerate(columns):
                scores = results.get((regime, direction, lang))
                value = scores.get(metric) if scores else None
                if value is not None:
                    xs.append(ci + (ri - (n - 1) / 2) * 0.8 / max(n, 1))
                    ys.append(value)
            if xs:
                ax.bar(xs, ys, width=0.8 / max(n, 1),
                       label=REGIME_LABELS.get(regime, regime))
        ax.set_xticks(range(len(columns)))
        ax.set_xticklabels([f"{lang}\n{DIRECTION_LABELS[d]}" for d, lang in columns],
                           fontsize=7)
        ax.set_ylabel(metric)
        ax.set_title(metric)
        ax.legend(fontsize=6)
        fig.tight_layout()
        path = out_dir / f"report_{metric.replace('+', 'p')}.png"
        fig.savefig(path, dpi=110)
        plt.close(fig)
        written.append(path)
    return written


def write_report_files(results: dict, out_dir, metrics=METRIC_COLUMNS,
                       baseline: str | None = None, figures: bool = True) -> dict:
    """Write report.txt, report.tsv, and figures under out_dir."""
    from pathlib import Path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    txt = out_dir / "report.txt"
    tsv = out_dir / "report.tsv"
    txt.write_text(render_report(results, metrics, baseline), encoding="utf-8")
    tsv.write_text(render_report_tsv(results, metrics), encoding="utf-8")
    paths = {"txt": txt, "tsv": tsv, "figures": []}
    if figures:
        paths["figures"] = render_figures(results, out_dir, metrics)
    return paths


def pairs_from_lines(hyp_lines, ref_lines) -> list:
    return [EvalPair(h, r) for h, r in zip(hyp_lines, ref_lines, strict=True)]
