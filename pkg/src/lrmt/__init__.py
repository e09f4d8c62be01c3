"""Desk-scale low-resource MT fine-tuning laboratory.

Pipeline pieces: parallel-corpus loading and tagged mixture assembly, a
deterministic BPE tokenizer, dictionary-based code-switching augmentation, a
tiny encoder-decoder transformer with exact manual gradients, Adam with
warmup/inverse-sqrt scheduling and parameter-group freezing, a training
driver for bilingual/multilingual/grouped/transfer regimes, and a
BLEU/chrF/TER/RIBES evaluation panel with table and figure reports.
"""

__version__ = "0.1.0"
