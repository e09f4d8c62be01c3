"""Parallel corpus loading, script detection, and training-mixture assembly.

Corpus files are plain UTF-8 text, one sentence per line, parallel by line
number. Mixtures are tagged, deterministically shuffled concatenations of one
or more corpora, restricted by regime (bilingual / multilingual / grouped).
"""

import random
import unicodedata
from dataclasses import dataclass, field

LANG_CODES = ("en", "as", "kha", "lus", "mni")
INDIC_CODES = ("as", "kha", "lus", "mni")

# Script of each language's standard orthography in this task's data.
SCRIPT_BY_LANG = {
    "as": "Bengali",
    "mni": "Bengali",
    "kha": "Latin",
    "lus": "Latin",
    "en": "Latin",
}

# Target-language tag tokens prepended to the source token sequence.
LANGUAGE_TAGS = {code: f"<2{code}>" for code in LANG_CODES}


class CorpusError(ValueError):
    """Base class for corpus-layer failures."""


class UnknownLanguage(CorpusError):
    pass


class LineCountMismatch(CorpusError):
    pass


class EmptyLine(CorpusError):
    pass


class EncodingError(CorpusError):
    pass


class EmptyText(CorpusError):
    pass


class GroupMembershipViolation(CorpusError):
    pass


class EmptyMixture(CorpusError):
    pass


def check_lang(code: str) -> str:
    if code not in LANG_CODES:
        raise UnknownLanguage(f"unknown language code {code!r}; expected one of {LANG_CODES}")
    return code


@dataclass(frozen=True)
class SentencePair:
    src_lang: str
    tgt_lang: str
    src_text: str
    tgt_text: str

    def __post_init__(self):
        check_lang(self.src_lang)
        check_lang(self.tgt_lang)
        if self.src_lang == self.tgt_lang:
            raise CorpusError(f"source and target language are both {self.src_lang!r}")
        for side, text in (("source", self.src_text), ("target", self.tgt_text)):
            if not text.strip():
                raise CorpusError(f"{side} text is empty")
            if "\n" in text or "\r" in text:
                raise CorpusError(f"{side} text contains a newline")

    def swapped(self) -> "SentencePair":
        """The same pair in the reverse translation direction."""
        return SentencePair(self.tgt_lang, self.src_lang, self.tgt_text, self.src_text)


@dataclass
class ParallelCorpus:
    pairs: list[SentencePair]
    split: str  # train | valid | test

    def __post_init__(self):
        if self.split not in ("train", "valid", "test"):
            raise CorpusError(f"bad split {self.split!r}")
        langs = {(p.src_lang, p.tgt_lang) for p in self.pairs}
        if len(langs) > 1:
            raise CorpusError(f"corpus mixes language pairs: {sorted(langs)}")

    def __len__(self):
        return len(self.pairs)

    @property
    def src_lang(self) -> str:
        return self.pairs[0].src_lang

    @property
    def tgt_lang(self) -> str:
        return self.pairs[0].tgt_lang

    @property
    def indic_lang(self) -> str:
        """The non-English side (either side may be English)."""
        return self.tgt_lang if self.src_lang == "en" else self.src_lang

    def swapped(self) -> "ParallelCorpus":
        return ParallelCorpus([p.swapped() for p in self.pairs], self.split)


@dataclass(frozen=True)
class LanguageGroup:
    name: str
    members: frozenset

    def __post_init__(self):
        for code in self.members:
            check_lang(code)
            if code == "en":
                raise CorpusError("language groups contain Indic languages only")
        if not self.members:
            raise CorpusError(f"group {self.name!r} has no members")


# The script-similarity grouping used throughout: Bengali-script languages
# together, Latin-script languages together.
DEFAULT_GROUPS = (
    LanguageGroup("group1", frozenset({"as", "mni"})),
    LanguageGroup("group2", frozenset({"kha", "lus"})),
)


@dataclass(frozen=True)
class TaggedExample:
    source_tokens_prefix: tuple
    pair: SentencePair


def _read_lines(path, what: str) -> list[str]:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
        text = raw.decode("utf-8")
    except FileNotFoundError:
        raise CorpusError(f"{what} file not found: {path}") from None
    except UnicodeDecodeError as exc:
        raise EncodingError(f"{what} file {path} is not valid UTF-8: {exc}") from None
    # Keep line content verbatim; only line terminators are stripped, so a
    # re-serialization with one trailing newline per line reproduces the
    # input byte-for-byte (modulo a missing final newline in the input).
    return text.splitlines()


def load_parallel_corpus(src_path, tgt_path, src_lang: str, tgt_lang: str,
                         split: str = "train") -> ParallelCorpus:
    """Load a line-aligned pair of sentence files into a ParallelCorpus.

    Blank lines are hard errors (reported with their 1-based line number)
    rather than silently skipped, so line alignment stays auditable.
    """
    check_lang(src_lang)
    check_lang(tgt_lang)
    src_lines = _read_lines(src_path, "source")
    tgt_lines = _read_lines(tgt_path, "target")
    if len(src_lines) != len(tgt_lines):
        raise LineCountMismatch(
            f"{src_path} has {len(src_lines)} lines but {tgt_path} has {len(tgt_lines)}")
    pairs = []
    for i, (src, tgt) in enumerate(zip(src_lines, tgt_lines), start=1):
        if not src.strip():
            raise EmptyLine(f"blank source sentence at line {i} of {src_path}")
        if not tgt.strip():
            raise EmptyLine(f"blank target sentence at line {i} of {tgt_path}")
        pairs.append(SentencePair(src_lang, tgt_lang, src, tgt))
    return ParallelCorpus(pairs, split)


def save_parallel_corpus(corpus: ParallelCorpus, src_path, tgt_path) -> None:
    """Inverse of load_parallel_corpus; writes one trailing newline per line."""
    with open(src_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(p.src_text + "\n" for p in corpus.pairs)
    with open(tgt_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(p.tgt_text + "\n" for p in corpus.pairs)


def detect_script(text: str) -> str:
    """Classify text as Bengali / Latin / Other by alphabetic-character majority.

    A script wins only with a strict majority of the alphabetic characters;
    Bengali counts the U+0980-U+09FF block, Latin counts basic Latin letters.
    """
    if not text:
        raise EmptyText("cannot detect script of empty text")
    bengali = latin = alphabetic = 0
    for ch in text:
        if not ch.isalpha():
            continue
        alphabetic += 1
        cp = ord(ch)
        if 0x0980 <= cp <= 0x09FF:
            bengali += 1
        elif ("a" <= ch <= "z") or ("A" <= ch <= "Z"):
            latin += 1
    if alphabetic == 0:
        return "Other"
    if bengali * 2 > alphabetic:
        return "Bengali"
    if latin * 2 > alphabetic:
        return "Latin"
    return "Other"


def parse_grouping_config(path) -> list[LanguageGroup]:
    """Parse a grouping file of `group_name: lang1,lang2` lines.

    Groups must be disjoint; comment lines starting with '#' are ignored.
    """
    groups = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if ":" not in line:
                raise CorpusError(f"{path}:{lineno}: expected `name: lang1,lang2`")
            name, _, members = line.partition(":")
            codes = [c.strip() for c in members.split(",") if c.strip()]
            group = LanguageGroup(name.strip(), frozenset(codes))
            overlap = seen & group.members
            if overlap:
                raise CorpusError(
                    f"{path}:{lineno}: languages {sorted(overlap)} already grouped")
            seen |= group.members
            groups.append(group)
    if not groups:
        raise CorpusError(f"no groups defined in {path}")
    return groups


def build_mixture(corpora: list[ParallelCorpus], regime: str, seed: int,
                  group: LanguageGroup | None = None) -> list[TaggedExample]:
    """Concatenate, tag, and deterministically shuffle training corpora.

    Sampling is plain proportional concatenation; no temperature re-weighting
    is applied. Each example carries a single target-language tag token.
    """
    if regime == "bilingual":
        if len(corpora) != 1:
            raise CorpusError(f"bilingual regime takes exactly one corpus, got {len(corpora)}")
    elif regime == "grouped":
        if group is None:
            raise CorpusError("grouped regime requires a LanguageGroup")
        for corpus in corpora:
            if corpus.indic_lang not in group.members:
                raise GroupMembershipViolation(
                    f"corpus {corpus.src_lang}-{corpus.tgt_lang} is outside group "
                    f"{group.name!r} = {sorted(group.members)}")
    elif regime != "multilingual":
        raise CorpusError(f"unknown regime {regime!r}")

    examples = []
    for corpus in corpora:
        tag = LANGUAGE_TAGS[corpus.tgt_lang]
        examples.extend(TaggedExample((tag,), pair) for pair in corpus.pairs)
    if not examples:
        raise EmptyMixture("mixture contains no sentence pairs")
    random.Random(seed).shuffle(examples)
    return examples


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)
