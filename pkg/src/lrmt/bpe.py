"""Deterministic byte-pair-encoding subword model shared across languages.

Training greedily merges the most frequent adjacent symbol pair, breaking ties
lexicographically by (left, right), so two runs over the same corpus produce
byte-identical models. Words are pre-tokenized on Unicode whitespace; a word
boundary marker symbol starts every word, and byte-fallback tokens cover any
character unseen at training time.
"""

import hashlib
import unicodedata
from collections import Counter
from dataclasses import dataclass, field

WORD_MARKER = "▁"  # ▁, marks a word boundary inside token strings
CORE_SPECIALS = ("<pad>", "<bos>", "<eos>", "<unk>")

FORMAT_HEADER = "lrmt-bpe v1"


class BpeError(ValueError):
    pass


class VocabTooSmall(BpeError):
    pass


class EmptyCorpus(BpeError):
    pass


class IdOutOfRange(BpeError):
    pass


def _byte_token(b: int) -> str:
    return f"<0x{b:02X}>"


BYTE_TOKENS = tuple(_byte_token(b) for b in range(256))


@dataclass
class BpeModel:
    vocab: dict            # token string -> id, dense 0..|vocab|-1
    merges: list           # ordered (left, right) pairs; rank = index
    special_tokens: list   # pad, bos, eos, unk, then language tags
    byte_fallback: bool = True
    id_to_token: list = field(default_factory=list, repr=False)
    _ranks: dict = field(default_factory=dict, repr=False)
    _word_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if list(self.special_tokens[:4]) != list(CORE_SPECIALS):
            raise BpeError(f"special tokens must start with {CORE_SPECIALS}")
        if not self.id_to_token:
            self.id_to_token = [None] * len(self.vocab)
            for tok, idx in self.vocab.items():
                self.id_to_token[idx] = tok
        if not self._ranks:
            self._ranks = {pair: rank for rank, pair in enumerate(self.merges)}

    pad_id = property(lambda self: 0)
    bos_id = property(lambda self: 1)
    eos_id = property(lambda self: 2)
    unk_id = property(lambda self: 3)

    def __len__(self):
        return len(self.vocab)

    @property
    def language_tags(self) -> list:
        return list(self.special_tokens[4:])

    def tag_id(self, tag: str) -> int:
        if tag not in self.special_tokens:
            raise BpeError(f"{tag!r} is not a special token of this model")
        return self.vocab[tag]

    def encode(self, text: str) -> list:
        return encode(self, text)

    def decode(self, ids) -> str:
        return decode_tokens(self, ids)


def _word_symbols(word: str) -> list:
    return [WORD_MARKER] + list(word)


def _pretokenize(text: str) -> list:
    return unicodedata.normalize("NFC", text).split()


def train_bpe(corpus_lines, vocab_size: int, special_tokens=None,
              byte_fallback: bool = True) -> BpeModel:
    """Train a BPE model; stops at vocab_size or when no pair occurs twice."""
    specials = list(special_tokens) if special_tokens else list(CORE_SPECIALS)
    if specials[:4] != list(CORE_SPECIALS):
        specials = list(CORE_SPECIALS) + [s for s in specials if s not in CORE_SPECIALS]

    word_freqs = Counter()
    for line in corpus_lines:
        word_freqs.update(_pretokenize(line))
    if not word_freqs:
        raise EmptyCorpus("training corpus contains no words")

    alphabet = sorted({ch for word in word_freqs for ch in word} | {WORD_MARKER})
    base_size = len(specials) + (256 if byte_fallback else 0) + len(alphabet)
    if vocab_size <= len(specials) + len(alphabet):
        raise VocabTooSmall(
            f"vocab_size {vocab_size} cannot hold {len(specials)} special tokens "
            f"plus an alphabet of {len(alphabet)}")

    vocab = {}
    for tok in specials:
        vocab[tok] = len(vocab)
    if byte_fallback:
        for tok in BYTE_TOKENS:
            vocab[tok] = len(vocab)
    for ch in alphabet:
        if ch not in vocab:
            vocab[ch] = len(vocab)

    # Per word type: current symbol sequence and its corpus frequency.
    words = [(_word_symbols(w), freq) for w, freq in sorted(word_freqs.items())]
    pair_counts = Counter()
    pair_words = {}  # pair -> set of word indices containing it
    for wi, (syms, freq) in enumerate(words):
        for pair in zip(syms, syms[1:]):
            pair_counts[pair] += freq
            pair_words.setdefault(pair, set()).add(wi)

    merges = []
    target = max(vocab_size, base_size)
    while len(vocab) < target:
        best = None
        best_count = 1
        for pair, count in pair_counts.items():
            if count < best_count:
                continue
            if pair[0] + pair[1] in vocab:
                continue  # would collide with an existing token (incl. specials)
            if count > best_count or (best is not None and pair < best):
                best, best_count = pair, count
        if best is None:
            break
        merged = best[0] + best[1]
        merges.append(best)
        vocab[merged] = len(vocab)
        for wi in sorted(pair_words.get(best, ())):
            syms, freq = words[wi]
            for pair in zip(syms, syms[1:]):
                pair_counts[pair] -= freq
                if pair_counts[pair] <= 0:
                    del pair_counts[pair]
                pair_words[pair].discard(wi)
            syms = _merge_symbols(syms, best, merged)
            words[wi] = (syms, freq)
            for pair in zip(syms, syms[1:]):
                pair_counts[pair] += freq
                pair_words.setdefault(pair, set()).add(wi)

    return BpeModel(vocab=vocab, merges=merges, special_tokens=specials,
                    byte_fallback=byte_fallback)


def _merge_symbols(syms, pair, merged):
    out = []
    i = 0
    while i < len(syms):
        if i + 1 < len(syms) and syms[i] == pair[0] and syms[i + 1] == pair[1]:
            out.append(merged)
            i += 2
        else:
            out.append(syms[i])
            i += 1
    return out


def _encode_word(model: BpeModel, word: str) -> list:
    cached = model._word_cache.get(word)
    if cached is not None:
        return cached
    syms = _word_symbols(word)
    ranks = model._ranks
    while len(syms) > 1:
        best_rank = None
        best_pair = None
        for pair in zip(syms, syms[1:]):
            rank = ranks.get(pair)
            if rank is not None and (best_rank is None or rank < best_rank):
                best_rank, best_pair = rank, pair
        if best_pair is None:
            break
        syms = _merge_symbols(syms, best_pair, best_pair[0] + best_pair[1])

    ids = []
    for sym in syms:
        idx = model.vocab.get(sym)
        if idx is not None:
            ids.append(idx)
        elif model.byte_fallback:
            ids.extend(model.vocab[_byte_token(b)] for b in sym.encode("utf-8"))
        else:
            ids.append(model.unk_id)
    model._word_cache[word] = ids
    return ids


def encode(model: BpeModel, text: str) -> list:
    """Encode plain text to token ids; total on all inputs.

    Whitespace runs collapse to single word boundaries and text is NFC
    normalized, so round-trips are exact on NFC, single-spaced input.
    Special tokens are never produced from text content.
    """
    ids = []
    for word in _pretokenize(text):
        ids.extend(_encode_word(model, word))
    return ids


def decode_tokens(model: BpeModel, ids) -> str:
    """Inverse of encode on covered text; special tokens vanish from output."""
    n_special = len(model.special_tokens)
    parts = []
    byte_run = []

    def flush_bytes():
        if byte_run:
            parts.append(bytes(byte_run).decode("utf-8", errors="replace"))
            byte_run.clear()

    for idx in ids:
        idx = int(idx)
        if idx < 0 or idx >= len(model.id_to_token):
            raise IdOutOfRange(f"token id {idx} outside vocabulary of {len(model.vocab)}")
        if idx < n_special:
            continue
        tok = model.id_to_token[idx]
        if model.byte_fallback and len(tok) == 6 and tok.startswith("<0x") and tok.endswith(">"):
            byte_run.append(int(tok[3:5], 16))
            continue
        flush_bytes()
        parts.append(tok)
    flush_bytes()
    text = "".join(parts).replace(WORD_MARKER, " ")
    return text[1:] if text.startswith(" ") else text


def save_model(model: BpeModel, path) -> None:
    lines = [FORMAT_HEADER,
             f"vocab_size {len(model.vocab)}",
             f"byte_fallback {int(model.byte_fallback)}",
             f"marker {WORD_MARKER}",
             f"specials {len(model.special_tokens)}"]
    lines.extend(model.special_tokens)
    lines.append(f"merges {len(model.merges)}")
    lines.extend(f"{left}\t{right}" for left, right in model.merges)
    lines.append(f"vocab {len(model.vocab)}")
    lines.extend(model.id_to_token)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> BpeModel:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != FORMAT_HEADER:
        raise BpeError(f"{path} is not a {FORMAT_HEADER} model file")
    pos = 1
    header = {}
    for _ in range(4):
        key, _, value = lines[pos].partition(" ")
        header[key] = value
        pos += 1
    n_special = int(header["specials"])
    specials = lines[pos:pos + n_special]
    pos += n_special
    key, _, value = lines[pos].partition(" ")
    assert key == "merges"
    n_merges = int(value)
    pos += 1
    merges = []
    for line in lines[pos:pos + n_merges]:
        left, _, right = line.partition("\t")
        merges.append((left, right))
    pos += n_merges
    key, _, value = lines[pos].partition(" ")
    assert key == "vocab"
    n_vocab = int(value)
    pos += 1
    tokens = lines[pos:pos + n_vocab]
    vocab = {tok: idx for idx, tok in enumerate(tokens)}
    return BpeModel(vocab=vocab, merges=merges, special_tokens=specials,
                    byte_fallback=bool(int(header["byte_fallback"])))


def model_hash(model: BpeModel) -> str:
    """Stable digest used for checkpoint-compatibility checks."""
    h = hashlib.sha256()
    h.update(FORMAT_HEADER.encode())
    h.update(str(int(model.byte_fallback)).encode())
    for tok in model.special_tokens:
        h.update(tok.encode("utf-8") + b"\x00")
    for left, right in model.merges:
        h.update(left.encode("utf-8") + b"\x01" + right.encode("utf-8") + b"\x00")
    for tok in model.id_to_token:
        h.update(tok.encode("utf-8") + b"\x00")
    return h.hexdigest()
