"""Parallel corpus loading, Unicode tokenization and normalization.

Text is segmented at UAX #29 word boundaries and the emoji side is split
into extended grapheme clusters. Both segmenters come from
``unicode_segmentation_rs``; the ``Emoji`` property lookup uses ``regex``.
Text containing ZWJ is word-segmented by ``uniseg`` instead (see
``_word_segments``).
"""
from __future__ import annotations

import json
import os
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Literal, Sequence

import regex
import unicode_segmentation_rs as useg
import uniseg.wordbreak

Side = Literal["text", "emoji"]

STOPWORDS_ENV = "BITEXT_LENS_STOPWORDS"

_EMOJI_START = regex.compile(r"\p{Emoji}")
_KEYCAP_BASES = frozenset("0123456789#*")


class CorpusError(ValueError):
    """Raised for malformed corpus or auxiliary input files."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TokenKind(str, Enum):
    WORD = "word"
    EMOJI = "emoji"
    PUNCTUATION = "punctuation"
    DIGIT = "digit"


@dataclass(frozen=True)
class RawPair:
    id: int
    text: str
    emoji: str


@dataclass(frozen=True)
class Token:
    surface: str
    kind: TokenKind

    def __post_init__(self):
        if not self.surface:
            raise ValueError("token surface must be non-empty")


@dataclass(frozen=True)
class NormalizationConfig:
    lowercase: bool = True
    drop_digits: bool = True
    drop_stopwords: bool = True
    drop_punctuation_text: bool = True
    drop_punctuation_emoji: bool = False
    stopword_path: Path | None = None

    def stopwords(self) -> frozenset[str]:
        if not self.drop_stopwords:
            return frozenset()
        return load_stopwords(self.stopword_path)

    def as_dict(self) -> dict:
        return {
            "lowercase": self.lowercase,
            "drop_digits": self.drop_digits,
            "drop_stopwords": self.drop_stopwords,
            "drop_punctuation_text": self.drop_punctuation_text,
            "drop_punctuation_emoji": self.drop_punctuation_emoji,
            "stopword_path": str(resolve_stopword_path(self.stopword_path)),
        }


def profile(name: str, stopword_path: Path | str | None = None) -> NormalizationConfig:
    """Normalization preset: ``s2`` keeps emoji-side punctuation, ``s3`` drops it."""
    path = Path(stopword_path) if stopword_path is not None else None
    if name == "s2":
        return NormalizationConfig(drop_punctuation_emoji=False, stopword_path=path)
    if name == "s3":
        return NormalizationConfig(drop_punctuation_emoji=True, stopword_path=path)
    raise ValueError(f"unknown profile {name!r} (expected 's2' or 's3')")


@dataclass(frozen=True)
class SentencePair:
    id: int
    text: str
    emoji: str
    text_tokens: tuple[str, ...]
    emoji_tokens: tuple[str, ...]

    def tokens(self, side: Side) -> tuple[str, ...]:
        if side == "text":
            return self.text_tokens
        if side == "emoji":
            return self.emoji_tokens
        raise ValueError(f"unknown side {side!r}")


@dataclass
class Vocabulary:
    """Type <-> integer id map; ids follow first occurrence."""

    types: list[str] = field(default_factory=list)
    counts: list[int] = field(default_factory=list)
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    @classmethod
    def from_sequences(cls, seqs: Iterable[Sequence[str]]) -> "Vocabulary":
        vocab = cls()
        for seq in seqs:
            for tok in seq:
                vocab.add(tok)
        return vocab

    def add(self, surface: str, count: int = 1) -> int:
        idx = self._index.get(surface)
        if idx is None:
            idx = len(self.types)
            self._index[surface] = idx
            self.types.append(surface)
            self.counts.append(0)
        self.counts[idx] += count
        return idx

    def id(self, surface: str) -> int:
        return self._index[surface]

    def surface(self, idx: int) -> str:
        return self.types[idx]

    def count(self, surface: str) -> int:
        idx = self._index.get(surface)
        return 0 if idx is None else self.counts[idx]

    def __contains__(self, surface: object) -> bool:
        return surface in self._index

    def __len__(self) -> int:
        return len(self.types)

    def __iter__(self):
        return iter(self.types)

    @property
    def token_count(self) -> int:
        return sum(self.counts)


@dataclass
class AlignedCorpus:
    pairs: list[SentencePair]
    vocab_text: Vocabulary
    vocab_emoji: Vocabulary
    dropped_pair_count: int = 0

    def __len__(self) -> int:
        return len(self.pairs)

    def vocab(self, side: Side) -> Vocabulary:
        return self.vocab_text if side == "text" else self.vocab_emoji

    def sentences(self, side: Side) -> list[tuple[str, ...]]:
        return [p.tokens(side) for p in self.pairs]

    @classmethod
    def from_pairs(cls, pairs: Sequence[SentencePair], dropped_pair_count: int = 0) -> "AlignedCorpus":
        pairs = list(pairs)
        return cls(
            pairs,
            Vocabulary.from_sequences(p.text_tokens for p in pairs),
            Vocabulary.from_sequences(p.emoji_tokens for p in pairs),
            dropped_pair_count,
        )

    @classmethod
    def from_token_pairs(
        cls, pairs: Sequence[tuple[Sequence[str], Sequence[str]]]
    ) -> "AlignedCorpus":
        """Build a corpus directly from (text tokens, emoji tokens) pairs.

        Handy for tests and for callers with their own preprocessing; no
        filtering is applied, so both sides must already be non-empty.
        """
        out = []
        for i, (text, emoji) in enumerate(pairs):
            if not text or not emoji:
                raise ValueError(f"pair {i} has an empty side")
            out.append(
                SentencePair(i, " ".join(text), "".join(emoji), tuple(text), tuple(emoji))
            )
        return cls.from_pairs(out)


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def load_corpus(path: str | Path, format: Literal["jsonl", "tsv"] = "jsonl") -> list[RawPair]:
    """Read a parallel corpus file into ``RawPair`` records, in file order.

    JSONL records carry ``text`` and ``emoji`` and optionally ``id``. TSV
    lines are ``id<TAB>text<TAB>emoji`` without a header. Records without an
    id are numbered by their position (from 0).
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise CorpusError(f"cannot read corpus {path}: {exc.strerror}") from exc
    try:
        content = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = raw[: exc.start].count(b"\n") + 1
        raise CorpusError("invalid UTF-8", line) from exc

    if format == "jsonl":
        parse = _parse_jsonl_line
    elif format == "tsv":
        parse = _parse_tsv_line
    else:
        raise ValueError(f"unknown corpus format {format!r}")

    pairs: list[RawPair] = []
    seen: set[int] = set()
    lines = content.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for lineno, line in enumerate(lines, start=1):
        line = line.removesuffix("\r")
        if format == "jsonl" and not line.strip():
            continue
        rec_id, text, emoji = parse(line, lineno)
        if rec_id is None:
            rec_id = len(pairs)
        if rec_id in seen:
            raise CorpusError(f"duplicate id {rec_id}", lineno)
        seen.add(rec_id)
        pairs.append(RawPair(rec_id, text, emoji))
    return pairs


def _parse_jsonl_line(line: str, lineno: int) -> tuple[int | None, str, str]:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"invalid JSON: {exc.msg}", lineno) from exc
    if not isinstance(obj, dict):
        raise CorpusError("record is not a JSON object", lineno)
    text, emoji = obj.get("text"), obj.get("emoji")
    if not isinstance(text, str) or not isinstance(emoji, str):
        raise CorpusError("'text' and 'emoji' must be strings", lineno)
    rec_id = obj.get("id")
    if rec_id is not None and (
        not isinstance(rec_id, int) or isinstance(rec_id, bool) or rec_id < 0
    ):
        raise CorpusError("'id' must be a non-negative integer", lineno)
    return rec_id, text, emoji


def _parse_tsv_line(line: str, lineno: int) -> tuple[int | None, str, str]:
    fields = line.split("\t")
    if len(fields) != 3:
        raise CorpusError(f"expected 3 tab-separated fields, got {len(fields)}", lineno)
    raw_id, text, emoji = fields
    if raw_id == "":
        return None, text, emoji
    if not raw_id.isascii() or not raw_id.isdigit():
        raise CorpusError(f"invalid id {raw_id!r}", lineno)
    return int(raw_id), text, emoji


def write_corpus(pairs: Iterable[RawPair], path: str | Path, format: str = "jsonl") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in pairs:
            if format == "jsonl":
                rec = {"id": p.id, "text": p.text, "emoji": p.emoji}
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
            else:
                fh.write(f"{p.id}\t{p.text}\t{p.emoji}\n")


def resolve_stopword_path(path: str | Path | None = None) -> Path:
    if path is not None:
        return Path(path)
    env = os.environ.get(STOPWORDS_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("bitext_lens") / "data" / "stopwords_en.txt"))


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Load a stopword file (one entry per line, ``#`` comments)."""
    path = resolve_stopword_path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CorpusError(f"cannot read stopword file {path}: {exc.strerror}") from exc
    words = frozenset(
        w for w in (line.rstrip() for line in lines) if w and not w.startswith("#")
    )
    if not words:
        raise CorpusError(f"stopword file {path} is empty")
    return words


# ---------------------------------------------------------------------------
# Tokenization
# ---------------------------------------------------------------------------


def _strip_ws(segment: str) -> str:
    # A segment can pair whitespace with trailing Extend/Format characters.
    if any(c.isspace() for c in segment):
        return "".join(c for c in segment if not c.isspace())
    return segment


def _classify(surface: str) -> TokenKind:
    if surface.isdecimal():
        return TokenKind.DIGIT
    if any(c.isalnum() or c == "_" for c in surface):
        return TokenKind.WORD
    return TokenKind.PUNCTUATION


def _is_emoji_cluster(cluster: str) -> bool:
    if not _EMOJI_START.match(cluster):
        return False
    # Bare ASCII keycap bases carry Emoji=Yes but read as plain characters.
    if cluster[0] in _KEYCAP_BASES:
        return "\ufe0f" in cluster or "\u20e3" in cluster
    return True


def _word_segments(s: str) -> list[str]:
    # unicode_segmentation_rs joins "a'" + ZWJ + pictograph into one word,
    # skipping the WB6/WB7/WB11/WB12 look-ahead break; uniseg gets it right
    # but is ~100x slower, so it only sees the rare ZWJ-bearing inputs.
    if "\u200d" in s:
        return list(uniseg.wordbreak.words(s))
    return useg.split_word_bounds(s)


def tokenize_text(s: str) -> list[Token]:
    """Split ``s`` at UAX #29 word boundaries, dropping whitespace."""
    tokens = []
    for seg in _word_segments(s):
        surface = _strip_ws(seg)
        if surface:
            tokens.append(Token(surface, _classify(surface)))
    return tokens


def tokenize_emoji(s: str) -> list[Token]:
    """Split ``s`` into extended grapheme clusters, dropping whitespace."""
    tokens = []
    for cluster in useg.graphemes(s, True):
        surface = _strip_ws(cluster)
        if not surface:
            continue
        kind = TokenKind.EMOJI if _is_emoji_cluster(surface) else _classify(surface)
        tokens.append(Token(surface, kind))
    return tokens


def normalize(
    tokens: Sequence[Token],
    config: NormalizationConfig,
    side: Side,
    stopwords: frozenset[str] | None = None,
) -> list[Token]:
    """Lowercase word tokens and drop digits, stopwords and punctuation per ``config``.

    ``stopwords`` may be passed pre-loaded; otherwise the config's file is
    read when stopword removal is enabled.
    """
    if side not in ("text", "emoji"):
        raise ValueError(f"unknown side {side!r}")
    if stopwords is None:
        stopwords = config.stopwords()
    drop_punct = config.drop_punctuation_text if side == "text" else config.drop_punctuation_emoji
    out = []
    for tok in tokens:
        kind = tok.kind
        if kind is TokenKind.DIGIT and config.drop_digits:
            continue
        if kind is TokenKind.PUNCTUATION and drop_punct:
            continue
        if kind is TokenKind.WORD:
            if config.drop_stopwords and tok.surface.lower() in stopwords:
                continue
            if config.lowercase:
                lowered = tok.surface.lower()
                if lowered != tok.surface:
                    tok = Token(lowered, kind)
        out.append(tok)
    return out


def build_corpus(pairs: Sequence[RawPair], config: NormalizationConfig) -> AlignedCorpus:
    """Tokenize and normalize both sides, dropping pairs left empty on either side."""
    stopwords = config.stopwords()
    kept: list[SentencePair] = []
    for raw in pairs:
        text = normalize(tokenize_text(raw.text), config, "text", stopwords)
        emoji = normalize(tokenize_emoji(raw.emoji), config, "emoji", stopwords)
        if not text or not emoji:
            continue
        kept.append(
            SentencePair(
                raw.id,
                raw.text,
                raw.emoji,
                tuple(t.surface for t in text),
                tuple(t.surface for t in emoji),
            )
        )
    return AlignedCorpus.from_pairs(kept, dropped_pair_count=len(pairs) - len(kept))


def token_counts(corpus: AlignedCorpus, side: Side) -> Counter:
    return Counter(tok for p in corpus.pairs for tok in p.tokens(side))
