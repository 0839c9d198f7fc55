"""Part-of-speech distributions for tokens and, through the translation table, emoji.

Tags are reduced to their first two characters (NNP, NNS -> NN). Token
distributions come from an externally tagged file; emoji distributions are
mixtures of the token distributions weighted by tau(token | emoji).
"""
from __future__ import annotations

import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .align.table import NULL, TranslationTable
from .corpus import AlignedCorpus, CorpusError, Side
from .stats import fmt_real, write_rows

log = logging.getLogger(__name__)

Distribution = Mapping[str, float]


def pos_prefix(tag: str) -> str:
    if not tag:
        raise ValueError("empty POS tag")
    return tag[:2]


@dataclass
class TokenPosTable:
    entries: dict[str, dict[str, float]]

    def __contains__(self, token: object) -> bool:
        return token in self.entries

    def __getitem__(self, token: str) -> dict[str, float]:
        return self.entries[token]

    def get(self, token: str):
        return self.entries.get(token)


@dataclass
class EmojiPosTable:
    entries: dict[str, dict[str, float]]
    majority: dict[str, str]
    omitted: tuple[str, ...] = field(default=())

    def __getitem__(self, emoji: str) -> dict[str, float]:
        return self.entries[emoji]

    def get(self, emoji: str):
        return self.entries.get(emoji)


@dataclass(frozen=True)
class CorpusPosMass:
    side: str
    mass: dict[str, float]


def _argmax(dist: Distribution) -> str:
    return min(dist.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def load_pos_tags(path: str | Path) -> TokenPosTable:
    """Read ``token<TAB>tag`` occurrences into per-token prefix distributions."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read POS file {path}: {exc.strerror}") from exc
    except UnicodeDecodeError as exc:
        raise CorpusError(f"POS file {path} is not valid UTF-8") from exc
    counts: dict[str, Counter] = defaultdict(Counter)
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for lineno, line in enumerate(lines, start=1):
        parts = line.removesuffix("\r").split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1].strip():
            raise CorpusError("expected 'token<TAB>tag'", lineno)
        counts[parts[0].lower()][pos_prefix(parts[1].strip())] += 1
    if not counts:
        raise CorpusError(f"POS file {path} is empty")
    entries = {}
    for token, c in counts.items():
        n = sum(c.values())
        entries[token] = {p: k / n for p, k in sorted(c.items())}
    return TokenPosTable(entries)


def induce_emoji_pos(table: TranslationTable, pos: TokenPosTable | Mapping[str, Distribution]) -> EmojiPosTable:
    """p(prefix | e) = sum_t tau(t | e) p(prefix | t), over tokens with a POS entry.

    Untagged tokens drop out and the mixture is renormalised over the
    covered mass. Emoji with no covered token are listed in ``omitted``;
    the NULL row is never part of the output. Each emoji's mixture is
    summed in ascending token order.
    """
    if table.direction != "emoji_to_text":
        raise ValueError("POS induction needs an emoji-conditioned table; invert a text_to_emoji table first")
    dists = pos.entries if isinstance(pos, TokenPosTable) else pos
    rows: dict[str, list[tuple[str, float]]] = defaultdict(list)
    for s, t, p in table.items():
        if s != NULL:
            rows[s].append((t, p))

    entries: dict[str, dict[str, float]] = {}
    omitted = []
    for emoji in sorted(rows):
        acc: dict[str, list[float]] = defaultdict(list)
        covered = []
        for token, tau in sorted(rows[emoji]):
            dist = dists.get(token)
            if dist is None or tau <= 0.0:
                continue
            covered.append(tau)
            for prefix, q in dist.items():
                acc[prefix].append(tau * q)
        z = math.fsum(covered)
        if z <= 0.0:
            omitted.append(emoji)
            continue
        entries[emoji] = {prefix: math.fsum(v) / z for prefix, v in sorted(acc.items())}
    if omitted:
        log.warning("%d emoji have no tagged token in their support: %s", len(omitted), " ".join(omitted))
    return EmojiPosTable(entries, {e: _argmax(d) for e, d in entries.items()}, tuple(omitted))


def top_by_pos(table: EmojiPosTable, prefix: str, k: int = 5) -> list[tuple[str, float]]:
    scored = [(e, d[prefix]) for e, d in table.entries.items() if prefix in d]
    scored.sort(key=lambda x: (-x[1], x[0]))
    return scored[:k]


def majority_counts(table: EmojiPosTable) -> Counter:
    return Counter(table.majority.values())


def corpus_pos_mass(
    corpus: AlignedCorpus,
    side: Side,
    dists: TokenPosTable | EmojiPosTable | Mapping[str, Distribution],
) -> CorpusPosMass:
    """Average POS distribution over token occurrences that have one."""
    if isinstance(dists, (TokenPosTable, EmojiPosTable)):
        dists = dists.entries
    occurrences = Counter(tok for p in corpus.pairs for tok in p.tokens(side))
    acc: dict[str, list[float]] = defaultdict(list)
    n = 0
    for token, c in sorted(occurrences.items()):
        dist = dists.get(token)
        if dist is None:
            continue
        n += c
        for prefix, q in dist.items():
            acc[prefix].append(c * q)
    if n == 0:
        raise ValueError(f"no {side} token occurrence has a POS distribution")
    return CorpusPosMass(side, {p: math.fsum(v) / n for p, v in sorted(acc.items())})


def write_emoji_pos_csv(path: str | Path, table: EmojiPosTable) -> Path:
    rows = []
    for emoji in sorted(table.entries):
        dist = table.entries[emoji]
        for prefix in sorted(dist, key=lambda p: (-dist[p], p)):
            flag = 1 if table.majority[emoji] == prefix else 0
            rows.append((emoji, prefix, fmt_real(dist[prefix]), flag))
    return write_rows(path, ("emoji", "prefix", "prob", "majority_flag"), rows)


def write_pos_mass_csv(path: str | Path, mass: CorpusPosMass) -> Path:
    order = sorted(mass.mass, key=lambda p: (-mass.mass[p], p))
    return write_rows(path, ("prefix", "mass"), ((p, fmt_real(mass.mass[p])) for p in order))
