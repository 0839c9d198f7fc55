"""Descriptive corpus statistics: counts, rank-frequency tables, repeat bigrams."""
from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, NamedTuple

from .corpus import AlignedCorpus, Side

SIG_DIGITS = 12


def fmt_real(x: float) -> str:
    return format(x, f".{SIG_DIGITS}g")


@dataclass(frozen=True)
class CorpusSummary:
    side: str
    token_count: int
    type_count: int
    pair_count: int
    mean_length: Fraction


class FreqEntry(NamedTuple):
    surface: str
    count: int
    rank: int


@dataclass(frozen=True)
class FrequencyTable:
    entries: tuple[FreqEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]


@dataclass(frozen=True)
class RepeatReport:
    side: str
    repeat_bigram_count: int
    total_bigram_count: int
    probability: Fraction
    top_repeats: tuple[tuple[str, int], ...]


def _check_side(side: str) -> None:
    if side not in ("text", "emoji"):
        raise ValueError(f"unknown side {side!r}")


def summarize(corpus: AlignedCorpus, side: Side) -> CorpusSummary:
    _check_side(side)
    if len(corpus) == 0:
        raise ValueError("empty corpus")
    counts = Counter(tok for p in corpus.pairs for tok in p.tokens(side))
    tokens = sum(counts.values())
    return CorpusSummary(side, tokens, len(counts), len(corpus), Fraction(tokens, len(corpus)))


def rank_counts(counts: Counter | dict[str, int], limit: int | None = None) -> FrequencyTable:
    """Rank (surface, count) pairs by count, ties by code point order."""
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    if limit is not None:
        ordered = ordered[:limit]
    return FrequencyTable(tuple(FreqEntry(s, c, r) for r, (s, c) in enumerate(ordered, start=1)))


def frequency_table(corpus: AlignedCorpus, side: Side, limit: int | None = None) -> FrequencyTable:
    _check_side(side)
    return rank_counts(Counter(tok for p in corpus.pairs for tok in p.tokens(side)), limit)


def zipf_points(table: FrequencyTable) -> list[tuple[int, float]]:
    """(rank, natural-log count) for every entry."""
    if len(table) == 0:
        raise ValueError("empty frequency table")
    return [(e.rank, math.log(e.count)) for e in table]


def repeat_bigrams(corpus: AlignedCorpus, side: Side, top_k: int = 10) -> RepeatReport:
    """Count adjacent identical tokens; bigrams never span two sentences."""
    _check_side(side)
    repeats: Counter = Counter()
    total = 0
    for pair in corpus.pairs:
        toks = pair.tokens(side)
        total += max(len(toks) - 1, 0)
        for a, b in zip(toks, toks[1:]):
            if a == b:
                repeats[a] += 1
    n_rep = sum(repeats.values())
    prob = Fraction(n_rep, total) if total else Fraction(0)
    top = sorted(repeats.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    return RepeatReport(side, n_rep, total, prob, tuple(top))


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------


def _writer(path: Path):
    fh = open(path, "w", encoding="utf-8", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def write_rows(path: str | Path, header: Iterable[str], rows: Iterable[Iterable]) -> Path:
    path = Path(path)
    fh, w = _writer(path)
    with fh:
        w.writerow(header)
        w.writerows(rows)
    return path


def write_summary_csv(path: str | Path, summaries: Iterable[CorpusSummary]) -> Path:
    return write_rows(
        path,
        ("side", "token_count", "type_count", "pair_count", "mean_length"),
        (
            (s.side, s.token_count, s.type_count, s.pair_count, fmt_real(float(s.mean_length)))
            for s in summaries
        ),
    )


def write_freq_csv(path: str | Path, table: FrequencyTable) -> Path:
    return write_rows(path, ("rank", "surface", "count"), ((e.rank, e.surface, e.count) for e in table))


def write_zipf_csv(path: str | Path, points: list[tuple[int, float]]) -> Path:
    path = Path(path)
    fh, w = _writer(path)
    with fh:
        fh.write("# log base: e\n")
        w.writerow(("rank", "log_count"))
        w.writerows((r, fmt_real(v)) for r, v in points)
    return path


def write_repeats_csv(path: str | Path, report: RepeatReport) -> Path:
    """One ``summary`` row, then a ``repeat`` row per top repeated surface."""
    rows = [
        ("summary", "", report.repeat_bigram_count, report.total_bigram_count,
         fmt_real(float(report.probability)))
    ]
    rows += [("repeat", s, c, "", "") for s, c in report.top_repeats]
    return write_rows(path, ("row", "surface", "count", "total_bigrams", "probability"), rows)
