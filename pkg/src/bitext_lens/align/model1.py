"""IBM Model 1 trained by EM, with an optional NULL source word.

For a sentence pair with source words s_1..s_l (plus NULL) and target words
t_1..t_m the likelihood is

    P(t | s) = (l + 1)^-m * prod_j sum_i tau(t_j | s_i)

and one EM step re-estimates tau from the alignment posteriors
tau(t_j | s_i) / sum_i' tau(t_j | s_i').
"""
from __future__ import annotations

import logging
import math
from typing import Mapping, Sequence

import numpy as np

from ..corpus import AlignedCorpus, SentencePair
from . import kernels
from .table import (
    NULL,
    AlignmentLinks,
    NumericalError,
    TrainingConfig,
    TrainingDiagnostics,
    TranslationTable,
    parse_direction,
    source_side,
    target_side,
)

log = logging.getLogger(__name__)

CONVERGENCE_DELTA = 1e-6


class Bitext:
    """A corpus flattened into kernel arrays for one direction.

    ``keys`` enumerates every co-occurring (source id, target id) pair in
    ascending order; ``link`` maps each (target occurrence, source position)
    to its entry. Within a row, sentence positions come first in order and
    the NULL position last.
    """

    def __init__(self, corpus: AlignedCorpus, direction: str = "emoji_to_text", use_null: bool = True):
        if len(corpus) == 0:
            raise ValueError("empty corpus")
        self.direction = parse_direction(direction)
        self.use_null = use_null
        src_side, tgt_side = source_side(self.direction), target_side(self.direction)

        sources: dict[str, int] = {NULL: 0} if use_null else {}
        targets: dict[str, int] = {}
        pair_src, pair_tgt = [], []
        for pair in corpus.pairs:
            s_toks, t_toks = pair.tokens(src_side), pair.tokens(tgt_side)
            if not s_toks or not t_toks:
                raise ValueError(f"pair {pair.id} has an empty side")
            s_ids = [sources.setdefault(w, len(sources)) for w in s_toks]
            if use_null:
                s_ids.append(0)
            pair_src.append(np.asarray(s_ids, dtype=np.int64))
            pair_tgt.append(np.asarray([targets.setdefault(w, len(targets)) for w in t_toks], dtype=np.int64))

        self.sources = tuple(sources)
        self.targets = tuple(targets)
        self.pair_ids = [p.id for p in corpus.pairs]
        self.source_len = np.asarray([len(s) for s in pair_src], dtype=np.int64)  # incl. NULL
        self.target_len = np.asarray([len(t) for t in pair_tgt], dtype=np.int64)

        n_tgt = len(self.targets)
        flat = np.concatenate(
            [np.tile(s, t.shape[0]) * n_tgt + np.repeat(t, s.shape[0]) for s, t in zip(pair_src, pair_tgt)]
        )
        keys, link = np.unique(flat, return_inverse=True)
        self.link = link.astype(np.int64).reshape(-1)
        self.key_src = keys // n_tgt
        self.key_tgt = keys % n_tgt
        self.row_len = np.repeat(self.source_len, self.target_len)
        # sum_p m_p * ln(l_p + 1), the position factor of the likelihood
        self.position_term = float(np.dot(self.target_len, np.log(self.source_len)))

    @property
    def n_entries(self) -> int:
        return int(self.key_src.shape[0])

    @property
    def n_target_tokens(self) -> int:
        return int(self.target_len.sum())

    def uniform(self) -> np.ndarray:
        return np.full(self.n_entries, 1.0 / len(self.targets))

    def random(self, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        return self.normalize_rows(rng.uniform(0.01, 1.0, self.n_entries))

    def normalize_rows(self, values: np.ndarray) -> np.ndarray:
        totals = np.bincount(self.key_src, weights=values, minlength=len(self.sources))
        return values / totals[self.key_src]

    def probs_from(self, table: TranslationTable) -> np.ndarray:
        """Table probabilities aligned to this bitext's entries (0 when absent)."""
        s_map = {s: i for i, s in enumerate(table.sources)}
        t_map = {t: i for i, t in enumerate(table.targets)}
        lookup = {(a, b): k for k, (a, b) in enumerate(zip(table.src.tolist(), table.tgt.tolist()))}
        out = np.zeros(self.n_entries)
        for k, (a, b) in enumerate(zip(self.key_src.tolist(), self.key_tgt.tolist())):
            ta, tb = s_map.get(self.sources[a]), t_map.get(self.targets[b])
            if ta is not None and tb is not None:
                idx = lookup.get((ta, tb))
                if idx is not None:
                    out[k] = table.prob[idx]
        return out

    def to_table(self, prob: np.ndarray, **meta) -> TranslationTable:
        return TranslationTable(
            self.sources,
            self.targets,
            self.key_src.copy(),
            self.key_tgt.copy(),
            prob,
            self.direction,
            self.use_null,
            **meta,
        )

    def row_pair(self, row: int) -> tuple[int, int]:
        """(pair index, target position) of a kernel row."""
        ends = np.cumsum(self.target_len)
        p = int(np.searchsorted(ends, row, side="right"))
        start = int(ends[p - 1]) if p else 0
        return p, row - start


def apply_floor(prob: np.ndarray, key_src: np.ndarray, n_sources: int, floor: float) -> np.ndarray:
    """Raise entries below ``floor`` to it and rescale the rest of each row.

    Floored entries stay exactly at ``floor``; the remaining entries of the
    row shrink so the row still sums to one.
    """
    low = prob < floor
    if floor <= 0.0 or not low.any():
        return prob
    floored = np.bincount(key_src[low], minlength=n_sources) * floor
    rest = np.bincount(key_src, weights=np.where(low, 0.0, prob), minlength=n_sources)
    scale = np.divide(1.0 - floored, rest, out=np.ones(n_sources), where=rest > 0)
    return np.where(low, floor, prob * scale[key_src])


def _m_step(bt: Bitext, counts: np.ndarray, floor: float) -> np.ndarray:
    n = len(bt.sources)
    totals = np.bincount(bt.key_src, weights=counts, minlength=n)
    with np.errstate(divide="ignore", invalid="ignore"):
        prob = counts / totals[bt.key_src]
    empty = totals[bt.key_src] == 0.0
    if empty.any():
        # a source with no mass anywhere (absent from the input table) restarts uniform
        sizes = np.bincount(bt.key_src, minlength=n)
        prob[empty] = 1.0 / sizes[bt.key_src[empty]]
    prob = apply_floor(prob, bt.key_src, n, floor)
    if not np.all(np.isfinite(prob)):
        raise NumericalError("non-finite probability after M-step")
    return prob


def _raise_bad_row(bt: Bitext, bad: int) -> None:
    p, j = bt.row_pair(bad)
    raise NumericalError(f"zero posterior denominator at pair {bt.pair_ids[p]}, target position {j}")


def _run_em(bt: Bitext, prob: np.ndarray, iterations: int, floor: float, backend=None):
    lls = []
    ll0 = None
    for it in range(iterations):
        counts, ll, bad = kernels.e_step(prob, bt.link, bt.row_len, backend=backend)
        if bad >= 0:
            _raise_bad_row(bt, bad)
        ll -= bt.position_term
        if it == 0:
            ll0 = ll
        else:
            lls.append(ll)
        prob = _m_step(bt, counts, floor)
    ll, bad = kernels.loglik(prob, bt.link, bt.row_len, backend=backend)
    if bad >= 0:
        _raise_bad_row(bt, bad)
    lls.append(ll - bt.position_term)
    return prob, ll0, lls


def train(
    corpus: AlignedCorpus, config: TrainingConfig | None = None, backend: str | None = None
) -> tuple[TranslationTable, TrainingDiagnostics]:
    """Fit IBM Model 1 with ``config.iterations`` EM steps.

    ``per_iteration_log_likelihood[i]`` is the corpus log-likelihood of the
    table produced by iteration ``i + 1``. ``converged_at`` is the first
    iteration whose gain over its predecessor fell below 1e-6; training
    still runs to the configured count.
    """
    config = config or TrainingConfig()
    bt = Bitext(corpus, config.direction, config.use_null)
    prob = bt.uniform() if config.init == "uniform" else bt.random(config.seed)
    prob, ll0, lls = _run_em(bt, prob, config.iterations, config.min_prob_floor, backend)

    converged = None
    prev = ll0
    for i, ll in enumerate(lls, start=1):
        if ll - prev < CONVERGENCE_DELTA:
            converged = i
            break
        prev = ll
    diagnostics = TrainingDiagnostics(
        per_iteration_log_likelihood=lls,
        converged_at=converged,
        final_perplexity=math.exp(-lls[-1] / bt.n_target_tokens),
        initial_log_likelihood=ll0,
    )
    table = bt.to_table(prob, iterations=config.iterations, seed=config.seed)
    log.info(
        "trained %d iterations: %d entries, final log-likelihood %.6f",
        config.iterations, len(table), lls[-1],
    )
    return table, diagnostics


def expected_counts(
    corpus: AlignedCorpus, table: TranslationTable, backend: str | None = None
) -> dict[tuple[str, str], float]:
    """E-step expected alignment counts c(source, target) under ``table``."""
    bt = Bitext(corpus, table.direction, table.use_null)
    counts, _, bad = kernels.e_step(bt.probs_from(table), bt.link, bt.row_len, backend=backend)
    if bad >= 0:
        _raise_bad_row(bt, bad)
    s, t = bt.sources, bt.targets
    return {
        (s[a], t[b]): float(c)
        for a, b, c in zip(bt.key_src.tolist(), bt.key_tgt.tolist(), counts.tolist())
    }


def em_step(
    corpus: AlignedCorpus, table: TranslationTable, min_prob_floor: float = 1e-12, backend: str | None = None
) -> TranslationTable:
    """One EM update of ``table`` on ``corpus`` (direction and NULL use taken from the table)."""
    bt = Bitext(corpus, table.direction, table.use_null)
    counts, _, bad = kernels.e_step(bt.probs_from(table), bt.link, bt.row_len, backend=backend)
    if bad >= 0:
        _raise_bad_row(bt, bad)
    return bt.to_table(_m_step(bt, counts, min_prob_floor))


def log_likelihood(corpus: AlignedCorpus, table: TranslationTable, backend: str | None = None) -> float:
    """Corpus log-likelihood; ``-inf`` when some target has zero probability."""
    bt = Bitext(corpus, table.direction, table.use_null)
    ll, bad = kernels.loglik(bt.probs_from(table), bt.link, bt.row_len, backend=backend)
    if bad >= 0:
        return -math.inf
    return ll - bt.position_term


def top_alignments(
    table: TranslationTable, k: int = 20, per_source: int = 3
) -> list[tuple[str, list[tuple[str, float]]]]:
    """Sources ranked by their strongest entry, each with its best targets.

    Ties fall back to code point order, both between rows and within a row.
    The NULL row competes like any other source.
    """
    rows: dict[str, list[tuple[str, float]]] = {}
    for s, t, p in table.items():
        rows.setdefault(s, []).append((t, p))
    ranked = []
    for s, entries in rows.items():
        entries.sort(key=lambda e: (-e[1], e[0]))
        ranked.append((s, entries[:per_source], entries[0][1]))
    ranked.sort(key=lambda r: (-r[2], r[0]))
    return [(s, entries) for s, entries, _ in ranked[:k]]


def viterbi_align(pair: SentencePair, table: TranslationTable) -> AlignmentLinks:
    """Link every target token to its most probable source position.

    Ties go to the earliest position; NULL is considered last and wins only
    when strictly better. Targets unknown to the table link to NULL and are
    listed in ``unknown_targets``.
    """
    src = pair.tokens(source_side(table.direction))
    tgt = pair.tokens(target_side(table.direction))
    if not src or not tgt:
        raise ValueError(f"pair {pair.id} has an empty side")
    known = set(table.targets)
    links, unknown = [], []
    for j, t in enumerate(tgt):
        best, best_p = None, 0.0
        for i, s in enumerate(src):
            p = table.get(s, t)
            if p > best_p:
                best, best_p = i, p
        if table.use_null and table.get(NULL, t) > best_p:
            best, best_p = None, table.get(NULL, t)
        if t not in known or best_p == 0.0:
            unknown.append(j)
            best = None
        links.append((j, best))
    if unknown:
        log.warning("pair %s: %d target token(s) missing from table", pair.id, len(unknown))
    return AlignmentLinks(pair.id, tuple(links), tuple(unknown))


def viterbi_corpus(
    corpus: AlignedCorpus, table: TranslationTable, backend: str | None = None
) -> list[AlignmentLinks]:
    """Vectorised :func:`viterbi_align` over a whole corpus."""
    bt = Bitext(corpus, table.direction, table.use_null)
    best = kernels.viterbi(bt.probs_from(table), bt.link, bt.row_len, backend=backend)
    known = set(table.targets)
    out = []
    row = 0
    tgt_side = target_side(table.direction)
    for p, pair in enumerate(corpus.pairs):
        n_src = len(pair.tokens(source_side(table.direction)))
        links, unknown = [], []
        for j, t in enumerate(pair.tokens(tgt_side)):
            i = int(best[row])
            row += 1
            if t not in known or i < 0:
                unknown.append(j)
                links.append((j, None))
            else:
                links.append((j, i if i < n_src else None))
        out.append(AlignmentLinks(pair.id, tuple(links), tuple(unknown)))
    return out


def source_priors(corpus: AlignedCorpus, table: TranslationTable) -> dict[str, float]:
    """Relative frequencies of source symbols, NULL included.

    Real symbols count their corpus occurrences; NULL counts its expected
    usage, the summed posterior of NULL over every target token under
    ``table``. All counts are normalised together.
    """
    counts: dict[str, float] = {}
    for pair in corpus.pairs:
        for s in pair.tokens(source_side(table.direction)):
            counts[s] = counts.get(s, 0.0) + 1.0
    if table.use_null:
        ec = expected_counts(corpus, table)
        counts[NULL] = math.fsum(c for (s, _), c in ec.items() if s == NULL)
    total = math.fsum(counts.values())
    return {s: c / total for s, c in counts.items()}


def invert_table(table: TranslationTable, source_priors: Mapping[str, float]) -> TranslationTable:
    """Bayes inversion: p(s | t) = tau(t | s) p(s) / sum_s' tau(t | s') p(s').

    The result is keyed by the old targets; NULL (if present) becomes an
    ordinary target column.
    """
    total = math.fsum(source_priors.values())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"source priors sum to {total!r}, expected 1")
    prior = np.asarray([source_priors.get(s, 0.0) for s in table.sources])
    joint = table.prob * prior[table.src]
    denom = np.bincount(table.tgt, weights=joint, minlength=len(table.targets))
    present = np.bincount(table.tgt, minlength=len(table.targets)) > 0
    dead = np.flatnonzero(present & ~(denom > 0.0))
    if dead.size:
        raise ValueError(f"no prior-weighted mass for target {table.targets[dead[0]]!r}")
    inv_dir = "text_to_emoji" if table.direction == "emoji_to_text" else "emoji_to_text"
    return TranslationTable(
        table.targets,
        table.sources,
        table.tgt.copy(),
        table.src.copy(),
        joint / denom[table.tgt],
        inv_dir,
        False,
    )


def corpus_subset(corpus: AlignedCorpus, n: int, seed: int | None = None) -> AlignedCorpus:
    """First ``n`` pairs, or a seeded random sample of ``n`` in corpus order."""
    pairs: Sequence[SentencePair] = corpus.pairs
    if seed is not None and n < len(pairs):
        idx = np.sort(np.random.default_rng(seed).choice(len(pairs), n, replace=False))
        pairs = [pairs[i] for i in idx]
    else:
        pairs = pairs[:n]
    return AlignedCorpus.from_pairs(pairs)
