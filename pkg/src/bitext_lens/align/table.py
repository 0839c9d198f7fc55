"""Translation table, training configuration and model-file I/O."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Literal

import numpy as np

NULL = "<NULL>"
"""Source-side NULL symbol. Contains '<', so no tokenizer output can equal it."""

Direction = Literal["emoji_to_text", "text_to_emoji"]
DIRECTIONS = ("emoji_to_text", "text_to_emoji")
_SHORT = {"e2t": "emoji_to_text", "t2e": "text_to_emoji"}

ROW_SUM_TOL = 1e-9


class NumericalError(ArithmeticError):
    """A probability became NaN/inf or a posterior denominator vanished."""


class ModelFileError(ValueError):
    pass


def parse_direction(value: str) -> str:
    value = _SHORT.get(value, value)
    if value not in DIRECTIONS:
        raise ValueError(f"unknown direction {value!r}")
    return value


def source_side(direction: str) -> str:
    return "emoji" if direction == "emoji_to_text" else "text"


def target_side(direction: str) -> str:
    return "text" if direction == "emoji_to_text" else "emoji"


@dataclass(frozen=True)
class TrainingConfig:
    iterations: int = 100
    direction: str = "emoji_to_text"
    use_null: bool = True
    init: Literal["uniform", "random"] = "uniform"
    seed: int | None = None
    min_prob_floor: float = 1e-12

    def __post_init__(self):
        if not isinstance(self.iterations, int) or self.iterations < 1:
            raise ValueError("iterations must be an integer >= 1")
        object.__setattr__(self, "direction", parse_direction(self.direction))
        if self.init not in ("uniform", "random"):
            raise ValueError(f"unknown init {self.init!r}")
        if self.init == "random" and self.seed is None:
            raise ValueError("random init requires an explicit seed")
        if not self.min_prob_floor >= 0.0:
            raise ValueError("min_prob_floor must be >= 0")


@dataclass
class TrainingDiagnostics:
    per_iteration_log_likelihood: list[float]
    converged_at: int | None
    final_perplexity: float
    initial_log_likelihood: float = float("nan")


@dataclass(frozen=True)
class AlignmentLinks:
    """One link per target token; ``None`` as the source index means NULL."""

    pair_id: int
    links: tuple[tuple[int, int | None], ...]
    unknown_targets: tuple[int, ...] = ()


@dataclass(eq=False)
class TranslationTable:
    """Sparse conditional distribution tau(target | source).

    Entries live in three parallel arrays (``src``, ``tgt`` index into
    ``sources``/``targets``; ``prob``). Pairs that never co-occurred are
    absent and read as zero.
    """

    sources: tuple[str, ...]
    targets: tuple[str, ...]
    src: np.ndarray
    tgt: np.ndarray
    prob: np.ndarray
    direction: str = "emoji_to_text"
    use_null: bool = True
    iterations: int | None = None
    seed: int | None = None
    _index: dict | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return int(self.prob.shape[0])

    @property
    def index(self) -> dict[tuple[str, str], int]:
        if self._index is None:
            s, t = self.sources, self.targets
            self._index = {
                (s[a], t[b]): k for k, (a, b) in enumerate(zip(self.src.tolist(), self.tgt.tolist()))
            }
        return self._index

    def get(self, source: str, target: str) -> float:
        k = self.index.get((source, target))
        return 0.0 if k is None else float(self.prob[k])

    def __getitem__(self, key: tuple[str, str]) -> float:
        return self.get(*key)

    def items(self) -> Iterator[tuple[str, str, float]]:
        s, t = self.sources, self.targets
        for a, b, p in zip(self.src.tolist(), self.tgt.tolist(), self.prob.tolist()):
            yield s[a], t[b], p

    def as_dict(self) -> dict[tuple[str, str], float]:
        return {(s, t): p for s, t, p in self.items()}

    def row(self, source: str) -> dict[str, float]:
        try:
            a = self.sources.index(source)
        except ValueError:
            return {}
        mask = self.src == a
        return {self.targets[b]: float(p) for b, p in zip(self.tgt[mask], self.prob[mask])}

    def row_sums(self) -> dict[str, float]:
        sums = np.bincount(self.src, weights=self.prob, minlength=len(self.sources))
        present = np.bincount(self.src, minlength=len(self.sources)) > 0
        return {s: float(v) for s, v, ok in zip(self.sources, sums, present) if ok}

    def check_normalized(self, tol: float = ROW_SUM_TOL) -> None:
        for s, total in self.row_sums().items():
            if abs(total - 1.0) > tol:
                raise NumericalError(f"row {s!r} sums to {total!r}")

    @classmethod
    def from_dict(
        cls,
        probs: dict[tuple[str, str], float],
        direction: str = "emoji_to_text",
        use_null: bool | None = None,
        **meta,
    ) -> "TranslationTable":
        sources: dict[str, int] = {}
        targets: dict[str, int] = {}
        src, tgt, val = [], [], []
        for (s, t), p in probs.items():
            src.append(sources.setdefault(s, len(sources)))
            tgt.append(targets.setdefault(t, len(targets)))
            val.append(float(p))
        if use_null is None:
            use_null = NULL in sources
        return cls(
            tuple(sources),
            tuple(targets),
            np.asarray(src, dtype=np.int64),
            np.asarray(tgt, dtype=np.int64),
            np.asarray(val, dtype=np.float64),
            parse_direction(direction),
            use_null,
            **meta,
        )


def _sorted_rows(table: TranslationTable) -> list[tuple[str, str, float]]:
    return sorted(table.items(), key=lambda r: (r[0], -r[2], r[1]))


def save_table(table: TranslationTable, path: str | Path) -> None:
    """Write the ``#ibm1 v1`` TSV model file.

    Probabilities use ``repr`` (shortest round-trip decimal), so
    :func:`load_table` reproduces every float exactly.
    """
    seed = "none" if table.seed is None else str(table.seed)
    iters = "none" if table.iterations is None else str(table.iterations)
    header = (
        f"#ibm1 v1 direction={table.direction} iterations={iters} "
        f"null={str(table.use_null).lower()} seed={seed}\n"
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header)
        for s, t, p in _sorted_rows(table):
            fh.write(f"{s}\t{t}\t{p!r}\n")


def load_table(path: str | Path) -> TranslationTable:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").split("\n")
    except OSError as exc:
        raise ModelFileError(f"cannot read model {path}: {exc.strerror}") from exc
    except UnicodeDecodeError as exc:
        raise ModelFileError(f"model {path} is not valid UTF-8") from exc
    if not lines or not lines[0].startswith("#ibm1 v1"):
        raise ModelFileError(f"{path}: missing '#ibm1 v1' header")
    meta = {}
    for item in lines[0].split()[2:]:
        key, sep, value = item.partition("=")
        if not sep:
            raise ModelFileError(f"{path}: bad header field {item!r}")
        meta[key] = value
    try:
        direction = parse_direction(meta["direction"])
        use_null = {"true": True, "false": False}[meta["null"]]
        iterations = None if meta.get("iterations", "none") == "none" else int(meta["iterations"])
        seed = None if meta.get("seed", "none") == "none" else int(meta["seed"])
    except (KeyError, ValueError) as exc:
        raise ModelFileError(f"{path}: invalid header: {lines[0]!r}") from exc

    probs: dict[tuple[str, str], float] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ModelFileError(f"{path}: line {lineno}: expected 3 fields")
        try:
            p = float(fields[2])
        except ValueError as exc:
            raise ModelFileError(f"{path}: line {lineno}: bad probability") from exc
        probs[(fields[0], fields[1])] = p
    return TranslationTable.from_dict(
        probs, direction, use_null, iterations=iterations, seed=seed
    )
