"""Descriptive statistics over entropy matrices.

Pearson correlations between actors, correlation means grouped by sex, and
Tukey box-plot summaries per audio column.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import StatsError


class ActorInfo(NamedTuple):
    actor_id: int
    sex: str  # 'male' or 'female'


class AudioInfo(NamedTuple):
    emotion: str
    intensity: str  # 'normal' or 'strong'
    statement: int
    repetition: int

    def column_key(self) -> str:
        return f"{self.emotion}-{self.intensity}-{self.statement}-{self.repetition}"


@dataclass(frozen=True)
class EntropyMatrix:
    """Actors x audios grid of persistent entropies with row/column metadata."""

    values: np.ndarray
    actor_meta: tuple[ActorInfo, ...]
    audio_meta: tuple[AudioInfo, ...]
    row_complete: tuple[bool, ...]

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise StatsError("entropy matrix must be 2-D")
        if values.shape[0] != len(self.actor_meta) or values.shape[1] != len(self.audio_meta):
            raise StatsError("entropy matrix shape does not match metadata")
        if len(self.row_complete) != values.shape[0]:
            raise StatsError("row_complete length does not match actor count")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def complete(self) -> bool:
        return all(self.row_complete)


def pearson(a: Sequence[float], b: Sequence[float]) -> float:
    """Pearson correlation coefficient cov(a,b) / (sigma_a * sigma_b)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size != b.size:
        raise StatsError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < 2:
        raise StatsError("need at least 2 points")
    da = a - a.mean()
    db = b - b.mean()
    var_a = (da * da).sum()
    var_b = (db * db).sum()
    if var_a == 0.0 or var_b == 0.0:
        raise StatsError("correlation undefined for a constant sequence")
    return float((da * db).sum() / np.sqrt(var_a * var_b))


def correlation_matrix(m: EntropyMatrix) -> np.ndarray:
    """Symmetric actor-by-actor Pearson matrix with exact unit diagonal."""
    if not m.complete:
        raise StatsError("entropy matrix has incomplete rows")
    values = m.values
    n = values.shape[0]
    out = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            r = pearson(values[i], values[j])
            out[i, j] = out[j, i] = r
    return out


def sex_grouped_correlation_means(
    corr: np.ndarray, sexes: Sequence[str]
) -> dict[tuple[str, str], float]:
    """Mean off-diagonal correlation per (sex, sex) block.

    Self-correlations (the unit diagonal) are excluded from within-sex means.
    A sex group with fewer than 2 members has an undefined within-sex mean,
    reported as NaN.
    """
    corr = np.asarray(corr, dtype=np.float64)
    n = corr.shape[0]
    if corr.shape != (n, n) or n != len(sexes):
        raise StatsError("correlation matrix / sex labels shape mismatch")
    if not np.allclose(corr, corr.T, atol=1e-9) or not np.allclose(np.diag(corr), 1.0):
        raise StatsError("expected a symmetric correlation matrix with unit diagonal")
    out: dict[tuple[str, str], float] = {}
    groups = sorted(set(sexes))
    for ga in groups:
        for gb in groups:
            entries = [
                corr[i, j]
                for i in range(n)
                for j in range(n)
                if i != j and sexes[i] == ga and sexes[j] == gb
            ]
            out[(ga, gb)] = float(np.mean(entries)) if entries else float("nan")
    return out


@dataclass(frozen=True)
class BoxplotSummary:
    """Five-number summary plus mean and Tukey-fence outliers."""

    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    mean: float
    outliers: tuple[float, ...]


def summarize(values: Sequence[float]) -> BoxplotSummary:
    """Box-plot summary: type-7 quantiles, outliers beyond 1.5*IQR fences."""
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise StatsError("cannot summarize an empty group")
    q1, med, q3 = np.quantile(x, [0.25, 0.5, 0.75])
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    outliers = tuple(float(v) for v in np.sort(x[(x < lo) | (x > hi)]))
    return BoxplotSummary(
        minimum=float(x.min()),
        q1=float(q1),
        median=float(med),
        q3=float(q3),
        maximum=float(x.max()),
        mean=float(x.mean()),
        outliers=outliers,
    )


def boxplot_by_audio(m: EntropyMatrix) -> list[tuple[AudioInfo, BoxplotSummary]]:
    """One summary per audio column, over actors; grouped by the column's emotion."""
    if not m.complete:
        raise StatsError("entropy matrix has incomplete rows")
    return [(meta, summarize(m.values[:, col])) for col, meta in enumerate(m.audio_meta)]


def correlation_csv(corr: np.ndarray, actors: Sequence[ActorInfo]) -> str:
    """Correlation matrix as CSV with actor ids on both axes."""
    header = "actor," + ",".join(str(a.actor_id) for a in actors)
    lines = [header]
    for a, row in zip(actors, corr):
        lines.append(str(a.actor_id) + "," + ",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def sex_means_csv(means: dict[tuple[str, str], float]) -> str:
    lines = ["sex_a,sex_b,mean_correlation"]
    for (ga, gb), value in sorted(means.items()):
        lines.append(f"{ga},{gb},{value!r}")
    return "\n".join(lines) + "\n"


def boxplot_csv(summaries: list[tuple[AudioInfo, BoxplotSummary]]) -> str:
    lines = ["group,emotion,min,q1,median,q3,max,mean,outliers"]
    for meta, s in summaries:
        outliers = ";".join(repr(v) for v in s.outliers)
        lines.append(
            f"{meta.column_key()},{meta.emotion},{s.minimum!r},{s.q1!r},"
            f"{s.median!r},{s.q3!r},{s.maximum!r},{s.mean!r},{outliers}"
        )
    return "\n".join(lines) + "\n"
