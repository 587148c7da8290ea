"""0-dimensional sublevel-set persistence of 1-D signals and its entropy.

The filtration is the lower-star filtration of the path graph on the samples:
vertices enter at their height, each edge enters with its higher endpoint.
Components are born at local minima; when two components meet at a local
maximum the one with the older (lower) birth survives and the younger dies
(elder rule). Exactly one bar never dies; it is born at the global minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BarcodeError
from .signal import DEFAULT_TARGET_LEN, CanonicalSignal, Signal, canonicalize, subsample

INFINITE = math.inf

_ORACLE_MAX_LEN = 4096


@dataclass(frozen=True, order=True)
class PersistenceBar:
    """Interval [birth, death); death is INFINITE for the essential bar."""

    birth: float
    death: float

    def __post_init__(self) -> None:
        if self.death != INFINITE and self.death <= self.birth:
            raise BarcodeError(f"bar death {self.death} must exceed birth {self.birth}")

    @property
    def is_infinite(self) -> bool:
        return self.death == INFINITE


@dataclass(frozen=True)
class Barcode:
    """Multiset of persistence bars plus the maximum filtration value."""

    bars: tuple[PersistenceBar, ...]
    f_max: float

    def as_multiset(self) -> tuple[tuple[float, float], ...]:
        """Bars as a sorted tuple of (birth, death) pairs, for comparison."""
        return tuple(sorted((b.birth, b.death) for b in self.bars))

    def __len__(self) -> int:
        return len(self.bars)


class _Run:
    """A connected component of the growing sublevel graph: a run of indices."""

    __slots__ = ("left", "right", "birth_idx")

    def __init__(self, idx: int):
        self.left = idx
        self.right = idx
        self.birth_idx = idx


def lower_star_barcode(c: CanonicalSignal) -> Barcode:
    """Compute the 0-dimensional barcode of the sublevel filtration.

    Sweeps vertices in canonical order; each new vertex either starts a run,
    extends an adjacent run, or merges the two runs beside it. Merges apply
    the elder rule using canonical rank, so ties in raw value are unambiguous;
    a merge between equal raw values would yield a zero-length bar and is
    dropped. O(n) after the sort.
    """
    n = len(c)
    if n == 0:
        raise BarcodeError("empty signal")
    samples = c.samples
    rank = c.tie_rank
    order = np.argsort(rank)

    run_at: list[_Run | None] = [None] * n
    bars: list[PersistenceBar] = []

    for v in map(int, order):
        left = run_at[v - 1] if v > 0 else None
        right = run_at[v + 1] if v < n - 1 else None
        if left is None and right is None:
            run_at[v] = _Run(v)
        elif right is None:
            left.right = v
            run_at[v] = left
        elif left is None:
            right.left = v
            run_at[v] = right
        else:
            # v is a saddle: elder (lower canonical birth) survives.
            elder, younger = (left, right) if rank[left.birth_idx] < rank[right.birth_idx] else (right, left)
            birth = float(samples[younger.birth_idx])
            death = float(samples[v])
            if death > birth:  # equal raw values give a zero-length bar: drop
                bars.append(PersistenceBar(birth, death))
            elder.left = min(left.left, right.left)
            elder.right = max(left.right, right.right)
            run_at[elder.left] = elder
            run_at[elder.right] = elder
            run_at[v] = elder

    global_min = int(order[0])
    bars.append(PersistenceBar(float(samples[global_min]), INFINITE))
    return Barcode(bars=tuple(bars), f_max=float(samples.max()))


def barcode_bruteforce_oracle(c: CanonicalSignal) -> Barcode:
    """Same contract as :func:`lower_star_barcode`, by quadratic re-scan.

    At every threshold step the present-vertex mask is re-scanned from
    scratch: the runs adjacent to the new vertex are recovered by walking the
    mask, and each run's birth vertex is recomputed as its canonical minimum.
    Independent of the union/run bookkeeping of the fast path.
    """
    n = len(c)
    if n == 0:
        raise BarcodeError("empty signal")
    if n > _ORACLE_MAX_LEN:
        raise BarcodeError(f"oracle input too long ({n} > {_ORACLE_MAX_LEN})")
    samples = c.samples
    rank = c.tie_rank
    order = np.argsort(rank)

    present = np.zeros(n, dtype=bool)
    bars: list[PersistenceBar] = []

    for v in map(int, order):
        present[v] = True
        has_left = v > 0 and present[v - 1]
        has_right = v < n - 1 and present[v + 1]
        if has_left and has_right:
            lo = v - 1
            while lo > 0 and present[lo - 1]:
                lo -= 1
            hi = v + 1
            while hi < n - 1 and present[hi + 1]:
                hi += 1
            left_run = np.arange(lo, v)
            right_run = np.arange(v + 1, hi + 1)
            left_birth = int(left_run[np.argmin(rank[left_run])])
            right_birth = int(right_run[np.argmin(rank[right_run])])
            younger = left_birth if rank[left_birth] > rank[right_birth] else right_birth
            birth = float(samples[younger])
            death = float(samples[v])
            if death > birth:
                bars.append(PersistenceBar(birth, death))

    bars.append(PersistenceBar(float(samples[int(order[0])]), INFINITE))
    return Barcode(bars=tuple(bars), f_max=float(samples.max()))


def persistent_entropy(b: Barcode) -> float:
    """Shannon entropy (nats) of the normalized bar lengths.

    An infinite death is replaced by f_max + 1 before measuring lengths;
    zero-length bars contribute nothing (0*ln 0 := 0). Returns 0 for a
    single-bar barcode.
    """
    if len(b.bars) == 0:
        raise BarcodeError("empty barcode")
    m = b.f_max + 1.0
    lengths = np.array(
        [(m if bar.death == INFINITE else bar.death) - bar.birth for bar in b.bars],
        dtype=np.float64,
    )
    lengths = lengths[lengths > 0.0]
    total = lengths.sum()
    if total <= 0.0:
        raise BarcodeError("all bar lengths are zero")
    p = lengths / total
    return float(-(p * np.log(p)).sum()) + 0.0  # normalize -0.0 for the single-bar case


def signal_barcode(s: Signal, target_len: int = DEFAULT_TARGET_LEN) -> Barcode:
    """Subsample, canonicalize and compute the barcode in one step."""
    return lower_star_barcode(canonicalize(subsample(s, min(target_len, len(s)))))


def signal_entropy(s: Signal, target_len: int = DEFAULT_TARGET_LEN) -> float:
    """Persistent entropy of a signal after subsampling to target_len."""
    return persistent_entropy(signal_barcode(s, target_len))


def barcode_to_csv(b: Barcode) -> str:
    """Serialize a barcode as 'birth,death' lines, INFINITE as 'inf'."""
    lines = ["birth,death"]
    for birth, death in b.as_multiset():
        death_str = "inf" if death == INFINITE else repr(death)
        lines.append(f"{birth!r},{death_str}")
    return "\n".join(lines) + "\n"
