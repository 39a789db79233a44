"""Most probable sample types under a coherence constraint.

For samples of size ``N`` over ``m`` outcomes, a *type* is the count vector
and its multiplicity is the multinomial coefficient ``N! / prod(c_i!)``.
Among types whose empirical mean of ``u`` lies within ``delta`` of a target
``c``, the highest-multiplicity type approaches the maximum-entropy pmf as
``N`` grows.  This module checks that by exhaustive enumeration, so it is
only meant for small ``N`` and ``m``.

Reading the finite-N argmax as the "most probable" distribution is an
interpretation; nothing here proves the asymptotic statement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

import numpy as np

from .core import as_potential
from .errors import EnumerationTooLarge, InvalidInput, NoCoherentType

DEFAULT_CAP = 10**7

# slack on the coherence window so that delta = 0 admits exact lattice hits
_WINDOW_ULPS = 1e-12


@dataclass(frozen=True)
class TypeClass:
    counts: tuple
    log_multiplicity: float

    @classmethod
    def from_counts(cls, counts) -> "TypeClass":
        counts = tuple(int(k) for k in counts)
        if any(k < 0 for k in counts) or not counts:
            raise InvalidInput("type counts must be a nonempty nonnegative vector")
        return cls(counts, log_multiplicity(counts))

    @property
    def N(self) -> int:
        return sum(self.counts)

    def frequencies(self) -> np.ndarray:
        n = self.N
        return np.array([k / n for k in self.counts])


def log_multiplicity(counts) -> float:
    """``ln(N! / prod c_i!)`` via log-gamma.

    Terms are summed over the sorted counts so permuted types get
    bit-identical values, which keeps tie-breaking exact.
    """
    n = sum(counts)
    return math.lgamma(n + 1) - math.fsum(math.lgamma(k + 1) for k in sorted(counts))


def count_types(N: int, m: int) -> int:
    return math.comb(N + m - 1, m - 1)


def enumerate_types(N: int, m: int, cap: int = DEFAULT_CAP) -> Iterator[TypeClass]:
    """Yield every composition of ``N`` into ``m`` nonnegative parts once.

    Order: first part descending, then the remaining parts recursively in
    the same order, e.g. ``(2, 2)`` gives ``[2,0], [1,1], [0,2]``.
    """
    if N < 1 or m < 1:
        raise InvalidInput("enumerate_types needs N >= 1 and m >= 1")
    total = count_types(N, m)
    if total > cap:
        raise EnumerationTooLarge(f"{total} types for N={N}, m={m} exceeds cap {cap}")
    lg = [math.lgamma(k + 1) for k in range(N + 1)]
    lgN = lg[N]
    for counts in _compositions(N, m):
        tc = lgN - math.fsum(lg[k] for k in sorted(counts))
        yield TypeClass(counts, tc)


def _compositions(n: int, m: int) -> Iterator[tuple]:
    if m == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, m - 1):
            yield (first,) + rest


def _better(a: Optional[TypeClass], b: Optional[TypeClass]) -> Optional[TypeClass]:
    """Associative max: larger multiplicity, then lexicographically smaller counts."""
    if a is None:
        return b
    if b is None:
        return a
    if a.log_multiplicity != b.log_multiplicity:
        return a if a.log_multiplicity > b.log_multiplicity else b
    return a if a.counts <= b.counts else b


def best_of(types: Iterable[TypeClass]) -> Optional[TypeClass]:
    """Reduce a chunk of types; results of chunks can be merged with ``_better``."""
    best = None
    for t in types:
        best = _better(best, t)
    return best


def default_delta(u, N: int) -> float:
    u = as_potential(u)
    return float(u.max() - u.min()) / (2 * N)


def most_probable_coherent_type(N: int, u, c: float, delta: Optional[float] = None,
                                cap: int = DEFAULT_CAP) -> TypeClass:
    """Highest-multiplicity type with ``|u . counts/N - c| <= delta``."""
    u = as_potential(u)
    if delta is None:
        delta = default_delta(u, N)
    if delta < 0 or not math.isfinite(delta):
        raise InvalidInput("delta must be a finite nonnegative number")
    if not math.isfinite(c):
        raise InvalidInput("target c must be finite")
    m = u.shape[0]
    window = delta + _WINDOW_ULPS * max(1.0, abs(c))
    ul = u.tolist()
    best = None
    for t in enumerate_types(N, m, cap):
        mean = math.fsum(k * x for k, x in zip(t.counts, ul)) / N
        if abs(mean - c) <= window:
            best = _better(best, t)
    if best is None:
        raise NoCoherentType(f"no type of size {N} has mean of u within {delta!r} of {c!r}")
    return best
