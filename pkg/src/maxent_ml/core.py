"""Potentials, pmfs and the functionals defined on them.

A *potential* ``u`` is a real vector that induces the pmf

    dist(u)_i = exp(-u_i) / sum_j exp(-u_j)

and is only determined by that pmf up to an additive constant.  Everything
here is a pure function of immutable inputs.  Functions accept plain
sequences, numpy arrays, or the ``Potential``/``Pmf`` wrappers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import DimensionMismatch, InvalidInput, SupportMismatch

PMF_SUM_TOL = 1e-12
PMF_RENORM_TOL = 1e-9

ArrayLike = Union[Sequence[float], np.ndarray, "Potential", "Pmf"]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _vector(x, name: str) -> np.ndarray:
    try:
        a = np.asarray(x, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"{name}: not a numeric vector ({exc})") from None
    if a.ndim != 1:
        raise InvalidInput(f"{name}: expected a 1-d vector, got shape {a.shape}")
    if a.size == 0:
        raise InvalidInput(f"{name}: empty vector")
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name}: entries must be finite")
    return a


def as_potential(u) -> np.ndarray:
    """Validate ``u`` as a potential and return it as a float array."""
    if isinstance(u, Potential):
        return u.values
    return _vector(u, "potential")


def as_pmf(p) -> np.ndarray:
    """Validate ``p`` as a pmf and return it as a float array.

    Vectors whose sum is off by more than 1e-12 but less than 1e-9 are
    renormalized; anything further from 1 is rejected.
    """
    if isinstance(p, Pmf):
        return p.probs
    a = _vector(p, "pmf")
    if np.any(a < 0):
        raise InvalidInput("pmf: entries must be nonnegative")
    s = math.fsum(a)
    if abs(s - 1.0) > PMF_SUM_TOL:
        if abs(s - 1.0) > PMF_RENORM_TOL:
            raise InvalidInput(f"pmf: entries sum to {s!r}, not 1")
        a = a / s
    return a


def _same_length(*arrays: np.ndarray) -> None:
    n = {a.shape[0] for a in arrays}
    if len(n) != 1:
        raise DimensionMismatch(f"length mismatch: {[a.shape[0] for a in arrays]}")


@dataclass(frozen=True)
class Potential:
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(_vector(self.values, "potential")))

    def __len__(self):
        return self.values.shape[0]

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    @property
    def is_constant(self) -> bool:
        return bool(np.ptp(self.values) == 0.0)


@dataclass(frozen=True)
class Pmf:
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _frozen(as_pmf(self.probs)))

    def __len__(self):
        return self.probs.shape[0]

    def __iter__(self):
        return iter(self.probs)

    def __getitem__(self, i):
        return self.probs[i]

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)


@dataclass(frozen=True)
class Sample:
    """Integer outcome counts of a random sample."""

    counts: tuple

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 1 or c.size == 0:
            raise InvalidInput("sample: counts must be a nonempty 1-d vector")
        if not np.issubdtype(c.dtype, np.integer):
            if not np.all(np.isfinite(c)) or np.any(c != np.round(c)):
                raise InvalidInput("sample: counts must be integers")
        if np.any(c < 0):
            raise InvalidInput("sample: counts must be nonnegative")
        if not np.any(c > 0):
            raise InvalidInput("sample: at least one count must be positive")
        object.__setattr__(self, "counts", tuple(int(k) for k in c))

    @property
    def total(self) -> int:
        return sum(self.counts)

    def frequencies(self) -> Pmf:
        n = self.total
        return Pmf(np.array([k / n for k in self.counts]))


@dataclass(frozen=True)
class ConstraintSystem:
    """The linear moment problem ``X p = y`` over pmfs ``p``.

    Each row of ``X`` is a potential; ``y`` holds the target mean of each.
    """

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        try:
            X = np.asarray(self.X, dtype=float)
        except (TypeError, ValueError) as exc:
            raise InvalidInput(f"X: not a numeric matrix ({exc})") from None
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
            raise InvalidInput(f"X: expected a nonempty J x m matrix, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise InvalidInput("X: entries must be finite")
        y = _vector(self.y, "y")
        if y.shape[0] != X.shape[0]:
            raise DimensionMismatch(f"X has {X.shape[0]} rows but y has length {y.shape[0]}")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y))

    @property
    def shape(self) -> tuple:
        return self.X.shape

    def constant_rows(self) -> np.ndarray:
        """Boolean mask of rows that assign the same value to every outcome."""
        return np.ptp(self.X, axis=1) == 0.0


@dataclass(frozen=True)
class DualSolution:
    """Multipliers, the pmf they induce, and solver diagnostics.

    ``pmf`` is always ``dist(lam @ X)`` for the problem that was solved.
    """

    lam: np.ndarray
    pmf: Pmf
    residual_inf: float
    iterations: int
    converged: bool
    degenerate: bool = False
    notes: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "lam", _frozen(np.atleast_1d(self.lam)))

    @property
    def lambda0(self) -> float:
        """The single multiplier of a one-constraint problem."""
        if self.lam.shape[0] != 1:
            raise DimensionMismatch("lambda0 is only defined for one constraint")
        return float(self.lam[0])


def _dist_array(u: np.ndarray) -> np.ndarray:
    # dist(u) == dist(u - min u); the shifted exponents are all <= 0.
    w = np.exp(-(u - u.min()))
    return w / w.sum()


def dist(u) -> Pmf:
    """The pmf induced by potential ``u``: ``p_i ∝ exp(-u_i)``."""
    return Pmf(_dist_array(as_potential(u)))


def log_partition(u) -> float:
    """``ln sum_i exp(-u_i)``, evaluated without overflow."""
    u = as_potential(u)
    lo = u.min()
    return float(-lo + math.log(np.exp(-(u - lo)).sum()))


def shift(u, C: float) -> Potential:
    """Add the constant ``C`` to every entry; ``dist`` is unchanged."""
    u = as_potential(u)
    if not math.isfinite(C):
        raise InvalidInput("shift constant must be finite")
    return Potential(u + C)


def scale(u, k: float) -> Potential:
    """The collinear potential ``k * u``."""
    u = as_potential(u)
    if not math.isfinite(k):
        raise InvalidInput("scale factor must be finite")
    return Potential(k * u)


def mean_value(u, p) -> float:
    """Mean of potential ``u`` under pmf ``p`` (their scalar product)."""
    u = as_potential(u)
    p = as_pmf(p)
    _same_length(u, p)
    # rounding can push a convex combination just outside [min u, max u]
    return float(np.clip(np.dot(u, p), u.min(), u.max()))


def coherence(u, p, q) -> float:
    """``u.p - u.q``; zero when ``p`` and ``q`` are coherent on ``u``."""
    u = as_potential(u)
    p = as_pmf(p)
    q = as_pmf(q)
    _same_length(u, p, q)
    return mean_value(u, p) - mean_value(u, q)


def entropy_of_potential(u) -> float:
    """Mean of ``u`` under its own distribution, ``u . dist(u)``.

    Not invariant under shifts: adding ``C`` to ``u`` adds ``C`` here.
    """
    u = as_potential(u)
    return mean_value(u, _dist_array(u))


def shannon_entropy(p) -> float:
    """Shannon entropy in nats, with ``0 log 0 = 0``."""
    p = as_pmf(p)
    nz = p[p > 0]
    h = -float(np.dot(nz, np.log(nz)))
    return min(max(h, 0.0), math.log(p.shape[0]))


def log_likelihood(r, p) -> float:
    """Per-observation multinomial log-likelihood ``sum_i r_i ln p_i``.

    Outcomes with ``r_i = 0`` contribute nothing.
    """
    r = as_pmf(r)
    p = as_pmf(p)
    _same_length(r, p)
    support = r > 0
    if np.any(p[support] == 0):
        raise SupportMismatch("p assigns zero probability to an observed outcome")
    return float(np.dot(r[support], np.log(p[support])))


def to_bits(nats: float) -> float:
    return nats / math.log(2.0)
