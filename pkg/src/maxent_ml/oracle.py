"""Brute-force references for the solvers.

Nothing in this module calls into ``solver``: the maximum-entropy oracle
scans the coherent points of a lattice on the simplex, the likelihood
oracle scans a grid of multipliers.  Both are exhaustive and only practical
for ``m <= 3`` and a single multiplier.  Ties go to the first
(lexicographically smallest) candidate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Pmf, _same_length, as_pmf, as_potential
from .errors import InvalidInput, InvalidRange, NoFeasiblePoint


@dataclass(frozen=True)
class SimplexGrid:
    m: int
    step: float = 0.002

    def __post_init__(self):
        if self.m not in (2, 3):
            raise InvalidInput("SimplexGrid supports m = 2 or 3")
        if not self.step > 0:
            raise InvalidInput("grid step must be positive")
        n = round(1.0 / self.step)
        if n < 1 or abs(n * self.step - 1.0) > 1e-9:
            raise InvalidInput(f"1/step must be an integer, got step={self.step!r}")

    @property
    def divisions(self) -> int:
        return round(1.0 / self.step)

    def points(self) -> np.ndarray:
        """All lattice points ``k/n`` of the closed simplex, lexicographic order."""
        n = self.divisions
        if self.m == 2:
            i = np.arange(n + 1)
            return np.column_stack([i / n, (n - i) / n])
        i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
        keep = i + j <= n
        i, j = i[keep], j[keep]
        return np.column_stack([i / n, j / n, (n - i - j) / n])


def _entropies(P: np.ndarray) -> np.ndarray:
    # sorted columns: permuted points get identical sums, so ties are exact
    S = np.sort(P, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(S > 0, S * np.log(np.where(S > 0, S, 1.0)), 0.0)
    return -terms.sum(axis=1)


def coherent_grid_points(u, c: float, grid: SimplexGrid | None = None) -> np.ndarray:
    """Points where the plane ``u . p = c`` crosses the grid lines ``p_k = i * step``.

    Every returned row is a pmf with ``u . p = c`` up to rounding, sorted
    lexicographically.  A constant ``u`` is coherent everywhere or nowhere;
    in the first case the lattice points themselves are returned.
    """
    u = as_potential(u)
    if grid is None:
        grid = SimplexGrid(u.shape[0])
    if grid.m != u.shape[0]:
        raise InvalidInput(f"grid dimension {grid.m} does not match potential length {u.shape[0]}")
    if np.ptp(u) == 0.0:
        if abs(u[0] - c) <= 1e-12 * max(1.0, abs(c)):
            return grid.points()
        return np.empty((0, grid.m))

    n = grid.divisions
    found = []
    if grid.m == 2:
        t = (c - u[1]) / (u[0] - u[1])
        if 0.0 <= t <= 1.0:
            found.append(np.array([[t, 1.0 - t]]))
    else:
        fixed = np.arange(n + 1) / n
        for a in range(3):
            b, d = [k for k in range(3) if k != a]
            if u[b] == u[d]:
                continue
            rest = (n - np.arange(n + 1)) / n
            # p_a fixed, p_b = t, p_d = rest - t
            t = (c - u[a] * fixed - u[d] * rest) / (u[b] - u[d])
            ok = (t >= 0.0) & (t <= rest)
            P = np.zeros((int(ok.sum()), 3))
            P[:, a] = fixed[ok]
            P[:, b] = t[ok]
            P[:, d] = rest[ok] - t[ok]
            found.append(P)
    if not found:
        return np.empty((0, grid.m))
    P = np.clip(np.vstack(found), 0.0, 1.0)
    return P[np.lexsort(P.T[::-1])]


def grid_maxent(u, c: float, grid: SimplexGrid | None = None) -> Pmf:
    """Most entropic of the coherent grid crossings, first wins on ties."""
    P = coherent_grid_points(u, c, grid)
    if P.shape[0] == 0:
        raise NoFeasiblePoint(f"no grid point is coherent with target {c!r}")
    return Pmf(P[int(np.argmax(_entropies(P)))])


def grid_ml(u, r, lo: float, hi: float, step: float) -> float:
    """Multiplier on ``lo, lo+step, ...`` maximizing ``sum r_i ln dist(lam u)_i``."""
    u = as_potential(u)
    r = as_pmf(r)
    _same_length(u, r)
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise InvalidRange(f"need finite lo < hi, got [{lo!r}, {hi!r}]")
    if not (step > 0 and math.isfinite(step)):
        raise InvalidRange("step must be positive")
    if np.ptp(u) == 0.0:
        # flat likelihood: first grid point wins
        return float(lo)
    k = np.arange(int(math.floor((hi - lo) / step + 1e-9)) + 1)
    lams = lo + k * step
    # sum_i r_i ln dist(lam u)_i = -ln sum_i exp(-lam (u_i - u.r))
    d = u - math.fsum(u * r)
    Z = -np.outer(lams, d)
    zmax = Z.max(axis=1, keepdims=True)
    ll = -(zmax[:, 0] + np.log(np.exp(Z - zmax).sum(axis=1)))
    return float(lams[int(np.argmax(ll))])
