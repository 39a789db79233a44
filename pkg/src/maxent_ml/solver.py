"""Maximum-likelihood and maximum-entropy solvers.

Two independent routes reach the same pmf:

* ``solve_ml_scalar`` fits the one-parameter family ``dist(lam * u)`` to
  sample frequencies by a bracketed, safeguarded Newton iteration on
  ``g(lam) = u . dist(lam * u)``.
* ``solve_inverse`` maximizes Shannon entropy subject to ``X p = y`` by
  damped Newton descent on the convex dual

      psi(lam) = ln sum_i exp(-(lam @ X)_i) + lam @ y

  whose gradient is ``y - X dist(lam @ X)`` and whose Hessian is the
  covariance of the rows of ``X`` under ``dist(lam @ X)``.

``solve_maxent_coherent`` runs the second route on the single constraint
``u . p = u . r``; agreement with the first route is checked by the tests,
never assumed here.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ConstraintSystem,
    DualSolution,
    Pmf,
    _dist_array,
    _same_length,
    as_pmf,
    as_potential,
)
from .errors import DimensionMismatch, InfeasibleTarget, InvalidInput, MaxIterExceeded

log = logging.getLogger(__name__)

HESSIAN_RIDGE = 1e-12
_EPS = np.finfo(float).eps
POLISH_STEPS = 100


@dataclass(frozen=True)
class SolverConfig:
    tol_residual: float = 1e-10
    max_iter: int = 200
    lambda_blowup: float = 1e8
    damping: float = 0.5

    def __post_init__(self):
        if not (self.tol_residual > 0 and math.isfinite(self.tol_residual)):
            raise InvalidInput("tol_residual must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise InvalidInput("max_iter must be an integer >= 1")
        if not self.lambda_blowup > 1:
            raise InvalidInput("lambda_blowup must exceed 1")
        if not 0 < self.damping < 1:
            raise InvalidInput("damping must lie in (0, 1)")


DEFAULT_CONFIG = SolverConfig()


def _mean_and_var(u: np.ndarray, lam: float) -> tuple[float, float, np.ndarray]:
    p = _dist_array(lam * u)
    mu = float(np.dot(u, p))
    d = u - mu
    return mu, float(np.dot(p, d * d)), p


def solve_ml_scalar(u, r, cfg: SolverConfig = DEFAULT_CONFIG) -> DualSolution:
    """Most likely member of ``dist(lam * u)`` for frequencies ``r``.

    The log-likelihood is concave in ``lam`` with derivative
    ``u . dist(lam u) - u . r``, so the optimum is the unique root of
    ``g(lam) = c`` with ``c = u . r``.  ``g`` decreases strictly from
    ``max u`` to ``min u``, which gives both the bracket and the
    feasibility test.
    """
    u = as_potential(u)
    r = as_pmf(r)
    _same_length(u, r)
    c = float(np.dot(u, r))
    lo_u, hi_u = float(u.min()), float(u.max())

    if lo_u == hi_u:
        return DualSolution(
            lam=[0.0], pmf=Pmf(_dist_array(0.0 * u)), residual_inf=0.0,
            iterations=0, converged=True, degenerate=True,
            notes=("constant potential: every multiplier is coherent",),
        )
    if not lo_u < c < hi_u:
        raise InfeasibleTarget(
            f"target mean {c!r} is not inside the open range ({lo_u!r}, {hi_u!r}) of u"
        )

    def f(lam):
        mu, var, p = _mean_and_var(u, lam)
        return mu - c, var, p

    # Bracket [a, b] with f(a) > 0 > f(b); f decreases in lam.  The bracket
    # is always closed, even when the residual is already small: a target
    # within tol of the boundary would otherwise stop at a meaningless lam.
    lam = 0.0
    fx, var, p = f(lam)
    a, b = -math.inf, math.inf
    if fx > 0:
        a = lam
    else:
        b = lam
    best = (abs(fx), lam, p)
    it = 0
    step = 1.0
    while (math.isinf(a) or math.isinf(b)) and fx != 0.0 and it < cfg.max_iter:
        it += 1
        probe = (a + step) if math.isinf(b) else (b - step)
        if abs(probe) > cfg.lambda_blowup:
            raise InfeasibleTarget(f"no bracket found with |lambda| <= {cfg.lambda_blowup:g}")
        fp, vp, pp = f(probe)
        if fp > 0:
            a = probe
        else:
            b = probe
        # Newton starts from the better end
        if abs(fp) < abs(fx):
            lam, fx, var, p = probe, fp, vp, pp
        step *= 2.0
    best = min(best, (abs(fx), lam, p), key=lambda t: t[0])

    # Safeguarded Newton: bisect whenever the step leaves the bracket.  Runs
    # until lam stops moving; convergence is still judged on the residual.
    while fx != 0.0 and it < cfg.max_iter and not (math.isinf(a) or math.isinf(b)):
        it += 1
        nxt = lam + fx / var if var > 0 else math.nan
        if not (a < nxt < b):
            nxt = 0.5 * (a + b)
            if nxt in (a, b):
                break
        moved = abs(nxt - lam)
        lam = nxt
        fx, var, p = f(lam)
        if fx > 0:
            a = lam
        else:
            b = lam
        if abs(fx) < best[0]:
            best = (abs(fx), lam, p)
        if moved <= 4 * _EPS * max(1.0, abs(lam)) or b - a <= 4 * _EPS * max(1.0, abs(a), abs(b)):
            break

    res, lam, p = best
    if res > cfg.tol_residual:
        raise MaxIterExceeded(
            f"coherence residual {res:.3e} after {it} iterations",
            best=DualSolution(lam=[lam], pmf=Pmf(p), residual_inf=res, iterations=it, converged=False),
        )
    return DualSolution(lam=[lam], pmf=Pmf(p), residual_inf=res, iterations=it, converged=True)


def dual_objective(sys: ConstraintSystem, lam) -> float:
    """``psi(lam) = ln sum_i exp(-(lam @ X)_i) + lam @ y``."""
    lam = np.asarray(lam, dtype=float)
    z = -(lam @ sys.X)
    zmax = z.max()
    return float(zmax + math.log(np.exp(z - zmax).sum()) + lam @ sys.y)


def dual_gradient(sys: ConstraintSystem, lam) -> np.ndarray:
    """Gradient of ``psi``: ``y - X dist(lam @ X)``."""
    lam = np.asarray(lam, dtype=float)
    return sys.y - sys.X @ _dist_array(lam @ sys.X)


def _check_rows(sys: ConstraintSystem, tol: float) -> np.ndarray:
    """Per-row necessary condition for a strictly positive solution.

    Returns the mask of constant rows, which the Newton iteration may keep
    at multiplier zero.
    """
    lo = sys.X.min(axis=1)
    hi = sys.X.max(axis=1)
    const = lo == hi
    for j in range(sys.X.shape[0]):
        yj, a, b = float(sys.y[j]), float(lo[j]), float(hi[j])
        if const[j]:
            if abs(yj - a) > tol:
                raise InfeasibleTarget(f"row {j} is constant {a!r} but y[{j}] = {yj!r}")
        elif not a < yj < b:
            raise InfeasibleTarget(
                f"y[{j}] = {yj!r} is not inside the open range ({a!r}, {b!r}) of row {j}"
            )
    return const


def _solution(sys, lam, it, converged, degenerate=False, notes=()):
    p = _dist_array(lam @ sys.X)
    res = float(np.max(np.abs(sys.X @ p - sys.y)))
    return DualSolution(lam=lam, pmf=Pmf(p), residual_inf=res, iterations=it,
                        converged=converged, degenerate=degenerate, notes=tuple(notes))


def solve_inverse(sys: ConstraintSystem, cfg: SolverConfig = DEFAULT_CONFIG) -> DualSolution:
    """Maximum-entropy pmf satisfying ``X p = y``.

    Newton direction from the (ridge-regularized) covariance Hessian,
    Armijo backtracking on ``psi``, steepest descent when the Hessian
    cannot be factored.  Infeasibility is flagged either by the per-row
    range test or when ``|lam|_inf`` passes ``cfg.lambda_blowup`` without
    the residual improving.
    """
    if not isinstance(sys, ConstraintSystem):
        raise InvalidInput("solve_inverse expects a ConstraintSystem")
    X, y = sys.X, sys.y
    J = X.shape[0]
    const = _check_rows(sys, cfg.tol_residual)
    free = ~const
    notes = []
    if const.any():
        notes.append(f"constant rows {np.flatnonzero(const).tolist()} held at lambda = 0")
    if not free.any():
        return _solution(sys, np.zeros(J), 0, True, degenerate=True, notes=notes)

    Xf, yf = X[free], y[free]

    def psi(l):
        z = -(l @ Xf)
        zmax = z.max()
        return zmax + math.log(np.exp(z - zmax).sum()) + l @ yf

    def full(l):
        out = np.zeros(J)
        out[free] = l
        return out

    def newton_direction(p, grad):
        mu = Xf @ p
        H = (Xf * p) @ Xf.T - np.outer(mu, mu)
        H[np.diag_indices_from(H)] += HESSIAN_RIDGE * max(np.trace(H) / H.shape[0], 0.0)
        try:
            L = np.linalg.cholesky(H)
            d = -np.linalg.solve(L.T, np.linalg.solve(L, grad))
        except np.linalg.LinAlgError:
            d = -grad
        slope = float(grad @ d)
        if not (slope < 0 and np.all(np.isfinite(d))):
            d = -grad
            slope = -float(grad @ grad)
        return d, slope

    lam = np.zeros(int(free.sum()))
    p = _dist_array(lam @ Xf)
    grad = yf - Xf @ p
    res = float(np.abs(grad).max())
    fval = psi(lam)
    it = 0

    while res > cfg.tol_residual:
        if it >= cfg.max_iter:
            best = _solution(sys, full(lam), it, False, notes=notes)
            raise MaxIterExceeded(f"residual {res:.3e} after {it} iterations", best=best)
        it += 1
        d, slope = newton_direction(p, grad)
        # Armijo on psi, or a strict drop of the residual: near the optimum
        # psi changes by ~res**2, which rounding hides.
        t = 1.0
        while t >= 1e-20:
            cand = lam + t * d
            if np.all(np.isfinite(cand)):
                fc = psi(cand)
                if fc <= fval + 1e-4 * t * slope:
                    break
                rc = float(np.abs(yf - Xf @ _dist_array(cand @ Xf)).max())
                if rc < (1.0 - 1e-4 * t) * res:
                    break
            t *= cfg.damping
        else:
            best = _solution(sys, full(lam), it, False, notes=notes)
            if float(np.abs(lam).max()) > cfg.lambda_blowup:
                raise InfeasibleTarget("multipliers diverged while the residual stagnated", best=best)
            raise MaxIterExceeded(f"line search failed at residual {res:.3e}", best=best)

        prev = res
        lam, fval = cand, fc
        p = _dist_array(lam @ Xf)
        grad = yf - Xf @ p
        res = float(np.abs(grad).max())
        log.debug("iter %d: residual %.3e step %.3g", it, res, t)
        if float(np.abs(lam).max()) > cfg.lambda_blowup and res > cfg.tol_residual and res >= 0.5 * prev:
            raise InfeasibleTarget(
                f"|lambda|_inf exceeded {cfg.lambda_blowup:g} with residual stuck at {res:.3e}",
                best=_solution(sys, full(lam), it, False, notes=notes),
            )

    # Refine until lam stops moving, accepting damped Newton steps only while
    # the residual strictly falls.  Matters near the hull boundary, where a
    # residual below tol still leaves lam poorly determined.
    for _ in range(POLISH_STEPS):
        if res == 0.0:
            break
        d, _ = newton_direction(p, grad)
        t = 1.0
        while t >= 1e-12:
            cand = lam + t * d
            pc = _dist_array(cand @ Xf)
            gc = yf - Xf @ pc
            rc = float(np.abs(gc).max())
            if rc < res:
                break
            t *= cfg.damping
        else:
            break
        moved = float(np.abs(t * d).max())
        lam, p, grad, res = cand, pc, gc, rc
        if moved <= 4 * _EPS * max(1.0, float(np.abs(lam).max())):
            break

    return _solution(sys, full(lam), it, True, notes=notes)


def solve_maxent_coherent(u, r, cfg: SolverConfig = DEFAULT_CONFIG) -> DualSolution:
    """Most entropic pmf coherent with ``r`` on ``u``, via the dual."""
    u = as_potential(u)
    r = as_pmf(r)
    _same_length(u, r)
    return solve_inverse(ConstraintSystem(u[None, :], np.array([np.dot(u, r)])), cfg)


def orthogonality_check(u, r, sol: DualSolution) -> float:
    """``u . (r - q)`` for the fitted pmf ``q``; zero at the optimum."""
    u = as_potential(u)
    r = as_pmf(r)
    q = sol.pmf.probs
    if not (u.shape == r.shape == q.shape):
        raise DimensionMismatch("u, r and the solution pmf must have equal length")
    if np.ptp(u) == 0.0:
        return 0.0
    return float(np.dot(u, r) - np.dot(u, q))
