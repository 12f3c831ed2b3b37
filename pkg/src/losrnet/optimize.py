"""Maximization of fidelity polynomials and the scalar GHZ_3 upper-bound problems.

The Schmidt optimizer works on squared coefficients ``p = lambda**2`` in the
probability simplex. Each step is a replicator (natural-gradient) ascent
step with Armijo backtracking; the step length is capped so that no
coordinate loses more than half its mass. Gradients are central finite
differences in ``lambda``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from .errors import ArgumentError, NumericalError

FD_STEP = 1e-6
SIMPLEX_TOL = 1e-12

# Published optimum per input dimension: value and Schmidt coefficients (not squared).
TABLE = {
    2: (0.51704017, (0.91361, 0.40659)),
    3: (0.54009112, (0.82466, 0.52659, 0.20646)),
    4: (0.54595881, (0.79959, 0.54155, 0.24057, 0.09750)),
    5: (0.54749297, (0.79038, 0.54384, 0.24871, 0.12321, 0.04991)),
    6: (0.54790031, (0.78708, 0.54412, 0.25072, 0.13021, 0.06302, 0.02561)),
    7: (0.54800887, (0.78595, 0.54411, 0.25121, 0.13214, 0.06655, 0.03247, 0.01320)),
    8: (0.54803772, (0.78559, 0.54408, 0.25133, 0.13268, 0.06750, 0.03430, 0.01671, 0.00680)),
    9: (0.54804537, (0.78547, 0.54407, 0.25136, 0.13282, 0.06775, 0.03480, 0.01764, 0.00860, 0.00350)),
    10: (0.54804739, (0.78544, 0.54407, 0.25136, 0.13286, 0.06782, 0.03492, 0.01789, 0.00908, 0.00442, 0.00180)),
}


@dataclass(frozen=True)
class SimplexPoint:
    """Squared Schmidt coefficients."""

    p: tuple[float, ...]

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ArgumentError("simplex point needs a nonempty vector")
        if np.any(p < 0) or abs(p.sum() - 1.0) > SIMPLEX_TOL:
            raise ArgumentError(f"not on the simplex: {p}")
        object.__setattr__(self, "p", tuple(float(x) for x in p))

    @property
    def lambdas(self) -> np.ndarray:
        return np.sqrt(np.asarray(self.p))

    @property
    def dim(self) -> int:
        return len(self.p)


@dataclass(frozen=True)
class OptimizationReport:
    """Best restart; ``converged`` refers to that restart."""

    value: float
    argmax: SimplexPoint
    restarts: int
    iterations: int
    converged: bool


Objective = Callable[[np.ndarray], float]


def _evaluate(objective: Objective, lam: np.ndarray) -> float:
    value = float(objective(lam))
    if not math.isfinite(value):
        raise NumericalError(f"objective is {value} at lambda={lam.tolist()}")
    return value


def _gradient(objective: Objective, lam: np.ndarray) -> np.ndarray:
    g = np.empty_like(lam)
    for i in range(lam.size):
        e = np.zeros_like(lam)
        e[i] = FD_STEP
        g[i] = (_evaluate(objective, lam + e) - _evaluate(objective, lam - e)) / (2 * FD_STEP)
    return g


def _project(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def _ascend(objective: Objective, p: np.ndarray, max_iter: int, tol: float):
    lam = np.sqrt(p)
    value = _evaluate(objective, lam)
    eta = 1.0
    for it in range(1, max_iter + 1):
        # d/dp of objective(sqrt(p)) is g / (2 lambda); the replicator factor p cancels the pole
        h = lam * _gradient(objective, lam) / 2
        direction = h - p * h.sum()
        slope = float(direction @ h)
        if np.max(np.abs(direction)) < tol:
            return p, value, it, True
        # no coordinate may lose more than half its mass in one step, so none is clipped to zero
        shrinking = direction < 0
        cap = np.min(0.5 * p[shrinking] / -direction[shrinking], initial=np.inf)
        eta = min(eta, cap)
        while True:
            trial = _project(p + eta * direction)
            trial_value = _evaluate(objective, np.sqrt(trial))
            if trial_value >= value + 1e-4 * eta * max(slope, 0.0) or eta < 1e-12:
                break
            eta /= 2
        if trial_value <= value:
            return p, value, it, True
        p, lam, value = trial, np.sqrt(trial), trial_value
        eta *= 2
    return p, value, max_iter, False


def maximize_schmidt(
    objective: Objective,
    d_in: int,
    restarts: int = 32,
    seed: int = 0,
    max_iter: int = 5000,
    tol: float = 1e-11,
) -> OptimizationReport:
    """Multi-start local ascent of ``objective(lambda)`` over normalized Schmidt vectors.

    Starting points are drawn from the flat Dirichlet distribution on the
    squared coefficients. Results are merged by value, then by the
    lexicographically larger argmax, so the outcome depends only on ``seed``.
    """
    if d_in < 1:
        raise ArgumentError("d_in must be positive")
    if restarts < 1:
        raise ArgumentError("need at least one restart")
    rng = np.random.default_rng(seed)
    starts = rng.dirichlet(np.ones(d_in), size=restarts)
    best, best_ok = None, False
    total_iter = 0
    for start in starts:
        p, value, it, ok = _ascend(objective, start, max_iter, tol)
        total_iter += it
        key = (value, tuple(p))
        if best is None or key > best:
            best, best_ok = key, ok
    value, p = best
    p = np.asarray(p)
    return OptimizationReport(
        value=_evaluate(objective, np.sqrt(p)),
        argmax=SimplexPoint(tuple(p / p.sum())),
        restarts=restarts,
        iterations=total_iter,
        converged=bool(best_ok),
    )


# Symmetric three-qubit problem in the correlators
#   z1 = <Z_i>, z2 = <Z_i Z_j>, z3 = <Z_A Z_B Z_C>.
# u = 1+3z1+3z2+z3 and w = 1-3z1+3z2-z3 equal 8 p(000) and 8 p(111).


def case2_objective(z1, z2, z3):
    """Fidelity bound as a function of the correlators; ``-inf`` where infeasible."""
    z1, z2, z3 = np.broadcast_arrays(*(np.asarray(z, dtype=float) for z in (z1, z2, z3)))
    u = 1 + 3 * z1 + 3 * z2 + z3
    w = 1 - 3 * z1 + 3 * z2 - z3
    with np.errstate(invalid="ignore"):
        finner = np.sqrt(8.0) * np.sqrt(np.clip(1 - z1, 0, None)) ** 3
        ok = (
            (z1 >= 0) & (z1 <= 1)
            & (3 * (1 + 2 * z1 + z2) ** 2 <= 6 * (1 + z1) ** 3)
            & (w >= 0) & (w <= finner) & (u >= 0)
        )
        value = (np.sqrt(np.where(ok, u, 0)) + np.sqrt(np.where(ok, w, 0))) ** 2 / 16
    out = np.where(ok, value, -np.inf)
    return out if out.ndim else float(out)


def _gisin_z2_max(z1: float) -> float:
    return math.sqrt(2.0) * (1 + z1) ** 1.5 - 1 - 2 * z1


def _z3_interval(z1: float, z2: float):
    """Feasible ``z3`` for fixed ``z1, z2`` or None."""
    c = math.sqrt(8.0) * max(1 - z1, 0.0) ** 1.5
    # w in [0, c]  <=>  z3 in [1-3z1+3z2-c, 1-3z1+3z2];  u >= 0  <=>  z3 >= -(1+3z1+3z2)
    hi = min(1 - 3 * z1 + 3 * z2, 1.0)
    lo = max(1 - 3 * z1 + 3 * z2 - c, -(1 + 3 * z1 + 3 * z2), -1.0)
    return (lo, hi) if lo <= hi else None


def _best_z3(z1: float, z2: float, tol: float):
    interval = _z3_interval(z1, z2)
    if interval is None:
        return -math.inf, None
    lo, hi = interval
    if hi - lo < tol:
        z3 = 0.5 * (lo + hi)
        return float(case2_objective(z1, z2, z3)), z3
    res = minimize_scalar(
        lambda t: -case2_objective(z1, z2, t), bounds=(lo, hi), method="bounded",
        options={"xatol": tol},
    )
    return -float(res.fun), float(res.x)


def _best_z2(z1: float, lo: float, hi: float, tol: float):
    hi = min(hi, _gisin_z2_max(z1), 1.0)
    lo = max(lo, -1.0)
    if lo > hi:
        return -math.inf, None, None
    res = minimize_scalar(
        lambda t: -_best_z3(z1, t, tol)[0], bounds=(lo, hi), method="bounded",
        options={"xatol": tol},
    )
    value, z3 = _best_z3(z1, float(res.x), tol)
    return value, float(res.x), z3


@dataclass(frozen=True)
class Case2Result:
    value: float
    z: tuple[float, float, float]
    grid_value: float


def case2_solve(grid_step: float = 1e-2, refine_tol: float = 1e-8) -> Case2Result:
    """Grid scan over ``(z1, z2, z3)`` followed by nested bounded refinement.

    Infeasible grid points score ``-inf`` and are skipped. The refinement
    maximizes over ``z3`` inside ``z2`` inside ``z1``, each on a bracket of
    one grid step around the scan's best point.
    """
    if not 0 < grid_step <= 0.01:
        raise ArgumentError("grid_step must lie in (0, 0.01]")
    if refine_tol <= 0:
        raise ArgumentError("refine_tol must be positive")
    z1s = np.linspace(0, 1, int(round(1 / grid_step)) + 1)
    zs = np.linspace(-1, 1, int(round(2 / grid_step)) + 1)
    grid_best, arg = -math.inf, None
    z2g, z3g = np.meshgrid(zs, zs, indexing="ij")
    for z1 in z1s:
        vals = case2_objective(z1, z2g, z3g)
        k = int(np.argmax(vals))
        if vals.flat[k] > grid_best:
            grid_best = float(vals.flat[k])
            arg = (float(z1), float(z2g.flat[k]), float(z3g.flat[k]))
    if arg is None:
        raise NumericalError("no feasible grid point")
    z1c, z2c, _ = arg

    def outer(z1):
        return -_best_z2(z1, z2c - grid_step, z2c + grid_step, refine_tol)[0]

    res = minimize_scalar(
        outer, bounds=(max(0.0, z1c - grid_step), min(1.0, z1c + grid_step)),
        method="bounded", options={"xatol": refine_tol},
    )
    value, z2, z3 = _best_z2(float(res.x), z2c - grid_step, z2c + grid_step, refine_tol)
    if value < grid_best:
        value, (z1, z2, z3) = grid_best, arg
    else:
        z1 = float(res.x)
    return Case2Result(float(value), (z1, z2, z3), grid_best)


def case2_bound(grid_step: float = 1e-2, refine_tol: float = 1e-8) -> float:
    return case2_solve(grid_step, refine_tol).value


def case1_z2_star() -> float:
    return (42 - 5 * math.sqrt(42)) / 21


def case1_bound() -> float:
    """Bound when one single-party expectation is negative: ``(1 + 3 z2*) / 4``."""
    return (1 + 3 * case1_z2_star()) / 4


SEXTIC = (832000, 114944, -2964416, 4210624, -2743640, 889800, -120125)


@dataclass(frozen=True)
class RootCensus:
    largest: float
    roots: tuple[float, ...]
    in_unit_interval: int


def sextic_roots(samples: int = 200001, xtol: float = 1e-12) -> RootCensus:
    """Real roots of the sextic by sign-change bracketing and bisection."""
    coeffs = np.asarray(SEXTIC, dtype=float)
    bound = 1 + np.max(np.abs(coeffs[1:] / coeffs[0]))  # Cauchy bound
    xs = np.linspace(-bound, bound, samples)
    ys = np.polyval(coeffs, xs)
    roots = []
    for i in np.nonzero(np.sign(ys[:-1]) * np.sign(ys[1:]) <= 0)[0]:
        if ys[i] == 0:
            roots.append(float(xs[i]))
            continue
        if ys[i + 1] == 0:
            continue
        roots.append(bisect(lambda x: np.polyval(coeffs, x), xs[i], xs[i + 1], xtol=xtol))
    if not roots:
        raise NumericalError("sextic has no bracketed real root")
    roots = tuple(sorted(roots))
    return RootCensus(max(roots), roots, sum(0 <= r <= 1 for r in roots))


def sextic_largest_root() -> float:
    return sextic_roots().largest


def rho_opt(z=None) -> np.ndarray:
    """Symmetric three-qubit state with the given correlators and maximal GHZ coherence.

    Diagonal weights ``p0, p1, p2, p3`` (per basis state with 0..3 ones)
    are fixed by the correlators and normalization; the ``|000><111|``
    coherence is ``sqrt(p0 p3)``. Defaults to the Case-2 maximizer.
    """
    if z is None:
        z = case2_solve().z
    z1, z2, z3 = z
    # rows: normalization, z1, z2, z3 in terms of (p0, p1, p2, p3)
    a = np.array([[1, 3, 3, 1], [1, 1, -1, -1], [1, -1, -1, 1], [1, -3, 3, -1]], dtype=float)
    p = np.linalg.solve(a, [1.0, z1, z2, z3])
    if np.any(p < -1e-12):
        raise ArgumentError(f"correlators {z} are not realized by a state: {p}")
    p = np.clip(p, 0, None)
    weights = [p[bin(k).count("1")] for k in range(8)]
    rho = np.diag(weights).astype(complex)
    rho[0, 7] = rho[7, 0] = math.sqrt(p[0] * p[3])
    return rho
