"""Network inequalities and the catalog of GHZ fidelity bounds.

Slack convention for every check: right-hand side minus left-hand side,
so a nonnegative slack means the inequality holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ArgumentError
from .tensor import is_density_matrix

MARGINAL_TOL = 1e-9


def _distribution(p, name: str = "p") -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(p < -1e-12):
        raise ArgumentError(f"{name} has negative entries")
    if abs(p.sum() - 1.0) > MARGINAL_TOL:
        raise ArgumentError(f"{name} sums to {p.sum():.12g}, expected 1")
    return np.clip(p, 0.0, None)


def marginals(p) -> list[np.ndarray]:
    p = np.asarray(p, dtype=float)
    axes = range(p.ndim)
    return [p.sum(axis=tuple(a for a in axes if a != k)) for k in axes]


@dataclass(frozen=True)
class FinnerResult:
    slack: float
    outcome: tuple[int, ...]  # outcome attaining the minimum slack


def finner_check(p, margs: Sequence | None = None) -> FinnerResult:
    """Worst slack of ``p(x_1..x_N) <= sqrt(prod_k p_k(x_k))`` over all outcomes.

    ``p`` is an ``N``-index array of joint probabilities. Supplied marginals
    must agree with those of ``p``.
    """
    p = _distribution(p)
    computed = marginals(p)
    if margs is not None:
        if len(margs) != p.ndim:
            raise ArgumentError(f"expected {p.ndim} marginals, got {len(margs)}")
        for k, (given, actual) in enumerate(zip(margs, computed)):
            given = np.asarray(given, dtype=float)
            if given.shape != actual.shape or np.max(np.abs(given - actual)) > MARGINAL_TOL:
                raise ArgumentError(f"marginal {k} is inconsistent with the joint distribution")
    product = np.ones_like(p)
    for k, m in enumerate(computed):
        shape = [1] * p.ndim
        shape[k] = m.size
        product = product * m.reshape(shape)
    slack = np.sqrt(product) - p
    k = int(np.argmin(slack))
    return FinnerResult(float(slack.flat[k]), tuple(int(i) for i in np.unravel_index(k, p.shape)))


def z_distribution(rho, dims: Sequence[int]) -> np.ndarray:
    """Computational-basis outcome probabilities as an array indexed by outcomes."""
    rho = np.asarray(rho, dtype=complex)
    if not is_density_matrix(rho):
        raise ArgumentError("not a density matrix")
    return np.clip(np.real(np.diag(rho)), 0.0, None).reshape(tuple(dims))


@dataclass(frozen=True)
class ZStatistics:
    """Single, pairwise and triple Z expectations of a three-qubit state."""

    single: tuple[float, float, float]
    pair: dict  # frozenset({i, j}) -> <Z_i Z_j>
    triple: float


def z_statistics(p) -> ZStatistics:
    p = np.asarray(p, dtype=float).reshape(2, 2, 2)
    s = np.array([1.0, -1.0])
    signs = [s.reshape(2, 1, 1), s.reshape(1, 2, 1), s.reshape(1, 1, 2)]
    single = tuple(float(np.sum(p * signs[k])) for k in range(3))
    pair = {
        frozenset((i, j)): float(np.sum(p * signs[i] * signs[j]))
        for i in range(3) for j in range(i + 1, 3)
    }
    return ZStatistics(single, pair, float(np.sum(p * signs[0] * signs[1] * signs[2])))


@dataclass(frozen=True)
class ZCorrelators:
    z1: float
    z2: float
    z3: float

    def __post_init__(self):
        for name in ("z1", "z2", "z3"):
            if not -1 - 1e-12 <= getattr(self, name) <= 1 + 1e-12:
                raise ArgumentError(f"{name} outside [-1, 1]")


def z_correlators(rho) -> ZCorrelators:
    st = z_statistics(z_distribution(rho, (2, 2, 2)))
    return ZCorrelators(sum(st.single) / 3, sum(st.pair.values()) / 3, st.triple)


def fidelity_bound_from_z(z: ZCorrelators) -> float:
    """Computational-basis bound on the GHZ_3 fidelity; radicands are clipped at 0."""
    u = max(1 + 3 * z.z1 + 3 * z.z2 + z.z3, 0.0)
    w = max(1 - 3 * z.z1 + 3 * z.z2 - z.z3, 0.0)
    return (math.sqrt(u) + math.sqrt(w)) ** 2 / 16


def measurement_fidelity_bound(p) -> float:
    """``(1/d) (sum_i sqrt(p(i..i)))**2`` from computational-basis statistics."""
    p = _distribution(p)
    d = p.shape[0]
    diag = np.array([p[(i,) * p.ndim] for i in range(d)])
    return float(np.sum(np.sqrt(diag)) ** 2 / d)


@dataclass(frozen=True)
class GisinSlack:
    """Slack of the applicable inequality; the other entry is None."""

    positive: float | None
    negative: float | None

    @property
    def worst(self) -> float:
        return min(s for s in (self.positive, self.negative) if s is not None)


def _normalize_signs(st: ZStatistics) -> ZStatistics:
    """Relabel so that at most ``Z_C`` is negative.

    Flipping every outcome bit (conjugation by X on all three qubits)
    negates single and triple correlators; a permutation then moves the
    one remaining negative party to C.
    """
    single, triple = list(st.single), st.triple
    if sum(z < 0 for z in single) >= 2:
        single, triple = [-z for z in single], -triple
    order = [0, 1, 2]
    negatives = [k for k in range(3) if single[k] < 0]
    if negatives:
        k = negatives[0]
        order = [i for i in range(3) if i != k] + [k]
    pair = {
        frozenset((a, b)): st.pair[frozenset((order[a], order[b]))]
        for a in range(3) for b in range(a + 1, 3)
    }
    return ZStatistics(tuple(single[i] for i in order), pair, triple)


def gisin_slacks(st: ZStatistics) -> GisinSlack:
    st = _normalize_signs(st)
    za, zb, zc = st.single
    zab = st.pair[frozenset((0, 1))]
    zac = st.pair[frozenset((0, 2))]
    zbc = st.pair[frozenset((1, 2))]
    if zc >= 0:
        lhs = (1 + za + zb + zab) ** 2 + (1 + za + zc + zac) ** 2 + (1 + zb + zc + zbc) ** 2
        rhs = 6 * (1 + za) * (1 + zb) * (1 + zc)
        return GisinSlack(float(rhs - lhs), None)
    lhs = (1 + za + zb + zab) ** 2 + (1 + za - zc + zac) ** 2 + (1 + zb - zc + zbc) ** 2
    rhs = 6 * (1 + za) * (1 + zb) * (1 - zc) + 8 * zc * (za + zb + za * zb)
    return GisinSlack(None, float(rhs - lhs))


def gisin_check(rho) -> GisinSlack:
    """Gisin's triangle inequality on the Z statistics of a three-qubit state."""
    return gisin_slacks(z_statistics(z_distribution(rho, (2, 2, 2))))


def matusita(distributions: Sequence) -> float:
    """``sum_x (prod_i p_i(x))**(1/r)`` for ``r`` distributions on a common set."""
    if len(distributions) < 1:
        raise ArgumentError("need at least one distribution")
    ps = [_distribution(p, f"distribution {k}").reshape(-1) for k, p in enumerate(distributions)]
    if len({p.size for p in ps}) != 1:
        raise ArgumentError("distributions live on sets of different sizes")
    prod = np.prod(np.vstack(ps), axis=0)
    return float(np.sum(prod ** (1.0 / len(ps))))


@dataclass(frozen=True)
class BoundRecord:
    N: int
    d: int
    lower: float
    upper: float
    provenance: str

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper <= 1:
            raise ArgumentError(f"inconsistent bounds {self.lower} > {self.upper}")


def ghz_bound_catalog(N: int, d: int) -> BoundRecord:
    """Known lower (construction) and upper bounds on the LOSR fidelity with GHZ_{N,d}."""
    if N < 3 or d < 2:
        raise ArgumentError("need N >= 3 parties and dimension d >= 2")
    if N >= 4:
        return BoundRecord(N, d, 1 / d, 1 / d,
                           "Finner bound with Matusita fidelity; product state attains it")
    if d == 2:
        return BoundRecord(3, 2, 0.548, 0.618,
                           "qubit grid-channel construction; Gisin and Finner bound")
    lower = (1.5 - (d // 2) / (d * (d - 1))) / d
    return BoundRecord(3, d, lower, 1 / math.sqrt(d),
                       "odd-dimension construction (lifted for even d); Finner bound")


def cluster_bound(m: int, n: int) -> BoundRecord:
    """Bounds for the ``m x n`` cluster state from ``floor(mn/3)`` extracted GHZ_3 copies."""
    if m < 1 or n < 1 or m * n < 3:
        raise ArgumentError("need m, n >= 1 and m * n >= 3")
    mn = m * n
    return BoundRecord(mn, 2, 2.0 ** -(mn // 2), 2.0 ** (-0.5 * (mn // 3)),
                       "product-state overlap; GHZ_3 copies extracted by striping")
