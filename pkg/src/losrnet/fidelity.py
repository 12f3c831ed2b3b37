"""Closed-form GHZ fidelities of the grid-channel constructions.

All polynomial formulas take the Schmidt coefficients of one source and
assume identical sources and identical channels at the three parties. They
are plain polynomials and accept unnormalized input, which the optimizer
relies on for finite differences. ``fidelity_cycles`` is the general
evaluator: it counts consistent 3-cycles of grid cells and accepts three
different sources.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import GridSpec
from .errors import ArgumentError


def _coefficients(lam) -> np.ndarray:
    if hasattr(lam, "coefficients"):
        return lam.coefficients
    return np.asarray(lam, dtype=float).reshape(-1)


def fidelity_22(lam) -> float:
    """GHZ_3 fidelity of the two-qubit-source construction."""
    l = _coefficients(lam)
    if l.size != 2:
        raise ArgumentError(f"expected 2 coefficients, got {l.size}")
    l0, l1 = float(l[0]), float(l[1])
    return 0.5 * (l0**6 + l1**6 + 3 * l0**4 * l1**2 + 2 * l0**3 * l1**3)


def _parity_prefix(values: list[float]) -> list[float]:
    """``out[m]`` = sum of ``values[r]`` over ``r <= m`` with ``r`` of the same parity as ``m``."""
    out = []
    for m, v in enumerate(values):
        out.append(v + (out[m - 2] if m >= 2 else 0.0))
    return out


def fidelity_recursive(lam, d_in: int | None = None) -> float:
    """GHZ_3 fidelity of the qubit-output construction for any input dimension.

    Starts from the two-dimensional formula and adds one increment per
    extra input level, with separate rules for even and odd dimensions.
    Plain floats and prefix sums keep this fast enough for the optimizer.
    """
    arr = _coefficients(lam)
    d_in = arr.size if d_in is None else d_in
    if d_in < 2 or arr.size != d_in:
        raise ArgumentError(f"need {d_in} >= 2 coefficients, got {arr.size}")
    l = [float(x) for x in arr]
    sq = _parity_prefix([x * x for x in l])
    pair = _parity_prefix([0.0] + [l[r] * l[r - 1] for r in range(1, d_in)])  # pair[r] = l_r l_{r-1}

    def upto(prefix, last):
        return prefix[last] if last >= 0 else 0.0

    value = fidelity_22(arr[:2])
    for d in range(3, d_in + 1):
        top, below = l[d - 1], l[d - 2]
        if d % 2 == 0:
            squares = upto(sq, d - 2) ** 2 + upto(sq, d - 3) * upto(sq, d - 1)
            cross = upto(pair, d - 3) * upto(pair, d - 1)
            inc = top**6 + 2 * top**3 * below**3 + 3 * top**2 * squares + 6 * top * below * cross
        else:
            squares = upto(sq, d - 3) * upto(sq, d - 1) + upto(sq, d - 2) ** 2
            cross = upto(pair, d - 2) ** 2
            inc = top**6 + 3 * top**2 * squares + 6 * top * below * cross
        value += 0.5 * inc
    return float(value)


def fidelity_odd(lam, d: int | None = None) -> float:
    """GHZ_{3,d} fidelity of the odd-dimension construction."""
    l = _coefficients(lam)
    d = l.size if d is None else d
    if d % 2 == 0 or d < 3:
        raise ArgumentError(f"odd construction requires odd d >= 3, got {d}")
    if l.size != d:
        raise ArgumentError(f"expected {d} coefficients, got {l.size}")
    total = np.sum(l**3) ** 2
    for i in range(1, (d - 1) // 2 + 1):
        shifted = np.roll(l, -i)  # shifted[k] = l[(k + i) mod d]
        total += 3 * np.sum(l**2 * shifted) ** 2
    return float(total / d)


def fidelity_even_lifted(d: int) -> float:
    """Fidelity for even ``d`` from the ``d - 1`` construction embedded in ``d`` levels."""
    if d < 4 or d % 2:
        raise ArgumentError(f"lifting applies to even d >= 4, got {d}")
    return (1.5 - 1 / (2 * (d - 1))) / d


def fidelity_odd_optimum(d: int) -> float:
    """Value of the odd construction at maximally entangled sources."""
    return (3 * d - 1) / (2 * d**2)


def _sources(lambdas) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(lambdas, (list, tuple)) and len(lambdas) == 3 and all(
        hasattr(x, "coefficients") or np.ndim(x) == 1 for x in lambdas
    ):
        return tuple(_coefficients(x) for x in lambdas)
    single = _coefficients(lambdas)
    return single, single, single


@dataclass(frozen=True)
class FidelityPolynomialResult:
    value: float
    contributions: np.ndarray  # contributions[k, l] = <kkk| rho |lll>
    d_target: int

    def __post_init__(self):
        total = self.contributions.sum() / self.d_target
        if abs(total - self.value) > 1e-12:
            raise ArgumentError("value does not match its contributions")


def fidelity_cycles(spec: GridSpec, lambdas, d_target: int | None = None) -> FidelityPolynomialResult:
    """GHZ_{3,d_target} fidelity of a grid channel used at all three parties.

    ``lambdas`` is one Schmidt vector (used for all three sources) or a
    triple ``(ab', bc', ca')``. For output levels ``k`` and ``l`` the matrix
    element ``<kkk|rho|lll>`` is a sum over source indices ``(x, y, z)`` whose
    cells ``(x, z)``, ``(y, x)``, ``(z, y)`` all sit at position ``k`` of their
    arrows; the same three arrows must then meet again at position ``l``.
    Each such pair of closed triangles contributes the product of the six
    source amplitudes.
    """
    d_target = spec.d_out if d_target is None else d_target
    if d_target < spec.d_out:
        raise ArgumentError(f"target dimension {d_target} below d_out={spec.d_out}")
    lab, lbc, lca = _sources(lambdas)
    for vec in (lab, lbc, lca):
        if vec.size != spec.d_in:
            raise ArgumentError(f"Schmidt vector length {vec.size} != d_in {spec.d_in}")

    arrows = spec.arrows
    at = spec.cell_index()
    o = spec.d_out
    contrib = np.zeros((d_target, d_target))
    for (x, z), (tA, k) in at.items():
        for y in range(spec.d_in):
            tB, kB = at[(y, x)]
            tC, kC = at[(z, y)]
            if kB != k or kC != k:
                continue
            w = lab[x] * lbc[y] * lca[z]
            for l in range(o):
                if l >= len(arrows[tA]) or l >= len(arrows[tB]) or l >= len(arrows[tC]):
                    continue
                x2, z2 = arrows[tA][l]
                y2, x3 = arrows[tB][l]
                z3, y3 = arrows[tC][l]
                if x2 == x3 and y2 == y3 and z2 == z3:
                    contrib[k, l] += w * lab[x2] * lbc[y2] * lca[z2]
    value = float(contrib.sum() / d_target)
    return FidelityPolynomialResult(value, contrib, d_target)
