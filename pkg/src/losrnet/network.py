"""Triangle-network output states and GHZ-state bookkeeping.

Party ``X`` holds two inputs ``x`` and ``x'``. Sources pair each party's
first input with the cyclic successor's second input: ``a-b'``, ``b-c'``,
``c-a'``. Sources are Schmidt-diagonal pure states ``sum_i l_i |ii>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import ChoiMatrix, apply_channel_on
from .errors import (
    ArgumentError,
    CapacityError,
    InvariantViolation,
    UnsupportedInputError,
)
from .tensor import StateVector, SystemLayout, permute_systems, permute_vector

DENSE_MAX_DIM = 3


@dataclass(frozen=True)
class SchmidtVector:
    """Nonnegative Schmidt coefficients of a bipartite source."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float).reshape(-1)
        if c.size == 0:
            raise ArgumentError("Schmidt vector must be nonempty")
        if np.any(c < 0):
            raise ArgumentError("Schmidt coefficients must be nonnegative")
        if abs(np.sum(c**2) - 1.0) > 1e-12:
            raise ArgumentError(f"squared coefficients sum to {np.sum(c**2)!r}, not 1")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def normalized(cls, values) -> SchmidtVector:
        v = np.abs(np.asarray(values, dtype=float))
        return cls(v / np.linalg.norm(v))

    @classmethod
    def uniform(cls, d: int) -> SchmidtVector:
        return cls(np.full(d, 1 / np.sqrt(d)))

    @classmethod
    def product(cls, d: int) -> SchmidtVector:
        c = np.zeros(d)
        c[0] = 1.0
        return cls(c)

    @classmethod
    def random(cls, d: int, rng: np.random.Generator) -> SchmidtVector:
        return cls.normalized(np.sqrt(rng.dirichlet(np.ones(d))))

    @property
    def dim(self) -> int:
        return self.coefficients.size

    def __len__(self) -> int:
        return self.coefficients.size

    def state(self) -> np.ndarray:
        """Amplitudes of ``sum_i l_i |ii>`` on the two-system space."""
        d = self.dim
        psi = np.zeros(d * d)
        psi[np.arange(d) * (d + 1)] = self.coefficients
        return psi


def as_schmidt(lam) -> SchmidtVector:
    return lam if isinstance(lam, SchmidtVector) else SchmidtVector.normalized(lam)


@dataclass(frozen=True)
class TriangleConfig:
    choi_A: ChoiMatrix
    choi_B: ChoiMatrix
    choi_C: ChoiMatrix
    lambda_ab: SchmidtVector
    lambda_bc: SchmidtVector
    lambda_ca: SchmidtVector

    def __post_init__(self):
        chois = (self.choi_A, self.choi_B, self.choi_C)
        if len({(c.d_in, c.d_out) for c in chois}) != 1:
            raise ArgumentError("all three channels must share d_in and d_out")
        d_in = self.choi_A.d_in
        for lam in (self.lambda_ab, self.lambda_bc, self.lambda_ca):
            if lam.dim != d_in:
                raise ArgumentError(f"Schmidt vector of length {lam.dim} for d_in={d_in}")

    @classmethod
    def symmetric(cls, choi: ChoiMatrix, lam) -> TriangleConfig:
        lam = as_schmidt(lam)
        return cls(choi, choi, choi, lam, lam, lam)

    @property
    def d_in(self) -> int:
        return self.choi_A.d_in

    @property
    def d_out(self) -> int:
        return self.choi_A.d_out


def ghz_state(n: int, d: int) -> StateVector:
    """``(sum_i |i>^n) / sqrt(d)``."""
    if n < 1 or d < 1:
        raise ArgumentError("GHZ state needs n >= 1 and d >= 1")
    amps = np.zeros(d**n, dtype=complex)
    step = sum(d**k for k in range(n))
    amps[np.arange(d) * step] = 1 / np.sqrt(d)
    return StateVector((d,) * n, amps)


def source_state(cfg: TriangleConfig) -> np.ndarray:
    """Joint source ket in the party-major order ``a a' b b' c c'``."""
    d = cfg.d_in
    psi = np.kron(np.kron(cfg.lambda_ab.state(), cfg.lambda_bc.state()), cfg.lambda_ca.state())
    by_source = SystemLayout([("a", d), ("b'", d), ("b", d), ("c'", d), ("c", d), ("a'", d)])
    by_party = SystemLayout([("a", d), ("a'", d), ("b", d), ("b'", d), ("c", d), ("c'", d)])
    return permute_vector(psi, by_source, by_party)


def assemble_triangle_dense(cfg: TriangleConfig) -> np.ndarray:
    """Output state by explicit contraction of full Choi matrices.

    This is the brute-force reference path; it never looks at arrow
    structure. Each party's channel is applied in turn to the dense joint
    density matrix.
    """
    d, o = cfg.d_in, cfg.d_out
    if d > DENSE_MAX_DIM or o > DENSE_MAX_DIM:
        raise CapacityError(
            f"dense assembly supports d_in, d_out <= {DENSE_MAX_DIM} "
            f"(got {d}, {o}); use assemble_triangle_structured"
        )
    psi = source_state(cfg)
    rho = np.outer(psi, psi.conj())
    layout = [("a", d), ("a'", d), ("b", d), ("b'", d), ("c", d), ("c'", d)]
    for party, out, choi in (
        ("a", "alpha", cfg.choi_A),
        ("b", "beta", cfg.choi_B),
        ("c", "gamma", cfg.choi_C),
    ):
        inputs = [s for s in layout if s[0] in (party, party + "'")]
        rest = [s for s in layout if s not in inputs]
        target = inputs + rest
        rho = permute_systems(rho, SystemLayout(layout), SystemLayout(target))
        n_rest = int(np.prod([dim for _, dim in rest]))
        rho = apply_channel_on(choi, rho, n_rest)
        layout = [(out, o)] + rest
    final = [("alpha", o), ("beta", o), ("gamma", o)]
    return permute_systems(rho, SystemLayout(layout), SystemLayout(final))


def _arrow_tables(choi: ChoiMatrix) -> tuple[np.ndarray, np.ndarray]:
    if choi.grid is None:
        raise ArgumentError("structured assembly requires grid channels")
    d = choi.d_in
    arrow = np.empty((d, d), dtype=np.int64)
    pos = np.empty((d, d), dtype=np.int64)
    for (i, j), (t, p) in choi.grid.cell_index().items():
        arrow[i, j], pos[i, j] = t, p
    return arrow, pos


def branch_amplitudes(cfg: TriangleConfig) -> np.ndarray:
    """One row per triple of arrows ``(t_A, t_B, t_C)`` that fires.

    Row ``g`` holds the unnormalized output ket produced when the three
    parties' Kraus operators are those arrows; the output state is
    ``sum_g |phi_g><phi_g|``. Rows are ordered by arrow triple.
    """
    d, o = cfg.d_in, cfg.d_out
    (tA, pA), (tB, pB), (tC, pC) = (_arrow_tables(c) for c in (cfg.choi_A, cfg.choi_B, cfg.choi_C))
    x, y, z = np.meshgrid(np.arange(d), np.arange(d), np.arange(d), indexing="ij")
    x, y, z = x.ravel(), y.ravel(), z.ravel()
    # A reads (a, a') = (x, z), B reads (y, x), C reads (z, y)
    nA, nB = tA.max() + 1, tB.max() + 1
    key = (tA[x, z] * nB + tB[y, x]) * (tC.max() + 1) + tC[z, y]
    out = (pA[x, z] * o + pB[y, x]) * o + pC[z, y]
    amp = cfg.lambda_ab.coefficients[x] * cfg.lambda_bc.coefficients[y] * cfg.lambda_ca.coefficients[z]
    keys, group = np.unique(key, return_inverse=True)
    phi = np.zeros((keys.size, o**3))
    np.add.at(phi, (group, out), amp)
    return phi


def assemble_triangle_structured(cfg: TriangleConfig) -> np.ndarray:
    """Output state from the rank-one arrow structure of grid channels.

    Cost scales with ``d_in**3`` source branches rather than the ``d_in**12``
    of the dense contraction, so ``d_in = 10`` is immediate.
    """
    phi = branch_amplitudes(cfg)
    return (phi.T @ phi).astype(complex)


# ---------------------------------------------------------------------------
# GHZ bookkeeping


@dataclass(frozen=True)
class QuditGrouping:
    """Relabeling of ``k`` GHZ copies as one GHZ state of dimension ``2**k``.

    ``axes`` is the transpose applied to the ``3k``-qubit tensor stored copy by
    copy (``A1 B1 C1 A2 ...``) to get party-major order ``A1..Ak B1..Bk C1..Ck``;
    each party's ``k`` qubits are then read as one base-2 digit string.
    """

    k: int
    axes: tuple[int, ...]

    def apply(self, psi: StateVector) -> StateVector:
        if psi.dims != (2,) * (3 * self.k):
            raise ArgumentError(f"expected {3 * self.k} qubits, got dims {psi.dims}")
        t = psi.tensor().transpose(self.axes)
        return StateVector((2**self.k,) * 3, t.reshape(-1))


def ghz_copies_to_qudit(k: int) -> QuditGrouping:
    if k < 1:
        raise ArgumentError("need at least one copy")
    axes = tuple(3 * copy + party for party in range(3) for copy in range(k))
    return QuditGrouping(k, axes)


def tensor_power(psi: StateVector, k: int) -> StateVector:
    amps = np.ones(1, dtype=complex)
    for _ in range(k):
        amps = np.kron(amps, psi.amplitudes)
    return StateVector(psi.dims * k, amps)


def _grouping_permutation(size: int, d: int) -> np.ndarray:
    """Basis permutation on ``size`` qudits swapping ``|i..i>`` with ``|i 0..0>``."""
    perm = np.arange(d**size)
    for i in range(1, d):
        full = sum(i * d**k for k in range(size))
        head = i * d ** (size - 1)
        perm[full], perm[head] = head, full
    return perm


def group_parties_reduce(psi: StateVector, partition: Sequence[Sequence[int]]) -> StateVector:
    """Concentrate a GHZ state onto one representative party per group.

    Within each group the lowest-numbered party is the representative and
    the group unitary maps ``|i>^m`` to ``|i>|0>^(m-1)``. The result is
    returned with the representatives first (in group order), followed by
    the remaining parties in ascending order, and equals
    ``GHZ_{n,d} (x) |0...0>``.
    """
    n_parties = len(psi.dims)
    d = psi.dims[0]
    groups = [sorted(int(p) for p in g) for g in partition]
    flat = [p for g in groups for p in g]
    if any(len(g) == 0 for g in groups) or sorted(flat) != list(range(n_parties)):
        raise ArgumentError(f"partition {partition} does not cover parties 0..{n_parties - 1}")
    if len(groups) < 2:
        raise ArgumentError("need at least two groups")
    reference = ghz_state(n_parties, d)
    if psi.dims != reference.dims or np.max(np.abs(psi.amplitudes - reference.amplitudes)) > 1e-12:
        raise UnsupportedInputError("group_parties_reduce only handles GHZ_{N,d} inputs")

    t = psi.tensor()
    for g in groups:
        order = g + [p for p in range(n_parties) if p not in g]
        inverse = np.argsort(order)
        moved = t.transpose(order).reshape(d ** len(g), -1)
        perm = _grouping_permutation(len(g), d)
        new = np.empty_like(moved)
        new[perm] = moved
        t = new.reshape([d] * n_parties).transpose(inverse)

    reps = [g[0] for g in groups]
    rest = sorted(p for g in groups for p in g[1:])
    out = StateVector((d,) * n_parties, t.transpose(reps + rest).reshape(-1))

    expected = np.kron(ghz_state(len(groups), d).amplitudes, _zeros_ket(d, len(rest)))
    if np.max(np.abs(out.amplitudes - expected)) > 1e-12:
        raise InvariantViolation("grouped state is not GHZ times |0...0>")
    return out


def _zeros_ket(d: int, m: int) -> np.ndarray:
    v = np.zeros(d**m, dtype=complex)
    v[0] = 1.0
    return v
