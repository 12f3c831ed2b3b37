"""Grid channels: combinatorial specifications and their Choi matrices.

A grid channel on input systems ``a a'`` (each of dimension ``d_in``) with
output ``alpha`` (dimension ``d_out``) is described by arrows covering the
``d_in x d_in`` grid of input basis pairs. An arrow through cells
``(i_0, j_0), ..., (i_{k-1}, j_{k-1})`` contributes the rank-one term
``|T><T|`` with ``|T> = sum_l |i_l, j_l, l>`` to the Choi matrix. Each arrow
is therefore a Kraus operator ``sum_l |l><i_l j_l|``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ArgumentError, ValidationError
from .tensor import HERMITIAN_TOL, SystemLayout, is_psd, partial_trace

Cell = tuple[int, int]
Arrow = tuple[Cell, ...]


@dataclass(frozen=True)
class GridSpec:
    """Exact cover of the input grid by arrows of length at most ``d_out``.

    Arrows are stored sorted by their first cell so equal specs compare and
    serialize identically.
    """

    d_in: int
    d_out: int
    arrows: tuple[Arrow, ...]

    def __post_init__(self):
        arrows = tuple(
            tuple((int(i), int(j)) for i, j in arrow) for arrow in self.arrows
        )
        object.__setattr__(self, "arrows", tuple(sorted(arrows)))
        self.validate()

    def validate(self) -> None:
        d_in, d_out = self.d_in, self.d_out
        if d_in < 1 or d_out < 1:
            raise ValidationError("d_in and d_out must be positive")
        problems = []
        for arrow in self.arrows:
            if not 1 <= len(arrow) <= d_out:
                problems.append(f"arrow {arrow} has length {len(arrow)} (allowed 1..{d_out})")
            if len(set(arrow)) != len(arrow):
                problems.append(f"arrow {arrow} repeats a cell")
            for i, j in arrow:
                if not (0 <= i < d_in and 0 <= j < d_in):
                    problems.append(f"cell {(i, j)} lies outside the {d_in}x{d_in} grid")
        counts = Counter(cell for arrow in self.arrows for cell in arrow)
        grid = [(i, j) for i in range(d_in) for j in range(d_in)]
        uncovered = [c for c in grid if counts[c] == 0]
        doubled = sorted(c for c, n in counts.items() if n > 1)
        if uncovered:
            problems.append(f"uncovered cells: {uncovered}")
        if doubled:
            problems.append(f"multiply covered cells: {doubled}")
        if problems:
            raise ValidationError("invalid grid cover: " + "; ".join(problems))

    @property
    def n_arrows(self) -> int:
        return len(self.arrows)

    def cell_index(self) -> dict[Cell, tuple[int, int]]:
        """Map each cell to ``(arrow number, position along the arrow)``."""
        return {
            cell: (t, pos)
            for t, arrow in enumerate(self.arrows)
            for pos, cell in enumerate(arrow)
        }

    def to_text(self) -> str:
        lines = [f"{self.d_in} {self.d_out}"]
        lines += [" ".join(f"{i},{j}" for i, j in arrow) for arrow in self.arrows]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> GridSpec:
        rows = [
            line.split("#", 1)[0].strip() for line in text.splitlines()
        ]
        rows = [r for r in rows if r]
        if not rows:
            raise ValidationError("empty grid specification")
        try:
            d_in, d_out = (int(x) for x in rows[0].split())
            arrows = [
                tuple(tuple(int(x) for x in cell.split(",")) for cell in row.split())
                for row in rows[1:]
            ]
        except ValueError as exc:
            raise ValidationError(f"malformed grid specification: {exc}") from None
        return cls(d_in, d_out, tuple(arrows))


def load_grid(path) -> GridSpec:
    return GridSpec.from_text(Path(path).read_text())


FIXTURES = ("eta_2_2", "eta_3_2", "eta_4_2", "eta_5_2", "eta_3_3", "eta_5_5")


def load_fixture(name: str) -> GridSpec:
    """Load one of the bundled reference grids (see ``FIXTURES``)."""
    if name not in FIXTURES:
        raise ArgumentError(f"unknown fixture {name!r}; available: {FIXTURES}")
    text = resources.files("losrnet.fixtures").joinpath(f"{name}.grid").read_text()
    return GridSpec.from_text(text)


def with_dots(d_in: int, d_out: int, arrows: Iterable[Arrow]) -> GridSpec:
    """Complete a partial cover by adding a length-one arrow on every free cell."""
    arrows = [tuple(a) for a in arrows]
    used = {cell for arrow in arrows for cell in arrow}
    dots = [((i, j),) for i in range(d_in) for j in range(d_in) if (i, j) not in used]
    return GridSpec(d_in, d_out, tuple(arrows + dots))


def generate_eta_din_2(d_in: int) -> GridSpec:
    """Qubit-output grid for any input dimension.

    Block ``r`` contributes the diagonal pair ``(2r,2r)->(2r+1,2r+1)`` and
    the two families of shifted pairs below and to the right of it; free
    cells become dots.
    """
    if d_in < 2:
        raise ArgumentError("d_in must be at least 2")
    arrows = []
    for r in range(d_in // 2):
        arrows.append(((2 * r, 2 * r), (2 * r + 1, 2 * r + 1)))
        for k in range(1, d_in - 1 - 2 * r):
            arrows.append(((2 * r + k, 2 * r), (2 * r + k + 1, 2 * r + 1)))
            arrows.append(((2 * r, 2 * r + k), (2 * r + 1, 2 * r + k + 1)))
    return with_dots(d_in, 2, arrows)


def generate_eta_odd(d: int) -> GridSpec:
    """Odd-dimension grid of ``d`` wrapped diagonals, each of length ``d``."""
    if d < 3 or d % 2 == 0:
        raise ArgumentError(
            f"odd construction needs odd d >= 3, got {d}; for even output "
            "dimensions use the lifted construction (fidelity.fidelity_even_lifted)"
        )
    arrows = [tuple((l, l) for l in range(d))]
    for r in range(1, (d - 1) // 2 + 1):
        arrows.append(tuple((l, (r + l) % d) for l in range(d)))
        arrows.append(tuple(((r + l) % d, l) for l in range(d)))
    return GridSpec(d, d, tuple(arrows))


def random_grid(d_in: int, d_out: int, rng: np.random.Generator) -> GridSpec:
    """Random exact cover: shuffled cells cut into chunks of length 1..d_out."""
    cells = [(i, j) for i in range(d_in) for j in range(d_in)]
    order = rng.permutation(len(cells))
    arrows, pos = [], 0
    while pos < len(cells):
        k = int(rng.integers(1, d_out + 1))
        arrows.append(tuple(cells[o] for o in order[pos : pos + k]))
        pos += k
    return GridSpec(d_in, d_out, tuple(arrows))


@dataclass(frozen=True)
class ChoiMatrix:
    """Choi matrix on ``(a, a', output)``; ``grid`` is set for grid channels."""

    matrix: np.ndarray
    d_in: int
    d_out: int
    grid: GridSpec | None = field(default=None, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.d_in**2 * self.d_out
        if m.shape != (n, n):
            raise ValidationError(f"Choi matrix must be {n}x{n}, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def layout(self) -> SystemLayout:
        return SystemLayout([("a", self.d_in), ("a'", self.d_in), ("out", self.d_out)])

    def check(self, tol: float = HERMITIAN_TOL) -> None:
        """Raise unless the matrix is PSD with identity partial trace over the output."""
        if not is_psd(self.matrix, tol):
            raise ValidationError("Choi matrix is not positive semidefinite")
        reduced = partial_trace(self.matrix, self.layout, ["a", "a'"])
        err = np.max(np.abs(reduced - np.eye(self.d_in**2)))
        if err > tol:
            raise ValidationError(f"Choi matrix is not trace preserving (error {err:g})")

    def kraus(self) -> list[np.ndarray]:
        """Kraus operators of a grid channel, one per arrow."""
        if self.grid is None:
            raise ArgumentError("Kraus decomposition is only tracked for grid channels")
        ops = []
        for arrow in self.grid.arrows:
            k = np.zeros((self.d_out, self.d_in**2))
            for l, (i, j) in enumerate(arrow):
                k[l, i * self.d_in + j] = 1.0
            ops.append(k)
        return ops


def arrow_vector(arrow: Sequence[Cell], d_in: int, d_out: int) -> np.ndarray:
    v = np.zeros(d_in * d_in * d_out)
    for l, (i, j) in enumerate(arrow):
        v[(i * d_in + j) * d_out + l] = 1.0
    return v


def build_choi(spec: GridSpec) -> ChoiMatrix:
    """Sum of ``|T><T|`` over the arrows of ``spec``."""
    spec.validate()
    n = spec.d_in**2 * spec.d_out
    m = np.zeros((n, n), dtype=complex)
    for arrow in spec.arrows:
        v = arrow_vector(arrow, spec.d_in, spec.d_out)
        m += np.outer(v, v)
    return ChoiMatrix(m, spec.d_in, spec.d_out, grid=spec)


def apply_channel(choi: ChoiMatrix, rho_in) -> np.ndarray:
    """Channel action ``Tr_{aa'}[eta (rho^T (x) 1)]`` on a two-system input."""
    rho_in = np.asarray(rho_in, dtype=complex)
    n_in = choi.d_in**2
    if rho_in.shape != (n_in, n_in):
        raise ArgumentError(
            f"input must be {n_in}x{n_in} for d_in={choi.d_in}, got {rho_in.shape}"
        )
    eta = choi.matrix.reshape(n_in, choi.d_out, n_in, choi.d_out)
    # element [o, p] = sum_{x,y} eta[x o, y p] (rho^T)[y, x]
    return np.einsum("xoyp,yx->op", eta, rho_in.T)


def apply_channel_on(choi: ChoiMatrix, rho, n_rest: int) -> np.ndarray:
    """Apply the channel to the leading ``a a'`` factor of ``rho`` on ``(a a') (x) rest``.

    The output system replaces the inputs at the front.
    """
    n_in = choi.d_in**2
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (n_in * n_rest, n_in * n_rest):
        raise ArgumentError("input does not match channel input times rest dimension")
    eta = choi.matrix.reshape(n_in, choi.d_out, n_in, choi.d_out)
    r = rho.reshape(n_in, n_rest, n_in, n_rest)
    # same contraction as apply_channel, with the transpose acting on the input factor only
    out = np.einsum("xoyp,xryq->orpq", eta, r, optimize=True)
    return out.reshape(choi.d_out * n_rest, choi.d_out * n_rest)
