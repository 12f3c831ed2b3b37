"""Dense complex kernels for small multi-system states and operators.

Matrices are plain ``numpy`` arrays of dtype complex128. Composite systems
use the big-endian convention: the leftmost subsystem is the most
significant digit of a basis index, so ``|i j k>`` has flat index
``(i * d_j + j) * d_k + k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ArgumentError, CapacityError

HERMITIAN_TOL = 1e-9
EQUALITY_TOL = 1e-10
DEFAULT_CAP = 2**24


@dataclass(frozen=True)
class SystemLayout:
    """Ordered tensor factors, each a ``(label, dimension)`` pair."""

    systems: tuple[tuple[str, int], ...]

    def __init__(self, systems: Iterable[tuple[str, int]]):
        systems = tuple((str(label), int(dim)) for label, dim in systems)
        labels = [label for label, _ in systems]
        if len(set(labels)) != len(labels):
            raise ArgumentError(f"duplicate labels in layout: {labels}")
        if any(dim < 1 for _, dim in systems):
            raise ArgumentError("dimensions must be positive")
        object.__setattr__(self, "systems", systems)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.systems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.systems)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ArgumentError(f"unknown system label {label!r}") from None

    def __len__(self) -> int:
        return len(self.systems)


def as_layout(layout) -> SystemLayout:
    return layout if isinstance(layout, SystemLayout) else SystemLayout(layout)


@dataclass(frozen=True)
class StateVector:
    """A normalized pure state on a composite system."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != int(np.prod(dims, dtype=np.int64)):
            raise ArgumentError(
                f"{amps.size} amplitudes do not match dims {dims}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise ArgumentError(f"state is not normalized (norm {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_unnormalized(cls, dims: Sequence[int], amplitudes) -> StateVector:
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ArgumentError("cannot normalize the zero vector")
        return cls(tuple(dims), amps / norm)

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def __len__(self) -> int:
        return self.amplitudes.size


def basis_state(dims: Sequence[int], digits: Sequence[int]) -> StateVector:
    """Computational basis ket ``|digits>`` on systems of the given dims."""
    amps = np.zeros(int(np.prod(dims)), dtype=complex)
    amps[np.ravel_multi_index(tuple(digits), tuple(dims))] = 1.0
    return StateVector(tuple(dims), amps)


def kron(a, b, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Tensor product of two matrices, refusing results with more than ``cap`` entries."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    b = np.atleast_2d(np.asarray(b, dtype=complex))
    entries = a.size * b.size
    if entries > cap:
        raise CapacityError(
            f"kron result would have {entries} entries (cap {cap})"
        )
    return np.kron(a, b)


def kron_all(*factors, cap: int = DEFAULT_CAP) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = kron(out, f, cap=cap)
    return out


def _check_square(m: np.ndarray, layout: SystemLayout) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ArgumentError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] != layout.size:
        raise ArgumentError(
            f"matrix dimension {m.shape[0]} does not match layout size {layout.size}"
        )


def partial_trace(m, layout, keep: Iterable[str]) -> np.ndarray:
    """Trace out every system not named in ``keep``.

    The kept systems stay in their layout order.
    """
    layout = as_layout(layout)
    m = np.asarray(m, dtype=complex)
    _check_square(m, layout)
    keep = set(keep)
    for label in keep:
        layout.index(label)
    n = len(layout)
    kept = [i for i, label in enumerate(layout.labels) if label in keep]
    traced = [i for i in range(n) if i not in kept]
    t = m.reshape(layout.dims + layout.dims)
    # bring (kept, traced | kept, traced) together, then trace the traced block
    t = t.transpose(kept + traced + [n + i for i in kept] + [n + i for i in traced])
    dk = int(np.prod([layout.dims[i] for i in kept], dtype=np.int64))
    dt = int(np.prod([layout.dims[i] for i in traced], dtype=np.int64))
    t = t.reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", t)


def _permutation(layout: SystemLayout, target: SystemLayout) -> list[int]:
    if sorted(layout.systems) != sorted(target.systems):
        raise ArgumentError(
            f"target {target.labels} is not a permutation of {layout.labels}"
        )
    for label, dim in target.systems:
        if layout.dims[layout.index(label)] != dim:
            raise ArgumentError(f"dimension mismatch for system {label!r}")
    return [layout.index(label) for label in target.labels]


def permute_systems(m, layout, target) -> np.ndarray:
    """Reorder the tensor factors of an operator from ``layout`` to ``target``."""
    layout, target = as_layout(layout), as_layout(target)
    m = np.asarray(m, dtype=complex)
    _check_square(m, layout)
    perm = _permutation(layout, target)
    n = len(layout)
    t = m.reshape(layout.dims + layout.dims)
    t = t.transpose(perm + [n + p for p in perm])
    return t.reshape(m.shape)


def permute_vector(v, layout, target) -> np.ndarray:
    """Reorder the tensor factors of a ket from ``layout`` to ``target``."""
    layout, target = as_layout(layout), as_layout(target)
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.size != layout.size:
        raise ArgumentError("vector length does not match layout")
    perm = _permutation(layout, target)
    return v.reshape(layout.dims).transpose(perm).reshape(-1)


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T), initial=0.0) <= tol


def is_psd(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m, tol):
        return False
    return np.linalg.eigvalsh((m + m.conj().T) / 2).min(initial=0.0) >= -tol


def is_density_matrix(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m, dtype=complex)
    return is_psd(m, tol) and abs(np.trace(m) - 1.0) <= tol


def fidelity_with_pure(rho, psi: StateVector) -> float:
    """Overlap ``<psi|rho|psi>`` of a density matrix with a pure state."""
    rho = np.asarray(rho, dtype=complex)
    amps = psi.amplitudes
    if rho.shape != (amps.size, amps.size):
        raise ArgumentError(
            f"rho has shape {rho.shape}, state has {amps.size} amplitudes"
        )
    if not is_hermitian(rho):
        raise ArgumentError("rho is not hermitian")
    if abs(np.trace(rho) - 1.0) > HERMITIAN_TOL:
        raise ArgumentError(f"rho has trace {np.trace(rho).real:.12g}, expected 1")
    value = amps.conj() @ rho @ amps
    if abs(value.imag) > EQUALITY_TOL:
        raise ArgumentError(f"overlap has imaginary part {value.imag:g}")
    return float(value.real)


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-distributed density matrix, used by property tests and CLI demos."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
