import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from losrnet.errors import ArgumentError, CapacityError
from losrnet.network import ghz_state
from losrnet.tensor import (
    StateVector,
    SystemLayout,
    basis_state,
    fidelity_with_pure,
    is_density_matrix,
    kron,
    kron_all,
    partial_trace,
    permute_systems,
    permute_vector,
    random_density_matrix,
)

Z = np.diag([1.0, -1.0])


def test_kron_identity_and_projectors():
    assert np.allclose(kron(np.eye(2), np.eye(2)), np.eye(4))
    p0, p1 = np.diag([1.0, 0]), np.diag([0, 1.0])
    assert np.allclose(kron(p0, p1), basis_state((2, 2), (0, 1)).density())


def test_zz_stabilizes_bell():
    bell = ghz_state(2, 2).amplitudes
    assert np.allclose(kron(Z, Z) @ bell, bell)


def test_kron_cap():
    with pytest.raises(CapacityError):
        kron(np.eye(64), np.eye(64), cap=1000)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_kron_associative(da, db, dc, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for d in (da, db, dc))
    assert np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c)))) < 1e-12


def test_state_vector_normalization():
    with pytest.raises(ArgumentError):
        StateVector((2,), [1.0, 1.0])
    with pytest.raises(ArgumentError):
        StateVector((2, 2), [1.0, 0.0])
    psi = StateVector.from_unnormalized((2,), [3.0, 4.0])
    assert abs(np.linalg.norm(psi.amplitudes) - 1) < 1e-12


def test_partial_trace_examples():
    layout = [("A", 2), ("B", 2)]
    rho = ghz_state(2, 2).density()
    assert np.allclose(partial_trace(rho, layout, ["A"]), np.eye(2) / 2)
    assert np.allclose(partial_trace(rho, layout, ["A", "B"]), rho)
    with pytest.raises(ArgumentError):
        partial_trace(rho, layout, ["Q"])


def test_partial_trace_against_state_vector_oracle():
    # keep parties 0..2 of a 6-qubit product of a GHZ_3 and three |+>
    plus = np.ones(2) / np.sqrt(2)
    psi = np.kron(ghz_state(3, 2).amplitudes, kron_all(plus, plus, plus).reshape(-1))
    layout = [(str(k), 2) for k in range(6)]
    reduced = partial_trace(np.outer(psi, psi.conj()), layout, ["0", "1", "2"])
    assert np.allclose(reduced, ghz_state(3, 2).density())


def test_partial_trace_keeps_layout_order():
    rng = np.random.default_rng(0)
    a, b = random_density_matrix(2, rng), random_density_matrix(3, rng)
    layout = [("a", 2), ("b", 3)]
    assert np.allclose(partial_trace(np.kron(a, b), layout, ["b", "a"]), np.kron(a, b))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_partial_trace_linear_and_trace_preserving(seed):
    rng = np.random.default_rng(seed)
    layout = SystemLayout([("x", 2), ("y", 3), ("z", 2)])
    h1 = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    h1 = h1 + h1.conj().T
    h2 = random_density_matrix(12, rng)
    t = partial_trace(2 * h1 - h2, layout, ["y"])
    assert np.allclose(t, 2 * partial_trace(h1, layout, ["y"]) - partial_trace(h2, layout, ["y"]))
    assert abs(np.trace(t) - np.trace(2 * h1 - h2)) < 1e-12


def test_permute_examples():
    layout = [("p", 2), ("q", 2)]
    rho = basis_state((2, 2), (0, 1)).density()
    assert np.allclose(permute_systems(rho, layout, layout), rho)
    swapped = permute_systems(rho, layout, [("q", 2), ("p", 2)])
    assert np.allclose(swapped, basis_state((2, 2), (1, 0)).density())
    with pytest.raises(ArgumentError):
        permute_systems(rho, layout, [("p", 2), ("r", 2)])


def test_permute_round_trip_six_systems():
    rng = np.random.default_rng(3)
    src = SystemLayout([(s, 2) for s in ("a", "a'", "b", "b'", "c", "c'")])
    dst = SystemLayout([(s, 2) for s in ("a", "b'", "b", "c'", "c", "a'")])
    m = rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64))
    assert np.allclose(permute_systems(permute_systems(m, src, dst), dst, src), m)
    v = rng.normal(size=64)
    assert np.allclose(permute_vector(permute_vector(v, src, dst), dst, src), v)


def test_layout_rejects_duplicates():
    with pytest.raises(ArgumentError):
        SystemLayout([("a", 2), ("a", 3)])


def test_fidelity_examples():
    psi = ghz_state(3, 2)
    assert abs(fidelity_with_pure(psi.density(), psi) - 1) < 1e-12
    assert abs(fidelity_with_pure(basis_state((2, 2, 2), (0, 0, 0)).density(), psi) - 0.5) < 1e-12
    with pytest.raises(ArgumentError):
        fidelity_with_pure(np.eye(4) / 4, psi)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**31 - 1))
def test_fidelity_in_unit_interval(dim, seed):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(dim, rng)
    assert is_density_matrix(rho)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    f = fidelity_with_pure(rho, StateVector.from_unnormalized((dim,), v))
    assert -1e-12 <= f <= 1 + 1e-12
