import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from losrnet.channels import (
    FIXTURES,
    GridSpec,
    apply_channel,
    build_choi,
    generate_eta_din_2,
    generate_eta_odd,
    load_fixture,
    load_grid,
    random_grid,
    with_dots,
)
from losrnet.errors import ArgumentError, ValidationError
from losrnet.tensor import basis_state, is_density_matrix, random_density_matrix

ETA22 = GridSpec(2, 2, (((0, 0), (1, 1)), ((0, 1),), ((1, 0),)))


def rank(m):
    return int(np.sum(np.linalg.eigvalsh(m) > 1e-9))


def test_eta22_choi():
    choi = build_choi(ETA22)
    assert choi.matrix.shape == (8, 8)
    assert rank(choi.matrix) == 3
    assert abs(np.trace(choi.matrix) - 4) < 1e-12
    v = np.zeros(8)
    v[0] = v[7] = 1  # |000> + |111>
    assert np.allclose(choi.matrix @ v, 2 * v)
    choi.check()


def test_trace_and_replace():
    spec = with_dots(2, 1, [])
    choi = build_choi(spec)
    assert np.allclose(choi.matrix, np.eye(4))
    rng = np.random.default_rng(1)
    assert np.allclose(apply_channel(choi, random_density_matrix(4, rng)), [[1]])


def test_eta33_rank_and_trace():
    choi = build_choi(generate_eta_odd(3))
    assert rank(choi.matrix) == 3
    assert abs(np.trace(choi.matrix) - 9) < 1e-12


def test_generator_matches_eta22_and_dots_fill():
    assert generate_eta_din_2(2) == ETA22
    spec = generate_eta_din_2(3)
    lengths = sorted(len(a) for a in spec.arrows)
    assert lengths == [1, 1, 1, 2, 2, 2]


@pytest.mark.parametrize("name", FIXTURES)
def test_fixtures_match_generators(name):
    d_in, d_out = (int(x) for x in name.split("_")[1:])
    expected = generate_eta_din_2(d_in) if d_out == 2 else generate_eta_odd(d_in)
    assert load_fixture(name) == expected


def test_unknown_fixture():
    with pytest.raises(ArgumentError):
        load_fixture("eta_9_9")


def test_odd_generator_shapes():
    for d in (3, 5, 7):
        spec = generate_eta_odd(d)
        assert spec.n_arrows == d
        assert all(len(a) == d for a in spec.arrows)
    with pytest.raises(ArgumentError, match="lifted"):
        generate_eta_odd(4)


def test_invalid_cover_lists_cells():
    with pytest.raises(ValidationError, match=r"uncovered cells: \[\(1, 1\)\]"):
        GridSpec(2, 2, (((0, 0),), ((0, 1),), ((1, 0),)))
    with pytest.raises(ValidationError, match="multiply covered"):
        GridSpec(2, 2, (((0, 0), (1, 1)), ((0, 0),), ((0, 1),), ((1, 0),)))
    with pytest.raises(ValidationError, match="length 3"):
        GridSpec(2, 2, (((0, 0), (1, 1), (0, 1)), ((1, 0),)))


def test_text_round_trip(tmp_path):
    spec = generate_eta_din_2(5)
    path = tmp_path / "g.grid"
    path.write_text("# comment line\n" + spec.to_text())
    assert load_grid(path) == spec
    assert GridSpec.from_text(spec.to_text()).to_text() == spec.to_text()
    with pytest.raises(ValidationError):
        GridSpec.from_text("2 2\n0,0 x\n")


def test_arrow_order_is_canonical():
    a = GridSpec(2, 2, (((1, 0),), ((0, 0), (1, 1)), ((0, 1),)))
    assert a.arrows == ETA22.arrows


def test_apply_channel_examples():
    choi = build_choi(ETA22)
    zero = np.diag([1.0, 0.0])
    assert np.allclose(apply_channel(choi, basis_state((2, 2), (0, 0)).density()), zero)
    assert np.allclose(apply_channel(choi, basis_state((2, 2), (1, 0)).density()), zero)
    with pytest.raises(ArgumentError):
        apply_channel(choi, np.eye(3) / 3)


def test_transpose_convention_with_complex_input():
    # the Choi action equals the Kraus action for complex inputs
    rng = np.random.default_rng(4)
    spec = random_grid(3, 3, rng)
    choi = build_choi(spec)
    rho = random_density_matrix(9, rng)
    kraus = sum(k @ rho @ k.conj().T for k in choi.kraus())
    assert np.allclose(apply_channel(choi, rho), kraus)


@pytest.mark.parametrize("d", range(2, 13))
def test_generated_qubit_grids_are_channels(d):
    spec = generate_eta_din_2(d)
    assert sum(len(a) for a in spec.arrows) == d * d
    assert all(len(a) <= 2 for a in spec.arrows)
    build_choi(spec).check()


@pytest.mark.parametrize("d", [3, 5, 7, 9])
def test_generated_odd_grids_are_channels(d):
    build_choi(generate_eta_odd(d)).check()


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_apply_channel_preserves_states(d_in, d_out, seed):
    rng = np.random.default_rng(seed)
    choi = build_choi(random_grid(d_in, d_out, rng))
    choi.check()
    for _ in range(5):
        out = apply_channel(choi, random_density_matrix(d_in**2, rng))
        assert is_density_matrix(out)
