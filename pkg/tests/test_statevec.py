import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcollapse.errors import LayoutError, NormError
from qcollapse.oracle import PeriodicOracle, random_periodic
from qcollapse.statevec import (
    QuantumState,
    RegisterLayout,
    UnnormalizedState,
    apply_hadamard,
    apply_oracle,
    apply_rotation,
    oracle_permutation,
    partial_inner,
    prepare_basis,
    product_state,
)

from conftest import S2, random_state_vector


def test_layout_offsets():
    layout = RegisterLayout.of(a=3, b=2, c=1)
    assert layout.total_qubits == 6
    assert [layout.offset(n) for n in "abc"] == [0, 3, 5]
    assert layout.shift("a") == 3 and layout.shift("c") == 0
    assert layout.without("b").registers == (("a", 3), ("c", 1))


@pytest.mark.parametrize("regs", [[("a", 0)], [("a", 1), ("a", 2)]])
def test_layout_rejects_bad_registers(regs):
    with pytest.raises(LayoutError):
        RegisterLayout(regs)


def test_state_rejects_unnormalized():
    with pytest.raises(NormError):
        QuantumState(np.array([1.0, 1.0]), RegisterLayout.of(a=1))
    with pytest.raises(LayoutError):
        QuantumState(np.array([1.0, 0, 0]), RegisterLayout.of(a=1))


def test_prepare_basis_two_register_instance():
    state = prepare_basis(RegisterLayout.of(a=1, b=1), "00")
    np.testing.assert_array_equal(state.amplitudes, [1, 0, 0, 0])


def test_prepare_basis_examples():
    assert prepare_basis(RegisterLayout.of(a=2, b=2), "0000").amplitudes[0] == 1
    np.testing.assert_array_equal(prepare_basis(RegisterLayout.of(a=1), "1").amplitudes, [0, 1])
    with pytest.raises(LayoutError):
        prepare_basis(RegisterLayout.of(a=2), "1")


def test_register_order_is_msb_first():
    layout = RegisterLayout.of(a=2, b=2)
    state = product_state(layout, {"a": "10", "b": "01"})
    assert np.flatnonzero(state.amplitudes).tolist() == [0b1001]


def test_single_qubit_hadamard():
    out = apply_hadamard(prepare_basis(RegisterLayout.of(a=1), 0), "a")
    np.testing.assert_allclose(out.amplitudes, [S2, S2], atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_hadamard_on_a_gives_uniform_a(n):
    layout = RegisterLayout.of(a=n, b=n)
    out = apply_hadamard(prepare_basis(layout, 0), "a")
    expected = np.zeros(layout.dim, dtype=complex)
    expected[[x << n for x in range(1 << n)]] = 1 / math.sqrt(1 << n)
    np.testing.assert_allclose(out.amplitudes, expected, atol=1e-12)


def test_hadamard_unknown_register():
    with pytest.raises(LayoutError):
        apply_hadamard(prepare_basis(RegisterLayout.of(a=1), 0), "z")


def _t1(oracle):
    return apply_hadamard(prepare_basis(oracle.layout, 0), "a")


def test_oracle_gives_t2_state():
    oracle = random_periodic(3, 0b110, seed=4)
    out = apply_oracle(_t1(oracle), oracle)
    expected = np.zeros(oracle.layout.dim, dtype=complex)
    for x in range(8):
        expected[(x << 3) | oracle(x)] = 1 / math.sqrt(8)
    np.testing.assert_allclose(out.amplitudes, expected, atol=1e-15)


def test_zero_oracle_is_identity():
    # f == 0 is not 2-to-1, so bypass validation with a stand-in object
    class Zero:
        n = 2
        table = np.zeros(4, dtype=np.int64)

    state = QuantumState(random_state_vector(np.random.default_rng(1), 16), RegisterLayout.of(a=2, b=2))
    np.testing.assert_array_equal(apply_oracle(state, Zero()).amplitudes, state.amplitudes)


def test_oracle_width_mismatch():
    oracle = random_periodic(2, 1, seed=0)
    with pytest.raises(LayoutError):
        apply_oracle(prepare_basis(RegisterLayout.of(a=3, b=2), 0), oracle)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_oracle_permutation_is_bijection_on_basis(n):
    oracle = random_periodic(n, (1 << n) - 1, seed=n)
    layout = oracle.layout
    images = []
    for i in range(layout.dim):
        out = apply_oracle(prepare_basis(layout, i), oracle).amplitudes
        (j,) = np.flatnonzero(out)
        assert out[j] == 1
        images.append(int(j))
    assert sorted(images) == list(range(layout.dim))
    assert images == oracle_permutation(layout, oracle.table).tolist()


def test_rotation_examples():
    layout = RegisterLayout.of(y=1)
    zero = prepare_basis(layout, 0)
    np.testing.assert_array_equal(apply_rotation(zero, 0, math.pi / 2).amplitudes, [0, 1])
    np.testing.assert_array_equal(apply_rotation(zero, 0, 0.0).amplitudes, [1, 0])
    twice = apply_rotation(apply_rotation(zero, 0, math.pi / 4), 0, math.pi / 4)
    np.testing.assert_allclose(twice.amplitudes, [0, 1], atol=1e-12)
    one = prepare_basis(layout, 1)
    np.testing.assert_allclose(apply_rotation(one, 0, math.pi / 2).amplitudes, [-1, 0], atol=1e-15)
    with pytest.raises(LayoutError):
        apply_rotation(zero, 1, 0.1)


def test_rotation_targets_named_qubit():
    layout = RegisterLayout.of(a=2, y=1)
    state = apply_rotation(prepare_basis(layout, 0), layout.qubit("a", 1), math.pi / 2)
    assert np.flatnonzero(state.amplitudes).tolist() == [0b010]


def test_partial_inner_examples():
    oracle = random_periodic(2, 0b11, seed=0)
    layout = oracle.layout
    basis = product_state(layout, {"a": 2, "b": 0})
    out = partial_inner(basis, "b", 0)
    assert out.layout == RegisterLayout.of(a=2)
    assert out.norm_squared == pytest.approx(1.0)
    t2 = apply_oracle(_t1(oracle), oracle)
    f_bar = oracle(1)
    got = partial_inner(t2, "b", f_bar)
    expected = np.zeros(4)
    expected[[1, 2]] = 0.5  # (1/sqrt N)(|01> + |10>), N = 4
    np.testing.assert_allclose(got.amplitudes, expected, atol=1e-15)
    assert got.norm_squared == pytest.approx(2 / 4, abs=1e-15)
    missing = next(v for v in range(4) if v not in oracle.image())
    assert partial_inner(t2, "b", missing).norm_squared == 0.0


def test_unnormalized_state_bounds():
    with pytest.raises(NormError):
        UnnormalizedState(np.array([1.0, 1.0]), RegisterLayout.of(a=1))
    with pytest.raises(NormError):
        UnnormalizedState(np.zeros(2), RegisterLayout.of(a=1)).normalized()


def test_json_round_trip():
    state = QuantumState(random_state_vector(np.random.default_rng(3), 8), RegisterLayout.of(a=1, b=2))
    back = QuantumState.from_json(json.loads(json.dumps(state.to_json())))
    assert back.layout == state.layout
    np.testing.assert_array_equal(back.amplitudes, state.amplitudes)


layouts = st.lists(st.integers(1, 3), min_size=1, max_size=3).map(
    lambda ws: RegisterLayout((f"r{i}", w) for i, w in enumerate(ws)))


@st.composite
def states(draw):
    layout = draw(layouts)
    seed = draw(st.integers(0, 2**32 - 1))
    return QuantumState(random_state_vector(np.random.default_rng(seed), layout.dim), layout)


@settings(max_examples=60, deadline=None)
@given(states(), st.data())
def test_hadamard_involution_and_norm(state, data):
    reg = data.draw(st.sampled_from(state.layout.names))
    once = apply_hadamard(state, reg)
    assert abs(np.linalg.norm(once.amplitudes) - 1) <= 1e-12
    assert np.max(np.abs(apply_hadamard(once, reg).amplitudes - state.amplitudes)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(states(), st.data())
def test_rotation_preserves_norm(state, data):
    q = data.draw(st.integers(0, state.num_qubits - 1))
    angle = data.draw(st.floats(-7, 7))
    out = apply_rotation(state, q, angle)
    assert abs(np.linalg.norm(out.amplitudes) - 1) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(states(), st.data())
def test_partial_inner_probabilities_sum_to_one(state, data):
    reg = data.draw(st.sampled_from(state.layout.names))
    total = sum(partial_inner(state, reg, v).norm_squared for v in range(state.layout.size(reg)))
    assert abs(total - 1) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.data())
def test_oracle_involution(n, data):
    r = data.draw(st.integers(1, (1 << n) - 1))
    oracle = random_periodic(n, r, seed=data.draw(st.integers(0, 1000)))
    state = QuantumState(random_state_vector(np.random.default_rng(n * r), 1 << 2 * n), oracle.layout)
    once = apply_oracle(state, oracle)
    assert abs(np.linalg.norm(once.amplitudes) - 1) <= 1e-12
    assert np.max(np.abs(apply_oracle(once, oracle).amplitudes - state.amplitudes)) <= 1e-12
