import itertools
import math

import numpy as np
import pytest

from qcollapse import zeno
from qcollapse.errors import DegenerateDynamicsError, EmptySubspaceError
from qcollapse.satnet import CnfFormula, compile_formula, point_formula
from qcollapse.statevec import QuantumState, prepare_basis
from qcollapse.zeno import (
    ConstrainedSubspace,
    build_testbed,
    instance_suite,
    prepare_phi,
    prepare_phi_paths,
    projected_generator_limit,
    projector_apply,
    run_frequent,
    run_projected,
    run_unitary,
    solution_overlap,
)

from conftest import S2

X1 = CnfFormula(1, ((1,),))


def enumerate_hc(formula):
    """(x, f(x)) over all x meeting the pinned inputs, by direct itertools enumeration."""
    fixed = {abs(l) - 1: int(l > 0) for l in formula.input_constraints}
    out = set()
    for bits in itertools.product((0, 1), repeat=formula.num_vars):
        if any(bits[v] != b for v, b in fixed.items()):
            continue
        f = all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in formula.clauses)
        x = int("".join(map(str, bits)), 2)
        out.add((x << 1) | int(f))
    return out


def test_phi_of_single_variable():
    circuit, subspace, phi = build_testbed(X1)
    np.testing.assert_allclose(phi.amplitudes, [S2, 0, 0, S2], atol=1e-15)
    assert set(subspace.basis_indices.tolist()) == {0b00, 0b11}


def test_phi_with_all_inputs_fixed_is_basis_state():
    f = CnfFormula(2, ((1, -2),)).constrain([1, -2])
    _, _, phi = build_testbed(f)
    assert np.count_nonzero(phi.amplitudes) == 1
    assert abs(phi.amplitudes[0b101]) == pytest.approx(1.0)


def test_contradictory_constraints_give_empty_subspace():
    with pytest.raises(EmptySubspaceError):
        build_testbed(CnfFormula(1, ()).constrain([1, -1]))


@pytest.mark.parametrize("name,formula", instance_suite(seed=0))
def test_subspace_and_phi_support_match_enumeration(name, formula):
    circuit, subspace, phi = build_testbed(formula)
    expected = enumerate_hc(formula)
    assert set(subspace.basis_indices.tolist()) == expected
    assert set(np.flatnonzero(np.abs(phi.amplitudes) > 1e-12).tolist()) == expected
    via_circuit, enumerated = prepare_phi_paths(circuit, formula)
    assert via_circuit.distance(enumerated) <= 1e-12


def test_reduced_path_agrees_with_dense_path(monkeypatch):
    f = CnfFormula(3, ((1, -2), (2, 3), (-1, -3))).constrain([2])
    circuit = compile_formula(f)
    dense = prepare_phi(circuit, f)
    monkeypatch.setattr(zeno, "MAX_DENSE_QUBITS", 0)
    reduced = prepare_phi(circuit, f)
    assert dense.distance(reduced) <= 1e-12


def test_projector_examples():
    _, sub, phi = build_testbed(X1)
    same = projector_apply(phi, sub)
    assert same.norm_squared == pytest.approx(1.0)
    np.testing.assert_array_equal(same.amplitudes, phi.amplitudes)
    outside = prepare_basis(phi.layout, 0b01)
    assert projector_apply(outside, sub).norm_squared == 0.0
    mixed = QuantumState(np.array([S2, S2, 0, 0]), phi.layout)
    half = projector_apply(mixed, sub)
    np.testing.assert_allclose(half.amplitudes, [S2, 0, 0, 0])
    assert half.norm_squared == pytest.approx(0.5)


def test_solution_overlap_examples():
    f = CnfFormula(2, ((1, 2), (-1, 2), (1, -2)))
    _, _, phi = build_testbed(f)
    assert solution_overlap(phi, f) == pytest.approx(1 / 4)
    assert solution_overlap(prepare_basis(phi.layout, 0b111), f) == 1.0
    assert solution_overlap(prepare_basis(phi.layout, 0b110), f) == 0.0


def test_frequent_single_slice_never_survives():
    _, sub, phi = build_testbed(X1)
    for seed in range(10):
        trace = run_frequent(phi, sub, 1, np.random.default_rng(seed))
        assert trace.rejected_at == 1
        assert trace.final.survival_probability == pytest.approx(0.0, abs=1e-10)
        assert trace.final.fidelity_with_initial == 0.0


@pytest.mark.parametrize("k", [2, 3, 8, 32, 128])
def test_frequent_survival_closed_form(k):
    _, sub, phi = build_testbed(X1)
    closed = math.cos(math.pi / (2 * k)) ** 2
    for seed in range(20):
        trace = run_frequent(phi, sub, k, np.random.default_rng(seed))
        for s in trace.samples[1:]:
            assert abs(s.survival_probability - closed ** s.step) <= 1e-10
        if trace.survived:
            assert trace.final.step == k
            assert trace.final.fidelity_with_initial == pytest.approx(1.0, abs=1e-12)


def test_frequent_fidelity_bound_at_256():
    _, sub, phi = build_testbed(X1)
    bound = math.pi ** 2 / (4 * 256) * 1.1
    survivors = 0
    for seed in range(20):
        trace = run_frequent(phi, sub, 256, np.random.default_rng(seed))
        if trace.survived:
            survivors += 1
            assert 1 - trace.final.fidelity_with_initial <= bound
            assert 1 - trace.ensemble_fidelity <= bound
    assert survivors > 0


def test_frequent_survival_monotone_and_bounded():
    _, sub, phi = build_testbed(point_formula(3, 0b101))
    trace = run_frequent(phi, sub, 64, np.random.default_rng(1))
    probs = [s.survival_probability for s in trace.samples]
    assert all(b <= a for a, b in zip(probs, probs[1:]))
    for s in trace.samples:
        assert 0 <= s.survival_probability <= 1 and 0 <= s.fidelity_with_initial <= 1
        assert 0 <= s.solution_overlap <= 1


def test_slices_validation():
    _, sub, phi = build_testbed(X1)
    with pytest.raises(ValueError):
        run_frequent(phi, sub, 0, np.random.default_rng(0))
    with pytest.raises(ValueError):
        run_projected(phi, sub, 0)


def test_projected_fixed_solution_instance():
    f = CnfFormula(2, ((1,), (2,))).constrain([1, 2])
    _, sub, phi = build_testbed(f)
    trace = run_projected(phi, sub, 16)
    assert all(s.solution_overlap == pytest.approx(1.0) for s in trace.samples)


def test_projected_single_slice_is_degenerate():
    _, sub, phi = build_testbed(X1)
    with pytest.raises(DegenerateDynamicsError) as info:
        run_projected(phi, sub, 1)
    assert info.value.step == 1


def test_projected_matches_generator_limit():
    _, sub, phi = build_testbed(X1)
    trace = run_projected(phi, sub, 1024)
    limit = projected_generator_limit(phi, sub)
    assert abs(trace.final.solution_overlap - solution_overlap(limit, X1)) <= 1e-8
    assert trace.final_state.distance(limit) <= 1e-8


def test_projected_k_doubling_converges():
    _, sub, phi = build_testbed(point_formula(2, 0b10))
    d = zeno.k_doubling_distances(phi, sub, [16, 32, 64, 128])
    assert all(b <= a + 1e-12 for a, b in zip(d, d[1:]))


def test_generator_limit_on_larger_subspace():
    f = point_formula(3, 0b011)
    _, sub, phi = build_testbed(f)
    assert sub.dim == 8
    limit = projected_generator_limit(phi, sub)
    # the generator has no matrix elements inside H^c, so the limit is phi itself
    assert limit.distance(phi) <= 1e-12


def test_unitary_flips_output_qubit():
    _, sub, phi = build_testbed(X1)
    trace = run_unitary(phi, 1, sub)
    # |0,0> -> |0,1>, |1,1> -> -|1,0>
    np.testing.assert_allclose(trace.final_state.amplitudes, [0, S2, -S2, 0], atol=1e-15)
    assert trace.final.solution_overlap == pytest.approx(0.0, abs=1e-15)


def test_unitary_slice_count_independent():
    _, sub, phi = build_testbed(point_formula(3, 0b110))
    a = run_unitary(phi, 1, sub).final_state
    b = run_unitary(phi, 1000, sub).final_state
    assert a.distance(b) <= 1e-12


def test_instance_suite_is_single_solution():
    from qcollapse.satnet import brute_force_sat
    suite = instance_suite(seed=3)
    assert len(suite) == 2 + 4 + 8 + 5
    assert all(len(brute_force_sat(f)) == 1 for _, f in suite)
