"""Engine-level checks: register packing, gate application, oracles,
postselection and the fidelity contract."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbprep.simulator import (
    H,
    X,
    BasisPredicate,
    NumericContractError,
    PermutationOracle,
    RegisterLayout,
    StateVector,
    apply_gate,
    apply_permutation_oracle,
    fidelity,
    init_state,
    phase_gate,
    postselect,
    reduced_density,
    rotation_gate,
)


def small_layout():
    return RegisterLayout((("out", 2), ("data", 3), ("flag", 1)))


def random_state(layout, seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=1 << layout.total) \
        + 1j * rng.normal(size=1 << layout.total)
    amps /= np.linalg.norm(amps)
    return StateVector(layout, amps.astype(np.complex128))


class TestLayout:
    def test_offsets_are_little_endian(self):
        lay = small_layout()
        assert lay.offset("out") == 0
        assert lay.offset("data") == 2
        assert lay.offset("flag") == 5
        assert lay.total == 6
        assert lay.qubit("data", 2) == 4

    def test_duplicate_register_rejected(self):
        with pytest.raises(ValueError):
            RegisterLayout((("a", 1), ("a", 2)))

    def test_zero_width_rejected(self):
        with pytest.raises(ValueError):
            RegisterLayout((("a", 0),))

    def test_qubit_cap_enforced(self):
        with pytest.raises(ValueError):
            RegisterLayout((("big", 27),))


def test_init_state_places_register_values():
    lay = small_layout()
    state = init_state(lay, {"data": 5, "flag": 1})
    idx = (5 << 2) | (1 << 5)
    assert state.amps[idx] == 1.0
    assert np.count_nonzero(state.amps) == 1


def test_init_state_rejects_overflow():
    with pytest.raises(ValueError):
        init_state(small_layout(), {"data": 8})


def test_content_reads_back_register_bits():
    lay = small_layout()
    state = init_state(lay, {"out": 3, "data": 6})
    nz = np.nonzero(state.amps)[0][0]
    assert state.content("out")[nz] == 3
    assert state.content("data")[nz] == 6


class TestApplyGate:
    def test_x_flips_target(self):
        state = init_state(small_layout())
        apply_gate(state, X, target=2)
        assert state.amps[1 << 2] == 1.0

    def test_hadamard_twice_is_identity(self):
        state = random_state(small_layout(), seed=3)
        ref = state.amps.copy()
        apply_gate(state, H, target=4)
        apply_gate(state, H, target=4)
        assert np.allclose(state.amps, ref, atol=1e-12)

    def test_control_on_one(self):
        lay = RegisterLayout((("a", 1), ("b", 1)))
        state = init_state(lay, {"a": 1})
        apply_gate(state, X, target=1, controls=[0])
        assert state.amps[0b11] == 1.0
        state = init_state(lay)  # control off: no action
        apply_gate(state, X, target=1, controls=[0])
        assert state.amps[0] == 1.0

    def test_control_on_zero(self):
        lay = RegisterLayout((("a", 1), ("b", 1)))
        state = init_state(lay)
        apply_gate(state, X, target=1, controls=[(0, 0)])
        assert state.amps[0b10] == 1.0

    def test_multi_controlled_matches_dense_matrix(self):
        # three random controls against an explicit 2^m x 2^m build
        lay = RegisterLayout((("r", 4),))
        state = random_state(lay, seed=11)
        ref = state.amps.copy()
        gate = rotation_gate(0.37)
        apply_gate(state, gate, target=2, controls=[0, (3, 0)])
        dim = 1 << 4
        dense = np.eye(dim, dtype=complex)
        for i in range(dim):
            if (i & 1) and not (i >> 3):
                j = i ^ (1 << 2)
                a, b = (i, j) if not (i >> 2) & 1 else (j, i)
                # a has target 0, b target 1
                dense[a, a] = gate[0, 0]
                dense[a, b] = gate[0, 1]
                dense[b, a] = gate[1, 0]
                dense[b, b] = gate[1, 1]
        assert np.allclose(state.amps, dense @ ref, atol=1e-12)

    def test_control_collides_with_target(self):
        state = init_state(small_layout())
        with pytest.raises(ValueError):
            apply_gate(state, X, target=1, controls=[1])


def test_phase_and_rotation_gate_entries():
    g = phase_gate(np.pi / 2)
    assert g[1, 1] == pytest.approx(1j)
    r = rotation_gate(np.arcsin(0.25))
    assert r[0, 0] == pytest.approx(0.25)
    assert np.allclose(r @ r, np.eye(2), atol=1e-12)


class TestPermutationOracle:
    def test_xor_write(self):
        lay = RegisterLayout((("addr", 2), ("data", 3)))
        table = np.array([5, 1, 0, 7], dtype=np.int64)
        oracle = PermutationOracle(("addr",), ("data",), table)
        state = init_state(lay, {"addr": 3})
        apply_permutation_oracle(state, oracle)
        assert state.content("data")[np.nonzero(state.amps)[0][0]] == 7

    def test_twice_is_identity(self):
        lay = RegisterLayout((("addr", 2), ("data", 3)))
        table = np.array([5, 1, 0, 7], dtype=np.int64)
        oracle = PermutationOracle(("addr",), ("data",), table)
        state = random_state(lay, seed=5)
        ref = state.amps.copy()
        apply_permutation_oracle(state, oracle)
        apply_permutation_oracle(state, oracle)
        assert np.array_equal(state.amps, ref)

    def test_overlapping_reads_writes_rejected(self):
        with pytest.raises(ValueError):
            PermutationOracle(("data",), ("data",),
                              np.zeros(8, dtype=np.int64))


def test_postselect_probability_and_renormalization():
    lay = RegisterLayout((("q", 1), ("r", 1)))
    state = init_state(lay)
    apply_gate(state, H, target=0)
    out, prob = postselect(state, BasisPredicate.zero("q"))
    assert prob == pytest.approx(0.5)
    assert out.norm() == pytest.approx(1.0)
    assert out.amps[0] == pytest.approx(1.0)


def test_postselect_zero_probability_is_contract_error():
    lay = RegisterLayout((("q", 1),))
    state = init_state(lay)
    with pytest.raises(NumericContractError):
        postselect(state, BasisPredicate(equals=(("q", 1),)))


def test_predicate_fn_mask():
    lay = RegisterLayout((("data", 3), ("flag", 1)))
    state = init_state(lay, {"data": 5})
    pred = BasisPredicate(fn=lambda c: c["data"] > 4)
    assert state.probability(pred) == pytest.approx(1.0)
    pred = BasisPredicate(equals=(("flag", 1),), fn=lambda c: c["data"] > 4)
    assert state.probability(pred) == 0.0


def test_reduced_density_of_product_state():
    lay = RegisterLayout((("a", 1), ("b", 1)))
    state = init_state(lay)
    apply_gate(state, H, target=1)
    rho = reduced_density(state, "b")
    assert np.allclose(rho, np.full((2, 2), 0.5), atol=1e-12)


def test_fidelity_requires_pure_reduced_state():
    # Bell pair across the registers: fidelity must refuse to average
    lay = RegisterLayout((("out", 1), ("rest", 1)))
    state = init_state(lay)
    apply_gate(state, H, target=0)
    apply_gate(state, X, target=1, controls=[0])
    with pytest.raises(NumericContractError):
        fidelity(state, np.array([1.0, 0.0]), register="out")


def test_fidelity_with_postselection_predicate():
    lay = RegisterLayout((("out", 1), ("rest", 1)))
    state = init_state(lay)
    apply_gate(state, H, target=0)
    apply_gate(state, X, target=1, controls=[0])
    f = fidelity(state, np.array([1.0, 0.0]), register="out",
                 predicate=BasisPredicate.zero("rest"))
    assert f == pytest.approx(1.0)


def test_fidelity_is_phase_insensitive():
    lay = RegisterLayout((("out", 2),))
    amps = np.exp(0.7j) * np.full(4, 0.5, dtype=complex)
    state = StateVector(lay, amps)
    assert fidelity(state, np.full(4, 0.5)) == pytest.approx(1.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 5), st.integers(0, 2 ** 16 - 1))
def test_gate_application_preserves_norm(target, seed):
    state = random_state(RegisterLayout((("r", 6),)), seed)
    apply_gate(state, H, target=target)
    assert state.norm() == pytest.approx(1.0, abs=1e-12)
