"""Driver-level behavior: transduction amplitudes, amplification dynamics,
round scheduling, and the four coefficient-problem variants."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbprep.circuits import GateCounter
from bbprep.oracles import AmplitudeSpec, cartesian_root_marked_counts, quantize
from bbprep.simulator import (
    BasisPredicate,
    DegenerateSpecError,
    init_state,
    postselect,
)
from bbprep.stateprep import (
    AASchedule,
    amplitude_amplification,
    make_layout,
    prepare_cartesian_linear,
    prepare_cartesian_root,
    prepare_linear,
    prepare_polar,
    prepare_root,
    prepare_unitary_linear,
    qubit_cost,
    schedule_rounds,
)


def real_spec(values, n):
    return AmplitudeSpec(d=len(values), n=n, form="real",
                         values=tuple(values))


class TestPrepareUnitaryLinear:
    def test_single_entry_good_amplitude(self):
        # d=1, alpha=0.5, n=1: code 1, good amplitude exactly 1/2
        spec = real_spec([Fraction(1, 2)], n=1)
        prep = prepare_unitary_linear(spec)
        state = prep.apply(init_state(prep.layout))
        idx = 1 << prep.layout.offset("data")  # out=0, data=1, ref=flag=0
        assert state.amps[idx] == pytest.approx(0.5, abs=1e-12)

    def test_uniform_quarter_total_good_amplitude(self):
        spec = real_spec([0.25] * 4, n=2)
        prep = prepare_unitary_linear(spec)
        state = prep.apply(init_state(prep.layout))
        good = state.probability(BasisPredicate.zero("flag", "ref"))
        assert math.sqrt(good) == pytest.approx(0.25, abs=1e-12)

    def test_zero_entry_has_zero_good_amplitude(self):
        spec = real_spec([0, Fraction(1, 2)], n=2)
        prep = prepare_unitary_linear(spec)
        state = prep.apply(init_state(prep.layout))
        branch = BasisPredicate(equals=(("out", 0), ("flag", 0), ("ref", 0)))
        assert state.probability(branch) == pytest.approx(0.0, abs=1e-15)

    def test_good_amplitude_formula_per_label(self):
        spec = real_spec([0.75, 0.25, 0.5], n=4)
        prep = prepare_unitary_linear(spec)
        state = prep.apply(init_state(prep.layout))
        codes = quantize(spec).codes
        lay = prep.layout
        for label, code in enumerate(codes):
            idx = label | (code << lay.offset("data"))
            expect = code / (16 * math.sqrt(4))  # padded dim 4
            assert state.amps[idx] == pytest.approx(expect, abs=1e-12)


class TestAmplitudeAmplification:
    def test_success_tracks_rotation(self):
        # sin(theta) = 0.5 exactly: codes (4,4), n=3, D=2
        spec = real_spec([Fraction(1, 2), Fraction(1, 2)], n=3)
        sched = schedule_rounds(spec, "linear")
        assert sched.theta == pytest.approx(math.pi / 6, abs=1e-12)
        good = BasisPredicate.zero("flag", "ref")
        for k in range(6):
            prep = prepare_unitary_linear(spec)
            state = prep.apply(init_state(prep.layout))
            amplitude_amplification(state, prep, good, k)
            expect = math.sin((2 * k + 1) * sched.theta) ** 2
            assert state.probability(good) == pytest.approx(expect, abs=1e-9)

    def test_theta_pi_sixth_one_round_is_certain(self):
        spec = real_spec([Fraction(1, 2), Fraction(1, 2)], n=3)
        result = prepare_linear(spec, rounds=1)
        assert result.success_probability == pytest.approx(1.0, abs=1e-12)

    def test_zero_rounds_leaves_state_alone(self):
        spec = real_spec([0.75, 0.25], n=4)
        prep = prepare_unitary_linear(spec)
        state = prep.apply(init_state(prep.layout))
        ref = state.amps.copy()
        amplitude_amplification(state, prep,
                                BasisPredicate.zero("flag", "ref"), 0)
        assert np.array_equal(state.amps, ref)

    def test_negative_rounds_rejected(self):
        spec = real_spec([0.5], n=2)
        prep = prepare_unitary_linear(spec)
        with pytest.raises(ValueError):
            amplitude_amplification(init_state(prep.layout), prep,
                                    BasisPredicate.zero("flag"), -1)


class TestScheduleRounds:
    def test_unit_amplitude_needs_no_rounds(self):
        assert AASchedule.auto(1.0).rounds == 0

    def test_quarter_uniform_needs_three(self):
        spec = real_spec([0.25] * 4, n=2)
        sched = schedule_rounds(spec, "linear")
        assert sched.theta == pytest.approx(math.asin(0.25), abs=1e-12)
        assert sched.rounds == 3
        assert sched.predicted_success == pytest.approx(
            math.sin(7 * math.asin(0.25)) ** 2, abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 3), st.integers(3, 8), st.integers(0, 10 ** 9))
    def test_rounds_near_asymptotic_formula(self, logd, n, seed):
        d = 1 << logd
        rng = np.random.default_rng(seed)
        values = rng.uniform(0.05, 0.95, size=d)
        try:
            spec = real_spec(values, n=n)
        except DegenerateSpecError:
            return
        sched = schedule_rounds(spec, "linear")
        norm = math.sqrt(float(np.sum(np.floor(values * (1 << n)) ** 2)))
        asym = math.floor(math.pi / 4 * math.sqrt(d) * (1 << n) / norm)
        assert abs(sched.rounds - asym) <= 1

    def test_root_theta_formula(self):
        spec = real_spec([0.75, 0.25], n=4)
        sched = schedule_rounds(spec, "root")
        assert math.sin(sched.theta) == pytest.approx(
            math.sqrt(16 / (16 * 2)), abs=1e-12)

    def test_cartesian_linear_theta_halves(self):
        rspec = real_spec([0.75, 0.25], n=4)
        cspec = AmplitudeSpec(d=2, n=4, form="cartesian",
                              values=((0.75, 0), (0.25, 0)))
        half = schedule_rounds(cspec, "cartesian-linear")
        full = schedule_rounds(rspec, "linear")
        assert math.sin(half.theta) == pytest.approx(
            math.sin(full.theta) / 2, abs=1e-12)

    def test_unknown_problem(self):
        with pytest.raises(ValueError):
            schedule_rounds(real_spec([0.5], n=2), "quadratic")


class TestPrepareLinear:
    def test_three_quarters_one_quarter_exact(self):
        result = prepare_linear(real_spec([0.75, 0.25], n=4))
        target = np.array([12.0, 4.0])
        overlap = np.abs(target / np.linalg.norm(target)
                         @ result.state.amps[:2]) ** 2
        assert result.fidelity == pytest.approx(1.0, abs=1e-12)
        assert overlap == pytest.approx(1.0, abs=1e-10)

    def test_ancillas_fully_reset(self):
        result = prepare_linear(real_spec([0.75, 0.25, 0.5], n=3))
        zero = BasisPredicate.zero("data", "ref", "flag")
        assert result.state.probability(zero) == pytest.approx(1.0,
                                                               abs=1e-12)

    def test_single_nonzero_entry_is_basis_state(self):
        result = prepare_linear(real_spec([0, 0.5, 0], n=3))
        target = np.zeros(4)
        target[1] = 1.0
        assert result.fidelity == pytest.approx(1.0, abs=1e-12)
        assert np.abs(result.state.amps[1]) == pytest.approx(1.0, abs=1e-10)

    def test_success_probability_prediction(self):
        spec = real_spec([0.6, 0.3, 0.8], n=5)
        result = prepare_linear(spec)
        sched = schedule_rounds(spec, "linear")
        assert result.rounds == sched.rounds
        assert result.success_probability == pytest.approx(
            sched.predicted_success, abs=1e-9)

    def test_per_round_count_deltas(self):
        spec = real_spec([0.75, 0.25], n=4)
        runs = {}
        for k in (1, 2, 3):
            counter = GateCounter()
            prepare_linear(spec, rounds=k, counter=counter)
            runs[k] = counter.snapshot()
        for k in (2, 3):
            assert runs[k]["toffoli"] - runs[k - 1]["toffoli"] == 2 * 4
            assert runs[k]["oracle_queries"] \
                - runs[k - 1]["oracle_queries"] == 2
            assert runs[k]["reflections"] - runs[k - 1]["reflections"] == 2

    def test_query_total(self):
        # A once, 2 per round, plus the resetting query
        counter = GateCounter()
        result = prepare_linear(real_spec([0.75, 0.25], n=4), rounds=2,
                                counter=counter)
        assert counter.oracle_queries == 2 * result.rounds + 2

    def test_qubit_report(self):
        result = prepare_linear(real_spec([0.5] * 5, n=3))
        assert result.qubits == 3 + 3 * 3 + 1

    def test_circuit_backend_matches(self):
        spec = real_spec([0.7, 0.4], n=3)
        func = prepare_linear(spec, backend="functional")
        circ = prepare_linear(spec, backend="circuit")
        assert circ.success_probability == pytest.approx(
            func.success_probability, abs=1e-12)
        assert circ.fidelity == pytest.approx(func.fidelity, abs=1e-12)

    def test_rejects_polar_spec(self):
        spec = AmplitudeSpec(d=1, n=3, form="polar", values=((0.5, 0.0),))
        with pytest.raises(ValueError):
            prepare_linear(spec)


class TestPrepareRoot:
    def test_amplitudes_follow_square_roots(self):
        eps = 1e-3
        spec = real_spec([0.25, 0.75], n=4)
        result = prepare_root(spec, eps=eps)
        codes = quantize(spec).codes
        target = np.sqrt(np.array(codes, dtype=float))
        overlap = np.abs(target / np.linalg.norm(target)
                         @ result.state.amps[:2]) ** 2
        assert overlap >= 1 - 2 * eps
        assert result.fidelity >= 1 - 2 * eps

    def test_equal_values_give_uniform_output(self):
        result = prepare_root(real_spec([0.3, 0.3, 0.3, 0.3], n=4),
                              eps=1e-3)
        target = np.full(4, 0.5)
        overlap = np.abs(target @ result.state.amps[:4]) ** 2
        assert overlap >= 1 - 2e-3

    def test_good_amplitude_before_amplification(self):
        spec = real_spec([0.25, 0.75], n=4)
        result = prepare_root(spec, rounds=0, eps=1e-3)
        expect = math.sqrt(sum(quantize(spec).codes) / (16 * 2))
        assert result.success_probability == pytest.approx(expect ** 2,
                                                           abs=1e-10)

    def test_eps_is_mandatory(self):
        with pytest.raises(ValueError):
            prepare_root(real_spec([0.5, 0.25], n=3))

    def test_single_reset_counter_assertion(self):
        """The fixed-point reset runs once, after amplification: its
        controlled-Hadamard tally is exactly L * max-window, independent
        of the round count."""
        spec = real_spec([0.75, 0.25], n=4)
        eps = 1e-3
        tallies = []
        for k in (0, 1, 2):
            counter = GateCounter()
            result = prepare_root(spec, rounds=k, eps=eps, counter=counter)
            max_w = max((c - 1).bit_length()
                        for c in quantize(spec).codes if c)
            assert counter.controlled_hadamard \
                == result.fp_schedule.queries * max_w
            tallies.append(counter.controlled_hadamard)
        assert tallies[0] == tallies[1] == tallies[2]


class TestPreparePolar:
    def test_zero_arguments_match_real_pipeline(self):
        pspec = AmplitudeSpec(d=2, n=4, form="polar",
                              values=((0.75, 0.0), (0.25, 0.0)))
        rspec = real_spec([0.75, 0.25], n=4)
        pol = prepare_polar(pspec, problem="linear")
        lin = prepare_linear(rspec)
        assert np.max(np.abs(pol.state.amps - lin.state.amps)) < 1e-10

    def test_linear_pi_argument_flips_sign(self):
        spec = AmplitudeSpec(d=2, n=4, form="polar",
                             values=((0.5, 0.0), (0.5, math.pi)))
        result = prepare_polar(spec, problem="linear")
        amps = result.state.amps[:2]
        ratio = amps[1] / amps[0]
        assert ratio == pytest.approx(-1.0, abs=1e-10)
        assert result.fidelity == pytest.approx(1.0, abs=1e-10)

    def test_root_pi_argument_gives_i(self):
        spec = AmplitudeSpec(d=2, n=4, form="polar",
                             values=((0.5, 0.0), (0.5, math.pi)))
        result = prepare_polar(spec, problem="root", eps=1e-3)
        amps = result.state.amps[:2]
        ratio = amps[1] / amps[0]
        assert ratio == pytest.approx(1j, abs=1e-6)

    def test_phase_rotation_tally(self):
        spec = AmplitudeSpec(d=2, n=5, form="polar",
                             values=((0.5, 1.0), (0.5, 2.0)))
        counter = GateCounter()
        prepare_polar(spec, problem="linear", counter=counter)
        assert counter.phase_rotations == 5  # one controlled phase per bit

    def test_unknown_subproblem(self):
        spec = AmplitudeSpec(d=1, n=3, form="polar", values=((0.5, 0.0),))
        with pytest.raises(ValueError):
            prepare_polar(spec, problem="cubic")


class TestPrepareCartesianLinear:
    def test_real_entries_match_real_pipeline(self):
        cspec = AmplitudeSpec(d=2, n=4, form="cartesian",
                              values=((0.75, 0), (0.25, 0)))
        result = prepare_cartesian_linear(cspec)
        target = np.array([12.0, 4.0], dtype=complex)
        overlap = np.abs((target / np.linalg.norm(target)).conj()
                         @ result.state.amps[:2]) ** 2
        assert overlap == pytest.approx(1.0, abs=1e-10)

    def test_negative_entry_sign_transduced(self):
        spec = AmplitudeSpec(d=2, n=4, form="cartesian",
                             values=((0.5, 0), (-0.5, 0)))
        result = prepare_cartesian_linear(spec)
        amps = result.state.amps[:2]
        assert amps[1] / amps[0] == pytest.approx(-1.0, abs=1e-10)

    def test_imaginary_entry(self):
        spec = AmplitudeSpec(d=2, n=4, form="cartesian",
                             values=((0.5, 0), (0, 0.5)))
        result = prepare_cartesian_linear(spec)
        amps = result.state.amps[:2]
        assert amps[1] / amps[0] == pytest.approx(1j, abs=1e-10)
        assert result.fidelity == pytest.approx(1.0, abs=1e-10)

    def test_mixed_spec_exact(self):
        spec = AmplitudeSpec(d=3, n=4, form="cartesian",
                             values=((0.5, 0), (-0.5, 0), (0, 0.5)))
        result = prepare_cartesian_linear(spec)
        assert result.fidelity == pytest.approx(1.0, abs=1e-10)

    def test_success_prediction(self):
        spec = AmplitudeSpec(d=2, n=3, form="cartesian",
                             values=((0.7, -0.2), (-0.1, 0.6)))
        result = prepare_cartesian_linear(spec)
        sched = schedule_rounds(spec, "cartesian-linear")
        assert result.success_probability == pytest.approx(
            sched.predicted_success, abs=1e-9)

    def test_ancillas_reset(self):
        spec = AmplitudeSpec(d=2, n=3, form="cartesian",
                             values=((0.5, -0.25), (-0.25, 0.5)))
        result = prepare_cartesian_linear(spec)
        zero = BasisPredicate.zero("data", "dsign", "ref", "flag", "sel")
        assert result.state.probability(zero) == pytest.approx(1.0,
                                                               abs=1e-12)


class TestPrepareCartesianRoot:
    def test_real_positive_value(self):
        spec = AmplitudeSpec(d=2, n=5, form="cartesian",
                             values=((0.5, 0), (0.25, 0)))
        result = prepare_cartesian_root(spec)
        assert result.fidelity >= 1 - 2.0 ** (-spec.n + 1)

    def test_negative_real_takes_principal_branch(self):
        spec = AmplitudeSpec(d=2, n=5, form="cartesian",
                             values=((0.25, 0), (-0.25, 0)))
        result = prepare_cartesian_root(spec)
        amps = result.state.amps[:2]
        # sqrt(-1/4) = +i/2: ratio of amplitudes close to i
        assert amps[1] / amps[0] == pytest.approx(1j, rel=0.1)

    def test_imaginary_sign_follows_b(self):
        spec = AmplitudeSpec(d=2, n=5, form="cartesian",
                             values=((0.25, 0.25), (0.25, -0.25)))
        result = prepare_cartesian_root(spec)
        amps = result.state.amps[:2]
        assert amps[1].imag / amps[1].real < 0 < amps[0].imag / amps[0].real

    def test_marked_count_examples(self):
        n = 8
        spec = AmplitudeSpec(d=3, n=n, form="cartesian",
                             values=((0.5, 0), (-0.25, 0), (0, 0.25)))
        m0, m1, sigma = cartesian_root_marked_counts(spec)
        # real positive: ~2^n sqrt(a) real marks, none imaginary
        assert abs(m0[0] - 2 ** n * math.sqrt(0.5)) <= 2
        assert m1[0] <= 1
        # -1/4: real branch empty, imaginary ~2^n/2
        assert m0[1] <= 1
        assert abs(m1[1] - 2 ** n / 2) <= 2
        # i/4: both branches at 2^n sqrt(1/8)
        expect = 2 ** n * math.sqrt(1 / 8)
        assert abs(m0[2] - expect) <= 2
        assert abs(m1[2] - expect) <= 2

    def test_success_prediction(self):
        spec = AmplitudeSpec(d=2, n=5, form="cartesian",
                             values=((0.5, -0.25), (-0.125, 0.25)))
        result = prepare_cartesian_root(spec)
        sched = schedule_rounds(spec, "cartesian-root")
        assert result.success_probability == pytest.approx(
            sched.predicted_success, abs=1e-9)

    def test_circuit_backend_unavailable(self):
        spec = AmplitudeSpec(d=1, n=4, form="cartesian",
                             values=((0.5, 0.25),))
        with pytest.raises(ValueError):
            prepare_cartesian_root(spec, backend="circuit")


class TestLayouts:
    def test_functional_layout_skips_work(self):
        spec = real_spec([0.5, 0.5], n=4)
        names = make_layout(spec, "linear", "functional").names()
        assert "work" not in names
        assert make_layout(spec, "linear", "circuit").names() \
            == ("out", "data", "ref", "work", "flag")

    def test_qubit_cost_formulas(self):
        spec = real_spec([0.5] * 4, n=5)
        assert qubit_cost(spec, "linear") == 2 + 15 + 1
        assert qubit_cost(spec, "polar-root") == 2 + 15 + 1
        cspec = AmplitudeSpec(d=4, n=5, form="cartesian",
                              values=((0.5, 0),) * 4)
        assert qubit_cost(cspec, "cartesian-linear") == 2 + 15 + 3
        assert qubit_cost(cspec, "cartesian-root") == 2 + 15 + 4

    def test_cost_is_backend_independent(self):
        spec = real_spec([0.5, 0.5], n=3)
        func = prepare_linear(spec, backend="functional")
        circ = prepare_linear(spec, backend="circuit")
        assert func.qubits == circ.qubits == 1 + 9 + 1


@pytest.mark.parametrize("problem,spec_kwargs", [
    ("linear", dict(form="real", values=(0.75, 0.25))),
    ("root", dict(form="real", values=(0.75, 0.25))),
    ("polar-linear", dict(form="polar", values=((0.75, 1.0), (0.25, 4.0)))),
    ("polar-root", dict(form="polar", values=((0.75, 1.0), (0.25, 4.0)))),
    ("cartesian-linear", dict(form="cartesian",
                              values=((0.5, -0.25), (-0.25, 0.5)))),
    ("cartesian-root", dict(form="cartesian",
                            values=((0.5, -0.25), (-0.25, 0.5)))),
])
def test_every_driver_hits_predicted_success(problem, spec_kwargs):
    """Post-AA success probability equals sin^2((2k+1) theta) for each
    pipeline, with theta from its schedule."""
    from bbprep.service import run_prepare

    spec = AmplitudeSpec(d=2, n=4, **spec_kwargs)
    record = run_prepare(problem, spec, eps=1e-3)
    sched = schedule_rounds(spec, problem)
    assert record["rounds"] == sched.rounds
    assert record["success_probability"] == pytest.approx(
        sched.predicted_success, abs=1e-9)
