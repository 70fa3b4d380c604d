"""Reversible circuit blocks and non-Clifford cost accounting.

Toffoli counts follow the usual cost model: Clifford gates (H, S, CNOT, X,
Z) are free, Toffolis are the unit of cost. "paper-accounting" mode counts
one Toffoli per computed AND (uncomputation by measurement-free reversal is
tallied as Clifford); "full" mode counts the uncompute pass too.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simulator import (
    H,
    X,
    BasisPredicate,
    StateVector,
    apply_gate,
)

COUNTER_MODES = ("paper-accounting", "full")


@dataclass
class GateCounter:
    """Tally of costed operations for one pipeline run."""

    mode: str = "paper-accounting"
    toffoli: int = 0
    oracle_queries: int = 0
    controlled_hadamard: int = 0
    phase_rotations: int = 0
    reflections: int = 0

    def __post_init__(self):
        if self.mode not in COUNTER_MODES:
            raise ValueError(f"counter mode must be one of {COUNTER_MODES}")

    def snapshot(self) -> dict[str, int]:
        return {
            "toffoli": self.toffoli,
            "oracle_queries": self.oracle_queries,
            "controlled_hadamard": self.controlled_hadamard,
            "phase_rotations": self.phase_rotations,
            "reflections": self.reflections,
        }


def _null_counter() -> GateCounter:
    return GateCounter()


def comparator(state: StateVector, a_reg: str, b_reg: str, flag: str,
               backend: str = "functional",
               counter: GateCounter | None = None,
               variant: str = "ripple",
               work_reg: str = "work") -> StateVector:
    """Toggle the flag qubit on a >= b (flag stays put on a < b).

    XOR semantics make the comparator self-inverse: applying it twice with
    any flag state restores everything, which is how pipelines uncompute it.

    backend "functional" permutes basis labels directly; "circuit" runs the
    carry-chain gate sequence (one Toffoli per bit into `work_reg`, then a
    unitary uncompute pass). Both tally identically: the counts model the
    algorithm, not the simulation shortcut.

    variant "ripple" is the default n-Toffoli carry chain. "compact" models
    the 2n+2-qubit in-place construction costing 2n-1 Toffolis; it shares
    the functional semantics (no gate-level realization here) and its
    published figure already includes uncomputation, so both counting modes
    tally 2n-1.
    """
    counter = counter if counter is not None else _null_counter()
    layout = state.layout
    wa, wb = layout.width(a_reg), layout.width(b_reg)
    if wa != wb:
        raise ValueError("comparator operands must have equal width")
    n = wa

    if variant == "compact":
        counter.toffoli += 2 * n - 1
        return _comparator_functional(state, a_reg, b_reg, flag)
    if variant != "ripple":
        raise ValueError(f"unknown comparator variant {variant!r}")

    counter.toffoli += n if counter.mode == "paper-accounting" else 2 * n
    if backend == "functional":
        return _comparator_functional(state, a_reg, b_reg, flag)
    if backend == "circuit":
        return _comparator_circuit(state, a_reg, b_reg, flag, work_reg)
    raise ValueError(f"unknown comparator backend {backend!r}")


def _comparator_functional(state: StateVector, a_reg: str, b_reg: str,
                           flag: str) -> StateVector:
    idx = state.indices()
    a = state.content(a_reg)
    b = state.content(b_reg)
    flip = (a >= b).astype(np.int64)
    new_idx = idx ^ (flip << state.layout.offset(flag))
    # involution: gather equals scatter
    state.amps = state.amps[new_idx]
    return state


def _comparator_circuit(state: StateVector, a_reg: str, b_reg: str,
                        flag: str, work_reg: str) -> StateVector:
    """Carry chain for a + (2^n - 1 - b) + 1: the final carry is [a >= b].

    Step i computes c_{i+1} = MAJ(a_i, not b_i, c_i) into work_i with a
    single Toffoli, after folding c_i into the operand bits with CNOTs
    (restored by the mirror pass). c_0 = 1 absorbs the +1.
    """
    layout = state.layout
    n = layout.width(a_reg)
    if layout.width(work_reg) < n:
        raise ValueError(
            f"circuit backend needs a {n}-qubit work register")
    aq = [layout.qubit(a_reg, i) for i in range(n)]
    bq = [layout.qubit(b_reg, i) for i in range(n)]
    wq = [layout.qubit(work_reg, i) for i in range(n)]
    fq = layout.qubit(flag)

    def forward():
        # c_1 = a_0 OR (not b_0) = NOT((not a_0) AND b_0)
        apply_gate(state, X, aq[0])
        apply_gate(state, X, wq[0], controls=[aq[0], bq[0]])
        apply_gate(state, X, wq[0])
        apply_gate(state, X, aq[0])
        for i in range(1, n):
            apply_gate(state, X, bq[i])
            apply_gate(state, X, aq[i], controls=[wq[i - 1]])
            apply_gate(state, X, bq[i], controls=[wq[i - 1]])
            apply_gate(state, X, wq[i], controls=[aq[i], bq[i]])
            apply_gate(state, X, wq[i], controls=[wq[i - 1]])

    def backward():
        for i in range(n - 1, 0, -1):
            apply_gate(state, X, wq[i], controls=[wq[i - 1]])
            apply_gate(state, X, wq[i], controls=[aq[i], bq[i]])
            apply_gate(state, X, bq[i], controls=[wq[i - 1]])
            apply_gate(state, X, aq[i], controls=[wq[i - 1]])
            apply_gate(state, X, bq[i])
        apply_gate(state, X, aq[0])
        apply_gate(state, X, wq[0])
        apply_gate(state, X, wq[0], controls=[aq[0], bq[0]])
        apply_gate(state, X, aq[0])

    forward()
    apply_gate(state, X, fq, controls=[wq[n - 1]])
    backward()
    return state


def hadamard_layer(state: StateVector, reg: str,
                   width: int | None = None) -> StateVector:
    """H on the low `width` qubits of a register (default: all of them).
    Clifford, so nothing is tallied."""
    w = state.layout.width(reg) if width is None else width
    off = state.layout.offset(reg)
    for i in range(w):
        apply_gate(state, H, off + i)
    return state


def _ceil_log2(value: int) -> int:
    # width of the smallest power-of-two window holding [0, value)
    return (value - 1).bit_length() if value >= 1 else 0


def controlled_hadamard_layer(state: StateVector, data_reg: str,
                              ref_reg: str,
                              counter: GateCounter | None = None
                              ) -> StateVector:
    """For each data value L, apply H on the low ceil(log2 L) ref qubits.

    This is the superposition-preparation half of unif': conditioned on a
    register-held bound L it spreads ref uniformly over [0, 2^ceil(log2 L)).
    Tallies ceil(log2 L) controlled-Hadamards at the max over populated
    components (per-layer cost model). Subspaces with zero amplitude are
    skipped numerically; the unitary acts as identity there anyway.
    """
    counter = counter if counter is not None else _null_counter()
    layout = state.layout
    n = layout.width(data_reg)
    d_off = layout.offset(data_reg)
    r_off = layout.offset(ref_reg)

    # per-value occupancy via one reshape pass
    low = 1 << d_off
    mid = 1 << n
    high = state.dim // (low * mid)
    weights = (np.abs(state.amps) ** 2).reshape(high, mid, low).sum(axis=(0, 2))
    populated = np.nonzero(weights > 1e-24)[0]

    max_w = 0
    for value in populated:
        w = _ceil_log2(int(value))
        max_w = max(max_w, w)
        data_bits = [(d_off + b, (int(value) >> b) & 1) for b in range(n)]
        for i in range(w):
            apply_gate(state, H, r_off + i, controls=data_bits)
    counter.controlled_hadamard += max_w
    return state


def reflect_about_zero(state: StateVector, regs: tuple[str, ...],
                       counter: GateCounter | None = None,
                       phase: complex = -1.0) -> StateVector:
    """Multiply the all-zeros basis state of the listed registers by
    `phase` (default -1), identity elsewhere. Tallies one reflection;
    the generalized-phase form used by fixed-point schedules counts the
    same because the circuit shape is identical."""
    counter = counter if counter is not None else _null_counter()
    state.phase_on(BasisPredicate.zero(*regs), phase)
    counter.reflections += 1
    return state


def reflect_about(state: StateVector, predicate: BasisPredicate,
                  counter: GateCounter | None = None,
                  phase: complex = -1.0) -> StateVector:
    """Phase the subspace selected by an arbitrary basis predicate."""
    counter = counter if counter is not None else _null_counter()
    state.phase_on(predicate, phase)
    counter.reflections += 1
    return state
