"""Dense statevector engine over named little-endian registers.

Basis index convention: qubit 0 is the least significant bit of the basis
label. Registers occupy contiguous qubit ranges in declaration order, so the
first declared register holds the lowest bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

MAX_QUBITS = 26


@dataclass(frozen=True)
class Tolerances:
    """Central numeric tolerances. Everything tighter than these is treated
    as exact; everything looser is a contract violation."""

    norm: float = 1e-10          # statevector normalization drift
    purity: float = 1e-9         # reduced-state purity for fidelity checks
    equivalence: float = 1e-10   # backend-vs-backend elementwise agreement
    amplitude: float = 1e-10     # measured vs closed-form amplitudes
    dynamics: float = 1e-9       # AA success probability vs sin^2((2k+1)theta)


TOL = Tolerances()


class DegenerateSpecError(ValueError):
    """Input describes no preparable state (d < 1, all coefficients quantize
    to zero, malformed value lists)."""


class NumericContractError(RuntimeError):
    """A numeric invariant the pipeline promises was violated at runtime."""


# gate constants
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
S = np.array([[1, 0], [0, 1j]], dtype=complex)


def phase_gate(phi: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * phi)]], dtype=complex)


def rotation_gate(theta: float) -> np.ndarray:
    """|0> -> sin(theta)|0> + cos(theta)|1>. Real, symmetric, self-inverse."""
    s, c = np.sin(theta), np.cos(theta)
    return np.array([[s, c], [c, -s]], dtype=complex)


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered (name, width) register map packed little-endian."""

    registers: tuple[tuple[str, int], ...]

    def __post_init__(self):
        seen = set()
        for name, width in self.registers:
            if width < 1:
                raise ValueError(f"register {name!r} must have width >= 1")
            if name in seen:
                raise ValueError(f"duplicate register {name!r}")
            seen.add(name)
        if self.total > MAX_QUBITS:
            raise ValueError(
                f"layout needs {self.total} qubits, cap is {MAX_QUBITS}")

    @property
    def total(self) -> int:
        return sum(w for _, w in self.registers)

    def width(self, name: str) -> int:
        for reg, w in self.registers:
            if reg == name:
                return w
        raise KeyError(name)

    def offset(self, name: str) -> int:
        off = 0
        for reg, w in self.registers:
            if reg == name:
                return off
            off += w
        raise KeyError(name)

    def qubit(self, name: str, bit: int = 0) -> int:
        if not 0 <= bit < self.width(name):
            raise IndexError(f"bit {bit} outside register {name!r}")
        return self.offset(name) + bit

    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.registers)


@dataclass(frozen=True)
class BasisPredicate:
    """Subspace membership test over basis labels.

    `equals` pins register contents; `fn`, if given, receives a dict of
    register-content arrays and returns a boolean mask, AND-ed with the
    equality constraints.
    """

    equals: tuple[tuple[str, int], ...] = ()
    fn: Callable[[dict[str, np.ndarray]], np.ndarray] | None = None
    label: str = ""

    @classmethod
    def zero(cls, *registers: str) -> "BasisPredicate":
        return cls(equals=tuple((r, 0) for r in registers),
                   label=" & ".join(f"{r}=0" for r in registers))

    def mask(self, layout: RegisterLayout, indices: np.ndarray) -> np.ndarray:
        out = np.ones(indices.shape, dtype=bool)
        for reg, value in self.equals:
            off, w = layout.offset(reg), layout.width(reg)
            out &= ((indices >> off) & ((1 << w) - 1)) == value
        if self.fn is not None:
            contents = {
                name: (indices >> layout.offset(name))
                & ((1 << layout.width(name)) - 1)
                for name in layout.names()
            }
            out &= np.asarray(self.fn(contents), dtype=bool)
        return out


class StateVector:
    """Normalized complex128 amplitudes over a register layout."""

    def __init__(self, layout: RegisterLayout, amps: np.ndarray):
        self.layout = layout
        self.amps = amps
        self._indices = None

    @property
    def dim(self) -> int:
        return self.amps.size

    def indices(self) -> np.ndarray:
        # cached basis labels, built lazily; 2^m int64 entries
        if self._indices is None:
            self._indices = np.arange(self.dim, dtype=np.int64)
        return self._indices

    def content(self, register: str) -> np.ndarray:
        off = self.layout.offset(register)
        w = self.layout.width(register)
        return (self.indices() >> off) & ((1 << w) - 1)

    def copy(self) -> "StateVector":
        return StateVector(self.layout, self.amps.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def check_norm(self):
        if abs(self.norm() - 1.0) > TOL.norm * 10:
            raise NumericContractError(
                f"state norm drifted to {self.norm()!r}")

    def probability(self, predicate: BasisPredicate) -> float:
        m = predicate.mask(self.layout, self.indices())
        return float(np.sum(np.abs(self.amps[m]) ** 2))

    def phase_on(self, predicate: BasisPredicate, factor: complex):
        """Multiply amplitudes in the predicate subspace by a unit factor."""
        m = predicate.mask(self.layout, self.indices())
        self.amps[m] *= factor

    def scale(self, factor: complex):
        self.amps *= factor


def init_state(layout: RegisterLayout,
               values: dict[str, int] | None = None) -> StateVector:
    """Computational basis state; registers default to |0>."""
    index = 0
    if values:
        for reg, v in values.items():
            w = layout.width(reg)
            if not 0 <= v < (1 << w):
                raise ValueError(f"value {v} overflows register {reg!r}")
            index |= v << layout.offset(reg)
    amps = np.zeros(1 << layout.total, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(layout, amps)


def _normalize_controls(controls) -> list[tuple[int, int]]:
    out = []
    for c in controls:
        if isinstance(c, tuple):
            q, v = c
            if v not in (0, 1):
                raise ValueError("control value must be 0 or 1")
            out.append((int(q), int(v)))
        else:
            out.append((int(c), 1))
    return out


def apply_gate(state: StateVector, gate: np.ndarray, target: int,
               controls: Sequence = ()) -> StateVector:
    """Apply a 2x2 gate to `target`, optionally conditioned on control
    qubits. Controls are qubit indices (control-on-1) or (qubit, value)
    pairs. In place; returns the state for chaining."""
    g = np.asarray(gate, dtype=np.complex128)
    if g.shape != (2, 2):
        raise ValueError("gate must be 2x2")
    m = state.layout.total
    if not 0 <= target < m:
        raise IndexError(f"target {target} outside {m} qubits")
    ctrls = _normalize_controls(controls)
    for q, _ in ctrls:
        if not 0 <= q < m:
            raise IndexError(f"control {q} outside {m} qubits")
        if q == target:
            raise ValueError("control collides with target")

    view = state.amps.reshape((2,) * m)
    # C-order: axis j addresses qubit m-1-j
    sel: list = [slice(None)] * m
    for q, v in ctrls:
        sel[m - 1 - q] = v
    target_axis = m - 1 - target
    # pinned axes before the target shift its position in the subview
    tpos = target_axis - sum(1 for q, _ in ctrls if (m - 1 - q) < target_axis)
    sub = view[tuple(sel)]
    sub = np.moveaxis(sub, tpos, 0)
    a0 = sub[0].copy()
    a1 = sub[1]
    sub[0] = g[0, 0] * a0 + g[0, 1] * a1
    sub[1] = g[1, 0] * a0 + g[1, 1] * a1
    return state


@dataclass(frozen=True)
class PermutationOracle:
    """Bijection over the joint contents of a register subset.

    `table` maps the packed read-register contents to XOR masks applied to
    the packed write-register contents; XOR semantics keep every table a
    self-inverse permutation, which covers all oracles used here.
    """

    reads: tuple[str, ...]
    writes: tuple[str, ...]
    table: np.ndarray  # int64, length 2^(sum of read widths)
    name: str = ""

    def __post_init__(self):
        if set(self.reads) & set(self.writes):
            # XOR-permutation is only an involution when the key registers
            # are untouched by the write
            raise ValueError("oracle reads and writes must be disjoint")

    def xor_masks(self, read_key: np.ndarray) -> np.ndarray:
        return self.table[read_key]


def apply_permutation_oracle(state: StateVector,
                             oracle: PermutationOracle) -> StateVector:
    """Apply the basis permutation idx -> idx XOR (mask << write offsets).

    The XOR form is bijective for any table, so no runtime bijectivity scan
    is needed; oracle builders validate their tables at construction.
    """
    layout = state.layout
    idx = state.indices()
    key = np.zeros(state.dim, dtype=np.int64)
    shift = 0
    for reg in oracle.reads:
        off, w = layout.offset(reg), layout.width(reg)
        key |= (((idx >> off) & ((1 << w) - 1)) << shift)
        shift += w
    masks = oracle.xor_masks(key)
    new_idx = idx.copy()
    shift = 0
    for reg in oracle.writes:
        off, w = layout.offset(reg), layout.width(reg)
        part = (masks >> shift) & ((1 << w) - 1)
        new_idx ^= part << off
        shift += w
    # XOR against read-only keys is an involution, so gather == scatter
    state.amps = state.amps[new_idx]
    state._indices = idx
    return state


def postselect(state: StateVector,
               predicate: BasisPredicate) -> tuple[StateVector, float]:
    """Project onto the predicate subspace and renormalize.

    Returns (new state, outcome probability). Zero probability is an error:
    the caller asked for an impossible measurement record.
    """
    m = predicate.mask(state.layout, state.indices())
    prob = float(np.sum(np.abs(state.amps[m]) ** 2))
    if prob <= 0.0:
        raise NumericContractError(
            f"postselection on {predicate.label or predicate.equals} has "
            "zero probability")
    amps = np.where(m, state.amps, 0.0) / np.sqrt(prob)
    out = StateVector(state.layout, amps)
    out._indices = state._indices
    return out, prob


def reduced_density(state: StateVector, register: str) -> np.ndarray:
    """Partial trace onto one register (registers are contiguous)."""
    off = state.layout.offset(register)
    w = state.layout.width(register)
    low = 1 << off
    mid = 1 << w
    high = state.dim // (low * mid)
    psi = state.amps.reshape(high, mid, low)
    return np.einsum("hcl,hdl->cd", psi, psi.conj())


def fidelity(state: StateVector, target: np.ndarray, register: str = "out",
             predicate: BasisPredicate | None = None) -> float:
    """|<target|psi_register>|^2 after optional postselection.

    The reduced state on `register` must be pure to within TOL.purity;
    residual entanglement with other registers means the pipeline failed to
    uncompute something, which is reported as a contract violation rather
    than silently averaged over.
    """
    if predicate is not None:
        state, _ = postselect(state, predicate)
    t = np.asarray(target, dtype=np.complex128).ravel()
    w = state.layout.width(register)
    if t.size != (1 << w):
        raise ValueError(
            f"target has {t.size} amplitudes, register holds {1 << w}")
    nt = np.linalg.norm(t)
    if nt == 0:
        raise ValueError("target vector is zero")
    t = t / nt
    rho = reduced_density(state, register)
    purity = float(np.einsum("cd,dc->", rho, rho).real)
    if abs(purity - 1.0) > TOL.purity:
        raise NumericContractError(
            f"reduced state on {register!r} is not pure "
            f"(purity {purity:.12f}); register is still entangled")
    f = float((t.conj() @ rho @ t).real)
    return min(max(f, 0.0), 1.0)
