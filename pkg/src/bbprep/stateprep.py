"""End-to-end state-preparation drivers.

All five coefficient problems share one skeleton: write quantized
coefficients into a register with black-box oracle queries, transduce them
into amplitudes by comparing against a uniform reference, amplify the
flagged branch, then uncompute the bookkeeping registers and postselect.
The drivers differ only in the transduction step and in how the reference
register is returned to |0>: the linear family unprepares it with
Hadamards, the root family needs the fixed-point amplitude-amplification
reset implemented by unif_inverse.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from ._fpaa_words import (
    DIRECT_HALF_WORDS,
    NESTED_DEFICIT,
    NESTED_INNER_EPS,
    NESTED_OUTER_HALF,
)
from .circuits import (
    GateCounter,
    comparator,
    controlled_hadamard_layer,
    hadamard_layer,
    reflect_about,
    reflect_about_zero,
)
from .oracles import (
    TWO_PI,
    AmplitudeSpec,
    apply_oracle,
    cartesian_root_inequality_oracle,
    cartesian_root_marked_counts,
    make_amp_oracle,
    make_cartesian_oracles,
    make_polar_oracles,
    quantize,
)
from .simulator import (
    H,
    BasisPredicate,
    DegenerateSpecError,
    NumericContractError,
    RegisterLayout,
    StateVector,
    apply_gate,
    fidelity,
    init_state,
    phase_gate,
    postselect,
)

PROBLEMS = (
    "linear",
    "root",
    "polar-linear",
    "polar-root",
    "cartesian-linear",
    "cartesian-root",
)

INV_SQRT2 = math.sqrt(0.5)

# occupancy threshold shared with the circuit blocks: anything below is an
# exactly-zero branch that never received amplitude
_OCCUPANCY_EPS = 1e-24


# ---------------------------------------------------------------------------
# schedules and results


@dataclass(frozen=True)
class AASchedule:
    """Amplitude-amplification plan: initial angle, round count, and the
    success probability sin^2((2k+1) theta) those rounds should land on."""

    theta: float
    rounds: int
    predicted_success: float

    @classmethod
    def auto(cls, sin_theta: float) -> "AASchedule":
        if not 0.0 < sin_theta <= 1.0:
            raise DegenerateSpecError(
                f"good amplitude {sin_theta!r} outside (0, 1]")
        theta = math.asin(min(sin_theta, 1.0))
        # round(pi/(4 theta) - 1/2) half-up, which lands sin((2k+1)theta)
        # nearest pi/2; theta <= pi/2 keeps the floor argument >= 1/2
        k = max(0, int(math.floor(math.pi / (4.0 * theta))))
        return cls(theta, k, math.sin((2 * k + 1) * theta) ** 2)

    def with_rounds(self, k: int) -> "AASchedule":
        if k < 0:
            raise ValueError("round count must be >= 0")
        return replace(self, rounds=k,
                       predicted_success=math.sin((2 * k + 1) * self.theta) ** 2)


@dataclass(frozen=True)
class FPAASchedule:
    """Fixed-point amplification word: any initial good amplitude >= delta
    is boosted to >= sqrt(1 - eps^2).

    `pairs` lists the (alpha, beta) generalized-reflection phases of one
    iterate each; the realization queries the underlying preparation map
    L = 2*len(pairs) + 1 times. `deficit` is the certified worst-case gap
    1 - min Re p(lambda) over lambda in [delta^2, 1], with deficit <=
    eps^2 / 2 implying the amplitude contract.
    """

    delta: float
    eps: float
    pairs: tuple[tuple[float, float], ...]
    deficit: float

    @property
    def queries(self) -> int:
        return 2 * len(self.pairs) + 1

    # odd query count is the natural "L" of the construction
    L = queries


@dataclass(frozen=True)
class PrepResult:
    """Outcome of one driver run."""

    problem: str
    state: StateVector
    rounds: int
    success_probability: float
    fidelity: float
    counts: dict[str, int]
    qubits: int
    schedule: AASchedule
    fp_schedule: FPAASchedule | None = None


# ---------------------------------------------------------------------------
# preparation maps


class PreparationMap:
    """Ordered reversible op sequence with an explicit inverse.

    Ops are callables (state, counter) -> state. Each op registered without
    a partner is treated as self-inverse, which covers Hadamard layers,
    XOR oracles and the comparator; phase ops register their conjugates.
    """

    def __init__(self, layout: RegisterLayout,
                 counter: GateCounter | None = None):
        self.layout = layout
        self.counter = counter
        self._steps: list[tuple] = []

    def add(self, forward, inverse=None) -> "PreparationMap":
        self._steps.append((forward, inverse if inverse is not None
                            else forward))
        return self

    def apply(self, state: StateVector,
              counter: GateCounter | None = None) -> StateVector:
        c = counter if counter is not None else self.counter
        for fwd, _ in self._steps:
            fwd(state, c)
        return state

    def apply_inverse(self, state: StateVector,
                      counter: GateCounter | None = None) -> StateVector:
        c = counter if counter is not None else self.counter
        for _, inv in reversed(self._steps):
            inv(state, c)
        return state


def make_layout(spec: AmplitudeSpec, problem: str,
                backend: str = "functional") -> RegisterLayout:
    """Register plan for a problem. The circuit backend appends the
    comparator's carry register; the functional backend leaves it out to
    keep statevectors small (the cost report is backend-independent)."""
    n = spec.n
    regs: list[tuple[str, int]] = [("out", spec.out_width)]
    if problem in ("linear", "root", "polar-linear", "polar-root"):
        regs += [("data", n), ("ref", n)]
        if backend == "circuit":
            regs.append(("work", n))
        regs.append(("flag", 1))
    elif problem == "cartesian-linear":
        regs += [("data", n), ("dsign", 1), ("ref", n)]
        if backend == "circuit":
            regs.append(("work", n))
        regs += [("flag", 1), ("sel", 1)]
    elif problem == "cartesian-root":
        if backend != "functional":
            raise ValueError(
                "the inequality oracle has no gate-level realization; "
                "cartesian-root supports the functional backend only")
        regs += [("adata", n), ("asign", 1), ("bdata", n), ("bsign", 1),
                 ("ref", n), ("flag", 1), ("sel", 1)]
    else:
        raise ValueError(f"unknown problem {problem!r}")
    return RegisterLayout(tuple(regs))


def qubit_cost(spec: AmplitudeSpec, problem: str) -> int:
    """Total qubits of the algorithm proper: ceil(log2 d) address qubits
    plus data/ref/carry/flag bookkeeping. Reported independently of the
    simulation backend (the functional backend merely avoids allocating
    the carry register it never permutes)."""
    hw = spec.hadamard_width
    n = spec.n
    if problem in ("linear", "root", "polar-linear", "polar-root"):
        return hw + 3 * n + 1
    if problem == "cartesian-linear":
        return hw + 3 * n + 3
    if problem == "cartesian-root":
        return hw + 3 * n + 4
    raise ValueError(f"unknown problem {problem!r}")


def _transduction_map(layout: RegisterLayout, data_oracle, backend: str,
                      counter: GateCounter | None, variant: str,
                      hadamard_width: int,
                      unprepare_ref: bool) -> PreparationMap:
    prep = PreparationMap(layout, counter)
    prep.add(lambda s, c: hadamard_layer(s, "out", hadamard_width))
    prep.add(lambda s, c: apply_oracle(s, data_oracle, c))
    prep.add(lambda s, c: hadamard_layer(s, "ref"))
    prep.add(lambda s, c: comparator(s, "ref", "data", "flag",
                                     backend=backend, counter=c,
                                     variant=variant))
    if unprepare_ref:
        prep.add(lambda s, c: hadamard_layer(s, "ref"))
    return prep


def prepare_unitary_linear(spec: AmplitudeSpec,
                           layout: RegisterLayout | None = None,
                           backend: str = "functional",
                           counter: GateCounter | None = None,
                           variant: str = "ripple") -> PreparationMap:
    """The linear-problem preparation unitary A.

    A|0> spreads the address register, writes the coefficient codes, and
    compares them against a uniform reference, leaving good amplitude
    code_l / (2^n sqrt(D)) on |l>|code_l>|0>_ref|0>_flag where D is the
    padded address dimension.
    """
    if spec.form != "real":
        raise ValueError("linear preparation takes a real-form spec")
    if layout is None:
        layout = make_layout(spec, "linear", backend)
    oracle = make_amp_oracle(spec, layout)
    return _transduction_map(layout, oracle, backend, counter, variant,
                             spec.hadamard_width, unprepare_ref=True)


def _cartesian_linear_map(spec: AmplitudeSpec, layout: RegisterLayout,
                          backend: str, counter: GateCounter | None,
                          variant: str) -> PreparationMap:
    """Preparation unitary for complex coefficients, linear problem.

    A selector qubit in (|0> + i|1>)/sqrt(2) routes conditional real- and
    imaginary-part queries into a shared sign-magnitude register; a Z on
    the sign bit transduces the sign, the comparator the magnitude. The
    legs are unqueried before the closing selector Hadamard, so every A
    application leaves data and dsign clean and the good subspace
    flag=ref=sel=0 carries (re_l + i im_l)/2^(n+1) per address.
    """
    real_o, imag_o = make_cartesian_oracles(spec, layout)
    sel_q = layout.qubit("sel")
    sign_q = layout.qubit("dsign")
    s_gate = phase_gate(math.pi / 2)
    s_dag = phase_gate(-math.pi / 2)
    z = phase_gate(math.pi)

    prep = PreparationMap(layout, counter)
    prep.add(lambda s, c: hadamard_layer(s, "out", spec.hadamard_width))
    prep.add(lambda s, c: apply_gate(s, H, sel_q))
    prep.add(lambda s, c: apply_gate(s, s_gate, sel_q),
             lambda s, c: apply_gate(s, s_dag, sel_q))
    prep.add(lambda s, c: apply_oracle(s, real_o, c))
    prep.add(lambda s, c: apply_oracle(s, imag_o, c))
    prep.add(lambda s, c: apply_gate(s, z, sign_q))
    prep.add(lambda s, c: hadamard_layer(s, "ref"))
    prep.add(lambda s, c: comparator(s, "ref", "data", "flag",
                                     backend=backend, counter=c,
                                     variant=variant))
    prep.add(lambda s, c: hadamard_layer(s, "ref"))
    prep.add(lambda s, c: apply_oracle(s, real_o, c))
    prep.add(lambda s, c: apply_oracle(s, imag_o, c))
    prep.add(lambda s, c: apply_gate(s, H, sel_q))
    return prep


def _cartesian_root_map(spec: AmplitudeSpec, layout: RegisterLayout,
                        counter: GateCounter | None) -> PreparationMap:
    """Preparation unitary for complex coefficients, root problem.

    Both parts are written unconditionally (the inequality needs them at
    once); the selector chooses which sign branch of the quartic
    inequality the flag oracle evaluates, so the marked counts m0 and m1
    approximate 2^n Re sqrt(alpha) and 2^n |Im sqrt(alpha)|. A controlled
    Z copies the sign of the imaginary part onto the i-branch.
    """
    real_o, imag_o = make_cartesian_oracles(spec, layout)
    ineq = cartesian_root_inequality_oracle(spec, layout)
    sel_q = layout.qubit("sel")
    bsign_q = layout.qubit("bsign")
    s_gate = phase_gate(math.pi / 2)
    s_dag = phase_gate(-math.pi / 2)
    z = phase_gate(math.pi)

    prep = PreparationMap(layout, counter)
    prep.add(lambda s, c: hadamard_layer(s, "out", spec.hadamard_width))
    prep.add(lambda s, c: apply_gate(s, H, sel_q))
    prep.add(lambda s, c: apply_gate(s, s_gate, sel_q),
             lambda s, c: apply_gate(s, s_dag, sel_q))
    prep.add(lambda s, c: apply_oracle(s, real_o, c))
    prep.add(lambda s, c: apply_oracle(s, imag_o, c))
    # sign of the imaginary part, applied only on the i-branch
    prep.add(lambda s, c: apply_gate(s, z, bsign_q, controls=[sel_q]))
    prep.add(lambda s, c: hadamard_layer(s, "ref"))
    prep.add(lambda s, c: apply_oracle(s, ineq, c))
    prep.add(lambda s, c: hadamard_layer(s, "ref"))
    prep.add(lambda s, c: apply_oracle(s, real_o, c))
    prep.add(lambda s, c: apply_oracle(s, imag_o, c))
    prep.add(lambda s, c: apply_gate(s, H, sel_q))
    return prep


# ---------------------------------------------------------------------------
# amplification


def amplitude_amplification(state: StateVector, prep: PreparationMap,
                            good: BasisPredicate, k: int,
                            counter: GateCounter | None = None
                            ) -> StateVector:
    """k Grover iterates about the good subspace of A|0>.

    Each iterate is -A S0 A^-1 Sg with Sg the phase flip on `good` and S0
    the phase flip on the all-zeros state; the leading minus sign makes
    the good amplitude land exactly on sin((2k+1) theta).
    """
    if k < 0:
        raise ValueError("round count must be >= 0")
    for _ in range(k):
        reflect_about(state, good, counter)
        prep.apply_inverse(state, counter)
        reflect_about_zero(state, prep.layout.names(), counter)
        prep.apply(state, counter)
        state.scale(-1.0)
    return state


def schedule_rounds(spec: AmplitudeSpec, problem: str) -> AASchedule:
    """Round plan from the quantized codes (not the raw coefficients), so
    the predicted success probability is exact rather than asymptotic."""
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}")
    code = quantize(spec)
    n = spec.n
    scale = 1 << n
    dim = spec.padded_dim

    if problem in ("linear", "polar-linear"):
        mags = code.magnitudes()
        s = math.sqrt(sum(m * m for m in mags)) / (scale * math.sqrt(dim))
    elif problem in ("root", "polar-root"):
        mags = code.magnitudes()
        s = math.sqrt(sum(mags) / (scale * dim))
    elif problem == "cartesian-linear":
        s = math.sqrt(sum(ra * ra + rb * rb
                          for _, ra, _, rb in code.codes)) \
            / (2 * scale * math.sqrt(dim))
    else:  # cartesian-root
        m0, m1, _ = cartesian_root_marked_counts(spec)
        s = math.sqrt(sum(a * a + b * b for a, b in zip(m0, m1))) \
            / (2 * scale * math.sqrt(dim))

    if s <= 0.0:
        raise DegenerateSpecError("quantized spec has zero good amplitude")
    return AASchedule.auto(min(s, 1.0))


# ---------------------------------------------------------------------------
# unif' and its fixed-point inverse


def _unif_map(layout: RegisterLayout, data_reg: str, ref_reg: str,
              anc: str, backend: str, variant: str,
              counter: GateCounter | None) -> PreparationMap:
    prep = PreparationMap(layout, counter)
    prep.add(lambda s, c: controlled_hadamard_layer(s, data_reg, ref_reg, c))
    prep.add(lambda s, c: comparator(s, ref_reg, data_reg, anc,
                                     backend=backend, counter=c,
                                     variant=variant))
    return prep


def _populated_values(state: StateVector, reg: str) -> np.ndarray:
    layout = state.layout
    low = 1 << layout.offset(reg)
    mid = 1 << layout.width(reg)
    high = state.dim // (low * mid)
    weights = (np.abs(state.amps) ** 2).reshape(high, mid, low)
    return np.nonzero(weights.sum(axis=(0, 2)) > _OCCUPANCY_EPS)[0]


def unif_prime(state: StateVector, data_reg: str = "data",
               ref_reg: str = "ref", anc: str = "flag",
               counter: GateCounter | None = None,
               backend: str = "functional",
               variant: str = "ripple") -> StateVector:
    """Conditioned on a register-held bound L, spread ref uniformly over
    [0, 2^ceil(log2 L)) and set anc = 0 exactly on the x < L slice, which
    carries amplitude sqrt(L / 2^ceil(log2 L)) > 1/sqrt(2).

    The ancilla must be clean and every populated data component must
    hold L >= 1; a bound of zero spans no interval at all.
    """
    for value in _populated_values(state, data_reg):
        if int(value) == 0:
            raise DegenerateSpecError(
                "unif' bound register holds 0 on a populated component")
    controlled_hadamard_layer(state, data_reg, ref_reg, counter)
    comparator(state, ref_reg, data_reg, anc, backend=backend,
               counter=counter, variant=variant)
    return state


def _mirror(half) -> tuple[tuple[float, float], ...]:
    head = tuple((float(a), float(b)) for a, b in half)
    return head + tuple((b, a) for a, b in reversed(head))


def _flatten_nested(inner, outer) -> tuple[tuple[float, float], ...]:
    # Substituting a length-m word into each outer iterate: the outer
    # reflections become phased products of inner reflections, which
    # telescopes into 2m+1 flat iterates per outer pair.
    m = len(inner)
    flat: list[tuple[float, float]] = []
    for a_k, b_k in outer:
        flat.append((-inner[m - 1][0], b_k))
        for j in range(m - 1, 0, -1):
            flat.append((-inner[j - 1][0], -inner[j][1]))
        flat.append((a_k, -inner[0][1]))
        flat.extend(inner)
    return tuple(flat)


def _nested_word() -> tuple[tuple[float, float], ...]:
    inner_half = next(h for e, h, _ in DIRECT_HALF_WORDS
                      if e == NESTED_INNER_EPS)
    inner = _mirror(inner_half)
    outer = _mirror(NESTED_OUTER_HALF)
    return tuple(inner) + _flatten_nested(inner, outer)


def transfer_profile(schedule, amplitudes) -> np.ndarray:
    """Final good amplitude of the fixed-point word in the two-dimensional
    bad/good model, per initial amplitude. Used both to certify schedules
    and to test the contract; palindromic words make the result real up
    to round-off."""
    pairs = schedule.pairs if isinstance(schedule, FPAASchedule) \
        else tuple(schedule)
    a = np.atleast_1d(np.asarray(amplitudes, dtype=float))
    c = np.sqrt(np.clip(1.0 - a * a, 0.0, 1.0))
    s = np.stack([c, a], axis=1).astype(complex)
    v = s.copy()
    for alpha, beta in pairs:
        v[:, 1] = v[:, 1] * np.exp(1j * beta)
        ov = (s.conj() * v).sum(axis=1)
        v = v - (1.0 - np.exp(-1j * alpha)) * ov[:, None] * s
        v = -v
    return v[:, 1]


def _word_transfer_grad(half: np.ndarray, lams: np.ndarray):
    """Transfer p(lambda) and its gradient in the 2l half-word phases,
    with the palindromic tying folded in. Reverse-mode through the 2x2
    iterates; the mirrored position m-1-j reuses parameter j with the
    roles of the two phases swapped."""
    half = np.asarray(half, dtype=float).reshape(-1, 2)
    l = half.shape[0]
    pairs = _mirror(half)
    m = len(pairs)
    c = np.sqrt(1.0 - lams)
    s = np.stack([c, np.sqrt(lams)], axis=1).astype(complex)

    states = [s.copy()]
    v = s.copy()
    for alpha, beta in pairs:
        v = v.copy()
        v[:, 1] = v[:, 1] * np.exp(1j * beta)
        ov = (s.conj() * v).sum(axis=1)
        v = v - (1.0 - np.exp(-1j * alpha)) * ov[:, None] * s
        v = -v
        states.append(v)
    p = states[-1][:, 1].copy()

    w = np.zeros((lams.size, 2), dtype=complex)
    w[:, 1] = 1.0
    dp = np.zeros((lams.size, m, 2), dtype=complex)
    for k in range(m, 0, -1):
        alpha, beta = pairs[k - 1]
        vin = states[k - 1]
        u = vin.copy()
        u[:, 1] = u[:, 1] * np.exp(1j * beta)
        ovu = (s.conj() * u).sum(axis=1)
        dv_da = 1j * np.exp(-1j * alpha) * ovu[:, None] * s
        t_only = np.zeros_like(vin)
        t_only[:, 1] = 1j * np.exp(1j * beta) * vin[:, 1]
        ovt = (s.conj() * t_only).sum(axis=1)
        dv_db = -(t_only - (1.0 - np.exp(-1j * alpha)) * ovt[:, None] * s)
        dp[:, k - 1, 0] = (w * dv_da).sum(axis=1)
        dp[:, k - 1, 1] = (w * dv_db).sum(axis=1)
        ws = (w * s).sum(axis=1)
        w_ss = w - (1.0 - np.exp(-1j * alpha)) * ws[:, None] * s.conj()
        w_ss[:, 1] = w_ss[:, 1] * np.exp(1j * beta)
        w = -w_ss

    grad = np.zeros((lams.size, l, 2), dtype=complex)
    for j in range(l):
        grad[:, j, 0] = dp[:, j, 0] + dp[:, m - 1 - j, 1]
        grad[:, j, 1] = dp[:, j, 1] + dp[:, m - 1 - j, 0]
    return p, grad.reshape(lams.size, 2 * l)


def _verify_word(half, lam_lo: float, grid: int = 8001) -> float:
    lams = np.linspace(lam_lo, 1.0, grid)
    p = transfer_profile(_mirror(np.asarray(half, float).reshape(-1, 2)),
                         np.sqrt(lams))
    return float(1.0 - p.real.min())


def _solve_word(lam_lo: float, eps: float):
    """Minimax phase search for amplitude bounds below 1/sqrt(2), where no
    frozen word applies. Deterministic (fixed RNG seed, deterministic
    optimizer), verified on a dense grid before being returned."""
    from scipy.optimize import minimize
    from scipy.special import logsumexp

    lams = np.linspace(lam_lo, 1.0, 257)
    need = 0.5 * eps * eps
    target = 1.0 - 0.45 * eps * eps
    rng = np.random.default_rng(20240817)
    warm = [np.asarray(h, dtype=float).reshape(-1, 2)
            for _, h, _ in DIRECT_HALF_WORDS]

    def polish(x0: np.ndarray, l: int) -> np.ndarray:
        x = x0.copy()
        for tau in (1e-3, 1e-5, 1e-7, 1e-9):
            def obj(xv):
                p, g = _word_transfer_grad(xv.reshape(l, 2), lams)
                deficit = (target - p.real) / tau
                lse = tau * logsumexp(deficit)
                soft = np.exp(deficit - logsumexp(deficit))
                gre = -(soft[:, None] * g.real).sum(axis=0)
                pen = 1e-4 * float((p.imag ** 2).sum())
                gpen = 2e-4 * (p.imag[:, None] * g.imag).sum(axis=0)
                return lse + pen, gre + gpen

            res = minimize(obj, x, jac=True, method="L-BFGS-B",
                           options={"maxiter": 1200, "ftol": 1e-18,
                                    "gtol": 1e-16})
            x = res.x
        return x

    l_lo = max(1, int(math.log(2.0 / eps)
                      / (4.0 * max(math.sqrt(lam_lo), 0.05))))
    for l in range(l_lo, 41):
        starts = []
        for seed in warm:
            if seed.shape[0] <= l:
                pad = np.zeros((l - seed.shape[0], 2))
                base = np.vstack([seed, pad]).ravel()
                starts.append(base)
                starts.append(base + 0.1 * rng.standard_normal(base.shape))
        for _ in range(8):
            starts.append(rng.uniform(-math.pi, math.pi, 2 * l))
        best = None
        for x0 in starts:
            x = polish(np.asarray(x0, dtype=float), l)
            deficit = _verify_word(x, lam_lo)
            if best is None or deficit < best[0]:
                best = (deficit, x)
            if deficit <= need:
                break
        deficit, x = best
        if deficit <= need:
            return _mirror(x.reshape(l, 2)), deficit
    raise NumericContractError(
        f"no verifiable fixed-point word found for delta^2={lam_lo!r}, "
        f"eps={eps!r}")


@lru_cache(maxsize=64)
def fixed_point_schedule(delta: float, eps: float) -> FPAASchedule:
    """Phase word meeting the fixed-point contract for the given bounds.

    For delta >= 1/sqrt(2) (the unif' regime) the word comes off a frozen
    ladder of pre-certified solutions, the deepest of which composes a
    coarse word with itself; anything finer, or any smaller delta, runs
    the minimax search at call time. Either way the returned deficit is a
    verified grid bound, not a formula.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must be in (0, 1], got {delta!r}")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps!r}")
    lam_lo = delta * delta
    need = 0.5 * eps * eps
    if lam_lo >= 0.5 - 1e-12:
        for _, half, deficit in DIRECT_HALF_WORDS:
            if deficit <= need:
                return FPAASchedule(delta, eps, _mirror(half), deficit)
        if NESTED_DEFICIT <= need:
            return FPAASchedule(delta, eps, _nested_word(), NESTED_DEFICIT)
    pairs, deficit = _solve_word(lam_lo, eps)
    return FPAASchedule(delta, eps, pairs, deficit)


def unif_inverse(state: StateVector, data_reg: str = "data",
                 ref_reg: str = "ref", eps: float = 1e-3,
                 counter: GateCounter | None = None, anc: str = "flag",
                 backend: str = "functional",
                 variant: str = "ripple") -> StateVector:
    """Return ref from a uniform superposition over [0, L) to |0>, to
    within amplitude eps per component, for register-held bounds L.

    Realized as the adjoint of fixed-point amplitude amplification over
    unif': the anc=0 branch of unif' A holds the wanted state with
    amplitude sqrt(L/2^ceil(log2 L)) > 1/sqrt(2), so the boosted word
    maps |0> to it with amplitude >= sqrt(1-eps^2), and its adjoint is
    the reset. Residual amplitude is left outside ref=0/anc=0 rather than
    silently projected away; callers postselect and see the probability.
    """
    for value in _populated_values(state, data_reg):
        if int(value) == 0:
            raise DegenerateSpecError(
                "reset bound register holds 0 on a populated component")
    schedule = fixed_point_schedule(INV_SQRT2, eps)
    amap = _unif_map(state.layout, data_reg, ref_reg, anc, backend,
                     variant, counter)
    anc_zero = BasisPredicate.zero(anc)
    for alpha, beta in reversed(schedule.pairs):
        state.scale(-1.0)
        amap.apply_inverse(state, counter)
        reflect_about_zero(state, (ref_reg, anc), counter,
                           phase=cmath.exp(1j * alpha))
        amap.apply(state, counter)
        state.phase_on(anc_zero, cmath.exp(-1j * beta))
        if counter is not None:
            counter.phase_rotations += 1
    amap.apply_inverse(state, counter)
    return state


# ---------------------------------------------------------------------------
# drivers


def _require_form(spec: AmplitudeSpec, form: str):
    if spec.form != form:
        raise ValueError(f"driver needs a {form}-form spec, "
                         f"got {spec.form!r}")


def _padded_target(values: np.ndarray,
                   layout: RegisterLayout) -> np.ndarray:
    target = np.zeros(1 << layout.width("out"), dtype=complex)
    target[:values.size] = values
    return target


def _resolve_rounds(schedule: AASchedule, rounds) -> int:
    if rounds is None:
        return schedule.rounds
    k = int(rounds)
    if k < 0:
        raise ValueError("rounds must be >= 0")
    return k


def _magnitude_pipeline(spec: AmplitudeSpec, root: bool, backend: str,
                        rounds, eps, counter: GateCounter,
                        variant: str):
    """Shared engine of the real and polar drivers: transduce magnitude
    codes, amplify, then uncompute. Returns the cleaned state plus the
    bookkeeping the drivers wrap into a PrepResult."""
    problem = "root" if root else "linear"
    layout = make_layout(spec, problem, backend)
    if spec.form == "polar":
        mag_oracle, arg_oracle = make_polar_oracles(spec, layout)
    else:
        mag_oracle = make_amp_oracle(spec, layout)
        arg_oracle = None
    prep = _transduction_map(layout, mag_oracle, backend, counter, variant,
                             spec.hadamard_width, unprepare_ref=not root)

    prefix = "polar-" if spec.form == "polar" else ""
    schedule = schedule_rounds(spec, prefix + problem)
    k = _resolve_rounds(schedule, rounds)
    good = BasisPredicate.zero("flag") if root \
        else BasisPredicate.zero("flag", "ref")

    state = init_state(layout)
    prep.apply(state, counter)
    amplitude_amplification(state, prep, good, k, counter)
    success = state.probability(good)

    fp = None
    if root:
        state, _ = postselect(state, good)
        fp = fixed_point_schedule(INV_SQRT2, eps)
        unif_inverse(state, "data", "ref", eps, counter, anc="flag",
                     backend=backend, variant=variant)
        apply_oracle(state, mag_oracle, counter)
        state, _ = postselect(state, BasisPredicate.zero("ref", "flag"))
    else:
        state, _ = postselect(state, good)
        apply_oracle(state, mag_oracle, counter)

    return state, layout, schedule.with_rounds(k), success, fp, arg_oracle


def prepare_linear(spec: AmplitudeSpec, backend: str = "functional",
                   rounds=None, counter: GateCounter | None = None,
                   variant: str = "ripple") -> PrepResult:
    """Prepare amplitudes proportional to the coefficients themselves.

    Exact by construction: after amplification, postselecting flag=ref=0
    and unwriting the data register with one more oracle query leaves
    the normalized quantized coefficient vector on the address register.
    """
    _require_form(spec, "real")
    counter = counter if counter is not None else GateCounter()
    state, layout, schedule, success, _, _ = _magnitude_pipeline(
        spec, False, backend, rounds, None, counter, variant)
    code = quantize(spec)
    target = _padded_target(np.array(code.magnitudes(), dtype=float), layout)
    fid = fidelity(state, target, "out")
    if fid < 1.0 - 1e-9:
        raise NumericContractError(
            f"linear pipeline fidelity {fid!r} below its exactness contract")
    return PrepResult("linear", state, schedule.rounds, success, fid,
                      counter.snapshot(), qubit_cost(spec, "linear"),
                      schedule)


def prepare_root(spec: AmplitudeSpec, backend: str = "functional",
                 rounds=None, eps: float | None = None,
                 counter: GateCounter | None = None,
                 variant: str = "ripple") -> PrepResult:
    """Prepare amplitudes proportional to the square roots of the
    coefficients.

    Skipping the reference unprepare makes each address carry sqrt of its
    code; the price is a non-uniform reference register that only the
    fixed-point reset can clean, so eps (the per-component residual) is a
    required parameter here.
    """
    _require_form(spec, "real")
    if eps is None:
        raise ValueError("root preparation requires eps for the "
                         "fixed-point reference reset")
    counter = counter if counter is not None else GateCounter()
    state, layout, schedule, success, fp, _ = _magnitude_pipeline(
        spec, True, backend, rounds, eps, counter, variant)
    code = quantize(spec)
    target = _padded_target(
        np.sqrt(np.array(code.magnitudes(), dtype=float)), layout)
    fid = fidelity(state, target, "out")
    if fid < 1.0 - 2.0 * eps - 1e-9:
        raise NumericContractError(
            f"root pipeline fidelity {fid!r} below 1 - 2 eps")
    return PrepResult("root", state, schedule.rounds, success, fid,
                      counter.snapshot(), qubit_cost(spec, "root"),
                      schedule, fp)


def prepare_polar(spec: AmplitudeSpec, problem: str = "linear",
                  backend: str = "functional", rounds=None,
                  eps: float | None = None,
                  counter: GateCounter | None = None,
                  variant: str = "ripple") -> PrepResult:
    """Prepare complex coefficients given as magnitude/argument pairs.

    The magnitude pipeline runs unchanged; afterwards the argument oracle
    writes its code into the (clean) data register, a ladder of n phase
    gates rotates each address by 2 pi arg/2^n (half that for the root
    problem, whose amplitudes carry half the argument), and the code is
    unqueried again.
    """
    _require_form(spec, "polar")
    if problem not in ("linear", "root"):
        raise ValueError("polar problem must be 'linear' or 'root'")
    root = problem == "root"
    if root and eps is None:
        raise ValueError("polar root preparation requires eps")
    counter = counter if counter is not None else GateCounter()
    state, layout, schedule, success, fp, arg_oracle = _magnitude_pipeline(
        spec, root, backend, rounds, eps, counter, variant)

    weight = (math.pi if root else TWO_PI) / (1 << spec.n)
    d_off = layout.offset("data")
    apply_oracle(state, arg_oracle, counter)
    for j in range(spec.n):
        apply_gate(state, phase_gate(weight * (1 << j)), d_off + j)
    counter.phase_rotations += spec.n
    apply_oracle(state, arg_oracle, counter)

    code = quantize(spec)
    mags = np.array(code.magnitudes(), dtype=float)
    args = np.array(code.arguments(), dtype=float)
    amps = np.sqrt(mags) if root else mags
    target = _padded_target(amps * np.exp(1j * weight * args), layout)
    fid = fidelity(state, target, "out")
    floor = 1.0 - 2.0 * eps - 1e-9 if root else 1.0 - 1e-9
    if fid < floor:
        raise NumericContractError(
            f"polar {problem} fidelity {fid!r} below contract")
    label = f"polar-{problem}"
    return PrepResult(label, state, schedule.rounds, success, fid,
                      counter.snapshot(), qubit_cost(spec, label),
                      schedule, fp)


def prepare_cartesian_linear(spec: AmplitudeSpec,
                             backend: str = "functional", rounds=None,
                             counter: GateCounter | None = None,
                             variant: str = "ripple") -> PrepResult:
    """Prepare complex coefficients given as (re, im) pairs, linear
    problem. Signs ride a Z gate on the sign bit, the i on the imaginary
    part rides the selector's S gate; both oracles are unqueried inside
    the preparation unitary, so postselecting flag=ref=sel=0 after
    amplification leaves the finished state directly."""
    _require_form(spec, "cartesian")
    counter = counter if counter is not None else GateCounter()
    layout = make_layout(spec, "cartesian-linear", backend)
    prep = _cartesian_linear_map(spec, layout, backend, counter, variant)
    schedule = schedule_rounds(spec, "cartesian-linear")
    k = _resolve_rounds(schedule, rounds)
    good = BasisPredicate.zero("flag", "ref", "sel")

    state = init_state(layout)
    prep.apply(state, counter)
    amplitude_amplification(state, prep, good, k, counter)
    success = state.probability(good)
    state, _ = postselect(state, good)

    target = _padded_target(quantize(spec).complex_values(), layout)
    fid = fidelity(state, target, "out")
    if fid < 1.0 - 1e-9:
        raise NumericContractError(
            f"cartesian linear fidelity {fid!r} below its exactness "
            "contract")
    return PrepResult("cartesian-linear", state, k, success, fid,
                      counter.snapshot(),
                      qubit_cost(spec, "cartesian-linear"),
                      schedule.with_rounds(k))


def prepare_cartesian_root(spec: AmplitudeSpec,
                           backend: str = "functional", rounds=None,
                           counter: GateCounter | None = None
                           ) -> PrepResult:
    """Prepare amplitudes proportional to principal square roots of
    complex coefficients.

    The comparator is replaced by an exact integer test marking about
    2^n Re sqrt(alpha) reference values on the real branch and
    2^n |Im sqrt(alpha)| on the imaginary branch, so the address
    amplitudes approach sqrt(alpha) as n grows; fidelity against the
    principal-root target is reported (it converges like 2^-n, there is
    no exact contract to enforce at finite n). The reference register is
    Hadamard-unprepared, which keeps the uncompute exact."""
    _require_form(spec, "cartesian")
    counter = counter if counter is not None else GateCounter()
    layout = make_layout(spec, "cartesian-root", backend)
    prep = _cartesian_root_map(spec, layout, counter)
    schedule = schedule_rounds(spec, "cartesian-root")
    k = _resolve_rounds(schedule, rounds)
    good = BasisPredicate.zero("flag", "ref", "sel")

    state = init_state(layout)
    prep.apply(state, counter)
    amplitude_amplification(state, prep, good, k, counter)
    success = state.probability(good)
    state, _ = postselect(state, good)

    code = quantize(spec)
    z = code.complex_values() / float(1 << spec.n)
    target = _padded_target(
        np.array([cmath.sqrt(v) for v in z], dtype=complex), layout)
    fid = fidelity(state, target, "out")
    return PrepResult("cartesian-root", state, k, success, fid,
                      counter.snapshot(),
                      qubit_cost(spec, "cartesian-root"),
                      schedule.with_rounds(k))
