"""Black-box coefficient oracles and fixed-point quantization.

Every oracle XOR-writes an n-bit code conditioned on the address register,
so each is its own inverse; pipelines uncompute by querying again.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .circuits import GateCounter
from .resources import ARCSINE_TOFFOLI
from .simulator import (
    DegenerateSpecError,
    PermutationOracle,
    StateVector,
    apply_gate,
    apply_permutation_oracle,
    rotation_gate,
)

FORMS = ("real", "polar", "cartesian")
MAX_BITS = 16

TWO_PI = 2.0 * math.pi


def _exact_floor_scaled(value, n: int) -> int:
    """floor(2^n * value) in exact integer arithmetic.

    Fractions pass through exactly; floats are converted to their exact
    binary value first, so no double rounding sneaks in.
    """
    f = value if isinstance(value, Fraction) else Fraction(value)
    return (f.numerator << n) // f.denominator


def _quantize_angle(arg, n: int) -> int:
    # floor(2^n * arg / 2pi); 2pi is irrational so this one is float math.
    # Clamp guards against roundup when arg sits just under 2pi.
    code = math.floor(float(arg) / TWO_PI * (1 << n))
    return min(max(code, 0), (1 << n) - 1)


@dataclass(frozen=True)
class AmplitudeSpec:
    """Black-box coefficient list to prepare.

    form "real": values are decimals in [0, 1).
    form "polar": values are (magnitude, argument) pairs, magnitude in
    [0, 1), argument in [0, 2pi).
    form "cartesian": values are (re, im) pairs with |re| < 1, |im| < 1.
    """

    d: int
    n: int
    form: str
    values: tuple

    def __post_init__(self):
        if self.d < 1:
            raise DegenerateSpecError(f"d must be >= 1, got {self.d}")
        if not 1 <= self.n <= MAX_BITS:
            raise DegenerateSpecError(
                f"n must be in [1, {MAX_BITS}], got {self.n}")
        if self.form not in FORMS:
            raise DegenerateSpecError(f"form must be one of {FORMS}")
        if len(self.values) != self.d:
            raise DegenerateSpecError(
                f"expected {self.d} values, got {len(self.values)}")
        self._validate_ranges()
        code = quantize(self)
        if not code.any_nonzero():
            raise DegenerateSpecError(
                "all coefficients quantize to zero at this n")

    def _validate_ranges(self):
        if self.form == "real":
            for v in self.values:
                if not 0 <= float(v) < 1:
                    raise DegenerateSpecError(
                        f"real coefficient {v!r} outside [0, 1)")
        elif self.form == "polar":
            for pair in self.values:
                mag, arg = pair
                if not 0 <= float(mag) < 1:
                    raise DegenerateSpecError(
                        f"magnitude {mag!r} outside [0, 1)")
                if not 0 <= float(arg) < TWO_PI:
                    raise DegenerateSpecError(
                        f"argument {arg!r} outside [0, 2pi)")
        else:
            for pair in self.values:
                re, im = pair
                if not (abs(float(re)) < 1 and abs(float(im)) < 1):
                    raise DegenerateSpecError(
                        f"cartesian entry {pair!r} outside the unit box")

    @property
    def hadamard_width(self) -> int:
        """Qubits the address Hadamard layer acts on: ceil(log2 d)."""
        return (self.d - 1).bit_length()

    @property
    def out_width(self) -> int:
        # a physical register needs at least one qubit even when d = 1
        return max(1, self.hadamard_width)

    @property
    def padded_dim(self) -> int:
        return 1 << self.hadamard_width


@dataclass(frozen=True)
class FixedPointCode:
    """Quantized coefficient table.

    codes[l] depends on form:
      real      -> int, floor(2^n alpha)
      polar     -> (mag_code, arg_code)
      cartesian -> (re_sign, re_mag, im_sign, im_mag); data width n+1 with
                   the sign in the top bit
    """

    n: int
    form: str
    codes: tuple

    def any_nonzero(self) -> bool:
        if self.form == "real":
            return any(c != 0 for c in self.codes)
        if self.form == "polar":
            return any(m != 0 for m, _ in self.codes)
        return any(ra != 0 or rb != 0 for _, ra, _, rb in self.codes)

    def magnitudes(self) -> tuple[int, ...]:
        """Comparator operand per label (real codes or polar magnitudes)."""
        if self.form == "real":
            return self.codes
        if self.form == "polar":
            return tuple(m for m, _ in self.codes)
        raise ValueError("cartesian codes have two magnitudes per label")

    def arguments(self) -> tuple[int, ...]:
        if self.form != "polar":
            raise ValueError("arguments only exist for polar codes")
        return tuple(a for _, a in self.codes)

    def cartesian(self, label: int) -> tuple[int, int, int, int]:
        if self.form != "cartesian":
            raise ValueError("not a cartesian code")
        return self.codes[label]

    def complex_values(self) -> np.ndarray:
        """Quantized coefficients scaled by 2^n, as complex numbers."""
        if self.form == "real":
            return np.array(self.codes, dtype=complex)
        if self.form == "polar":
            return np.array(
                [m * np.exp(2j * np.pi * a / (1 << self.n))
                 for m, a in self.codes])
        return np.array(
            [((-1) ** sa) * ra + 1j * ((-1) ** sb) * rb
             for sa, ra, sb, rb in self.codes])


def quantize(spec: AmplitudeSpec) -> FixedPointCode:
    n = spec.n
    if spec.form == "real":
        codes = tuple(_exact_floor_scaled(v, n) for v in spec.values)
    elif spec.form == "polar":
        codes = tuple(
            (_exact_floor_scaled(m, n), _quantize_angle(a, n))
            for m, a in spec.values)
    else:
        codes = []
        for re, im in spec.values:
            sa = 1 if float(re) < 0 else 0
            sb = 1 if float(im) < 0 else 0
            codes.append((sa, _exact_floor_scaled(abs(re), n),
                          sb, _exact_floor_scaled(abs(im), n)))
        codes = tuple(codes)
    return FixedPointCode(n=n, form=spec.form, codes=codes)


def _label_table(spec: AmplitudeSpec, layout, per_label) -> np.ndarray:
    """XOR table over address contents; labels >= d write nothing."""
    width = layout.width("out")
    table = np.zeros(1 << width, dtype=np.int64)
    for label in range(spec.d):
        table[label] = per_label(label)
    return table


def make_amp_oracle(spec: AmplitudeSpec, layout) -> PermutationOracle:
    """amp: |l>|z> -> |l>|z XOR alpha_l^(n)> on the data register."""
    if spec.form != "real":
        raise ValueError("amp oracle takes a real-form spec")
    code = quantize(spec)
    table = _label_table(spec, layout, lambda l: code.codes[l])
    return PermutationOracle(reads=("out",), writes=("data",),
                             table=table, name="amp")


def make_polar_oracles(spec: AmplitudeSpec,
                       layout) -> tuple[PermutationOracle, PermutationOracle]:
    """(magnitude oracle, argument oracle), both writing the data register.

    The argument oracle is only ever queried while data is clean (after the
    magnitude pipeline has reset it), so the two can share one register.
    """
    if spec.form != "polar":
        raise ValueError("polar oracles take a polar-form spec")
    code = quantize(spec)
    mags = code.magnitudes()
    args = code.arguments()
    mag = PermutationOracle(
        reads=("out",), writes=("data",),
        table=_label_table(spec, layout, lambda l: mags[l]), name="amp-mag")
    arg = PermutationOracle(
        reads=("out",), writes=("data",),
        table=_label_table(spec, layout, lambda l: args[l]), name="amp-arg")
    return mag, arg


def make_cartesian_oracles(
        spec: AmplitudeSpec,
        layout) -> tuple[PermutationOracle, PermutationOracle]:
    """(real-part oracle, imag-part oracle) for a sign-magnitude data
    register (sign in the top bit).

    Two layout shapes are understood:
      - linear pipeline: registers data/dsign/sel; each oracle fires only on
        its selector branch (XOR mask 0 on the other branch), so one leg
        costs one query.
      - root pipeline: registers adata/asign/bdata/bsign; both parts are
        written unconditionally since the inequality test needs them
        simultaneously.
    """
    if spec.form != "cartesian":
        raise ValueError("cartesian oracles take a cartesian-form spec")
    code = quantize(spec)
    names = layout.names()

    if "adata" in names:
        re_table = _label_table(
            spec, layout,
            lambda l: code.cartesian(l)[1] | (code.cartesian(l)[0] << spec.n))
        im_table = _label_table(
            spec, layout,
            lambda l: code.cartesian(l)[3] | (code.cartesian(l)[2] << spec.n))
        real = PermutationOracle(reads=("out",), writes=("adata", "asign"),
                                 table=re_table, name="amp-re")
        imag = PermutationOracle(reads=("out",), writes=("bdata", "bsign"),
                                 table=im_table, name="amp-im")
        return real, imag

    out_w = layout.width("out")

    def conditional_table(branch: int, part) -> np.ndarray:
        # read key packs (out, sel): out low, sel high
        table = np.zeros(1 << (out_w + 1), dtype=np.int64)
        for label in range(spec.d):
            sa, ra, sb, rb = code.cartesian(label)
            mask = (ra | (sa << spec.n)) if part == "re" else \
                   (rb | (sb << spec.n))
            table[label | (branch << out_w)] = mask
        return table

    real = PermutationOracle(reads=("out", "sel"), writes=("data", "dsign"),
                             table=conditional_table(0, "re"), name="amp-re")
    imag = PermutationOracle(reads=("out", "sel"), writes=("data", "dsign"),
                             table=conditional_table(1, "im"), name="amp-im")
    return real, imag


def apply_oracle(state: StateVector, oracle: PermutationOracle,
                 counter: GateCounter | None = None) -> StateVector:
    """Apply a black-box oracle and tally one query."""
    apply_permutation_oracle(state, oracle)
    if counter is not None:
        counter.oracle_queries += 1
    return state


def rot_baseline_cost(n: int) -> tuple[int, int]:
    """(phase rotations, arcsine Toffoli constant) for one rot application.

    The Toffoli constant models the reversible arcsine evaluation the
    comparator route avoids; it is only known at the published operand
    widths and is zero elsewhere (resource model only).
    """
    return n, ARCSINE_TOFFOLI.get(n, 0)


def apply_rot_baseline(state: StateVector, data_reg: str, flag: str,
                       counter: GateCounter | None = None) -> StateVector:
    """Amplitude transduction by explicit rotation instead of comparison:
    for data content xi, rotate flag to sin(theta)|0> + cos(theta)|1> with
    theta = arcsin(xi / 2^n), computed classically at machine precision.

    Matches the comparator route's flag=0 amplitude xi/2^n exactly (up to
    float eps), so the two pipelines target the same state. Self-inverse,
    like the comparator it replaces.
    """
    layout = state.layout
    n = layout.width(data_reg)
    d_off = layout.offset(data_reg)
    fq = layout.qubit(flag)

    low = 1 << d_off
    mid = 1 << n
    high = state.dim // (low * mid)
    weights = (np.abs(state.amps) ** 2).reshape(high, mid, low).sum(axis=(0, 2))
    populated = np.nonzero(weights > 1e-24)[0]

    for value in populated:
        theta = math.asin(int(value) / mid)
        data_bits = [(d_off + b, (int(value) >> b) & 1) for b in range(n)]
        apply_gate(state, rotation_gate(theta), fq, controls=data_bits)

    if counter is not None:
        rotations, arcsine = rot_baseline_cost(n)
        counter.phase_rotations += rotations
        counter.toffoli += arcsine
    return state


def cartesian_root_marked_counts(
        spec: AmplitudeSpec) -> tuple[tuple[int, ...], tuple[int, ...],
                                      tuple[int, ...]]:
    """Exhaustively count marked x per label: (m0, m1, sigma).

    m0 counts x in [0, 2^n) with 4x^2(x^2 - a~ 2^n) < b~^2 2^(2n) (real
    branch), m1 the same with +a~ (imaginary branch); sigma is the sign of
    the imaginary part, +1 when b = 0 (principal root of a negative real).
    Pure Python integers, so exact at any n.
    """
    code = quantize(spec)
    m0, m1, sigma = [], [], []
    two_n = 1 << spec.n
    for label in range(spec.d):
        sa, ra, sb, rb = code.cartesian(label)
        a_signed = -ra if sa else ra
        rhs = rb * rb << (2 * spec.n)
        c0 = c1 = 0
        for x in range(two_n):
            x2 = x * x
            if 4 * x2 * (x2 - a_signed * two_n) < rhs:
                c0 += 1
            if 4 * x2 * (x2 + a_signed * two_n) < rhs:
                c1 += 1
        m0.append(c0)
        m1.append(c1)
        sigma.append(-1 if (sb and rb != 0) else 1)
    return tuple(m0), tuple(m1), tuple(sigma)


def cartesian_root_inequality_oracle(spec: AmplitudeSpec,
                                     layout) -> PermutationOracle:
    """Flag oracle for the root-coefficient inequality test.

    Toggles flag on NOT(4x^2(x^2 -/+ a~ 2^n) < b~^2 2^(2n)) where x is the
    ref content, a~ the signed real code, b~ the imaginary magnitude, and
    the selector chooses the sign branch (sel=0 real, sel=1 imaginary).
    Exact integer arithmetic (int64; |terms| < 2^63 for n <= 14).
    Functional backend only; no gate-level tally is defined for it.
    """
    if spec.form != "cartesian":
        raise ValueError("inequality oracle takes a cartesian-form spec")
    n = spec.n
    if n > 14:
        raise ValueError("int64 evaluation is exact only up to n = 14")
    two_n = 1 << n

    # read key packs (ref, adata, asign, bdata, sel), ref lowest
    key = np.arange(1 << (3 * n + 2), dtype=np.int64)
    x = key & (two_n - 1)
    ad = (key >> n) & (two_n - 1)
    asign = (key >> (2 * n)) & 1
    bd = (key >> (2 * n + 1)) & (two_n - 1)
    sel = (key >> (3 * n + 1)) & 1

    a_signed = np.where(asign == 1, -ad, ad)
    branch = np.where(sel == 0, a_signed, -a_signed)
    x2 = x * x
    lhs = 4 * x2 * (x2 - branch * two_n)
    rhs = (bd * bd) << (2 * n)
    table = (lhs >= rhs).astype(np.int64)

    return PermutationOracle(
        reads=("ref", "adata", "asign", "bdata", "sel"),
        writes=("flag",), table=table, name="root-inequality")
