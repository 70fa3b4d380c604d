"""HTTP facade over the preparation drivers.

The JSON API mirrors the command-line tool one to one: the CLI calls the
handler functions below in-process, so both front ends share a single
implementation and cannot drift apart. Routes:

    POST /prepare   run one pipeline, return the result record
    POST /sweep     infidelity against the unquantized target as n grows
    GET  /table     comparator-vs-arcsine improvement rows
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from typing import Literal, Optional, Union

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from .circuits import COUNTER_MODES, GateCounter
from .oracles import AmplitudeSpec
from .resources import improvement_table
from .simulator import DegenerateSpecError, NumericContractError, fidelity
from .stateprep import (
    PROBLEMS,
    PrepResult,
    prepare_cartesian_linear,
    prepare_cartesian_root,
    prepare_linear,
    prepare_polar,
    prepare_root,
)

# pipelines that invert unif' and therefore need an accuracy target
EPS_PROBLEMS = ("root", "polar-root")

PROBLEM_FORM = {
    "linear": "real",
    "root": "real",
    "polar-linear": "polar",
    "polar-root": "polar",
    "cartesian-linear": "cartesian",
    "cartesian-root": "cartesian",
}

SWEEP_MIN_BITS = 3
SWEEP_DEFAULT_BITS = 10
SWEEP_DIM = 4


def _sig12(x: float) -> float:
    """Round to 12 significant digits so every front end emits the same
    number for the same run."""
    return float(f"{float(x):.12g}")


def _exact(value) -> Fraction:
    """Read one coefficient exactly.

    Strings and the Fractions produced by ``json.load(parse_float=...)``
    pass through verbatim; a bare float goes through its shortest decimal
    repr, which recovers the literal the caller wrote in every ordinary
    case.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError(f"coefficient {value!r} is not a number")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"coefficient {value!r} is not finite")
        return Fraction(str(value))
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot read coefficient {value!r}") from exc
    raise ValueError(f"cannot read coefficient {value!r}")


def spec_from_payload(payload: dict) -> AmplitudeSpec:
    """Build an AmplitudeSpec from the wire schema
    {"d": int, "n": int, "form": ..., "values": [...]}.

    real form: values is a flat list of decimals; polar and cartesian
    forms: a list of two-element pairs. Scalars are parsed exactly, so
    quantization sees the decimal the user wrote rather than a binary
    approximation of it.
    """
    if not isinstance(payload, dict):
        raise ValueError("spec payload must be a JSON object")
    try:
        d = int(payload["d"])
        n = int(payload["n"])
        form = payload["form"]
        raw = payload["values"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad spec payload: {exc}") from exc
    if not isinstance(raw, (list, tuple)):
        raise ValueError("values must be a list")
    if form == "real":
        values = tuple(_exact(v) for v in raw)
    elif form in ("polar", "cartesian"):
        pairs = []
        for entry in raw:
            if not isinstance(entry, (list, tuple)) or len(entry) != 2:
                raise ValueError(
                    f"form {form!r} needs two-element pairs, got {entry!r}")
            pairs.append((_exact(entry[0]), _exact(entry[1])))
        values = tuple(pairs)
    else:
        values = tuple(raw)  # AmplitudeSpec rejects the form itself
    return AmplitudeSpec(d=d, n=n, form=form, values=values)


def _run_driver(problem: str, spec: AmplitudeSpec, backend: str,
                rounds, eps, counter: GateCounter) -> PrepResult:
    if problem == "linear":
        return prepare_linear(spec, backend=backend, rounds=rounds,
                              counter=counter)
    if problem == "root":
        return prepare_root(spec, backend=backend, rounds=rounds, eps=eps,
                            counter=counter)
    if problem in ("polar-linear", "polar-root"):
        return prepare_polar(spec, problem=problem.split("-", 1)[1],
                             backend=backend, rounds=rounds, eps=eps,
                             counter=counter)
    if problem == "cartesian-linear":
        return prepare_cartesian_linear(spec, backend=backend, rounds=rounds,
                                        counter=counter)
    return prepare_cartesian_root(spec, backend=backend, rounds=rounds,
                                  counter=counter)


def run_prepare(problem: str, spec: AmplitudeSpec,
                backend: str = "functional", rounds="auto",
                eps: float | None = None,
                counting: str = "paper-accounting") -> dict:
    """Run one pipeline and distill the result record.

    rounds is "auto" (round count from the schedule) or an explicit
    non-negative integer; eps is mandatory exactly for the problems that
    invert unif'.
    """
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}")
    if spec.form != PROBLEM_FORM[problem]:
        raise DegenerateSpecError(
            f"problem {problem!r} needs form {PROBLEM_FORM[problem]!r}, "
            f"got {spec.form!r}")
    if problem in EPS_PROBLEMS and eps is None:
        raise ValueError(f"eps is required for problem {problem!r}")
    if rounds in (None, "auto"):
        k = None
    else:
        k = int(rounds)
        if k < 0:
            raise ValueError("rounds must be >= 0")
    counter = GateCounter(mode=counting)
    result = _run_driver(problem, spec, backend, k, eps, counter)
    return {
        "problem": result.problem,
        "n": spec.n,
        "d": spec.d,
        "rounds": result.rounds,
        "success_probability": _sig12(result.success_probability),
        "fidelity": _sig12(result.fidelity),
        "counts": dict(result.counts),
        "qubits": result.qubits,
    }


def _ideal_target(spec: AmplitudeSpec, problem: str) -> np.ndarray:
    """Normalized target from the raw coefficients, before quantization."""
    if spec.form == "real":
        base = np.array([float(v) for v in spec.values], dtype=complex)
        amps = np.sqrt(base) if problem == "root" else base
    elif spec.form == "polar":
        mags = np.array([float(m) for m, _ in spec.values])
        args = np.array([float(a) for _, a in spec.values])
        if problem.endswith("root"):
            amps = np.sqrt(mags) * np.exp(0.5j * args)
        else:
            amps = mags * np.exp(1j * args)
    else:
        vals = [complex(float(a), float(b)) for a, b in spec.values]
        if problem.endswith("root"):
            amps = np.array([cmath.sqrt(v) for v in vals])
        else:
            amps = np.array(vals)
    target = np.zeros(1 << spec.out_width, dtype=complex)
    target[:spec.d] = amps
    return target / np.linalg.norm(target)


def _random_values(form: str, d: int, seed: int) -> tuple:
    rng = np.random.default_rng(seed)
    if form == "real":
        return tuple(float(v) for v in rng.uniform(0.1, 0.9, size=d))
    if form == "polar":
        mags = rng.uniform(0.1, 0.9, size=d)
        args = rng.uniform(0.0, 2.0 * math.pi, size=d)
        return tuple((float(m), float(a)) for m, a in zip(mags, args))
    parts = rng.uniform(-0.9, 0.9, size=(d, 2))
    return tuple((float(a), float(b)) for a, b in parts)


def run_sweep(problem: str = "linear", bits: int = SWEEP_DEFAULT_BITS,
              backend: str = "functional", eps: float | None = None,
              seed: int = 0, payload: dict | None = None
              ) -> dict:
    """Requantize one coefficient list at n = 3..bits and report the
    infidelity against the ideal (unquantized) target per width.

    With no payload a d=4 spec of the problem's form is drawn from the
    seed, so a fixed seed gives a byte-identical sweep.
    """
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}")
    if problem in EPS_PROBLEMS and eps is None:
        raise ValueError(f"eps is required for problem {problem!r}")
    if bits < SWEEP_MIN_BITS:
        raise ValueError(f"sweep needs bits >= {SWEEP_MIN_BITS}")
    form = PROBLEM_FORM[problem]
    if payload is not None:
        base = spec_from_payload({**payload, "n": max(bits, SWEEP_MIN_BITS)})
        if base.form != form:
            raise DegenerateSpecError(
                f"problem {problem!r} needs form {form!r}, got {base.form!r}")
        d, values = base.d, base.values
    else:
        d, values = SWEEP_DIM, _random_values(form, SWEEP_DIM, seed)
    rows = []
    for n in range(SWEEP_MIN_BITS, bits + 1):
        spec = AmplitudeSpec(d=d, n=n, form=form, values=values)
        result = _run_driver(problem, spec, backend, None, eps, GateCounter())
        overlap = fidelity(result.state, _ideal_target(spec, problem))
        rows.append((n, _sig12(max(0.0, 1.0 - overlap))))
    return {"problem": problem, "d": d, "form": form, "seed": seed,
            "rows": rows}


def run_table() -> dict:
    """Comparator-vs-arcsine rows (n, arcsine_toffolis, factor)."""
    return {"rows": [list(row) for row in improvement_table()]}


# ---------------------------------------------------------------------------
# wire models


class SpecPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    d: int
    n: int
    form: Literal["real", "polar", "cartesian"]
    values: list[Union[float, str, list[Union[float, str]]]]

    def to_spec(self) -> AmplitudeSpec:
        return spec_from_payload(self.model_dump())


class PrepareRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    problem: Literal[PROBLEMS] = "linear"
    backend: Literal["functional", "circuit"] = "functional"
    rounds: Union[Literal["auto"], int] = "auto"
    eps: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    counting: Literal[COUNTER_MODES] = "paper-accounting"
    spec: SpecPayload


class CountsModel(BaseModel):
    toffoli: int
    oracle_queries: int
    controlled_hadamard: int
    phase_rotations: int
    reflections: int


class PrepareResponse(BaseModel):
    problem: str
    n: int
    d: int
    rounds: int
    success_probability: float
    fidelity: float
    counts: CountsModel
    qubits: int


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    problem: Literal[PROBLEMS] = "linear"
    bits: int = Field(default=SWEEP_DEFAULT_BITS, ge=SWEEP_MIN_BITS)
    backend: Literal["functional", "circuit"] = "functional"
    eps: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    seed: int = 0
    spec: Optional[SpecPayload] = None


class SweepResponse(BaseModel):
    problem: str
    d: int
    form: str
    seed: int
    rows: list[tuple[int, float]]


class TableResponse(BaseModel):
    rows: list[tuple[int, int, int]]


def create_app() -> FastAPI:
    app = FastAPI(title="bbprep",
                  description="Black-box state preparation by inequality "
                              "testing: drivers, sweeps and cost tables.")

    @app.exception_handler(DegenerateSpecError)
    async def _degenerate(request, exc):
        return JSONResponse(status_code=422,
                            content={"error": "degenerate-spec",
                                     "detail": str(exc)})

    @app.exception_handler(NumericContractError)
    async def _contract(request, exc):
        return JSONResponse(status_code=500,
                            content={"error": "numeric-contract",
                                     "detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _usage(request, exc):
        return JSONResponse(status_code=400,
                            content={"error": "bad-request",
                                     "detail": str(exc)})

    @app.post("/prepare", response_model=PrepareResponse)
    def prepare(req: PrepareRequest) -> dict:
        return run_prepare(req.problem, req.spec.to_spec(),
                           backend=req.backend, rounds=req.rounds,
                           eps=req.eps, counting=req.counting)

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest) -> dict:
        payload = None if req.spec is None else req.spec.model_dump()
        return run_sweep(req.problem, bits=req.bits, backend=req.backend,
                         eps=req.eps, seed=req.seed, payload=payload)

    @app.get("/table", response_model=TableResponse)
    def table() -> dict:
        return run_table()

    return app


app = create_app()
