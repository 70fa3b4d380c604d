"""Command-line front end.

Thin by construction: argument parsing and file IO live here, every
computation goes through the same handler functions the HTTP service
exposes. Exit codes: 0 success, 2 usage or malformed input, 3 degenerate
spec, 4 numeric contract violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

from .circuits import COUNTER_MODES
from .service import (
    SWEEP_DEFAULT_BITS,
    run_prepare,
    run_sweep,
    run_table,
    spec_from_payload,
)
from .simulator import DegenerateSpecError, NumericContractError
from .stateprep import PROBLEMS

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DEGENERATE = 3
EXIT_CONTRACT = 4


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation, fully resolved."""

    problem: str = "linear"
    bits: int | None = None
    backend: str = "functional"
    rounds: str | int = "auto"
    eps: float | None = None
    seed: int = 0
    input: str | None = None
    output: str | None = None
    counting: str = "paper-accounting"


def _load_payload(path: str) -> dict:
    # parse_float=Fraction hands every decimal literal over exactly, so
    # quantization works on what the file says, not on float(literal)
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh, parse_float=Fraction)
    if not isinstance(payload, dict):
        raise ValueError("input file must hold a JSON object")
    return payload


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _wants_json(output: str | None) -> bool:
    return bool(output) and output.endswith(".json")


def cmd_prepare(config: RunConfig) -> int:
    """Run one pipeline on the spec in --input, write the result record."""
    if not config.input:
        raise ValueError("prepare needs --input FILE")
    payload = _load_payload(config.input)
    if config.bits is not None:
        payload["n"] = config.bits
    spec = spec_from_payload(payload)
    record = run_prepare(config.problem, spec, backend=config.backend,
                         rounds=config.rounds, eps=config.eps,
                         counting=config.counting)
    _emit(json.dumps(record, indent=2, sort_keys=True) + "\n", config.output)
    return EXIT_OK


def cmd_table(config: RunConfig) -> int:
    """Write the comparator-vs-arcsine improvement table."""
    result = run_table()
    if _wants_json(config.output):
        text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    else:
        lines = ["n,arcsine_toffoli,improvement_factor"]
        lines += [f"{n},{arcsine},{factor}"
                  for n, arcsine, factor in result["rows"]]
        text = "\n".join(lines) + "\n"
    _emit(text, config.output)
    return EXIT_OK


def cmd_sweep(config: RunConfig) -> int:
    """Write infidelity-vs-n rows for a fixed coefficient list."""
    payload = _load_payload(config.input) if config.input else None
    bits = SWEEP_DEFAULT_BITS if config.bits is None else config.bits
    result = run_sweep(config.problem, bits=bits, backend=config.backend,
                       eps=config.eps, seed=config.seed, payload=payload)
    if _wants_json(config.output):
        text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    else:
        lines = ["n,infidelity"]
        lines += [f"{n},{infid:.12g}" for n, infid in result["rows"]]
        text = "\n".join(lines) + "\n"
    _emit(text, config.output)
    return EXIT_OK


def cmd_serve(host: str, port: int) -> int:
    import uvicorn

    from .service import app
    uvicorn.run(app, host=host, port=port)
    return EXIT_OK


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--problem", default="linear", choices=PROBLEMS,
                     help="which pipeline to run")
    sub.add_argument("--bits", type=int, default=None, metavar="N",
                     help="fixed-point bits n (prepare: overrides the input "
                          "file; sweep: top of the n range)")
    sub.add_argument("--backend", default="functional",
                     choices=("functional", "circuit"),
                     help="statevector backend")
    sub.add_argument("--rounds", default="auto", metavar="K",
                     help="amplification rounds: auto or an integer >= 0")
    sub.add_argument("--eps", type=float, default=None,
                     help="accuracy target for the pipelines that invert "
                          "unif' (root, polar-root)")
    sub.add_argument("--seed", type=int, default=0,
                     help="seed for generated sweep specs")
    sub.add_argument("--input", default=None, metavar="FILE",
                     help="amplitude spec JSON "
                          '{"d", "n", "form", "values"}')
    sub.add_argument("--output", default=None, metavar="FILE",
                     help="write here instead of stdout "
                          "(.json switches table/sweep to JSON)")
    sub.add_argument("--counting", default="paper-accounting",
                     choices=COUNTER_MODES, help="Toffoli accounting mode")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bbprep",
        description="Black-box state preparation by inequality testing.")
    subs = parser.add_subparsers(dest="command", required=True)

    for name, text in (("prepare", "run one preparation pipeline"),
                       ("table", "comparator-vs-arcsine improvement table"),
                       ("sweep", "infidelity vs bit width")):
        _add_common(subs.add_parser(name, help=text))

    serve = subs.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _config_from(args: argparse.Namespace) -> RunConfig:
    return RunConfig(problem=args.problem, bits=args.bits,
                     backend=args.backend, rounds=args.rounds, eps=args.eps,
                     seed=args.seed, input=args.input, output=args.output,
                     counting=args.counting)


COMMANDS = {"prepare": cmd_prepare, "table": cmd_table, "sweep": cmd_sweep}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return cmd_serve(args.host, args.port)
    try:
        return COMMANDS[args.command](_config_from(args))
    except DegenerateSpecError as exc:
        print(f"degenerate-spec: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except NumericContractError as exc:
        print(f"numeric-contract: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
