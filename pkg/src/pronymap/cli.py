"""Command-line front end.

Examples:
  pronymap generate --signal sig.json --count 4 --output mu.json
  pronymap solve --input mu.json --order 2 --output sol.json
  pronymap classify --input mu.json --order 5
  pronymap collide-study --t 0.5 --start 1e-1 --stop 1e-4 --count 4 --output sweep.csv
  pronymap bounds --signal sig.json --eps 1e-8

Complex numbers are encoded as [re, im] pairs. Exit codes: 0 solvable,
2 unsolvable stratum, 3 degenerate or ill-conditioned, 4 I/O or schema error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .collision import solve_with_collisions
from .errors import (
    ConditioningError,
    DegenerateBasis,
    DegenerateJacobian,
    DegenerateLeadingMinor,
    InputError,
    NoConvergence,
    NotIrreducible,
    PronyError,
    UndefinedSeparation,
    Unsolvable,
)
from .hankel import MINOR_TOL, RANK_TOL, classify
from .signal import Signal, match_nodes, moments
from .solver import error_bounds, invert_multiplicity_restricted, invert_prony, invert_rank_restricted

EXIT_OK, EXIT_UNSOLVABLE, EXIT_DEGENERATE, EXIT_IO = 0, 2, 3, 4

_DEGENERATE = (
    DegenerateLeadingMinor,
    NotIrreducible,
    DegenerateBasis,
    ConditioningError,
    DegenerateJacobian,
    NoConvergence,
    UndefinedSeparation,
)


class SchemaError(InputError):
    """Malformed JSON input."""


# --- encoding -------------------------------------------------------------


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def decode_complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise SchemaError(f"expected [re, im], got {v!r}")
    return complex(float(v[0]), float(v[1]))


def signal_to_json(signal: Signal) -> dict:
    return {
        "support": [
            {"node": encode_complex(x), "amplitudes": [encode_complex(a) for a in amps]}
            for x, amps in signal.support
        ]
    }


def signal_from_json(data) -> Signal:
    try:
        support = [
            (decode_complex(item["node"]), tuple(decode_complex(a) for a in item["amplitudes"]))
            for item in data["support"]
        ]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad signal document: {exc}") from exc
    return Signal(tuple(support))


def moments_to_json(mu) -> list[list[float]]:
    return [encode_complex(m) for m in mu]


def moments_from_json(data) -> np.ndarray:
    try:
        return np.array([decode_complex(m) for m in data["moments"]], dtype=complex)
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad moments document: {exc}") from exc


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return encode_complex(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_json(obj, path: Optional[str]) -> None:
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _error_doc(exc: Exception) -> dict:
    doc = {"error": type(exc).__name__, "message": str(exc)}
    report = getattr(exc, "report", None)
    if report is not None:
        doc["report"] = report.as_dict()
    return doc


# --- commands ------------------------------------------------------------


def _parse_eps(text, count: int) -> np.ndarray:
    if text is None:
        return np.zeros(count)
    if isinstance(text, (int, float)):
        values = [float(text)]
    elif isinstance(text, (list, tuple)):
        values = [float(v) for v in text]
    else:
        values = [float(v) for v in str(text).split(",")]
    if len(values) == 1:
        values = values * count
    if len(values) != count or any(v < 0 for v in values):
        raise InputError("noise needs one non-negative value or one per moment")
    return np.asarray(values)


def disc_noise(eps: np.ndarray, seed: Optional[int]) -> np.ndarray:
    """Uniform samples from the complex discs |z| <= eps_k."""
    rng = np.random.default_rng(seed)
    radius = eps * np.sqrt(rng.random(eps.size))
    return radius * np.exp(2j * np.pi * rng.random(eps.size))


def cmd_generate(args) -> int:
    signal = signal_from_json(read_json(args.signal))
    clean = moments(signal, args.count)
    doc = {"moments": moments_to_json(clean)}
    if args.noise is not None:
        eps = _parse_eps(args.noise, args.count)
        noisy = clean + disc_noise(eps, args.seed)
        doc = {
            "moments": moments_to_json(noisy),
            "clean_moments": moments_to_json(clean),
            "noise": {"seed": args.seed, "eps": [float(e) for e in eps]},
        }
    write_json(doc, args.output)
    return EXIT_OK


def cmd_solve(args) -> int:
    modes = [m for m in ("order", "rank", "multiplicity") if getattr(args, m) is not None]
    if len(modes) != 1:
        raise InputError("give exactly one of --order, --rank, --multiplicity")
    mu = moments_from_json(read_json(args.input))
    try:
        if args.order is not None:
            result = invert_prony(mu, args.order, args.tol, args.minor_tol)
        elif args.rank is not None:
            result = invert_rank_restricted(
                mu, args.rank, args.minor_tol, collisions=args.collisions, cluster_tol=args.cluster_tol
            )
        else:
            D = [int(v) for v in str(args.multiplicity).split(",")]
            if args.initial is None:
                raise InputError("--multiplicity needs --initial")
            initial = signal_from_json(read_json(args.initial))
            result = invert_multiplicity_restricted(mu, D, initial)
    except (Unsolvable, *_DEGENERATE) as exc:
        write_json(_error_doc(exc), args.output)
        return EXIT_UNSOLVABLE if isinstance(exc, Unsolvable) else EXIT_DEGENERATE
    doc = signal_to_json(result.signal)
    doc["diagnostics"] = result.diagnostics()
    write_json(doc, args.output)
    return EXIT_OK


def cmd_classify(args) -> int:
    mu = moments_from_json(read_json(args.input))
    report = classify(mu, args.order, args.tol, args.minor_tol)
    write_json(report.as_dict(), args.output)
    return EXIT_OK if report.solvable else EXIT_UNSOLVABLE


def sweep_grid(start: float, stop: float, count: int, scale: str = "log") -> np.ndarray:
    if count < 2:
        raise InputError("sweep count must be at least 2")
    if scale == "log":
        if start <= 0 or stop <= 0:
            raise InputError("log sweep needs positive endpoints")
        return np.geomspace(start, stop, count)
    return np.linspace(start, stop, count)


STUDY_COLUMNS = [
    "eps",
    "node_error",
    "beta0_error",
    "beta1_error",
    "standard_amp_magnitude",
    "basis_condition",
    "status",
]


def collide_study(t: float, grid, beta=(0.0, 1.0), cluster_tol: float = 1.0, minor_tol: float = MINOR_TOL):
    """Rows of the two-node collision sweep F = b0 delta(x - t) + b1 Delta(t, t + eps).

    Nodes are threaded from one grid point to the next, so beta keeps its
    meaning along the sweep.
    """
    rows, reference = [], None
    for eps in grid:
        truth = [complex(t), complex(t + eps)]
        signal = Signal(((truth[0], (beta[0] - beta[1] / eps,)), (truth[1], (beta[1] / eps,))))
        mu = moments(signal, 4)
        row = {"eps": float(eps)}
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                sol = solve_with_collisions(
                    mu, 2, cluster_tol=cluster_tol, minor_tol=minor_tol, reference=reference or truth
                )
            w = [sol.nodes[i] for i in match_nodes(sol.nodes, truth)]
            reference = list(sol.nodes)
            coeffs = np.zeros(2, complex)
            coeffs[: len(sol.beta)] = sol.beta
            if len(sol.configuration.blocks) != 1:
                coeffs[:] = np.nan
            amps = [abs(a) for _, al in sol.signal.support for a in al]
            row.update(
                node_error=max(abs(a - b) for a, b in zip(w, truth)),
                beta0_error=abs(coeffs[0] - beta[0]),
                beta1_error=abs(coeffs[1] - beta[1]),
                standard_amp_magnitude=max(amps) if amps else 0.0,
                basis_condition=sol.condition,
                status="ok" if len(sol.configuration.blocks) == 1 else "split",
            )
        except PronyError as exc:
            row.update({c: float("nan") for c in STUDY_COLUMNS[1:-1]}, status=type(exc).__name__)
        rows.append(row)
    return rows


def _fmt(v) -> str:
    return v if isinstance(v, str) else format(float(v), ".17g")


def cmd_collide_study(args) -> int:
    grid = sweep_grid(args.start, args.stop, args.count, args.scale)
    rows = collide_study(args.t, grid, (args.beta0, args.beta1), args.cluster_tol, args.minor_tol)
    out = sys.stdout if args.output in (None, "-") else open(args.output, "w", newline="", encoding="utf-8")
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(STUDY_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in STUDY_COLUMNS])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_bounds(args) -> int:
    signal = signal_from_json(read_json(args.signal))
    try:
        report = error_bounds(signal, args.eps)
    except UndefinedSeparation as exc:
        write_json(_error_doc(exc), args.output)
        return EXIT_DEGENERATE
    write_json(report.as_dict(), args.output)
    return EXIT_OK


# --- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pronymap", description="Prony moment inversion with collisions.")
    ap.add_argument("--config", help="JSON file of option defaults; command-line flags win")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="moments of a signal, optionally with disc noise")
    g.add_argument("--signal", required=True)
    g.add_argument("--count", type=int, required=True, help="number of moments K")
    g.add_argument("--noise", help="eps, or comma-separated eps_k per moment")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--output")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="invert moments to a signal")
    s.add_argument("--input", required=True)
    s.add_argument("--order", type=int, help="full problem of order d (2d moments)")
    s.add_argument("--rank", type=int, help="rank-restricted problem (2r moments)")
    s.add_argument("--multiplicity", help="comma-separated multiplicities d_j (s+r moments)")
    s.add_argument("--initial", help="signal JSON used as Newton starting point")
    s.add_argument("--tol", type=float, default=RANK_TOL)
    s.add_argument("--minor-tol", type=float, default=MINOR_TOL)
    s.add_argument("--collisions", action="store_true", help="use the divided-difference basis (--rank)")
    s.add_argument("--cluster-tol", type=float)
    s.add_argument("--output")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("classify", help="rank and solvability stratum")
    c.add_argument("--input", required=True)
    c.add_argument("--order", type=int, required=True)
    c.add_argument("--tol", type=float, default=RANK_TOL)
    c.add_argument("--minor-tol", type=float, default=MINOR_TOL)
    c.add_argument("--output")
    c.set_defaults(func=cmd_classify)

    k = sub.add_parser("collide-study", help="sweep a two-node collision, CSV out")
    k.add_argument("--t", type=float, default=0.5)
    k.add_argument("--beta0", type=float, default=0.0)
    k.add_argument("--beta1", type=float, default=1.0)
    k.add_argument("--start", type=float, default=1e-1)
    k.add_argument("--stop", type=float, default=1e-4)
    k.add_argument("--count", type=int, default=4)
    k.add_argument("--scale", choices=("log", "linear"), default="log")
    k.add_argument("--cluster-tol", type=float, default=1.0)
    k.add_argument("--minor-tol", type=float, default=MINOR_TOL)
    k.add_argument("--output")
    k.set_defaults(func=cmd_collide_study)

    b = sub.add_parser("bounds", help="first-order error bounds for a signal")
    b.add_argument("--signal", required=True)
    b.add_argument("--eps", type=float, required=True)
    b.add_argument("--output")
    b.set_defaults(func=cmd_bounds)
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    config = read_json(known.config)
    if not isinstance(config, dict):
        raise SchemaError("config file must hold a JSON object")
    config = {k.replace("-", "_"): v for k, v in config.items() if k != "command"}
    for action in ap._subparsers._group_actions:
        for sp in action.choices.values():
            dests = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in config.items() if k in dests})
            # values from the config satisfy required flags
            for a in sp._actions:
                if a.dest in config:
                    a.required = False


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        _apply_config(ap, argv)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Unsolvable as exc:
        print(f"unsolvable: {exc}", file=sys.stderr)
        return EXIT_UNSOLVABLE
    except _DEGENERATE as exc:
        print(f"degenerate: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
