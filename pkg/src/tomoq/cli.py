"""Batch command-line front end.

Exit codes: 0 success / inequality holds, 2 inequality violated, 1 usage or
data error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from importlib import metadata
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import inequalities as ineq
from .probcore import ProbVector, ProbabilityError, renyi_entropy, shannon_entropy, tsallis_entropy
from .quantum import (
    DensityMatrix,
    StateError,
    UnitaryMatrix,
    bell_state,
    ghz_state,
    haar_sample,
    maximally_mixed,
    random_density,
    tomogram,
)
from .report import CheckReport
from .reshape import CubeView, GridView, strong_subadditivity_check, subadditivity_check
from .sweep import (
    CATALOG,
    ConfigError,
    cube_shape,
    grid_shape,
    parse_config,
    run_sweep,
    summarize,
    tolerance_for,
)

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def tool_version() -> str:
    try:
        return metadata.version("tomoq")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(t) for t in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must be integers, got {text!r}")
    if not dims or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError(f"dims must be positive, got {text!r}")
    return dims


def _read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ProbabilityError(f"{path} is not valid JSON: {exc}") from exc


def _load_state(path: str) -> DensityMatrix:
    data = _read_json(path)
    if not isinstance(data, dict) or "re" not in data:
        raise StateError(f"{path} is not a density-matrix file")
    return DensityMatrix.from_dict(data)


def resolve_unitary(source: str, rho: DensityMatrix) -> tuple[UnitaryMatrix, dict]:
    """``identity``, ``haar:SEED`` or ``local-min`` to a unitary plus witness."""
    if source == "identity":
        return UnitaryMatrix.identity(rho.dim), {"unitary": "identity"}
    if source.startswith("haar:"):
        try:
            seed = int(source[5:])
        except ValueError:
            raise UsageError(f"bad unitary source {source!r}; expected haar:<integer seed>")
        return haar_sample(rho.dim, seed), {"unitary": source, "seed": seed}
    if source == "local-min":
        return ineq.local_eigenbasis(rho), {"unitary": "local-min"}
    raise UsageError(f"unknown unitary source {source!r}; use identity, haar:SEED or local-min")


def _shape(text: str | None) -> tuple[int, ...] | None:
    return None if text is None else _dims(text)


def _classical_report(data: Any, name: str, shape: tuple[int, ...] | None, tol: float) -> CheckReport:
    if isinstance(data, dict) and "entries" in data:
        arr = np.asarray(data["entries"], dtype=float)
        if list(arr.shape) != list(data.get("shape", arr.shape)):
            raise ProbabilityError(f"declared shape {data['shape']} does not match entries {arr.shape}")
        if name == "grid-M1":
            return subadditivity_check(GridView(arr), tol)
        return strong_subadditivity_check(CubeView(arr), tol)
    if isinstance(data, list):
        p = ProbVector(data)
        if name == "grid-M1":
            shape = shape or grid_shape((p.dim,))
            return subadditivity_check(GridView.from_vector(p, shape), tol)
        shape = shape or cube_shape((p.dim,))
        return strong_subadditivity_check(CubeView.from_vector(p, shape), tol)
    raise ProbabilityError("expected a flat probability array or an object with 'shape' and 'entries'")


def build_report(args) -> CheckReport:
    name = args.inequality
    if name not in CATALOG:
        raise UsageError(f"unknown inequality id {name!r}")
    tol = tolerance_for(name, args.tol)
    data = _read_json(args.state)
    if name in ("grid-M1", "cube-M18") and not (isinstance(data, dict) and "re" in data):
        return _classical_report(data, name, _shape(args.shape), tol).with_witness(source=args.state)

    if not (isinstance(data, dict) and "re" in data):
        raise StateError(f"{args.state} is not a density-matrix file")
    rho = DensityMatrix.from_dict(data)
    u, uw = resolve_unitary(args.u, rho)
    q = args.q
    if name == "subadd-23":
        rep = ineq.subadditivity_on_group(rho, u, tol).with_witness(**uw)
    elif name == "ssa-31":
        rep = ineq.strong_subadditivity_on_group(rho, u, tol).with_witness(**uw)
    elif name == "sandwich-E":
        rep = ineq.sandwich_check(rho, tol)
    elif name == "discord-G":
        rep = ineq.discord_like_D(rho, gauge_samples=args.gauge_samples, seed=args.seed, tol=tol)
    elif name == "vn-27":
        rep = ineq.von_neumann_counterparts(rho, tol)[0]
    elif name == "vn-36":
        rep = ineq.vn_strong_subadditivity(rho, tol)
    elif name == "chain-A2":
        rep = ineq.tsallis_chain_rule(rho, u, 2.0 if q is None else q, tol).with_witness(**uw)
    elif name in ("tsallis-joint", "tsallis-cond", "tsallis-A5", "tsallis-A6"):
        reports = ineq.tsallis_inequalities(rho, u, 2.0 if q is None else q, tol)
        rep = next(r for r in reports if r.inequality_id == name)
        if name in ("tsallis-joint", "tsallis-cond"):
            rep = rep.with_witness(**uw)
    elif name == "group-min":
        kind = "shannon" if q is None else args.kind
        rep = ineq.group_minimum_check(rho, u, kind, q, tol).with_witness(**uw)
    else:
        probs = tomogram(rho, u).probs
        shape = _shape(args.shape)
        if name == "grid-M1":
            rep = subadditivity_check(GridView.from_vector(probs, shape or grid_shape(rho.dims)), tol)
        else:
            rep = strong_subadditivity_check(CubeView.from_vector(probs, shape or cube_shape(rho.dims)), tol)
        rep = rep.with_witness(**uw)
    return rep.with_witness(state=args.state)


def cmd_check(args) -> int:
    rep = build_report(args)
    print(json.dumps(rep.to_dict(), sort_keys=True))
    return EXIT_OK if rep.passed else EXIT_VIOLATION


def cmd_gen_state(args) -> int:
    if args.preset == "bell":
        rho = bell_state()
    elif args.preset == "ghz":
        rho = ghz_state(len(args.dims) if args.dims else 3)
    elif args.preset == "mixed":
        rho = maximally_mixed(args.dims or (2, 2))
    else:
        if not args.dims:
            raise UsageError("--dims is required unless --preset is given")
        try:
            rho = random_density(args.dims, args.rank, args.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    text = rho.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_tomogram(args) -> int:
    rho = _load_state(args.state)
    u, uw = resolve_unitary(args.u, rho)
    t = tomogram(rho, u)
    payload = {"dims": list(t.dims), "labels": [list(l) for l in t.labels], "probs": t.probs.components.tolist(),
               "witness": uw}
    text = json.dumps(payload)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_entropy(args) -> int:
    data = _read_json(args.path)
    if isinstance(data, dict) and "re" in data:
        rho = DensityMatrix.from_dict(data)
        u, uw = resolve_unitary(args.u, rho)
        p = tomogram(rho, u).probs
        source = {"state": args.path, **uw}
    elif isinstance(data, list):
        p = ProbVector(data)
        source = {"probs": args.path}
    else:
        raise ProbabilityError(f"{args.path} is neither a state file nor a probability array")
    q = 2.0 if args.q is None else args.q
    out = {
        "shannon": shannon_entropy(p),
        "renyi": renyi_entropy(p, q),
        "tsallis": tsallis_entropy(p, q),
        "q": q,
        "source": source,
    }
    print(json.dumps(out))
    return EXIT_OK


def format_summary(rows) -> str:
    header = ("inequality_id", "samples", "failures", "min_margin", "conjectural_failures")
    body = [(r.inequality_id, str(r.samples), str(r.failures), f"{r.min_margin:.3e}", str(r.conjectural_failures))
            for r in rows]
    widths = [max(len(x) for x in col) for col in zip(header, *body)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip() for line in [header, *body]]
    return "\n".join(lines)


def cmd_sweep(args) -> int:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {args.config}: {exc.strerror}") from exc
    config = parse_config(text)
    if args.seed is not None or args.tol is not None:
        kw = config.to_dict()
        kw["inequalities"] = list(config.inequalities)
        if args.seed is not None:
            kw["master_seed"] = args.seed
        if args.tol is not None:
            kw["tolerance"] = args.tol
        config = type(config)(**kw)
    reports = run_sweep(config)
    rows = summarize(reports)
    manifest = {
        "command": "sweep",
        "config": config.to_dict(),
        "tool_version": tool_version(),
        "master_seed": config.master_seed,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "summary": [r.to_dict() for r in rows],
        "results": [r.to_dict() for r in reports],
    }
    out = Path(args.out)
    out.write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    print(format_summary(rows))
    return EXIT_OK if all(r.failures == 0 for r in rows) else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tomoq", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"tomoq {tool_version()}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-state", help="write a random (or preset) density matrix")
    p.add_argument("--dims", type=_dims, help="factor dimensions, e.g. 2,2")
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--preset", choices=("bell", "ghz", "mixed"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_state)

    p = sub.add_parser("check", help="evaluate one inequality; prints a JSON report")
    p.add_argument("state", help="density-matrix file (or probability file for grid-M1/cube-M18)")
    p.add_argument("inequality", help="catalog id: " + ", ".join(CATALOG))
    p.add_argument("--u", default="identity", help="identity | haar:SEED | local-min")
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--kind", choices=("renyi", "tsallis"), default="renyi", help="entropy for group-min when --q is set")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--shape", help="grid/cube shape for grid-M1 and cube-M18")
    p.add_argument("--gauge-samples", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sweep", help="run a seeded sweep from a key/value config file")
    p.add_argument("config")
    p.add_argument("--out", default="manifest.json")
    p.add_argument("--seed", type=int, default=None, help="override master_seed")
    p.add_argument("--tol", type=float, default=None, help="override tolerance")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tomogram", help="dump the tomogram of a state")
    p.add_argument("state")
    p.add_argument("--u", default="identity")
    p.add_argument("--out")
    p.set_defaults(func=cmd_tomogram)

    p = sub.add_parser("entropy", help="Shannon/Renyi/Tsallis entropies of a probability vector or state tomogram")
    p.add_argument("path")
    p.add_argument("--u", default="identity")
    p.add_argument("--q", type=float, default=None)
    p.set_defaults(func=cmd_entropy)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = None
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        msg = str(exc)
        print(f"tomoq: error: {msg}", file=sys.stderr)
        if "inequality id" in msg:
            print("catalog: " + ", ".join(CATALOG), file=sys.stderr)
        if getattr(args, "command", None) == "check":
            print(json.dumps({"error": msg, "catalog": list(CATALOG)}))
        return EXIT_ERROR
    except (ConfigError, ProbabilityError, StateError, ValueError) as exc:
        print(f"tomoq: error: {exc}", file=sys.stderr)
        if getattr(args, "command", None) == "check":
            print(json.dumps({"error": str(exc)}))
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
