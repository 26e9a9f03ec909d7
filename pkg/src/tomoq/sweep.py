"""Seeded sweeps of the inequality checkers over random states and unitaries."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import inequalities as ineq
from .quantum import DensityMatrix, haar_sample, random_density, tomogram
from .report import DEFAULT_TOL, CheckReport, json_number
from .reshape import CubeView, GridView, strong_subadditivity_check, subadditivity_check

CATALOG = (
    "subadd-23", "ssa-31", "sandwich-E", "discord-G", "chain-A2", "tsallis-A5", "tsallis-A6",
    "vn-27", "vn-36", "grid-M1", "cube-M18",
    "tsallis-joint", "tsallis-cond", "group-min",
)

_BIPARTITE = {"subadd-23", "sandwich-E", "discord-G", "chain-A2", "tsallis-A5", "tsallis-A6",
              "tsallis-joint", "tsallis-cond", "vn-27"}
_TRIPARTITE = {"ssa-31", "vn-27", "vn-36"}
_ANY = {"grid-M1", "cube-M18", "group-min"}
_TSALLIS = ("tsallis-joint", "tsallis-cond", "tsallis-A5", "tsallis-A6")

DEFAULT_TOLS = {"chain-A2": ineq.CHAIN_RULE_TOL}


class ConfigError(ValueError):
    """Invalid sweep configuration; ``line`` is set for parse errors."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def applicable(dims: tuple[int, ...]) -> tuple[str, ...]:
    """Catalog ids that apply to states with the given factor dimensions."""
    allowed = set(_ANY)
    if len(dims) == 2:
        allowed |= _BIPARTITE
    elif len(dims) == 3:
        allowed |= _TRIPARTITE
    return tuple(i for i in CATALOG if i in allowed)


def tolerance_for(inequality_id: str, override: float | None = None) -> float:
    if override is not None:
        return override
    return DEFAULT_TOLS.get(inequality_id, DEFAULT_TOL)


@dataclass(frozen=True)
class SweepConfig:
    """What to sample and which inequalities to evaluate.

    ``inequalities`` empty means every catalog entry applicable to ``dims``.
    ``rank`` ``None`` means full rank.
    """

    dims: tuple[int, ...] = (2, 2)
    sample_count: int = 1000
    master_seed: int = 0
    rank: int | None = None
    q_list: tuple[float, ...] = (0.5, 1.0, 2.0)
    inequalities: tuple[str, ...] = ()
    tolerance: float | None = None

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "q_list", tuple(float(q) for q in self.q_list))
        object.__setattr__(self, "inequalities", tuple(self.inequalities))
        if not dims or any(d < 1 for d in dims):
            raise ConfigError(f"dims must be positive integers, got {dims}")
        if int(self.sample_count) < 1:
            raise ConfigError(f"sample_count must be >= 1, got {self.sample_count}")
        if self.rank is not None and not 1 <= self.rank <= math.prod(dims):
            raise ConfigError(f"rank must be between 1 and {math.prod(dims)}, got {self.rank}")
        if not self.q_list or any(not (q > 0 and math.isfinite(q)) for q in self.q_list):
            raise ConfigError(f"q_list values must be positive, got {self.q_list}")
        if self.tolerance is not None and not math.isfinite(self.tolerance):
            raise ConfigError("tolerance must be finite")
        allowed = applicable(dims)
        for name in self.inequalities:
            if name not in CATALOG:
                raise ConfigError(f"unknown inequality {name!r}; catalog: {', '.join(CATALOG)}")
            if name not in allowed:
                raise ConfigError(f"inequality {name!r} does not apply to dims {list(dims)}")

    @property
    def selected(self) -> tuple[str, ...]:
        return self.inequalities or applicable(self.dims)

    def to_dict(self) -> dict[str, Any]:
        return {
            "dims": list(self.dims),
            "sample_count": self.sample_count,
            "master_seed": self.master_seed,
            "rank": self.rank,
            "q_list": list(self.q_list),
            "inequalities": list(self.selected),
            "tolerance": self.tolerance,
        }


_KEYS = {"dims", "sample_count", "master_seed", "rank", "q_list", "inequalities", "tolerance"}


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.replace(",", " ").split())


def parse_config(text: str) -> SweepConfig:
    """Parse the flat ``key = value`` format; ``#`` starts a comment.

    ``dims`` is required. Unknown or repeated keys are errors.
    """
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            if key == "dims":
                values[key] = _ints(value)
            elif key in ("sample_count", "master_seed"):
                values[key] = int(value)
            elif key == "rank":
                values[key] = None if value.lower() == "full" else int(value)
            elif key == "q_list":
                values[key] = tuple(float(t) for t in value.replace(",", " ").split())
            elif key == "inequalities":
                names = tuple(t for t in value.replace(",", " ").split())
                values[key] = () if names == ("all",) else names
            elif key == "tolerance":
                values[key] = float(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from exc
    if "dims" not in values:
        raise ConfigError("missing required key 'dims'")
    return SweepConfig(**values)


def sample_seeds(master_seed: int, index: int) -> tuple[int, int]:
    """Independent (state, unitary) seeds for sample ``index``."""
    state, unitary = np.random.SeedSequence([int(master_seed), int(index)]).generate_state(2)
    return int(state), int(unitary)


def grid_shape(dims: tuple[int, ...]) -> tuple[int, int]:
    n = math.prod(dims)
    if len(dims) > 1:
        return dims[0], n // dims[0]
    rows = math.isqrt(n - 1) + 1 if n > 1 else 1
    return rows, -(-n // rows)


def cube_shape(dims: tuple[int, ...]) -> tuple[int, int, int]:
    if len(dims) == 3:
        return dims
    n = math.prod(dims)
    side = 1
    while side ** 3 < n:
        side += 1
    return side, side, side


def check_state(
    rho: DensityMatrix,
    u,
    names: tuple[str, ...],
    q_list: tuple[float, ...],
    tolerance: float | None = None,
) -> list[CheckReport]:
    """Run every listed check on one (state, unitary) pair."""
    reports: list[CheckReport] = []
    tol = lambda name: tolerance_for(name, tolerance)  # noqa: E731
    for name in names:
        if name == "subadd-23":
            reports.append(ineq.subadditivity_on_group(rho, u, tol(name)))
        elif name == "ssa-31":
            reports.append(ineq.strong_subadditivity_on_group(rho, u, tol(name)))
        elif name == "sandwich-E":
            reports.append(ineq.sandwich_check(rho, tol(name)))
        elif name == "discord-G":
            reports.append(ineq.discord_like_D(rho, tol=tol(name)))
        elif name == "vn-27":
            reports.append(ineq.von_neumann_counterparts(rho, tol(name))[0])
        elif name == "vn-36":
            reports.append(ineq.vn_strong_subadditivity(rho, tol(name)))
        elif name == "grid-M1":
            probs = tomogram(rho, u).probs
            reports.append(subadditivity_check(GridView.from_vector(probs, grid_shape(rho.dims)), tol(name)))
        elif name == "cube-M18":
            probs = tomogram(rho, u).probs
            reports.append(strong_subadditivity_check(CubeView.from_vector(probs, cube_shape(rho.dims)), tol(name)))
        elif name == "group-min":
            reports.append(ineq.group_minimum_check(rho, u, "shannon", tol=tol(name)))
            for q in q_list:
                if q != 1.0:
                    for kind in ("renyi", "tsallis"):
                        reports.append(ineq.group_minimum_check(rho, u, kind, q, tol(name)))
        elif name == "chain-A2":
            for q in q_list:
                reports.append(ineq.tsallis_chain_rule(rho, u, q, tol(name)))
    wanted = [n for n in _TSALLIS if n in names]
    if wanted:
        for q in q_list:
            for r in ineq.tsallis_inequalities(rho, u, q):
                if r.inequality_id in wanted:
                    reports.append(r.with_tol(tol(r.inequality_id)))
    return reports


def _run_sample(config: SweepConfig, index: int) -> list[CheckReport]:
    state_seed, unitary_seed = sample_seeds(config.master_seed, index)
    rho = random_density(config.dims, config.rank, state_seed)
    u = haar_sample(rho.dim, unitary_seed)
    out = []
    for r in check_state(rho, u, config.selected, config.q_list, config.tolerance):
        witness = {"sample": index, "state_seed": state_seed}
        if r.witness.get("unitary") != "local-min":
            witness["unitary_seed"] = unitary_seed
        out.append(r.with_witness(**witness))
    return out


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("TOMOQ_THREADS", "1")))
    except ValueError:
        return 1


def run_sweep(config: SweepConfig, workers: int | None = None) -> list[CheckReport]:
    """Evaluate the selected checks on ``sample_count`` seeded samples.

    Sample ``i`` draws its state and unitary from seeds derived from
    ``(master_seed, i)``, so results are independent of ``workers`` and are
    returned in sample order.
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    indices = range(config.sample_count)
    if workers == 1:
        chunks = [_run_sample(config, i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda i: _run_sample(config, i), indices))
    return [r for chunk in chunks for r in chunk]


@dataclass
class SummaryRow:
    inequality_id: str
    samples: int = 0
    failures: int = 0
    conjectural_failures: int = 0
    min_margin: float = math.inf
    worst_witness: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "inequality_id": self.inequality_id,
            "samples": self.samples,
            "failures": self.failures,
            "conjectural_failures": self.conjectural_failures,
            "min_margin": json_number(self.min_margin),
            "worst_witness": self.worst_witness,
        }


def summarize(reports: list[CheckReport]) -> list[SummaryRow]:
    """Per-id counts and minimum margin, in first-seen order.

    Failures of conjectural reports are counted separately and do not
    contribute to ``failures``.
    """
    rows: dict[str, SummaryRow] = {}
    for r in reports:
        row = rows.setdefault(r.inequality_id, SummaryRow(r.inequality_id))
        row.samples += 1
        if not r.passed:
            if r.conjectural:
                row.conjectural_failures += 1
            else:
                row.failures += 1
        if r.margin < row.min_margin:
            row.min_margin = r.margin
            row.worst_witness = dict(r.witness)
    return list(rows.values())
