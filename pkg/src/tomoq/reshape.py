"""Relabeling probability vectors with two or three indices.

A vector of dimension ``N <= m*n`` is laid out row-major in an ``m x n``
grid, trailing cells padded with zeros. The classical subadditivity and
strong-subadditivity inequalities hold for every such arrangement, not only
for genuine joint distributions.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .probcore import (
    Permutation,
    ProbVector,
    ProbabilityError,
    shannon_of,
)
from .report import DEFAULT_TOL, CheckReport

EXHAUSTIVE_MAX_CELLS = 8
SAMPLED_PERMUTATIONS = 10_000


class ConditionalError(ValueError):
    """Conditional distribution requested for a zero-probability group."""


def _validated(entries, ndim: int, name: str) -> np.ndarray:
    arr = np.array(entries, dtype=float)
    if arr.ndim != ndim:
        raise ProbabilityError(f"{name} needs a {ndim}-index array, got shape {arr.shape}")
    flat = ProbVector(arr.ravel()).components
    arr = flat.reshape(arr.shape).copy()
    arr.setflags(write=False)
    return arr


def _padded(p: ProbVector | Sequence[float], cells: int) -> np.ndarray:
    vec = np.asarray(p, dtype=float).ravel()
    if vec.size > cells:
        raise ValueError(f"vector of dim {vec.size} does not fit in {cells} cells")
    out = np.zeros(cells)
    out[: vec.size] = vec
    return out


class GridView:
    """Probability vector relabeled with two indices."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        self.entries = _validated(entries, 2, "GridView")

    @classmethod
    def from_vector(cls, p: ProbVector | Sequence[float], shape: tuple[int, int]) -> "GridView":
        m, n = shape
        return cls(_padded(ProbVector(p) if not isinstance(p, ProbVector) else p, m * n).reshape(m, n))

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def flatten(self) -> ProbVector:
        return ProbVector(self.entries.ravel())

    def __repr__(self) -> str:
        return f"GridView({self.entries.tolist()!r})"

    def to_json(self) -> str:
        return json.dumps({"shape": list(self.shape), "entries": self.entries.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "GridView":
        data = json.loads(text)
        grid = cls(data["entries"])
        if list(grid.shape) != list(data["shape"]):
            raise ProbabilityError(f"declared shape {data['shape']} does not match entries {grid.shape}")
        return grid


class CubeView:
    """Probability vector relabeled with three indices ``(j, k, m)``."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        self.entries = _validated(entries, 3, "CubeView")

    @classmethod
    def from_vector(cls, p: ProbVector | Sequence[float], shape: tuple[int, int, int]) -> "CubeView":
        a, b, c = shape
        return cls(_padded(ProbVector(p) if not isinstance(p, ProbVector) else p, a * b * c).reshape(a, b, c))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.entries.shape

    def flatten(self) -> ProbVector:
        return ProbVector(self.entries.ravel())

    def __repr__(self) -> str:
        return f"CubeView(shape={self.shape})"

    def to_json(self) -> str:
        return json.dumps({"shape": list(self.shape), "entries": self.entries.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "CubeView":
        data = json.loads(text)
        cube = cls(data["entries"])
        if list(cube.shape) != list(data["shape"]):
            raise ProbabilityError(f"declared shape {data['shape']} does not match entries {cube.shape}")
        return cube


@dataclass(frozen=True)
class PortraitMap:
    """Grouping of consecutive components, optionally after a permutation.

    ``sizes`` are the group lengths ``j_1, j_2 - j_1, ...``; ``pre`` is
    applied to the vector before grouping.
    """

    sizes: tuple[int, ...]
    pre: Permutation | None = None

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes or any(s <= 0 for s in sizes):
            raise ValueError(f"group sizes must be positive, got {sizes!r}")
        object.__setattr__(self, "sizes", sizes)
        if self.pre is not None and self.pre.size != sum(sizes):
            raise ValueError("pre-permutation size does not match the partition")

    @property
    def total(self) -> int:
        return sum(self.sizes)

    @classmethod
    def rows(cls, m: int, n: int) -> "PortraitMap":
        """Group an ``m x n`` row-major vector by rows (first index)."""
        return cls((n,) * m)

    @classmethod
    def columns(cls, m: int, n: int) -> "PortraitMap":
        """Group an ``m x n`` row-major vector by columns (second index)."""
        mapping = tuple(r * n + c for c in range(n) for r in range(m))
        return cls((m,) * n, Permutation(mapping))

    def arrange(self, p: ProbVector) -> np.ndarray:
        vec = np.asarray(p, dtype=float)
        if vec.size != self.total:
            raise ValueError(f"partition covers {self.total} components, vector has {vec.size}")
        if self.pre is not None:
            vec = vec[list(self.pre.mapping)]
        return vec

    def bounds(self) -> list[tuple[int, int]]:
        edges = np.concatenate([[0], np.cumsum(self.sizes)]).tolist()
        return list(zip(edges[:-1], edges[1:]))


def row_marginal(g: GridView) -> ProbVector:
    return ProbVector(g.entries.sum(axis=1))


def col_marginal(g: GridView) -> ProbVector:
    return ProbVector(g.entries.sum(axis=0))


def subadditivity_margins(grids: np.ndarray) -> np.ndarray:
    """Vectorized ``H(rows) + H(cols) - H(all)`` over a stack ``(..., m, n)``."""
    grids = np.asarray(grids, dtype=float)
    flat = grids.reshape(grids.shape[:-2] + (-1,))
    return shannon_of(grids.sum(axis=-1)) + shannon_of(grids.sum(axis=-2)) - shannon_of(flat)


def ssa_terms(cubes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(H(jkm) + H(k), H(jk) + H(km))`` over a stack ``(..., a, b, c)``."""
    cubes = np.asarray(cubes, dtype=float)
    lead = cubes.shape[:-3]
    h_all = shannon_of(cubes.reshape(lead + (-1,)))
    h_k = shannon_of(cubes.sum(axis=(-3, -1)))
    h_jk = shannon_of(cubes.sum(axis=-1).reshape(lead + (-1,)))
    h_km = shannon_of(cubes.sum(axis=-3).reshape(lead + (-1,)))
    return h_all + h_k, h_jk + h_km


def subadditivity_check(g: GridView, tol: float = DEFAULT_TOL) -> CheckReport:
    """Row and column marginal entropies against the entropy of the whole grid."""
    h_rows = float(shannon_of(g.entries.sum(axis=1)))
    h_cols = float(shannon_of(g.entries.sum(axis=0)))
    h_all = float(shannon_of(g.entries.ravel()))
    lhs = h_rows + h_cols
    return CheckReport(
        "grid-M1", lhs, h_all, lhs - h_all, tol,
        witness={"shape": list(g.shape)},
        details={"h_rows": h_rows, "h_cols": h_cols},
    )


def strong_subadditivity_check(c: CubeView, tol: float = DEFAULT_TOL) -> CheckReport:
    lhs, rhs = ssa_terms(c.entries)
    lhs, rhs = float(lhs), float(rhs)
    return CheckReport("cube-M18", lhs, rhs, rhs - lhs, tol, witness={"shape": list(c.shape)})


def portrait(p: ProbVector, pmap: PortraitMap) -> ProbVector:
    vec = pmap.arrange(p)
    return ProbVector([vec[a:b].sum() for a, b in pmap.bounds()])


def conditional_distribution(p: ProbVector, pmap: PortraitMap, group: int) -> ProbVector:
    """Components of group ``group`` (0-based) divided by the group total."""
    vec = pmap.arrange(p)
    bounds = pmap.bounds()
    if not 0 <= group < len(bounds):
        raise IndexError(f"group {group} out of range for {len(bounds)} groups")
    a, b = bounds[group]
    part = vec[a:b]
    total = part.sum()
    if total <= 0.0:
        raise ConditionalError(f"group {group} has zero probability")
    return ProbVector(part / total)


def average_conditional_entropy(p: ProbVector, pmap: PortraitMap) -> float:
    """Group-weighted mean of the conditional entropies; empty groups add 0."""
    vec = pmap.arrange(p)
    acc = 0.0
    for a, b in pmap.bounds():
        part = vec[a:b]
        total = part.sum()
        if total > 0.0:
            acc += total * float(shannon_of(part / total))
    return acc


def _permutations(cells: int, max_samples: int, seed: int) -> list[tuple[int, ...]]:
    if cells <= EXHAUSTIVE_MAX_CELLS:
        return list(itertools.permutations(range(cells)))
    rng = np.random.default_rng(seed)
    count = min(max_samples, math.factorial(cells))
    return [tuple(rng.permutation(cells).tolist()) for _ in range(count)]


def permutation_inequality_sweep(
    p: ProbVector,
    shape: tuple[int, int],
    max_samples: int = SAMPLED_PERMUTATIONS,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> list[CheckReport]:
    """Subadditivity on every relabeling of ``p`` into an ``m x n`` grid.

    The zero-padded vector of length ``m*n`` is permuted: exhaustively when
    ``m*n <= 8``, otherwise ``max_samples`` seeded draws.
    """
    m, n = shape
    vec = _padded(p, m * n)
    perms = _permutations(m * n, max_samples, seed)
    idx = np.array(perms, dtype=np.intp)
    grids = vec[idx].reshape(len(perms), m, n)
    h_rows = shannon_of(grids.sum(axis=2))
    h_cols = shannon_of(grids.sum(axis=1))
    h_all = float(shannon_of(vec))
    reports = []
    for k, perm in enumerate(perms):
        lhs = float(h_rows[k] + h_cols[k])
        reports.append(CheckReport(
            "grid-M1", lhs, h_all, lhs - h_all, tol,
            witness={"shape": [m, n], "permutation": list(perm), "seed": seed},
            details={"h_rows": float(h_rows[k]), "h_cols": float(h_cols[k])},
        ))
    return reports
