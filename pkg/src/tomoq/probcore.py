"""Probability vectors and the classical entropy family.

All entropies are in nats. ``0 ln 0`` and ``0**q`` (q > 0) are taken as 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

CLAMP_TOL = 1e-10
SUM_TOL = 1e-9

#: value returned by :func:`relative_q_entropy` when the support condition fails
INFINITY = math.inf


class ProbabilityError(ValueError):
    """Raised when numbers cannot form a probability vector."""


def _normalize(values: np.ndarray) -> np.ndarray:
    if values.size == 0:
        raise ProbabilityError("probability vector must be non-empty")
    if not np.all(np.isfinite(values)):
        raise ProbabilityError("probability vector has non-finite components")
    low = values.min()
    if low < -CLAMP_TOL:
        raise ProbabilityError(f"negative component {low!r} below clamp tolerance")
    values = np.where(values < 0.0, 0.0, values)
    total = values.sum()
    if abs(total - 1.0) > SUM_TOL:
        raise ProbabilityError(f"components sum to {total!r}, not 1")
    # deviations at rounding level are left alone so round trips stay exact
    if abs(total - 1.0) > values.size * np.finfo(float).eps:
        values = values / total
    return values


class ProbVector:
    """Immutable point on the probability simplex.

    Components in ``[-1e-10, 0)`` are clamped to zero and a sum within
    ``1e-9`` of one is renormalized; anything worse raises
    :class:`ProbabilityError`.
    """

    __slots__ = ("_p",)

    def __init__(self, components: Iterable[float] | np.ndarray):
        arr = np.array(components, dtype=float).ravel()
        arr = _normalize(arr)
        arr.setflags(write=False)
        self._p = arr

    @property
    def components(self) -> np.ndarray:
        return self._p

    @property
    def dim(self) -> int:
        return self._p.size

    def __array__(self, dtype=None, copy=None):
        return self._p if dtype is None else self._p.astype(dtype)

    def __len__(self) -> int:
        return self._p.size

    def __iter__(self):
        return iter(self._p.tolist())

    def __getitem__(self, k):
        return self._p[k]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProbVector):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self._p, other._p))

    def __hash__(self) -> int:
        return hash(self._p.tobytes())

    def __repr__(self) -> str:
        return f"ProbVector({self._p.tolist()!r})"

    def allclose(self, other: "ProbVector | Sequence[float]", atol: float = 1e-12) -> bool:
        other = np.asarray(other, dtype=float)
        return other.shape == self._p.shape and bool(np.allclose(self._p, other, rtol=0.0, atol=atol))

    def to_json(self) -> str:
        return json.dumps(self._p.tolist())

    @classmethod
    def from_json(cls, text: str) -> "ProbVector":
        data = json.loads(text)
        if not isinstance(data, list):
            raise ProbabilityError("expected a flat JSON array of numbers")
        return cls(data)

    @classmethod
    def _trusted(cls, arr: np.ndarray) -> "ProbVector":
        # skips renormalization so relabeling stays bit-exact
        obj = cls.__new__(cls)
        arr = np.array(arr, dtype=float)
        arr.setflags(write=False)
        obj._p = arr
        return obj

    @classmethod
    def uniform(cls, n: int) -> "ProbVector":
        return cls(np.full(n, 1.0 / n))


def check_q(q: float) -> float:
    """Validate a deformation parameter; returns it as float."""
    q = float(q)
    if not q > 0.0 or not math.isfinite(q):
        raise ValueError(f"deformation parameter q must be a positive finite number, got {q!r}")
    return q


@dataclass(frozen=True)
class Permutation:
    """Bijection on ``{0, ..., n-1}``.

    Acting on a vector, component ``i`` of the result is component
    ``mapping[i]`` of the input, i.e. the permutation matrix has a one at
    ``(i, mapping[i])``.
    """

    mapping: tuple[int, ...]

    def __post_init__(self):
        mapping = tuple(int(k) for k in self.mapping)
        if sorted(mapping) != list(range(len(mapping))):
            raise ValueError(f"not a permutation of 0..{len(mapping) - 1}: {mapping!r}")
        object.__setattr__(self, "mapping", mapping)

    @property
    def size(self) -> int:
        return len(self.mapping)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def swap(cls, n: int, i: int, j: int) -> "Permutation":
        mapping = list(range(n))
        mapping[i], mapping[j] = mapping[j], mapping[i]
        return cls(tuple(mapping))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Permutation":
        return cls(tuple(rng.permutation(n).tolist()))

    def matrix(self) -> np.ndarray:
        m = np.zeros((self.size, self.size))
        m[np.arange(self.size), self.mapping] = 1.0
        return m

    def inverse(self) -> "Permutation":
        inv = [0] * self.size
        for i, k in enumerate(self.mapping):
            inv[k] = i
        return Permutation(tuple(inv))


# Array kernels: no validation, reduce over the last axis. Used by the batch
# paths in the other modules.

def xlogx(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    pos = p > 0.0
    return np.where(pos, p * np.log(np.where(pos, p, 1.0)), 0.0)


def shannon_of(p: np.ndarray) -> np.ndarray:
    return 0.0 - np.sum(xlogx(p), axis=-1)


def power_sum(p: np.ndarray, q: float) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    pos = p > 0.0
    return np.sum(np.where(pos, np.where(pos, p, 1.0) ** q, 0.0), axis=-1)


def renyi_of(p: np.ndarray, q: float) -> np.ndarray:
    if q == 1.0:
        return shannon_of(p)
    return np.log(power_sum(p, q)) / (1.0 - q)


def tsallis_of(p: np.ndarray, q: float) -> np.ndarray:
    if q == 1.0:
        return shannon_of(p)
    return (power_sum(p, q) - 1.0) / (1.0 - q)


def _as_array(p) -> np.ndarray:
    return p.components if isinstance(p, ProbVector) else ProbVector(p).components


def shannon_entropy(p: ProbVector) -> float:
    """Shannon entropy ``-sum p_k ln p_k``."""
    return float(shannon_of(_as_array(p)))


def renyi_entropy(p: ProbVector, q: float) -> float:
    """Renyi entropy ``ln(sum p_k**q) / (1 - q)``; Shannon at ``q == 1``."""
    return float(renyi_of(_as_array(p), check_q(q)))


def tsallis_entropy(p: ProbVector, q: float) -> float:
    """Tsallis entropy ``(sum p_k**q - 1) / (1 - q)``; Shannon at ``q == 1``."""
    return float(tsallis_of(_as_array(p), check_q(q)))


def q_log(x: float, q: float) -> float:
    """Deformed logarithm ``(x**(1-q) - 1) / (1 - q)``, ``ln x`` at ``q == 1``."""
    q = check_q(q)
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"q_log is defined for x > 0, got {x!r}")
    if q == 1.0:
        return math.log(x)
    return math.expm1((1.0 - q) * math.log(x)) / (1.0 - q)


def relative_q_entropy(p1: ProbVector, p2: ProbVector, q: float) -> float:
    """Relative q-entropy ``-sum p1_k ln_q(p2_k / p1_k)``.

    Terms with ``p1_k == 0`` vanish. If ``p2_k == 0`` where ``p1_k > 0`` the
    result is :data:`INFINITY`.
    """
    q = check_q(q)
    a, b = _as_array(p1), _as_array(p2)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size}")
    support = a > 0.0
    if np.any(b[support] == 0.0):
        return INFINITY
    a, b = a[support], b[support]
    log_ratio = np.log(b / a)
    if q == 1.0:
        return float(-np.sum(a * log_ratio))
    return float(-np.sum(a * np.expm1((1.0 - q) * log_ratio)) / (1.0 - q))


def mutual_information(joint) -> float:
    """``H(rows) + H(cols) - H(joint)`` for a two-index distribution.

    Accepts a :class:`~tomoq.reshape.GridView` or any 2-d array of
    probabilities.
    """
    g = np.asarray(getattr(joint, "entries", joint), dtype=float)
    if g.ndim != 2:
        raise ValueError("mutual_information needs a two-index array")
    ProbVector(g.ravel())
    return float(shannon_of(g.sum(axis=1)) + shannon_of(g.sum(axis=0)) - shannon_of(g.ravel()))


def permute(p: ProbVector, perm: Permutation) -> ProbVector:
    arr = _as_array(p)
    if perm.size != arr.size:
        raise ValueError(f"permutation of size {perm.size} applied to vector of dim {arr.size}")
    return ProbVector._trusted(arr[list(perm.mapping)])


def tensor_product(p1: ProbVector, p2: ProbVector) -> ProbVector:
    """Row-major product distribution ``p1_j * p2_k``."""
    return ProbVector(np.outer(_as_array(p1), _as_array(p2)).ravel())
