"""Dense complex linear algebra for qudit states and their tomograms.

Basis convention: row ``r`` of a factor of dimension ``n`` carries the spin
projection ``m = j - r`` with ``j = (n - 1) / 2``; multipartite bases are
ordered lexicographically over factors (``numpy.kron`` order).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .probcore import Permutation, ProbVector, check_q, renyi_of, shannon_of, tsallis_of

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-9
EIGEN_CLAMP_TOL = 1e-10
UNITARY_TOL = 1e-9
DEGENERACY_GAP = 1e-8


def rounding_floor(n: int) -> float:
    """Magnitude below which a probability of an ``n``-level unit-trace state is
    rounding noise (observed null-space noise stays under ``0.7 n eps``)."""
    return 2.0 * n * np.finfo(float).eps


class StateError(ValueError):
    """Matrix data that violates a state or unitary invariant."""


def _square(mat, name: str) -> np.ndarray:
    arr = np.array(mat, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise StateError(f"{name} must be a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise StateError(f"{name} has non-finite entries")
    return arr


def is_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    h = np.asarray(h)
    return h.ndim == 2 and h.shape[0] == h.shape[1] and bool(np.max(np.abs(h - h.conj().T), initial=0.0) <= tol)


class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix with factor dims."""

    __slots__ = ("mat", "dims")

    def __init__(self, mat, dims: Sequence[int] | None = None):
        arr = _square(mat, "density matrix")
        n = arr.shape[0]
        dims = (n,) if dims is None else tuple(int(d) for d in dims)
        if any(d < 1 for d in dims) or math.prod(dims) != n:
            raise StateError(f"dims {dims} do not factor dimension {n}")
        if not is_hermitian(arr):
            raise StateError("density matrix is not Hermitian")
        arr = 0.5 * (arr + arr.conj().T)
        tr = np.trace(arr).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise StateError(f"density matrix has trace {tr!r}")
        low = np.linalg.eigvalsh(arr)[0]
        if low < -EIGEN_CLAMP_TOL:
            raise StateError(f"density matrix has negative eigenvalue {low!r}")
        arr.setflags(write=False)
        self.mat = arr
        self.dims = dims

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def __repr__(self) -> str:
        return f"DensityMatrix(dims={self.dims})"

    def to_dict(self) -> dict:
        return {"dims": list(self.dims), "re": self.mat.real.tolist(), "im": self.mat.imag.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "DensityMatrix":
        try:
            mat = np.array(data["re"], dtype=float) + 1j * np.array(data["im"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise StateError(f"malformed matrix data: {exc}") from exc
        return cls(mat, data.get("dims"))

    @classmethod
    def from_json(cls, text: str) -> "DensityMatrix":
        return cls.from_dict(json.loads(text))


class UnitaryMatrix:
    """Square matrix with ``u^dagger u = I`` to ``1e-9`` entrywise."""

    __slots__ = ("mat",)

    def __init__(self, mat):
        arr = _square(mat, "unitary")
        err = np.max(np.abs(arr.conj().T @ arr - np.eye(arr.shape[0])))
        if err > UNITARY_TOL:
            raise StateError(f"matrix is not unitary (residual {err:.3g})")
        arr.setflags(write=False)
        self.mat = arr

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @classmethod
    def identity(cls, n: int) -> "UnitaryMatrix":
        return cls(np.eye(n))

    def dagger(self) -> "UnitaryMatrix":
        return UnitaryMatrix(self.mat.conj().T)

    def __repr__(self) -> str:
        return f"UnitaryMatrix(dim={self.dim})"

    def to_dict(self) -> dict:
        return {"re": self.mat.real.tolist(), "im": self.mat.imag.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "UnitaryMatrix":
        try:
            mat = np.array(data["re"], dtype=float) + 1j * np.array(data["im"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise StateError(f"malformed matrix data: {exc}") from exc
        return cls(mat)

    @classmethod
    def from_json(cls, text: str) -> "UnitaryMatrix":
        return cls.from_dict(json.loads(text))


def local_unitary(*factors: UnitaryMatrix | np.ndarray) -> UnitaryMatrix:
    """Kronecker product ``u_1 (x) u_2 (x) ...``."""
    out = np.eye(1, dtype=complex)
    for f in factors:
        out = np.kron(out, getattr(f, "mat", f))
    return UnitaryMatrix(out)


def spin_projections(n: int) -> list[float]:
    j = (n - 1) / 2
    return [j - r for r in range(n)]


@dataclass(frozen=True)
class Tomogram:
    """Outcome distribution ``w(m, u)`` of a (multipartite) qudit state."""

    probs: ProbVector
    dims: tuple[int, ...]
    unitary: UnitaryMatrix | None = None

    @property
    def labels(self) -> list[tuple[float, ...]]:
        return list(itertools.product(*(spin_projections(d) for d in self.dims)))

    def as_array(self) -> np.ndarray:
        return self.probs.components.reshape(self.dims)


# Eigensystems

def jacobi_eigh(h, tol: float = 1e-15, max_sweeps: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic complex Jacobi diagonalization of a Hermitian matrix.

    Returns unsorted eigenvalues and the matrix whose columns are the
    eigenvectors.
    """
    a = np.array(h, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(float(np.max(np.abs(a), initial=0.0)), np.finfo(float).tiny)
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(a[offdiag]))
        if off <= tol * scale * n:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                mag = abs(b)
                if mag <= tol * scale * 1e-3:
                    continue
                phase = b / mag
                theta = 0.5 * math.atan2(2.0 * mag, a[p, p].real - a[q, q].real)
                c, s = math.cos(theta), math.sin(theta)
                g = np.array([[c, -s], [s * phase.conjugate(), c * phase.conjugate()]])
                cols = [p, q]
                a[:, cols] = a[:, cols] @ g
                a[cols, :] = g.conj().T @ a[cols, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, cols] = v[:, cols] @ g
    return np.diag(a).real.copy(), v


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vecs), axis=0)
    lead = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (lead.conj() / np.abs(lead))


def hermitian_eigensystem(h, method: str = "lapack") -> tuple[np.ndarray, UnitaryMatrix]:
    """Eigenvalues (descending) and eigenvector matrix ``u0`` of ``h``.

    ``h = u0 diag(evals) u0^dagger``. Each eigenvector is rotated so that its
    largest-modulus component is real positive; ties in the eigenvalues keep
    the solver's order (stable sort).
    """
    h = getattr(h, "mat", h)
    h = _square(h, "matrix")
    if not is_hermitian(h):
        raise StateError("matrix is not Hermitian")
    h = 0.5 * (h + h.conj().T)
    if method == "lapack":
        evals, vecs = np.linalg.eigh(h)
    elif method == "jacobi":
        evals, vecs = jacobi_eigh(h)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    order = np.argsort(-evals, kind="stable")
    evals = evals[order]
    vecs = _fix_phases(vecs[:, order])
    return evals, UnitaryMatrix(vecs)


def is_degenerate(evals: Sequence[float], gap: float = DEGENERACY_GAP) -> bool:
    evals = np.sort(np.asarray(evals, dtype=float))
    return bool(np.any(np.diff(evals) < gap))


def eigenvalue_vector(rho: DensityMatrix) -> ProbVector:
    """Spectrum of ``rho`` (descending) as a probability vector.

    Eigenvalues within :func:`rounding_floor` of zero are set to zero.
    """
    lam = np.linalg.eigvalsh(rho.mat)[::-1]
    return ProbVector(np.where(np.abs(lam) <= rounding_floor(rho.dim), 0.0, lam))


# Subsystems

def _keep_indices(dims: tuple[int, ...], keep: Iterable[int]) -> tuple[int, ...]:
    if isinstance(keep, int):
        keep = (keep,)
    keep = tuple(sorted(set(int(k) for k in keep)))
    if not keep or keep[0] < 0 or keep[-1] >= len(dims):
        raise ValueError(f"invalid subsystem indices {keep} for dims {dims}")
    return keep


def partial_trace(rho: DensityMatrix, keep: Iterable[int] | int) -> DensityMatrix:
    """Reduced state on the factors listed in ``keep`` (0-based)."""
    dims = rho.dims
    if len(dims) < 2:
        raise ValueError("partial trace needs at least two factors")
    keep = _keep_indices(dims, keep)
    n = len(dims)
    rows = [chr(ord("a") + i) for i in range(n)]
    cols = [chr(ord("a") + n + i) if i in keep else rows[i] for i in range(n)]
    out = [rows[i] for i in keep] + [cols[i] for i in keep]
    subscripts = "".join(rows) + "".join(cols) + "->" + "".join(out)
    t = np.einsum(subscripts, rho.mat.reshape(dims + dims))
    kept = tuple(dims[i] for i in keep)
    size = math.prod(kept)
    return DensityMatrix(t.reshape(size, size), kept)


def _unitary_array(u, n: int) -> np.ndarray:
    mat = getattr(u, "mat", u)
    mat = np.asarray(mat)
    if mat.shape[-2:] != (n, n):
        raise ValueError(f"unitary of shape {mat.shape[-2:]} does not act on dimension {n}")
    return mat


def tomogram_probs(rho: DensityMatrix, us: np.ndarray) -> np.ndarray:
    """Diagonals of ``u^dagger rho u`` for one unitary or a stack ``(k, N, N)``."""
    us = _unitary_array(us, rho.dim)
    w = np.sum(us.conj() * (rho.mat @ us), axis=-2).real
    return np.where(np.abs(w) <= rounding_floor(rho.dim), 0.0, w)


def tomogram(rho: DensityMatrix, u: UnitaryMatrix) -> Tomogram:
    """``w(m, u) = <m| u^dagger rho u |m>`` over the product basis."""
    if not isinstance(u, UnitaryMatrix):
        u = UnitaryMatrix(u)
    return Tomogram(ProbVector(tomogram_probs(rho, u.mat)), rho.dims, u)


def vectorized_tomogram(rho: DensityMatrix, u: UnitaryMatrix) -> ProbVector:
    """Tomogram from the spectrum: ``|u^dagger u0|**2`` applied to the eigenvalues.

    Independent of :func:`tomogram`; the two agree to rounding.
    """
    evals, u0 = hermitian_eigensystem(rho.mat)
    overlap = np.abs(_unitary_array(u, rho.dim).conj().T @ u0.mat) ** 2
    return ProbVector(overlap @ np.clip(evals, 0.0, None))


def marginal_tomogram(t: Tomogram, keep: Iterable[int] | int) -> Tomogram:
    """Sum the outcome distribution over the factors not in ``keep``."""
    if len(t.dims) < 2:
        raise ValueError("marginal needs a multipartite tomogram")
    keep = _keep_indices(t.dims, keep)
    drop = tuple(i for i in range(len(t.dims)) if i not in keep)
    arr = t.as_array().sum(axis=drop) if drop else t.as_array()
    return Tomogram(ProbVector(arr.ravel()), tuple(t.dims[i] for i in keep), t.unitary)


# Sampling

def haar_batch(dim: int, count: int, seed) -> np.ndarray:
    """``count`` Haar unitaries of size ``dim`` as an array ``(count, dim, dim)``.

    Complex Ginibre matrices are QR-factored and each column of Q is
    multiplied by the phase of the matching diagonal entry of R.
    """
    if dim < 1 or count < 0:
        raise ValueError("dim must be >= 1 and count >= 0")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def haar_sample(dim: int, seed) -> UnitaryMatrix:
    return UnitaryMatrix(haar_batch(dim, 1, seed)[0])


def random_density(dims: Sequence[int] | int, rank: int | None = None, seed=None) -> DensityMatrix:
    """``G G^dagger / Tr(G G^dagger)`` with ``G`` an ``N x rank`` complex Gaussian."""
    dims = (dims,) if isinstance(dims, int) else tuple(int(d) for d in dims)
    n = math.prod(dims)
    rank = n if rank is None else int(rank)
    if not 1 <= rank <= n:
        raise ValueError(f"rank must be between 1 and {n}, got {rank}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    m = g @ g.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityMatrix(m / np.trace(m).real, dims)


def pure_state(vector: Sequence[complex], dims: Sequence[int] | None = None) -> DensityMatrix:
    psi = np.asarray(vector, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix(np.outer(psi, psi.conj()), dims)


def maximally_mixed(dims: Sequence[int] | int) -> DensityMatrix:
    dims = (dims,) if isinstance(dims, int) else tuple(dims)
    n = math.prod(dims)
    return DensityMatrix(np.eye(n) / n, dims)


def bell_state() -> DensityMatrix:
    """``|Phi+> = (|00> + |11>) / sqrt 2`` on two qubits."""
    return pure_state([1, 0, 0, 1], (2, 2))


def ghz_state(parties: int = 3) -> DensityMatrix:
    psi = np.zeros(2 ** parties)
    psi[0] = psi[-1] = 1.0
    return pure_state(psi, (2,) * parties)


def product_state(*factors: DensityMatrix) -> DensityMatrix:
    mat = np.eye(1, dtype=complex)
    dims: tuple[int, ...] = ()
    for f in factors:
        mat = np.kron(mat, f.mat)
        dims += f.dims
    return DensityMatrix(mat, dims)


# Entropies

def von_neumann_entropy(rho: DensityMatrix) -> float:
    """``-Tr rho ln rho`` from the spectrum."""
    return float(shannon_of(eigenvalue_vector(rho).components))


def quantum_q_entropy(rho: DensityMatrix, q: float, kind: str = "renyi") -> float:
    q = check_q(q)
    lam = eigenvalue_vector(rho).components
    if kind == "renyi":
        return float(renyi_of(lam, q))
    if kind == "tsallis":
        return float(tsallis_of(lam, q))
    raise ValueError(f"kind must be 'renyi' or 'tsallis', got {kind!r}")


def permutation_conjugate(h, perm: Permutation) -> np.ndarray:
    """``P h P^T`` for the permutation matrix ``P`` of ``perm``."""
    h = _square(getattr(h, "mat", h), "matrix")
    if perm.size != h.shape[0]:
        raise ValueError(f"permutation of size {perm.size} on a {h.shape[0]}x{h.shape[0]} matrix")
    idx = np.asarray(perm.mapping)
    return h[np.ix_(idx, idx)]
