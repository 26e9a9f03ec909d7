"""Tomographic entropies on the unitary group and the inequality checkers.

Each checker returns a :class:`~tomoq.report.CheckReport` whose margin is
non-negative exactly when the inequality holds. Subsystem ``A`` is factor 0
(outcome ``m1``), ``B`` is factor 1 (outcome ``m2``).
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .probcore import check_q, renyi_of, shannon_entropy, shannon_of, tsallis_of
from .quantum import (
    DEGENERACY_GAP,
    DensityMatrix,
    UnitaryMatrix,
    haar_batch,
    hermitian_eigensystem,
    is_degenerate,
    partial_trace,
    quantum_q_entropy,
    tomogram,
    tomogram_probs,
    von_neumann_entropy,
)
from .report import DEFAULT_TOL, CheckReport

CHAIN_RULE_TOL = 1e-10
KINDS = ("shannon", "renyi", "tsallis")


class ArityError(ValueError):
    """State has the wrong number of subsystems for the requested check."""


def _require(rho: DensityMatrix, parties: int) -> None:
    if len(rho.dims) != parties:
        raise ArityError(f"expected a {parties}-partite state, got dims {rho.dims}")


def _entropy_kernel(kind: str, q: float | None):
    if kind == "shannon":
        return shannon_of
    q = check_q(1.0 if q is None else q)
    if kind == "renyi":
        return lambda p: renyi_of(p, q)
    if kind == "tsallis":
        return lambda p: tsallis_of(p, q)
    raise ValueError(f"unknown entropy kind {kind!r}; expected one of {KINDS}")


def _tomo_array(rho: DensityMatrix, u) -> np.ndarray:
    return tomogram(rho, u).as_array()


def tomographic_shannon(rho: DensityMatrix, u: UnitaryMatrix) -> float:
    return shannon_entropy(tomogram(rho, u).probs)


def tomographic_q_entropy(rho: DensityMatrix, u: UnitaryMatrix, q: float, kind: str = "renyi") -> float:
    if kind not in ("renyi", "tsallis"):
        raise ValueError(f"kind must be 'renyi' or 'tsallis', got {kind!r}")
    return float(_entropy_kernel(kind, q)(tomogram(rho, u).probs.components))


def quantum_entropy(rho: DensityMatrix, kind: str = "shannon", q: float | None = None) -> float:
    """Von Neumann entropy or its Renyi/Tsallis analogue."""
    if kind == "shannon":
        return von_neumann_entropy(rho)
    return quantum_q_entropy(rho, check_q(1.0 if q is None else q), kind)


def min_entropy_over_group(
    rho: DensityMatrix,
    kind: str = "shannon",
    q: float | None = None,
    strategy: str = "analytic",
    samples: int = 1000,
    seed=0,
) -> tuple[float, UnitaryMatrix]:
    """Minimum of a tomographic entropy over the unitary group.

    ``analytic`` returns the eigenvector matrix ``u0`` of ``rho`` (so that
    ``u0^dagger rho u0`` is diagonal) and the quantum entropy of ``rho``.
    ``sampled`` returns the smallest value over ``samples`` Haar draws; it is
    a verification tool and never beats the analytic value.
    """
    kernel = _entropy_kernel(kind, q)
    if strategy == "analytic":
        _, u0 = hermitian_eigensystem(rho.mat)
        return quantum_entropy(rho, kind, q), u0
    if strategy == "sampled":
        if samples < 1:
            raise ValueError("samples must be >= 1")
        us = haar_batch(rho.dim, samples, seed)
        values = kernel(np.clip(tomogram_probs(rho, us), 0.0, None))
        best = int(np.argmin(values))
        return float(values[best]), UnitaryMatrix(us[best])
    raise ValueError(f"unknown strategy {strategy!r}")


def group_minimum_check(
    rho: DensityMatrix, u: UnitaryMatrix, kind: str = "shannon", q: float | None = None,
    tol: float = DEFAULT_TOL,
) -> CheckReport:
    """Tomographic entropy at ``u`` is bounded below by the quantum entropy."""
    tomo = float(_entropy_kernel(kind, q)(tomogram(rho, u).probs.components))
    quant = quantum_entropy(rho, kind, q)
    witness = {"kind": kind}
    if kind != "shannon":
        witness["q"] = float(q)
    return CheckReport("group-min", tomo, quant, tomo - quant, tol, witness=witness)


# Bipartite and tripartite tomographic checks

def subadditivity_on_group(rho12: DensityMatrix, u: UnitaryMatrix, tol: float = DEFAULT_TOL) -> CheckReport:
    """``H12(u) <= H1(u) + H2(u)`` with the marginal tomograms."""
    _require(rho12, 2)
    w = _tomo_array(rho12, u)
    h1, h2, h12 = float(shannon_of(w.sum(axis=1))), float(shannon_of(w.sum(axis=0))), float(shannon_of(w.ravel()))
    return CheckReport(
        "subadd-23", h1 + h2, h12, h1 + h2 - h12, tol,
        details={"h1": h1, "h2": h2, "h12": h12},
    )


def strong_subadditivity_on_group(rho123: DensityMatrix, u: UnitaryMatrix, tol: float = DEFAULT_TOL) -> CheckReport:
    """``H123(u) + H2(u) <= H12(u) + H23(u)`` with projected tomograms."""
    _require(rho123, 3)
    w = _tomo_array(rho123, u)
    h123 = float(shannon_of(w.ravel()))
    h12 = float(shannon_of(w.sum(axis=2).ravel()))
    h23 = float(shannon_of(w.sum(axis=0).ravel()))
    h2 = float(shannon_of(w.sum(axis=(0, 2))))
    lhs, rhs = h123 + h2, h12 + h23
    return CheckReport(
        "ssa-31", lhs, rhs, rhs - lhs, tol,
        details={"h123": h123, "h12": h12, "h23": h23, "h2": h2},
    )


def tomographic_information(rho12: DensityMatrix, u: UnitaryMatrix) -> float:
    """``H1(u) + H2(u) - H12(u)``."""
    return subadditivity_on_group(rho12, u).margin


def vn_subadditivity(rho12: DensityMatrix, tol: float = DEFAULT_TOL) -> CheckReport:
    _require(rho12, 2)
    s1 = von_neumann_entropy(partial_trace(rho12, 0))
    s2 = von_neumann_entropy(partial_trace(rho12, 1))
    s12 = von_neumann_entropy(rho12)
    return CheckReport("vn-27", s1 + s2, s12, s1 + s2 - s12, tol, details={"s1": s1, "s2": s2, "s12": s12})


def vn_strong_subadditivity(rho123: DensityMatrix, tol: float = DEFAULT_TOL) -> CheckReport:
    _require(rho123, 3)
    s123 = von_neumann_entropy(rho123)
    s12 = von_neumann_entropy(partial_trace(rho123, (0, 1)))
    s23 = von_neumann_entropy(partial_trace(rho123, (1, 2)))
    s2 = von_neumann_entropy(partial_trace(rho123, 1))
    lhs, rhs = s123 + s2, s12 + s23
    return CheckReport(
        "vn-36", lhs, rhs, rhs - lhs, tol,
        details={"s123": s123, "s12": s12, "s23": s23, "s2": s2},
    )


def von_neumann_counterparts(rho: DensityMatrix, tol: float = DEFAULT_TOL) -> list[CheckReport]:
    """Von Neumann subadditivity, plus strong subadditivity for three parties.

    For a tripartite state subadditivity is taken across the cut
    ``1 | 23``.
    """
    if len(rho.dims) == 2:
        return [vn_subadditivity(rho, tol)]
    if len(rho.dims) == 3:
        d1, d2, d3 = rho.dims
        cut = DensityMatrix(rho.mat, (d1, d2 * d3))
        return [vn_subadditivity(cut, tol).with_witness(cut="1|23"), vn_strong_subadditivity(rho, tol)]
    raise ArityError(f"expected a 2- or 3-partite state, got dims {rho.dims}")


# Local minimizers and the correlation measures built on them

class LocalMinimizers(NamedTuple):
    u: UnitaryMatrix
    u1: UnitaryMatrix
    u2: UnitaryMatrix
    evals1: np.ndarray
    evals2: np.ndarray
    degenerate: bool


def local_minimizers(rho12: DensityMatrix) -> LocalMinimizers:
    """``u10 (x) u20`` with ``u10``, ``u20`` diagonalizing the reduced states.

    ``degenerate`` is set when either reduced spectrum has a gap below
    ``1e-8``; the minimizer is then one choice among many.
    """
    _require(rho12, 2)
    ev1, u1 = hermitian_eigensystem(partial_trace(rho12, 0).mat)
    ev2, u2 = hermitian_eigensystem(partial_trace(rho12, 1).mat)
    u = UnitaryMatrix(np.kron(u1.mat, u2.mat))
    return LocalMinimizers(u, u1, u2, ev1, ev2, is_degenerate(ev1) or is_degenerate(ev2))


def local_eigenbasis(rho: DensityMatrix) -> UnitaryMatrix:
    """Kronecker product of the eigenbases of every single-factor reduced state."""
    if len(rho.dims) == 1:
        return hermitian_eigensystem(rho.mat)[1]
    out = np.eye(1, dtype=complex)
    for k in range(len(rho.dims)):
        out = np.kron(out, hermitian_eigensystem(partial_trace(rho, k).mat)[1].mat)
    return UnitaryMatrix(out)


def sandwich_check(rho12: DensityMatrix, tol: float = DEFAULT_TOL) -> CheckReport:
    """``S1 + S2 >= H12(u10 (x) u20) >= S12``; margin is the smaller gap."""
    lm = local_minimizers(rho12)
    s1 = von_neumann_entropy(partial_trace(rho12, 0))
    s2 = von_neumann_entropy(partial_trace(rho12, 1))
    s12 = von_neumann_entropy(rho12)
    h12 = tomographic_shannon(rho12, lm.u)
    upper, lower = s1 + s2 - h12, h12 - s12
    return CheckReport(
        "sandwich-E", s1 + s2, s12, min(upper, lower), tol,
        witness={"unitary": "local-min"},
        degenerate_flag=lm.degenerate,
        details={"h12_local": h12, "upper_margin": upper, "lower_margin": lower},
    )


def _block_rotations(evals: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Block-diagonal Haar rotation acting inside each degenerate eigenspace."""
    n = evals.size
    out = np.eye(n, dtype=complex)
    start = 0
    for k in range(1, n + 1):
        if k == n or abs(evals[k - 1] - evals[k]) >= DEGENERACY_GAP:
            size = k - start
            if size > 1:
                out[start:k, start:k] = haar_batch(size, 1, rng)[0]
            start = k
    return out


def _discord_value(rho12: DensityMatrix, u: np.ndarray, s1: float, s2: float, s12: float) -> tuple[float, float]:
    w = _tomo_array(rho12, u)
    info = float(shannon_of(w.sum(axis=1)) + shannon_of(w.sum(axis=0)) - shannon_of(w.ravel()))
    return (s1 + s2 - s12) - info, info


def discord_like_D(
    rho12: DensityMatrix, gauge_samples: int = 0, seed=0, tol: float = DEFAULT_TOL,
) -> CheckReport:
    """Quantum minus tomographic information at the local minimizers.

    ``D = (S1 + S2 - S12) - I(u10 (x) u20)``, reported as the margin. With
    ``gauge_samples > 0`` and degenerate reduced states, the local bases are
    additionally rotated inside their degenerate eigenspaces and the spread
    of ``D`` is recorded in ``details``.
    """
    lm = local_minimizers(rho12)
    s1 = von_neumann_entropy(partial_trace(rho12, 0))
    s2 = von_neumann_entropy(partial_trace(rho12, 1))
    s12 = von_neumann_entropy(rho12)
    d, info = _discord_value(rho12, lm.u.mat, s1, s2, s12)
    details = {"D": d, "info_quantum": s1 + s2 - s12, "info_local": info, "s12": s12}
    if gauge_samples > 0 and lm.degenerate:
        rng = np.random.default_rng(seed)
        values = [d]
        for _ in range(gauge_samples):
            r1 = lm.u1.mat @ _block_rotations(lm.evals1, rng)
            r2 = lm.u2.mat @ _block_rotations(lm.evals2, rng)
            values.append(_discord_value(rho12, np.kron(r1, r2), s1, s2, s12)[0])
        details.update(gauge_D_min=min(values), gauge_D_max=max(values), gauge_samples=float(gauge_samples))
    witness = {"unitary": "local-min"}
    if gauge_samples > 0:
        witness["seed"] = seed
    return CheckReport(
        "discord-G", s1 + s2 - s12, info, d, tol,
        witness=witness, degenerate_flag=lm.degenerate, details=details,
    )


# Tsallis relations

def _tsallis_parts(w: np.ndarray, q: float) -> dict[str, float]:
    """Joint, marginal and conditional Tsallis entropies of a two-index tomogram."""
    wa, wb = w.sum(axis=1), w.sum(axis=0)
    cond = 0.0
    for m2 in range(w.shape[1]):
        if wb[m2] <= 0.0:
            continue
        c = w[:, m2] / wb[m2]
        c = c[c > 0.0]
        if q == 1.0:
            t_given = float(-np.sum(c * np.log(c)))
            weight = wb[m2]
        else:
            # c * ln_q(1/c) with ln_q(x) = (x**(1-q) - 1) / (1 - q)
            t_given = float(np.sum(c * np.expm1((q - 1.0) * np.log(c))) / (1.0 - q))
            weight = wb[m2] ** q
        cond += weight * t_given
    return {
        "t_ab": float(tsallis_of(w.ravel(), q)),
        "t_a": float(tsallis_of(wa, q)),
        "t_b": float(tsallis_of(wb, q)),
        "t_a_given_b": cond,
    }


def tsallis_chain_rule(rho12: DensityMatrix, u: UnitaryMatrix, q: float, tol: float = CHAIN_RULE_TOL) -> CheckReport:
    """``T_q(A,B,u) = T_q(A|B,u) + T_q(B,u)``; margin is ``-|residual|``."""
    _require(rho12, 2)
    q = check_q(q)
    parts = _tsallis_parts(_tomo_array(rho12, u), q)
    rhs = parts["t_a_given_b"] + parts["t_b"]
    return CheckReport(
        "chain-A2", parts["t_ab"], rhs, -abs(parts["t_ab"] - rhs), tol,
        witness={"q": q}, details=parts,
    )


def tsallis_inequalities(
    rho12: DensityMatrix, u: UnitaryMatrix, q: float, tol: float = DEFAULT_TOL,
) -> list[CheckReport]:
    """Four Tsallis/Shannon relations for a bipartite tomogram.

    1. ``tsallis-joint``: ``T_q(A,u) <= T_q(A,B,u)``.
    2. ``tsallis-cond``: ``T_q(A|B,u) <= T_q(A,u)``; only established for
       ``q >= 1``, so flagged conjectural below that.
    3. ``tsallis-A5``: at ``u10 (x) u20`` the marginal Tsallis entropy equals
       that of ``rho_A`` and the joint one is at least that of ``rho_AB``.
    4. ``tsallis-A6``: the Shannon limit of 3 together with
       ``H(A|B, u10 (x) u20) <= S(A)``.
    """
    _require(rho12, 2)
    q = check_q(q)
    parts = _tsallis_parts(_tomo_array(rho12, u), q)
    joint = CheckReport(
        "tsallis-joint", parts["t_a"], parts["t_ab"], parts["t_ab"] - parts["t_a"], tol,
        witness={"q": q}, details=parts,
    )
    cond = CheckReport(
        "tsallis-cond", parts["t_a_given_b"], parts["t_a"], parts["t_a"] - parts["t_a_given_b"], tol,
        witness={"q": q}, conjectural=q < 1.0, details=parts,
    )

    lm = local_minimizers(rho12)
    w_loc = _tomo_array(rho12, lm.u)
    rho_a = partial_trace(rho12, 0)
    local = _tsallis_parts(w_loc, q)
    t_a_state = quantum_q_entropy(rho_a, q, "tsallis")
    t_ab_state = quantum_q_entropy(rho12, q, "tsallis")
    residual = abs(local["t_a"] - t_a_state)
    ineq = local["t_ab"] - t_ab_state
    a5 = CheckReport(
        "tsallis-A5", local["t_ab"], t_ab_state, min(-residual, ineq), tol,
        witness={"q": q, "unitary": "local-min"}, degenerate_flag=lm.degenerate,
        details={"t_a_local": local["t_a"], "t_a_state": t_a_state, "equality_residual": residual,
                 "inequality_margin": ineq},
    )

    s_a = von_neumann_entropy(rho_a)
    h_ab = float(shannon_of(w_loc.ravel()))
    h_b = float(shannon_of(w_loc.sum(axis=0)))
    h_a_given_b = h_ab - h_b
    upper, lower = h_ab - s_a, s_a - h_a_given_b
    a6 = CheckReport(
        "tsallis-A6", s_a, h_ab, min(upper, lower), tol,
        witness={"unitary": "local-min"}, degenerate_flag=lm.degenerate,
        details={"s_a": s_a, "h_ab_local": h_ab, "h_a_given_b_local": h_a_given_b,
                 "joint_margin": upper, "conditional_margin": lower},
    )
    return [joint, cond, a5, a6]


def tsallis_from_renyi(renyi: float, q: float) -> float:
    """``(exp[(1-q) R] - 1) / (1-q)``; identity at ``q == 1``."""
    q = check_q(q)
    if q == 1.0:
        return renyi
    return math.expm1((1.0 - q) * renyi) / (1.0 - q)

