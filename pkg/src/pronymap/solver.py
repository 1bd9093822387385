"""End-to-end inversion of the moment map.

Three formulations are offered: the full problem of order d
(:func:`invert_prony`), the rank-restricted problem on 2r moments
(:func:`invert_rank_restricted`), and the multiplicity-restricted problem on
the first s + r moments with a fixed collision pattern
(:func:`invert_multiplicity_restricted`, a local Newton solver).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import block_diag

from .collision import solve_with_collisions
from .errors import (
    ConditioningError,
    DegenerateJacobian,
    InputError,
    NoConvergence,
    UndefinedSeparation,
)
from .hankel import MINOR_TOL, RANK_TOL, build_hankel
from .pade import agreement_order, pade_solve, solve_denominator, solve_numerator
from .signal import MERGE_TOL, Signal, as_moments, falling_power, moments
from .stieltjes import RationalFunction, coefficient_noise, partial_fractions

#: Largest condition number accepted by the linear-part solver.
MAX_CONDITION = 1e14


@dataclass(frozen=True, eq=False)
class ConfluentVandermonde:
    matrix: np.ndarray
    nodes: tuple[complex, ...]
    multiplicities: tuple[int, ...]
    condition: float


def confluent_vandermonde(nodes, D, rows: Optional[int] = None) -> ConfluentVandermonde:
    """Matrix whose column (j, l) holds k!/(k-l)! * x_j**(k-l) in row k.

    Square (sum(D) rows) unless ``rows`` is given.
    """
    nodes = [complex(x) for x in nodes]
    D = [int(d) for d in D]
    if len(nodes) != len(D) or any(d < 1 for d in D):
        raise InputError("need one positive multiplicity per node")
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            if abs(nodes[i] - nodes[j]) <= MERGE_TOL:
                raise InputError("confluent Vandermonde nodes must be distinct")
    n = sum(D) if rows is None else rows
    cols = [falling_power(x, ell, n) for x, d in zip(nodes, D) for ell in range(d)]
    V = np.column_stack(cols) if cols else np.zeros((n, 0), complex)
    cond = float(np.linalg.cond(V)) if V.shape[0] == V.shape[1] and V.size else math.nan
    return ConfluentVandermonde(V, tuple(nodes), tuple(D), cond)


def solve_linear_part(nodes, D, mu_head) -> list[tuple[complex, ...]]:
    """Amplitudes a with V(nodes, D) a = (m_0, ..., m_{d-1})."""
    mu_head = as_moments(mu_head)
    V = confluent_vandermonde(nodes, D)
    if mu_head.size != V.matrix.shape[0]:
        raise InputError(f"need exactly {V.matrix.shape[0]} moments")
    if not V.condition < MAX_CONDITION:
        raise ConditioningError(f"confluent Vandermonde condition {V.condition:.3g}")
    a = np.linalg.solve(V.matrix, mu_head)
    out, pos = [], 0
    for d in V.multiplicities:
        out.append(tuple(a[pos : pos + d]))
        pos += d
    return out


@dataclass(frozen=True, eq=False)
class SolveResult:
    signal: Signal
    rank: int
    stratum: str = "solvable"
    residual: float = 0.0
    condition: Optional[float] = None
    agreement: Optional[int] = None
    extra: dict = field(default_factory=dict)

    def diagnostics(self) -> dict:
        out = {
            "rank": self.rank,
            "stratum": self.stratum,
            "residual": self.residual,
            "condition": self.condition,
            "agreement_order": self.agreement,
        }
        out.update(self.extra)
        return out


def relative_residual(signal: Signal, mu) -> float:
    mu = as_moments(mu)
    scale = float(np.max(np.abs(mu)))
    err = float(np.max(np.abs(moments(signal, mu.size) - mu)))
    return err / scale if scale > 0 else err


def _decompose(mu, R: RationalFunction, rank: int, **extra) -> SolveResult:
    signal = partial_fractions(R, coeff_tol=coefficient_noise(R.condition))
    return SolveResult(
        signal,
        rank,
        residual=relative_residual(signal, mu),
        condition=R.condition,
        agreement=agreement_order(mu, R),
        extra=extra,
    )


def invert_prony(mu, d: int, tol: float = RANK_TOL, minor_tol: float = MINOR_TOL) -> SolveResult:
    """Signal of rank r <= d whose first 2d moments are ``mu`` (unique up to node order).

    Raises :class:`Unsolvable` on the unsolvability strata.
    """
    mu = as_moments(mu)
    R = pade_solve(mu, d, tol, minor_tol)
    return _decompose(mu, R, R.order)


def invert_rank_restricted(
    mu,
    r: int,
    minor_tol: float = MINOR_TOL,
    collisions: bool = False,
    cluster_tol: Optional[float] = None,
) -> SolveResult:
    """Signal of rank exactly r from 2r moments; needs a nonsingular leading block.

    With ``collisions=True`` the amplitudes are found in a divided-difference
    basis instead (see :func:`pronymap.collision.solve_with_collisions`).
    """
    mu = as_moments(mu)
    if mu.size != 2 * r:
        raise InputError(f"need exactly {2 * r} moments for rank {r}")
    if collisions:
        sol = solve_with_collisions(mu, r, cluster_tol=cluster_tol, minor_tol=minor_tol)
        return SolveResult(
            sol.signal,
            r,
            residual=sol.residual,
            condition=sol.condition,
            extra={
                "nodes": list(sol.nodes),
                "configuration": [list(b) for b in sol.configuration.blocks],
                "beta": list(sol.beta),
            },
        )
    q = solve_denominator(mu, r, minor_tol)
    cond = float(np.linalg.cond(build_hankel(mu, r)[:, :r]))
    R = RationalFunction(solve_numerator(mu, q), q, condition=cond)
    return _decompose(mu, R, r)


def _unpack(theta, D):
    nodes, amps, pos = [], [], 0
    for d in D:
        amps.append(theta[pos : pos + d])
        nodes.append(theta[pos + d])
        pos += d + 1
    return nodes, amps


def _forward(nodes, amps, count):
    m = np.zeros(count, complex)
    for x, a in zip(nodes, amps):
        for ell, c in enumerate(a):
            m += c * falling_power(x, ell, count)
    return m


def _jacobian(nodes, amps, count):
    D = [len(a) for a in amps]
    V = confluent_vandermonde(nodes, [d + 1 for d in D], rows=count)
    E = block_diag(*[_e_block(a) for a in amps])
    return V, E


def _e_block(a) -> np.ndarray:
    d = len(a)
    E = np.eye(d + 1, dtype=complex)
    E[d, d] = 0
    E[1:, d] = a
    return E


def jacobian_factorization(signal: Signal) -> tuple[ConfluentVandermonde, np.ndarray]:
    """Factors V, E of the Jacobian J = V @ E of the map to the first s + r moments.

    Parameters are ordered per node as (a_0, ..., a_{d-1}, node). V is the
    confluent Vandermonde matrix with multiplicities d_j + 1, E is block
    diagonal with blocks that are the identity except for a last column
    (0, a_0, ..., a_{d-1}).
    """
    n = signal.size + signal.rank
    return _jacobian(signal.nodes, signal.amplitudes, n)


def invert_multiplicity_restricted(
    mu_star,
    D0: Sequence[int],
    initial,
    rtol: float = 1e-10,
    max_iter: int = 100,
    max_halvings: int = 20,
) -> SolveResult:
    """Damped Newton solve of the square system on the first s + r moments with fixed D0.

    ``initial`` is a Signal or a sequence of (node, amplitudes) pairs with the
    multiplicity pattern D0; convergence is local only.
    """
    mu_star = as_moments(mu_star)
    D0 = [int(d) for d in D0]
    n = len(D0) + sum(D0)
    if mu_star.size != n:
        raise InputError(f"need exactly s + r = {n} moments")
    support = initial.support if isinstance(initial, Signal) else initial
    if [len(a) for _, a in support] != D0:
        raise InputError("initial guess does not match the multiplicity vector")
    theta = np.concatenate([np.append(np.asarray(a, complex), x) for x, a in support])

    target = rtol * max(float(np.linalg.norm(mu_star)), np.finfo(float).tiny)

    def residual(th):
        nodes, amps = _unpack(th, D0)
        return _forward(nodes, amps, n) - mu_star

    F = residual(theta)
    for it in range(max_iter + 1):
        if np.linalg.norm(F) <= target:
            nodes, amps = _unpack(theta, D0)
            signal = Signal(tuple(zip(nodes, [tuple(a) for a in amps])))
            V, E = _jacobian(nodes, amps, n)
            return SolveResult(
                signal,
                sum(D0),
                residual=float(np.linalg.norm(F)) / max(float(np.linalg.norm(mu_star)), 1e-300),
                condition=float(np.linalg.cond(V.matrix @ E)),
                extra={"iterations": it},
            )
        if it == max_iter:
            break
        nodes, amps = _unpack(theta, D0)
        try:
            V, E = _jacobian(nodes, amps, n)
        except InputError as exc:
            raise DegenerateJacobian(str(exc)) from exc
        J = V.matrix @ E
        if not np.linalg.cond(J) < MAX_CONDITION:
            raise DegenerateJacobian("Jacobian is singular at the current iterate")
        step = np.linalg.solve(J, -F)
        lam = 1.0
        for _ in range(max_halvings + 1):
            trial = theta + lam * step
            F_trial = residual(trial)
            if np.linalg.norm(F_trial) < np.linalg.norm(F):
                break
            lam /= 2
        else:
            raise NoConvergence("line search failed to reduce the residual")
        theta, F = trial, F_trial
    raise NoConvergence(f"no convergence in {max_iter} iterations")


@dataclass(frozen=True)
class ErrorBoundReport:
    amplitude_bounds: tuple[tuple[float, ...], ...]
    node_bounds: tuple[float, ...]
    separation: float
    size: int
    rank: int
    eps: float

    def as_dict(self) -> dict:
        return {
            "amplitude_bounds": [list(b) for b in self.amplitude_bounds],
            "node_bounds": list(self.node_bounds),
            "separation": self.separation,
            "s0": self.size,
            "r0": self.rank,
            "eps": self.eps,
        }


def separation(nodes) -> float:
    nodes = np.asarray(nodes, complex)
    if nodes.size < 2:
        raise UndefinedSeparation("separation needs at least two nodes")
    diff = np.abs(nodes[:, None] - nodes[None, :])
    return float(np.min(diff[~np.eye(nodes.size, dtype=bool)]))


def error_bounds(signal: Signal, eps: float) -> ErrorBoundReport:
    """First-order error bounds for the multiplicity-restricted problem at noise level ``eps``.

        |da_{j,l}| <= 2/l! (2/delta)^(s+r) (1/2 + (s+r)/delta)^(d_j-l) (1 + |a_{j,l-1}|/|a_{j,d_j-1}|) eps
        |dx_j|     <= 2/d_j! (2/delta)^(s+r) / |a_{j,d_j-1}| eps

    with delta the minimal node separation and a_{j,-1} = 0.
    """
    delta = separation(signal.nodes)
    s0, r0 = signal.size, signal.rank
    n = s0 + r0
    common = (2 / delta) ** n
    amp_bounds, node_bounds = [], []
    for _, a in signal.support:
        d = len(a)
        top = abs(a[-1])
        row = []
        for ell in range(d):
            prev = abs(a[ell - 1]) if ell > 0 else 0.0
            row.append(2 / math.factorial(ell) * common * (0.5 + n / delta) ** (d - ell) * (1 + prev / top) * eps)
        amp_bounds.append(tuple(row))
        node_bounds.append(2 / math.factorial(d) * common / top * eps)
    return ErrorBoundReport(tuple(amp_bounds), tuple(node_bounds), delta, s0, r0, eps)


def amplitude_block(a) -> np.ndarray:
    """Anti-triangular block A with A[p, q] = C(p+q, p) a_{p+q} for p + q < d, else 0."""
    d = len(a)
    A = np.zeros((d, d), complex)
    for p in range(d):
        for q in range(d - p):
            A[p, q] = math.comb(p + q, p) * a[p + q]
    return A


def hankel_factorization_check(signal: Signal) -> float:
    """Max deviation of V diag(A_j) V^T from M_r, relative to max |M_r|."""
    r = signal.rank
    if r == 0:
        return 0.0
    V = confluent_vandermonde(signal.nodes, signal.multiplicities).matrix
    A = block_diag(*[amplitude_block(a) for a in signal.amplitudes])
    M = build_hankel(moments(signal, 2 * r), r)[:, :r]
    return float(np.max(np.abs(V @ A @ V.T - M)) / np.max(np.abs(M)))

