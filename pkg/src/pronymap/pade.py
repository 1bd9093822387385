"""Diagonal Padé approximation at infinity from a moment vector.

The denominator comes from the homogeneous Hankel system (normalised to a
monic polynomial), the numerator from the anti-triangular system obtained by
matching the polynomial part of Q(z) * S(z), where S(z) = sum m_k z^(-k-1).
"""
from __future__ import annotations

import numpy as np

from .errors import DegenerateLeadingMinor, InputError, Unsolvable
from .hankel import MINOR_TOL, RANK_TOL, build_hankel, classify, minor_margin
from .signal import as_moments
from .stieltjes import RationalFunction, trim


def solve_denominator(mu, r: int, minor_tol: float = MINOR_TOL) -> np.ndarray:
    """Monic Q of degree r with M~_r (c_0, ..., c_{r-1}, 1)^T = 0."""
    mu = as_moments(mu)
    if r < 1 or mu.size < 2 * r:
        raise InputError(f"need at least {2 * r} moments for r = {r}")
    H = build_hankel(mu[: 2 * r], r)
    M = H[:, :r]
    if not minor_margin(M, float(np.linalg.norm(H, 2))) > minor_tol:
        raise DegenerateLeadingMinor(f"leading {r}x{r} Hankel block is singular")
    c = np.linalg.solve(M, -H[:, r])
    return np.append(c, 1.0 + 0j)


def solve_numerator(mu, q) -> np.ndarray:
    """P with b_{r-1-i} = sum_{j<=i} m_j c_{r-i+j}, for Q = sum c_j z^j monic of degree r."""
    mu = as_moments(mu)
    q = trim(q)
    r = q.size - 1
    if r < 1:
        raise InputError("denominator must have degree >= 1")
    if mu.size < r:
        raise InputError(f"need at least {r} moments")
    b = np.zeros(r, complex)
    for i in range(r):
        b[r - 1 - i] = np.dot(mu[: i + 1], q[r - i : r + 1])
    return b


def taylor_expand(R: RationalFunction, count: int) -> np.ndarray:
    """First ``count`` coefficients alpha_k of R(z) = sum alpha_k z^(-k-1).

    The first r come from long division; the rest from the recurrence
    alpha_k = -sum_{s=1}^{r} c_{r-s} alpha_{k-s}.
    """
    P, Q = R.numerator, R.denominator
    r = R.order
    alpha = np.zeros(count, complex)
    if r == 0:
        return alpha
    b = np.zeros(r, complex)
    b[: P.size] = P
    for n in range(count):
        acc = b[r - 1 - n] if n < r else 0j
        for k in range(max(0, n - r), n):
            acc -= Q[r - n + k] * alpha[k]
        alpha[n] = acc
    return alpha


def pade_solve(mu, d: int, tol: float = RANK_TOL, minor_tol: float = MINOR_TOL) -> RationalFunction:
    """The unique P/Q with deg P < deg Q <= d whose first 2d Taylor coefficients are ``mu``.

    Raises :class:`Unsolvable` when ``mu`` lies on an unsolvability stratum.
    The result carries the condition number of the leading block M_r.
    """
    mu = as_moments(mu)
    report = classify(mu, d, tol, minor_tol)
    if not report.solvable:
        raise Unsolvable(
            f"rank {report.rank} with vanishing leading minor: no Padé solution", report
        )
    r = report.rank
    if r == 0:
        return RationalFunction.zero()
    q = solve_denominator(mu, r, minor_tol)
    p = solve_numerator(mu, q)
    cond = float(np.linalg.cond(build_hankel(mu[: 2 * r], r)[:, :r]))
    return RationalFunction(p, q, condition=cond)


def agreement_order(mu, R: RationalFunction, rtol: float = 1e-10) -> int:
    """First index where the Taylor coefficients of R leave ``mu``; len(mu) if none.

    Coefficients agree when |alpha_k - m_k| <= rtol * max(1, max |m|).
    """
    mu = as_moments(mu)
    alpha = taylor_expand(R, mu.size)
    scale = max(1.0, float(np.max(np.abs(mu))))
    bad = np.flatnonzero(np.abs(alpha - mu) > rtol * scale)
    return int(bad[0]) if bad.size else mu.size
