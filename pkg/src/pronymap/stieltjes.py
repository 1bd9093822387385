"""Stieltjes transform of signals and its inverse (elementary-fraction decomposition).

Polynomials are plain complex arrays of coefficients in ascending degree
order, as in :mod:`numpy.polynomial.polynomial`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import InputError, NotIrreducible
from .signal import Signal

#: Relative coefficient noise below which a root cluster counts as one multiple root.
COEFF_TOL = 1e-13
#: Relative size of P at a pole below which P and Q are taken to share that root.
IRREDUCIBLE_TOL = 1e-10


def coefficient_noise(condition: Optional[float]) -> float:
    """Relative coefficient noise to expect from a solve with the given condition number."""
    if condition is None or not np.isfinite(condition):
        return COEFF_TOL
    return max(COEFF_TOL, 10 * condition * np.finfo(float).eps)


def trim(p) -> np.ndarray:
    """Drop exactly-zero leading coefficients (keeps at least one entry)."""
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    nz = np.flatnonzero(p)
    return p[: nz[-1] + 1] if nz.size else p[:1] * 0


def degree(p) -> int:
    p = trim(p)
    return -1 if (p.size == 1 and p[0] == 0) else p.size - 1


@dataclass(frozen=True, eq=False)
class RationalFunction:
    """P(z)/Q(z) with Q monic and deg P < deg Q.

    ``condition`` optionally carries the condition number of the Hankel block
    the function was solved from.
    """

    numerator: np.ndarray
    denominator: np.ndarray
    condition: Optional[float] = field(default=None, compare=False)

    def __post_init__(self):
        P, Q = trim(self.numerator), trim(self.denominator)
        if degree(Q) < 0:
            raise InputError("denominator must be nonzero")
        P, Q = P / Q[-1], Q / Q[-1]
        if degree(P) >= degree(Q):
            raise InputError("need deg P < deg Q")
        object.__setattr__(self, "numerator", P)
        object.__setattr__(self, "denominator", Q)

    @classmethod
    def zero(cls) -> "RationalFunction":
        return cls(np.zeros(1, complex), np.ones(1, complex))

    @property
    def order(self) -> int:
        """deg Q."""
        return degree(self.denominator)

    def __call__(self, z):
        return npoly.polyval(z, self.numerator) / npoly.polyval(z, self.denominator)

    def __repr__(self):
        return f"RationalFunction(P={self.numerator!r}, Q={self.denominator!r})"


def taylor_shift(p, tau: complex) -> np.ndarray:
    """Coefficients of p(tau + u) in powers of u (repeated synthetic division)."""
    c = np.array(trim(p), dtype=complex)
    n = c.size
    for k in range(n - 1):
        for i in range(n - 2, k - 1, -1):
            c[i] += tau * c[i + 1]
    return c


def _shift_scale(p, tau: complex) -> np.ndarray:
    """Size of each shifted coefficient under norm-wise noise: max|p| * sum_i C(i,k) |tau|^(i-k)."""
    p = trim(p)
    return float(np.max(np.abs(p))) * np.real(taylor_shift(np.ones(p.size), abs(tau)))


def stieltjes_transform(signal: Signal) -> RationalFunction:
    """R(z) = sum_j sum_l a[j][l] * l! / (z - x_j)^(l+1) over a common denominator."""
    if signal.size == 0:
        return RationalFunction.zero()
    Q = np.ones(1, complex)
    for x, amps in signal.support:
        Q = npoly.polymul(Q, npoly.polyfromroots([x] * len(amps)))
    P = np.zeros(1, complex)
    for j, (x, amps) in enumerate(signal.support):
        others = np.ones(1, complex)
        for i, (y, bmps) in enumerate(signal.support):
            if i != j:
                others = npoly.polymul(others, npoly.polyfromroots([y] * len(bmps)))
        d = len(amps)
        for ell, a in enumerate(amps):
            term = npoly.polymul(others, npoly.polyfromroots([x] * (d - ell - 1)))
            P = npoly.polyadd(P, math.factorial(ell) * a * term)
    return RationalFunction(P, Q)


def _is_multiple_root(q, tau: complex, m: int, coeff_tol: float) -> bool:
    shifted = taylor_shift(q, tau)
    scale = _shift_scale(q, tau)
    return bool(np.all(np.abs(shifted[:m]) <= coeff_tol * scale[:m]))


def find_poles(q, cluster_tol: Optional[float] = None, coeff_tol: float = COEFF_TOL):
    """Roots of the monic polynomial ``q`` grouped into (location, multiplicity).

    Roots come from companion-matrix eigenvalues. Clusters are merged
    greedily, tightest candidate first, into their centroid when either every
    member lies within ``cluster_tol`` of the merged centroid, or ``q`` is
    indistinguishable from a polynomial with a root of that multiplicity at the
    centroid given relative coefficient noise ``coeff_tol``. The second rule
    catches the eps**(1/m) splitting of a genuine m-fold root.
    """
    q = trim(q)
    n = degree(q)
    if n < 1:
        raise InputError("polynomial must have degree >= 1")
    q = q / q[-1]
    roots = npoly.polyroots(q) if n > 1 else np.array([-q[0]])
    if cluster_tol is None:
        cluster_tol = 1e-7 * (1 + float(np.max(np.abs(roots))))
    # test multiplicity on q(rho * u), whose roots lie in the unit disc,
    # so the norm-wise noise model does not depend on the root scale
    rho = max(1.0, float(np.max(np.abs(roots))))
    q_unit = q * rho ** (np.arange(n + 1) - n)

    clusters = [[r] for r in roots]
    while len(clusters) > 1:
        centroids = [np.mean(c) for c in clusters]
        best = None
        # a split m-fold root only passes the test as a whole, so grow each
        # seed by its nearest neighbours rather than merging pairwise
        for i in range(len(clusters)):
            order = sorted(range(len(clusters)), key=lambda j: abs(centroids[j] - centroids[i]))
            for k in range(2, len(clusters) + 1):
                group = sorted(order[:k])
                members = [r for j in group for r in clusters[j]]
                tau = np.mean(members)
                spread = max(abs(r - tau) for r in members)
                if best is not None and spread >= best[0]:
                    break
                if spread <= cluster_tol or _is_multiple_root(q_unit, tau / rho, len(members), coeff_tol):
                    best = (spread, group)
                    break
        if best is None:
            break
        group = best[1]
        clusters = [c for j, c in enumerate(clusters) if j not in group] + [
            [r for j in group for r in clusters[j]]
        ]
    return [(complex(np.mean(c)), len(c)) for c in clusters]


def principal_parts(P, poles) -> list[tuple[complex, ...]]:
    """Signal amplitudes of P / prod (z - tau_j)^m_j at each pole.

    For a pole tau of multiplicity m with cofactor C, the local expansion
    P/C = sum_k h_k (z - tau)^k gives l! * a_l = h_{m-1-l}.
    """
    out = []
    for j, (tau, m) in enumerate(poles):
        C = np.ones(1, complex)
        for i, (sigma, mi) in enumerate(poles):
            if i != j:
                C = npoly.polymul(C, npoly.polyfromroots([sigma] * mi))
        p = np.zeros(m, complex)
        ps = taylor_shift(P, tau)[:m]
        p[: ps.size] = ps
        c = np.zeros(m, complex)
        cs = taylor_shift(C, tau)[:m]
        c[: cs.size] = cs
        h = np.zeros(m, complex)
        for k in range(m):
            h[k] = (p[k] - np.dot(c[1 : k + 1], h[k - 1 :: -1][:k])) / c[0]
        out.append(tuple(h[m - 1 - ell] / math.factorial(ell) for ell in range(m)))
    return out


def partial_fractions(
    R: RationalFunction,
    cluster_tol: Optional[float] = None,
    coeff_tol: float = COEFF_TOL,
    irreducible_tol: float = IRREDUCIBLE_TOL,
) -> Signal:
    """Invert the Stieltjes transform: the signal whose transform is ``R``.

    Poles are located by :func:`find_poles`; clustered poles are snapped to
    their centroid before residues are taken.
    """
    if R.order == 0:
        return Signal()
    P = R.numerator
    if degree(P) < 0:
        raise NotIrreducible("zero numerator over a nonconstant denominator")
    poles = find_poles(R.denominator, cluster_tol, coeff_tol)
    for tau, _ in poles:
        scale = float(np.sum(np.abs(P) * abs(tau) ** np.arange(P.size)))
        if abs(npoly.polyval(tau, P)) <= irreducible_tol * scale:
            raise NotIrreducible(f"numerator vanishes at pole {tau}")
    amps = principal_parts(P, poles)
    return Signal(tuple((tau, a) for (tau, _), a in zip(poles, amps)))
