"""Moment Hankel matrices, numerical rank and solvability strata."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .signal import as_moments

#: Default relative singular-value threshold for rank decisions.
RANK_TOL = 1e-10
#: Default threshold on sigma_min(M_r) / sigma_max(H) for a nonsingular leading block.
#: Sits a few hundred ulps above the rounding floor; kept apart from RANK_TOL
#: because genuine signals reach margins far below it.
MINOR_TOL = 1e-13


def build_hankel(mu, d: int) -> np.ndarray:
    """The d x (d+1) matrix with entry (i, j) = m_{i+j}; needs exactly 2d moments."""
    mu = as_moments(mu)
    if d < 1 or mu.size != 2 * d:
        raise InputError(f"need exactly 2d = {2 * d} moments, got {mu.size}")
    i, j = np.indices((d, d + 1))
    return mu[i + j]


def leading_block(H: np.ndarray, e: int) -> np.ndarray:
    """The square e x e upper-left block M_e."""
    return H[:e, :e]


def numeric_rank(H: np.ndarray, tol: float = RANK_TOL) -> int:
    """Count of singular values above ``tol`` times the largest one."""
    if not 0 < tol < 1:
        raise InputError("tol must lie in (0, 1)")
    if H.size == 0:
        return 0
    sv = np.linalg.svd(H, compute_uv=False)
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


def minor_margin(M: np.ndarray, scale: float) -> float:
    """Smallest singular value of the square block ``M`` relative to ``scale``.

    This is the relative distance of M to the nearest singular matrix. A
    product-of-row-norms normalisation of |det M| is not used: for genuine
    rank-r signals that ratio falls far below any usable threshold.
    """
    if M.shape[0] == 0:
        return 1.0
    if scale == 0:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[-1] / scale)


@dataclass(frozen=True)
class SolvabilityReport:
    rank: int
    leading_minor_magnitude: float
    solvable: bool
    tolerance: float
    margin: float = 1.0
    minor_tolerance: float = MINOR_TOL

    @property
    def stratum(self) -> str:
        return "solvable" if self.solvable else "unsolvable"

    def as_dict(self) -> dict:
        return {
            "rank": self.rank,
            "minor": self.leading_minor_magnitude,
            "stratum": self.stratum,
            "tolerance": self.tolerance,
            "minor_tolerance": self.minor_tolerance,
            "margin": self.margin,
        }


def classify(mu, d: int, tol: float = RANK_TOL, minor_tol: float = MINOR_TOL) -> SolvabilityReport:
    """Place ``mu`` in the stratum Sigma_r (solvable) or Sigma'_r (unsolvable).

    r is the numerical rank of the d x (d+1) Hankel matrix; the input is
    solvable iff r = 0 or sigma_min(M_r) > minor_tol * sigma_max(H). The
    report carries |det M_r| and that margin.
    """
    H = build_hankel(mu, d)
    r = numeric_rank(H, tol)
    if r == 0:
        return SolvabilityReport(0, 0.0, True, tol, 1.0, minor_tol)
    M = leading_block(H, r)
    margin = minor_margin(M, float(np.linalg.norm(H, 2)))
    return SolvabilityReport(r, float(abs(np.linalg.det(M))), margin > minor_tol, tol, margin, minor_tol)
