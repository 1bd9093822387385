"""Divided differences as elements of the Prony space, and collision-robust bases.

Index sets and configurations use 0-based indices into the node vector.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import DegenerateBasis, InputError, PoleError
from .hankel import MINOR_TOL
from .pade import solve_denominator
from .signal import Signal, as_moments, configuration_of, match_nodes, moments
from .stieltjes import coefficient_noise, find_poles, principal_parts

#: Nodes closer than this take the confluent (derivative) branch of the recursion.
DD_TOL = 1e-13


def divided_difference(nodes: Sequence[complex], taylor: Callable[[complex, int], complex]) -> complex:
    """Divided difference of f on ``nodes`` by the recursive rule.

    ``taylor(x, j)`` must return f^(j)(x) / j!. Nodes are first grouped so that
    equal values sit next to each other (the functional is symmetric), which
    makes every window with equal endpoints constant; those windows use the
    derivative clause.
    """
    cfg = configuration_of(nodes, DD_TOL)
    z = [t for t, m in zip(cfg.nodes, cfg.multiplicities) for _ in range(m)]
    n = len(z)
    table = [complex(taylor(x, 0)) for x in z]
    for j in range(1, n):
        table = [
            complex(taylor(z[i], j)) if z[i + j] == z[i] else (table[i + 1] - table[i]) / (z[i + j] - z[i])
            for i in range(n - j)
        ]
    return table[0]


def dd_evaluate(nodes: Sequence[complex], k: int) -> complex:
    """Divided difference of the monomial x**k on ``nodes``."""
    if len(nodes) == 0:
        raise InputError("need at least one node")

    def taylor(x, j):
        return math.comb(k, j) * x ** (k - j) if j <= k else 0.0

    return divided_difference(nodes, taylor)


def dd_on_cauchy_kernel(nodes: Sequence[complex], z: complex) -> complex:
    """Divided difference of f_z(x) = 1/(z - x); equals 1/prod(z - x_i)."""
    if any(abs(z - x) <= 1e-12 for x in nodes):
        raise PoleError(f"z = {z} coincides with a node")
    return divided_difference(nodes, lambda x, j: (z - x) ** (-j - 1))


def chakalov_expansion(nodes: Sequence[complex]) -> Signal:
    """The divided difference on ``nodes`` written in the standard delta basis.

    Coefficients come from the partial-fraction decomposition of 1/q(z),
    q(z) = prod (z - x_i), so that the Stieltjes transform of the result is 1/q.
    """
    cfg = configuration_of(nodes, DD_TOL)
    poles = list(zip(cfg.nodes, cfg.multiplicities))
    amps = principal_parts(np.ones(1, complex), poles)
    return Signal(tuple(zip(cfg.nodes, amps)))


@dataclass(frozen=True)
class Configuration:
    """A partition of range(r) into index blocks, each kept sorted."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(i) for i in b)) for b in self.blocks)
        flat = sorted(i for b in blocks for i in b)
        if any(len(b) == 0 for b in blocks) or flat != list(range(len(flat))):
            raise InputError(f"{self.blocks!r} is not a partition of range(r)")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def single(cls, r: int) -> "Configuration":
        return cls((tuple(range(r)),))

    @property
    def order(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def prefixes(self) -> list[tuple[int, ...]]:
        """The index sets X_{j,m}: first m elements of block j, for every j and m."""
        return [b[:m] for b in self.blocks for m in range(1, len(b) + 1)]


def is_subordinated(w: Sequence[complex], C: Configuration, tol: float = DD_TOL) -> bool:
    """True iff every pair of (numerically) equal coordinates of ``w`` shares a block."""
    if len(w) != C.order:
        raise InputError("node vector length must equal the configuration order")
    block_of = {i: b for b, block in enumerate(C.blocks) for i in block}
    for i in range(len(w)):
        for j in range(i + 1, len(w)):
            if abs(w[i] - w[j]) <= tol and block_of[i] != block_of[j]:
                return False
    return True


def collocation_matrix(w: Sequence[complex], C: Configuration, count: Optional[int] = None) -> np.ndarray:
    """Rows: basis elements Delta_{X_{j,m}}(w); columns: monomials x^0..x^{count-1}."""
    if len(w) != C.order:
        raise InputError("node vector length must equal the configuration order")
    count = 2 * C.order if count is None else count
    w = [complex(x) for x in w]
    return np.array([[dd_evaluate([w[i] for i in X], k) for k in range(count)] for X in C.prefixes()])


def _condition(A: np.ndarray) -> float:
    sv = np.linalg.svd(A, compute_uv=False)
    return float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf


@dataclass(frozen=True, eq=False)
class CollisionBasis:
    configuration: Configuration
    nodes: tuple[complex, ...]
    elements: tuple[tuple[int, ...], ...]
    matrix: np.ndarray
    condition: float

    def element_signals(self) -> list[Signal]:
        return [chakalov_expansion([self.nodes[i] for i in X]) for X in self.elements]


def build_basis(w: Sequence[complex], C: Configuration) -> CollisionBasis:
    """Prefix divided-difference basis B_C(w) with its collocation matrix."""
    if not is_subordinated(w, C):
        raise DegenerateBasis("node vector is not subordinated to the configuration")
    nu = collocation_matrix(w, C)
    return CollisionBasis(C, tuple(complex(x) for x in w), tuple(C.prefixes()), nu, _condition(nu))


class BasisSolution(NamedTuple):
    beta: np.ndarray
    residual: float
    basis: CollisionBasis


def solve_in_dd_basis(mu, w: Sequence[complex], C: Configuration) -> BasisSolution:
    """Least-squares coefficients beta with sum beta * nu[:, k] = m_k, k < 2r.

    ``residual`` is the 2-norm of the moment misfit.
    """
    mu = as_moments(mu)
    if mu.size != 2 * C.order:
        raise InputError(f"need exactly {2 * C.order} moments")
    basis = build_basis(w, C)
    beta, *_ = np.linalg.lstsq(basis.matrix.T, mu, rcond=None)
    residual = float(np.linalg.norm(basis.matrix.T @ beta - mu))
    return BasisSolution(beta, residual, basis)


def reassemble(beta, basis: CollisionBasis) -> Signal:
    """Signal sum beta_i * Delta_i in the standard basis."""
    total = Signal()
    for b, element in zip(beta, basis.element_signals()):
        total = total + element.scaled(b)
    return total


class CollisionSolution(NamedTuple):
    nodes: tuple[complex, ...]
    configuration: Configuration
    beta: np.ndarray
    signal: Signal
    residual: float
    condition: float


def group_clusters(points: Sequence[complex], cluster_tol: float) -> list[list[int]]:
    """Single-linkage groups of indices, ordered by first appearance."""
    pts = np.asarray(points, complex)
    adjacency = np.abs(pts[:, None] - pts[None, :]) <= cluster_tol
    _, labels = connected_components(adjacency.astype(np.int8), directed=False)
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, []).append(i)
    return list(groups.values())


def solve_with_collisions(
    mu,
    r: int,
    cluster_tol: Optional[float] = None,
    minor_tol: float = MINOR_TOL,
    reference: Optional[Sequence[complex]] = None,
) -> CollisionSolution:
    """Rank-restricted inversion in a divided-difference basis.

    Roots of the Padé denominator (numerically multiple roots snapped to their
    centroid) are grouped into clusters of diameter scale ``cluster_tol``;
    each cluster becomes one block of the configuration, and the moments are
    expanded in the prefix basis of that configuration. ``reference``, when
    given, orders the nodes by nearest match to it (label threading along a
    sweep).
    """
    mu = as_moments(mu)
    if mu.size != 2 * r:
        raise InputError(f"need exactly {2 * r} moments")
    q = solve_denominator(mu, r, minor_tol)
    block = mu[np.add.outer(np.arange(r), np.arange(r))]
    poles = find_poles(q, coeff_tol=coefficient_noise(np.linalg.cond(block)))
    w = [tau for tau, m in poles for _ in range(m)]
    if cluster_tol is None:
        cluster_tol = 1e-2 * (1 + max(abs(x) for x in w))

    if reference is not None:
        if len(reference) != r:
            raise InputError("reference must have r nodes")
        w = [w[i] for i in match_nodes(w, reference)]

    groups = group_clusters(w, cluster_tol)
    if len(groups) > 1:
        gaps = [
            min(abs(w[i] - w[j]) for i in a for j in b)
            for n, a in enumerate(groups)
            for b in groups[n + 1 :]
        ]
        if min(gaps) < 3 * cluster_tol:
            warnings.warn("clusters closer than 3*cluster_tol; configuration may be ambiguous")
    C = Configuration(tuple(tuple(g) for g in groups))
    beta, _, basis = solve_in_dd_basis(mu, w, C)
    signal = reassemble(beta, basis)
    scale = max(float(np.max(np.abs(mu))), np.finfo(float).tiny)
    residual = float(np.max(np.abs(moments(signal, mu.size) - mu))) / scale
    return CollisionSolution(tuple(w), C, beta, signal, residual, basis.condition)
