"""Spike-train signals and the forward moment map.

A signal is a finite combination of shifted delta functions and their
derivatives,

    F(x) = sum_j sum_l a[j][l] * delta^(l)(x - x_j),

and its k-th moment is ``sum_j sum_l a[j][l] * k!/(k-l)! * x_j**(k-l)``,
i.e. the pairing <delta^(l)_x, f> is taken to be f^(l)(x) with no sign.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import InputError

#: Nodes closer than this are treated as one node when building a Signal.
MERGE_TOL = 1e-12


@dataclass(frozen=True)
class Signal:
    """Immutable signal; ``support`` is a tuple of ``(node, amplitudes)``.

    The constructor normalises its input: nodes within ``MERGE_TOL`` of each
    other are merged (amplitudes added), trailing zero amplitudes are trimmed,
    and nodes whose amplitudes all vanish are dropped.
    """

    support: tuple[tuple[complex, tuple[complex, ...]], ...] = ()

    def __post_init__(self):
        merged: list[tuple[complex, list[complex]]] = []
        for node, amps in self.support:
            node = complex(node)
            amps = [complex(a) for a in np.atleast_1d(amps)]
            if not (np.isfinite(node) and all(np.isfinite(a) for a in amps)):
                raise InputError("signal entries must be finite")
            for i, (other, other_amps) in enumerate(merged):
                if abs(other - node) <= MERGE_TOL:
                    n = max(len(other_amps), len(amps))
                    other_amps += [0j] * (n - len(other_amps))
                    for l, a in enumerate(amps):
                        other_amps[l] += a
                    break
            else:
                merged.append((node, amps))

        support = []
        for node, amps in merged:
            while amps and amps[-1] == 0:
                amps.pop()
            if amps:
                support.append((node, tuple(amps)))
        object.__setattr__(self, "support", tuple(support))

    @classmethod
    def from_pairs(cls, nodes: Iterable, amplitudes: Iterable) -> "Signal":
        return cls(tuple(zip(nodes, amplitudes)))

    @property
    def nodes(self) -> np.ndarray:
        return np.array([n for n, _ in self.support], dtype=complex)

    @property
    def amplitudes(self) -> list[tuple[complex, ...]]:
        return [a for _, a in self.support]

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(len(a) for _, a in self.support)

    @property
    def size(self) -> int:
        """Number of distinct nodes, s(F)."""
        return len(self.support)

    @property
    def rank(self) -> int:
        return sum(self.multiplicities)

    def __add__(self, other: "Signal") -> "Signal":
        return Signal(self.support + other.support)

    def scaled(self, c: complex) -> "Signal":
        return Signal(tuple((x, tuple(c * a for a in amps)) for x, amps in self.support))


def falling_power(x: complex, ell: int, count: int) -> np.ndarray:
    """Return ``k!/(k-ell)! * x**(k-ell)`` for k = 0..count-1 (zero when k < ell).

    This is the ell-th derivative of x**k, the moment of delta^(ell) at x.
    """
    out = np.zeros(count, dtype=complex)
    for k in range(ell, count):
        out[k] = math.perm(k, ell) * complex(x) ** (k - ell)
    return out


def moments(signal: Signal, count: int) -> np.ndarray:
    """Power moments m_0..m_{count-1} of ``signal``."""
    if count < 1:
        raise InputError("moment count must be >= 1")
    m = np.zeros(count, dtype=complex)
    for x, amps in signal.support:
        for ell, a in enumerate(amps):
            m += a * falling_power(x, ell, count)
    return m


def as_moments(values) -> np.ndarray:
    """Validate and convert a measurement vector to a 1-D complex array."""
    mu = np.asarray(values, dtype=complex).ravel()
    if mu.size < 1:
        raise InputError("moment vector must be non-empty")
    if not np.all(np.isfinite(mu)):
        raise InputError("moment vector must be finite")
    return mu


class NodeConfiguration(NamedTuple):
    size: int
    nodes: tuple[complex, ...]
    multiplicities: tuple[int, ...]


def configuration_of(w: Sequence[complex], tol: float = 0.0) -> NodeConfiguration:
    """Distinct values of ``w`` in order of first appearance, with their counts.

    Coordinates within ``tol`` of an already seen value are counted as equal
    to it (exact comparison by default).
    """
    w = [complex(x) for x in w]
    if not w:
        raise InputError("node vector must be non-empty")
    distinct: list[complex] = []
    counts: list[int] = []
    for x in w:
        for i, t in enumerate(distinct):
            if abs(x - t) <= tol:
                counts[i] += 1
                break
        else:
            distinct.append(x)
            counts.append(1)
    return NodeConfiguration(len(distinct), tuple(distinct), tuple(counts))


def _pair_cost(a, b) -> float:
    if a is None and b is None:
        return 0.0
    if a is None or b is None:
        _, amps = a if b is None else b
        return max(abs(v) for v in amps)
    (xa, aa), (xb, ab) = a, b
    n = max(len(aa), len(ab))
    aa = np.pad(np.asarray(aa, complex), (0, n - len(aa)))
    ab = np.pad(np.asarray(ab, complex), (0, n - len(ab)))
    return max(abs(xa - xb), float(np.max(np.abs(aa - ab))))


def signal_distance(a: Signal, b: Signal) -> float:
    """Bottleneck distance between two signals, minimised over node matchings.

    Matched nodes cost max(|node difference|, max amplitude difference) with
    amplitude vectors zero-padded; a node left unmatched costs its largest
    amplitude modulus.
    """
    n = max(a.size, b.size)
    if n == 0:
        return 0.0
    left = list(a.support) + [None] * (n - a.size)
    right = list(b.support) + [None] * (n - b.size)
    cost = np.array([[_pair_cost(p, q) for q in right] for p in left])

    # smallest threshold admitting a perfect matching
    levels = np.unique(cost)
    lo, hi = 0, len(levels) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        graph = csr_matrix((cost <= levels[mid]).astype(np.int8))
        match = maximum_bipartite_matching(graph, perm_type="column")
        if np.all(match >= 0):
            hi = mid
        else:
            lo = mid + 1
    return float(levels[lo])


def match_nodes(found: Sequence[complex], reference: Sequence[complex]) -> np.ndarray:
    """Permutation p minimising sum |found[p[i]] - reference[i]| (equal lengths)."""
    found = np.asarray(found, complex)
    reference = np.asarray(reference, complex)
    cost = np.abs(reference[:, None] - found[None, :])
    _, cols = linear_sum_assignment(cost)
    return cols
