import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dd_monomial, random_signal
from pronymap.collision import (
    Configuration,
    build_basis,
    chakalov_expansion,
    collocation_matrix,
    dd_evaluate,
    dd_on_cauchy_kernel,
    divided_difference,
    is_subordinated,
    reassemble,
    solve_in_dd_basis,
    solve_with_collisions,
)
from pronymap.errors import DegenerateBasis, DegenerateLeadingMinor, InputError, PoleError
from pronymap.signal import Signal, moments, signal_distance
from pronymap.solver import invert_rank_restricted
from pronymap.stieltjes import stieltjes_transform

node_lists = st.lists(
    st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=1, max_size=5
)


def row(nodes, count):
    return np.array([dd_evaluate(nodes, k) for k in range(count)])


def example_signal(t, eps):
    return Signal(((t, (-1 / eps,)), (t + eps, (1 / eps,))))


@pytest.mark.parametrize("nodes, k, value", [((1, 3), 2, 4), ((2, 2), 3, 12), ((0, 1, 2), 2, 1)])
def test_dd_examples(nodes, k, value):
    assert dd_evaluate(nodes, k) == pytest.approx(value)


def test_dd_needs_nodes():
    with pytest.raises(InputError):
        dd_evaluate([], 2)


@settings(max_examples=200, deadline=None)
@given(node_lists, st.integers(0, 9))
def test_dd_matches_complete_homogeneous(nodes, k):
    # distinct-ish nodes: rounding the list keeps repeated values exact
    nodes = [complex(round(z.real, 1), round(z.imag, 1)) for z in nodes]
    expected = dd_monomial(nodes, k)
    assert abs(dd_evaluate(nodes, k) - expected) <= 1e-8 * max(1, abs(expected))


@pytest.mark.parametrize("seed", range(10))
def test_dd_permutation_symmetry(seed):
    rng = np.random.default_rng(seed)
    base = rng.normal(size=3) + 1j * rng.normal(size=3)
    nodes = list(base[rng.integers(0, 3, 5)])
    ref = [dd_evaluate(nodes, k) for k in range(9)]
    for perm in itertools.islice(itertools.permutations(nodes), 0, 120, 7):
        assert np.allclose([dd_evaluate(perm, k) for k in range(9)], ref, rtol=1e-9, atol=1e-9)


def test_dd_annihilation_and_normalisation(rng):
    nodes = rng.normal(size=4)
    p = rng.normal(size=4)  # cubic, descending coefficients
    val = divided_difference(nodes, lambda x, j: np.polyval(np.polyder(p, j), x) / math.factorial(j))
    assert val == pytest.approx(p[0])
    for k in range(3):
        assert abs(dd_evaluate(nodes, k)) < 1e-12


def test_dd_continuity_through_collision():
    t = 0.7
    confluent = [dd_evaluate((t, t), k) for k in range(8)]
    errs = [max(abs(dd_evaluate((t, t + e), k) - confluent[k]) for k in range(8)) for e in 10.0 ** -np.arange(1, 8)]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-5


def test_cauchy_kernel_examples():
    assert dd_on_cauchy_kernel((0, 1), 2) == pytest.approx(0.5)
    assert dd_on_cauchy_kernel((0, 0), 2) == pytest.approx(0.25)
    with pytest.raises(PoleError):
        dd_on_cauchy_kernel((0, 1), 1)


@pytest.mark.parametrize("seed", range(10))
def test_cauchy_kernel_identity(seed):
    rng = np.random.default_rng(seed)
    nodes = list((rng.normal(size=3) + 1j * rng.normal(size=3))[rng.integers(0, 3, 4)])
    z = 3 + 2j
    assert dd_on_cauchy_kernel(nodes, z) == pytest.approx(1 / np.prod([z - x for x in nodes]))


def test_chakalov_examples():
    t = 0.3
    assert signal_distance(chakalov_expansion((t, t)), Signal(((t, (0, 1)),))) < 1e-14
    assert signal_distance(chakalov_expansion((0, 1)), Signal(((0, (-1,)), (1, (1,))))) < 1e-14
    assert signal_distance(chakalov_expansion((0, 0, 0)), Signal(((0, (0, 0, 0.5)),))) < 1e-14


@pytest.mark.parametrize("seed", range(10))
def test_chakalov_transform_and_moments(seed):
    rng = np.random.default_rng(seed)
    nodes = list((rng.normal(size=3) + 1j * rng.normal(size=3))[rng.integers(0, 3, 5)])
    F = chakalov_expansion(nodes)
    z = 4 - 1j
    assert stieltjes_transform(F)(z) == pytest.approx(1 / np.prod([z - x for x in nodes]))
    assert np.allclose(moments(F, 10), row(nodes, 10), rtol=1e-9, atol=1e-9)


def test_configuration_validation():
    assert Configuration(((1, 0), (2,))).blocks == ((0, 1), (2,))
    with pytest.raises(InputError):
        Configuration(((0,), (2,)))
    C = Configuration(((0, 2), (1,)))
    assert C.order == 3 and C.multiplicities == (2, 1)
    assert C.prefixes() == [(0,), (0, 2), (1,)]


def test_subordination_examples():
    C = Configuration(((0, 1), (2,)))
    assert is_subordinated((1, 1, 2), C)
    assert not is_subordinated((1, 2, 1), C)
    assert is_subordinated((1, 2, 3), Configuration(((0,), (1,), (2,))))


def test_basis_single_block_is_prefix_basis(rng):
    w = rng.normal(size=3)
    B = build_basis(w, Configuration.single(3))
    assert B.elements == ((0,), (0, 1), (0, 1, 2))
    assert np.linalg.matrix_rank(B.matrix) == 3


def test_basis_example_elements():
    t, eps = 0.5, 0.1
    B = build_basis((t, t + eps), Configuration.single(2))
    delta, quotient = B.element_signals()
    assert signal_distance(delta, Signal(((t, (1,)),))) < 1e-14
    assert signal_distance(quotient, example_signal(t, eps)) < 1e-10


def test_basis_not_subordinated():
    with pytest.raises(DegenerateBasis):
        build_basis((1, 2, 1), Configuration(((0, 1), (2,))))


def test_solve_in_basis_examples():
    C = Configuration.single(2)
    sol = solve_in_dd_basis([0, 1, 2.1, 3.31], (1, 1.1), C)
    assert np.allclose(sol.beta, [0, 1], atol=1e-10)
    sol = solve_in_dd_basis([2, 6, 18, 54], (3, 3), C)
    assert np.allclose(sol.beta, [2, 0], atol=1e-12)
    assert np.allclose(solve_in_dd_basis(np.zeros(4), (1, 2), C).beta, 0)


def test_reassemble_matches_moments(rng):
    w = rng.normal(size=3)
    C = Configuration(((0, 2), (1,)))
    beta = rng.normal(size=3)
    B = build_basis(w, C)
    F = reassemble(beta, B)
    assert np.allclose(moments(F, 6), beta @ B.matrix)


@pytest.mark.parametrize("eps", [1e-1, 1e-2, 1e-3, 1e-4])
def test_collision_family(eps):
    t = 0.5
    mu = moments(example_signal(t, eps), 4)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sol = solve_with_collisions(mu, 2, cluster_tol=1.0, reference=(t, t + eps))
    assert np.allclose(sol.beta, [0, 1], atol=1e-6)
    amp = max(abs(a) for _, amps in sol.signal.support for a in amps)
    assert amp * eps == pytest.approx(1, rel=0.01)
    assert np.max(np.abs(moments(sol.signal, 4) - mu)) <= 1e-7 * np.max(np.abs(mu))


def test_exact_double_node():
    t = 0.5
    mu = moments(Signal(((t, (0, 1)),)), 4)
    sol = solve_with_collisions(mu, 2)
    assert np.allclose(sol.beta, [0, 1], atol=1e-8)
    assert signal_distance(sol.signal, Signal(((t, (0, 1)),))) < 1e-8


@pytest.mark.parametrize("seed", range(5))
def test_separated_matches_rank_restricted(seed):
    rng = np.random.default_rng(seed)
    F = random_signal(rng, 3, maxmult=1)
    mu = moments(F, 6)
    sol = solve_with_collisions(mu, 3)
    assert len(sol.configuration.blocks) == 3
    assert signal_distance(sol.signal, invert_rank_restricted(mu, 3).signal) < 1e-8


def test_collisions_degenerate_block():
    with pytest.raises(DegenerateLeadingMinor):
        solve_with_collisions([0, 0, 0, 1], 2)


def test_cluster_ambiguity_warning():
    mu = moments(Signal(((0, (1,)), (0.05, (1,)), (0.12, (1,)))), 6)
    with pytest.warns(UserWarning):
        solve_with_collisions(mu, 3, cluster_tol=0.06)


@pytest.mark.parametrize("seed", range(5))
def test_popoviciu_refinement(seed):
    rng = np.random.default_rng(seed)
    r = 5
    w = rng.normal(size=r) + 1j * rng.normal(size=r)
    count = 2 * r
    for k in range(1, r + 1):
        for sigma in itertools.combinations(range(r), k):
            windows = [w[j : j + k] for j in range(sigma[0], sigma[-1] - k + 2)]
            A = np.array([row(win, count) for win in windows]).T
            b = row([w[i] for i in sigma], count)
            coef, *_ = np.linalg.lstsq(A, b, rcond=None)
            assert np.linalg.norm(A @ coef - b) <= 1e-9 * max(1, np.linalg.norm(b))


@pytest.mark.parametrize("seed", range(5))
def test_span_lemma(seed):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=4) + 1j * rng.normal(size=4)
    w[2] = w[0]  # a collision inside the first block
    C = Configuration(((0, 2, 3), (1,)))
    nu = collocation_matrix(w, C)
    S = nu[:3].T  # prefixes of the first block
    for k in range(1, 4):
        for Y in itertools.combinations((0, 2, 3), k):
            b = row([w[i] for i in Y], 8)
            coef, *_ = np.linalg.lstsq(S, b, rcond=None)
            assert np.linalg.norm(S @ coef - b) <= 1e-9 * max(1, np.linalg.norm(b))


def test_beta_continuous_across_collision_stratum():
    t = 0.5
    base = moments(Signal(((t, (0, 1)),)), 4)
    push = moments(Signal(((0.2, (1,)), (-0.4, (0.5,)))), 4)

    def beta(s):
        sol = solve_with_collisions(base + s * push, 2, cluster_tol=1.0, reference=(t, t))
        return sol.beta

    b0 = beta(0.0)
    for sign in (1, -1):
        gaps = [np.max(np.abs(beta(sign * 1e-2 / 2**n) - b0)) for n in range(8)]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 1e-3
