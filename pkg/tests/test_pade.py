import numpy as np
import pytest
from numpy.polynomial import polynomial as npoly

from oracles import random_signal
from pronymap.errors import DegenerateLeadingMinor, Unsolvable
from pronymap.pade import agreement_order, pade_solve, solve_denominator, solve_numerator, taylor_expand
from pronymap.signal import Signal, moments
from pronymap.stieltjes import RationalFunction, stieltjes_transform


def eps_family(eps):
    return np.array([0, eps, 1, 0], complex)


def unit(ell, n=10):
    mu = np.zeros(n)
    mu[ell] = 1
    return mu


@pytest.mark.parametrize("eps", [0.1, 0.01])
def test_denominator_worked_example(eps):
    c = solve_denominator(eps_family(eps), 2)
    assert np.allclose(c, [1 / eps**2, -1 / eps, 1], rtol=1e-12)


def test_denominator_single_node():
    assert np.allclose(solve_denominator([2, 6, 18, 54], 1), [-3, 1])


def test_denominator_random_nodes(rng):
    F = random_signal(rng, 3, maxmult=1)
    q = solve_denominator(moments(F, 6), 3)
    assert np.allclose(q, npoly.polyfromroots(F.nodes), atol=1e-9)


def test_denominator_singular_block():
    with pytest.raises(DegenerateLeadingMinor):
        solve_denominator(unit(3, 6), 3)


def test_numerator_worked_example():
    eps = 0.1
    mu = eps_family(eps)
    b = solve_numerator(mu, solve_denominator(mu, 2))
    assert np.allclose(b, [eps, 0], atol=1e-14)


def test_numerator_single_node():
    assert np.allclose(solve_numerator([2, 6, 18, 54], [-3, 1]), [2])


def test_numerator_two_nodes(rng):
    F = random_signal(rng, 2, maxmult=1)
    (x1, (a1,)), (x2, (a2,)) = F.support
    mu = moments(F, 4)
    b = solve_numerator(mu, solve_denominator(mu, 2))
    expected = npoly.polyadd(a1 * npoly.polyfromroots([x2]), a2 * npoly.polyfromroots([x1]))
    assert np.allclose(b, expected, atol=1e-10)


def test_taylor_examples():
    assert np.allclose(taylor_expand(RationalFunction([1], [0, 1]), 4), [1, 0, 0, 0])
    assert np.allclose(taylor_expand(RationalFunction([2], [-3, 1]), 4), [2, 6, 18, 54])
    eps = 0.1
    x = (1 + 1j * np.sqrt(3) * np.array([1, -1])) / (2 * eps)
    R = RationalFunction([eps], npoly.polyfromroots(x))
    assert np.allclose(taylor_expand(R, 4), eps_family(eps), atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_taylor_recurrence(seed):
    rng = np.random.default_rng(seed)
    F = random_signal(rng, int(rng.integers(1, 6)))
    R = stieltjes_transform(F)
    alpha = taylor_expand(R, 12)
    c, r = R.denominator, R.order
    for k in range(r, 12):
        assert alpha[k] == pytest.approx(-sum(c[r - s] * alpha[k - s] for s in range(1, r + 1)), abs=1e-8 * np.max(np.abs(alpha)))


def test_pade_worked_example():
    eps = 0.1
    R = pade_solve(eps_family(eps), 2)
    assert np.allclose(R.denominator, [1 / eps**2, -1 / eps, 1])
    assert np.allclose(R.numerator, [eps])
    assert R.condition > 1


def test_pade_unsolvable():
    with pytest.raises(Unsolvable) as info:
        pade_solve(unit(5), 5)
    assert info.value.report.rank == 5


def test_pade_pure_power():
    R = pade_solve(unit(2), 5)
    assert np.allclose(R.numerator, [1]) and np.allclose(R.denominator, [0, 0, 0, 1])
    assert np.allclose(taylor_expand(R, 10), unit(2))


def test_pade_zero():
    R = pade_solve(np.zeros(4), 2)
    assert R.order == 0


def test_agreement_examples():
    R = RationalFunction([1], [0, 1])
    mu = np.array([1, 0, 0, 0, 0, 1])
    assert agreement_order(mu, R) == 5
    assert agreement_order(taylor_expand(R, 6), R) == 6


@pytest.mark.parametrize("seed", range(20))
def test_pade_round_trip(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 7))
    F = random_signal(rng, int(rng.integers(1, d + 1)), maxmult=1)
    R0 = stieltjes_transform(F)
    mu = taylor_expand(R0, 2 * d)
    R = pade_solve(mu, d)
    assert R.order == R0.order
    # cross-multiplied identity P Q0 = P0 Q
    lhs = npoly.polymul(R.numerator, R0.denominator)
    rhs = npoly.polymul(R0.numerator, R.denominator)
    n = max(lhs.size, rhs.size)
    scale = np.max(np.abs(rhs))
    assert np.max(np.abs(np.pad(lhs, (0, n - lhs.size)) - np.pad(rhs, (0, n - rhs.size)))) <= 1e-8 * scale
    assert agreement_order(mu, R) == 2 * d


def test_pade_agreement_lower_rank():
    # deg Q = 2 < d = 4: agreement reaches at least d + 2
    F = Signal(((0.5, (1,)), (-1, (2,))))
    mu = moments(F, 8)
    R = pade_solve(mu, 4)
    assert R.order == 2
    assert agreement_order(mu, R) >= 6
