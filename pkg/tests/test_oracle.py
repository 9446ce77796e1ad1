import numpy as np
import pytest

from rimnull.errors import InstanceTooLargeError
from rimnull.oracle import ToyInstance, exhaustive_search, random_instance, residual_cost
from rimnull.solvers import (
    ConstraintSet,
    alphabet,
    gradient_projection,
    min_norm_multi,
    serial_search,
    simulated_annealing,
)


def as_constraints(inst):
    return ConstraintSet(A=inst.A, y=inst.y, angles=np.zeros(len(inst.y)))


def test_exhaustive_is_order_independent(rng):
    for _ in range(5):
        inst = random_instance(rng, N=7, M=4)
        w_f, c_f = exhaustive_search(inst)
        w_r, c_r = exhaustive_search(inst, reverse=True)
        assert c_f == c_r
        np.testing.assert_array_equal(w_f, w_r)
        assert c_f == pytest.approx(residual_cost(inst.A, inst.y, w_f))


def test_exhaustive_tie_break_is_lexicographic():
    # a zero matrix makes every candidate tie; the first symbol index wins
    inst = ToyInstance(np.zeros((1, 3)), np.ones(1), 4)
    w, c = exhaustive_search(inst, reverse=True)
    assert c == 1.0
    np.testing.assert_allclose(w, np.full(3, alphabet(4)[0]))


@pytest.mark.parametrize("M", [2, 4])
def test_exhaustive_finds_planted_solution(rng, M):
    W = alphabet(M)
    A = rng.standard_normal((2, 8)) + 1j * rng.standard_normal((2, 8))
    planted = W[rng.integers(0, M, 8)]
    inst = ToyInstance(A, A @ planted, M)
    w, c = exhaustive_search(inst)
    assert c == pytest.approx(0.0, abs=1e-20)
    np.testing.assert_allclose(w, planted)


def test_too_large_instance_is_refused():
    with pytest.raises(InstanceTooLargeError):
        ToyInstance(np.ones((1, 11)), np.ones(1), 4)


def test_residual_cost_is_plain_norm():
    A = np.array([[1.0, 2.0j]])
    assert residual_cost(A, np.array([1.0]), np.array([1.0, 1.0])) == pytest.approx(4.0)


@pytest.mark.parametrize("N,M", [(8, 2), (6, 4)])
def test_annealing_close_to_global_minimum(rng, N, M):
    hits = 0
    for seed in range(10):
        inst = random_instance(rng, N=N, M=M)
        _, best = exhaustive_search(inst)
        rep = simulated_annealing(as_constraints(inst), M=M, T=5000, seed=seed)
        hits += rep.cost <= 1.05 * best
    assert hits >= 9


def test_annealing_recovers_planted_solution(rng):
    W = alphabet(4)
    A = rng.standard_normal((2, 6)) + 1j * rng.standard_normal((2, 6))
    planted = W[rng.integers(0, 4, 6)]
    rep = simulated_annealing(ConstraintSet(A=A, y=A @ planted, angles=np.zeros(2)), M=4, T=5000, seed=0)
    assert rep.cost == pytest.approx(0.0, abs=1e-20)


@pytest.mark.parametrize("M", [2, 4])
def test_exhaustive_lower_bounds_every_solver(rng, M):
    for _ in range(3):
        N = 10 if M == 2 else 8
        inst = random_instance(rng, N=N, M=M)
        C = as_constraints(inst)
        _, best = exhaustive_search(inst)
        costs = [simulated_annealing(C, M=M, T=2000).cost]
        if M == 2:
            costs.append(serial_search(C).cost)
        assert all(best <= c * (1 + 1e-12) for c in costs)
        # the unit-modulus relaxation is not tied to the alphabet; it only has to improve on the start
        assert gradient_projection(C).cost <= residual_cost(C.A, C.y, np.ones(N))


def test_min_norm_zero_residual_on_planted(rng):
    W = alphabet(4)
    for _ in range(5):
        A = rng.standard_normal((2, 6)) + 1j * rng.standard_normal((2, 6))
        inst = ToyInstance(A, A @ W[rng.integers(0, 4, 6)], 4)
        _, best = exhaustive_search(inst)
        w = min_norm_multi(as_constraints(inst)).values
        assert best == pytest.approx(0.0, abs=1e-20)
        assert residual_cost(A, inst.y, w) <= 1e-20 * np.vdot(inst.y, inst.y).real
