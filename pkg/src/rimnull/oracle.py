"""Brute-force and numerical cross-checks used by the test-suite.

Nothing here calls into the solver code: residuals are recomputed directly
so a bug in the incremental solver path cannot hide itself.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InstanceTooLargeError
from .geometry import cap_area
from .pofield import integrate_band

MAX_ENUMERATION = 2**20


@dataclass
class ToyInstance:
    A: np.ndarray
    y: np.ndarray
    M: int

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        self.y = np.atleast_1d(np.asarray(self.y, dtype=complex))
        if self.M**self.A.shape[1] > MAX_ENUMERATION:
            raise InstanceTooLargeError(f"{self.M}^{self.A.shape[1]} candidates exceed {MAX_ENUMERATION}")

    @property
    def symbols(self):
        return np.exp(2j * np.pi * np.arange(1, self.M + 1) / self.M)


def random_instance(rng, N, M, K=2):
    A = (rng.standard_normal((K, N)) + 1j * rng.standard_normal((K, N))) / math.sqrt(2)
    y = (rng.standard_normal(K) + 1j * rng.standard_normal(K)) * math.sqrt(N / 2)
    return ToyInstance(A, y, M)


def residual_cost(A, y, w):
    r = np.asarray(A) @ np.asarray(w) - np.asarray(y)
    return float(np.sum(r.real**2 + r.imag**2))


def exhaustive_search(inst, reverse=False, chunk=4096):
    """Global minimum of ||A w - y||^2 over all M^N alphabet vectors.

    Ties go to the lexicographically smallest symbol-index vector, whichever
    order the enumeration runs in.
    """
    N = inst.A.shape[1]
    W = inst.symbols
    order = range(inst.M - 1, -1, -1) if reverse else range(inst.M)
    best_cost, best_idx = math.inf, None
    it = itertools.product(order, repeat=N)
    while True:
        block = np.array(list(itertools.islice(it, chunk)), dtype=int)
        if block.size == 0:
            break
        r = W[block] @ inst.A.T - inst.y
        costs = np.sum(r.real**2 + r.imag**2, axis=1)
        for j in np.flatnonzero(costs <= costs.min()):
            c, idx = costs[j], tuple(block[j])
            if c < best_cost or (c == best_cost and idx < best_idx):
                best_cost, best_idx = float(c), idx
    return W[list(best_idx)], best_cost


def finite_difference_gradient(A, y, w, h=1e-5):
    """Central-difference gradient of ||A w - y||^2.

    Returns g with g_n = dC/dRe(w_n) + j dC/dIm(w_n), which for this cost
    equals 2 A^H (A w - y) (twice the conjugate Wirtinger derivative).
    """
    w = np.asarray(w, dtype=complex)
    g = np.zeros_like(w)
    for n in range(len(w)):
        parts = []
        for step in (h, 1j * h):
            wp, wm = w.copy(), w.copy()
            wp[n] += step
            wm[n] -= step
            parts.append((residual_cost(A, y, wp) - residual_cost(A, y, wm)) / (2 * h))
        g[n] = parts[0] + 1j * parts[1]
    return g


def analytic_gradient(A, y, w):
    A = np.asarray(A)
    return 2.0 * A.conj().T @ (A @ np.asarray(w) - np.asarray(y))


@dataclass
class RefinementTable:
    psis: np.ndarray
    refine: list
    values: np.ndarray  # (levels, len(psis)) complex co-pol

    def relative_changes(self):
        return np.abs(np.diff(self.values, axis=0)) / np.abs(self.values[1:])

    def observed_order(self):
        """log2 of successive difference ratios (needs >= 3 levels)."""
        d = np.abs(np.diff(self.values, axis=0))
        return np.log2(d[:-1] / d[1:])

    def rows(self):
        rel = self.relative_changes()
        for i, r in enumerate(self.refine):
            for j, psi in enumerate(self.psis):
                change = rel[i - 1, j] if i else float("nan")
                yield r, math.degrees(psi), self.values[i, j], change


def quadrature_refinement(psis, model, feed, levels=3, theta_hi=None, cell_fraction=0.125):
    """Fixed-surface co-pol field at grid refinements 1, 2, 4, ... (streamed)."""
    if levels < 2:
        raise ValueError("need at least two refinement levels")
    psis = np.atleast_1d(np.asarray(psis, dtype=float))
    theta_hi = model.rim_start_angle if theta_hi is None else theta_hi
    refine = [2**i for i in range(levels)]
    vals = np.array([integrate_band(psis, model, feed, 0.0, theta_hi, refine=r, cell_fraction=cell_fraction)[:, 0]
                     for r in refine])
    return RefinementTable(psis=psis, refine=refine, values=vals)


def cap_area_by_quadrature(model, theta_lo, theta_hi):
    """Surface area of a theta band by 1-D quadrature of the surface of revolution."""
    from scipy import integrate

    F = model.focal_length
    rho = lambda t: 2.0 * F * math.tan(t / 2.0)
    lo, hi = rho(theta_lo), rho(theta_hi)
    val, _ = integrate.quad(lambda r: 2.0 * math.pi * r * math.sqrt(1.0 + (r / (2.0 * F)) ** 2), lo, hi,
                            epsabs=0.0, epsrel=1e-13)
    return val


def grid_area(model, feed, theta_lo, theta_hi, refine=1, cell_fraction=0.125):
    """Sum of quadrature cell weights (constant-integrand check)."""
    from .pofield import _grid_rows

    return float(sum(np.sum(dA) for _, _, dA in _grid_rows(model, feed, theta_lo, theta_hi, refine, cell_fraction)))


def analytic_cap_band(model, theta_lo, theta_hi):
    return float(cap_area(theta_hi, model.focal_length) - cap_area(theta_lo, model.focal_length))
