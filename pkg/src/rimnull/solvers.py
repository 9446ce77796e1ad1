"""Weight selection: closed-form, minimum-norm, gradient projection, annealing, serial search.

All solvers minimise ``||A w - y||**2`` where row k of ``A`` is the segment
response at angle k and ``y`` holds ``-E_f(psi_k)`` (or ``kappa`` for the
boresight row), so a zero cost means ``E_f(psi_k) + e_k^T w = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConditioningError, DegenerateConstraintError, DivergenceError, DomainError

UNCONSTRAINED = "unconstrained"
UNIT_MODULUS = "unit-modulus"

DEFAULT_DELTA = 0.028
MAX_GRAM_CONDITION = 1e12


@dataclass
class ConstraintSet:
    """Stacked constraint rows; row 0 is the boresight row when ``mainlobe`` is set."""

    A: np.ndarray
    y: np.ndarray
    angles: np.ndarray
    mainlobe: bool = False
    kappa: complex | None = None
    delta: float | None = None

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        self.y = np.atleast_1d(np.asarray(self.y, dtype=complex))
        self.angles = np.atleast_1d(np.asarray(self.angles, dtype=float))
        k, n = self.A.shape
        if k == 0 or n == 0:
            raise DomainError("constraint matrix is empty")
        if k > n:
            raise DomainError(f"{k} constraint rows exceed {n} segments")
        if self.y.shape != (k,) or self.angles.shape != (k,):
            raise DomainError("A, y and angles disagree on the number of rows")

    @property
    def n_rows(self):
        return self.A.shape[0]

    @property
    def n_segments(self):
        return self.A.shape[1]


def build_constraints(reflector, null_angles, mainlobe=False, delta=DEFAULT_DELTA):
    """Constraint set for nulls at ``null_angles`` (rad), optionally holding boresight.

    The boresight row asks the rim to contribute ``kappa = delta * E_f(0)``.
    """
    rows, targets, angles = [], [], []
    kappa = None
    if mainlobe:
        kappa = delta * reflector.fixed_field(0.0).co
        rows.append(reflector.segment_response(0.0).co)
        targets.append(kappa)
        angles.append(0.0)
    for psi in np.atleast_1d(null_angles):
        rows.append(reflector.segment_response(psi).co)
        targets.append(-reflector.fixed_field(psi).co)
        angles.append(float(psi))
    return ConstraintSet(A=np.array(rows), y=np.array(targets), angles=np.array(angles),
                         mainlobe=mainlobe, kappa=kappa, delta=delta if mainlobe else None)


def alphabet(M):
    """M-ary unit-circle phases exp(j 2 pi m / M), m = 1..M."""
    if M < 2:
        raise DomainError(f"alphabet needs M >= 2, got {M}")
    return np.exp(2j * np.pi * np.arange(1, M + 1) / M)


@dataclass
class WeightVector:
    values: np.ndarray
    kind: str | int = UNCONSTRAINED

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if isinstance(self.kind, (int, np.integer)):
            W = alphabet(int(self.kind))
            dist = np.min(np.abs(self.values[:, None] - W[None, :]), axis=1)
            if np.any(dist > 1e-12):
                raise DomainError(f"weights are not all in the {self.kind}-ary alphabet")
        elif self.kind == UNIT_MODULUS:
            if np.any(np.abs(np.abs(self.values) - 1.0) > 1e-12):
                raise DomainError("weights are not unit modulus")
        elif self.kind != UNCONSTRAINED:
            raise DomainError(f"unknown alphabet {self.kind!r}")

    def __len__(self):
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    @property
    def label(self):
        return "continuous" if isinstance(self.kind, str) else str(self.kind)


@dataclass
class SolverReport:
    """Solver output; ``cost`` is recomputed from scratch at the returned weights."""

    weights: WeightVector
    cost: float
    cost_history: np.ndarray
    iterations: int
    converged: bool
    seed: int | None = None
    method: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def best_history(self):
        return np.minimum.accumulate(self.cost_history)


def cost(C, w):
    """||A w - y||^2."""
    w = np.asarray(w, dtype=complex)
    if w.shape != (C.n_segments,):
        raise DomainError(f"weight length {w.shape} does not match {C.n_segments} segments")
    r = C.A @ w - C.y
    return float(np.real(np.vdot(r, r)))


class ResidualState:
    """Residual ``A w - y`` maintained under single-entry changes of ``w`` in O(K)."""

    def __init__(self, C, w):
        self.A = C.A
        self.w = np.array(w, dtype=complex)
        if self.w.shape != (C.n_segments,):
            raise DomainError("weight length does not match constraint set")
        self.residual = C.A @ self.w - C.y

    @property
    def cost(self):
        return float(np.real(np.vdot(self.residual, self.residual)))

    def trial(self, n, value):
        """Residual if entry n were set to ``value`` (state unchanged)."""
        return self.residual + self.A[:, n] * (value - self.w[n])

    def update(self, n, value):
        self.residual = self.trial(n, value)
        self.w[n] = value
        return self


def optimal_single(e_psi, E_f):
    """Unconstrained weights nulling one angle: w = -E_f e* / ||e||^2."""
    e = np.asarray(getattr(e_psi, "co", e_psi), dtype=complex)
    norm2 = float(np.real(np.vdot(e, e)))
    if norm2 == 0.0:
        raise DegenerateConstraintError("segment response vector is zero")
    return WeightVector(-complex(E_f) * np.conj(e) / norm2)


def min_norm_multi(C, max_condition=MAX_GRAM_CONDITION):
    """Minimum-norm solution of A w = y: w = A^H (A A^H)^-1 y."""
    gram = C.A @ C.A.conj().T
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > max_condition:
        raise ConditioningError(f"Gram matrix condition {cond:.3e} exceeds {max_condition:.1e}", cond)
    return WeightVector(C.A.conj().T @ np.linalg.solve(gram, C.y))


def project_unit_modulus(x):
    """Entrywise exp(j angle x); zero entries map to 1."""
    x = np.asarray(x, dtype=complex)
    # exact power-of-two rescale keeps subnormal inputs at full precision
    _, exp = np.frexp(np.maximum(np.abs(x.real), np.abs(x.imag)))
    x = np.ldexp(x.real, -exp) + 1j * np.ldexp(x.imag, -exp)
    mag = np.abs(x)
    out = np.ones_like(x)
    nz = mag > 0
    out[nz] = x[nz] / mag[nz]
    # renormalise to pull |out| to 1 within a couple of ulps
    out[nz] /= np.abs(out[nz])
    return out


def power_iteration(G, tol=1e-6, max_iters=1000):
    """Largest eigenvalue of a Hermitian PSD matrix."""
    v = np.ones(G.shape[0], dtype=complex) / math.sqrt(G.shape[0])
    lam = 0.0
    for _ in range(max_iters):
        gv = G @ v
        nrm = np.linalg.norm(gv)
        if nrm == 0.0:
            return 0.0
        v = gv / nrm
        new = float(np.real(np.vdot(v, G @ v)))
        if abs(new - lam) <= tol * abs(new):
            return new
        lam = new
    return lam


def gradient_projection(C, gamma=0.5, max_iters=20000, tol=1e-12, dither=0.1, seed=0, callback=None):
    """Unit-modulus least squares by projected gradient descent.

    Step ``alpha = gamma / lambda_max(A^H A)``; starts from the phase of the
    minimum-norm solution plus a seeded Gaussian phase dither of ``dither``
    rad.  Without the dither a single-row problem never moves: every entry
    of the start is already co-phased with the gradient.  Stops when the
    relative cost change drops below ``tol`` or the cost reaches zero.
    """
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    A, AH = C.A, C.A.conj().T
    lam = power_iteration(A @ AH)
    if lam <= 0.0:
        raise DegenerateConstraintError("constraint matrix is zero")
    alpha = gamma / lam
    w = project_unit_modulus(min_norm_multi(C).values)
    if dither:
        rng = np.random.default_rng(seed)
        w = project_unit_modulus(w * np.exp(1j * dither * rng.standard_normal(C.n_segments)))
    r = A @ w - C.y
    history = [float(np.real(np.vdot(r, r)))]
    converged = False
    k = 0
    for k in range(1, max_iters + 1):
        w = project_unit_modulus(w - alpha * (AH @ r))
        r = A @ w - C.y
        c = float(np.real(np.vdot(r, r)))
        if not math.isfinite(c):
            raise DivergenceError(f"cost became {c} at iteration {k}")
        history.append(c)
        if callback is not None:
            callback(k, w)
        prev = history[-2]
        if c == 0.0 or abs(prev - c) < tol * prev:
            converged = True
            break
    return SolverReport(weights=WeightVector(w, UNIT_MODULUS), cost=cost(C, w), cost_history=np.array(history),
                        iterations=k, converged=converged, seed=seed, method="gp",
                        extra={"alpha": alpha, "lambda_max": lam})


def acceptance_probability(delta_e, k):
    """Chance of taking a move that changes the (scaled) cost by -delta_e at step k.

    Temperature at step k (1-based) is 1/k, so a worsening move (delta_e < 0)
    is accepted with exp(delta_e * k).
    """
    if delta_e >= 0:
        return 1.0
    return math.exp(delta_e * k)


def default_schedule_length(n_segments, M):
    return int(round(20 * n_segments * math.log(M)))


def segment_energy(C):
    """Mean single-segment energy sum_k |A[k, n]|^2 over segments."""
    return float(np.mean(np.sum(np.abs(C.A) ** 2, axis=0)))


def simulated_annealing(C, M=4, T=None, seed=0, energy_scale=None):
    """Single-flip annealing over the M-ary alphabet with temperatures 1, 1/2, ..., 1/T.

    Energies are ``cost / energy_scale``.  The default scale is
    ``T * segment_energy(C)``: the final temperature equals the size of one
    segment's contribution, whatever the field units.  Returns the best
    state visited.
    """
    if M < 2:
        raise DomainError("M must be >= 2")
    N = C.n_segments
    if T is None:
        T = default_schedule_length(N, M)
    if T < 1:
        raise DomainError("schedule length must be >= 1")
    if energy_scale is None:
        energy_scale = T * segment_energy(C)
    if not energy_scale > 0:
        raise DomainError("energy_scale must be positive")
    W = alphabet(M)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, M, size=N)
    picks = rng.integers(0, N, size=T)
    shifts = rng.integers(1, M, size=T)
    draws = rng.random(T)

    # pure-Python complex arithmetic is much faster than numpy for K ~ 1..3
    cols = [list(map(complex, C.A[:, n])) for n in range(N)]
    Wl = [complex(v) for v in W]
    state = idx.tolist()
    r = list(map(complex, C.A @ W[idx] - C.y))
    cur = sum((z.real * z.real + z.imag * z.imag) for z in r)
    best, best_state = cur, list(state)
    history = [cur]
    inv_scale = 1.0 / energy_scale
    for k in range(1, T + 1):
        n = int(picks[k - 1])
        old = state[n]
        new = (old + int(shifts[k - 1])) % M
        dw = Wl[new] - Wl[old]
        col = cols[n]
        trial = [ri + ai * dw for ri, ai in zip(r, col)]
        c = sum((z.real * z.real + z.imag * z.imag) for z in trial)
        delta_e = (cur - c) * inv_scale
        if delta_e >= 0 or draws[k - 1] < acceptance_probability(delta_e, k):
            state[n] = new
            r = trial
            cur = c
            if cur < best:
                best, best_state = cur, list(state)
        history.append(cur)
    w = W[np.array(best_state)]
    return SolverReport(weights=WeightVector(w, M), cost=cost(C, w), cost_history=np.array(history),
                        iterations=T, converged=True, seed=seed, method="sa",
                        extra={"M": M, "energy_scale": energy_scale})


def serial_search(C, start=None):
    """Binary baseline: one pass in index order keeping whichever of +1/-1 costs less.

    Starts from the standard dish (all +1) unless ``start`` is given.
    """
    N = C.n_segments
    w = np.ones(N, dtype=complex) if start is None else np.array(start, dtype=complex)
    if np.any((w != 1) & (w != -1)):
        raise DomainError("serial search runs on the binary alphabet {+1, -1}")
    state = ResidualState(C, w)
    history = [state.cost]
    for n in range(N):
        flipped = -state.w[n]
        trial = state.trial(n, flipped)
        if float(np.real(np.vdot(trial, trial))) < history[-1]:
            state.update(n, flipped)
        history.append(state.cost)
    return SolverReport(weights=WeightVector(state.w.copy(), 2), cost=cost(C, state.w), cost_history=np.array(history),
                        iterations=N, converged=True, method="serial")
