"""Derivative-free maximization of the CHSH correlator.

Every search is a single deterministic stream of objective evaluations:
a lattice (plus seeded random points), then Nelder-Mead refinement from the
best few of those.  The budget cuts that stream, so a larger budget only
ever extends it and the incumbent is non-decreasing in the budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iproduct
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .correlator import TSIRELSON, chsh_closed_form
from .errors import ParameterError, TsirelsonViolation
from .modular import ModularParams
from .spin import AngleSet, chsh_spin, state_vector

GUARD = 1e-9
REFERENCE_POINT = ModularParams(0.01, 0.564058, 0.495456)
QFT_LIMITS = ((0.0, 5.0), (0.0, 5.0), (0.001, 0.9999))
DEFAULT_BUDGET = 4000


@dataclass(frozen=True)
class OptimizationResult:
    best_params: ModularParams | AngleSet
    best_value: float
    starts: int
    evaluations: int
    seed: int

    def as_dict(self) -> dict:
        return {
            "best_params": self.best_params.as_dict(),
            "best_value": self.best_value,
            "starts": self.starts,
            "evaluations": self.evaluations,
            "seed": self.seed,
        }


class _BudgetExhausted(Exception):
    pass


class _Tracker:
    """Counts evaluations, enforces the budget and the 2 sqrt 2 guardrail."""

    def __init__(self, fn: Callable[[np.ndarray], float], budget: int):
        self.fn = fn
        self.budget = budget
        self.count = 0
        self.best_x: np.ndarray | None = None
        self.best_value = -math.inf

    def __call__(self, x) -> float:
        if self.count >= self.budget:
            raise _BudgetExhausted
        x = np.array(x, dtype=float)
        v = float(self.fn(x))
        self.count += 1
        if v > TSIRELSON + GUARD:
            raise TsirelsonViolation(f"objective {v!r} exceeds 2 sqrt 2 at {x.tolist()}")
        # strict: the first incumbent wins ties
        if v > self.best_value:
            self.best_value, self.best_x = v, x
        return v


def _run(tracker: _Tracker, candidates: list[np.ndarray], refine: Callable[[np.ndarray], None], n_refine: int) -> int:
    """Evaluate candidates, then refine the best ``n_refine`` in (value, index) order."""
    scored = []
    try:
        for i, x in enumerate(candidates):
            scored.append((-tracker(x), i))
        scored.sort()
        for _, i in scored[:n_refine]:
            refine(candidates[i])
    except _BudgetExhausted:
        pass
    return len(scored)


def _check_bounds(bounds) -> np.ndarray:
    b = np.asarray(bounds, dtype=float)
    if b.shape != (3, 2):
        raise ParameterError(f"bounds must be three (low, high) pairs, got shape {b.shape}")
    for (lo, hi), (llo, lhi), name in zip(b, QFT_LIMITS, ("eta", "eta_prime", "lambda")):
        if not (llo <= lo <= hi <= lhi):
            raise ParameterError(f"{name} bounds ({lo}, {hi}) must satisfy {llo} <= low <= high <= {lhi}")
    return b


def _qft_value(x: np.ndarray) -> float:
    return chsh_closed_form(ModularParams(float(x[0]), float(x[1]), float(x[2])))


def maximize_chsh_qft(
    bounds=QFT_LIMITS,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    lattice: int = 6,
    random_starts: int = 16,
    n_refine: int = 8,
) -> OptimizationResult:
    """Maximize ``<C0>`` over a box in ``(eta, eta', lambda)``.

    Degenerate bound pairs (``low == high``) pin that coordinate.
    """
    if budget < 1:
        raise ParameterError("empty budget: need at least one evaluation")
    b = _check_bounds(bounds)
    free = b[:, 1] > b[:, 0]
    rng = np.random.default_rng(seed)

    def embed(y):
        x = b[:, 0].copy()
        x[free] = np.clip(y, b[free, 0], b[free, 1])
        return x

    tracker = _Tracker(lambda y: _qft_value(embed(y)), budget)
    axes = [np.linspace(lo, hi, lattice) for lo, hi in b[free]]
    candidates = [np.array(p) for p in iproduct(*axes)]
    reference = np.array([REFERENCE_POINT.eta, REFERENCE_POINT.eta_prime, REFERENCE_POINT.lam])
    if np.all((reference >= b[:, 0]) & (reference <= b[:, 1])):
        candidates.append(reference[free])
    if free.any():
        candidates += list(rng.uniform(b[free, 0], b[free, 1], size=(random_starts, int(free.sum()))))

    def refine(y0):
        if not free.any():
            return
        minimize(lambda y: -tracker(y), y0, method="Nelder-Mead", bounds=list(map(tuple, b[free])),
                 options={"xatol": 1e-10, "fatol": 1e-14, "maxfev": 2000})

    starts = _run(tracker, candidates, refine, n_refine)
    x = embed(tracker.best_x)
    return OptimizationResult(ModularParams(*map(float, x)), tracker.best_value, starts, tracker.count, seed)


def maximize_chsh_spin(
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    state: str = "double-singlet",
    start: AngleSet | None = None,
    random_starts: int = 32,
    n_refine: int = 4,
) -> OptimizationResult:
    """Maximize ``|<C>|`` over the eight angles.

    The closed form is used on the double singlet and the 36-dimensional
    matrix on the product state.  ``budget=0`` with a ``start`` only
    evaluates the start.
    """
    state_vector(state)
    method = "closed" if state == "double-singlet" else "matrix"

    def value(x):
        return chsh_spin(AngleSet.from_array(x), state, method)

    if budget == 0:
        if start is None:
            raise ParameterError("budget 0 needs a start point")
        return OptimizationResult(start, value(start.as_array()), 1, 0, seed)
    if budget < 0:
        raise ParameterError(f"budget must be >= 0, got {budget!r}")

    rng = np.random.default_rng(seed)
    first = start if start is not None else AngleSet.reference()
    candidates = [first.as_array()] + list(rng.uniform(-math.pi, math.pi, size=(random_starts, 8)))
    tracker = _Tracker(value, budget)

    def refine(x0):
        minimize(lambda x: -tracker(x), x0, method="Nelder-Mead",
                 options={"xatol": 1e-10, "fatol": 1e-14, "maxfev": 4000, "adaptive": True})

    starts = _run(tracker, candidates, refine, n_refine)
    return OptimizationResult(AngleSet.from_array(tracker.best_x), tracker.best_value, starts, tracker.count, seed)


def dense_grid_oracle(bounds=QFT_LIMITS, points: int = 200) -> tuple[float, ModularParams]:
    """Brute-force maximum of ``<C0>`` on a ``points^3`` lattice."""
    b = _check_bounds(bounds)
    eta, etap, lam = (np.linspace(lo, hi, points) for lo, hi in b)
    e2 = eta[:, None] ** 2
    ep2 = etap[None, :] ** 2
    best, arg = -math.inf, None
    for l in lam:
        v = np.exp(-e2 * (1 + l) ** 2) + 2 * np.exp(-0.5 * (e2 + ep2) * (1 + l * l)) - np.exp(-ep2 * (1 + l) ** 2)
        i, k = np.unravel_index(np.argmax(v), v.shape)
        if v[i, k] > best:
            best, arg = float(v[i, k]), ModularParams(float(eta[i]), float(etap[k]), float(l))
    return best, arg
