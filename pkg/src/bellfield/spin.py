"""Composite spin-1 (x) spin-1/2 parties with angle-parameterized dichotomic operators.

Each party's six-dimensional basis is ordered

    |1,+>, |-1,+>, |0,+>, |1,->, |-1,->, |0,->

and an operator with angles ``(a1, a2)`` pairs ``|1,+> <-> |-1,->``,
``|-1,+> <-> |1,->`` and ``|0,+> <-> |0,->`` with phases built from
``a1 +- a2`` and ``a2``.  The full space is Alice (x) Bob, 36-dimensional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .correlator import CHSH_TERMS
from .errors import ParameterError
from .fock import OperatorMatrix

STATES = ("double-singlet", "product")

_SPIN1 = {1: 0, -1: 1, 0: 2}
_HALF = {"+": 0, "-": 1}


def basis_index(m: int, s: str) -> int:
    """Position of ``|m, s>`` in the six-state party basis."""
    return 3 * _HALF[s] + _SPIN1[m]


BASIS = tuple((m, s) for s in "+-" for m in (1, -1, 0))


@dataclass(frozen=True)
class AngleSet:
    """The eight operator angles (radians); primes mark ``A'`` and ``B'``."""

    alpha1: float
    alpha2: float
    alpha1p: float
    alpha2p: float
    beta1: float
    beta2: float
    beta1p: float
    beta2p: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not np.isfinite(v):
                raise ParameterError(f"angle {f.name} must be finite, got {v!r}")

    @classmethod
    def reference(cls) -> "AngleSet":
        """Angles giving ``2 sqrt 2 (1 + sqrt 2) / 3`` on the double singlet."""
        q = math.pi / 4
        return cls(0.0, 0.0, 2 * q, 2 * q, q, q, q, -q)

    @classmethod
    def from_array(cls, x) -> "AngleSet":
        x = np.asarray(x, dtype=float)
        if x.shape != (8,):
            raise ParameterError(f"eight angles expected, got shape {x.shape}")
        return cls(*map(float, x))

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)])

    def pair(self, label: str) -> tuple[float, float]:
        """``(angle1, angle2)`` of operator ``A``, ``A'``, ``B`` or ``B'``."""
        key = {"A": "alpha", "A'": "alpha", "B": "beta", "B'": "beta"}[label]
        tail = "p" if label.endswith("'") else ""
        return getattr(self, f"{key}1{tail}"), getattr(self, f"{key}2{tail}")

    def reduced(self) -> "AngleSet":
        """Angles mapped into ``[0, 2 pi)`` for reporting."""
        return AngleSet.from_array(np.mod(self.as_array(), 2 * math.pi))

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def composite_operator(a1: float, a2: float) -> OperatorMatrix:
    """Hermitian involution on one party's six states."""
    m = np.zeros((6, 6), dtype=complex)
    rules = (
        ((1, "+"), (-1, "-"), a1 + a2),
        ((-1, "+"), (1, "-"), -(a1 - a2)),
        ((0, "+"), (0, "-"), a2),
    )
    for src, dst, phase in rules:
        i, k = basis_index(*src), basis_index(*dst)
        m[k, i] = np.exp(1j * phase)
        m[i, k] = np.exp(-1j * phase)
    return OperatorMatrix(m, BASIS, hermitian=True, unitary=True)


def _two_party(m1: dict, m2: dict) -> np.ndarray:
    # sum of amplitude * |mA sA> |mB sB> over the product of two bipartite kets
    v = np.zeros((6, 6), dtype=complex)
    for (ma, mb), c1 in m1.items():
        for (sa, sb), c2 in m2.items():
            v[basis_index(ma, sa), basis_index(mb, sb)] += c1 * c2
    return v.ravel()


_HALF_SINGLET = {("+", "-"): 1 / math.sqrt(2), ("-", "+"): -1 / math.sqrt(2)}


def double_singlet() -> np.ndarray:
    """Spin-1 singlet times spin-1/2 singlet, as a 36-vector (Alice index major)."""
    s = 1 / math.sqrt(3)
    return _two_party({(1, -1): s, (0, 0): -s, (-1, 1): s}, _HALF_SINGLET)


def product_state() -> np.ndarray:
    """``|1>_A |-1>_B`` for the spin-1 pair times the spin-1/2 singlet."""
    return _two_party({(1, -1): 1.0}, _HALF_SINGLET)


def state_vector(state: str) -> np.ndarray:
    if state == "double-singlet":
        return double_singlet()
    if state == "product":
        return product_state()
    raise ParameterError(f"unknown spin state {state!r}; expected one of {STATES}")


def correlator_closed_form(a1: float, a2: float, b1: float, b2: float) -> float:
    """``<A (x) B>`` on the double singlet."""
    return -(1.0 + 2.0 * math.cos(a1 - b1)) * math.cos(a2 - b2) / 3.0


def spin_bell_operator(angles: AngleSet) -> OperatorMatrix:
    ops = {k: composite_operator(*angles.pair(k)).data for k in ("A", "A'", "B", "B'")}
    eye = np.eye(6)
    a, ap = np.kron(ops["A"], eye), np.kron(ops["A'"], eye)
    b, bp = np.kron(eye, ops["B"]), np.kron(eye, ops["B'"])
    c = (a + ap) @ b + (a - ap) @ bp
    return OperatorMatrix(0.5 * (c + c.conj().T), hermitian=True)


_TERM_LABELS = {"f": "A", "fp": "A'", "jf": "B", "jfp": "B'"}


def spin_expectation(angles: AngleSet, state: str = "double-singlet", method: str = "matrix") -> float:
    """Signed ``<psi| C |psi>``.

    ``method="closed"`` sums four closed-form terms, each with its own
    operators' angles, and is only defined on the double singlet.
    """
    if method == "closed":
        if state != "double-singlet":
            raise ParameterError("closed form is only available for the double-singlet state")
        total = 0.0
        for a, b, sign in CHSH_TERMS:
            total += sign * correlator_closed_form(*angles.pair(_TERM_LABELS[a]), *angles.pair(_TERM_LABELS[b]))
        return total
    if method != "matrix":
        raise ParameterError(f"unknown method {method!r}")
    psi = state_vector(state)
    c = spin_bell_operator(angles).data
    return float(np.vdot(psi, c @ psi).real)


def chsh_spin(angles: AngleSet, state: str = "double-singlet", method: str = "matrix") -> float:
    """``|<psi| C |psi>|``, the magnitude compared against 2 and 2 sqrt 2."""
    return abs(spin_expectation(angles, state, method))


def product_scan(n: int, rng: np.random.Generator) -> float:
    """Largest ``|<C>|`` on the product state over ``n`` uniform random angle sets."""
    psi = state_vector("product")
    best = 0.0
    for x in rng.uniform(-math.pi, math.pi, size=(n, 8)):
        c = spin_bell_operator(AngleSet.from_array(x)).data
        best = max(best, abs(float(np.vdot(psi, c @ psi).real)))
    return best
