"""Closed-form vacuum correlators of Weyl operators and the CHSH combination."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .modular import GramMatrix, ModularParams, build_gram, canonical_label, pj_pairing, validate_params

TSIRELSON = 2.0 * math.sqrt(2.0)

# (alice, bob, sign) for C = (A + A') B + (A - A') B'
CHSH_TERMS = (("f", "jf", 1), ("fp", "jf", 1), ("f", "jfp", 1), ("fp", "jfp", -1))


def weyl_vacuum_expectation(norm_sq: float) -> float:
    """``<0|W_h|0> = exp(-||h||^2 / 2)``."""
    if norm_sq < 0:
        raise ParameterError(f"squared norm must be >= 0, got {norm_sq!r}")
    return math.exp(-0.5 * norm_sq)


def _signed_pair(g: GramMatrix, a: str, sa: int, b: str, sb: int) -> complex:
    # <W_{sa a} W_{sb b}> through the Weyl composition law
    ab = g.inner(a, b)
    norm_sq = g.norm_sq(a) + g.norm_sq(b) + 2 * sa * sb * ab.real
    delta = sa * sb * 2.0 * ab.imag
    return np.exp(-0.5j * delta) * math.exp(-0.5 * norm_sq)


def weyl_pair_expectation(g: GramMatrix, a: str, sign: int, b: str) -> complex:
    """``<0| W_a W_{sign*b} |0>`` from Gram data.

    Equals ``exp(-i/2 Delta(a, sign*b)) * exp(-||a + sign*b||^2 / 2)``.
    """
    if sign not in (1, -1):
        raise ParameterError(f"sign must be +1 or -1, got {sign!r}")
    return complex(_signed_pair(g, canonical_label(a), 1, canonical_label(b), sign))


def pair_cosine(g: GramMatrix, a: str, b: str) -> float:
    """Vacuum value of ``(W_a W_b + W_a^dag W_b^dag) / 2``, the A x B matrix element."""
    z = 0.5 * (_signed_pair(g, a, 1, b, 1) + _signed_pair(g, a, -1, b, -1))
    return float(z.real)


def chsh_closed_form(p: ModularParams) -> float:
    """The three-exponential expression for <C0>."""
    eta2, etap2, lam = p.eta**2, p.eta_prime**2, p.lam
    return (
        math.exp(-eta2 * (1 + lam) ** 2)
        + 2.0 * math.exp(-0.5 * (eta2 + etap2) * (1 + lam**2))
        - math.exp(-etap2 * (1 + lam) ** 2)
    )


@dataclass(frozen=True)
class CorrelatorReport:
    value: float
    term_breakdown: tuple[float, float, float]
    params: ModularParams
    violation: bool

    def as_dict(self) -> dict:
        t1, t2, t3 = self.term_breakdown
        return {
            "params": self.params.as_dict(),
            "value": self.value,
            "terms": {"ab": t1, "cross": t2, "apbp": t3},
            "violation": self.violation,
        }


def is_violation(value: float) -> bool:
    return 2.0 < abs(value) <= TSIRELSON


def chsh_correlator(p: ModularParams) -> CorrelatorReport:
    """Bell-CHSH correlator of the field vacuum for the (eta, eta', lam) family."""
    validate_params(p)
    g = build_gram(p)
    e = {(a, b): pair_cosine(g, a, b) for a, b, _ in CHSH_TERMS}
    value = sum(s * e[(a, b)] for a, b, s in CHSH_TERMS)
    terms = (e[("f", "jf")], 0.5 * (e[("fp", "jf")] + e[("f", "jfp")]), e[("fp", "jfp")])
    return CorrelatorReport(value=value, term_breakdown=terms, params=p, violation=is_violation(value))


def chsh_corrected(p: ModularParams, delta_sq: float) -> float:
    """Second-order suppressed correlator ``(1 - delta^2) <C0>``."""
    if not 0.0 <= delta_sq <= 1.0:
        raise ParameterError(f"delta_sq must lie in [0, 1], got {delta_sq!r}")
    return (1.0 - delta_sq) * chsh_correlator(p).value


def causality_residual(p: ModularParams) -> float:
    """Largest |Delta| over the four Alice x Bob label pairs."""
    g = build_gram(p)
    return max(abs(pj_pairing(g, a, b)) for a in ("f", "fp") for b in ("jf", "jfp"))
