"""Test-function geometry on a single modular spectral doublet.

Alice's test functions are built from a unit vector ``phi`` in a sharp
spectral subspace of the modular operator, ``delta**0.5 phi = lam * phi``.
Everything then lives in the two-dimensional complex span of the
orthonormal pair ``e1 = phi``, ``e2 = j phi``, where the modular conjugation
``j`` acts by swapping the two coordinates and conjugating them.

    f   = eta  * (1 + s) phi      -> ( eta,        eta * lam)
    f'  = eta' * (1 + s) i phi    -> ( i eta',    -i eta' * lam)
    jf                            -> ( eta * lam,  eta)
    jf'                           -> ( i eta' lam, -i eta')

The inner product is antilinear in its first slot and the Pauli-Jordan
pairing is ``Delta(a, b) = 2 Im <a|b>``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

LABELS = ("f", "fp", "jf", "jfp")
ALICE = ("f", "fp")
BOB = ("jf", "jfp")

_ALIASES = {
    "f": "f",
    "fp": "fp",
    "f'": "fp",
    "f′": "fp",
    "jf": "jf",
    "jfp": "jfp",
    "jf'": "jfp",
    "jf′": "jfp",
}


def canonical_label(label: str) -> str:
    """Map a label spelling (``f'``, ``f′``, ``fp``) to its canonical form."""
    try:
        return _ALIASES[label]
    except (KeyError, TypeError):
        raise ParameterError(
            f"unknown test-function label {label!r}; expected one of {LABELS}"
        ) from None


@dataclass(frozen=True)
class ModularParams:
    """Norm scales of Alice's two test functions and the modular eigenvalue.

    ``lam`` is the square root of the modular spectral value and must lie in
    the open interval (0, 1).
    """

    eta: float
    eta_prime: float
    lam: float

    def as_dict(self) -> dict:
        return {"eta": self.eta, "eta_prime": self.eta_prime, "lambda": self.lam}


def validate_params(p: ModularParams) -> ModularParams:
    """Return ``p`` unchanged if it satisfies all bounds, else raise."""
    for name, value in (("eta", p.eta), ("eta_prime", p.eta_prime), ("lambda", p.lam)):
        if not np.isfinite(value):
            raise ParameterError(f"{name} must be finite, got {value!r}")
    if not 0.0 < p.lam < 1.0:
        raise ParameterError(f"lambda out of (0,1): got {p.lam!r}")
    if p.eta < 0.0:
        raise ParameterError(f"eta must be >= 0, got {p.eta!r}")
    if p.eta_prime < 0.0:
        raise ParameterError(f"eta_prime must be >= 0, got {p.eta_prime!r}")
    return p


def apply_j(c: np.ndarray) -> np.ndarray:
    """Antiunitary modular conjugation in the (phi, j phi) basis."""
    c = np.asarray(c, dtype=complex)
    return np.conj(c[::-1])


@dataclass(frozen=True)
class TwoModeCoefficients:
    f: np.ndarray
    fp: np.ndarray
    jf: np.ndarray
    jfp: np.ndarray

    def __getitem__(self, label: str) -> np.ndarray:
        return getattr(self, canonical_label(label))

    def as_matrix(self) -> np.ndarray:
        """Rows are the coefficient pairs in ``LABELS`` order."""
        return np.vstack([self.f, self.fp, self.jf, self.jfp])


def two_mode_coefficients(p: ModularParams) -> TwoModeCoefficients:
    eta, etap, lam = p.eta, p.eta_prime, p.lam
    f = np.array([eta, eta * lam], dtype=complex)
    fp = np.array([1j * etap, -1j * etap * lam], dtype=complex)
    return TwoModeCoefficients(f=f, fp=fp, jf=apply_j(f), jfp=apply_j(fp))


@dataclass(frozen=True)
class GramMatrix:
    """Inner products ``<row|column>`` over the ordered family ``LABELS``."""

    entries: np.ndarray

    def inner(self, a: str, b: str) -> complex:
        i = LABELS.index(canonical_label(a))
        k = LABELS.index(canonical_label(b))
        return complex(self.entries[i, k])

    def norm_sq(self, a: str) -> float:
        return self.inner(a, a).real


def gram_from_coefficients(c: TwoModeCoefficients) -> GramMatrix:
    m = c.as_matrix()
    return GramMatrix(entries=np.conj(m) @ m.T)


def build_gram(p: ModularParams) -> GramMatrix:
    """Closed-form Gram matrix of (f, f', jf, jf').

    The listed relations (norms, <f|jf>, <f'|jf'>, <f|jf'> = 0) are entered
    directly; the cross terms between f and f' follow from the coefficient
    expansion.
    """
    eta, etap, lam = p.eta, p.eta_prime, p.lam
    nf = eta**2 * (1 + lam**2)
    nfp = etap**2 * (1 + lam**2)
    cross = 1j * eta * etap * (1 - lam**2)  # <f|f'>
    g = np.zeros((4, 4), dtype=complex)
    g[0, 0] = g[2, 2] = nf
    g[1, 1] = g[3, 3] = nfp
    g[0, 2] = g[2, 0] = 2 * eta**2 * lam
    g[1, 3] = g[3, 1] = 2 * etap**2 * lam
    g[0, 1] = cross
    g[1, 0] = np.conj(cross)
    # <jf|jf'> = <f'|f> by antiunitarity of j
    g[2, 3] = np.conj(cross)
    g[3, 2] = cross
    # <f|jf'> and <f'|jf> vanish
    return GramMatrix(entries=g)


def pj_pairing(g: GramMatrix, a: str, b: str) -> float:
    """Smeared Pauli-Jordan pairing, ``[phi(a), phi(b)] = i * Delta(a, b)``."""
    return 2.0 * g.inner(a, b).imag
