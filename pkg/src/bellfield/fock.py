"""Brute-force two-mode Fock representation of smeared fields and Weyl operators.

Two canonical frames are supported for the same two-mode phase space:

``standard``
    Modes ``a1, a2`` attached to the orthonormal pair ``(phi, j phi)``.  The
    field vacuum is the occupation vacuum ``|0, 0>``.

``local``
    Rescaled Alice/Bob modes ``X, Y`` with quadratures
    ``Q_X = (Q1 + lam Q2) / sqrt(1 - lam^2)``, ``P_X = (P1 - lam P2) / sqrt(1 - lam^2)``
    and the mirrored pair for ``Y``.  Alice's fields only touch ``X`` and
    Bob's only touch ``Y``, so their Weyl matrices commute exactly at any
    cutoff.  In this frame ``a1 = (a_X - lam a_Y^dag) / sqrt(1 - lam^2)`` and
    the field vacuum is the two-mode squeezed vector
    ``sqrt(1 - lam^2) * sum_n lam^n |n, n>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NumericalError, ParameterError

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class FockConfig:
    """Per-mode occupation cutoff for the two-mode truncation."""

    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ParameterError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    @property
    def levels(self) -> int:
        return self.n_max + 1

    @property
    def dimension(self) -> int:
        return self.levels**2

    def basis(self) -> tuple[tuple[int, int], ...]:
        return tuple((n1, n2) for n1 in range(self.levels) for n2 in range(self.levels))


def _frob(m) -> float:
    if sp.issparse(m):
        return float(sp.linalg.norm(m))
    return float(np.linalg.norm(m))


@dataclass(frozen=True)
class OperatorMatrix:
    """Square matrix with basis labels; flags are checked numerically on creation."""

    data: np.ndarray | sp.spmatrix
    basis: tuple = ()
    hermitian: bool = False
    unitary: bool = False

    def __post_init__(self):
        n, m = self.data.shape
        if n != m:
            raise ParameterError(f"operator must be square, got shape {self.data.shape}")
        if self.basis and len(self.basis) != n:
            raise ParameterError("basis length does not match matrix dimension")
        if self.hermitian:
            err = _frob(self.data - self.data.conj().T)
            if err >= HERMITIAN_TOL:
                raise NumericalError(f"hermitian flag set but ||M - M^dag|| = {err:.3e}")
        if self.unitary:
            eye = sp.identity(n, format="csr") if sp.issparse(self.data) else np.eye(n)
            err = _frob(self.data.conj().T @ self.data - eye)
            if err >= UNITARY_TOL:
                raise NumericalError(f"unitary flag set but ||M^dag M - 1|| = {err:.3e}")

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def dense(self) -> np.ndarray:
        return self.data.toarray() if sp.issparse(self.data) else np.asarray(self.data)

    @property
    def H(self) -> "OperatorMatrix":
        return OperatorMatrix(self.data.conj().T, self.basis, self.hermitian, self.unitary)


# --- frames -----------------------------------------------------------------


@dataclass(frozen=True)
class ModeFrame:
    """Linear map from frame quadratures to the standard ones.

    ``(Q1, Q2, P1, P2) = transform @ (Q_a, Q_b, P_a, P_b)`` where ``a, b`` are
    the frame's own modes.
    """

    name: str
    transform: np.ndarray = field(repr=False)
    lam: float | None = None


STANDARD = ModeFrame("standard", np.eye(4))


def local_frame(lam: float) -> ModeFrame:
    if not 0.0 < lam < 1.0:
        raise ParameterError(f"lambda out of (0,1): got {lam!r}")
    r = math.sqrt(1.0 - lam**2)
    q = np.array([[1.0, -lam], [-lam, 1.0]]) / r
    p = np.array([[1.0, lam], [lam, 1.0]]) / r
    t = np.zeros((4, 4))
    t[:2, :2] = q
    t[2:, 2:] = p
    return ModeFrame("local", t, lam)


def _ladder(levels: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, levels)), 1)


def ladder_matrices(cfg: FockConfig):
    """``(a1, a1^dag, a2, a2^dag)`` on the truncated two-mode space."""
    a = _ladder(cfg.levels)
    eye = np.eye(cfg.levels)
    a1 = np.kron(a, eye)
    a2 = np.kron(eye, a)
    return a1, a1.T.copy(), a2, a2.T.copy()


@lru_cache(maxsize=16)
def quadratures(cfg: FockConfig):
    """``(Q1, Q2, P1, P2)`` of the frame modes, ``[Q, P] = i`` below the cutoff.

    Cached per config; the returned arrays are read-only.
    """
    a1, a1d, a2, a2d = ladder_matrices(cfg)
    s = math.sqrt(2.0)
    out = ((a1 + a1d) / s, (a2 + a2d) / s, 1j * (a1d - a1) / s, 1j * (a2d - a2) / s)
    for m in out:
        m.setflags(write=False)
    return out


def smeared_field_matrix(coeffs, cfg: FockConfig, frame: ModeFrame = STANDARD) -> OperatorMatrix:
    """``phi(g) = a(g) + a(g)^dag`` for ``g = c1 e1 + c2 e2``.

    In standard quadratures this is ``sqrt(2) (Re c . Q + Im c . P)``; the
    frame transform re-expresses it in the frame's own quadratures.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.shape != (2,):
        raise ParameterError(f"coefficient pair expected, got shape {c.shape}")
    real_coords = math.sqrt(2.0) * np.concatenate([c.real, c.imag])
    weights = frame.transform.T @ real_coords
    field_ = np.zeros((cfg.dimension, cfg.dimension), dtype=complex)
    for w, r in zip(weights, quadratures(cfg)):
        if w != 0.0:
            field_ += w * r
    return OperatorMatrix(field_, cfg.basis(), hermitian=True)


def vacuum_vector(cfg: FockConfig, frame: ModeFrame = STANDARD) -> np.ndarray:
    """Field vacuum in the given frame, normalized on the truncated space."""
    vac = np.zeros((cfg.levels, cfg.levels), dtype=complex)
    if frame.name == "standard":
        vac[0, 0] = 1.0
    else:
        n = np.arange(cfg.levels)
        vac[n, n] = frame.lam**n
        vac /= np.linalg.norm(vac)
    return vac.ravel()


def weyl_matrix(field_op: OperatorMatrix) -> OperatorMatrix:
    """``exp(i * field)`` through the eigendecomposition of the Hermitian field."""
    if not field_op.hermitian:
        raise ParameterError("weyl_matrix needs a Hermitian field operator")
    w, v = np.linalg.eigh(field_op.dense())
    u = (v * np.exp(1j * w)) @ v.conj().T
    return OperatorMatrix(u, field_op.basis, unitary=True)


def weyl_from_coefficients(coeffs, cfg: FockConfig, frame: ModeFrame = STANDARD) -> OperatorMatrix:
    return weyl_matrix(smeared_field_matrix(coeffs, cfg, frame))


def weyl_product_vev(factors: Sequence[OperatorMatrix], cfg: FockConfig, vacuum: np.ndarray | None = None) -> complex:
    """``<vac| F_1 F_2 ... F_k |vac>`` for an ordered list of matrices."""
    vac = vacuum_vector(cfg) if vacuum is None else np.asarray(vacuum)
    ket = vac.astype(complex)
    for m in reversed(list(factors)):
        if m.dim != cfg.dimension:
            raise ParameterError(f"factor of dimension {m.dim} does not match config dimension {cfg.dimension}")
        ket = m.data @ ket
    return complex(np.vdot(vac, ket))


def operator_norm(m: OperatorMatrix) -> float:
    """Largest singular value; largest |eigenvalue| when ``m`` is Hermitian."""
    if sp.issparse(m.data) and m.dim > 2000:
        if m.hermitian:
            vals = spla.eigsh(m.data, k=1, which="LM", return_eigenvectors=False, tol=1e-13)
            return float(np.max(np.abs(vals)))
        s = spla.svds(m.data, k=1, return_singular_vectors=False, tol=1e-13)
        return float(s[0])
    d = m.dense()
    if m.hermitian:
        return float(np.max(np.abs(np.linalg.eigvalsh(d))))
    return float(np.linalg.norm(d, 2))


def interior_mask(cfg: FockConfig, n_cut: int) -> np.ndarray:
    """Boolean mask of basis states with both occupations below ``n_cut``."""
    return np.array([n1 < n_cut and n2 < n_cut for n1, n2 in cfg.basis()])
