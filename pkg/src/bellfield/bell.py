"""Field-dependent dichotomic operators on Fock (x) C^N (x) C^N and the CHSH operator.

Tensor order is field, Alice, Bob.  Within each of Alice's and Bob's
N-dimensional factors the basis states are paired as (2k, 2k+1) (0-based);
on each pair the operator is an off-diagonal block carrying a Weyl matrix
up and its adjoint down, so it squares to the identity.

The Fock factor uses the local Alice/Bob frame of :mod:`bellfield.fock`, in
which every Alice-Bob commutator vanishes identically at any cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .correlator import TSIRELSON
from .errors import NumericalError, ParameterError, TsirelsonViolation
from .fock import (
    FockConfig,
    ModeFrame,
    OperatorMatrix,
    _frob,
    local_frame,
    operator_norm,
    vacuum_vector,
    weyl_from_coefficients,
)
from .modular import ALICE, ModularParams, canonical_label, two_mode_coefficients, validate_params

NORM_TOL = 1e-12

_OPERATOR_LABEL = {"A": "f", "A'": "fp", "Ap": "fp", "B": "jf", "B'": "jfp", "Bp": "jfp"}


@dataclass(frozen=True)
class BipartiteState:
    """``|psi_AB> = sum_j c_j |j>_A |j>_B`` with N even.

    ``delta`` is set for truncated squeezed states, whose amplitudes are the
    exact geometric ones and therefore fall short of unit norm by the
    discarded tail.
    """

    coefficients: np.ndarray
    delta: float | None = None

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        object.__setattr__(self, "coefficients", c)
        if c.ndim != 1 or c.size == 0 or c.size % 2:
            raise ParameterError(f"need an even number of coefficients, got {c.size}")
        norm = float(np.sum(np.abs(c) ** 2))
        if self.delta is None:
            if abs(norm - 1.0) > NORM_TOL:
                raise ParameterError(f"coefficients not normalized: sum |c_j|^2 = {norm!r}")
            if np.any(c == 0):
                raise ParameterError("all coefficients must be nonzero")

    @property
    def n(self) -> int:
        return self.coefficients.size

    def vector(self) -> np.ndarray:
        """The state as a vector on C^N (x) C^N."""
        v = np.zeros((self.n, self.n), dtype=complex)
        v[np.arange(self.n), np.arange(self.n)] = self.coefficients
        return v.ravel()

    @classmethod
    def maximally_entangled(cls, n: int = 2) -> "BipartiteState":
        return cls(np.full(n, 1 / math.sqrt(n)))

    @classmethod
    def squeezed(cls, delta: float, m_max: int | None = None) -> "BipartiteState":
        if not 0.0 <= delta < 1.0:
            raise ParameterError(f"squeezing delta must lie in [0, 1), got {delta!r}")
        if m_max is None:
            m_max = default_squeezed_cutoff(delta)
        # complete the last (2n, 2n+1) pair
        levels = m_max + 1 + (m_max + 1) % 2
        c = math.sqrt(1 - delta**2) * delta ** np.arange(levels, dtype=float)
        return cls(c, delta=delta)


def default_squeezed_cutoff(delta: float, tail: float = 1e-12) -> int:
    """Smallest m with ``delta**(2 m) < tail``."""
    if delta == 0.0:
        return 1
    return max(1, math.floor(math.log(tail) / (2 * math.log(delta))) + 1)


def _pair_shifts(n: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    # |2k+1><2k| and |2k><2k+1| summed over pairs
    if n % 2:
        raise ParameterError(f"N must be even, got {n}")
    k = np.arange(0, n, 2)
    ones = np.ones(k.size)
    lower = sp.csr_matrix((ones, (k + 1, k)), shape=(n, n))
    return lower, lower.T.tocsr()


def pairing_matrix(n: int) -> sp.csr_matrix:
    """Phase-free swap within each (2k, 2k+1) pair of C^N."""
    lower, upper = _pair_shifts(n)
    return (lower + upper).tocsr()


DENSE_LIMIT = 1024


def _embed(weyl: np.ndarray, n: int, side: str):
    # dense below DENSE_LIMIT, where sparse bookkeeping costs more than it saves
    if weyl.shape[0] * n * n <= DENSE_LIMIT:
        lower, upper = (m.toarray() for m in _pair_shifts(n))
        eye = np.eye(n)
        lo, hi = (np.kron(lower, eye), np.kron(upper, eye)) if side == "alice" else (np.kron(eye, lower), np.kron(eye, upper))
        return np.kron(weyl, lo) + np.kron(weyl.conj().T, hi)
    lower, upper = _pair_shifts(n)
    eye = sp.identity(n, format="csr")
    if side == "alice":
        lo, hi = sp.kron(lower, eye), sp.kron(upper, eye)
    else:
        lo, hi = sp.kron(eye, lower), sp.kron(eye, upper)
    w = sp.csr_matrix(weyl)
    wd = sp.csr_matrix(weyl.conj().T)
    return (sp.kron(w, lo) + sp.kron(wd, hi)).tocsr()


def _basis(cfg: FockConfig, n: int) -> tuple:
    return tuple((n1, n2, i, j) for (n1, n2) in cfg.basis() for i in range(n) for j in range(n))


def build_dichotomic(label: str, p: ModularParams, n: int, cfg: FockConfig, frame: ModeFrame | None = None) -> OperatorMatrix:
    """One of ``A, A', B, B'`` on Fock (x) C^N (x) C^N.

    ``A`` and ``A'`` carry the Weyl matrices of ``f`` and ``f'`` on Alice's
    pairs; ``B`` and ``B'`` carry those of ``jf`` and ``jf'`` on Bob's.
    """
    if n % 2 or n < 2:
        raise ParameterError(f"N must be a positive even integer, got {n!r}")
    validate_params(p)
    try:
        fn = _OPERATOR_LABEL[label]
    except KeyError:
        fn = canonical_label(label)
    frame = local_frame(p.lam) if frame is None else frame
    coeffs = two_mode_coefficients(p)[fn]
    w = weyl_from_coefficients(coeffs, cfg, frame).data
    side = "alice" if fn in ALICE else "bob"
    return OperatorMatrix(_embed(w, n, side), _basis(cfg, n), hermitian=True)


@dataclass(frozen=True)
class BellAssembly:
    a: OperatorMatrix
    ap: OperatorMatrix
    b: OperatorMatrix
    bp: OperatorMatrix
    c: OperatorMatrix
    state: np.ndarray

    def expectation(self, op: OperatorMatrix | None = None) -> float:
        m = self.c if op is None else op
        return float(np.vdot(self.state, m.data @ self.state).real)

    def operators(self) -> dict:
        return {"A": self.a, "A'": self.ap, "B": self.b, "B'": self.bp}


def bell_operator(a: OperatorMatrix, ap: OperatorMatrix, b: OperatorMatrix, bp: OperatorMatrix) -> OperatorMatrix:
    """``C = (A + A') B + (A - A') B'`` with all four acting on the full space."""
    dims = {m.dim for m in (a, ap, b, bp)}
    if len(dims) != 1:
        raise ParameterError(f"dimension mismatch among operators: {sorted(dims)}")
    c = (a.data + ap.data) @ b.data + (a.data - ap.data) @ bp.data
    if sp.issparse(c):
        c = c.tocsr()
        # symmetrize away roundoff from the products
        c = ((c + c.conj().T) * 0.5).tocsr()
    else:
        c = 0.5 * (c + c.conj().T)
    return OperatorMatrix(c, a.basis, hermitian=True)


def assemble(p: ModularParams, state: BipartiteState, cfg: FockConfig) -> BellAssembly:
    frame = local_frame(p.lam)
    ops = [build_dichotomic(x, p, state.n, cfg, frame) for x in ("A", "A'", "B", "B'")]
    c = bell_operator(*ops)
    psi = np.kron(vacuum_vector(cfg, frame), state.vector())
    return BellAssembly(*ops, c=c, state=psi)


def qm_reduction(state) -> float:
    """Entanglement prefactor ``r = sum_k 2 Re(conj(c_{2k+1}) c_{2k})``.

    Accepts a :class:`BipartiteState` or a raw coefficient sequence (so that
    product-state limits with vanishing amplitudes can be evaluated).
    """
    c = state.coefficients if isinstance(state, BipartiteState) else np.asarray(state, dtype=complex)
    if c.size % 2:
        raise ParameterError(f"N must be even, got {c.size}")
    return float(np.sum(2.0 * np.real(np.conj(c[1::2]) * c[0::2])))


def squeezed_factor(delta: float) -> float:
    """Closed form ``2 delta / (1 + delta^2)``."""
    if not 0.0 <= delta <= 1.0:
        raise ParameterError(f"delta must lie in [0, 1], got {delta!r}")
    return 2.0 * delta / (1.0 + delta**2)


def squeezed_factor_oracle(delta: float, m_max: int | None = None) -> float:
    """``<psi_AB| X_A (x) X_B |psi_AB>`` on truncated oscillators.

    ``X`` is the phase-free pairing operator (the field factors contribute a
    common vacuum expectation and are left out).  The state carries the
    exact geometric amplitudes, so the truncation error is the omitted tail.
    """
    st = BipartiteState.squeezed(delta, m_max)
    n = st.n
    x = pairing_matrix(n).toarray()
    m = np.diag(st.coefficients)
    # (X (x) X) vec(M) = vec(X M X^T)
    return float(np.vdot(m, x @ m @ x.T).real)


def check_assembly(asm: BellAssembly, tol: float = 1e-10) -> dict:
    """Residuals for dichotomy, Hermiticity and Alice-Bob commutation."""
    ops = asm.operators()
    eye = sp.identity(asm.a.dim, format="csr") if sp.issparse(asm.a.data) else np.eye(asm.a.dim)
    out = {}
    for k, m in ops.items():
        out[f"{k}^2-1"] = _frob(m.data @ m.data - eye)
        out[f"{k}-{k}^dag"] = _frob(m.data - m.data.conj().T)
    for x in ("A", "A'"):
        for y in ("B", "B'"):
            u, v = ops[x].data, ops[y].data
            out[f"[{x},{y}]"] = _frob(u @ v - v @ u)
    bad = {k: v for k, v in out.items() if v >= tol}
    if bad:
        raise NumericalError(f"assembly residuals above {tol}: {bad}")
    return out


def tsirelson_check(c: OperatorMatrix, slack: float = 1e-9) -> float:
    norm = operator_norm(c)
    if norm > TSIRELSON + slack:
        raise TsirelsonViolation(f"||C|| = {norm!r} exceeds 2 sqrt 2")
    return norm
