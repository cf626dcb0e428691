"""Jaynes-Cummings coupling of two Heisenberg-exchange qubits to the scalar field.

Qubit basis order is ``(+, -)`` with ``sigma_z |+> = |+>``; a two-qubit index
is ``2 * q_A + q_B``.  Discrete field modes ``b_k`` are normalized so that
``[b_k, b_k^dag] = 1``; a continuum smeared annihilator becomes
``a_h = sum_k sqrt(w_k) h(p_k) b_k`` with the shared measure weights
``w_k ~ dmu_p``.

Energies are in the same units as ``m`` (conventionally ``m = 1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Callable

import numpy as np
from scipy import integrate, special

from .bell import BipartiteState, assemble
from .correlator import chsh_correlator
from .errors import NumericalError, ParameterError
from .fock import FockConfig, local_frame, vacuum_vector
from .modular import ModularParams

INV_2PI2 = 1.0 / (2.0 * math.pi**2)

PLUS, MINUS = 0, 1
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()

_S2 = 1.0 / math.sqrt(2.0)
# two-qubit vectors over (++, +-, -+, --)
PSI_S = np.array([0, 1, -1, 0]) * _S2
PSI_1 = np.array([0, 1, 1, 0]) * _S2
PSI_2 = np.array([1, 0, 0, 1]) * _S2
PSI_3 = np.array([1, 0, 0, -1]) * _S2

# |psi_s> = (|1,1> - |2,2>)/sqrt 2 once Bob's pair is ordered (-, +)
SINGLET_R = -1.0


@dataclass(frozen=True)
class JCParams:
    omega_A: float
    omega_B: float
    J: float
    m: float

    def __post_init__(self):
        for name in ("omega_A", "omega_B", "J", "m"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ParameterError(f"{name} must be finite, got {v!r}")
        if self.J <= 0:
            raise ParameterError(f"J must be > 0, got {self.J!r}")
        if self.m < 0:
            raise ParameterError(f"m must be >= 0, got {self.m!r}")

    def omega(self, p):
        return np.sqrt(np.asarray(p, dtype=float) ** 2 + self.m**2)

    def scaled(self, t: float) -> "JCParams":
        return JCParams(self.omega_A * t, self.omega_B * t, self.J, self.m)

    def as_dict(self) -> dict:
        return {"omega_A": self.omega_A, "omega_B": self.omega_B, "J": self.J, "m": self.m}


@dataclass(frozen=True)
class MomentumProfile:
    """Isotropic momentum-space test function.

    ``gaussian``: ``h(p) = amplitude * exp(-(|p| - center)^2 / (2 width^2))``.
    ``discrete``: measure weights and momenta ``modes = ((w_k, |p_k|), ...)``
    with profile values ``values[k]`` (default 1).
    """

    kind: str
    amplitude: complex = 1.0
    center: float = 0.0
    width: float = 1.0
    modes: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind == "gaussian":
            if not self.width > 0:
                raise ParameterError(f"gaussian width must be > 0, got {self.width!r}")
            if self.center < 0:
                raise ParameterError(f"gaussian center radius must be >= 0, got {self.center!r}")
        elif self.kind == "discrete":
            modes = tuple((float(w), float(p)) for w, p in self.modes)
            if not modes:
                raise ParameterError("discrete profile needs at least one mode")
            if any(w < 0 or p < 0 for w, p in modes):
                raise ParameterError("mode weights and momenta must be >= 0")
            values = tuple(self.values) if self.values else (1.0,) * len(modes)
            if len(values) != len(modes):
                raise ParameterError("one profile value per mode is required")
            object.__setattr__(self, "modes", modes)
            object.__setattr__(self, "values", values)
        else:
            raise ParameterError(f"unknown profile kind {self.kind!r}")

    @classmethod
    def gaussian(cls, amplitude=1.0, center=0.0, width=1.0) -> "MomentumProfile":
        return cls("gaussian", amplitude=amplitude, center=center, width=width)

    @classmethod
    def discrete(cls, modes, values=()) -> "MomentumProfile":
        return cls("discrete", modes=tuple(modes), values=tuple(values))

    def __call__(self, p):
        if self.kind != "gaussian":
            raise ParameterError("only gaussian profiles can be evaluated at arbitrary momenta")
        p = np.asarray(p, dtype=float)
        return self.amplitude * np.exp(-((p - self.center) ** 2) / (2 * self.width**2))

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.modes])

    @property
    def momenta(self) -> np.ndarray:
        return np.array([p for _, p in self.modes])

    def value_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=complex)

    def sampled(self, modes) -> "MomentumProfile":
        """Gaussian profile evaluated on a discrete mode set."""
        modes = tuple(modes)
        return MomentumProfile.discrete(modes, tuple(complex(v) for v in self(np.array([p for _, p in modes]))))

    def is_real(self) -> bool:
        if self.kind == "gaussian":
            return complex(self.amplitude).imag == 0
        return all(complex(v).imag == 0 for v in self.values)


def radial_modes(p_max: float, n_modes: int, m: float) -> tuple:
    """Midpoint discretization of ``dmu_p`` on ``[0, p_max]``.

    ``w_k = p_k^2 dp / (4 pi^2 omega_k)``.
    """
    if n_modes < 1 or p_max <= 0:
        raise ParameterError("need n_modes >= 1 and p_max > 0")
    dp = p_max / n_modes
    p = (np.arange(n_modes) + 0.5) * dp
    w = p**2 * dp / (4 * math.pi**2 * np.sqrt(p**2 + m**2))
    return tuple(zip(w.tolist(), p.tolist()))


def _density(p, m: float):
    # p^2 / (2 omega_p), with the massless p -> 0 limit taken explicitly
    p = np.asarray(p, dtype=float)
    om = np.sqrt(p * p + m * m)
    safe = np.where(om > 0, om, 1.0)
    return np.where(om > 0, p * p / (2 * safe), 0.0)


def _check_pair(h_a: MomentumProfile, h_b: MomentumProfile) -> str:
    if h_a.kind != h_b.kind:
        raise ParameterError("profiles must be of the same kind")
    if h_a.kind == "discrete" and h_a.modes != h_b.modes:
        raise ParameterError("discrete profiles must share the same mode set")
    return h_a.kind


def _difference(jc: JCParams, h_a: MomentumProfile, h_b: MomentumProfile) -> Callable:
    return lambda p: jc.omega_A * h_a(p) - jc.omega_B * h_b(p)


def _gaussian_tail(jc: JCParams, profiles, cut: float) -> float:
    # integrand <= p/2 * sum_X 2 Om_X^2 |a_X|^2 exp(-(p-c_X)^2/s_X^2) / (2 (4J+m)^2) / (2 pi^2)
    total = 0.0
    for om, h in profiles:
        if om == 0 or h.amplitude == 0:
            continue
        s, c = h.width, h.center
        x = (cut - c) / s
        moment = 0.5 * s**2 * math.exp(-x * x) + c * s * math.sqrt(math.pi) / 2 * special.erfc(x)
        total += 2 * om**2 * abs(h.amplitude) ** 2 * moment
    return INV_2PI2 * total / (4 * (4 * jc.J + jc.m) ** 2)


def _radial_integral(jc: JCParams, h_a, h_b, g: Callable, rtol: float) -> float:
    """``int dmu_p g(p)`` for gaussian profiles, adaptive on [0, cut] plus tail bound."""
    profiles = ((jc.omega_A, h_a), (jc.omega_B, h_b))
    centers = [h.center for _, h in profiles]
    s_max = max(h.width for _, h in profiles)

    def integrand(p):
        return INV_2PI2 * float(_density(p, jc.m)) * g(p)

    k = 8.0
    while True:
        cut = max(centers) + k * s_max
        pts = sorted({c for c in centers if 0 < c < cut})
        val, err = integrate.quad(integrand, 0.0, cut, epsabs=0.0, epsrel=0.1 * rtol, limit=500, points=pts or None)
        tail = _gaussian_tail(jc, profiles, cut)
        scale = abs(val)
        if tail <= 1e-2 * rtol * scale or tail < 1e-300:
            break
        k += 4.0
        if k > 64:
            raise NumericalError("gaussian tail bound did not fall below tolerance")
    if err > rtol * max(scale, 1e-300) and scale > 0:
        raise NumericalError(f"quadrature error {err:.3e} above tolerance for value {val:.3e}")
    return val


def delta_squared(jc: JCParams, h_a: MomentumProfile, h_b: MomentumProfile, rtol: float = 1e-8) -> float:
    """``delta^2 = int dmu_p |Om_A h_A - Om_B h_B|^2 / (2 (4J + omega_p)^2)``."""
    kind = _check_pair(h_a, h_b)
    if kind == "discrete":
        w = h_a.weights
        om = jc.omega(h_a.momenta)
        diff = jc.omega_A * h_a.value_array() - jc.omega_B * h_b.value_array()
        return float(np.sum(w * np.abs(diff) ** 2 / (2 * (4 * jc.J + om) ** 2)))
    diff = _difference(jc, h_a, h_b)
    return _radial_integral(
        jc, h_a, h_b, lambda p: abs(diff(p)) ** 2 / (2 * (4 * jc.J + math.sqrt(p * p + jc.m**2)) ** 2), rtol
    )


def delta_squared_romberg(jc: JCParams, h_a: MomentumProfile, h_b: MomentumProfile, levels: int = 16) -> float:
    """Fixed-grid trapezoid sums on [0, P] with Richardson extrapolation.

    Independent of :func:`delta_squared`: no adaptivity and a cutoff far in
    the gaussian tail (40 widths past the outermost center).
    """
    _check_pair(h_a, h_b)
    if h_a.kind != "gaussian":
        raise ParameterError("the Romberg oracle only handles gaussian profiles")
    cut = max(h_a.center, h_b.center) + 40 * max(h_a.width, h_b.width)

    def f(p):
        om = np.sqrt(p**2 + jc.m**2)
        d = jc.omega_A * h_a(p) - jc.omega_B * h_b(p)
        return INV_2PI2 * _density(p, jc.m) * np.abs(d) ** 2 / (2 * (4 * jc.J + om) ** 2)

    table = []
    for k in range(levels):
        n = 2 ** (k + 4)
        x = np.linspace(0.0, cut, n + 1)
        table.append([integrate.trapezoid(f(x), x)])
        for j in range(1, k + 1):
            prev = table[k - 1][j - 1]
            table[k].append(table[k][j - 1] + (table[k][j - 1] - prev) / (4**j - 1))
        if k > 2 and abs(table[k][k] - table[k - 1][k - 1]) <= 1e-13 * abs(table[k][k]):
            return float(table[k][k])
    return float(table[-1][-1])


@dataclass(frozen=True)
class SecondOrderState:
    """Coefficients of the second-order perturbed ground state.

    ``amplitude_singlet`` multiplies ``|psi_s>|0>``, ``amplitude_psi1``
    multiplies ``|psi_1>|0>`` and the one-particle profile multiplies
    ``(|psi_2> - |psi_3>) |p>`` under ``int dmu_p``.
    """

    amplitude_singlet: float
    amplitude_psi1: float
    delta_sq: float
    one_particle: Callable = field(repr=False)
    mode_amplitudes: np.ndarray | None = field(default=None, repr=False)

    def one_particle_amplitude(self, p):
        return self.one_particle(p)


def second_order_state(jc: JCParams, h_a: MomentumProfile, h_b: MomentumProfile, rtol: float = 1e-8) -> SecondOrderState:
    if not (h_a.is_real() and h_b.is_real()):
        raise ParameterError("second-order state requires real-valued profiles")
    kind = _check_pair(h_a, h_b)
    d2 = delta_squared(jc, h_a, h_b, rtol)
    if kind == "discrete":
        w, om = h_a.weights, jc.omega(h_a.momenta)
        va, vb = h_a.value_array().real, h_b.value_array().real
        psi1 = float(np.sum(w * (jc.omega_A**2 * va**2 - jc.omega_B**2 * vb**2) / (8 * jc.J * (4 * jc.J + om))))
        modes = -(jc.omega_A * va - jc.omega_B * vb) / (2 * (4 * jc.J + om))
        lookup = dict(zip(h_a.momenta.tolist(), modes.tolist()))
        return SecondOrderState(1 - d2 / 2, psi1, d2, lambda p: lookup[float(p)], modes)

    def g(p):
        ha, hb = float(np.real(h_a(p))), float(np.real(h_b(p)))
        return (jc.omega_A**2 * ha**2 - jc.omega_B**2 * hb**2) / (8 * jc.J * (4 * jc.J + math.sqrt(p * p + jc.m**2)))

    has_support = (jc.omega_A != 0 and h_a.amplitude != 0) or (jc.omega_B != 0 and h_b.amplitude != 0)
    psi1 = _radial_integral(jc, h_a, h_b, g, rtol) if has_support else 0.0

    def one_particle(p):
        return -(jc.omega_A * np.real(h_a(p)) - jc.omega_B * np.real(h_b(p))) / (2 * (4 * jc.J + jc.omega(p)))

    return SecondOrderState(1 - d2 / 2, psi1, d2, one_particle)


# --- exact diagonalization ---------------------------------------------------


def _field_basis(n_modes: int, max_particles: int) -> list[tuple[int, ...]]:
    basis = [tuple([0] * n_modes)]
    for total in range(1, max_particles + 1):
        for combo in combinations_with_replacement(range(n_modes), total):
            occ = [0] * n_modes
            for k in combo:
                occ[k] += 1
            basis.append(tuple(occ))
    return basis


def _field_lowering(basis, k: int) -> np.ndarray:
    index = {s: i for i, s in enumerate(basis)}
    b = np.zeros((len(basis), len(basis)))
    for j, s in enumerate(basis):
        if s[k] > 0:
            t = list(s)
            t[k] -= 1
            b[index[tuple(t)], j] = math.sqrt(s[k])
    return b


@dataclass(frozen=True)
class JCGroundState:
    vector: np.ndarray  # shape (2, 2, n_field)
    energy: float
    field_basis: list = field(repr=False)

    def vacuum_qubits(self) -> np.ndarray:
        """Two-qubit amplitudes in the field vacuum sector."""
        return self.vector[:, :, 0].ravel()

    def overlap(self, qubits: np.ndarray) -> complex:
        return complex(np.vdot(qubits, self.vacuum_qubits()))

    def one_particle(self, k: int) -> complex:
        """Amplitude on ``|-,->|1_k>``."""
        occ = [0] * len(self.field_basis[0])
        occ[k] = 1
        return complex(self.vector[MINUS, MINUS, self.field_basis.index(tuple(occ))])

    def one_particle_weight(self) -> float:
        idx = [i for i, s in enumerate(self.field_basis) if sum(s) == 1]
        return float(np.sum(np.abs(self.vector[:, :, idx]) ** 2))

    def qubit_density(self) -> np.ndarray:
        v = self.vector.reshape(4, -1)
        return v @ v.conj().T


def jc_hamiltonian(jc: JCParams, h_a: MomentumProfile, h_b: MomentumProfile, max_particles: int = 1):
    """Dense ``H_0 + H_I`` on qubits (x) field, and the field basis used."""
    if _check_pair(h_a, h_b) != "discrete":
        raise ParameterError("exact diagonalization needs discrete mode profiles")
    if not (h_a.is_real() and h_b.is_real()):
        raise ParameterError("exact diagonalization requires real-valued profiles")
    w, p = h_a.weights, h_a.momenta
    om = jc.omega(p)
    basis = _field_basis(len(p), max_particles)
    nf = len(basis)
    lows = [_field_lowering(basis, k) for k in range(len(p))]
    i2, i_f = np.eye(2), np.eye(nf)

    h_s = jc.J * sum(np.kron(s, s) for s in (SIGMA_X, SIGMA_Y, SIGMA_Z))
    h_field = sum(om[k] * lows[k].T @ lows[k] for k in range(len(p))) if len(p) else np.zeros((nf, nf))
    h = np.kron(h_s, i_f) + np.kron(np.eye(4), h_field)

    def smeared(values):
        return sum(math.sqrt(w[k]) * values[k].real * lows[k] for k in range(len(p)))

    a_a, a_b = smeared(h_a.value_array()), smeared(h_b.value_array())
    h = h + jc.omega_A * (
        np.kron(np.kron(SIGMA_PLUS, i2), a_a) + np.kron(np.kron(SIGMA_MINUS, i2), a_a.T)
    )
    h = h + jc.omega_B * (
        np.kron(np.kron(i2, SIGMA_PLUS), a_b) + np.kron(np.kron(i2, SIGMA_MINUS), a_b.T)
    )
    return h, basis


def perturbation_oracle(jc: JCParams, h_a: MomentumProfile, h_b: MomentumProfile, max_particles: int = 1) -> JCGroundState:
    """Ground state of ``H_0 + H_I`` by dense diagonalization.

    The global phase is fixed so that the singlet overlap is real and
    positive.
    """
    h, basis = jc_hamiltonian(jc, h_a, h_b, max_particles)
    try:
        vals, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    v = vecs[:, 0].reshape(2, 2, len(basis))
    ov = np.vdot(PSI_S, v[:, :, 0].ravel())
    if abs(ov) > 0:
        v = v * (abs(ov) / ov)
    return JCGroundState(v, float(vals[0]), basis)


def effective_chsh_matrix(p: ModularParams, cfg: FockConfig) -> np.ndarray:
    """``<vac| C |vac>`` as a 4x4 matrix on the two qubits, index ``2 q_A + q_B``.

    Alice's pair is ordered ``(+, -)`` and Bob's ``(-, +)``, so that
    ``A|+> = W_f |->`` and ``B|-> = W_jf |+>``.
    """
    asm = assemble(p, BipartiteState.maximally_entangled(2), cfg)
    vac = vacuum_vector(cfg, local_frame(p.lam))
    embed = np.kron(vac.reshape(-1, 1), np.eye(4))  # field (x) (iA, iB)
    c_pair = embed.conj().T @ (asm.c.data @ embed)
    # (q_A, q_B) -> (i_A, i_B) = (q_A, 1 - q_B)
    perm = [2 * qa + (1 - qb) for qa in (0, 1) for qb in (0, 1)]
    return c_pair[np.ix_(perm, perm)]


def jc_chsh_oracle(
    p: ModularParams,
    jc: JCParams,
    h_a: MomentumProfile,
    h_b: MomentumProfile,
    cfg: FockConfig,
    max_particles: int = 1,
    c_eff: np.ndarray | None = None,
) -> float:
    """Expectation of C in the exact JC ground state (signed; singlet has r = -1).

    ``c_eff`` may be passed in to reuse one :func:`effective_chsh_matrix`
    across couplings.
    """
    g = perturbation_oracle(jc, h_a, h_b, max_particles)
    if c_eff is None:
        c_eff = effective_chsh_matrix(p, cfg)
    return float(np.trace(g.qubit_density() @ c_eff).real)


def corrected_chsh_pipeline(p: ModularParams, jc: JCParams, h_a: MomentumProfile, h_b: MomentumProfile, rtol: float = 1e-8) -> float:
    """``(1 - delta^2) <C0>``."""
    d2 = delta_squared(jc, h_a, h_b, rtol)
    if d2 > 1:
        raise NumericalError(f"delta^2 = {d2!r} exceeds 1; couplings outside the perturbative regime")
    return (1.0 - d2) * chsh_correlator(p).value
