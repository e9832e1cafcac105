"""Driven Jaynes-Cummings dynamics of one atom and one cavity mode.

Everything is evaluated in the dressed frame of the atom plus classical
drive, where the atom-cavity coupling only connects ``|+, n>`` with
``|-, n+1>``. Times are in units of ``1/g``.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .qmath import DensityMatrix, pure_density

logger = logging.getLogger(__name__)

DEFAULT_TAIL_TOL = 1e-12


class Branch(enum.Enum):
    """Convention for the dressed-state mixing angle."""

    HALF_PLANE = "halfplane"
    PRINCIPAL = "principal"


class CutoffTooSmallError(ValueError):
    """A fixed Fock cutoff drops more thermal weight than allowed."""


@dataclass(frozen=True)
class DrivenJCParams:
    omega: float
    omega0: float
    omega_c: float
    lam: float
    g: float = 1.0
    branch: Branch = Branch.HALF_PLANE

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"g must be positive, got {self.g}")
        if not self.lam >= 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam}")
        for name in ("omega", "omega0", "omega_c"):
            val = getattr(self, name)
            if not (val >= 0 and math.isfinite(val)):
                raise ValueError(f"{name} must be a finite non-negative number, got {val}")
        object.__setattr__(self, "branch", Branch(self.branch))


@dataclass(frozen=True)
class DressedFrame:
    theta: float
    delta1: float
    delta2: float
    omega_prime: float
    g_prime: float
    # False when lambda = 0 and delta1 = 0, where theta is set to 0 by convention
    angle_defined: bool = True


def dressed_frame(p: DrivenJCParams) -> DressedFrame:
    """Mixing angle, detunings and renormalized coupling for ``p``.

    With the half-plane branch ``theta = atan2(2 lam, delta1)``, so
    ``(cos theta/2, sin theta/2)`` is always the upper eigenvector of the
    atom plus drive Hamiltonian. The principal branch is the literal
    single-argument ``arctan(2 lam / delta1)``.
    """
    delta1 = p.omega0 - p.omega_c
    split = math.hypot(delta1, 2.0 * p.lam)
    defined = not (p.lam == 0 and delta1 == 0)
    if not defined:
        theta = 0.0
    elif p.branch is Branch.HALF_PLANE:
        theta = math.atan2(2.0 * p.lam, delta1)
    elif delta1 == 0:
        theta = math.pi / 2
    else:
        theta = math.atan(2.0 * p.lam / delta1)
    return DressedFrame(
        theta=theta,
        delta1=delta1,
        delta2=split + p.omega_c - p.omega,
        omega_prime=split + p.omega_c,
        g_prime=p.g * math.cos(theta / 2) ** 2,
        angle_defined=defined,
    )


def dressed_states(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """``|+>`` and ``|->`` as vectors in the ``(|e>, |g>)`` basis."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([c, s]), np.array([-s, c])


def amplitudes(f: DressedFrame, n: int, t):
    """Amplitudes of ``|+, n>`` and ``|-, n+1>`` after time ``t``.

    Starting from ``|+, n>``, returns ``(alpha_n, beta_{n+1}, Omega_n)``.
    ``t`` may be an array.
    """
    if n < 0:
        raise ValueError(f"photon number must be non-negative, got {n}")
    t = np.asarray(t, dtype=float)
    d2 = f.delta2
    coupling = f.g_prime * math.sqrt(n + 1)
    rabi = math.sqrt(d2 * d2 / 4.0 + coupling * coupling)
    if rabi == 0.0:
        alpha = np.ones_like(t, dtype=complex)
        beta = np.zeros_like(t, dtype=complex)
        return _unwrap(alpha), _unwrap(beta), rabi
    s = np.sin(rabi * t)
    alpha = np.exp(0.5j * d2 * t) * (np.cos(rabi * t) - 0.5j * d2 / rabi * s)
    beta = -1j * coupling * np.exp(-0.5j * d2 * t) * s / rabi
    return _unwrap(alpha), _unwrap(beta), rabi


def _unwrap(x):
    return x[()] if isinstance(x, np.ndarray) and x.ndim == 0 else x


def fock_state(p: DrivenJCParams, n: int, t: float) -> DensityMatrix:
    """Pure evolved state from ``|+, n>`` on the field levels ``0 .. n+1``.

    Ordering is atom (``+`` then ``-``) tensor field.
    """
    alpha, beta, _ = amplitudes(dressed_frame(p), n, t)
    levels = n + 2
    psi = np.zeros(2 * levels, dtype=complex)
    psi[n] = alpha
    psi[levels + n + 1] = beta
    return pure_density(psi, (2, levels))


def fock_log_negativity(p: DrivenJCParams, n: int, t):
    """Logarithmic negativity ``log2(1 + 2|alpha_n beta_{n+1}|)``."""
    alpha, beta, _ = amplitudes(dressed_frame(p), n, t)
    return np.log2(1.0 + 2.0 * np.abs(alpha * beta))


@dataclass(frozen=True)
class ThermalFieldSpec:
    """Thermal cavity field with mean photon number ``mean_photons``.

    ``cutoff`` is a floor on the highest Fock level kept. When
    ``auto_raise`` is set the cutoff grows until the neglected weight is
    below ``tail_tol``; otherwise too small a cutoff is an error.
    """

    mean_photons: float
    cutoff: int = 0
    tail_tol: float = DEFAULT_TAIL_TOL
    auto_raise: bool = True

    def __post_init__(self):
        if not (self.mean_photons >= 0 and math.isfinite(self.mean_photons)):
            raise ValueError(f"mean photon number must be finite and >= 0, got {self.mean_photons}")
        if self.cutoff < 0:
            raise ValueError(f"cutoff must be >= 0, got {self.cutoff}")
        if not 0 < self.tail_tol < 1:
            raise ValueError(f"tail_tol must lie in (0, 1), got {self.tail_tol}")

    @property
    def ratio(self) -> float:
        m = self.mean_photons
        return m / (1.0 + m)


def _min_level(q: float, tol: float, offset: int) -> int:
    # smallest N >= 0 with q**(N + offset) <= tol
    if q == 0.0:
        return max(0, 1 - offset)
    n = max(0, math.ceil(math.log(tol) / math.log(q)) - offset)
    while n > 0 and q ** (n - 1 + offset) <= tol:
        n -= 1
    while q ** (n + offset) > tol:
        n += 1
    return n


def weight_cutoff(spec: ThermalFieldSpec) -> int:
    """Highest level needed so that the weight above it is within ``tail_tol``."""
    need = _min_level(spec.ratio, spec.tail_tol, 1)
    if need <= spec.cutoff:
        return spec.cutoff
    if not spec.auto_raise:
        raise CutoffTooSmallError(
            f"cutoff {spec.cutoff} leaves tail weight {spec.ratio ** (spec.cutoff + 1):.3e} > {spec.tail_tol}"
        )
    logger.info("thermal cutoff raised from %d to %d", spec.cutoff, need)
    return need


def state_cutoff(spec: ThermalFieldSpec) -> int:
    """Field cutoff for the evolved state.

    Each thermal component ``|+, n>`` also populates ``|-, n+1>``, so the
    truncated state needs every level whose initial weight exceeds
    ``tail_tol`` plus one more. Equivalently the total weight at and above
    the cutoff level is within ``tail_tol``.
    """
    need = _min_level(spec.ratio, spec.tail_tol, 0)
    if need <= spec.cutoff:
        return spec.cutoff
    if not spec.auto_raise:
        raise CutoffTooSmallError(
            f"cutoff {spec.cutoff} drops weight {spec.ratio ** spec.cutoff:.3e} > {spec.tail_tol}"
        )
    logger.info("thermal state cutoff raised from %d to %d", spec.cutoff, need)
    return need


def _weights(m: float, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    if m == 0:
        return (n == 0).astype(float)
    return (m / (1.0 + m)) ** n / (1.0 + m)


def thermal_weights(spec: ThermalFieldSpec) -> np.ndarray:
    """Geometric photon-number weights ``p_0 .. p_cutoff``."""
    return _weights(spec.mean_photons, weight_cutoff(spec))


def _thermal_blocks(p: DrivenJCParams, spec: ThermalFieldSpec, t):
    """Populations and coherences of the truncated evolved thermal state."""
    frame = dressed_frame(p)
    cut = state_cutoff(spec)
    w = _weights(spec.mean_photons, cut)
    t = np.asarray(t, dtype=float)
    pop_plus = np.zeros((cut + 1,) + t.shape)
    pop_minus = np.zeros((cut + 1,) + t.shape)
    coh = np.zeros((cut,) + t.shape, dtype=complex)
    for n in range(cut + 1):
        alpha, beta, _ = amplitudes(frame, n, t)
        pop_plus[n] = w[n] * np.abs(alpha) ** 2
        if n < cut:
            pop_minus[n + 1] = w[n] * np.abs(beta) ** 2
            coh[n] = w[n] * alpha * np.conj(beta)
        elif spec.tail_tol < np.max(w[n] * np.abs(alpha * beta)):
            raise CutoffTooSmallError(f"dropped coherence at level {n} exceeds tail_tol")
    return cut, pop_plus, pop_minus, coh


def evolved_thermal_state(p: DrivenJCParams, spec: ThermalFieldSpec, t: float) -> DensityMatrix:
    """Truncated state at time ``t`` starting from ``|+><+|`` times a thermal field.

    Basis is ``{|+>, |->}`` tensor ``{|0> .. |N>}``. The truncated matrix is
    not renormalized.
    """
    cut, pop_plus, pop_minus, coh = _thermal_blocks(p, spec, float(t))
    levels = cut + 1
    rho = np.zeros((2 * levels, 2 * levels), dtype=complex)
    idx = np.arange(levels)
    rho[idx, idx] = pop_plus
    rho[levels + idx, levels + idx] = pop_minus
    for n in range(cut):
        rho[n, levels + n + 1] = coh[n]
        rho[levels + n + 1, n] = np.conj(coh[n])
    return DensityMatrix(rho, (2, levels))


def _thermal_xi(p, spec, t):
    # smaller eigenvalue of each 2x2 block of the partial transpose
    _, pop_plus, pop_minus, coh = _thermal_blocks(p, spec, t)
    a = pop_minus[:-1]
    b = pop_plus[1:]
    return 0.5 * (a + b - np.sqrt((a - b) ** 2 + 4.0 * np.abs(coh) ** 2))


def thermal_negativity(p: DrivenJCParams, spec: ThermalFieldSpec, t):
    """Negativity of the truncated evolved thermal state."""
    xi = _thermal_xi(p, spec, t)
    return 0.5 * np.sum(np.abs(xi) - xi, axis=0)


def thermal_margin(p: DrivenJCParams, spec: ThermalFieldSpec, t):
    """Largest negative partial-transpose eigenvalue magnitude (signed)."""
    return np.max(-_thermal_xi(p, spec, t), axis=0)


def thermal_log_negativity(p: DrivenJCParams, spec: ThermalFieldSpec, t):
    """Logarithmic negativity ``log2(1 + sum(|xi_n| - xi_n))``."""
    xi = _thermal_xi(p, spec, t)
    return np.log2(1.0 + np.sum(np.abs(xi) - xi, axis=0))
