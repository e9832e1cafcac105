"""Two driven atoms, each decaying into its own vacuum cavity mode.

States are written in the dressed product basis
``|1> = |++>, |2> = |+->, |3> = |-+>, |4> = |-->``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .atom_field import DrivenJCParams, amplitudes, dressed_frame

X_TOL = 1e-12


class EWLKind(enum.Enum):
    PHI = "phi"
    PSI = "psi"


@dataclass(frozen=True)
class XState:
    """The seven independent entries of an X-shaped two-qubit state.

    Fields may also be numpy arrays of a common shape, which is how time
    series are evaluated in one pass.
    """

    rho11: float
    rho22: float
    rho33: float
    rho44: float
    rho14: complex = 0.0
    rho23: complex = 0.0

    def check(self, tol: float = X_TOL) -> None:
        pops = np.array([self.rho11, self.rho22, self.rho33, self.rho44], dtype=float)
        if np.any(pops < -tol):
            raise ValueError("X state has a negative population")
        if np.any(np.abs(pops.sum(axis=0) - 1.0) > tol):
            raise ValueError("X state populations do not sum to one")
        if np.any(np.abs(self.rho14) ** 2 > self.rho11 * self.rho44 + tol):
            raise ValueError("|rho14|^2 exceeds rho11 * rho44")
        if np.any(np.abs(self.rho23) ** 2 > self.rho22 * self.rho33 + tol):
            raise ValueError("|rho23|^2 exceeds rho22 * rho33")

    def to_matrix(self) -> np.ndarray:
        m = np.diag(np.array([self.rho11, self.rho22, self.rho33, self.rho44], dtype=complex))
        m[0, 3] = self.rho14
        m[3, 0] = np.conj(self.rho14)
        m[1, 2] = self.rho23
        m[2, 1] = np.conj(self.rho23)
        return m

    @classmethod
    def from_matrix(cls, m, tol: float = 1e-14) -> "XState":
        m = np.asarray(m, dtype=complex)
        leak = np.abs(m * (1 - _X_MASK)).max()
        if leak > tol:
            raise ValueError(f"matrix is not X-shaped (off-X magnitude {leak:.3e})")
        d = np.diag(m).real
        return cls(d[0], d[1], d[2], d[3], complex(m[0, 3]), complex(m[1, 2]))


_X_MASK = np.eye(4) + np.fliplr(np.eye(4))


@dataclass(frozen=True)
class EWLSpec:
    """Extended Werner-like state ``r |pure><pure| + (1 - r) I / 4``.

    For ``PHI`` the pure part is ``mu |-+> + nu |+->``, for ``PSI`` it is
    ``mu |--> + nu |++>``.
    """

    kind: EWLKind
    r: float
    mu: complex
    nu: complex

    def __post_init__(self):
        object.__setattr__(self, "kind", EWLKind(self.kind))
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"purity r must lie in [0, 1], got {self.r}")
        norm = abs(self.mu) ** 2 + abs(self.nu) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|mu|^2 + |nu|^2 = {norm!r}, expected 1")

    @classmethod
    def from_weight(cls, kind, r: float, mu_sq: float, nu_phase: float = 0.0) -> "EWLSpec":
        """Build from ``|mu|^2`` with real ``mu`` and ``nu = |nu| exp(i nu_phase)``."""
        if not 0.0 <= mu_sq <= 1.0:
            raise ValueError(f"|mu|^2 must lie in [0, 1], got {mu_sq}")
        nu = math.sqrt(1.0 - mu_sq)
        return cls(kind, r, complex(math.sqrt(mu_sq)), nu * complex(math.cos(nu_phase), math.sin(nu_phase)))


@dataclass(frozen=True)
class DampingChannel:
    """Single-atom vacuum channel set by the survival amplitude ``alpha0``."""

    alpha0: complex

    def __post_init__(self):
        if np.any(np.abs(self.alpha0) > 1.0 + 1e-12):
            raise ValueError(f"|alpha0| must not exceed 1, got {np.max(np.abs(self.alpha0))}")

    @classmethod
    def at(cls, p: DrivenJCParams, t) -> "DampingChannel":
        """Channel reached after time ``t`` in a vacuum cavity."""
        alpha, _, _ = amplitudes(dressed_frame(p), 0, t)
        return cls(alpha)

    def kraus(self) -> tuple[np.ndarray, np.ndarray]:
        a = complex(self.alpha0)
        k0 = np.array([[a, 0], [0, 1]], dtype=complex)
        k1 = np.array([[0, 0], [math.sqrt(max(0.0, 1.0 - abs(a) ** 2)), 0]], dtype=complex)
        return k0, k1


def ewl_state(spec: EWLSpec) -> XState:
    base = (1.0 - spec.r) / 4.0
    mu2, nu2 = abs(spec.mu) ** 2, abs(spec.nu) ** 2
    coh = spec.r * spec.nu * np.conj(spec.mu)
    if spec.kind is EWLKind.PHI:
        return XState(base, base + spec.r * nu2, base + spec.r * mu2, base, 0.0, coh)
    return XState(base + spec.r * nu2, base, base, base + spec.r * mu2, coh, 0.0)


def apply_local_channel(rho, ch: DampingChannel) -> np.ndarray:
    """Evolve a single-atom state given in the ``(|+>, |->)`` basis.

    The ``|+>`` population decays into ``|->`` with survival ``|alpha0|^2``
    and the coherence picks up a factor ``alpha0``.
    """
    rho = np.asarray(rho, dtype=complex)
    a = ch.alpha0
    keep = abs(a) ** 2
    out = np.empty((2, 2), dtype=complex)
    out[0, 0] = keep * rho[0, 0]
    out[1, 1] = rho[1, 1] + (1.0 - keep) * rho[0, 0]
    out[0, 1] = a * rho[0, 1]
    out[1, 0] = np.conj(out[0, 1])
    return out


def evolve_pair(x, ch_a: DampingChannel, ch_b: DampingChannel):
    """Apply independent channels to atoms A and B.

    ``x`` is either an :class:`XState` (entrywise update, array fields are
    broadcast) or a general 4x4 matrix (Kraus operators).
    """
    if isinstance(x, XState):
        aa, ab = ch_a.alpha0, ch_b.alpha0
        ka, kb = np.abs(aa) ** 2, np.abs(ab) ** 2
        return XState(
            rho11=ka * kb * x.rho11,
            rho22=ka * (1 - kb) * x.rho11 + ka * x.rho22,
            rho33=(1 - ka) * kb * x.rho11 + kb * x.rho33,
            rho44=(1 - ka) * (1 - kb) * x.rho11 + (1 - ka) * x.rho22 + (1 - kb) * x.rho33 + x.rho44,
            rho14=aa * ab * x.rho14,
            rho23=aa * np.conj(ab) * x.rho23,
        )
    rho = np.asarray(x, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 two-atom matrix, got {rho.shape}")
    out = np.zeros((4, 4), dtype=complex)
    for ka in ch_a.kraus():
        for kb in ch_b.kraus():
            k = np.kron(ka, kb)
            out += k @ rho @ k.conj().T
    return out


def _block_terms(x: XState):
    f1 = 0.5 * (np.sqrt((x.rho22 - x.rho33) ** 2 + 4.0 * np.abs(x.rho14) ** 2) - x.rho22 - x.rho33)
    f2 = 0.5 * (np.sqrt((x.rho11 - x.rho44) ** 2 + 4.0 * np.abs(x.rho23) ** 2) - x.rho11 - x.rho44)
    return f1, f2


def x_log_negativity(x: XState):
    """Closed-form ``(N, E)`` of an X state."""
    f1, f2 = _block_terms(x)
    n = np.maximum(0.0, f1) + np.maximum(0.0, f2)
    return n, np.log2(1.0 + 2.0 * n)


def x_margin(x: XState):
    """Signed distance to separability: positive iff the state is entangled.

    This is minus the smallest eigenvalue of the partial transpose.
    """
    f1, f2 = _block_terms(x)
    return np.maximum(f1, f2)
