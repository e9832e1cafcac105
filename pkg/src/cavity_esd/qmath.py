"""Dense complex linear algebra and the partial-transpose negativity oracle.

Matrices are plain ``numpy`` complex arrays. The eigensolver is a cyclic
Jacobi iteration with complex plane rotations, which is plenty for the
matrix sizes used here (dimension up to roughly one hundred).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
STATE_HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
# eigenvalues in (-NEG_CLIP, 0) are counted as zero when summing negativity
NEG_CLIP = 1e-10

JACOBI_REL_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100


class NotHermitianError(ValueError):
    """Raised when a matrix handed to the eigensolver is not Hermitian."""


class NoConvergenceError(ArithmeticError):
    """Raised when the Jacobi sweep cap is reached."""


class BadBipartitionError(ValueError):
    """Raised when a state does not split into exactly two subsystems."""


@dataclass(frozen=True)
class DensityMatrix:
    """A density matrix together with its subsystem dimensions.

    Construction checks shape and Hermiticity only; trace and positivity
    are checked on demand by :meth:`check` because positivity needs a full
    diagonalization.
    """

    mat: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        mat = np.array(self.mat, dtype=complex)
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"density matrix must be square, got {mat.shape}")
        if math.prod(self.dims) != mat.shape[0]:
            raise ValueError(f"dims {self.dims} do not match dimension {mat.shape[0]}")
        asym = np.max(np.abs(mat - mat.conj().T)) if mat.size else 0.0
        if asym > STATE_HERMITIAN_TOL:
            raise NotHermitianError(f"density matrix asymmetry {asym:.3e}")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    def check(self, trace_deficit_tol: float = 0.0) -> None:
        """Validate unit trace (or a bounded deficit) and positivity."""
        tr = np.trace(self.mat)
        if abs(tr.imag) > STATE_HERMITIAN_TOL:
            raise ValueError(f"trace has imaginary part {tr.imag:.3e}")
        deficit = 1.0 - tr.real
        if deficit < -STATE_HERMITIAN_TOL or deficit > trace_deficit_tol + STATE_HERMITIAN_TOL:
            raise ValueError(f"trace {tr.real!r} outside allowed range")
        lo = hermitian_eigenvalues(self.mat)[0]
        if lo < -PSD_TOL:
            raise ValueError(f"density matrix not positive semidefinite (min eig {lo:.3e})")


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product ``a (x) b``."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def jacobi_eigh(m, rel_tol: float = JACOBI_REL_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Diagonalize a Hermitian matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    m : array_like
        Square Hermitian matrix.
    rel_tol : float
        Stop once the off-diagonal Frobenius norm is at most ``rel_tol``
        times the Frobenius norm of the diagonal.
    max_sweeps : int
        Hard cap on the number of full sweeps.

    Returns
    -------
    w : ndarray
        Eigenvalues in ascending order.
    v : ndarray
        Unitary matrix whose columns are the matching eigenvectors, so that
        ``m = v @ diag(w) @ v.conj().T``.
    """
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got {a.shape}")
    n = a.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    asym = np.max(np.abs(a - a.conj().T))
    if asym > HERMITIAN_TOL:
        raise NotHermitianError(f"matrix asymmetry {asym:.3e} exceeds {HERMITIAN_TOL}")
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    upper = np.triu(np.ones((n, n), dtype=bool), 1)

    for sweep in range(max_sweeps + 1):
        offdiag = a[upper]
        off = math.sqrt(2.0 * float(np.sum(np.abs(offdiag) ** 2)))
        diag = float(np.linalg.norm(np.diag(a).real))
        if off <= rel_tol * diag or off == 0.0:
            break
        if sweep == max_sweeps:
            raise NoConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps (off={off:.3e})")
        rows, cols = np.nonzero(upper & (a != 0))
        for p, q in zip(rows.tolist(), cols.tolist()):
            apq = a[p, q]
            mag = abs(apq)
            if mag == 0.0:
                continue
            app = a[p, p].real
            aqq = a[q, q].real
            if abs(app) + 100.0 * mag == abs(app) and abs(aqq) + 100.0 * mag == abs(aqq):
                a[p, q] = a[q, p] = 0.0
                continue
            _rotate(a, v, p, q, apq, mag, app, aqq)

    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def _rotate(a, v, p, q, apq, mag, app, aqq):
    phase = apq / mag
    zeta = (aqq - app) / (2.0 * mag)
    t = 1.0 / (abs(zeta) + math.sqrt(zeta * zeta + 1.0))
    if zeta < 0.0:
        t = -t
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c
    u = np.array([[c, s], [-phase.conjugate() * s, phase.conjugate() * c]])
    idx = [p, q]
    a[:, idx] = a[:, idx] @ u
    a[idx, :] = u.conj().T @ a[idx, :]
    a[p, q] = a[q, p] = 0.0
    a[p, p] = app - t * mag
    a[q, q] = aqq + t * mag
    v[:, idx] = v[:, idx] @ u


def hermitian_eigenvalues(m) -> np.ndarray:
    """Ascending real spectrum of a Hermitian matrix."""
    return jacobi_eigh(m)[0]


def _split(rho) -> tuple[np.ndarray, tuple[int, ...]]:
    if isinstance(rho, DensityMatrix):
        return rho.mat, rho.dims
    raise TypeError("expected a DensityMatrix")


def partial_transpose(rho: DensityMatrix, subsystem: int = 1) -> np.ndarray:
    """Transpose the indices of one factor of a bipartite density matrix."""
    mat, dims = _split(rho)
    if len(dims) != 2:
        raise BadBipartitionError(f"need exactly two subsystems, got dims={dims}")
    if subsystem not in (0, 1):
        raise ValueError(f"subsystem must be 0 or 1, got {subsystem}")
    da, db = dims
    t = mat.reshape(da, db, da, db)
    if subsystem == 0:
        t = t.transpose(2, 1, 0, 3)
    else:
        t = t.transpose(0, 3, 2, 1)
    return t.reshape(da * db, da * db).copy()


def negativity_from_spectrum(eigs: Sequence[float]) -> float:
    eigs = np.asarray(eigs, dtype=float)
    neg = eigs[eigs <= -NEG_CLIP]
    return float(-neg.sum()) if neg.size else 0.0


def negativity_oracle(rho: DensityMatrix, subsystem: int = 1) -> tuple[float, float]:
    """Negativity and logarithmic negativity by brute-force diagonalization.

    Returns ``(N, E)`` with ``N`` the magnitude of the summed negative
    eigenvalues of the partial transpose and ``E = log2(1 + 2N)``.
    """
    eigs = hermitian_eigenvalues(partial_transpose(rho, subsystem))
    n = negativity_from_spectrum(eigs)
    return n, math.log2(1.0 + 2.0 * n)


def pure_density(psi, dims: Sequence[int]) -> DensityMatrix:
    """Projector onto a state vector."""
    psi = np.asarray(psi, dtype=complex).ravel()
    return DensityMatrix(np.outer(psi, psi.conj()), tuple(dims))
