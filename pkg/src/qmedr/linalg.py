"""Dense linear-algebra substrate.

Eigendecompositions, matrix exponentials, norms and unitarity checks used
both inside the simulator and as exact classical references. Everything here
is a pure function over immutable inputs and safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

HERMITICITY_TOL = 1e-9


def as_square(m) -> np.ndarray:
    """Validate and return a square 2-D array with finite entries."""
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.size and not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    return a


def hermiticity_defect(m: np.ndarray) -> float:
    """Largest elementwise deviation of m from its conjugate transpose."""
    a = as_square(m)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def is_hermitian(m: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    return hermiticity_defect(m) <= tol


def hermitize(m: np.ndarray) -> np.ndarray:
    a = as_square(m)
    return (a + a.conj().T) / 2


@dataclass(frozen=True)
class HermitianSpectrum:
    """Eigendecomposition of a Hermitian matrix.

    ``eigenvalues`` are ascending reals; column ``eigenvectors[:, i]`` is the
    unit eigenvector for ``eigenvalues[i]``, with the first nonnegligible
    component rotated to be nonnegative real so orderings are reproducible.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _fix_vector_signs(v: np.ndarray) -> np.ndarray:
    """Rotate each column so its first component above threshold is positive real."""
    v = v.copy()
    n = v.shape[0]
    for j in range(v.shape[1]):
        col = v[:, j]
        idx = np.argmax(np.abs(col) > 1e-12 / max(n, 1))
        pivot = col[idx]
        if np.abs(pivot) > 0:
            v[:, j] = col * (np.conj(pivot) / np.abs(pivot))
    return v


def hermitian_eig(m) -> HermitianSpectrum:
    """Eigendecomposition of a Hermitian matrix with deterministic ordering.

    Raises if the input is not square or deviates from Hermitian by more than
    1e-9 elementwise. Ascending eigenvalues; eigh's ordering is kept for exact
    ties (stable for identical inputs).
    """
    a = as_square(m)
    defect = hermiticity_defect(a)
    if defect > HERMITICITY_TOL:
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3e} > {HERMITICITY_TOL})")
    w, v = np.linalg.eigh(hermitize(a))
    v = _fix_vector_signs(v)
    if not np.iscomplexobj(a):
        v = v.real
    return HermitianSpectrum(eigenvalues=w, eigenvectors=v)


def expm(m) -> np.ndarray:
    """Matrix exponential.

    Hermitian inputs go through the eigendecomposition; anything else falls
    back to scaling-and-squaring with Pade approximants (scipy).
    """
    a = as_square(m)
    if a.size == 0:
        return a.copy()
    if is_hermitian(a):
        w, v = np.linalg.eigh(hermitize(a))
        out = (v * np.exp(w)) @ v.conj().T
        if not np.iscomplexobj(a):
            out = out.real
        return out
    return scipy.linalg.expm(a)


def spectral_norm(m) -> float:
    """Largest singular value."""
    a = np.asarray(m)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def frobenius_norm(m) -> float:
    return float(np.linalg.norm(np.asarray(m)))


def unitarity_defect(u) -> float:
    """max |U†U - I|; accepts a dense array or any object exposing the same."""
    if hasattr(u, "unitarity_defect"):
        return float(u.unitarity_defect())
    a = as_square(u)
    eye = np.eye(a.shape[0])
    return float(np.max(np.abs(a.conj().T @ a - eye)))


def unitarity_check(u, tol: float) -> bool:
    """True iff ``max |U†U - I| <= tol``."""
    return unitarity_defect(u) <= tol
