"""Dense complex matrix helpers and the tolerance policy.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``; there is
no wrapper type.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NegativeEigenvalue, NonHermitian


@dataclass(frozen=True)
class Tolerances:
    unitarity_tol: float = 1e-10
    psd_tol: float = 1e-8
    entropy_tol: float = 1e-9

    def __post_init__(self):
        for name in ("unitarity_tol", "psd_tol", "entropy_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    def as_dict(self) -> dict:
        return {
            "unitarity_tol": self.unitarity_tol,
            "psd_tol": self.psd_tol,
            "entropy_tol": self.entropy_tol,
        }


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class UnitarityVerdict:
    passed: bool
    deviation: float
    row_deviation: float

    def __bool__(self) -> bool:
        return self.passed


def as_matrix(m) -> np.ndarray:
    """Coerce ``m`` to a 2-D complex array with at least one row and column."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    return arr


def _require_square(m: np.ndarray) -> None:
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")


def hermiticity_deviation(m) -> float:
    m = as_matrix(m)
    _require_square(m)
    return float(np.max(np.abs(m - m.conj().T)))


def hermitian_eigenvalues(m, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix in descending order.

    Raises
    ------
    NonHermitian
        If ``max |m - m^H|`` exceeds ``tol.psd_tol``.
    """
    m = as_matrix(m)
    _require_square(m)
    deviation = hermiticity_deviation(m)
    if deviation > tol.psd_tol:
        raise NonHermitian(deviation, tol.psd_tol)
    # eigvalsh only reads one triangle; symmetrise so the result does not
    # depend on which one carries the rounding noise
    herm = 0.5 * (m + m.conj().T)
    return np.linalg.eigvalsh(herm)[::-1].copy()


def clamp_eigenvalues(values, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Zero out eigenvalues in ``[-psd_tol, 0)``; anything lower is an error."""
    values = np.asarray(values, dtype=np.float64)
    if values.size and values.min() < -tol.psd_tol:
        raise NegativeEigenvalue(float(values.min()), tol.psd_tol)
    return np.where(values < 0.0, 0.0, values)


def check_unitary(u, tol: Tolerances = DEFAULT_TOLERANCES) -> UnitarityVerdict:
    """Check ``u^H u = I`` and unit row norms within ``tol.unitarity_tol``."""
    u = as_matrix(u)
    _require_square(u)
    gram = u.conj().T @ u
    deviation = float(np.max(np.abs(gram - np.eye(u.shape[0]))))
    row_norms = np.sum(np.abs(u) ** 2, axis=1)
    row_deviation = float(np.max(np.abs(row_norms - 1.0)))
    passed = deviation <= tol.unitarity_tol and row_deviation <= tol.unitarity_tol
    return UnitarityVerdict(passed, deviation, row_deviation)


def random_unitary(n: int, rng=None) -> np.ndarray:
    """Haar-random ``n x n`` unitary.

    QR decomposition of a complex Ginibre matrix, with the phases of the
    triangular factor's diagonal moved into ``Q`` so that ``R`` has a real
    positive diagonal.

    Parameters
    ----------
    n : int
        Dimension, at least 1.
    rng : numpy.random.Generator or int or None
        Generator or seed. Passing the same integer seed twice returns the
        same matrix.
    """
    if n < 1:
        raise ValueError("dimension must be at least 1")
    rng = np.random.default_rng(rng)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    phases = d / np.abs(d)
    return q * phases[np.newaxis, :]


def rotation(theta: float) -> np.ndarray:
    """Real 2x2 rotation ``[[cos, -sin], [sin, cos]]`` as a complex matrix."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)
