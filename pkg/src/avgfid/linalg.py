"""Dense complex matrix helpers.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. The functions here
add the shape and finiteness checks the rest of the package relies on.
"""

from __future__ import annotations

import numpy as np

UNITARY_TOL = 1e-9
FIXTURE_TOL = 1e-12


class ShapeError(ValueError):
    """Operand shapes are incompatible with the requested operation."""


class NotUnitaryError(ValueError):
    """A matrix expected to be unitary is not, within tolerance."""


class EigenphaseError(RuntimeError):
    """Eigenvalues of a unitary could not be recovered on the unit circle."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def as_square(a, name: str = "matrix") -> np.ndarray:
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {m.shape}")
    return m


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T


def multiply(a, b) -> np.ndarray:
    a = as_matrix(a, "A")
    b = as_matrix(b, "B")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def trace(a) -> complex:
    return complex(np.trace(as_square(a)))


def kron(a, b) -> np.ndarray:
    """Kronecker product; block (i, j) of the result is ``a[i, j] * b``."""
    return np.kron(as_matrix(a, "A"), as_matrix(b, "B"))


def unitarity_defect(a) -> float:
    """Max-entry norm of ``a^dagger a - I``."""
    m = as_square(a)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def is_unitary(a, tol: float = UNITARY_TOL) -> bool:
    return unitarity_defect(a) <= tol


def require_unitary(a, name: str = "matrix", tol: float = UNITARY_TOL) -> np.ndarray:
    m = as_square(a, name)
    defect = unitarity_defect(m)
    if defect > tol:
        raise NotUnitaryError(f"{name} is not unitary: max|U^dag U - I| = {defect:.3e} > {tol:g}")
    return m


def unitary_eigenphases(u, tol: float = UNITARY_TOL) -> np.ndarray:
    """Eigenphases of a unitary, sorted ascending, each in (-pi, pi].

    Eigenvalues are obtained from the complex Schur form, which is triangular
    and numerically stable for normal matrices. Each eigenvalue is projected
    back onto the unit circle before its angle is taken.
    """
    from scipy.linalg import schur

    m = require_unitary(u, "U", tol)
    try:
        t, _ = schur(m, output="complex")
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise EigenphaseError(f"Schur iteration did not converge: {exc}") from exc
    lam = np.diag(t)
    mod = np.abs(lam)
    if np.any(np.abs(mod - 1.0) > tol):
        raise EigenphaseError(f"eigenvalue moduli off the unit circle: {mod}")
    phases = np.angle(lam / mod)
    # np.angle returns [-pi, pi]; fold -pi onto +pi
    phases = np.where(phases <= -np.pi, phases + 2 * np.pi, phases)
    return np.sort(phases)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from QR of a complex Ginibre matrix with phase fix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_matrix(n: int, rng: np.random.Generator, kind: str = "general") -> np.ndarray:
    """Random test matrix of the given class.

    ``kind`` is one of ``"general"``, ``"hermitian"``, ``"antihermitian"`` or
    ``"unitary"``.
    """
    if kind == "unitary":
        return random_unitary(n, rng)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if kind == "general":
        return g
    if kind == "hermitian":
        return (g + g.conj().T) / 2
    if kind == "antihermitian":
        return (g - g.conj().T) / 2
    raise ValueError(f"unknown matrix kind {kind!r}")
