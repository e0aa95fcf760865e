"""Kraus channels: construction, action on density matrices, remixing and
tensor powers, plus the qubit channels used throughout the tests."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .linalg import ShapeError, as_matrix, as_square, require_unitary

COMPLETENESS_TOL = 1e-9
DENSITY_TOL = 1e-12
POSITIVITY_FLOOR = -1e-9
DEFAULT_MAX_DIM = 64

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


class CompletenessError(ValueError):
    """Kraus operators do not satisfy sum_k G_k^dag G_k = I."""

    def __init__(self, defect: float, tol: float):
        self.defect = defect
        super().__init__(
            f"Kraus set is not trace preserving: max|sum G^dag G - I| = {defect:.3e} > {tol:g}"
        )


class BudgetError(ValueError):
    """A tensor power would exceed the configured dimension cap."""


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A trace-preserving map rho -> sum_k G_k rho G_k^dag.

    Build instances with :func:`make_channel`, which validates completeness.
    """

    dim: int
    kraus: tuple

    def __len__(self) -> int:
        return len(self.kraus)

    def completeness_defect(self) -> float:
        s = sum(g.conj().T @ g for g in self.kraus)
        return float(np.max(np.abs(s - np.eye(self.dim))))

    def to_dict(self) -> dict:
        return {"dim": self.dim, "kraus": [matrix_to_dict(g) for g in self.kraus]}


def make_channel(kraus: Sequence, tol: float = COMPLETENESS_TOL) -> KrausChannel:
    if len(kraus) == 0:
        raise ValueError("a channel needs at least one Kraus operator")
    ops = [as_square(g, f"G_{k}").copy() for k, g in enumerate(kraus)]
    n = ops[0].shape[0]
    for k, g in enumerate(ops):
        if g.shape != (n, n):
            raise ShapeError(f"G_{k} has shape {g.shape}, expected {(n, n)}")
    for g in ops:
        g.setflags(write=False)
    ch = KrausChannel(dim=n, kraus=tuple(ops))
    defect = ch.completeness_defect()
    if defect > tol:
        raise CompletenessError(defect, tol)
    return ch


def unitary_channel(u) -> KrausChannel:
    return make_channel([require_unitary(u, "U")])


def depolarizing_channel(p: float) -> KrausChannel:
    """Qubit kept with probability ``p``, replaced by I/2 otherwise."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    a = np.sqrt(3 * p + 1) / 2
    b = np.sqrt(1 - p) / 2
    return make_channel([a * np.eye(2), b * PAULI_X, b * PAULI_Y, b * PAULI_Z])


def amplitude_damping_channel(gamma_t: float) -> KrausChannel:
    """Decay |1> -> |0> after time t at rate Gamma; ``gamma_t`` is Gamma*t."""
    if not gamma_t >= 0.0:
        raise ValueError(f"gamma_t must be >= 0, got {gamma_t}")
    decay = np.exp(-gamma_t)
    m0 = np.array([[1, 0], [0, np.exp(-gamma_t / 2)]], dtype=np.complex128)
    m1 = np.array([[0, np.sqrt(1 - decay)], [0, 0]], dtype=np.complex128)
    return make_channel([m0, m1])


def random_channel(n: int, m: int, rng: np.random.Generator) -> KrausChannel:
    """Random channel with ``m`` Kraus operators from a random isometry."""
    from .linalg import random_unitary

    v = random_unitary(n * m, rng)[:, :n]
    return make_channel([v[k * n : (k + 1) * n] for k in range(m)])


def density_matrix(rho) -> np.ndarray:
    """Validate ``rho`` as a density matrix and return it as an array."""
    rho = as_square(rho, "rho")
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > DENSITY_TOL:
        raise ValueError(f"rho is not Hermitian (defect {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1) > DENSITY_TOL:
        raise ValueError(f"rho has trace {tr}, expected 1")
    lo = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0])
    if lo < POSITIVITY_FLOOR:
        raise ValueError(f"rho has negative eigenvalue {lo:.3e}")
    return rho


def random_density_matrix(n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def apply(channel: KrausChannel, rho) -> np.ndarray:
    rho = as_square(rho, "rho")
    if rho.shape[0] != channel.dim:
        raise ShapeError(f"rho is {rho.shape[0]}-dim, channel is {channel.dim}-dim")
    return sum(g @ rho @ g.conj().T for g in channel.kraus)


def pad(channel: KrausChannel, m: int) -> KrausChannel:
    """Append zero operators until the set has ``m`` elements."""
    if m < len(channel):
        raise ValueError(f"cannot pad {len(channel)} operators down to {m}")
    zeros = [np.zeros((channel.dim, channel.dim), dtype=np.complex128)] * (m - len(channel))
    return make_channel(list(channel.kraus) + zeros)


def remix(channel: KrausChannel, v) -> KrausChannel:
    """Kraus set G'_k = sum_j V[k, j] G_j, which represents the same map."""
    v = require_unitary(v, "V")
    if v.shape[0] != len(channel):
        raise ShapeError(
            f"V is {v.shape[0]}x{v.shape[0]} but the channel has {len(channel)} operators; pad first"
        )
    stack = np.stack(channel.kraus)
    return make_channel(list(np.einsum("kj,jab->kab", v, stack)))


def tensor_power(channel: KrausChannel, k: int, max_dim: int = DEFAULT_MAX_DIM) -> KrausChannel:
    """K-fold tensor power; Kraus index vectors enumerated row-major."""
    if k < 1:
        raise ValueError("K must be >= 1")
    dim = channel.dim**k
    if dim > max_dim:
        raise BudgetError(
            f"tensor power needs dimension {dim} and {len(channel) ** k} operators; cap is dim <= {max_dim}"
        )
    ops = [
        reduce(np.kron, combo) for combo in itertools.product(channel.kraus, repeat=k)
    ]
    return make_channel(ops)


# file format: {"rows", "cols", "data": [[re, im], ...]} row-major


def matrix_to_dict(m) -> dict:
    m = as_matrix(m)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def matrix_from_dict(doc: dict, name: str = "matrix") -> np.ndarray:
    try:
        rows, cols, data = int(doc["rows"]), int(doc["cols"]), doc["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{name}: expected keys rows, cols, data ({exc})") from exc
    if rows < 1 or cols < 1:
        raise ValueError(f"{name}: rows and cols must be positive")
    if len(data) != rows * cols:
        raise ValueError(f"{name}: data has {len(data)} entries, expected rows*cols = {rows * cols}")
    try:
        arr = np.array([complex(float(re), float(im)) for re, im in data], dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{name}: each entry must be an [re, im] pair of numbers") from exc
    return as_matrix(arr.reshape(rows, cols), name)


def channel_from_dict(doc: dict) -> KrausChannel:
    if "kraus" not in doc:
        raise ValueError("channel document needs a 'kraus' array")
    ops = [matrix_from_dict(m, f"kraus[{k}]") for k, m in enumerate(doc["kraus"])]
    ch = make_channel(ops)
    if "dim" in doc and int(doc["dim"]) != ch.dim:
        raise ShapeError(f"declared dim {doc['dim']} does not match operators of size {ch.dim}")
    return ch
