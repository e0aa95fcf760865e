"""Closed-form average fidelities of quantum operations.

Everything here reduces to one identity: the Haar average over pure states of
|<psi|M|psi>|^2 for an n x n operator M equals

    (Tr(M M^dag) + |Tr M|^2) / (n (n + 1)).

Unitary gates use M = U0^dag U, subspace fidelities use the relevant block of
that product, and Kraus channels sum the identity over M_k = U0^dag G_k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .channels import KrausChannel, tensor_power, DEFAULT_MAX_DIM
from .geometry import origin_hull_distance
from .haar import McEstimate
from .linalg import ShapeError, as_square, require_unitary, unitary_eigenphases

IMAG_TOL = 1e-12
TRACE_PRESERVING_TOL = 1e-9
ACCEPTANCE_FLOOR = 1e-12
ABOVE_ONE_SLACK = 1e-12
BOUND_SLACK = 1e-12

KINDS = ("unitary", "subspace", "kraus", "composite")


class DegenerateAcceptanceError(ArithmeticError):
    """Post-selection acceptance probability is effectively zero."""


@dataclass(frozen=True)
class FidelityReport:
    mean_fidelity: float
    kind: str
    dim: int
    worst_case: Optional[float] = None
    acceptance_q: Optional[float] = None
    conditional: Optional[float] = None
    mc_crosscheck: Optional[McEstimate] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown report kind {self.kind!r}")
        f = self.mean_fidelity
        if not -BOUND_SLACK <= f <= 1 + BOUND_SLACK:
            raise ValueError(f"mean fidelity {f} outside [0, 1]")
        if self.kind in ("unitary", "kraus") and f < 1 / (self.dim + 1) - BOUND_SLACK:
            raise ValueError(f"mean fidelity {f} below the 1/(n+1) floor for n={self.dim}")
        if self.conditional is not None and not (
            self.acceptance_q is not None and self.acceptance_q > ACCEPTANCE_FLOOR
        ):
            raise ValueError("conditional fidelity requires a non-degenerate acceptance_q")

    def with_mc(self, est: McEstimate) -> "FidelityReport":
        return replace(self, mc_crosscheck=est)

    def as_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "dim": self.dim,
            "mean_fidelity": self.mean_fidelity,
        }
        for key in ("worst_case", "acceptance_q", "conditional"):
            value = getattr(self, key)
            if value is not None:
                d[key] = value
        if self.mc_crosscheck is not None:
            d["mc_crosscheck"] = self.mc_crosscheck.as_dict()
        return d


@dataclass(frozen=True)
class SubspaceSelector:
    """Computational-basis indices spanning the relevant subspace."""

    ambient_dim: int
    indices: tuple = field(default=())

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise ValueError("subspace selector needs at least one index")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"subspace indices must be strictly increasing, got {idx}")
        if idx[0] < 0 or idx[-1] >= self.ambient_dim:
            raise ValueError(f"subspace indices {idx} out of range for dimension {self.ambient_dim}")
        object.__setattr__(self, "indices", idx)

    @property
    def n_rel(self) -> int:
        return len(self.indices)

    def projector(self) -> np.ndarray:
        p = np.zeros((self.ambient_dim, self.ambient_dim), dtype=np.complex128)
        p[self.indices, self.indices] = 1
        return p

    def block(self, m: np.ndarray) -> np.ndarray:
        """The n_rel x n_rel submatrix of ``m`` on the selected indices."""
        if m.shape != (self.ambient_dim, self.ambient_dim):
            raise ShapeError(f"matrix shape {m.shape} does not match ambient dimension {self.ambient_dim}")
        return m[np.ix_(self.indices, self.indices)]


def avg_quadratic_form(m) -> float:
    """Haar average of |<psi|M|psi>|^2 over unit vectors psi."""
    m = as_square(m, "M")
    n = m.shape[0]
    hs = np.trace(m @ m.conj().T)
    # Tr(M M^dag) is a sum of |entries|^2; an imaginary part means corrupted input
    assert abs(hs.imag) <= IMAG_TOL * max(1.0, abs(hs.real)), hs
    tr = np.trace(m)
    return float((hs.real + abs(tr) ** 2) / (n * (n + 1)))


def _pair(target, actual):
    u0 = require_unitary(target, "target")
    u = require_unitary(actual, "actual")
    if u0.shape != u.shape:
        raise ShapeError(f"target {u0.shape} and actual {u.shape} differ in dimension")
    return u0, u


def avg_unitary(target, actual) -> FidelityReport:
    u0, u = _pair(target, actual)
    return FidelityReport(avg_quadratic_form(u0.conj().T @ u), "unitary", u0.shape[0])


def worst_case_unitary(target, actual) -> float:
    """Minimum over pure states of |<psi|U0^dag U|psi>|^2.

    <psi|M|psi> sweeps the convex hull of M's eigenvalues on the unit circle,
    so the minimum is the squared distance from the origin to that hull.
    """
    u0, u = _pair(target, actual)
    phases = unitary_eigenphases(u0.conj().T @ u)
    points = np.column_stack([np.cos(phases), np.sin(phases)])
    return origin_hull_distance(points) ** 2


def _selector(sel, n: int) -> SubspaceSelector:
    if isinstance(sel, SubspaceSelector):
        if sel.ambient_dim != n:
            raise ShapeError(f"selector ambient dimension {sel.ambient_dim} != operator dimension {n}")
        return sel
    return SubspaceSelector(n, tuple(sel))


def avg_subspace(target, actual, sel) -> FidelityReport:
    u0, u = _pair(target, actual)
    sel = _selector(sel, u.shape[0])
    f = avg_quadratic_form(sel.block(u0.conj().T @ u))
    return FidelityReport(f, "subspace", sel.n_rel)


def acceptance_probability(actual, sel) -> float:
    """Average acceptance of a measurement confirming the relevant subspace.

    Uses the same quadratic average as the fidelity, applied to the block of
    U^dag P U on the subspace.
    """
    u = require_unitary(actual, "actual")
    sel = _selector(sel, u.shape[0])
    m = u.conj().T @ sel.projector() @ u
    return avg_quadratic_form(sel.block(m))


def conditional_fidelity(target, actual, sel) -> FidelityReport:
    base = avg_subspace(target, actual, sel)
    q = acceptance_probability(actual, sel)
    if q <= ACCEPTANCE_FLOOR:
        raise DegenerateAcceptanceError(f"acceptance probability {q:.3e} is effectively zero")
    return replace(base, acceptance_q=q, conditional=base.mean_fidelity / q)


def avg_kraus(target, channel: KrausChannel) -> FidelityReport:
    u0 = require_unitary(target, "target")
    if not isinstance(channel, KrausChannel):
        raise TypeError("channel must be a KrausChannel")
    n = channel.dim
    if u0.shape[0] != n:
        raise ShapeError(f"target is {u0.shape[0]}-dim, channel is {n}-dim")
    ms = [u0.conj().T @ g for g in channel.kraus]
    first = sum(np.trace(mk.conj().T @ mk) for mk in ms)
    if abs(first - n) > TRACE_PRESERVING_TOL:
        raise ValueError(f"Tr(sum M_k^dag M_k) = {first}, expected {n}; channel not trace preserving")
    overlap = sum(abs(np.trace(mk)) ** 2 for mk in ms)
    return FidelityReport(float((n + overlap) / (n * (n + 1))), "kraus", n)


def composite_fidelity(n: int, k: int, f_single: float) -> float:
    """Average fidelity on n**k dimensions when every qudit sees the same map.

    ``f_single`` is the one-qudit average fidelity; the register fidelity is
    (1 + ((n+1) f_single - 1)**k) / (n**k + 1).
    """
    if n < 2 or k < 1:
        raise ValueError(f"need n >= 2 and K >= 1, got n={n}, K={k}")
    floor = 1 / (n + 1)
    if f_single > 1:
        if f_single > 1 + ABOVE_ONE_SLACK:
            raise ValueError(f"f_single={f_single} exceeds 1")
        f_single = 1.0
    if f_single < floor:
        if f_single < floor - BOUND_SLACK:
            raise ValueError(f"f_single={f_single} below the 1/(n+1)={floor} floor")
        f_single = floor
    x = max((n + 1) * f_single - 1, 0.0)
    if k * math.log2(n) <= 53:
        # exact integer n**k keeps the endpoint cases exact
        nk = n**k
        return (1 + x**k) / (nk + 1)
    log_nk = k * math.log(n)
    log_denom = log_nk + math.log1p(math.exp(-log_nk))
    tail = math.exp(k * math.log(x) - log_denom) if x > 0 else 0.0
    return math.exp(-log_denom) + tail


def composite_bruteforce_check(
    channel: KrausChannel, k: int, max_dim: int = DEFAULT_MAX_DIM
) -> tuple[float, float]:
    """(brute-force register fidelity, composite-law prediction)."""
    big = tensor_power(channel, k, max_dim=max_dim)
    brute = avg_kraus(np.eye(big.dim), big).mean_fidelity
    single = avg_kraus(np.eye(channel.dim), channel).mean_fidelity
    return brute, composite_fidelity(channel.dim, k, single)


def asymptotic_register_fidelity(f_single: float, k: int) -> float:
    """Many-qubit approximation f_single ** (3K/2)."""
    return f_single ** (1.5 * k)
