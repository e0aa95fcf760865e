"""Composite-pulse design against the closed-form gate fidelity.

A pulse (theta, phi) is the qubit rotation exp(-i theta/2 (cos phi X + sin phi Y)).
Systematic errors scale every pulse area by a common factor and follow each
pulse with a z rotation by a detuning angle. The robust objective averages the
gate fidelity uniformly over a grid of such errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .fidelity import avg_quadratic_form
from .linalg import require_unitary

I2 = np.eye(2, dtype=np.complex128)


@dataclass(frozen=True)
class PulseSequence:
    pulses: tuple

    def __post_init__(self):
        ps = tuple((float(t), float(p)) for t, p in self.pulses)
        if not ps:
            raise ValueError("a pulse sequence needs at least one pulse")
        if not np.all(np.isfinite(ps)):
            raise ValueError("pulse parameters must be finite")
        object.__setattr__(self, "pulses", ps)

    def __len__(self) -> int:
        return len(self.pulses)

    @classmethod
    def from_vector(cls, x) -> "PulseSequence":
        x = np.asarray(x, dtype=float).reshape(-1, 2)
        return cls(tuple(map(tuple, x)))

    def to_vector(self) -> np.ndarray:
        return np.array(self.pulses, dtype=float).ravel()


@dataclass(frozen=True)
class ErrorGrid:
    amplitude_scales: tuple = (1.0,)
    detunings: tuple = (0.0,)

    def __post_init__(self):
        scales = tuple(float(s) for s in self.amplitude_scales)
        dets = tuple(float(d) for d in self.detunings)
        if not scales or not dets:
            raise ValueError("error grid lists must be non-empty")
        if not np.all(np.isfinite(scales + dets)):
            raise ValueError("error grid values must be finite")
        object.__setattr__(self, "amplitude_scales", scales)
        object.__setattr__(self, "detunings", dets)

    def points(self):
        return [(s, d) for s in self.amplitude_scales for d in self.detunings]


@dataclass(frozen=True)
class OptResult:
    best_params: PulseSequence
    best_objective: float
    evaluations: int
    converged: bool
    history: tuple = field(default=(), repr=False)


def rotation(theta: float, phi: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    off = -1j * s * np.exp(-1j * phi)
    return np.array([[c, off], [-1j * s * np.exp(1j * phi), c]], dtype=np.complex128)


def z_rotation(angle: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


def sequence_unitary(seq: PulseSequence, amplitude_scale: float = 1.0, detuning: float = 0.0) -> np.ndarray:
    """Net unitary of the sequence; the first pulse acts first."""
    u = I2
    z = z_rotation(detuning)
    for theta, phi in seq.pulses:
        u = z @ rotation(theta * amplitude_scale, phi) @ u
    return u


def robust_fidelity(seq: PulseSequence, target, grid: ErrorGrid = ErrorGrid()) -> float:
    u0 = require_unitary(target, "target")
    if u0.shape != (2, 2):
        raise ValueError("pulse targets must be 2x2")
    u0_dag = u0.conj().T
    vals = [avg_quadratic_form(u0_dag @ sequence_unitary(seq, s, d)) for s, d in grid.points()]
    return float(np.mean(vals))


def optimize(
    seq0: PulseSequence,
    target,
    grid: ErrorGrid = ErrorGrid(),
    max_evaluations: int = 10_000,
    tol: float = 1e-10,
    seed: int = 0,
    restart_scale: float = 0.1,
) -> OptResult:
    """Maximize :func:`robust_fidelity` with a Nelder-Mead simplex search.

    If the simplex collapses before the evaluation budget is spent, one more
    search starts from the best point perturbed by ``restart_scale`` (seeded
    by ``seed``).
    """
    u0 = require_unitary(target, "target")
    rng = np.random.default_rng(seed)
    best = {"x": seq0.to_vector(), "f": -np.inf}
    history: list[float] = []

    def objective(x):
        f = robust_fidelity(PulseSequence.from_vector(x), u0, grid)
        if f > best["f"]:
            best["x"], best["f"] = np.array(x, dtype=float), f
        history.append(best["f"])
        return -f

    def run(x0):
        budget = max_evaluations - len(history)
        if budget <= 0:
            return None
        return minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"maxfev": budget, "fatol": tol, "xatol": 1e-9, "adaptive": len(x0) > 4},
        )

    res = run(seq0.to_vector())
    converged = bool(res.success)
    if converged and len(history) < max_evaluations:
        x1 = best["x"] + restart_scale * rng.standard_normal(best["x"].shape)
        res2 = run(x1)
        if res2 is not None and not res2.success:
            converged = False
    return OptResult(
        best_params=PulseSequence.from_vector(best["x"]),
        best_objective=float(best["f"]),
        evaluations=len(history),
        converged=converged,
        history=tuple(history),
    )
