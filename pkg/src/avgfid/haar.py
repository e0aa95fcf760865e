"""Haar-uniform pure states and Monte Carlo fidelity estimates.

The estimators here are the independent check on every closed form in
:mod:`avgfid.fidelity`: they only ever sample states and evaluate overlaps.

Samples are produced in fixed-size blocks. Block ``b`` draws from a Philox
stream keyed by ``(seed, b)``, so the result does not depend on how blocks are
distributed over workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .linalg import ShapeError, as_square, require_unitary

DEFAULT_SAMPLES = 100_000
BLOCK = 8192
NORM_TOL = 1e-12


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int

    def as_dict(self) -> dict:
        return asdict(self)

    def agrees_with(self, value: float, k: float = 4.0) -> bool:
        """True when ``value`` lies within ``k`` standard errors of the mean."""
        return abs(self.mean - value) <= k * self.stderr


def block_rng(seed: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, block])
    return np.random.Generator(np.random.Philox(ss))


def sample_haar_states(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar-random states in C^n, one per row."""
    if n < 1:
        raise ValueError("dimension n must be >= 1")
    z = rng.standard_normal((count, 2 * n))
    psi = z[:, :n] + 1j * z[:, n:]
    psi /= np.linalg.norm(psi, axis=1, keepdims=True)
    return psi


def sample_haar_state(n: int, rng: np.random.Generator) -> np.ndarray:
    """One state uniform on the unit sphere of C^n.

    Real and imaginary parts are 2n i.i.d. standard normals, then normalized.
    """
    return sample_haar_states(n, 1, rng)[0]


def _blocks(samples: int):
    for b, start in enumerate(range(0, samples, BLOCK)):
        yield b, min(BLOCK, samples - start)


def sample_values(integrand, n: int, samples: int, seed: int, workers: int = 1) -> np.ndarray:
    """Evaluate ``integrand(states) -> values`` over ``samples`` Haar states.

    ``integrand`` receives a ``(count, n)`` block of states and returns one real
    value per row. The concatenated values are identical for any ``workers``.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples for a standard error")

    def run(job):
        b, count = job
        return integrand(sample_haar_states(n, count, block_rng(seed, b)))

    jobs = list(_blocks(samples))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    return np.concatenate(parts)


def estimate(values: np.ndarray, seed: int) -> McEstimate:
    values = np.asarray(values, dtype=float)
    n = values.size
    return McEstimate(
        mean=float(np.mean(values)),
        stderr=float(np.std(values, ddof=1) / np.sqrt(n)),
        samples=int(n),
        seed=int(seed),
    )


def expectation(states: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Row-wise <psi|M|psi>."""
    return np.einsum("si,ij,sj->s", states.conj(), m, states)


def mc_quadratic_form_average(
    m, samples: int = DEFAULT_SAMPLES, seed: int = 0, workers: int = 1
) -> McEstimate:
    """Monte Carlo estimate of the Haar average of |<psi|M|psi>|^2."""
    m = as_square(m, "M")

    def integrand(states):
        return np.abs(expectation(states, m)) ** 2

    return estimate(sample_values(integrand, m.shape[0], samples, seed, workers), seed)


def mc_channel_fidelity(
    target, channel, samples: int = DEFAULT_SAMPLES, seed: int = 0, workers: int = 1
) -> McEstimate:
    """Monte Carlo estimate of the Haar average of <psi|U0^dag G(|psi><psi|) U0|psi>.

    Per state this is sum_k |<psi|U0^dag G_k|psi>|^2, which avoids building the
    output density matrix.
    """
    from .channels import KrausChannel

    target = require_unitary(target, "target")
    if not isinstance(channel, KrausChannel):
        raise TypeError("channel must be a KrausChannel")
    if channel.dim != target.shape[0]:
        raise ShapeError(f"target is {target.shape[0]}-dim, channel is {channel.dim}-dim")
    ms = [target.conj().T @ g for g in channel.kraus]

    def integrand(states):
        return sum(np.abs(expectation(states, mk)) ** 2 for mk in ms)

    return estimate(sample_values(integrand, channel.dim, samples, seed, workers), seed)


def mc_moment(n: int, power: int, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> McEstimate:
    """Monte Carlo estimate of E|c_0|^power for Haar states in C^n."""

    def integrand(states):
        return np.abs(states[:, 0]) ** power

    return estimate(sample_values(integrand, n, samples, seed), seed)
