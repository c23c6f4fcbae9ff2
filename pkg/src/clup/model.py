"""Random instances of the noisy linear model y = A x_sol + sigma v.

The regime is linear: m = round(alpha * n). A and v are i.i.d. standard
normal, drawn from a counter-based Philox stream so that the same seed gives
a bit-identical instance regardless of process or thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Philox sub-stream ids; the 128-bit key is (seed, stream).
_INSTANCE_STREAM = 0
_SIGN_STREAM = 1

_MASK64 = (1 << 64) - 1


def philox_generator(seed: int, stream: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, stream)."""
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def snr_db_to_sigma(snr_db: float) -> float:
    """Noise scale sigma such that 1/sigma^2 expressed in dB equals snr_db."""
    if not math.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite, got {snr_db!r}")
    return float(10.0 ** (-snr_db / 20.0))


@dataclass
class ProblemInstance:
    """One realization of the linear system, with the all-positive input."""

    n: int
    m: int
    alpha: float
    sigma: float
    A: np.ndarray
    v: np.ndarray
    x_sol: np.ndarray
    y: np.ndarray
    seed: int


def generate_instance(n: int, alpha: float, sigma: float, seed: int) -> ProblemInstance:
    """Draw one seeded instance of y = A x_sol + sigma v.

    Draw order is fixed (A row-major, then v), so instances are reproducible
    across runs and machines for a given numpy version.
    """
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    m = int(round(alpha * n))
    if m < 1:
        raise ValueError(f"alpha={alpha} with n={n} rounds to m={m} < 1")

    rng = philox_generator(seed, _INSTANCE_STREAM)
    A = rng.standard_normal((m, n))
    v = rng.standard_normal(m)
    x_sol = np.full(n, 1.0 / math.sqrt(n))
    y = A @ x_sol + sigma * v
    return ProblemInstance(
        n=n, m=m, alpha=float(alpha), sigma=float(sigma), A=A, v=v, x_sol=x_sol, y=y, seed=seed
    )


def random_sign_vector(n: int, seed: int) -> np.ndarray:
    """Uniform draw from {-1/sqrt(n), +1/sqrt(n)}^n on the sign sub-stream."""
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    rng = philox_generator(seed, _SIGN_STREAM)
    half_width = 1.0 / math.sqrt(n)
    return np.where(rng.random(n) < 0.5, -half_width, half_width)
