"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed n x n unitary via QR of a complex Gaussian matrix."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    # fix the phase ambiguity of QR so the distribution is Haar
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_amplitudes(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_trigger_indices(d: int, rng: np.random.Generator, max_size: int | None = None) -> tuple[int, ...]:
    hi = d - 1 if max_size is None else min(max_size, d - 1)
    k = int(rng.integers(1, hi + 1))
    return tuple(sorted(int(i) for i in rng.choice(d, size=k, replace=False)))
