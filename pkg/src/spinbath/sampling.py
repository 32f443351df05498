"""Seeded sampling of probe-bath coupling disorder."""

from __future__ import annotations

from math import pi

import numpy as np

from .algebra import BathSpec

__all__ = ["sample_couplings"]


def sample_couplings(
    n: int,
    omega_larmor: float,
    range_ratio: float = 1e-2,
    seed: int = 0,
) -> BathSpec:
    """Draw a random weakly coupled bath.

    Each spin gets a coupling magnitude uniform in (0, range_ratio *
    omega_larmor] and an orientation angle uniform in [0, pi) in the x-z
    plane, so gx = |g| sin(theta) >= 0 and gz = |g| cos(theta). Deterministic
    for a fixed seed.
    """
    if n < 1:
        raise ValueError(f"need at least one spin, got n={n}")
    if not 0.0 < range_ratio <= 1.0:
        raise ValueError(f"range_ratio must lie in (0, 1], got {range_ratio}")
    if omega_larmor <= 0:
        raise ValueError(f"Larmor frequency must be positive, got {omega_larmor}")
    rng = np.random.default_rng(seed)
    magnitude = (1.0 - rng.random(n)) * range_ratio * omega_larmor
    theta = rng.random(n) * pi
    return BathSpec(
        n=n,
        omega_larmor=omega_larmor,
        gx=magnitude * np.sin(theta),
        gz=magnitude * np.cos(theta),
    )
