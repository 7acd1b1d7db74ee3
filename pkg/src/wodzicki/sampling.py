"""Seeded random inputs at desk scale (shared by tests and verify suites)."""

from __future__ import annotations

import numpy as np

from .algebra import DeformationMatrix, TorusElement

__all__ = ["random_element", "random_selfadjoint", "random_positive", "irrational_theta"]


def irrational_theta(n: int, scale: float = 1.0) -> DeformationMatrix:
    """Deformation with irrational-surrogate angles built from square roots."""
    surds = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0]
    theta = np.zeros((n, n))
    pos = 0
    for a in range(n):
        for b in range(a + 1, n):
            theta[a, b] = scale / np.sqrt(surds[pos % len(surds)])
            pos += 1
    return DeformationMatrix(theta - theta.T)


def _random_modes(defm, rng, count, radius, side):
    n = defm.n
    modes = []
    while len(modes) < count:
        k = tuple(int(x) for x in rng.integers(-radius, radius + 1, size=n))
        if not any(k):
            continue
        if side == "left":
            key = k + (0,) * n
        elif side == "right":
            key = (0,) * n + k
        else:
            ko = tuple(int(x) for x in rng.integers(-radius, radius + 1, size=n))
            key = k + ko
        if key not in modes:
            modes.append(key)
    return modes


def random_element(defm, rng, modes: int = 3, radius: int = 1,
                   amplitude: float = 0.2, side: str = "left") -> TorusElement:
    """Random finitely supported element with complex coefficients."""
    data = {}
    for key in _random_modes(defm, rng, modes, radius, side):
        data[key] = amplitude * complex(rng.normal(), rng.normal())
    data[(0,) * (2 * defm.n)] = amplitude * complex(rng.normal(), rng.normal())
    return TorusElement(defm, data)


def random_selfadjoint(defm, rng, modes: int = 2, radius: int = 1,
                       amplitude: float = 0.15, base: float = 1.0,
                       side: str = "left") -> TorusElement:
    """``base + x + x*``: self-adjoint, identity-dominant for small amplitude."""
    out = TorusElement.unit(defm) * base
    for key in _random_modes(defm, rng, modes, radius, side):
        c = amplitude * complex(rng.normal(), rng.normal()) / max(modes, 1)
        term = TorusElement(defm, {key: c})
        out = out + term + term.star()
    return out


def random_positive(defm, rng, modes: int = 2, radius: int = 1,
                    amplitude: float = 0.12, side: str = "left") -> TorusElement:
    """Self-adjoint element with certified dominant identity component."""
    out = random_selfadjoint(defm, rng, modes, radius, amplitude, base=1.0, side=side)
    margin = (out - TorusElement.unit(defm)).norm_l1()
    if margin >= 0.75:
        return random_positive(defm, rng, modes, radius, amplitude * 0.5, side)
    return out
