"""Sampling bridge between theta = 0 torus elements and periodic grids.

At theta = 0 an element is the trigonometric polynomial
``f(x) = sum c_k exp(i k·x)`` (the commutant block contributes through
``k + k°``).  Sampling on a ``(M, ..., M)`` grid and synthesising back via
FFT is exact as long as the grid resolves the support; the synthesis
direction truncates a stated tail instead.
"""

from __future__ import annotations

import numpy as np

from .algebra import DeformationMatrix, TorusElement

__all__ = ["sample_on_grid", "element_from_grid", "grid_points"]


def grid_points(n: int, size: int) -> list[np.ndarray]:
    """Coordinate arrays of the uniform ``size^n`` grid on ``[0, 2pi)^n``."""
    x = 2.0 * np.pi * np.arange(size) / size
    return list(np.meshgrid(*([x] * n), indexing="ij"))


def sample_on_grid(elem: TorusElement, shape) -> np.ndarray:
    """Evaluate a theta = 0 element on the uniform grid (exact)."""
    if not elem.defm.is_commutative:
        raise ValueError("grid sampling is a theta = 0 backend")
    n = elem.defm.n
    shape = tuple(shape)
    if len(shape) != n:
        raise ValueError("grid shape rank must match the dimension")
    if elem.support_radius() * 2 >= min(shape):
        raise ValueError("grid too small for the element support")
    spec = np.zeros(shape, dtype=complex)
    for k, ko, c in elem.terms():
        mode = tuple((k[a] + ko[a]) % shape[a] for a in range(n))
        spec[mode] += c
    return np.fft.ifftn(spec) * np.prod(shape)


def element_from_grid(values: np.ndarray, defm: DeformationMatrix,
                      tol: float = 1e-13) -> TorusElement:
    """Fourier synthesis back to a finitely supported element.

    Coefficients below ``tol`` times the largest coefficient are dropped;
    smooth data on an adequately padded grid leaves a tail below any
    tolerance of interest here.
    """
    if not defm.is_commutative:
        raise ValueError("grid synthesis is a theta = 0 backend")
    values = np.asarray(values, dtype=complex)
    shape = values.shape
    spec = np.fft.fftn(values) / np.prod(shape)
    cutoff = tol * max(np.abs(spec).max(), 1e-300)
    data = {}
    for idx in np.argwhere(np.abs(spec) > cutoff):
        k = tuple(int(i if i <= m // 2 else i - m) for i, m in zip(idx, shape))
        data[k + (0,) * defm.n] = complex(spec[tuple(idx)])
    return TorusElement(defm, data)
