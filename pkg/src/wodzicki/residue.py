"""Cosphere integration and the Wodzicki residue on torus symbols.

Moments of monomials over the unit sphere are exact rationals times the
sphere volume ``v_{n-1}``: pairing combinatorics gives

    (1/v_{n-1}) ∫ xi^alpha  =  prod_a (alpha_a - 1)!!  /  prod_{i<s} (n + 2i)

for even multi-indices of weight ``2s`` and zero otherwise.  Everything
downstream keeps the coefficient of ``v_{n-1}`` separate from the float
value so that paper-constant comparisons are exact-form checks.

For a general (theta = 0, n = 2) quadratic denominator the moments are
functions of x and are computed by angular quadrature on a sampling grid,
which is spectrally accurate for trigonometric data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import TorusElement, trace
from .clifford import CliffordValue
from .gridfft import element_from_grid, sample_on_grid
from .symbols import Symbol, TermDict

__all__ = [
    "sphere_volume",
    "sphere_moment",
    "cosphere_integrate",
    "ResidueDensity",
    "residue_density",
    "wodzicki_residue",
]


def sphere_volume(n: int) -> float:
    """Volume of the unit sphere ``S^{n-1}`` for even ``n = 2m``."""
    if n % 2 or n < 2:
        raise ValueError("even dimension required")
    m = n // 2
    return 2.0 * math.pi**m / math.factorial(m - 1)


def _double_factorial(m: int) -> int:
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def sphere_moment(n: int, alpha) -> Fraction:
    """Exact moment ``∫ xi^alpha`` over ``S^{n-1}`` as a multiple of v_{n-1}."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != n:
        raise ValueError("multi-index length must match the dimension")
    if any(a < 0 for a in alpha):
        raise ValueError("multi-index entries must be non-negative")
    if any(a % 2 for a in alpha):
        return Fraction(0)
    s = sum(alpha) // 2
    num = 1
    for a in alpha:
        num *= _double_factorial(a - 1)
    den = 1
    for i in range(s):
        den *= n + 2 * i
    return Fraction(num, den)


_QUAD_NODES = 512


def _angular_moments(terms: TermDict, qform, grid_shape) -> dict:
    """x-dependent circle moments for quadratic-form denominators (n = 2)."""
    if qform.n != 2:
        raise NotImplementedError("quadrature moments implemented for n = 2")
    phi = 2.0 * math.pi * np.arange(_QUAD_NODES) / _QUAD_NODES
    c, s = np.cos(phi), np.sin(phi)
    g11 = sample_on_grid(qform.g_up[0][0], grid_shape).real
    g12 = sample_on_grid(qform.g_up[0][1], grid_shape).real
    g22 = sample_on_grid(qform.g_up[1][1], grid_shape).real
    # Q on the unit circle, shape grid + (nodes,)
    Q = (
        g11[..., None] * c**2
        + 2.0 * g12[..., None] * c * s
        + g22[..., None] * s**2
    )
    out = {}
    for (alpha, j) in terms:
        w = c ** alpha[0] * s ** alpha[1]
        vals = (w / Q**j).mean(axis=-1)  # mean over the circle = coeff of v_1
        out[(alpha, j)] = vals
    return out


def cosphere_integrate(terms: TermDict, n: int, qform=None,
                       grid_shape=None, tail_tol: float = 1e-13) -> CliffordValue:
    """Integrate one homogeneous component over the unit cosphere.

    Returns the coefficient of ``v_{n-1}`` as a matrix value; coefficients
    stay to the left of the moment scalar.  All terms must share one
    order.
    """
    if not terms:
        raise ValueError("empty component")
    orders = {sum(alpha) - 2 * j for (alpha, j) in terms}
    if len(orders) > 1:
        raise ValueError(f"mixed homogeneity orders on the cosphere: {sorted(orders)}")
    defm = next(iter(terms.values())).defm
    q = next(iter(terms.values())).q
    out = CliffordValue.zero(defm, q)
    if qform is None:
        for (alpha, j), coeff in terms.items():
            w = sphere_moment(n, alpha)
            if w:
                out = out + coeff.scale(float(w))
        return out
    if grid_shape is None:
        grid_shape = (64,) * n
    moments = _angular_moments(terms, qform, grid_shape)
    for key, coeff in terms.items():
        factor = element_from_grid(moments[key], defm, tol=tail_tol)
        out = out + coeff.right_mul(factor)
    return out


@dataclass
class ResidueDensity:
    """Algebra element left after cosphere integration and matrix trace.

    ``v_element`` is the coefficient of ``v_{n-1}``; applying the
    factorised trace gives back the residue value.
    """

    v_element: TorusElement
    n: int
    missing_component: bool = False

    @property
    def element(self) -> TorusElement:
        return self.v_element * sphere_volume(self.n)

    @property
    def v_coeff(self) -> complex:
        return trace(self.v_element)

    @property
    def value(self) -> complex:
        return trace(self.v_element) * sphere_volume(self.n)

    def norm_l1(self) -> float:
        return self.v_element.norm_l1() * sphere_volume(self.n)


def residue_density(P: Symbol, n: int | None = None) -> ResidueDensity:
    """Cosphere integral and matrix trace of the order ``-n`` component.

    A symbol that provably has no order ``-n`` part yields a zero density
    flagged ``missing_component``; a symbol whose window does not reach
    ``-n`` is an error (the truncation depth was too small).
    """
    if n is None:
        n = P.n
    if -n > P.top or not P.component(-n):
        if -n < P.bottom and not P.exact:
            raise ValueError(
                f"symbol window [{P.bottom}, {P.top}] does not reach order {-n}"
            )
        return ResidueDensity(TorusElement.zero(P.defm), n, missing_component=True)
    if -n < P.bottom and not P.exact:
        raise ValueError(
            f"symbol window [{P.bottom}, {P.top}] does not reach order {-n}"
        )
    integrated = cosphere_integrate(P.component(-n), n, qform=P.qform)
    return ResidueDensity(integrated.matrix_trace(), n)


def wodzicki_residue(P: Symbol, n: int | None = None) -> complex:
    """Residue trace: ``tau`` of the density of the order ``-n`` symbol."""
    return residue_density(P, n).value
