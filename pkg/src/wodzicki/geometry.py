"""Classical differential-geometry pipeline at theta = 0.

An independent oracle for the residue engine: metric components are
trigonometric data, derivatives are spectral, nonlinear operations
(inverse metric, determinant powers) are pointwise on a padded grid, and
the Levi-Civita curvature chain is evaluated numerically.  Integrals are
reported in the normalised convention ``∫_M f vol_g := mean(f sqrt(det g))``,
matching the trace normalisation ``tau(1) = 1`` used by the residue side
(the coordinate volume ``(2 pi)^n`` is divided out).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import DeformationMatrix, TorusElement
from .gridfft import element_from_grid, sample_on_grid
from .residue import sphere_volume

__all__ = [
    "CurvatureTensors",
    "curvature_tensors",
    "functional_oracle",
    "element_function_via_grid",
    "spectral_derivative",
]

DEFAULT_GRID = {2: 48, 4: 16}


def spectral_derivative(values: np.ndarray, axis: int) -> np.ndarray:
    """Coordinate derivative d/dx_axis of periodic grid data."""
    m = values.shape[axis]
    k = np.fft.fftfreq(m, d=1.0 / m)
    shape = [1] * values.ndim
    shape[axis] = m
    return np.fft.ifftn(np.fft.fftn(values, axes=(axis,)) * (1j * k.reshape(shape)),
                        axes=(axis,))


def element_function_via_grid(elem: TorusElement, fn, shape=None,
                              tol: float = 1e-13) -> TorusElement:
    """Apply a pointwise function (e.g. fractional power) on the grid.

    Keeps the oracle's nonlinear operations independent of the algebra's
    Neumann inversion path.
    """
    n = elem.defm.n
    if shape is None:
        shape = (DEFAULT_GRID[n],) * n
    vals = sample_on_grid(elem, shape)
    if np.abs(vals.imag).max() > 1e-10 * max(np.abs(vals.real).max(), 1e-300):
        raise ValueError("pointwise functions expect real-valued data")
    return element_from_grid(fn(vals.real), elem.defm, tol=tol)


def _metric_grid(g_components, shape) -> np.ndarray:
    n = len(g_components)
    g = np.zeros(shape + (n, n), dtype=float)
    for a in range(n):
        for b in range(n):
            vals = sample_on_grid(g_components[a][b], shape)
            if np.abs(vals.imag).max() > 1e-10:
                raise ValueError("metric components must be real")
            g[..., a, b] = vals.real
    return g


@dataclass
class CurvatureTensors:
    """Grid values of the Levi-Civita data for one metric."""

    g: np.ndarray            # grid + (n, n)
    g_inv: np.ndarray
    sqrt_det: np.ndarray     # grid
    christoffel: np.ndarray  # grid + (c, a, b)
    riemann: np.ndarray      # grid + (rho, sigma, mu, nu), first index up
    riemann_low: np.ndarray
    ricci: np.ndarray        # grid + (n, n)
    scalar: np.ndarray       # grid
    einstein: np.ndarray     # grid + (n, n)

    @property
    def n(self) -> int:
        return self.g.shape[-1]

    def contracted_bianchi_residual(self) -> float:
        """Max norm of the covariant divergence of the Einstein tensor."""
        n = self.n
        G_mixed = np.einsum("...ac,...cb->...ab", self.g_inv, self.einstein)
        div = np.zeros(self.g.shape[:-2] + (n,))
        for b in range(n):
            total = np.zeros_like(self.sqrt_det, dtype=complex)
            for a in range(n):
                total = total + spectral_derivative(G_mixed[..., a, b], a)
                for lam in range(n):
                    total = total + (
                        self.christoffel[..., a, a, lam] * G_mixed[..., lam, b]
                        - self.christoffel[..., lam, a, b] * G_mixed[..., a, lam]
                    )
            div[..., b] = np.abs(total)
        return float(div.max())


def curvature_tensors(g_components, shape=None) -> CurvatureTensors:
    """Full curvature chain from metric components (theta = 0 elements).

    Sign conventions make the round sphere's scalar curvature positive;
    the conformally flat closed forms in the acceptance suite pin them.
    """
    n = len(g_components)
    if shape is None:
        shape = (DEFAULT_GRID[n],) * n
    g = _metric_grid(g_components, shape)
    det = np.linalg.det(g)
    if det.min() <= 0:
        raise ValueError("metric is not positive on the sample grid")
    g_inv = np.linalg.inv(g)
    sqrt_det = np.sqrt(det)

    dg = np.zeros(shape + (n, n, n))  # (c, a, b) = d_c g_ab
    for c in range(n):
        for a in range(n):
            for b in range(a, n):
                val = spectral_derivative(g[..., a, b], c).real
                dg[..., c, a, b] = val
                dg[..., c, b, a] = val

    gamma = 0.5 * (
        np.einsum("...cd,...adb->...cab", g_inv, dg)
        + np.einsum("...cd,...bda->...cab", g_inv, dg)
        - np.einsum("...cd,...dab->...cab", g_inv, dg)
    )

    dgamma = np.zeros(shape + (n, n, n, n))  # (m, c, a, b) = d_m Gamma^c_ab
    for m_ax in range(n):
        for c in range(n):
            for a in range(n):
                for b in range(a, n):
                    val = spectral_derivative(gamma[..., c, a, b], m_ax).real
                    dgamma[..., m_ax, c, a, b] = val
                    dgamma[..., m_ax, c, b, a] = val

    # R^rho_{sigma mu nu} = d_mu Gamma^rho_{nu sigma} - d_nu Gamma^rho_{mu sigma}
    #                       + Gamma^rho_{mu lam} Gamma^lam_{nu sigma} - (mu <-> nu)
    riemann = (
        np.einsum("...mrns->...rsmn", dgamma)
        - np.einsum("...nrms->...rsmn", dgamma)
        + np.einsum("...rml,...lns->...rsmn", gamma, gamma)
        - np.einsum("...rnl,...lms->...rsmn", gamma, gamma)
    )
    riemann_low = np.einsum("...rl,...lsmn->...rsmn", g, riemann)
    ricci = np.einsum("...rsrn->...sn", riemann)
    scalar = np.einsum("...sn,...sn->...", g_inv, ricci)
    einstein = ricci - 0.5 * scalar[..., None, None] * g
    return CurvatureTensors(g, g_inv, sqrt_det, gamma, riemann,
                            riemann_low, ricci, scalar, einstein)


def functional_oracle(g_components, V, W, kind: str, f: TorusElement | None = None,
                      shape=None) -> complex:
    """Quadrature value of the classical functionals, trace-normalised.

    kind = 'metric':    -(v_{n-1}/n) ∫ g(V, W) vol_g
    kind = 'einstein':  (v_{n-1}/6) ∫ G(V, W) vol_g
    kind = 'scalar_eh': ((n-2)/12) v_{n-1} ∫ f R vol_g
    kind = 'ricci_scalar_pair': v_{n-1} ∫ R g(V, W) vol_g

    V, W are real vector fields given by component lists of theta = 0
    elements.
    """
    n = len(g_components)
    if shape is None:
        shape = (DEFAULT_GRID[n],) * n
    ct = curvature_tensors(g_components, shape)
    v = sphere_volume(n)
    weight = ct.sqrt_det
    if f is not None:
        weight = weight * sample_on_grid(f, shape)

    def pair(tensor) -> np.ndarray:
        out = np.zeros(shape, dtype=complex)
        for a in range(n):
            Va = sample_on_grid(V[a], shape)
            for b in range(n):
                Wb = sample_on_grid(W[b], shape)
                out = out + tensor[..., a, b] * Va * Wb
        return out

    if kind == "metric":
        return complex(-(v / n) * (pair(ct.g) * weight).mean())
    if kind == "einstein":
        return complex((v / 6.0) * (pair(ct.einstein) * weight).mean())
    if kind == "scalar_eh":
        return complex(((n - 2) / 12.0) * v * (ct.scalar * weight).mean())
    if kind == "ricci_scalar_pair":
        return complex(v * (pair(ct.g) * ct.scalar * weight).mean())
    raise ValueError(f"unknown functional kind: {kind!r}")
