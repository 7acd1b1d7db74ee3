"""Builders producing symbols for every operator family the engine uses.

Conventions (the single place they are declared):

* Derivations ``delta_a`` have symbol ``xi_a``; the coordinate dictionary
  is ``delta_a = -i d/dx_a``, so the coordinate derivative ``d/dx_a`` has
  symbol ``i xi_a``.
* Geometric vector fields ``V = V^a d/dx_a`` therefore carry an ``i`` per
  component, while derivation-flavoured fields (the deformed-torus
  convention) do not; the two flavours differ by a sign at the level of
  quadratic functionals and both are exercised by tests.
* Conformal factors: a conformally flat metric is stored directly as
  ``g_ab = factor · delta_ab``; each operator family applies its own Weyl
  element (h, chi = h^2, or k with g = k^-4 delta), so the exponent
  conventions never mix silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import DeformationMatrix, TorusElement, invert, power
from .clifford import CliffordValue, GammaRep, block2x2, gamma_basis
from .errors import AlgebraMismatchError
from .geometry import curvature_tensors, element_function_via_grid
from .gridfft import element_from_grid
from .symbols import DEFAULT_DEPTH, QuadraticForm, Symbol, compose

__all__ = [
    "MetricData",
    "ConnectionData",
    "VectorFieldSpec",
    "OneFormSpec",
    "build_flat_laplacian",
    "build_conformal_laplacian",
    "build_laplace_type",
    "build_dirac",
    "build_product_triple_dirac",
    "build_vector_field",
    "build_one_form",
    "delta_symbol",
    "element_symbol",
    "SpinGeometry",
    "spin_geometry",
]


# ---------------------------------------------------------------------------
# data carriers


@dataclass
class MetricData:
    """Metric on the torus: flat, conformally flat, or general (theta = 0)."""

    defm: DeformationMatrix
    mode: str = "flat"  # flat | conformally_flat | general_fourier
    factor: TorusElement | None = None          # g_ab = factor * delta_ab
    components: list | None = None              # general g_ab, theta = 0 only

    def __post_init__(self):
        if self.mode not in ("flat", "conformally_flat", "general_fourier"):
            raise ValueError(f"unknown metric mode {self.mode!r}")
        if self.mode == "general_fourier":
            if self.components is None:
                raise ValueError("general metric needs components")
            if not self.defm.is_commutative:
                raise ValueError("general metrics are a theta = 0 feature")
        if self.mode == "conformally_flat" and self.factor is None:
            raise ValueError("conformally flat metric needs the factor")

    @property
    def n(self) -> int:
        return self.defm.n

    def lower(self) -> list:
        """Metric components g_ab as algebra elements."""
        n, defm = self.n, self.defm
        if self.mode == "flat":
            one = TorusElement.unit(defm)
            return [[one * (1.0 if a == b else 0.0) for b in range(n)] for a in range(n)]
        if self.mode == "conformally_flat":
            zero = TorusElement.zero(defm)
            return [[self.factor if a == b else zero for b in range(n)] for a in range(n)]
        return self.components

    def upper(self) -> list:
        """Inverse metric components; positivity is checked on the grid."""
        n, defm = self.n, self.defm
        if self.mode == "flat":
            return self.lower()
        if self.mode == "conformally_flat":
            inv = invert(self.factor)
            zero = TorusElement.zero(defm)
            return [[inv if a == b else zero for b in range(n)] for a in range(n)]
        ct = curvature_tensors(self.components)
        out = [[None] * n for _ in range(n)]
        for a in range(n):
            for b in range(n):
                out[a][b] = element_from_grid(ct.g_inv[..., a, b], defm)
        return out


@dataclass
class ConnectionData:
    """Endomorphism connection ``nabla_a = d_a - T_a`` plus optional E."""

    T: list | None = None          # list of CliffordValue, one per axis
    E: CliffordValue | None = None


@dataclass
class VectorFieldSpec:
    """Vector field flavours: geometric (i per component), derivation, or
    factor-rescaled derivations ``V = sum V^a h delta_a h^{-1}``."""

    components: list
    flavor: str = "geometric"
    factor: TorusElement | None = None

    def __post_init__(self):
        if self.flavor not in ("geometric", "derivation", "rescaled"):
            raise ValueError(f"unknown vector-field flavor {self.flavor!r}")
        if self.flavor == "rescaled" and self.factor is None:
            raise ValueError("rescaled fields need the conformal factor")


@dataclass
class OneFormSpec:
    """One-form with components v_a; optionally rescaled to k^2 v_a gamma^a."""

    components: list
    rescale: TorusElement | None = None


# ---------------------------------------------------------------------------
# elementary symbols


def delta_symbol(defm: DeformationMatrix, axis: int, q: int = 0) -> Symbol:
    n = defm.n
    alpha = tuple(1 if i == axis else 0 for i in range(n))
    return Symbol.from_terms(defm, q, [(CliffordValue.identity(defm, q), alpha, 0)])


def element_symbol(x: TorusElement, q: int = 0) -> Symbol:
    """Zero-order multiplication operator."""
    return Symbol.constant(CliffordValue.scalar(x, q))


def _norm_squared_term(defm, q) -> Symbol:
    n = defm.n
    return Symbol.from_terms(defm, q, [(CliffordValue.identity(defm, q), (0,) * n, -1)])


# ---------------------------------------------------------------------------
# Laplace family


def build_flat_laplacian(defm: DeformationMatrix, q: int = 0) -> Symbol:
    """Sum of squared derivations: the single term ``||xi||^2``."""
    return _norm_squared_term(defm, q)


def build_conformal_laplacian(w: TorusElement, variant: str,
                              depth: int = DEFAULT_DEPTH) -> Symbol:
    """Weyl-rescaled flat Laplacian, built by composing factor symbols.

    variant 'two_torus':  h^{-1} ∘ Delta ∘ h^{-1} with h = w;
    variant 'four_torus': sum_a chi^{-1} ∘ delta_a ∘ chi ∘ delta_a ∘ chi^{-1}
    with chi = w.  Invertibility of the factor is certified by the
    Neumann inversion.
    """
    defm = w.defm
    w_inv = invert(w)
    if variant == "two_torus":
        inner = compose(build_flat_laplacian(defm), element_symbol(w_inv), depth)
        return compose(element_symbol(w_inv), inner, depth)
    if variant == "four_torus":
        total = None
        for a in range(defm.n):
            sym = element_symbol(w_inv)
            for factor in (delta_symbol(defm, a), element_symbol(w),
                           delta_symbol(defm, a), element_symbol(w_inv)):
                sym = compose(sym, factor, depth)
            total = sym if total is None else total + sym
        return total
    raise ValueError(f"unknown conformal Laplacian variant {variant!r}")


def _christoffel_elements(metric: MetricData):
    ct = curvature_tensors(metric.lower())
    n = metric.n
    out = [[[None] * n for _ in range(n)] for _ in range(n)]
    for c in range(n):
        for a in range(n):
            for b in range(n):
                out[c][a][b] = element_from_grid(
                    ct.christoffel[..., c, a, b], metric.defm
                )
    return out


def build_laplace_type(metric: MetricData, conn: ConnectionData | None = None,
                       q: int = 0, depth: int = DEFAULT_DEPTH) -> Symbol:
    """Generalised Laplacian ``-g^{ab}(nabla_a nabla_b - Gamma^c_ab nabla_c) + E``.

    The flat branch is assembled by symbol composition; curved branches
    (theta = 0) take the Christoffel contraction from the geometry oracle.
    For a non-conformal metric the principal symbol is carried as a
    quadratic-form denominator, which downstream integration supports in
    dimension 2.
    """
    defm = metric.defm
    n = defm.n
    conn = conn or ConnectionData()
    T = conn.T
    ident = CliffordValue.identity(defm, q)

    if metric.mode == "flat":
        total = None
        for a in range(n):
            nabla = Symbol.from_terms(
                defm, q,
                [(ident.scale(1j), tuple(1 if i == a else 0 for i in range(n)), 0)]
                + ([( -T[a], (0,) * n, 0)] if T else []),
            )
            sq = compose(nabla, nabla, depth)
            total = sq if total is None else total + sq
        out = total.scale(-1.0)
        if conn.E is not None:
            out = out + Symbol.constant(conn.E)
        return out

    if not defm.is_commutative:
        raise ValueError(
            "curved Laplace-type operators need theta = 0; use the conformal "
            "Laplacian builders for deformed tori"
        )

    g_up = metric.upper()
    gamma = _christoffel_elements(metric)
    terms = []
    qform = None
    if metric.mode == "conformally_flat":
        c_up = g_up[0][0]
        terms.append((CliffordValue.scalar(c_up, q), (0,) * n, -1))
    else:
        if n != 2:
            raise NotImplementedError(
                "general-metric symbols are supported in dimension 2"
            )
        qform = QuadraticForm(g_up)
        terms.append((ident, (0,) * n, -1))

    zero_cv = CliffordValue.zero(defm, q)
    for b in range(n):
        coeff = zero_cv
        for a in range(n):
            if T:
                coeff = coeff + (T[a].left_mul(g_up[a][b])).scale(2j)
            gam = zero_cv
        terms.append((coeff, tuple(1 if i == b else 0 for i in range(n)), 0)) if not coeff.is_zero() else None
    for c in range(n):
        acc = TorusElement.zero(defm)
        for a in range(n):
            for b in range(n):
                acc = acc + g_up[a][b] * gamma[c][a][b]
        if not acc.is_zero():
            terms.append((CliffordValue.scalar(acc, q).scale(1j),
                          tuple(1 if i == c else 0 for i in range(n)), 0))

    order0 = zero_cv
    if T:
        for a in range(n):
            for b in range(n):
                dTb = T[b].delta(a).scale(1j)  # d/dx_a = i delta_a
                order0 = order0 + (dTb - T[a] @ T[b]).left_mul(g_up[a][b])
        for c in range(n):
            acc = TorusElement.zero(defm)
            for a in range(n):
                for b in range(n):
                    acc = acc + g_up[a][b] * gamma[c][a][b]
            order0 = order0 - T[c].left_mul(acc)
    if conn.E is not None:
        order0 = order0 + conn.E
    if not order0.is_zero():
        terms.append((order0, (0,) * n, 0))

    return Symbol.from_terms(defm, q, terms, qform=qform)


# ---------------------------------------------------------------------------
# Dirac family


def build_dirac(defm: DeformationMatrix, rep: GammaRep | None = None,
                conformal_factor: TorusElement | None = None,
                depth: int = DEFAULT_DEPTH) -> Symbol:
    """Flat Dirac ``sum_a gamma^a delta_a`` or its rescaling ``k D k``.

    The conformal factor is normally taken from the commutant copy so that
    one-forms stay a free module; any invertible element is accepted.
    """
    rep = rep or gamma_basis(defm.n)
    n = defm.n
    terms = [
        (rep.gamma(defm, a), tuple(1 if i == a else 0 for i in range(n)), 0)
        for a in range(n)
    ]
    D = Symbol.from_terms(defm, rep.q, terms)
    if conformal_factor is None:
        return D
    k = element_symbol(conformal_factor, rep.q)
    return compose(k, compose(D, k, depth), depth)


def build_product_triple_dirac(base: Symbol, grading: CliffordValue,
                               c: complex) -> Symbol:
    """Two-point extension ``[[D, grading·c], [grading·conj(c), D]]``."""
    comps = {}
    zero = CliffordValue.zero(base.defm, base.q)
    for order, terms in base.comps.items():
        comps[order] = {
            key: block2x2(coeff, zero, zero, coeff)
            for key, coeff in terms.items()
        }
    off = block2x2(zero, grading.scale(c), grading.scale(np.conj(c)), zero)
    if not off.is_zero():
        key0 = ((0,) * base.defm.n, 0)
        comps.setdefault(0, {})
        if key0 in comps[0]:
            comps[0][key0] = comps[0][key0] + off
        else:
            comps[0][key0] = off
    return Symbol(base.defm, base.q + 1, base.top,
                  base.bottom if not base.exact else min(base.min_stored_order(), 0),
                  comps, exact=base.exact, qform=base.qform)


# ---------------------------------------------------------------------------
# vector fields and one-forms


def build_vector_field(spec: VectorFieldSpec, defm: DeformationMatrix,
                       q: int = 0, connection: ConnectionData | None = None,
                       depth: int = DEFAULT_DEPTH) -> Symbol:
    """First-order symbol of a vector field in the requested flavour."""
    n = defm.n
    comps = [
        x if isinstance(x, TorusElement) else TorusElement.unit(defm) * x
        for x in spec.components
    ]
    if len(comps) != n:
        raise ValueError(f"expected {n} components")
    if spec.flavor == "geometric":
        terms = [
            (CliffordValue.scalar(comps[a], q).scale(1j),
             tuple(1 if i == a else 0 for i in range(n)), 0)
            for a in range(n)
        ]
        out = Symbol.from_terms(defm, q, terms)
        if connection is not None and connection.T:
            extra = CliffordValue.zero(defm, q)
            for a in range(n):
                extra = extra - connection.T[a].left_mul(comps[a])
            if not extra.is_zero():
                out = out + Symbol.constant(extra)
        return out
    if spec.flavor == "derivation":
        terms = [
            (CliffordValue.scalar(comps[a], q),
             tuple(1 if i == a else 0 for i in range(n)), 0)
            for a in range(n)
        ]
        return Symbol.from_terms(defm, q, terms)
    # rescaled: sum_a (V^a h) ∘ delta_a ∘ h^{-1}
    h = spec.factor
    h_inv = invert(h)
    total = None
    for a in range(n):
        sym = compose(delta_symbol(defm, a, q), element_symbol(h_inv, q), depth)
        sym = sym.left_mul_value(CliffordValue.scalar(comps[a] * h, q))
        total = sym if total is None else total + sym
    return total


def build_one_form(spec: OneFormSpec, defm: DeformationMatrix,
                   rep: GammaRep | None = None) -> Symbol:
    """Clifford representation of a one-form as a zero-order symbol."""
    rep = rep or gamma_basis(defm.n)
    n = defm.n
    comps = [
        x if isinstance(x, TorusElement) else TorusElement.unit(defm) * x
        for x in spec.components
    ]
    if len(comps) != n:
        raise ValueError(f"expected {n} components")
    scale = None
    if spec.rescale is not None:
        scale = spec.rescale * spec.rescale
    value = CliffordValue.zero(defm, rep.q)
    for a in range(n):
        va = comps[a] if scale is None else scale * comps[a]
        value = value + rep.gamma(defm, a, va)
    return Symbol.constant(value)


# ---------------------------------------------------------------------------
# spin structure for conformally flat commutative metrics


@dataclass
class SpinGeometry:
    """Orthonormal-frame spin data for ``g_ab = factor · delta_ab`` (theta=0).

    The frame is ``e_j = u d/dx_j`` with ``u = factor^{-1/2}``; the
    Levi-Civita rotation coefficients in this frame are
    ``alpha_ijk = (d_k u) delta_ij - (d_j u) delta_ik``.
    """

    defm: DeformationMatrix
    rep: GammaRep
    u: TorusElement
    alpha: list = field(repr=False, default=None)
    covariant: list = field(repr=False, default=None)

    def frame_field(self, i: int) -> Symbol:
        """Symbol of e_i = u d/dx_i (coordinate derivative carries i)."""
        n = self.defm.n
        return Symbol.from_terms(
            self.defm, self.rep.q,
            [(CliffordValue.scalar(self.u, self.rep.q).scale(1j),
              tuple(1 if k == i else 0 for k in range(n)), 0)],
        )

    def spin_covariant(self, i: int) -> Symbol:
        return self.covariant[i]

    def dirac(self, depth: int = DEFAULT_DEPTH) -> Symbol:
        total = None
        for i in range(self.defm.n):
            gi = self.rep.gamma(self.defm, i).scale(1j)
            sym = self.covariant[i].left_mul_value(gi)
            total = sym if total is None else total + sym
        return total

    def laplacian(self, depth: int = DEFAULT_DEPTH) -> Symbol:
        """Spinor Laplacian ``-sum_i S_i S_i + (sum_i alpha_iij) S_j``."""
        n = self.defm.n
        total = None
        for i in range(n):
            sq = compose(self.covariant[i], self.covariant[i], depth)
            total = sq if total is None else total + sq
        total = total.scale(-1.0)
        for j in range(n):
            coeff = TorusElement.zero(self.defm)
            for i in range(n):
                coeff = coeff + self.alpha[i][i][j]
            if not coeff.is_zero():
                total = total + self.covariant[j].left_mul_value(
                    CliffordValue.scalar(coeff, self.rep.q)
                )
        return total

    def covariant_field(self, components) -> Symbol:
        """``sum_j V^j S_j`` for frame components V^j."""
        total = None
        for j, vj in enumerate(components):
            if not isinstance(vj, TorusElement):
                vj = TorusElement.unit(self.defm) * vj
            sym = self.covariant[j].left_mul_value(
                CliffordValue.scalar(vj, self.rep.q)
            )
            total = sym if total is None else total + sym
        return total

    def coordinate_components(self, components) -> list:
        """Frame components -> coordinate components (multiply by u)."""
        out = []
        for vj in components:
            if not isinstance(vj, TorusElement):
                vj = TorusElement.unit(self.defm) * vj
            out.append(self.u * vj)
        return out


def spin_geometry(metric_factor: TorusElement, rep: GammaRep | None = None) -> SpinGeometry:
    """Spin data for the conformally flat commutative metric."""
    defm = metric_factor.defm
    if not defm.is_commutative:
        raise ValueError("spin frames are a theta = 0 feature")
    n = defm.n
    rep = rep or gamma_basis(n)
    u = element_function_via_grid(metric_factor, lambda v: v**-0.5)
    du = [u.delta(a) * 1j for a in range(n)]  # coordinate derivatives
    alpha = [[[None] * n for _ in range(n)] for _ in range(n)]
    zero = TorusElement.zero(defm)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                val = zero
                if i == j:
                    val = val + du[k]
                if i == k:
                    val = val - du[j]
                alpha[i][j][k] = val
    geo = SpinGeometry(defm, rep, u, alpha=alpha)
    covariant = []
    for i in range(n):
        sym = geo.frame_field(i)
        spin_term = CliffordValue.zero(defm, rep.q)
        for j in range(n):
            for k in range(n):
                if alpha[i][j][k].is_zero():
                    continue
                gjk = rep.gamma(defm, j) @ rep.gamma(defm, k)
                spin_term = spin_term + gjk.left_mul(alpha[i][j][k]).scale(-0.25)
        if not spin_term.is_zero():
            sym = sym + Symbol.constant(spin_term)
        covariant.append(sym)
    geo.covariant = covariant
    return geo
