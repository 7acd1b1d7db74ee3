"""Coefficient ring: the smooth deformed torus algebra and its commutant copy.

Elements are finitely supported Fourier sums over a double lattice
``Z^n x Z^n``: the first block indexes modes of the algebra ``A``, the
second block modes of the commuting copy ``A°``.  Basis monomials are
Weyl-symmetrised, so the product phase is the skew bicharacter

    e_u · e_v = exp(i/2 · u·B·v) · e_{u+v},      B = diag(theta, -theta),

which makes the involution phase-free: ``(e_u)* = e_{-u}``, an element is
self-adjoint iff its coefficients satisfy ``c_{-u} = conj(c_u)``, and
``A`` commutes with ``A°`` exactly.  The commutant block carries ``-theta``
because ``A°`` is the opposite algebra of ``A``.

Derivations act diagonally, ``delta_a(e_u) = (k_a + k°_a) e_u``, with real
eigenvalues; in the commutative limit ``delta_a = -i d/dx_a``.
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator

import numpy as np

from .errors import AlgebraMismatchError, InversionError

__all__ = [
    "DeformationMatrix",
    "TorusElement",
    "trace",
    "invert",
    "power",
]


class DeformationMatrix:
    """Skew-symmetric deformation phases of an n-torus algebra.

    ``theta = 0`` reproduces trigonometric polynomials on the ordinary
    torus.  Dimensions 2 and 4 are what the rest of the package exercises.
    """

    __slots__ = ("n", "theta", "_phase_block")

    def __init__(self, theta: np.ndarray | Iterable[Iterable[float]]):
        theta = np.array(theta, dtype=float)
        if theta.ndim != 2 or theta.shape[0] != theta.shape[1]:
            raise ValueError("theta must be a square matrix")
        n = theta.shape[0]
        if n % 2 != 0 or n < 2:
            raise ValueError(f"dimension must be even and >= 2, got {n}")
        if not np.allclose(theta, -theta.T, atol=0.0):
            raise ValueError("theta must be exactly skew-symmetric")
        self.n = n
        self.theta = theta
        self.theta.setflags(write=False)
        block = np.zeros((2 * n, 2 * n))
        block[:n, :n] = 0.5 * theta
        block[n:, n:] = -0.5 * theta
        block.setflags(write=False)
        self._phase_block = block

    @classmethod
    def commutative(cls, n: int) -> "DeformationMatrix":
        return cls(np.zeros((n, n)))

    @classmethod
    def standard(cls, n: int, angle: float) -> "DeformationMatrix":
        """Skew matrix with ``angle`` on every upper off-diagonal entry."""
        theta = np.zeros((n, n))
        iu = np.triu_indices(n, 1)
        theta[iu] = angle
        return cls(theta - theta.T)

    @property
    def is_commutative(self) -> bool:
        return not self.theta.any()

    def compatible(self, other: "DeformationMatrix") -> bool:
        return self is other or (
            self.n == other.n and np.array_equal(self.theta, other.theta)
        )

    def require_compatible(self, other: "DeformationMatrix") -> None:
        if not self.compatible(other):
            raise AlgebraMismatchError(
                "operands live over different deformation data"
            )

    def __repr__(self) -> str:
        return f"DeformationMatrix(n={self.n})"


def _as_key(defm: DeformationMatrix, k, ko=None) -> tuple[int, ...]:
    n = defm.n
    k = tuple(int(x) for x in k)
    if len(k) == 2 * n and ko is None:
        return k
    if len(k) != n:
        raise ValueError(f"mode vector must have length {n}")
    if ko is None:
        ko = (0,) * n
    else:
        ko = tuple(int(x) for x in ko)
        if len(ko) != n:
            raise ValueError(f"commutant mode vector must have length {n}")
    return k + ko


class TorusElement:
    """Finitely supported element of the enlarged torus algebra.

    Values are immutable by convention: every operation returns a new
    element and no public method mutates ``self``.
    """

    __slots__ = ("defm", "_data", "_arrays")

    def __init__(self, defm: DeformationMatrix, data: dict[tuple[int, ...], complex]):
        self.defm = defm
        self._data = {k: complex(c) for k, c in data.items() if c != 0}
        self._arrays = None

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, defm: DeformationMatrix) -> "TorusElement":
        return cls(defm, {})

    @classmethod
    def unit(cls, defm: DeformationMatrix) -> "TorusElement":
        return cls(defm, {(0,) * (2 * defm.n): 1.0})

    @classmethod
    def monomial(cls, defm, k, ko=None, coeff: complex = 1.0) -> "TorusElement":
        """Basis monomial ``e_{k}`` (A side) or ``e_{k} ⊗ e°_{ko}``."""
        return cls(defm, {_as_key(defm, k, ko): coeff})

    @classmethod
    def from_terms(cls, defm, terms: Iterable[tuple]) -> "TorusElement":
        """Build from ``(k, ko, coeff)`` triples, accumulating repeats."""
        data: dict[tuple[int, ...], complex] = {}
        for k, ko, c in terms:
            key = _as_key(defm, k, ko)
            data[key] = data.get(key, 0.0) + complex(c)
        return cls(defm, data)

    # -- structure ----------------------------------------------------

    @property
    def side(self) -> str:
        """'zero' | 'scalar' | 'left' | 'right' | 'mixed' support tag."""
        n = self.defm.n
        has_left = any(any(key[:n]) for key in self._data)
        has_right = any(any(key[n:]) for key in self._data)
        if not self._data:
            return "zero"
        if has_left and has_right:
            return "mixed"
        if has_left:
            return "left"
        if has_right:
            return "right"
        return "scalar"

    def terms(self) -> Iterator[tuple[tuple[int, ...], tuple[int, ...], complex]]:
        n = self.defm.n
        for key in sorted(self._data):
            yield key[:n], key[n:], self._data[key]

    def coefficient(self, k, ko=None) -> complex:
        return self._data.get(_as_key(self.defm, k, ko), 0.0)

    def support_size(self) -> int:
        return len(self._data)

    def support_radius(self) -> int:
        return max((max(abs(x) for x in key) for key in self._data), default=0)

    def norm_l1(self) -> float:
        return sum(abs(c) for c in self._data.values())

    def max_abs(self) -> float:
        return max((abs(c) for c in self._data.values()), default=0.0)

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.norm_l1() <= tol

    def _key_coeff_arrays(self):
        if self._arrays is None:
            keys = sorted(self._data)
            K = np.array(keys, dtype=np.int64).reshape(len(keys), 2 * self.defm.n)
            c = np.array([self._data[k] for k in keys], dtype=complex)
            self._arrays = (K, c)
        return self._arrays

    # -- ring operations ----------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = TorusElement.unit(self.defm) * other
        self.defm.require_compatible(other.defm)
        data = dict(self._data)
        for key, c in other._data.items():
            s = data.get(key, 0.0) + c
            if s == 0:
                data.pop(key, None)
            else:
                data[key] = s
        return TorusElement(self.defm, data)

    __radd__ = __add__

    def __neg__(self):
        return TorusElement(self.defm, {k: -c for k, c in self._data.items()})

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = TorusElement.unit(self.defm) * other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            if other == 0:
                return TorusElement.zero(self.defm)
            return TorusElement(
                self.defm, {k: c * other for k, c in self._data.items()}
            )
        if not isinstance(other, TorusElement):
            return NotImplemented
        self.defm.require_compatible(other.defm)
        if not self._data or not other._data:
            return TorusElement.zero(self.defm)
        K1, c1 = self._key_coeff_arrays()
        K2, c2 = other._key_coeff_arrays()
        exponents = (K1 @ self.defm._phase_block) @ K2.T
        # Complex products written out in real arithmetic: each float product
        # and sum is then symmetric under operand swap (no fused rounding),
        # which keeps the A / A-degree commutant exact in floating point.
        pr, pi = np.cos(exponents), np.sin(exponents)
        xr = np.multiply.outer(c1.real, c2.real) - np.multiply.outer(c1.imag, c2.imag)
        xi = np.multiply.outer(c1.real, c2.imag) + np.multiply.outer(c1.imag, c2.real)
        values = ((xr * pr - xi * pi) + 1j * (xr * pi + xi * pr)).ravel()
        keys = (K1[:, None, :] + K2[None, :, :]).reshape(-1, 2 * self.defm.n)
        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        # Accumulate per key in a canonical addend order so results are
        # bit-stable under operand reordering and parallel scheduling.
        order = np.lexsort((values.imag, values.real, inverse))
        acc = np.zeros(len(uniq), dtype=complex)
        np.add.at(acc, inverse[order], values[order])
        data = {
            tuple(int(x) for x in uniq[i]): acc[i]
            for i in np.nonzero(acc)[0]
        }
        return TorusElement(self.defm, data)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def star(self) -> "TorusElement":
        """Involution: conjugate coefficients, negate modes (phase-free)."""
        return TorusElement(
            self.defm,
            {tuple(-x for x in k): c.conjugate() for k, c in self._data.items()},
        )

    def delta(self, axis: int) -> "TorusElement":
        """Basis derivation along ``axis`` (0-based); acts on both blocks."""
        n = self.defm.n
        if not 0 <= axis < n:
            raise ValueError(f"axis must be in [0, {n}), got {axis}")
        data = {}
        for key, c in self._data.items():
            w = key[axis] + key[n + axis]
            if w:
                data[key] = w * c
        return TorusElement(self.defm, data)

    def chop(self, tol: float) -> "TorusElement":
        """Drop coefficients with ``|c| <= tol``.  Explicit truncation only;
        ring operations never call this."""
        return TorusElement(
            self.defm, {k: c for k, c in self._data.items() if abs(c) > tol}
        )

    def clip_support(self, radius: int) -> tuple["TorusElement", float]:
        """Drop modes outside the centred sup-norm ball; returns removed mass."""
        kept, removed = {}, 0.0
        for key, c in self._data.items():
            if max(abs(x) for x in key) <= radius:
                kept[key] = c
            else:
                removed += abs(c)
        return TorusElement(self.defm, kept), removed

    def approx_eq(self, other: "TorusElement", tol: float = 1e-12) -> bool:
        return (self - other).norm_l1() <= tol

    # -- interchange ----------------------------------------------------

    def to_record(self) -> dict:
        return {
            "n": self.defm.n,
            "theta": self.defm.theta.tolist(),
            "terms": [
                {"k": list(k), "k0": list(ko), "re": c.real, "im": c.imag}
                for k, ko, c in self.terms()
            ],
        }

    @classmethod
    def from_record(cls, record: dict, defm: DeformationMatrix | None = None):
        if defm is None:
            defm = DeformationMatrix(record["theta"])
        elif record.get("theta") is not None and not np.array_equal(
            np.array(record["theta"], dtype=float), defm.theta
        ):
            raise AlgebraMismatchError("record deformation differs from target")
        return cls.from_terms(
            defm,
            (
                (t["k"], t.get("k0", None), complex(t["re"], t.get("im", 0.0)))
                for t in record["terms"]
            ),
        )

    def __repr__(self) -> str:
        m = self.support_size()
        return f"TorusElement(n={self.defm.n}, terms={m}, l1={self.norm_l1():.3g})"


def trace(a: TorusElement) -> complex:
    """Factorised trace: coefficient of the double zero mode, ``tau(1) = 1``."""
    return a.coefficient((0,) * (2 * a.defm.n))


def invert(
    a: TorusElement,
    tol: float = 1e-12,
    max_radius: int = 48,
    max_iter: int = 400,
    chop_tol: float | None = None,
) -> TorusElement:
    """Inverse by damped Neumann iteration in truncated Fourier space.

    Requires a dominant identity component.  The support of the iterate is
    clipped at ``max_radius`` and small coefficients below ``chop_tol`` are
    dropped; the residual ``||a·b - 1||_1`` is always evaluated after the
    truncation, so the returned element genuinely satisfies the bound.

    Raises
    ------
    InversionError
        If the zero mode vanishes or the residual cannot be brought
        below ``tol`` within the allotted support and iterations.
    """
    lam = a.coefficient((0,) * (2 * a.defm.n))
    if abs(lam) == 0.0:
        raise InversionError("identity component of the element vanishes")
    if chop_tol is None:
        chop_tol = tol * 1e-3
    one = TorusElement.unit(a.defm)
    rest = a - one * lam
    dominance = rest.norm_l1() / abs(lam)
    b = one * (1.0 / lam)
    best = math.inf
    stalled = 0
    for _ in range(max_iter):
        b_next = (one - rest * b) * (1.0 / lam)
        b_next, _ = b_next.clip_support(max_radius)
        b_next = b_next.chop(chop_tol * b_next.max_abs())
        residual = (a * b_next - one).norm_l1()
        b = b_next
        if residual <= tol:
            return b
        if residual < best * 0.999:
            best = residual
            stalled = 0
        else:
            stalled += 1
            if stalled >= 8:
                break
    raise InversionError(
        f"no inverse within radius {max_radius} "
        f"(residual {best if best < math.inf else residual:.3g}, "
        f"off-identity mass ratio {dominance:.3g})",
        residual=best if best < math.inf else residual,
    )


def power(a: TorusElement, p: int, **invert_kwargs) -> TorusElement:
    """Integer power; negative exponents invert once and then multiply."""
    if p == 0:
        return TorusElement.unit(a.defm)
    base = a if p > 0 else invert(a, **invert_kwargs)
    out = base
    for _ in range(abs(p) - 1):
        out = out * base
    return out
