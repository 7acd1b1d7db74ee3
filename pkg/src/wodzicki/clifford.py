"""Matrix coefficients over the torus algebra, in a Pauli-string basis.

A ``CliffordValue`` is an element of ``M_{2^q}(C) ⊗ A_hat`` stored as a map
from Pauli strings (tuples over {0=I, 1=X, 2=Y, 3=Z}) to ``TorusElement``
components.  Pauli strings multiply to a single string times a unit phase,
so matrix products cost one algebra product per pair of nonzero components
instead of a dense ``d^3`` sweep.  ``q = 0`` gives plain scalars, which is
how scalar-valued symbols are carried through the same code paths.

Gamma matrices in dimensions 2 and 4 are fixed Hermitian string
representations with ``(gamma^a)^2 = 1`` and anticommuting distinct
generators; the anticommutation relations are checked on construction.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable

import numpy as np

from .algebra import DeformationMatrix, TorusElement

__all__ = ["CliffordValue", "GammaRep", "gamma_basis", "block2x2"]

_PAULI_DENSE = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

# _MUL[a][b] = (phase, c) with sigma_a sigma_b = phase * sigma_c
_MUL = [[None] * 4 for _ in range(4)]
for _a in range(4):
    for _b in range(4):
        prod = _PAULI_DENSE[_a] @ _PAULI_DENSE[_b]
        for _c in range(4):
            ratio = np.trace(_PAULI_DENSE[_c].conj().T @ prod) / 2.0
            if abs(ratio) > 0.5:
                _MUL[_a][_b] = (complex(round(ratio.real), round(ratio.imag)), _c)
                break


def _string_mul(s: tuple[int, ...], t: tuple[int, ...]) -> tuple[complex, tuple[int, ...]]:
    phase = 1.0 + 0.0j
    out = []
    for a, b in zip(s, t):
        ph, c = _MUL[a][b]
        phase *= ph
        out.append(c)
    return phase, tuple(out)


def _string_dense(s: tuple[int, ...]) -> np.ndarray:
    if not s:
        return np.array([[1.0 + 0.0j]])
    return reduce(np.kron, (_PAULI_DENSE[a] for a in s))


class CliffordValue:
    """Square matrix over the torus algebra; immutable by convention."""

    __slots__ = ("defm", "q", "comps")

    def __init__(self, defm: DeformationMatrix, q: int, comps: dict):
        self.defm = defm
        self.q = q
        self.comps = {s: t for s, t in comps.items() if not t.is_zero()}

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, defm, q: int) -> "CliffordValue":
        return cls(defm, q, {})

    @classmethod
    def identity(cls, defm, q: int) -> "CliffordValue":
        return cls(defm, q, {(0,) * q: TorusElement.unit(defm)})

    @classmethod
    def scalar(cls, value: TorusElement, q: int = 0) -> "CliffordValue":
        """Scalar element times the identity matrix."""
        return cls(value.defm, q, {(0,) * q: value})

    @classmethod
    def from_string(cls, defm, q: int, string: tuple[int, ...],
                    value: TorusElement | complex = 1.0) -> "CliffordValue":
        if not isinstance(value, TorusElement):
            value = TorusElement.unit(defm) * value
        return cls(defm, q, {tuple(string): value})

    @classmethod
    def from_constant(cls, defm, matrix: np.ndarray) -> "CliffordValue":
        """Decompose a constant ``2^q x 2^q`` matrix over Pauli strings."""
        d = matrix.shape[0]
        q = int(round(np.log2(d))) if d > 1 else 0
        if matrix.shape != (2**q, 2**q):
            raise ValueError("matrix dimension must be a power of two")
        comps = {}
        for s in np.ndindex(*(4,) * q):
            coeff = np.trace(_string_dense(s).conj().T @ matrix) / d
            if abs(coeff) > 0:
                comps[tuple(s)] = TorusElement.unit(defm) * complex(coeff)
        return cls(defm, q, comps)

    # -- inspection ----------------------------------------------------

    @property
    def dim(self) -> int:
        return 2**self.q

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(t.is_zero(tol) for t in self.comps.values())

    def norm_l1(self) -> float:
        return sum(t.norm_l1() for t in self.comps.values())

    def component(self, string: tuple[int, ...]) -> TorusElement:
        return self.comps.get(tuple(string), TorusElement.zero(self.defm))

    def to_dense(self) -> list[list[TorusElement]]:
        d = self.dim
        zero = TorusElement.zero(self.defm)
        out = [[zero for _ in range(d)] for _ in range(d)]
        for s, t in self.comps.items():
            M = _string_dense(s)
            for i in range(d):
                for j in range(d):
                    if M[i, j] != 0:
                        out[i][j] = out[i][j] + t * complex(M[i, j])
        return out

    # -- arithmetic -----------------------------------------------------

    def _check(self, other: "CliffordValue"):
        self.defm.require_compatible(other.defm)
        if self.q != other.q:
            raise ValueError(f"matrix sizes differ: 2^{self.q} vs 2^{other.q}")

    def __add__(self, other: "CliffordValue") -> "CliffordValue":
        self._check(other)
        comps = dict(self.comps)
        for s, t in other.comps.items():
            comps[s] = comps[s] + t if s in comps else t
        return CliffordValue(self.defm, self.q, comps)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return CliffordValue(self.defm, self.q, {s: -t for s, t in self.comps.items()})

    def __matmul__(self, other: "CliffordValue") -> "CliffordValue":
        self._check(other)
        comps: dict = {}
        for s, t1 in self.comps.items():
            for u, t2 in other.comps.items():
                phase, r = _string_mul(s, u)
                term = (t1 * t2) * phase
                comps[r] = comps[r] + term if r in comps else term
        return CliffordValue(self.defm, self.q, comps)

    def scale(self, c: complex) -> "CliffordValue":
        return CliffordValue(self.defm, self.q, {s: t * c for s, t in self.comps.items()})

    def left_mul(self, x: TorusElement) -> "CliffordValue":
        return CliffordValue(self.defm, self.q, {s: x * t for s, t in self.comps.items()})

    def right_mul(self, x: TorusElement) -> "CliffordValue":
        return CliffordValue(self.defm, self.q, {s: t * x for s, t in self.comps.items()})

    def star(self) -> "CliffordValue":
        """Hermitian adjoint; Pauli strings are self-adjoint."""
        return CliffordValue(self.defm, self.q, {s: t.star() for s, t in self.comps.items()})

    def delta(self, axis: int) -> "CliffordValue":
        return CliffordValue(self.defm, self.q, {s: t.delta(axis) for s, t in self.comps.items()})

    def matrix_trace(self) -> TorusElement:
        """Sum of diagonal entries: ``2^q`` times the identity component."""
        ident = self.comps.get((0,) * self.q)
        if ident is None:
            return TorusElement.zero(self.defm)
        return ident * float(self.dim)

    def approx_eq(self, other: "CliffordValue", tol: float = 1e-12) -> bool:
        return (self - other).is_zero(tol)

    def __repr__(self) -> str:
        return f"CliffordValue(dim={self.dim}, strings={len(self.comps)})"


class GammaRep:
    """Fixed Hermitian gamma representation for even dimension 2 or 4."""

    def __init__(self, n: int):
        if n == 2:
            strings = [(1,), (2,)]
            chirality = (3,)
            q = 1
        elif n == 4:
            strings = [(1, 1), (1, 2), (1, 3), (2, 0)]
            chirality = (3, 0)
            q = 2
        else:
            raise ValueError(f"gamma representation available for n in {{2, 4}}, got {n}")
        self.n = n
        self.q = q
        self.strings = strings
        self.chirality_string = chirality
        self.matrices = [_string_dense(s) for s in strings]
        self.chirality = _string_dense(chirality)
        self._verify()

    def _verify(self):
        d = 2**self.q
        for a, ga in enumerate(self.matrices):
            for b, gb in enumerate(self.matrices):
                anti = ga @ gb + gb @ ga
                expected = 2.0 * np.eye(d) if a == b else np.zeros((d, d))
                assert np.allclose(anti, expected), "gamma anticommutation failed"
            assert np.allclose(ga @ self.chirality, -self.chirality @ ga)

    def gamma(self, defm: DeformationMatrix, a: int,
              value: TorusElement | complex = 1.0) -> CliffordValue:
        """``gamma^a`` (0-based) scaled by an optional algebra element."""
        return CliffordValue.from_string(defm, self.q, self.strings[a], value)

    def grading(self, defm: DeformationMatrix) -> CliffordValue:
        return CliffordValue.from_string(defm, self.q, self.chirality_string)

    def identity(self, defm: DeformationMatrix) -> CliffordValue:
        return CliffordValue.identity(defm, self.q)


def gamma_basis(n: int) -> GammaRep:
    """Gamma matrices in dimension 2 or 4 (anticommutation verified)."""
    return GammaRep(n)


def block2x2(A: CliffordValue, B: CliffordValue,
             C: CliffordValue, D: CliffordValue) -> CliffordValue:
    """Assemble ``[[A, B], [C, D]]`` by prepending one Pauli factor."""
    for other in (B, C, D):
        A._check(other)
    comps: dict = {}

    def _accumulate(weights: dict[int, complex], block: CliffordValue):
        for outer, w in weights.items():
            for s, t in block.comps.items():
                key = (outer,) + s
                term = t * w
                comps[key] = comps[key] + term if key in comps else term

    # E00 = (I+Z)/2, E11 = (I-Z)/2, E01 = (X+iY)/2, E10 = (X-iY)/2
    _accumulate({0: 0.5, 3: 0.5}, A)
    _accumulate({1: 0.5, 2: 0.5j}, B)
    _accumulate({1: 0.5, 2: -0.5j}, C)
    _accumulate({0: 0.5, 3: -0.5}, D)
    return CliffordValue(A.defm, A.q + 1, comps)
