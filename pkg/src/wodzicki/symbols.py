"""Graded pseudodifferential symbols over the deformed torus algebra.

A symbol is a finite sum of homogeneous components; each component is a
sum of terms ``coeff · xi^alpha · Q^{-j}`` where ``Q = ||xi||^2`` by
default, or a fixed positive quadratic form ``Q = g^{ab}(x) xi_a xi_b``
for commutative general-metric work.  Negative ``j`` encodes positive
powers of ``Q`` (the flat Laplace symbol is the single term ``j = -1``).
The order of a term is ``|alpha| - 2j`` and every stored term satisfies
the order of its component exactly.

Composition follows the derivation calculus

    sigma(P∘Q) = sum_beta (1/beta!) d_xi^beta sigma(P) · delta^beta sigma(Q),

where ``delta`` are the lattice derivations with real eigenvalues and
``beta!`` is the multi-index factorial.  The textbook form with
``(-i)^{|beta|}`` and coordinate derivatives is recovered under the
dictionary ``delta_a = -i d/dx_a``; a unit test pins the translation.

Symbols carry an explicit validity window ``[bottom, top]``: orders above
``top`` are exactly zero, orders below ``bottom`` are unknown unless the
symbol is flagged exact (true for differential operators).  Every
operation documents how the window propagates.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable

from .algebra import DeformationMatrix, TorusElement, invert
from .clifford import CliffordValue
from .errors import PrincipalSymbolError

__all__ = [
    "QuadraticForm",
    "Symbol",
    "compose",
    "parametrix",
    "power_symbols",
    "scalar_power_closed_form",
    "DEFAULT_DEPTH",
]

DEFAULT_DEPTH = 3

TermDict = dict  # (alpha: tuple[int, ...], j: int) -> CliffordValue


class QuadraticForm:
    """Positive quadratic denominator ``g^{ab}(x) xi_a xi_b`` (theta = 0)."""

    def __init__(self, g_up):
        rows = [list(r) for r in g_up]
        self.n = len(rows)
        self.defm = rows[0][0].defm
        if not self.defm.is_commutative:
            raise ValueError("quadratic-form denominators require theta = 0")
        for a in range(self.n):
            for b in range(self.n):
                if not rows[a][b].approx_eq(rows[b][a], 1e-12):
                    raise ValueError("quadratic form must be symmetric")
        self.g_up = rows

    def compatible(self, other: "QuadraticForm") -> bool:
        return self is other or all(
            self.g_up[a][b].approx_eq(other.g_up[a][b], 0.0)
            for a in range(self.n)
            for b in range(self.n)
        )


def _merge_qform(qa, qb):
    if qa is None:
        return qb
    if qb is None:
        return qa
    if not qa.compatible(qb):
        raise ValueError("cannot mix symbols over different quadratic forms")
    return qa


def _term_order(alpha, j) -> int:
    return sum(alpha) - 2 * j


def _comp_add(dst: TermDict, key, coeff: CliffordValue) -> None:
    if key in dst:
        dst[key] = dst[key] + coeff
        if dst[key].is_zero():
            del dst[key]
    elif not coeff.is_zero():
        dst[key] = coeff


def comp_scale(d: TermDict, c: complex) -> TermDict:
    return {k: v.scale(c) for k, v in d.items()}


def comp_sum(ds: Iterable[TermDict]) -> TermDict:
    out: TermDict = {}
    for d in ds:
        for key, coeff in d.items():
            _comp_add(out, key, coeff)
    return out


def comp_mul(d1: TermDict, d2: TermDict) -> TermDict:
    """Termwise product; coefficient order is preserved (left·right)."""
    out: TermDict = {}
    for (a1, j1), c1 in d1.items():
        for (a2, j2), c2 in d2.items():
            alpha = tuple(x + y for x, y in zip(a1, a2))
            _comp_add(out, (alpha, j1 + j2), c1 @ c2)
    return out


def comp_xi(d: TermDict, axis: int, qform: QuadraticForm | None) -> TermDict:
    """xi-derivative of a term dict; expands the two term families."""
    out: TermDict = {}
    for (alpha, j), coeff in d.items():
        if alpha[axis] > 0:
            down = list(alpha)
            down[axis] -= 1
            _comp_add(out, (tuple(down), j), coeff.scale(alpha[axis]))
        if j != 0:
            if qform is None:
                up = list(alpha)
                up[axis] += 1
                _comp_add(out, (tuple(up), j + 1), coeff.scale(-2 * j))
            else:
                for b in range(len(alpha)):
                    g = qform.g_up[axis][b]
                    if g.is_zero():
                        continue
                    up = list(alpha)
                    up[b] += 1
                    _comp_add(out, (tuple(up), j + 1), coeff.left_mul(g).scale(-2 * j))
    return out


def comp_delta(d: TermDict, axis: int, qform: QuadraticForm | None) -> TermDict:
    """Lattice derivation; with a quadratic form the denominator is hit too."""
    out: TermDict = {}
    for (alpha, j), coeff in d.items():
        _comp_add(out, (alpha, j), coeff.delta(axis))
        if j != 0 and qform is not None:
            for b in range(len(alpha)):
                for c in range(len(alpha)):
                    dg = qform.g_up[b][c].delta(axis)
                    if dg.is_zero(0.0):
                        continue
                    up = list(alpha)
                    up[b] += 1
                    up[c] += 1
                    _comp_add(out, (tuple(up), j + 1), coeff.left_mul(dg).scale(-j))
    return out


def comp_norm(d: TermDict) -> float:
    return sum(c.norm_l1() for c in d.values())


def _compositions(total: int, parts: int):
    """All multi-indices of given weight (lexicographic, deterministic)."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


class Symbol:
    """Asymptotic symbol with tracked homogeneous components."""

    __slots__ = ("defm", "q", "top", "bottom", "exact", "comps", "qform")

    def __init__(self, defm: DeformationMatrix, q: int, top: int, bottom: int,
                 comps: dict[int, TermDict], exact: bool = False,
                 qform: QuadraticForm | None = None):
        self.defm = defm
        self.q = q
        self.top = top
        self.bottom = bottom
        self.exact = exact
        self.qform = qform
        self.comps = {}
        for order, terms in comps.items():
            live = {k: c for k, c in terms.items() if not c.is_zero()}
            for (alpha, j) in live:
                if _term_order(alpha, j) != order:
                    raise ValueError(
                        f"term {(alpha, j)} is not homogeneous of order {order}"
                    )
            if live:
                if order > top or (not exact and order < bottom):
                    raise ValueError(f"component {order} outside window")
                self.comps[order] = live

    # -- constructors --------------------------------------------------

    @classmethod
    def from_terms(cls, defm, q, terms, depth: int = DEFAULT_DEPTH,
                   top: int | None = None, exact: bool = True,
                   qform: QuadraticForm | None = None) -> "Symbol":
        """Build from ``(coeff, alpha, j)`` triples; differential-operator
        symbols are exact by default."""
        comps: dict[int, TermDict] = {}
        orders = []
        for coeff, alpha, j in terms:
            alpha = tuple(int(x) for x in alpha)
            order = _term_order(alpha, j)
            orders.append(order)
            _comp_add(comps.setdefault(order, {}), (alpha, int(j)), coeff)
        if top is None:
            top = max(orders) if orders else 0
        bottom = min(orders + [top]) if exact else top - depth + 1
        return cls(defm, q, top, bottom, comps, exact=exact, qform=qform)

    @classmethod
    def constant(cls, coeff: CliffordValue) -> "Symbol":
        """Order-zero symbol with constant (in xi) coefficient; exact."""
        n = coeff.defm.n
        return cls.from_terms(coeff.defm, coeff.q, [(coeff, (0,) * n, 0)], top=0)

    @classmethod
    def zero(cls, defm, q, top: int = 0, depth: int = DEFAULT_DEPTH) -> "Symbol":
        return cls(defm, q, top, top - depth + 1, {}, exact=True)

    # -- inspection ------------------------------------------------------

    @property
    def n(self) -> int:
        return self.defm.n

    @property
    def depth(self) -> int:
        return self.top - self.bottom + 1

    def component(self, order: int) -> TermDict:
        """Tracked component; empty above top, empty below bottom only for
        exact symbols (unknown otherwise — callers guard with ``bottom``)."""
        return self.comps.get(order, {})

    def orders(self):
        return sorted(self.comps, reverse=True)

    def is_polynomial(self) -> bool:
        return all(j <= 0 for terms in self.comps.values() for (_, j) in terms)

    def max_xi_degree(self) -> int:
        degs = [
            sum(alpha) - 2 * j
            for terms in self.comps.values()
            for (alpha, j) in terms
        ]
        return max(degs, default=0)

    def norm_l1(self, orders=None) -> float:
        orders = self.orders() if orders is None else orders
        return sum(comp_norm(self.component(o)) for o in orders)

    def min_stored_order(self) -> int:
        return min(self.comps, default=self.top)

    # -- linear structure -------------------------------------------------

    def map_coeffs(self, fn: Callable[[CliffordValue], CliffordValue]) -> "Symbol":
        comps = {
            o: {k: fn(c) for k, c in terms.items()}
            for o, terms in self.comps.items()
        }
        return Symbol(self.defm, self.q, self.top, self.bottom, comps,
                      exact=self.exact, qform=self.qform)

    def scale(self, c: complex) -> "Symbol":
        return self.map_coeffs(lambda v: v.scale(c))

    def left_mul_value(self, x: CliffordValue) -> "Symbol":
        """Multiply every coefficient by a zero-order value on the left.

        Same as composing with ``Symbol.constant(x)`` from the left, which
        has no correction terms."""
        return self.map_coeffs(lambda v: x @ v)

    def __neg__(self):
        return self.scale(-1.0)

    def __add__(self, other: "Symbol") -> "Symbol":
        self.defm.require_compatible(other.defm)
        if self.q != other.q:
            raise ValueError("cannot add symbols with different matrix sizes")
        qform = _merge_qform(self.qform, other.qform)
        top = max(self.top, other.top)
        exact = self.exact and other.exact
        if exact:
            bottom = min(self.min_stored_order(), other.min_stored_order(), top)
        else:
            bottoms = []
            if not self.exact:
                bottoms.append(self.bottom)
            if not other.exact:
                bottoms.append(other.bottom)
            bottom = max(bottoms)
        comps: dict[int, TermDict] = {}
        for src in (self, other):
            for o, terms in src.comps.items():
                if o < bottom and not exact:
                    continue
                dst = comps.setdefault(o, {})
                for key, c in terms.items():
                    _comp_add(dst, key, c)
        return Symbol(self.defm, self.q, top, bottom, comps, exact=exact, qform=qform)

    def __sub__(self, other):
        return self + (-other)

    # -- calculus ---------------------------------------------------------

    def xi_derivative(self, axis: int) -> "Symbol":
        comps: dict[int, TermDict] = {}
        for o, terms in self.comps.items():
            d = comp_xi(terms, axis, self.qform)
            if d:
                comps[o - 1] = comp_sum([comps.get(o - 1, {}), d])
        return Symbol(self.defm, self.q, self.top - 1, self.bottom - 1, comps,
                      exact=self.exact, qform=self.qform)

    def delta(self, axis: int) -> "Symbol":
        comps: dict[int, TermDict] = {}
        for o, terms in self.comps.items():
            d = comp_delta(terms, axis, self.qform)
            if d:
                comps[o] = d
        return Symbol(self.defm, self.q, self.top, self.bottom, comps,
                      exact=self.exact, qform=self.qform)

    def truncate(self, top: int | None = None, bottom: int | None = None) -> "Symbol":
        """Restrict the tracked window (marks the symbol non-exact if the
        discarded tail could be nonzero)."""
        top = self.top if top is None else top
        bottom = self.bottom if bottom is None else bottom
        exact = self.exact and bottom <= self.min_stored_order()
        comps = {o: t for o, t in self.comps.items() if bottom <= o <= top}
        return Symbol(self.defm, self.q, top, bottom, comps,
                      exact=exact, qform=self.qform)

    # -- canonical form and comparison -------------------------------------

    def canonical_component(self, order: int) -> dict:
        """Component rewritten over monomials at a common denominator power.

        Distinct monomials ``xi^alpha Q^{-J}`` of one homogeneity are
        linearly independent, so this is a normal form suitable for
        equality tests.  Euclidean denominators only.
        """
        if self.qform is not None:
            raise NotImplementedError("canonical form needs Q = ||xi||^2")
        terms = self.component(order)
        if not terms:
            return {}
        J = max(j for (_, j) in terms)
        out: dict = {}
        n = self.n
        for (alpha, j), coeff in terms.items():
            p = J - j
            for m in _compositions(p, n):
                weight = math.factorial(p)
                for x in m:
                    weight //= math.factorial(x)
                key = tuple(a + 2 * mm for a, mm in zip(alpha, m))
                cur = out.get(key)
                add = coeff.scale(float(weight))
                out[key] = add if cur is None else cur + add
        return {k: v for k, v in out.items() if not v.is_zero()}

    def canonical_norm(self, orders=None) -> float:
        orders = self.orders() if orders is None else orders
        return sum(
            sum(c.norm_l1() for c in self.canonical_component(o).values())
            for o in orders
        )

    def approx_eq(self, other: "Symbol", tol: float = 1e-12, orders=None) -> bool:
        diff = self - other
        if orders is None:
            orders = range(diff.bottom, diff.top + 1)
        return diff.canonical_norm(orders) <= tol

    # -- interchange --------------------------------------------------------

    def to_records(self) -> list[dict]:
        out = []
        for order in self.orders():
            for (alpha, j), coeff in sorted(self.component(order).items()):
                out.append({
                    "order": order,
                    "alpha": list(alpha),
                    "j": j,
                    "coeff": {
                        "q": coeff.q,
                        "comps": [
                            {"string": list(s), "element": t.to_record()}
                            for s, t in sorted(coeff.comps.items())
                        ],
                    },
                })
        return out

    def __repr__(self) -> str:
        spans = {o: len(t) for o, t in sorted(self.comps.items(), reverse=True)}
        return (f"Symbol(top={self.top}, bottom={self.bottom}, "
                f"exact={self.exact}, terms={spans})")


def compose(P: Symbol, Q: Symbol, depth: int = DEFAULT_DEPTH) -> Symbol:
    """Symbol of the operator product ``P∘Q`` truncated to ``depth`` orders.

    The result window is the intersection of what the inputs can certify:
    unknown tails of ``P`` (below ``P.bottom``) pollute orders from
    ``P.bottom + Q.top`` down, and symmetrically for ``Q``.  The result is
    exact when both inputs are exact, ``P`` is polynomial in xi of degree
    at most ``depth - 1`` (so the derivative series terminates inside the
    window) and the full product range fits in the window.
    """
    P.defm.require_compatible(Q.defm)
    if P.q != Q.q:
        raise ValueError("cannot compose symbols with different matrix sizes")
    qform = _merge_qform(P.qform, Q.qform)
    top = P.top + Q.top
    candidates = [top - depth + 1]
    if not P.exact:
        candidates.append(P.bottom + Q.top)
    if not Q.exact:
        candidates.append(P.top + Q.bottom)
    bottom = max(candidates)

    exact = (
        P.exact and Q.exact and P.is_polynomial()
        and P.max_xi_degree() <= depth - 1
        and P.min_stored_order() + Q.min_stored_order() >= bottom
    )

    n = P.n
    comps: dict[int, TermDict] = {}
    P_der = {(): P}
    Q_der = {(): Q}

    def _derived(cache, base_map, beta):
        if beta in cache:
            return cache[beta]
        axis = next(i for i, b in enumerate(beta) if b > 0)
        parent = list(beta)
        parent[axis] -= 1
        prev = _derived(cache, base_map, tuple(parent))
        cur = base_map(prev, axis)
        cache[beta] = cur
        return cur

    for weight in range(0, depth):
        for beta in _compositions(weight, n):
            Pb = _derived(P_der, lambda s, a: s.xi_derivative(a), beta)
            if not Pb.comps:
                continue
            Qb = _derived(Q_der, lambda s, a: s.delta(a), beta)
            if not Qb.comps:
                continue
            scale = 1.0
            for b in beta:
                scale /= math.factorial(b)
            for oa, ta in Pb.comps.items():
                for ob, tb in Qb.comps.items():
                    order = oa + ob
                    if order < bottom or order > top:
                        continue
                    prod = comp_mul(ta, tb)
                    if scale != 1.0:
                        prod = comp_scale(prod, scale)
                    comps[order] = comp_sum([comps.get(order, {}), prod])

    return Symbol(P.defm, P.q, top, bottom, comps, exact=exact, qform=qform)


def _isotropic_principal(P: Symbol) -> TorusElement:
    """Extract ``c`` from a principal symbol of the shape ``c(x)·Q``.

    Accepts the direct single-term form and the expanded diagonal form
    produced by composition (equal coefficients on every ``xi_a^2``).
    """
    terms = P.component(P.top)
    if not terms:
        raise PrincipalSymbolError("empty principal symbol")
    n = P.n
    # Lift everything to denominator level j = 0 (only j in {-1, 0} occurs
    # for the order-2 operators this package builds).
    lifted: TermDict = {}
    for (alpha, j), coeff in terms.items():
        if j == 0:
            _comp_add(lifted, (alpha, 0), coeff)
        elif j == -1 and P.qform is None:
            for a in range(n):
                up = list(alpha)
                up[a] += 2
                _comp_add(lifted, (tuple(up), 0), coeff)
        elif j == -1 and P.qform is not None:
            for a in range(n):
                for b in range(n):
                    g = P.qform.g_up[a][b]
                    if g.is_zero():
                        continue
                    up = list(alpha)
                    up[a] += 1
                    up[b] += 1
                    _comp_add(lifted, (tuple(up), 0), coeff.left_mul(g))
        else:
            raise PrincipalSymbolError(
                f"unsupported principal term (alpha={alpha}, j={j})"
            )
    if P.qform is not None:
        # General quadratic form: require the builder's canonical single term.
        if set(terms) == {((0,) * n, -1)}:
            coeff = terms[((0,) * n, -1)]
        else:
            raise PrincipalSymbolError(
                "general-metric principal symbol must be c(x)·Q"
            )
    else:
        diag_keys = []
        for a in range(n):
            key = tuple(2 if i == a else 0 for i in range(n))
            diag_keys.append((key, 0))
        off = set(lifted) - set(diag_keys)
        if off:
            raise PrincipalSymbolError(f"principal symbol not isotropic: {sorted(off)}")
        coeffs = [lifted.get(k, None) for k in diag_keys]
        if any(c is None for c in coeffs):
            raise PrincipalSymbolError("principal symbol not isotropic (missing axis)")
        coeff = coeffs[0]
        scale = max(coeff.norm_l1(), 1e-300)
        for other in coeffs[1:]:
            if not (coeff - other).is_zero(1e-10 * scale):
                raise PrincipalSymbolError("principal symbol not isotropic")
    ident = (0,) * P.q
    if set(coeff.comps) - {ident}:
        raise PrincipalSymbolError("principal coefficient must be scalar")
    return coeff.component(ident)


def parametrix(P: Symbol, depth: int = DEFAULT_DEPTH, **invert_kwargs) -> Symbol:
    """Inverse symbol of an order-2 operator with isotropic principal part.

    Solves the recursive order-by-order equations; the leading inverse is
    left-multiplied onto the bracket at every stage, preserving the
    noncommutative factor order.  Depth is capped at 3 tracked orders,
    which is all the residue functionals ever need.
    """
    if P.top != 2:
        raise PrincipalSymbolError(f"parametrix expects an order-2 symbol, got {P.top}")
    if depth > 3:
        raise NotImplementedError("parametrix depth is capped at 3")
    if P.bottom > 2 - depth + 1 and not P.exact:
        raise PrincipalSymbolError("operator symbol does not track enough orders")
    c = _isotropic_principal(P)
    c_inv = invert(c, **invert_kwargs)
    n, q, defm, qform = P.n, P.q, P.defm, P.qform
    zero_alpha = (0,) * n
    b2: TermDict = {(zero_alpha, 1): CliffordValue.scalar(c_inv, q)}
    comps = {-2: b2}
    a2 = P.component(2)
    a1 = P.component(1)
    a0 = P.component(0)

    def left_b2(d: TermDict) -> TermDict:
        return comp_mul(b2, d)

    if depth >= 2:
        bracket = [comp_mul(a1, b2)]
        for a in range(n):
            bracket.append(comp_mul(comp_xi(a2, a, qform), comp_delta(b2, a, qform)))
        b3 = comp_scale(left_b2(comp_sum(bracket)), -1.0)
        comps[-3] = b3
    if depth >= 3:
        bracket = [comp_mul(a1, b3), comp_mul(a0, b2)]
        for a in range(n):
            bracket.append(comp_mul(comp_xi(a1, a, qform), comp_delta(b2, a, qform)))
            bracket.append(comp_mul(comp_xi(a2, a, qform), comp_delta(b3, a, qform)))
            for b in range(n):
                bracket.append(
                    comp_scale(
                        comp_mul(
                            comp_xi(comp_xi(a2, a, qform), b, qform),
                            comp_delta(comp_delta(b2, a, qform), b, qform),
                        ),
                        0.5,
                    )
                )
        b4 = comp_scale(left_b2(comp_sum(bracket)), -1.0)
        comps[-4] = b4
    return Symbol(defm, q, -2, -2 - depth + 1, comps, exact=False, qform=qform)


def power_symbols(B: Symbol, l: int, depth: int = DEFAULT_DEPTH) -> Symbol:
    """``l``-fold iterated composition of a parametrix-type symbol."""
    if l < 1:
        raise ValueError("power must be a positive integer")
    out = B
    for _ in range(l - 1):
        out = compose(out, B, depth)
    return out


def scalar_power_closed_form(P: Symbol, l: int, depth: int = DEFAULT_DEPTH) -> Symbol:
    """Closed form for the three leading symbols of ``P^l``, scalar case.

    Valid when all coefficients commute (theta = 0, scalar entries); the
    general noncommutative power goes through ``power_symbols``, which this
    closed form cross-checks.  Formulas are stated in the derivation
    calculus: single spatial derivatives enter with coefficient
    ``+l(l-1)/2`` and the double-derivative group with ``+l(l-1)/24``.
    """
    if l < 1:
        raise ValueError("power must be a positive integer")
    if P.q != 0:
        raise ValueError("closed form requires scalar symbols")
    if not P.defm.is_commutative:
        raise ValueError("closed form requires theta = 0")
    k = -P.top
    n = P.n
    qf = P.qform
    p = P.component(P.top)
    pk1 = P.component(P.top - 1)
    pk2 = P.component(P.top - 2)

    def pw(d: TermDict, m: int) -> TermDict:
        out: TermDict = {((0,) * n, 0): CliffordValue.identity(P.defm, 0)}
        for _ in range(m):
            out = comp_mul(out, d)
        return out

    def mul(*ds: TermDict) -> TermDict:
        out = ds[0]
        for d in ds[1:]:
            out = comp_mul(out, d)
        return out

    xi = lambda d, a: comp_xi(d, a, qf)
    dl = lambda d, a: comp_delta(d, a, qf)

    r0 = pw(p, l)
    comps = {-l * k: r0}

    if depth >= 2:
        parts = [comp_scale(mul(pw(p, l - 1), pk1), float(l))] if pk1 else []
        if l >= 2:
            parts.append(
                comp_scale(
                    mul(pw(p, l - 2),
                        comp_sum([mul(xi(p, a), dl(p, a)) for a in range(n)])),
                    l * (l - 1) / 2.0,
                )
            )
        comps[-l * k - 1] = comp_sum(parts)

    if depth >= 3:
        parts = []
        if pk2:
            parts.append(comp_scale(mul(pw(p, l - 1), pk2), float(l)))
        if l >= 2:
            if pk1:
                parts.append(
                    comp_scale(mul(pw(p, l - 2), pk1, pk1), l * (l - 1) / 2.0)
                )
                parts.append(
                    comp_scale(
                        mul(pw(p, l - 2),
                            comp_sum(
                                [mul(xi(pk1, a), dl(p, a)) for a in range(n)]
                                + [mul(xi(p, a), dl(pk1, a)) for a in range(n)]
                            )),
                        l * (l - 1) / 2.0,
                    )
                )
            if l >= 3 and pk1:
                parts.append(
                    comp_scale(
                        mul(pw(p, l - 3), pk1,
                            comp_sum([mul(xi(p, a), dl(p, a)) for a in range(n)])),
                        l * (l - 1) * (l - 2) / 2.0,
                    )
                )
            parts.append(
                comp_scale(
                    mul(pw(p, l - 2),
                        comp_sum([
                            mul(xi(xi(p, a), b), dl(dl(p, a), b))
                            for a in range(n) for b in range(n)
                        ])),
                    6.0 * l * (l - 1) / 24.0,
                )
            )
            if l >= 4:
                parts.append(
                    comp_scale(
                        mul(pw(p, l - 4),
                            comp_sum([
                                mul(xi(p, a), xi(p, b), dl(p, a), dl(p, b))
                                for a in range(n) for b in range(n)
                            ])),
                        3.0 * (l - 2) * (l - 3) * l * (l - 1) / 24.0,
                    )
                )
            if l >= 3:
                parts.append(
                    comp_scale(
                        mul(pw(p, l - 3),
                            comp_sum([
                                comp_sum([
                                    mul(xi(p, a), xi(p, b), dl(dl(p, a), b)),
                                    mul(xi(p, a), xi(dl(p, a), b), dl(p, b)),
                                    mul(xi(xi(p, a), b), dl(p, a), dl(p, b)),
                                ])
                                for a in range(n) for b in range(n)
                            ])),
                        4.0 * (l - 2) * l * (l - 1) / 24.0,
                    )
                )
        comps[-l * k - 2] = comp_sum(parts)

    return Symbol(P.defm, 0, -l * k, -l * k - depth + 1, comps,
                  exact=False, qform=qf)
