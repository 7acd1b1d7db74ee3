import json

import numpy as np
import pytest

from wodzicki.algebra import DeformationMatrix, TorusElement, invert, power, trace
from wodzicki.errors import AlgebraMismatchError, InversionError
from wodzicki.gridfft import sample_on_grid
from wodzicki.sampling import irrational_theta, random_element, random_selfadjoint

RNG = np.random.default_rng(20240811)


def theta2(angle=0.37):
    return DeformationMatrix([[0.0, angle], [-angle, 0.0]])


def test_defining_commutation_relation():
    defm = theta2()
    u1 = TorusElement.monomial(defm, (1, 0))
    u2 = TorusElement.monomial(defm, (0, 1))
    lhs = u1 * u2
    rhs = (u2 * u1) * np.exp(1j * 0.37)
    assert (lhs - rhs).norm_l1() < 1e-14
    assert (u1 * u2 - u2 * u1).norm_l1() > 0.1


def test_product_support_and_bilinearity():
    defm = theta2()
    a = random_element(defm, RNG, modes=3)
    b = random_element(defm, RNG, modes=3)
    ab = a * b
    sup_a = {k + ko for k, ko, _ in a.terms()}
    sup_b = {k + ko for k, ko, _ in b.terms()}
    sums = {tuple(x + y for x, y in zip(u, v)) for u in sup_a for v in sup_b}
    assert {k + ko for k, ko, _ in ab.terms()} <= sums
    lhs = (a + b) * b
    rhs = a * b + b * b
    assert (lhs - rhs).norm_l1() < 1e-13


def test_commutative_limit_products_commute():
    defm = DeformationMatrix.commutative(2)
    for _ in range(5):
        a = random_element(defm, RNG)
        b = random_element(defm, RNG)
        assert (a * b - b * a).norm_l1() < 1e-14


def test_theta_zero_matches_pointwise_grid_arithmetic():
    defm = DeformationMatrix.commutative(2)
    a = random_element(defm, RNG, modes=4)
    b = random_element(defm, RNG, modes=4)
    shape = (16, 16)
    prod_grid = sample_on_grid(a, shape) * sample_on_grid(b, shape)
    assert np.abs(sample_on_grid(a * b, shape) - prod_grid).max() < 1e-10


def test_associativity_at_nonzero_theta():
    defm = irrational_theta(2)
    for _ in range(5):
        a = random_element(defm, RNG)
        b = random_element(defm, RNG)
        c = random_element(defm, RNG)
        assert ((a * b) * c - a * (b * c)).norm_l1() < 1e-13


def test_mismatched_deformation_rejected():
    a = TorusElement.unit(theta2(0.3))
    b = TorusElement.unit(theta2(0.4))
    with pytest.raises(AlgebraMismatchError):
        a * b


def test_derivations():
    defm = theta2()
    e = TorusElement.monomial(defm, (2, 3))
    assert (e.delta(0) - e * 2).norm_l1() < 1e-15
    assert TorusElement.unit(defm).delta(1).is_zero()
    with pytest.raises(ValueError):
        e.delta(5)
    for _ in range(3):
        a = random_element(defm, RNG)
        b = random_element(defm, RNG)
        leibniz = (a * b).delta(0) - a.delta(0) * b - a * b.delta(0)
        assert leibniz.norm_l1() < 1e-13


def test_trace_normalisation_and_invariance():
    defm = theta2()
    assert trace(TorusElement.unit(defm)) == 1.0
    assert trace(TorusElement.monomial(defm, (1, 0))) == 0.0
    for _ in range(5):
        a = random_element(defm, RNG, modes=4)
        b = random_element(defm, RNG, modes=4)
        assert abs(trace(a * b) - trace(b * a)) < 1e-13
        assert trace(a.delta(0)) == 0.0
        assert trace(a.delta(1)) == 0.0


def test_trace_of_fourth_power_against_convolution_oracle():
    # h = 1 + 0.1 (e_1 + e_-1); tau(h^4) by direct Fourier convolution.
    defm = theta2()
    h = TorusElement.from_terms(
        defm, [((0, 0), None, 1.0), ((1, 0), None, 0.1), ((-1, 0), None, 0.1)]
    )
    coeffs = {1: 0.1, 0: 1.0, -1: 0.1}
    oracle = sum(
        coeffs.get(k1, 0) * coeffs.get(k2, 0) * coeffs.get(k3, 0)
        * coeffs.get(-k1 - k2 - k3, 0)
        for k1 in range(-1, 2) for k2 in range(-1, 2) for k3 in range(-1, 2)
    )
    h4 = power(h, 4)
    assert abs(trace(h4) - oracle) < 1e-14
    assert abs(trace(h4) - 1.1206) < 1e-12


def test_factorized_trace_on_mixed_elements():
    defm = theta2()
    a = TorusElement.monomial(defm, (1, 0))
    bo = TorusElement.monomial(defm, (0, 0), (1, 0))
    assert trace(a * bo) == 0.0
    assert trace(a.star() * a) == pytest.approx(1.0)


def test_left_and_right_copies_commute_exactly():
    defm = irrational_theta(2)
    for _ in range(5):
        a = random_element(defm, RNG, side="left")
        bo = random_element(defm, RNG, side="right")
        assert (a * bo - bo * a).norm_l1() == 0.0


def test_involution_laws():
    defm = irrational_theta(2)
    e = TorusElement.monomial(defm, (1, 2))
    assert (e.star() * e - TorusElement.unit(defm)).norm_l1() < 1e-14
    a = random_element(defm, RNG, side="mixed")
    b = random_element(defm, RNG, side="mixed")
    assert ((a * b).star() - b.star() * a.star()).norm_l1() < 1e-13
    # coefficient symmetry c_{-u} = conj(c_u) gives self-adjointness
    h = random_selfadjoint(defm, RNG, modes=3, side="mixed")
    assert (h.star() - h).norm_l1() < 1e-14


def test_invert_scalar():
    defm = theta2()
    two = TorusElement.unit(defm) * 2.0
    inv = invert(two)
    assert (inv - TorusElement.unit(defm) * 0.5).norm_l1() == 0.0


def test_invert_against_neumann_oracle():
    defm = theta2()
    x = TorusElement.from_terms(defm, [((1, 0), None, 0.1), ((-1, 0), None, 0.1)])
    a = TorusElement.unit(defm) + x
    inv = invert(a, tol=1e-12, max_radius=24)
    residual = (a * inv - TorusElement.unit(defm)).norm_l1()
    assert residual < 1e-12
    oracle = TorusElement.zero(defm)
    term = TorusElement.unit(defm)
    for _ in range(40):
        oracle = oracle + term
        term = term * x * (-1.0)
    assert (inv - oracle).norm_l1() < 1e-11


def test_invert_rejects_vanishing_identity_component():
    defm = theta2()
    a = TorusElement.from_terms(defm, [((1, 0), None, 1.0), ((-1, 0), None, 1.0)])
    with pytest.raises(InversionError):
        invert(a, max_radius=24)


def test_invert_random_positive_elements():
    defm = irrational_theta(2)
    for _ in range(4):
        h = random_selfadjoint(defm, RNG, modes=2, amplitude=0.2)
        inv = invert(h, tol=1e-12)
        assert (h * inv - TorusElement.unit(defm)).norm_l1() < 1e-11
        assert (inv * h - TorusElement.unit(defm)).norm_l1() < 1e-10


def test_json_record_roundtrip_exact():
    defm = irrational_theta(2)
    a = random_element(defm, RNG, modes=4, side="mixed")
    text = json.dumps(a.to_record())
    back = TorusElement.from_record(json.loads(text))
    assert (a - back).norm_l1() == 0.0
