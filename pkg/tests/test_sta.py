import math

import numpy as np
import pytest
from hypothesis import given, settings

from stadirac import sta
from stadirac.sta import (
    G0,
    G1,
    G2,
    G3,
    I,
    I_SIGMA3,
    ONE,
    SIGMA1,
    SIGMA2,
    SIGMA3,
    Multivector,
    blade_product,
    exp_neg_square,
    geometric_product,
    grade_project,
    plane_rotor,
    reverse,
    rotor_sandwich,
    sigma_components,
)

from conftest import angles, even_multivectors, multivectors

METRIC = {0: 1, 1: -1, 2: -1, 3: -1}


def reduce_word(word):
    """Brute-force oracle: bubble-sort a generator word, cancelling equal neighbours."""
    w = list(word)
    sign = 1
    changed = True
    while changed:
        changed = False
        for i in range(len(w) - 1):
            if w[i] > w[i + 1]:
                w[i], w[i + 1] = w[i + 1], w[i]
                sign = -sign
                changed = True
                break
            if w[i] == w[i + 1]:
                sign *= METRIC[w[i]]
                del w[i : i + 2]
                changed = True
                break
    return sign, sum(1 << g for g in w)


def word(mask):
    return [b for b in range(4) if mask >> b & 1]


def close(a, b, tol=1e-12):
    scale = max(1.0, a.norm(), b.norm())
    return (a - b).norm() <= tol * scale


@pytest.mark.parametrize("a", range(16))
def test_blade_table_matches_word_reduction(a):
    for b in range(16):
        assert blade_product(a, b) == reduce_word(word(a) + word(b))


def test_blade_product_examples():
    assert blade_product(0b0001, 0b0001) == (1, 0)
    assert blade_product(0b0010, 0b0010) == (-1, 0)
    assert blade_product(0b0010, 0b0100) == (1, 0b0110)
    assert blade_product(0b0100, 0b0010) == (-1, 0b0110)
    # g2g1 = -g1g2, and (g2g1)^2 = -1
    g2g1 = G2 * G1
    assert g2g1 == -Multivector.blade(0b0110)
    assert g2g1 * g2g1 == -ONE


def test_blade_product_rejects_bad_mask():
    with pytest.raises(ValueError):
        blade_product(16, 0)


def test_generator_relations():
    gens = (G0, G1, G2, G3)
    for m in range(4):
        for k in range(4):
            anti = gens[m] * gens[k] + gens[k] * gens[m]
            expected = 2 * METRIC[m] * ONE if m == k else Multivector()
            assert anti == expected


def test_named_elements():
    assert (ONE + G0) * (ONE - G0) == Multivector()
    assert SIGMA1 * SIGMA2 * SIGMA3 == I
    assert G0 * G1 * G2 * G3 == I
    assert I * I == -ONE
    assert I_SIGMA3 == G2 * G1
    assert I_SIGMA3 * I_SIGMA3 == -ONE


def test_pseudoscalar_commutation_by_blade():
    for mask in range(16):
        b = Multivector.blade(mask)
        if sta.grade(mask) % 2 == 0:
            assert I * b == b * I
        else:
            assert I * b == -(b * I)


@given(multivectors, multivectors, multivectors)
@settings(max_examples=100)
def test_associativity(a, b, c):
    assert close((a * b) * c, a * (b * c), 1e-12)


@given(multivectors, multivectors, multivectors)
@settings(max_examples=50)
def test_distributivity(a, b, c):
    assert close(a * (b + c), a * b + a * c)


@given(even_multivectors, even_multivectors)
def test_even_subalgebra_closed(a, b):
    assert (a * b).is_even()


@given(multivectors)
def test_grade_partition(a):
    total = sum((grade_project(a, k) for k in range(5)), Multivector())
    assert total == a


def test_grade_project_examples():
    assert grade_project(2 * ONE + G2 * G0, 2) == G2 * G0
    assert grade_project(I, 4) == I
    with pytest.raises(ValueError):
        grade_project(I, 5)


@given(multivectors, multivectors)
@settings(max_examples=50)
def test_reverse_anti_automorphism(a, b):
    assert close(reverse(a * b), reverse(b) * reverse(a))


def test_reverse_examples():
    g12 = G1 * G2
    assert reverse(g12) == -g12
    assert reverse(3 * ONE) == 3 * ONE
    assert reverse(I) == I


def test_exp_neg_square_examples():
    assert exp_neg_square(I_SIGMA3, 0.0) == ONE
    assert close(exp_neg_square(I_SIGMA3, math.pi / 2), G2 * G1, 1e-15)
    with pytest.raises(ValueError):
        exp_neg_square(SIGMA3, 1.0)  # sigma3^2 = +1


@given(angles, angles)
def test_exp_group_law_and_unit(theta, phi):
    a = exp_neg_square(I_SIGMA3, theta)
    b = exp_neg_square(I_SIGMA3, phi)
    assert close(a * b, exp_neg_square(I_SIGMA3, theta + phi), 1e-12)
    assert close(a * reverse(a), ONE, 1e-14)


def test_rotor_sandwich_identity_and_rejection():
    v = 2 * SIGMA1 - SIGMA3 + G0
    assert rotor_sandwich(ONE, v) == v
    with pytest.raises(ValueError):
        rotor_sandwich(2 * ONE, v)


def test_quarter_turn_rotor():
    R = exp_neg_square(I_SIGMA3, -math.pi / 8)  # half angle of pi/4
    out = rotor_sandwich(R, SIGMA1)
    assert np.allclose(sigma_components(out), [math.cos(math.pi / 4), math.sin(math.pi / 4), 0.0])
    assert math.isclose(out.norm(), 1.0)
    assert close(rotor_sandwich(R, SIGMA3), SIGMA3)


@given(angles, angles)
def test_plane_rotation_properties(alpha, beta):
    v = 0.7 * SIGMA1 - 1.3 * SIGMA2 + 0.4 * SIGMA3 + 1.5 * ONE
    once = rotor_sandwich(plane_rotor(alpha), v)
    assert close(grade_project(once, 2), once - 1.5 * ONE)  # grade preserved
    assert math.isclose(once.scalar_part(), 1.5)
    assert np.isclose(sigma_components(once)[2], 0.4)
    assert math.isclose(np.hypot(*sigma_components(once)[:2]), np.hypot(0.7, 1.3))
    twice = rotor_sandwich(plane_rotor(beta), once)
    assert close(twice, rotor_sandwich(plane_rotor(alpha + beta), v), 1e-11)


def test_multivector_validation():
    with pytest.raises(ValueError):
        Multivector(np.zeros(15))
    with pytest.raises(ValueError):
        Multivector([math.nan] + [0.0] * 15)


def test_product_table_is_read_only():
    with pytest.raises(ValueError):
        sta._SIGNS[0, 0] = 0
    assert geometric_product(G1, G1) == -ONE
