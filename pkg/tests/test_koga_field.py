import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stadirac import dirac_matrix as dm
from stadirac import koga_field as kf
from stadirac.koga_field import FieldParams, SingularityError, SpacetimePoint
from stadirac.sta import G0, G2, I, ONE, PSEUDOSCALAR, SIGMA, SIGMA3, Multivector, plane_rotor, rotor_sandwich

from conftest import field_points


def rel(a, b):
    return (a - b).norm() / max(b.norm(), 1e-300)


def test_params_validation():
    with pytest.raises(ValueError):
        FieldParams(m=0)
    with pytest.raises(ValueError):
        FieldParams(kappa=-0.1)
    with pytest.raises(ValueError):
        FieldParams(kappa=1.0)  # hbar kappa c = m c^2
    with pytest.raises(ValueError):
        FieldParams(unit_mode="cgs")
    assert FieldParams().Ec == 1.0
    assert math.isclose(FieldParams(kappa=0.6).Ec, 0.8)


def test_si_round_trip():
    p = FieldParams(m=1.3, kappa=0.4)
    back = p.to_si().to_natural()
    assert math.isclose(back.m, p.m, rel_tol=1e-14)
    assert math.isclose(back.kappa, p.kappa, rel_tol=1e-14)
    with pytest.raises(ValueError):
        kf.evaluate_psi_sta(p.to_si(), SpacetimePoint(0, 1, 0, 0))


def test_scalar_S(natural):
    assert kf.scalar_S(natural, 0.0) == 0.0
    assert kf.scalar_S(natural, math.pi) == -math.pi
    p = FieldParams(kappa=0.3)
    assert math.isclose(kf.scalar_S(p, 2.0) + kf.scalar_S(p, 3.0), kf.scalar_S(p, 5.0))


def test_amplitude_values():
    assert kf.amplitude_a(FieldParams(), 1.0) == 1.0
    assert math.isclose(kf.amplitude_a(FieldParams(kappa=0.5, m=2.0), 1.0), math.exp(-0.5))
    # kappa = 1 needs m > 1 to keep Ec real
    assert abs(kf.amplitude_a(FieldParams(m=2.0, kappa=1.0), 1.0) - 0.36787944117144233) < 1e-15
    with pytest.raises(SingularityError):
        kf.amplitude_a(FieldParams(), 1e-4)


def test_amplitude_decreasing():
    p = FieldParams(kappa=0.3)
    r = np.linspace(0.01, 50, 500)
    a = np.array([kf.amplitude_a(p, x) for x in r])
    assert np.all(np.diff(a) < 0) and a[-1] < 1e-7


@pytest.mark.parametrize("r", [0.5, 1.0, 2.5, 5.0])
def test_yukawa_identity_fd_laplacian(r):
    # independent 7-point Laplacian of a(|x|)
    params = FieldParams(m=2.0, kappa=0.7)
    x0 = np.array([0.3, -0.5, 0.8])
    x0 = x0 / np.linalg.norm(x0) * r
    a = lambda v: kf.amplitude_a(params, float(np.linalg.norm(v)))  # noqa: E731
    residuals = []
    for h in (1e-2, 5e-3):
        lap = sum((a(x0 + h * e) - 2 * a(x0) + a(x0 - h * e)) / h**2 for e in np.eye(3))
        residuals.append(abs(lap - params.kappa**2 * a(x0)) / a(x0))
    assert residuals[1] < 1e-3
    assert 3.0 < residuals[0] / residuals[1] < 5.0


def test_r_vector_examples(params):
    assert np.allclose(kf.r_vector(FieldParams(), SpacetimePoint(0, 1, 0, 0)), [1, 0, 0])
    Rz = kf.r_vector(params, SpacetimePoint(0, 0, 0, 2.0))
    assert Rz[0] == 0 and Rz[1] == 0
    p = SpacetimePoint(0, 0.4, -1.3, 2.2)
    R = kf.r_vector(params, p)
    assert math.isclose(np.linalg.norm(R), 1 / p.r + params.kappa)
    assert np.allclose(np.cross(R, p.position), 0)


def test_r_jacobian_fd(params):
    p = SpacetimePoint(0, 0.4, -1.3, 0.7)
    J = kf.r_jacobian(params, p)
    h = 1e-6
    for k in range(3):
        fd = (kf.r_vector(params, p.shifted(k + 1, h)) - kf.r_vector(params, p.shifted(k + 1, -h))) / (2 * h)
        assert np.allclose(J[:, k], fd, atol=1e-8)


def test_psi_hand_example(natural):
    psi = kf.evaluate_psi_sta(natural, SpacetimePoint(0, 1, 0, 0))
    assert psi == 2 * ONE + G2 * G0


@given(field_points(), st.sampled_from([0.0, 0.3]))
@settings(max_examples=200, deadline=None)
def test_psi_even_and_matches_matrix(p, kappa):
    params = FieldParams(kappa=kappa)
    psi = kf.evaluate_psi_sta(params, p)
    assert psi.is_even()
    via = dm.matrix_rep(psi) @ dm.U
    direct = dm.evaluate_psi_matrix(params, p)
    assert np.linalg.norm(via - direct) <= 1e-12 * np.linalg.norm(direct)


def test_singularity_rejected(natural):
    for fn in (kf.evaluate_psi_sta, kf.decompose, kf.analytic_gradient_psi, kf.spin_term_rotor_form):
        with pytest.raises(SingularityError):
            fn(natural, SpacetimePoint(0, 1e-4, 0, 0))


def test_zitter_zero_cases(params):
    t_star = math.pi / (2 * params.Ec)  # S = -pi/2
    d = kf.decompose(params, SpacetimePoint(t_star, 0.3, 0.7, -1.2))
    assert d.zitter_term.norm() < 1e-15
    for t in (0.0, 1.3, 7.7):
        assert kf.decompose(params, SpacetimePoint(t, 0.4, -1.1, 0.0)).zitter_term == Multivector()


@given(field_points(), st.sampled_from([0.0, 0.3]))
@settings(max_examples=300, deadline=None)
def test_decomposition_identity(p, kappa):
    params = FieldParams(kappa=kappa)
    d = kf.decompose(params, p)
    psi = kf.evaluate_psi_sta(params, p)
    assert rel(d.total(), psi) <= 1e-12
    assert d.kg_term.is_even() and d.spin_term.is_even() and d.zitter_term.is_even()
    assert rel(kf.spin_term_rotor_form(params, p), kf.spin_term_one_sided(params, p)) <= 1e-12


def test_spin_term_identity_rotor(natural):
    t = math.pi / 2  # S + pi/2 = 0
    p = SpacetimePoint(t, 0.5, -0.2, 0.9)
    a = kf.amplitude_a(natural, p.r)
    R = kf.r_vector(natural, p)
    expected = a * (R[0] * SIGMA[0] + R[1] * SIGMA[1] + R[2] * SIGMA[2])
    assert rel(kf.spin_term_rotor_form(natural, p), expected) < 1e-15


def test_spin_term_time_structure(params):
    x, y, z = 0.8, -0.3, 0.6
    ref = kf.spin_term_rotor_form(params, SpacetimePoint(0.0, x, y, z))
    ref_s3 = (ref * SIGMA3).scalar_part()
    ref_planar = np.hypot((ref * SIGMA[0]).scalar_part(), (ref * SIGMA[1]).scalar_part())
    omega = -params.Ec
    planar0 = ref - ref_s3 * SIGMA3
    for t in np.linspace(0, 10, 100):
        s = kf.spin_term_rotor_form(params, SpacetimePoint(float(t), x, y, z))
        assert math.isclose((s * SIGMA3).scalar_part(), ref_s3, rel_tol=1e-12)
        planar = s - (s * SIGMA3).scalar_part() * SIGMA3
        assert math.isclose(planar.norm(), ref_planar, rel_tol=1e-12)
        rotated = rotor_sandwich(plane_rotor(omega * float(t)), planar0)
        assert (planar - rotated).norm() <= 1e-10 * ref_planar


def test_zitter_braces_properties(natural):
    t = 0.37
    b = lambda x, y, z: kf.zitter_braces(natural, SpacetimePoint(t, x, y, z))  # noqa: E731
    assert b(1, 2, 0) == Multivector()
    assert b(0, 0, 2) == 2 * b(5, -3, 1)
    assert b(0.1, 7, -1.5) == b(-4, 0, -1.5)


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0.1, 10), st.floats(-10, 10), st.floats(0.1, 10), st.floats(0, 10))
def test_zitter_ratio_exact(x1, y1, z1, x2, y2, t):
    params = FieldParams(kappa=0.3)
    b1 = kf.zitter_braces(params, SpacetimePoint(t, x1, y1, z1))
    b2 = kf.zitter_braces(params, SpacetimePoint(t, x2, y2, 1.0))
    assert np.allclose(b1.coeff / z1, b2.coeff, rtol=0, atol=1e-15)


def test_zitter_time_average(params):
    z = 1.7
    period = 2 * math.pi / params.Ec
    ts = np.arange(64) * period / 64
    mean = sum((kf.zitter_braces(params, SpacetimePoint(float(t), 0, 0, z)) for t in ts), Multivector()) / 64
    assert rel(mean, -z * SIGMA3) < 1e-14


@given(field_points(r_lo=0.3, r_hi=5.0), st.sampled_from([0.0, 0.3]))
@settings(max_examples=40, deadline=None)
def test_analytic_gradient_matches_fd(p, kappa):
    params = FieldParams(kappa=kappa)
    exact = kf.analytic_gradient_psi(params, p)
    for k in range(4):
        errs = []
        for h in (1e-3, 5e-4):
            fd = (kf.evaluate_psi_sta(params, p.shifted(k, h)) - kf.evaluate_psi_sta(params, p.shifted(k, -h))) / (2 * h)
            errs.append((fd - exact[k]).norm())
        scale = max(exact[k].norm(), kf.evaluate_psi_sta(params, p).norm())
        assert errs[1] <= 1e-5 * scale
        if errs[1] > 1e-11 * scale:
            assert 3.2 < errs[0] / errs[1] < 4.8


def test_time_derivative_example(natural):
    p = SpacetimePoint(0, 1, 0, 0)
    d_t = kf.analytic_gradient_psi(natural, p)[0]
    expected = (2 * ONE + G2 * G0) * kf.I_SIGMA3 * (-1.0)
    assert rel(d_t, expected) < 1e-15


def test_gradient_on_x_axis_y_component(natural):
    # on the x axis dr/dy = 0, so only Ry changes: d/dy psi = a (1/r^2) (-g1g0) at t = 0
    p = SpacetimePoint(0, 2.0, 0, 0)
    d_y = kf.analytic_gradient_psi(natural, p)[2]
    a = 0.5
    expected = a * (0.25 * -(kf.G1 * G0))
    assert rel(d_y, expected) < 1e-15


def test_pseudoscalar_blade_present_off_plane(natural):
    psi = kf.evaluate_psi_sta(natural, SpacetimePoint(0, 0, 0, 2.0))
    assert psi[PSEUDOSCALAR] != 0
    # a = 1/2, Rz = z / r^2 = 1/2
    assert rel(psi, 0.5 * (2 * ONE + 0.5 * I)) < 1e-15
