"""Residual checks for the closed-form field.

Every check returns a :class:`ResidualReport`. ``mode`` is either the string
``"analytic"`` (closed-form derivatives) or a positive float, which selects
central finite differences with that step.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from . import dirac_matrix as dm
from . import koga_field as kf
from .koga_field import FieldParams, SpacetimePoint
from .sta import GAMMA_UP, G0, I_SIGMA3, Multivector, exp_neg_square

T = TypeVar("T")
R = TypeVar("R")

EPS = np.finfo(float).eps
# Below these steps rounding error overtakes truncation error.
FIRST_DERIVATIVE_FLOOR = EPS ** (1 / 3)
SECOND_DERIVATIVE_FLOOR = EPS ** (1 / 4)

FAMILIES = ("dirac_hestenes", "matrix_dirac", "klein_gordon")


class CancellationWarning(UserWarning):
    """Finite-difference step is small enough for rounding to dominate."""


@dataclass(frozen=True)
class ResidualReport:
    check: str
    point: SpacetimePoint
    mode: str
    h: float | None
    residual_abs: float
    residual_rel: float
    norm_kind: str
    extra: dict = field(default_factory=dict)

    def passed(self, tol: float) -> bool:
        return self.residual_rel <= tol


@dataclass(frozen=True)
class ConvergenceReport:
    family: str
    steps: list[float]
    residuals: list[float]
    fitted_order: float
    fit_residual: float
    flags: list[str] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return not self.flags

    def order_within(self, target: float = 2.0, tol: float = 0.2) -> bool:
        return self.accepted and abs(self.fitted_order - target) <= tol


def _parse_mode(mode) -> tuple[str, float | None]:
    if isinstance(mode, str):
        if mode != "analytic":
            raise ValueError(f"mode must be 'analytic' or a positive step, got {mode!r}")
        return "analytic", None
    h = float(mode)
    if not (math.isfinite(h) and h > 0):
        raise ValueError(f"finite-difference step must be positive, got {mode!r}")
    return "fd", h


def _warn_small_step(h: float, floor: float) -> None:
    if h < floor:
        warnings.warn(
            f"step h={h:g} is below the cancellation floor {floor:.2g}", CancellationWarning, stacklevel=3
        )


def _mv_jacobian(field_fn, p: SpacetimePoint, h: float) -> list[Multivector]:
    return [
        Multivector((field_fn(p.shifted(k, h)).coeff - field_fn(p.shifted(k, -h)).coeff) / (2 * h))
        for k in range(4)
    ]


def dirac_hestenes_operator(psi: Multivector, grads: Sequence[Multivector], mc: float) -> Multivector:
    """``(g^mu d_mu psi) I s3 - m c psi g0``."""
    nabla = Multivector()
    for g_up, d in zip(GAMMA_UP, grads):
        nabla = nabla + g_up * d
    return nabla * I_SIGMA3 - mc * (psi * G0)


def dirac_hestenes_residual(
    params: FieldParams,
    p: SpacetimePoint,
    mode="analytic",
    field: Callable[[SpacetimePoint], Multivector] | None = None,
    gradient: Callable[[SpacetimePoint], Sequence[Multivector]] | None = None,
) -> ResidualReport:
    """Residual of ``hbar grad(psi) I s3 = m c psi g0``.

    ``field`` and ``gradient`` default to the closed-form solution; a custom
    field in analytic mode must come with its gradient.
    """
    kind, h = _parse_mode(mode)
    if field is None:
        field = lambda q: kf.evaluate_psi_sta(params, q)  # noqa: E731
        if gradient is None:
            gradient = lambda q: kf.analytic_gradient_psi(params, q)  # noqa: E731
    if kind == "analytic":
        if gradient is None:
            raise ValueError("analytic mode needs the gradient of a custom field")
        grads = gradient(p)
    else:
        dm.check_stencil(params, p, h)
        _warn_small_step(h, FIRST_DERIVATIVE_FLOOR)
        grads = _mv_jacobian(field, p, h)
    psi = field(p)
    res = dirac_hestenes_operator(psi, grads, params.m)
    scale = params.m * psi.norm()
    return ResidualReport(
        check="dirac_hestenes",
        point=p,
        mode=kind,
        h=h,
        residual_abs=res.norm(),
        residual_rel=res.norm() / scale,
        norm_kind="blade-coefficient 2-norm",
    )


def matrix_dirac_residual(
    params: FieldParams,
    p: SpacetimePoint,
    mode="analytic",
    member: dm.FamilyMember | None = None,
) -> ResidualReport:
    """Residual of the matrix Dirac equation for the closed-form spinor.

    With ``member`` the given family solution is checked against its own
    annihilating operator instead of ``D0``.
    """
    kind, h = _parse_mode(mode)
    if member is None:
        which = "D0"
        spinor = lambda q: dm.evaluate_psi_matrix(params, q)  # noqa: E731
        jac = lambda q: dm.psi_matrix_jacobian(params, q)  # noqa: E731
        label = "matrix_dirac"
    else:
        which = member.annihilator
        spinor = member.field(params)
        jac = member.jacobian(params)
        label = f"family:{member.label}"
    if kind == "fd":
        _warn_small_step(h, FIRST_DERIVATIVE_FLOOR)
        out = dm.apply_dirac_operator(which, spinor, p, params, "fd", h=h)
    else:
        out = dm.apply_dirac_operator(which, spinor, p, params, "analytic", jacobian=jac)
    value = spinor(p)
    res = float(np.linalg.norm(out))
    return ResidualReport(
        check=label,
        point=p,
        mode=kind,
        h=h,
        residual_abs=res,
        residual_rel=res / (params.m * float(np.linalg.norm(value))),
        norm_kind="spinor-component 2-norm",
    )


def _kg_second_derivatives(field_fn, p, h):
    centre = field_fn(p).coeff
    out = []
    for k in range(4):
        out.append((field_fn(p.shifted(k, h)).coeff - 2 * centre + field_fn(p.shifted(k, -h)).coeff) / (h * h))
    return out


def klein_gordon_residual(
    params: FieldParams,
    p: SpacetimePoint,
    mode="analytic",
    target: str = "kg",
) -> ResidualReport:
    """Residual of ``hbar^2 (d_t^2 - c^2 lap) phi + m^2 c^4 phi``.

    ``target="kg"`` checks the spin-free term, ``target="psi"`` the full field
    (FD only).
    """
    kind, h = _parse_mode(mode)
    if target == "kg":
        field_fn = lambda q: kf.kg_term(params, q)  # noqa: E731
    elif target == "psi":
        field_fn = lambda q: kf.evaluate_psi_sta(params, q)  # noqa: E731
    else:
        raise ValueError(f"unknown target {target!r}")
    phi = field_fn(p)
    if kind == "analytic":
        if target != "kg":
            raise ValueError("analytic Klein-Gordon residual is only available for the kg term")
        amp = kf.amplitude_a(params, p.r)
        # phi = a(x) * const * phase(t): time part -Ec^2 phi, space part lap(a)/a phi
        lap_ratio = kf.amplitude_laplacian(params, p) / amp
        res_coeff = (-params.Ec**2 - lap_ratio + params.m**2) * phi.coeff
    else:
        dm.check_stencil(params, p, h)
        _warn_small_step(h, SECOND_DERIVATIVE_FLOOR)
        d2 = _kg_second_derivatives(field_fn, p, h)
        res_coeff = d2[0] - (d2[1] + d2[2] + d2[3]) + params.m**2 * phi.coeff
    res = float(np.linalg.norm(res_coeff))
    return ResidualReport(
        check=f"klein_gordon:{target}",
        point=p,
        mode=kind,
        h=h,
        residual_abs=res,
        residual_rel=res / (params.m**2 * phi.norm()),
        norm_kind="blade-coefficient 2-norm",
    )


_FAMILY_FUNCS = {
    "dirac_hestenes": dirac_hestenes_residual,
    "matrix_dirac": matrix_dirac_residual,
    "klein_gordon": klein_gordon_residual,
}
_FAMILY_FLOORS = {
    "dirac_hestenes": FIRST_DERIVATIVE_FLOOR,
    "matrix_dirac": FIRST_DERIVATIVE_FLOOR,
    "klein_gordon": SECOND_DERIVATIVE_FLOOR,
}


def fit_order(steps: Sequence[float], residuals: Sequence[float]) -> tuple[float, float]:
    """Log-log slope of residual against step, and the RMS misfit of the line."""
    x = np.log(np.asarray(steps, dtype=float))
    y = np.log(np.asarray(residuals, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    misfit = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), misfit


def convergence_study(
    params: FieldParams,
    points: Sequence[SpacetimePoint],
    h_list: Sequence[float],
    family: str = "dirac_hestenes",
    residual: Callable[..., ResidualReport] | None = None,
    jobs: int = 1,
) -> ConvergenceReport:
    """Fit the finite-difference order of one residual family.

    The per-step residual is the RMS of the relative residuals over
    ``points``. ``residual`` may replace the family's residual function, it
    is called as ``residual(params, point, h)``.
    """
    if any(isinstance(h, str) or h is None for h in h_list):
        raise ValueError("convergence study needs finite-difference steps; analytic mode has no order")
    steps = [float(h) for h in h_list]
    if len(steps) < 3:
        raise ValueError("convergence study needs at least three steps")
    if any(b >= a for a, b in zip(steps, steps[1:])):
        raise ValueError("steps must be strictly decreasing")
    if not points:
        raise ValueError("convergence study needs at least one point")
    fn = residual or _FAMILY_FUNCS[family]
    floor = _FAMILY_FLOORS.get(family, FIRST_DERIVATIVE_FLOOR)
    flags = []
    if steps[-1] < floor:
        flags.append(f"cancellation: smallest step {steps[-1]:g} below floor {floor:.2g}")
        warnings.warn(flags[-1], CancellationWarning, stacklevel=2)

    residuals = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CancellationWarning)
        for h in steps:
            reports = evaluate_concurrently(lambda q, h=h: fn(params, q, h), points, jobs)
            rel = np.array([r.residual_rel for r in reports])
            residuals.append(float(np.sqrt(np.mean(rel**2))))

    if not all(np.isfinite(residuals)) or min(residuals) <= 0.0:
        flags.append("degenerate: zero or non-finite residual")
        return ConvergenceReport(family, steps, residuals, float("nan"), float("nan"), flags)
    order, misfit = fit_order(steps, residuals)
    if any(b >= a for a, b in zip(residuals, residuals[1:])):
        flags.append("non-monotone: residual did not shrink with the step")
    return ConvergenceReport(family, steps, residuals, order, misfit, flags)


def _z_rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotated_field(params: FieldParams, phi: float):
    """Field transformed by the rotor ``exp(I s3 phi/2)``.

    The rotor turns vectors by ``-phi`` in the (s1, s2) plane, so the point
    is taken back through the inverse, i.e. ``psi'(p) = R psi(M p)`` with
    ``M`` the rotation by ``+phi`` about z. Returns ``(rotor, field, gradient)``.
    """
    rotor = exp_neg_square(I_SIGMA3, 0.5 * phi)
    M = _z_rotation(phi)

    def moved(q: SpacetimePoint) -> SpacetimePoint:
        x, y, z = M @ q.position
        return SpacetimePoint(q.t, float(x), float(y), float(z))

    def field_fn(q):
        return rotor * kf.evaluate_psi_sta(params, moved(q))

    def gradient(q):
        g = kf.analytic_gradient_psi(params, moved(q))
        out = [rotor * g[0]]
        for i in range(3):
            d = sum((M[j, i] * g[j + 1].coeff for j in range(3)), np.zeros(16))
            out.append(rotor * Multivector(d))
        return out

    return rotor, field_fn, gradient


def rotation_covariance_check(params: FieldParams, p: SpacetimePoint, phi: float) -> ResidualReport:
    """Dirac-Hestenes residual of the rotated field.

    ``extra`` carries ``phase_action_deviation``: the relative distance
    between the rotated field and ``psi * R``. The field is symmetric about
    the z axis, so a rotation only acts as a constant phase on the right.
    """
    rotor, field_fn, gradient = rotated_field(params, phi)
    rep = dirac_hestenes_residual(params, p, "analytic", field=field_fn, gradient=gradient)
    psi = kf.evaluate_psi_sta(params, p)
    rotated = field_fn(p)
    dev = (rotated - psi * rotor).norm() / psi.norm()
    return ResidualReport(
        check="rotation_covariance",
        point=p,
        mode=rep.mode,
        h=None,
        residual_abs=rep.residual_abs,
        residual_rel=rep.residual_rel,
        norm_kind=rep.norm_kind,
        extra={"phi": phi, "phase_action_deviation": dev, "negation_deviation": (rotated + psi).norm() / psi.norm()},
    )


def sample_points(
    n: int,
    seed: int = 0,
    r_range: tuple[float, float] = (0.1, 10.0),
    t_range: tuple[float, float] = (0.0, 10.0),
) -> list[SpacetimePoint]:
    """Seeded points, log-uniform in r, isotropic in direction, uniform in t."""
    rng = np.random.default_rng(seed)
    log_r = rng.uniform(math.log(r_range[0]), math.log(r_range[1]), n)
    direction = rng.normal(size=(n, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    t = rng.uniform(t_range[0], t_range[1], n)
    pos = direction * np.exp(log_r)[:, None]
    return [SpacetimePoint(float(t[i]), *map(float, pos[i])) for i in range(n)]


def evaluate_concurrently(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> list[R]:
    """Map ``fn`` over ``items``, keeping input order whatever ``jobs`` is."""
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))
