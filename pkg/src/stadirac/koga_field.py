"""Closed-form rest-frame electron field in spacetime algebra.

The field is

    psi = a(r) {(Ec + m) + Rx g2g0 - Ry g1g0 + Rz I} exp(I sigma3 S)

with ``S = -Ec t``, ``a = exp(-kappa r) / r`` and
``R = (x, y, z) (1/r^2 + kappa/r)``. Everything here is evaluated in
natural units (hbar = c = 1); SI parameters must be converted first with
:meth:`FieldParams.to_natural`.

The phase factor always multiplies from the right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import units
from .sta import (
    I,
    I_SIGMA3,
    ONE,
    SIGMA,
    SIGMA3,
    G0,
    G1,
    G2,
    Multivector,
    exp_neg_square,
    rotor_sandwich,
)

# Bivector coefficients of Rx, Ry, Rz inside the braces.
_BRACE_BLADES = (G2 * G0, -(G1 * G0), I)

DEFAULT_R_MIN = 1e-3


class SingularityError(ValueError):
    """Raised when a field is evaluated too close to the origin."""


@dataclass(frozen=True)
class FieldParams:
    """Physical parameters of the field.

    In ``natural`` mode ``m`` is in electron masses and ``kappa`` in inverse
    reduced Compton wavelengths; in ``si`` mode they are kg and 1/m.
    ``energy`` overrides the energy Ec that otherwise follows from
    ``Ec^2 = m^2 c^4 - hbar^2 kappa^2 c^2``; it exists for sensitivity probes.
    ``r_min`` is always in natural length units.
    """

    m: float = 1.0
    kappa: float = 0.0
    unit_mode: str = "natural"
    energy: float | None = None
    r_min: float = DEFAULT_R_MIN

    def __post_init__(self):
        u = units.unit_system(self.unit_mode)
        object.__setattr__(self, "unit_mode", u.mode)
        if not (math.isfinite(self.m) and self.m > 0):
            raise ValueError("mass must be positive")
        if not (math.isfinite(self.kappa) and self.kappa >= 0):
            raise ValueError("kappa must be non-negative")
        if u.hbar * self.kappa * u.c >= self.m * u.c**2:
            raise ValueError("need hbar kappa c < m c^2 for a real positive energy")
        if self.energy is not None and not (math.isfinite(self.energy) and self.energy > 0):
            raise ValueError("energy override must be positive")
        if not self.r_min > 0:
            raise ValueError("r_min must be positive")

    @property
    def units(self) -> units.UnitSystem:
        return units.unit_system(self.unit_mode)

    @property
    def hbar(self) -> float:
        return self.units.hbar

    @property
    def c(self) -> float:
        return self.units.c

    @property
    def Ec(self) -> float:
        if self.energy is not None:
            return self.energy
        u = self.units
        return math.sqrt((self.m * u.c**2) ** 2 - (u.hbar * self.kappa * u.c) ** 2)

    @property
    def rest_energy(self) -> float:
        return self.m * self.c**2

    def to_natural(self) -> FieldParams:
        if self.unit_mode == "natural":
            return self
        energy = None if self.energy is None else self.energy / units.ENERGY_UNIT_SI
        return FieldParams(
            m=self.m / units.M_E_SI,
            kappa=self.kappa * units.LENGTH_UNIT_SI,
            unit_mode="natural",
            energy=energy,
            r_min=self.r_min,
        )

    def to_si(self) -> FieldParams:
        if self.unit_mode == "si":
            return self
        energy = None if self.energy is None else self.energy * units.ENERGY_UNIT_SI
        return FieldParams(
            m=self.m * units.M_E_SI,
            kappa=self.kappa / units.LENGTH_UNIT_SI,
            unit_mode="si",
            energy=energy,
            r_min=self.r_min,
        )


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.t, self.x, self.y, self.z)):
            raise ValueError("spacetime coordinates must be finite")

    @property
    def r(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def shifted(self, axis: int, h: float) -> SpacetimePoint:
        """Copy moved by ``h`` along axis 0 (t), 1 (x), 2 (y) or 3 (z)."""
        c = [self.t, self.x, self.y, self.z]
        c[axis] += h
        return SpacetimePoint(*c)


@dataclass(frozen=True)
class DecompositionResult:
    kg_term: Multivector
    spin_term: Multivector
    zitter_term: Multivector

    def total(self) -> Multivector:
        return self.kg_term + self.spin_term + self.zitter_term


def _natural(params: FieldParams) -> FieldParams:
    if params.unit_mode != "natural":
        raise ValueError("field evaluation expects natural-unit parameters; call to_natural()")
    return params


def _check_radius(params: FieldParams, r: float) -> None:
    if not r >= params.r_min:
        raise SingularityError(f"r = {r:g} is inside the excluded ball r < {params.r_min:g}")


def scalar_S(params: FieldParams, t: float) -> float:
    """Action ``S = -Ec t``."""
    return -_natural(params).Ec * t


def amplitude_a(params: FieldParams, r: float) -> float:
    params = _natural(params)
    _check_radius(params, r)
    return math.exp(-params.kappa * r) / r


def _radial_factor(kappa: float, r: float) -> float:
    return 1.0 / (r * r) + kappa / r


def r_vector(params: FieldParams, p: SpacetimePoint) -> np.ndarray:
    """``R = r_vec (1/r^2 + kappa/r)``; note ``grad a = -a R``."""
    params = _natural(params)
    r = p.r
    _check_radius(params, r)
    return p.position * _radial_factor(params.kappa, r)


def r_jacobian(params: FieldParams, p: SpacetimePoint) -> np.ndarray:
    """Matrix ``J[j, k] = dR_j / dx_k``."""
    params = _natural(params)
    r = p.r
    _check_radius(params, r)
    x = p.position
    f = _radial_factor(params.kappa, r)
    df_over_x = -2.0 / r**4 - params.kappa / r**3
    return f * np.eye(3) + df_over_x * np.outer(x, x)


def phase_factor(params: FieldParams, t: float, shift: float = 0.0) -> Multivector:
    """``exp(I sigma3 (S + shift))`` at time ``t``."""
    return exp_neg_square(I_SIGMA3, scalar_S(params, t) + shift)


def _braces(params: FieldParams, R: np.ndarray, mass_scale: float = 1.0) -> Multivector:
    coeff = (params.Ec + params.m) * mass_scale * ONE.coeff
    for Rk, blade in zip(R, _BRACE_BLADES):
        coeff = coeff + Rk * blade.coeff
    return Multivector(coeff)


def psi_sta_corrupted(
    params: FieldParams, p: SpacetimePoint, target: str | None = None, eps: float = 0.0
) -> Multivector:
    """Field with one closed-form ingredient scaled by ``1 + eps``.

    ``target`` is one of ``"scalar"`` (the Ec + m constant), ``"rx"``,
    ``"phase"`` (the angle S) or ``"amplitude"`` (a evaluated at a scaled
    radius). Used to show residual checks are sensitive.
    """
    params = _natural(params)
    r = p.r
    _check_radius(params, r)
    s = 1.0 + eps
    a = amplitude_a(params, r * s if target == "amplitude" else r)
    R = r_vector(params, p)
    if target == "rx":
        R = R * np.array([s, 1.0, 1.0])
    brace = _braces(params, R, s if target == "scalar" else 1.0)
    angle = scalar_S(params, p.t) * (s if target == "phase" else 1.0)
    if target not in (None, "scalar", "rx", "phase", "amplitude"):
        raise ValueError(f"unknown corruption target {target!r}")
    return a * (brace * exp_neg_square(I_SIGMA3, angle))


def evaluate_psi_sta(params: FieldParams, p: SpacetimePoint) -> Multivector:
    params = _natural(params)
    r = p.r
    _check_radius(params, r)
    a = amplitude_a(params, r)
    return a * (_braces(params, r_vector(params, p)) * phase_factor(params, p.t))


def kg_term(params: FieldParams, p: SpacetimePoint) -> Multivector:
    """Spin-free part ``a (Ec + m) exp(I sigma3 S)``."""
    a = amplitude_a(params, p.r)
    return (a * (params.Ec + params.m)) * phase_factor(params, p.t)


def spin_term_one_sided(params: FieldParams, p: SpacetimePoint) -> Multivector:
    """``a (Rx s1 + Ry s2) exp((S + pi/2) I s3) + a Rz s3``."""
    a = amplitude_a(params, p.r)
    R = r_vector(params, p)
    planar = R[0] * SIGMA[0] + R[1] * SIGMA[1]
    return a * (planar * phase_factor(params, p.t, math.pi / 2) + R[2] * SIGMA3)


def spin_term_rotor_form(params: FieldParams, p: SpacetimePoint) -> Multivector:
    """Spin term written as a rotor acting on ``a R.sigma``.

    The rotor is ``exp(-(S + pi/2)/2 I s3)``; it turns the (s1, s2) part and
    leaves s3 alone.
    """
    a = amplitude_a(params, p.r)
    R = r_vector(params, p)
    angle = scalar_S(params, p.t) + math.pi / 2
    rotor = exp_neg_square(I_SIGMA3, -0.5 * angle)
    v = R[0] * SIGMA[0] + R[1] * SIGMA[1] + R[2] * SIGMA[2]
    return a * rotor_sandwich(rotor, v)


def zitter_braces(params: FieldParams, p: SpacetimePoint) -> Multivector:
    """``z s3 (exp((S + pi/2) I s3) - 1)``; depends on z and t only."""
    params = _natural(params)
    return (p.z * SIGMA3) * (phase_factor(params, p.t, math.pi / 2) - ONE)


def zitter_term(params: FieldParams, p: SpacetimePoint) -> Multivector:
    a = amplitude_a(params, p.r)
    f = _radial_factor(params.kappa, p.r)
    return (a * f) * zitter_braces(params, p)


def decompose(params: FieldParams, p: SpacetimePoint) -> DecompositionResult:
    params = _natural(params)
    _check_radius(params, p.r)
    return DecompositionResult(
        kg_term=kg_term(params, p),
        spin_term=spin_term_rotor_form(params, p),
        zitter_term=zitter_term(params, p),
    )


def analytic_gradient_psi(
    params: FieldParams, p: SpacetimePoint
) -> tuple[Multivector, Multivector, Multivector, Multivector]:
    """Exact partials ``(d/d(ct), d/dx, d/dy, d/dz)`` of the field."""
    params = _natural(params)
    r = p.r
    _check_radius(params, r)
    a = amplitude_a(params, r)
    R = r_vector(params, p)
    J = r_jacobian(params, p)
    P = phase_factor(params, p.t)
    brace = _braces(params, R)
    psi = a * (brace * P)

    d_t = psi * I_SIGMA3 * (-params.Ec)
    spatial = []
    for k in range(3):
        d_brace = Multivector(sum(J[j, k] * _BRACE_BLADES[j].coeff for j in range(3)))
        # d a / d x_k = -a R_k
        spatial.append((-R[k]) * psi + a * (d_brace * P))
    return (d_t, *spatial)


def amplitude_laplacian(params: FieldParams, p: SpacetimePoint) -> float:
    """Sum of the closed-form second partials of ``a``: ``a (R.R - tr J)``."""
    a = amplitude_a(params, p.r)
    R = r_vector(params, p)
    return a * (float(R @ R) - float(np.trace(r_jacobian(params, p))))


def with_energy(params: FieldParams, energy: float) -> FieldParams:
    return replace(params, energy=energy)
