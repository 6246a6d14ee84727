"""Spin and zitter estimates for the rest-frame field.

The spin term rotates in the (s1, s2) plane at ``omega = -Ec/hbar``; the zitter
factor oscillates at the same angular rate. Requiring ``omega r < c`` bounds
the size of the spinning region by ``c/|omega|``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import koga_field as kf
from .koga_field import FieldParams, SpacetimePoint
from .sta import PSEUDOSCALAR, SIGMA3, sigma_components

QUOTED_SIZE_BOUND_M = 1e-14
SIZE_BOUND_NOTE = (
    "c/|omega| with Ec = m_e c^2 is the reduced Compton wavelength (~3.86e-13 m); "
    "the often quoted figure of less than 1e-14 m is about 40 times smaller and is "
    "not reproduced by this formula"
)


def angular_velocity(params: FieldParams) -> float:
    """Signed spin rate ``-Ec/hbar`` (rad per unit time of ``params``).

    Negative means the (s1, s2) part turns from s2 towards s1.
    """
    return -params.Ec / params.hbar


def size_bound(params: FieldParams) -> float:
    return params.c / abs(angular_velocity(params))


def zitter_frequency(params: FieldParams) -> float:
    return abs(angular_velocity(params)) / (2 * math.pi)


def fit_phase_rate(times: Sequence[float], cos_part: Sequence[float], sin_part: Sequence[float]) -> float:
    """Least-squares slope of the unwrapped angle ``atan2(sin, cos)`` against time."""
    angle = np.unwrap(np.arctan2(np.asarray(sin_part), np.asarray(cos_part)))
    slope, _ = np.polyfit(np.asarray(times, dtype=float), angle, 1)
    return float(slope)


def _period(params: FieldParams) -> float:
    return 2 * math.pi / params.Ec


def spin_rate_numeric(params: FieldParams, p: SpacetimePoint, times: Sequence[float]) -> float:
    """Fitted signed rotation rate of the (s1, s2) part of the spin term at ``p``.

    Works in natural units; ``times`` must span at least one period.
    """
    params = kf._natural(params)
    if math.hypot(p.x, p.y) == 0.0:
        raise ValueError("point on the spin axis: the planar angle is undefined")
    times = np.asarray(times, dtype=float)
    if times.size < 3 or times.max() - times.min() < _period(params) * (1 - 1e-12):
        raise ValueError("times must cover at least one rotation period")
    comps = np.array(
        [sigma_components(kf.spin_term_rotor_form(params, SpacetimePoint(float(t), p.x, p.y, p.z))) for t in times]
    )
    return fit_phase_rate(times, comps[:, 0], comps[:, 1])


def zitter_rate_numeric(params: FieldParams, z: float, times: Sequence[float]) -> float:
    """Fitted signed angular rate of the zitter factor's oscillation.

    The braces equal ``z (cos th - 1) s3 + z sin th I`` with
    ``th = S/hbar + pi/2``, so the angle of ``(s3 + z, I)`` is ``th``.
    """
    params = kf._natural(params)
    if z == 0.0:
        raise ValueError("zitter factor vanishes on z = 0")
    cos_part, sin_part = [], []
    for t in times:
        b = kf.zitter_braces(params, SpacetimePoint(float(t), 0.0, 0.0, z))
        cos_part.append(((b * SIGMA3).scalar_part() + z) / z)
        sin_part.append(b[PSEUDOSCALAR] / z)
    return fit_phase_rate(times, cos_part, sin_part)


@dataclass(frozen=True)
class EstimateReport:
    omega: float  # rad/s, magnitude
    size_bound: float  # m
    zitter_freq: float  # Hz
    kappa_used: float  # 1/m
    omega_natural: float
    size_bound_natural: float
    zitter_freq_natural: float
    kappa_natural: float
    quoted_size_bound: float
    note: str

    def as_dict(self) -> dict:
        return asdict(self)


def estimate(params: FieldParams) -> EstimateReport:
    """SI and natural-unit estimates for ``params`` (either unit mode)."""
    si = params.to_si()
    nat = params.to_natural()
    return EstimateReport(
        omega=abs(angular_velocity(si)),
        size_bound=size_bound(si),
        zitter_freq=zitter_frequency(si),
        kappa_used=si.kappa,
        omega_natural=abs(angular_velocity(nat)),
        size_bound_natural=size_bound(nat),
        zitter_freq_natural=zitter_frequency(nat),
        kappa_natural=nat.kappa,
        quoted_size_bound=QUOTED_SIZE_BOUND_M,
        note=SIZE_BOUND_NOTE,
    )

