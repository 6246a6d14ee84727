"""Physical constants and unit systems.

SI values are the CODATA 2018 recommended values. Natural units set
hbar = c = 1 and measure mass in electron masses, so lengths are in reduced
Compton wavelengths ``hbar / (m_e c)`` and times in ``hbar / (m_e c^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

HBAR_SI = 1.054571817e-34  # J s
C_SI = 2.99792458e8  # m / s
M_E_SI = 9.1093837015e-31  # kg

LENGTH_UNIT_SI = HBAR_SI / (M_E_SI * C_SI)  # m
TIME_UNIT_SI = HBAR_SI / (M_E_SI * C_SI**2)  # s
ENERGY_UNIT_SI = M_E_SI * C_SI**2  # J


@dataclass(frozen=True)
class UnitSystem:
    mode: str
    hbar: float
    c: float
    m_e: float


NATURAL = UnitSystem("natural", 1.0, 1.0, 1.0)
SI = UnitSystem("si", HBAR_SI, C_SI, M_E_SI)


def unit_system(mode: str) -> UnitSystem:
    mode = mode.lower()
    if mode == "natural":
        return NATURAL
    if mode == "si":
        return SI
    raise ValueError(f"unknown unit mode {mode!r} (expected 'natural' or 'si')")
