"""Dirac-Pauli matrix formulation, used as an independent oracle.

The matrices returned by :func:`gamma_matrices` carry upper indices, so the
Dirac operator is ``i gamma^mu d_mu -/+ m``. Spacetime-algebra generators map
to lower-index matrices, ``gamma_0 -> gamma^0`` and ``gamma_k -> -gamma^k``,
which makes the reciprocal vectors ``gamma^mu`` land on the usual matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .koga_field import (
    FieldParams,
    SpacetimePoint,
    SingularityError,
    _natural,
    amplitude_a,
    evaluate_psi_sta,
    r_jacobian,
    r_vector,
    scalar_S,
)
from .sta import NBLADES, Multivector

SpinorField = Callable[[SpacetimePoint], np.ndarray]

_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
_ID2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)

ETA = np.diag([1.0, -1.0, -1.0, -1.0])
U = np.array([1, 0, 0, 0], dtype=complex)


@dataclass(frozen=True)
class PhaseConstants:
    """Amplitudes ``A_j`` and angles ``theta_j`` of the four scalar solutions."""

    A: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)
    theta: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if len(self.A) != 4 or len(self.theta) != 4:
            raise ValueError("need four amplitudes and four angles")
        if any(a < 0 or not math.isfinite(a) for a in self.A):
            raise ValueError("amplitudes must be finite and non-negative")

    def column(self) -> np.ndarray:
        return np.asarray(self.A, dtype=float) * np.exp(1j * np.asarray(self.theta, dtype=float))

    @classmethod
    def basis(cls, j: int) -> PhaseConstants:
        A = [0.0] * 4
        A[j] = 1.0
        return cls(tuple(A))  # type: ignore[arg-type]


@lru_cache(maxsize=None)
def _gammas() -> tuple[np.ndarray, ...]:
    g0 = np.block([[_ID2, _Z2], [_Z2, -_ID2]])
    gs = [np.block([[_Z2, s], [-s, _Z2]]) for s in _PAULI]
    out = (g0, *gs)
    for g in out:
        g.setflags(write=False)
    return out


def gamma_matrices() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Upper-index Dirac-Pauli matrices ``gamma^0 .. gamma^3``."""
    return tuple(g.copy() for g in _gammas())  # type: ignore[return-value]


@lru_cache(maxsize=None)
def _blade_matrices() -> np.ndarray:
    g = _gammas()
    lower = [ETA[mu, mu] * g[mu] for mu in range(4)]
    mats = np.zeros((NBLADES, 4, 4), dtype=complex)
    for mask in range(NBLADES):
        m = np.eye(4, dtype=complex)
        for b in range(4):
            if mask >> b & 1:
                m = m @ lower[b]
        mats[mask] = m
    mats.setflags(write=False)
    return mats


def matrix_rep(m: Multivector) -> np.ndarray:
    """4x4 complex image of a multivector (an algebra homomorphism)."""
    return np.tensordot(m.coeff, _blade_matrices(), axes=1)


def koga_phi(params: FieldParams, p: SpacetimePoint, pc: PhaseConstants = PhaseConstants()) -> np.ndarray:
    """Scalar Klein-Gordon solutions ``a exp(iS) A_j exp(i theta_j)`` as a column."""
    params = _natural(params)
    a = amplitude_a(params, p.r)
    return a * np.exp(1j * scalar_S(params, p.t)) * pc.column()


def check_stencil(params: FieldParams, p: SpacetimePoint, h: float) -> None:
    if not (math.isfinite(h) and h > 0):
        raise ValueError(f"finite-difference step must be positive and finite, got {h!r}")
    if any(c + h == c for c in (p.t, p.x, p.y, p.z)):
        raise ValueError(f"finite-difference step {h:g} underflows at this point")
    if p.r - h < params.r_min:
        raise SingularityError(f"stencil of width {h:g} reaches r < {params.r_min:g}")


def fd_jacobian(field: Callable, p: SpacetimePoint, h: float) -> list:
    """Central differences of ``field`` along t, x, y, z."""
    return [(field(p.shifted(k, h)) - field(p.shifted(k, -h))) / (2.0 * h) for k in range(4)]


def apply_dirac_operator(
    which: str,
    field: SpinorField,
    p: SpacetimePoint,
    params: FieldParams,
    mode: str = "fd",
    h: float = 1e-4,
    jacobian: Callable[[SpacetimePoint], Sequence[np.ndarray]] | None = None,
) -> np.ndarray:
    """Apply ``D0`` (``-m``) or ``D1`` (``+m``) to a spinor field at ``p``.

    ``mode="fd"`` uses central differences of step ``h``; ``mode="analytic"``
    needs ``jacobian(p)`` returning the four partial derivatives.
    """
    params = _natural(params)
    if which not in ("D0", "D1"):
        raise ValueError(f"unknown operator {which!r}")
    if mode == "analytic":
        if jacobian is None:
            raise ValueError("analytic mode needs the field's jacobian")
        derivs = list(jacobian(p))
    elif mode == "fd":
        check_stencil(params, p, h)
        derivs = fd_jacobian(field, p, h)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    g = _gammas()
    out = sum(1j * (g[mu] @ derivs[mu]) for mu in range(4))
    mass = params.m if which == "D1" else -params.m
    return out + mass * field(p)


def _matrix_solution(params, p, column, mass_sign):
    a = amplitude_a(params, p.r)
    R = r_vector(params, p)
    g = _gammas()
    M = params.Ec * g[0] + mass_sign * params.m * np.eye(4) - 1j * sum(R[k] * g[k + 1] for k in range(3))
    return a * np.exp(1j * scalar_S(params, p.t)) * (M @ column)


def _matrix_solution_jacobian(params, p, column, mass_sign):
    a = amplitude_a(params, p.r)
    R = r_vector(params, p)
    J = r_jacobian(params, p)
    g = _gammas()
    phase = np.exp(1j * scalar_S(params, p.t))
    psi = _matrix_solution(params, p, column, mass_sign)
    out = [-1j * params.Ec * psi]
    for k in range(3):
        dM = -1j * sum(J[j, k] * g[j + 1] for j in range(3))
        out.append(-R[k] * psi + a * phase * (dM @ column))
    return out


def evaluate_psi_matrix(
    params: FieldParams, p: SpacetimePoint, pc: PhaseConstants = PhaseConstants()
) -> np.ndarray:
    """Closed form of ``D1 phi``: ``a e^{iS} {Ec g^0 + m - i g^k R_k} (A_j e^{i theta_j})``."""
    params = _natural(params)
    return _matrix_solution(params, p, pc.column(), +1)


def psi_matrix_jacobian(
    params: FieldParams, p: SpacetimePoint, pc: PhaseConstants = PhaseConstants()
) -> list[np.ndarray]:
    params = _natural(params)
    return _matrix_solution_jacobian(params, p, pc.column(), +1)


def hestenes_map_residual(params: FieldParams, p: SpacetimePoint) -> float:
    """Relative mismatch between ``matrix_rep(psi_sta) u`` and the matrix solution."""
    params = _natural(params)
    via_sta = matrix_rep(evaluate_psi_sta(params, p)) @ U
    direct = evaluate_psi_matrix(params, p)
    denom = np.linalg.norm(direct)
    if denom == 0.0:
        raise ZeroDivisionError("matrix solution vanishes at this point; relative residual undefined")
    return float(np.linalg.norm(via_sta - direct) / denom)


@dataclass(frozen=True)
class FamilyMember:
    """One of the four matrix solutions and the operator that annihilates it."""

    label: str
    source: str  # operator applied to phi
    annihilator: str
    column: int
    value: np.ndarray

    def field(self, params: FieldParams) -> SpinorField:
        sign = +1 if self.source == "D1" else -1
        col = PhaseConstants.basis(self.column).column()
        return lambda q: _matrix_solution(params, q, col, sign)

    def jacobian(self, params: FieldParams):
        sign = +1 if self.source == "D1" else -1
        col = PhaseConstants.basis(self.column).column()
        return lambda q: _matrix_solution_jacobian(params, q, col, sign)


def solution_family(params: FieldParams, p: SpacetimePoint) -> list[FamilyMember]:
    """``D1 phi`` and ``D0 phi`` for the columns e1 and e2.

    ``D0 D1 = D1 D0`` is the Klein-Gordon operator, so ``D1 phi`` is
    annihilated by ``D0`` and ``D0 phi`` by ``D1``.
    """
    params = _natural(params)
    if not p.r >= params.r_min:
        raise SingularityError(f"r = {p.r:g} is inside the excluded ball")
    members = []
    for source, annihilator in (("D1", "D0"), ("D0", "D1")):
        sign = +1 if source == "D1" else -1
        for j in (0, 1):
            col = PhaseConstants.basis(j).column()
            members.append(
                FamilyMember(
                    label=f"{source}phi_e{j + 1}",
                    source=source,
                    annihilator=annihilator,
                    column=j,
                    value=_matrix_solution(params, p, col, sign),
                )
            )
    return members
