"""Real spacetime algebra Cl(1,3) with signature (+, -, -, -).

Basis blades are addressed by a 4-bit mask: bit ``b`` set means the
generator ``gamma_b`` appears in the ascending-index product. Mask 0 is the
scalar and mask 15 is the pseudoscalar ``I = g0 g1 g2 g3``.

The 16x16 product table is built once at import time and every geometric
product goes through it.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

METRIC = (1, -1, -1, -1)
NBLADES = 16

SCALAR = 0
PSEUDOSCALAR = 15


def grade(mask: int) -> int:
    return bin(mask).count("1")


def blade_name(mask: int) -> str:
    if mask == SCALAR:
        return "s"
    if mask == PSEUDOSCALAR:
        return "I"
    return "".join(f"g{b}" for b in range(4) if mask >> b & 1)


def _check_mask(mask: int) -> None:
    if not 0 <= mask < NBLADES:
        raise ValueError(f"blade mask out of range: {mask}")


def blade_product(a: int, b: int) -> tuple[int, int]:
    """Product of two basis blades as ``(sign, mask)``.

    The sign counts the transpositions needed to bring the concatenated
    generator word into ascending order, times the metric sign of every
    generator that squares away.
    """
    _check_mask(a)
    _check_mask(b)
    swaps = 0
    for j in range(4):
        if b >> j & 1:
            swaps += grade(a >> (j + 1))
    sign = -1 if swaps % 2 else 1
    common = a & b
    for j in range(4):
        if common >> j & 1:
            sign *= METRIC[j]
    return sign, a ^ b


def _build_tables() -> tuple[np.ndarray, np.ndarray]:
    signs = np.zeros((NBLADES, NBLADES), dtype=np.int8)
    masks = np.zeros((NBLADES, NBLADES), dtype=np.intp)
    for i in range(NBLADES):
        for j in range(NBLADES):
            signs[i, j], masks[i, j] = blade_product(i, j)
    return signs, masks


_SIGNS, _MASKS = _build_tables()
_SIGNS.setflags(write=False)
_MASKS.setflags(write=False)
_FLAT_MASKS = _MASKS.ravel()
_FLAT_SIGNS = _SIGNS.ravel().astype(float)

GRADES = np.array([grade(m) for m in range(NBLADES)])
_REVERSE_SIGNS = np.array([(-1) ** (k * (k - 1) // 2) for k in GRADES], dtype=float)
ODD_MASKS = np.flatnonzero(GRADES % 2 == 1)
EVEN_MASKS = np.flatnonzero(GRADES % 2 == 0)

# Serialisation order: by grade, then by mask within a grade.
BLADE_ORDER = sorted(range(NBLADES), key=lambda m: (grade(m), m))
BLADE_NAMES = [blade_name(m) for m in BLADE_ORDER]


class Multivector:
    """A multivector stored as 16 real coefficients indexed by blade mask.

    ``*`` is the geometric product (or scaling by a real number), ``+`` and
    ``-`` act coefficient-wise. Instances are treated as immutable.
    """

    __slots__ = ("coeff",)

    def __init__(self, coeff: Iterable[float] | np.ndarray | None = None):
        if coeff is None:
            arr = np.zeros(NBLADES)
        else:
            arr = np.array(coeff, dtype=float)
            if arr.shape != (NBLADES,):
                raise ValueError(f"expected 16 coefficients, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("multivector coefficients must be finite")
        self.coeff = arr

    @classmethod
    def scalar(cls, value: float) -> Multivector:
        c = np.zeros(NBLADES)
        c[SCALAR] = value
        return cls(c)

    @classmethod
    def blade(cls, mask: int, value: float = 1.0) -> Multivector:
        _check_mask(mask)
        c = np.zeros(NBLADES)
        c[mask] = value
        return cls(c)

    def __getitem__(self, mask: int) -> float:
        return float(self.coeff[mask])

    def __add__(self, other):
        if isinstance(other, Multivector):
            return Multivector(self.coeff + other.coeff)
        if isinstance(other, (int, float)):
            return self + Multivector.scalar(other)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Multivector):
            return Multivector(self.coeff - other.coeff)
        if isinstance(other, (int, float)):
            return self - Multivector.scalar(other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Multivector(-self.coeff)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return geometric_product(self, other)
        if isinstance(other, (int, float, np.floating)):
            return Multivector(self.coeff * float(other))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return Multivector(self.coeff * float(other))
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return Multivector(self.coeff / float(other))
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return bool(np.array_equal(self.coeff, other.coeff))

    __hash__ = None  # type: ignore[assignment]

    def grade(self, k: int) -> Multivector:
        return grade_project(self, k)

    def reverse(self) -> Multivector:
        return reverse(self)

    def scalar_part(self) -> float:
        return float(self.coeff[SCALAR])

    def norm(self) -> float:
        """Euclidean 2-norm of the coefficient vector."""
        return float(np.linalg.norm(self.coeff))

    def is_even(self) -> bool:
        return not np.any(self.coeff[ODD_MASKS])

    def allclose(self, other: Multivector, atol: float = 1e-12, rtol: float = 1e-10) -> bool:
        return bool(np.allclose(self.coeff, other.coeff, atol=atol, rtol=rtol))

    def __repr__(self) -> str:
        terms = [
            f"{self.coeff[m]:+.6g}*{blade_name(m)}" if m else f"{self.coeff[m]:+.6g}"
            for m in BLADE_ORDER
            if self.coeff[m] != 0.0
        ]
        return "Multivector(" + (" ".join(terms) if terms else "0") + ")"


def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    weights = np.outer(a.coeff, b.coeff).ravel() * _FLAT_SIGNS
    return Multivector(np.bincount(_FLAT_MASKS, weights=weights, minlength=NBLADES))


def grade_project(a: Multivector, k: int) -> Multivector:
    if not 0 <= k <= 4:
        raise ValueError(f"grade must be in 0..4, got {k}")
    return Multivector(np.where(GRADES == k, a.coeff, 0.0))


def reverse(a: Multivector) -> Multivector:
    return Multivector(a.coeff * _REVERSE_SIGNS)


def product(*factors: Multivector) -> Multivector:
    out = factors[0]
    for f in factors[1:]:
        out = geometric_product(out, f)
    return out


# Named elements used throughout the package.
ONE = Multivector.scalar(1.0)
G0 = Multivector.blade(0b0001)
G1 = Multivector.blade(0b0010)
G2 = Multivector.blade(0b0100)
G3 = Multivector.blade(0b1000)
GAMMA = (G0, G1, G2, G3)
# Reciprocal frame: g^0 = g0, g^k = -gk.
GAMMA_UP = (G0, -G1, -G2, -G3)
I = Multivector.blade(PSEUDOSCALAR)
SIGMA1 = G1 * G0
SIGMA2 = G2 * G0
SIGMA3 = G3 * G0
SIGMA = (SIGMA1, SIGMA2, SIGMA3)
I_SIGMA3 = I * SIGMA3  # equals g2 g1


def exp_neg_square(B: Multivector, theta: float, tol: float = 1e-12) -> Multivector:
    """``exp(B theta) = cos(theta) + B sin(theta)`` for an element with ``B*B = -1``."""
    sq = B * B
    target = -ONE
    if not np.allclose(sq.coeff, target.coeff, atol=tol, rtol=0.0):
        raise ValueError("exp_neg_square needs an element squaring to -1")
    return math.cos(theta) * ONE + math.sin(theta) * B


def is_rotor(R: Multivector, tol: float = 1e-12) -> bool:
    return bool(np.allclose((R * reverse(R)).coeff, ONE.coeff, atol=tol, rtol=0.0))


def rotor_sandwich(R: Multivector, v: Multivector, tol: float = 1e-12) -> Multivector:
    """Apply ``v -> R v ~R`` for a unit rotor ``R``."""
    if not is_rotor(R, tol):
        raise ValueError("rotor_sandwich needs R * reverse(R) == 1")
    return R * v * reverse(R)


def plane_rotor(angle: float) -> Multivector:
    """Rotor whose sandwich turns sigma1 towards sigma2 by ``angle``."""
    return exp_neg_square(I_SIGMA3, -0.5 * angle)


def sigma_components(v: Multivector) -> np.ndarray:
    """Components of ``v`` along sigma1, sigma2, sigma3 (sigma_k squares to +1)."""
    return np.array([(v * s).scalar_part() for s in SIGMA])
