"""Spherical Riccati-Bessel, -Neumann and -Hankel functions of complex argument.

Conventions (x = kr):

    ĵ_l(x) = x j_l(x)            ĵ_0 = sin x,   ĵ_1 = sin x / x - cos x
    n̂_l(x) = x n_l(x)            n̂_0 = -cos x,  n̂_1 = -cos x / x - sin x
    ĥ_l^±(x) = -n̂_l(x) ± i ĵ_l(x)   ĥ_0^± = e^{±ix}

All three families obey ĉ_{l+1} = (2l+1)/z ĉ_l - ĉ_{l-1} and
dĉ_l/dz = ĉ_{l-1} - (l/z) ĉ_l. Derivatives are always taken from the second
relation, never by differencing.
"""

import cmath
import math
import sys
from dataclasses import dataclass
from typing import Literal

from rescont.exceptions import ArgumentOverflowError, DomainError

Sign = Literal[1, -1]

EXP_LIMIT = math.log(sys.float_info.max)
SERIES_MAX_TERMS = 200


@dataclass(frozen=True)
class RiccatiValue:
    value: complex
    derivative: complex


def wronskian(a: RiccatiValue, b: RiccatiValue) -> complex:
    """W[a, b] = a·b' - a'·b with derivatives in z."""
    return a.value * b.derivative - a.derivative * b.value


def _check_argument(l: int, z: complex) -> complex:
    if l < 0:
        raise ValueError(f"Angular momentum must be non-negative, got {l}")
    z = complex(z)
    if abs(z.imag) > EXP_LIMIT:
        raise ArgumentOverflowError(
            f"|Im z| = {abs(z.imag):.1f} exceeds the exponential range {EXP_LIMIT:.1f}",
            z,
            EXP_LIMIT,
        )
    return z


def _double_factorial_odd(l: int) -> int:
    """(2l+1)!!"""
    return math.prod(range(1, 2 * l + 2, 2))


def _series_j(l: int, z: complex) -> complex:
    """Ascending series ĵ_l(z) = z^{l+1} Σ_k (-z²/2)^k / (k! (2l+2k+1)!!)."""
    term = z ** (l + 1) / _double_factorial_odd(l)
    total = term
    x = -0.5 * z * z
    for k in range(1, SERIES_MAX_TERMS):
        term *= x / (k * (2 * l + 2 * k + 1))
        total += term
        if abs(term) <= 1e-17 * abs(total):
            break
    return total


def _upward(
    l_from: int, l_to: int, z: complex, c_prev: complex, c_cur: complex
) -> tuple[complex, complex]:
    """Carry (ĉ_{l_from-1}, ĉ_{l_from}) up to (ĉ_{l_to-1}, ĉ_{l_to})."""
    for m in range(l_from, l_to):
        c_prev, c_cur = c_cur, (2 * m + 1) / z * c_cur - c_prev
    return c_prev, c_cur


def _j_pair_closed(l: int, z: complex) -> tuple[complex, complex]:
    s, c = cmath.sin(z), cmath.cos(z)
    if l == 0:
        return c, s
    j1 = s / z - c
    if l == 1:
        return s, j1
    j2 = (3.0 / (z * z) - 1.0) * s - 3.0 * c / z
    if l == 2:
        return j1, j2
    return _upward(2, l, z, j1, j2)


def _j_value(l: int, z: complex) -> complex:
    if l > 0 and abs(z) < l + 1:
        return _series_j(l, z)
    return _j_pair_closed(l, z)[1]


def riccati_j(l: int, z: complex) -> RiccatiValue:
    """Regular Riccati-Bessel function ĵ_l(z) and its derivative."""
    z = _check_argument(l, z)
    if z == 0:
        return RiccatiValue(0j, 1.0 + 0j if l == 0 else 0j)
    if l == 0:
        return RiccatiValue(cmath.sin(z), cmath.cos(z))
    value = _j_value(l, z)
    lower = _j_value(l - 1, z)
    return RiccatiValue(value, lower - l / z * value)


def _n_pair_closed(l: int, z: complex) -> tuple[complex, complex]:
    s, c = cmath.sin(z), cmath.cos(z)
    if l == 0:
        return s, -c
    n1 = -c / z - s
    if l == 1:
        return -c, n1
    n2 = -(3.0 / (z * z) - 1.0) * c - 3.0 * s / z
    if l == 2:
        return n1, n2
    return _upward(2, l, z, n1, n2)


def riccati_n(l: int, z: complex) -> RiccatiValue:
    """Irregular Riccati-Neumann function n̂_l(z) and its derivative."""
    z = _check_argument(l, z)
    if z == 0:
        raise DomainError("Riccati-Neumann function is singular at z = 0", "riccati_n", z)
    lower, value = _n_pair_closed(l, z)
    return RiccatiValue(value, lower - l / z * value)


def _h_pair(l: int, sign: Sign, z: complex) -> tuple[complex, complex]:
    # ĥ^± = e^{±iz} p_l(z); the polynomial factor in 1/z carries the recurrence,
    # the exponential is applied once so neither term has to cancel the other.
    phase = cmath.exp(sign * 1j * z)
    inv = 1.0 / z
    p_m1 = sign * 1j
    p0 = 1.0 + 0j
    if l == 0:
        return p_m1 * phase, p0 * phase
    p1 = inv - sign * 1j
    if l == 1:
        return p0 * phase, p1 * phase
    p2 = 3.0 * inv * inv - sign * 3j * inv - 1.0
    if l == 2:
        return p1 * phase, p2 * phase
    p_prev, p_cur = _upward(2, l, z, p1, p2)
    return p_prev * phase, p_cur * phase


def riccati_h(l: int, sign: Sign, z: complex) -> RiccatiValue:
    """Outgoing (sign=+1) or incoming (sign=-1) Riccati-Hankel function and derivative."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    z = _check_argument(l, z)
    if z == 0:
        raise DomainError("Riccati-Hankel function is singular at z = 0", "riccati_h", z)
    lower, value = _h_pair(l, sign, z)
    return RiccatiValue(value, lower - l / z * value)
