"""Faddeyeva function and Moshinsky functions.

``w(z) = exp(-z^2) erfc(-iz)``.  Upper-half-plane values come from
``scipy.special.wofz``; the lower half plane is reached through the
reflection ``w(z) = 2 exp(-z^2) - w(-z)`` so that the growing Gaussian is
formed explicitly and can be range-checked.

For a pole ``kappa``, position offset ``x = r - a`` and time ``t > 0`` the
Moshinsky function is

    M(x, kappa, t) = (i / 2 pi) int exp(ikx - ik^2 t) / (k - kappa) dk
                   = 1/2 exp(i x^2 / 4t) w(i y),
    y = exp(-i pi/4) (x - 2 kappa t) / sqrt(4t).

The Gaussian phase uses ``(r - a)^2``; the defining integral fixes it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import InvalidParameterError, OutOfRangeError, RangeOverflowError

ROT = np.exp(-0.25j * np.pi)  # exp(-i pi/4)
_EXP_MAX = 700.0


def _check_finite(z):
    if not np.all(np.isfinite(z)):
        raise InvalidParameterError("faddeyeva argument must be finite")


def _exp_checked(x):
    """exp(x) for complex x, raising instead of overflowing to inf."""
    if np.any(np.real(x) > _EXP_MAX):
        raise RangeOverflowError(f"exp overflow: Re(exponent) reaches {np.max(np.real(x)):.1f}")
    return np.exp(x)


def _two_prod(a, b):
    """Dekker's error-free product: ``a * b = p + e`` exactly."""
    p = a * b
    c = 134217729.0  # 2^27 + 1
    ta, tb = c * a, c * b
    ah = ta - (ta - a)
    bh = tb - (tb - b)
    al, bl = a - ah, b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _exp_neg_square(z):
    """``exp(-z^2)`` with ``z^2`` carried in double-double.

    Rounding ``z^2`` costs an absolute error of ``|z|^2`` ulps in the exponent,
    which is the dominant error of the reflected w(z) at large ``|z|``.
    """
    x, y = z.real, z.imag
    xx, xx_e = _two_prod(x, x)
    yy, yy_e = _two_prod(y, y)
    xy, xy_e = _two_prod(x, y)
    re_hi = yy - xx
    # two-sum error of the subtraction plus the product errors
    bb = re_hi - yy
    re_lo = ((yy - (re_hi - bb)) + (-xx - bb)) + (yy_e - xx_e)
    im_hi, im_lo = -2.0 * xy, -2.0 * xy_e
    if np.any(re_hi > _EXP_MAX):
        raise RangeOverflowError(f"exp overflow: Re(-z^2) reaches {np.max(re_hi):.1f}")
    mag = np.exp(re_hi) * (1.0 + re_lo)
    c, s = np.cos(im_hi), np.sin(im_hi)
    return mag * ((c - s * im_lo) + 1j * (s + c * im_lo))


def faddeyeva(z):
    """w(z) for scalar or array complex ``z``."""
    z = np.asarray(z, dtype=complex)
    _check_finite(z)
    out = np.empty_like(z)
    upper = z.imag >= 0
    out[upper] = special.wofz(z[upper])
    if not np.all(upper):
        zl = z[~upper]
        out[~upper] = 2.0 * _exp_neg_square(zl) - special.wofz(-zl)
    return out[()] if out.ndim == 0 else out


def moshinsky_y(x, kappa, t):
    """Argument ``y`` of the Moshinsky function."""
    t = np.asarray(t, dtype=float)
    return ROT * (x - 2.0 * np.asarray(kappa) * t) / np.sqrt(4.0 * t)


def moshinsky_y0(kappa, t):
    """``y`` at ``r = a``: ``-exp(-i pi/4) kappa sqrt(t)``."""
    return -ROT * np.asarray(kappa) * np.sqrt(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class MoshinskyArgs:
    r: float
    a: float
    t: float
    kappa: complex

    def __post_init__(self):
        if not self.t > 0:
            raise InvalidParameterError(f"Moshinsky function needs t > 0, got t={self.t}")

    @property
    def y(self) -> complex:
        return complex(moshinsky_y(self.r - self.a, self.kappa, self.t))

    @property
    def y0(self) -> complex:
        return complex(moshinsky_y0(self.kappa, self.t))


def moshinsky_array(x, kappa, t):
    """Vectorised ``M(x, kappa, t)``; broadcasts over all three inputs.

    Where ``iy`` lies in the lower half plane the pole term
    ``exp(i kappa x - i kappa^2 t)`` is split off analytically, which keeps
    the pair of Gaussians from being formed separately.
    """
    x, kappa, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(kappa, dtype=complex),
                                      np.asarray(t, dtype=float))
    if np.any(t <= 0):
        raise InvalidParameterError("Moshinsky function needs t > 0")
    y = moshinsky_y(x, kappa, t)
    z = 1j * y
    phase = 1j * x * x / (4.0 * t)
    out = np.empty(z.shape, dtype=complex)
    upper = z.imag >= 0
    out[upper] = 0.5 * _exp_checked(phase[upper]) * special.wofz(z[upper])
    low = ~upper
    if np.any(low):
        k, xl, tl = kappa[low], x[low], t[low]
        pole = _exp_checked(1j * k * xl - 1j * k * k * tl)
        out[low] = pole - 0.5 * _exp_checked(phase[low]) * special.wofz(-z[low])
    return out[()] if out.ndim == 0 else out


def moshinsky(args: MoshinskyArgs) -> complex:
    return complex(moshinsky_array(args.r - args.a, args.kappa, args.t))


def moshinsky_of_y(y):
    """M read as a function of its argument at ``r = a``: ``w(iy) / 2``."""
    return 0.5 * faddeyeva(1j * np.asarray(y, dtype=complex))


@dataclass(frozen=True)
class Reflection:
    m_plus: complex
    m_minus: complex
    pole_term: complex
    valid: bool

    @property
    def residual(self) -> float:
        return abs(self.m_plus + self.m_minus - self.pole_term)


def moshinsky_reflect(y: complex, kappa: complex, t: float) -> Reflection:
    """``M(y)``, ``M(-y)`` and the pole term ``exp(-i kappa^2 t)`` they sum to.

    ``valid`` reports whether ``pi/2 < arg y < 3 pi/2``, the band where
    ``M(y) = exp(-i kappa^2 t) - M(-y)`` isolates the exponential part.
    """
    if not t > 0:
        raise InvalidParameterError("t must be positive")
    mp = complex(moshinsky_of_y(y))
    mm = complex(moshinsky_of_y(-y))
    pole = complex(np.exp(-1j * kappa * kappa * t))
    return Reflection(mp, mm, pole, bool(np.real(y) < 0))


def moshinsky_asymptotic(y, n_terms: int = 2):
    """Large-|y| series ``M(y) ~ (1/2 sqrt(pi)) sum_m (-1)^m (2m-1)!! / 2^m y^-(2m+1)``.

    Only valid for ``Re y > 0`` where no exponential term is present.
    """
    y = np.asarray(y, dtype=complex)
    if np.any(np.abs(y) < 3):
        raise OutOfRangeError("asymptotic series needs |y| >= 3")
    if np.any(y.real <= 0):
        raise OutOfRangeError("asymptotic series needs -pi/2 < arg y < pi/2")
    if n_terms < 1:
        raise InvalidParameterError("n_terms must be >= 1")
    inv2 = 1.0 / (y * y)
    term = 1.0 / y
    total = term.copy()
    for m in range(1, n_terms):
        term = term * (-(2 * m - 1) / 2.0) * inv2
        total = total + term
    out = total / (2.0 * np.sqrt(np.pi))
    return out[()] if out.ndim == 0 else out


def moshinsky_integral(x: float, kappa: complex, t: float) -> complex:
    """Defining integral of M evaluated along the steepest-descent line.

    The real-axis contour is rotated by -pi/4 about the saddle ``x / 2t``;
    poles swept across by the rotation contribute their residues.  Independent
    of :func:`faddeyeva`; used as a reference.
    """
    ks = x / (2.0 * t)
    base = np.exp(1j * ks * x - 1j * ks * ks * t)

    def f(rho, part):
        k = ks + rho * ROT
        v = base * np.exp(-t * rho * rho) / (k - kappa) * ROT
        return v.real if part == 0 else v.imag

    width = 1.0 / np.sqrt(t)
    # parameter of the point on the line closest to the pole
    rho_c = float(((kappa - ks) * np.conj(ROT)).real)
    pts = sorted({-width, 0.0, width, rho_c})
    lim = 40.0 * width
    pts = [p for p in pts if -lim < p < lim]
    re = integrate.quad(f, -lim, lim, args=(0,), points=pts, limit=400, epsabs=1e-14, epsrel=1e-13)[0]
    im = integrate.quad(f, -lim, lim, args=(1,), points=pts, limit=400, epsabs=1e-14, epsrel=1e-13)[0]
    value = 1j / (2 * np.pi) * complex(re, im)
    ang = np.angle(kappa - ks)
    residue = np.exp(1j * kappa * x - 1j * kappa * kappa * t)
    if -np.pi / 4 < ang < 0:
        value += residue
    elif 3 * np.pi / 4 < ang < np.pi:
        value -= residue
    return complex(value)
