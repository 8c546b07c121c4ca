"""Piecewise-constant s-wave potentials and their regular solutions.

Units are fixed to hbar = 2m = 1, so the radial equation reads
``-u'' + V(r) u = k^2 u``.  Inside segment ``j`` the solution is written in a
basis recentred at the segment's left edge,

    u(r) = A_j exp(+i q_j (r - r_j)) + B_j exp(-i q_j (r - r_j)),

with ``q_j`` the principal square root of ``k^2 - V_j``.  The exterior region
``r > a`` is treated as one more segment with ``q = k`` and ``r_j = a``; its
``B`` amplitude is the Jost-type function whose zeros are the resonance poles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateWavenumberError, InvalidParameterError

#: |q| below this is treated as a vanishing local wavenumber.
Q_FLOOR = 1e-12


@dataclass(frozen=True)
class Segment:
    r_lo: float
    r_hi: float
    height: float

    @property
    def width(self) -> float:
        return self.r_hi - self.r_lo


@dataclass(frozen=True)
class PotentialSpec:
    """Radial potential built from contiguous constant segments tiling [0, a]."""

    segments: tuple[Segment, ...]

    def __post_init__(self):
        segs = tuple(s if isinstance(s, Segment) else Segment(*map(float, s)) for s in self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise InvalidParameterError("potential needs at least one segment")
        if segs[0].r_lo != 0.0:
            raise InvalidParameterError("first segment must start at r = 0")
        for s in segs:
            if not (np.isfinite(s.r_lo) and np.isfinite(s.r_hi) and np.isfinite(s.height)):
                raise InvalidParameterError(f"non-finite segment {s}")
            if not s.width > 0:
                raise InvalidParameterError(f"segment {s} has non-positive width")
        for left, right in zip(segs, segs[1:]):
            if left.r_hi != right.r_lo:
                raise InvalidParameterError(f"segments {left} and {right} are not contiguous")

    @property
    def cutoff(self) -> float:
        """Radius ``a`` beyond which the potential vanishes."""
        return self.segments[-1].r_hi

    @property
    def interfaces(self) -> tuple[float, ...]:
        return tuple(s.r_hi for s in self.segments)

    @property
    def heights(self) -> np.ndarray:
        return np.array([s.height for s in self.segments])

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for s in self.segments:
            out = np.where((r >= s.r_lo) & (r < s.r_hi), s.height, out)
        return out

    @classmethod
    def from_heights(cls, edges: Sequence[float], heights: Sequence[float]) -> "PotentialSpec":
        """Build from interface radii ``edges`` (starting at 0) and per-segment heights."""
        if len(edges) != len(heights) + 1:
            raise InvalidParameterError("need len(edges) == len(heights) + 1")
        return cls(tuple(Segment(float(edges[i]), float(edges[i + 1]), float(h))
                         for i, h in enumerate(heights)))


@dataclass(frozen=True)
class BarrierShellParams:
    barrier_height: float = 30.0
    well_width: float = 1.0
    barrier_width: float = 0.3

    def __post_init__(self):
        for name in ("barrier_height", "well_width", "barrier_width"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidParameterError(f"{name} must be positive and finite, got {value}")

    @property
    def cutoff(self) -> float:
        return self.well_width + self.barrier_width


def make_barrier_shell(params: BarrierShellParams) -> PotentialSpec:
    """Zero-depth well of width w followed by a barrier of height V and width b."""
    w, b, V = params.well_width, params.barrier_width, params.barrier_height
    return PotentialSpec((Segment(0.0, w, 0.0), Segment(w, w + b, V)))


def free_potential(a: float = 1.0) -> PotentialSpec:
    return PotentialSpec((Segment(0.0, float(a), 0.0),))


@dataclass(frozen=True)
class PiecewiseSolution:
    """Regular solution for one wavenumber.

    ``amplitudes[j] = (A_j, B_j)`` for the interior segments; ``exterior`` holds
    the outgoing/incoming pair for ``r > a`` in the basis ``exp(+-ik(r-a))``.
    The first segment carries ``u = sin(q_0 r)/q_0``.
    """

    spec: PotentialSpec
    k: complex
    q: tuple[complex, ...]
    amplitudes: tuple[tuple[complex, complex], ...]
    exterior: tuple[complex, complex]
    residuals: tuple[float, ...] = field(default=())
    scale: complex = 1.0

    @property
    def outgoing(self) -> complex:
        return self.exterior[0]

    @property
    def incoming(self) -> complex:
        return self.exterior[1]

    def scaled(self, factor: complex) -> "PiecewiseSolution":
        amps = tuple((A * factor, B * factor) for A, B in self.amplitudes)
        ext = (self.exterior[0] * factor, self.exterior[1] * factor)
        return PiecewiseSolution(self.spec, self.k, self.q, amps, ext, self.residuals,
                                 self.scale * factor)

    def _pieces(self):
        segs = self.spec.segments
        for s, q, (A, B) in zip(segs, self.q, self.amplitudes):
            yield s.r_lo, s.r_hi, q, A, B
        yield self.spec.cutoff, np.inf, self.k, self.exterior[0], self.exterior[1]

    def __call__(self, r):
        """u(r); accepts scalars or arrays, r >= 0."""
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=complex)
        for lo, hi, q, A, B in self._pieces():
            mask = (r >= lo) & (r < hi) if np.isfinite(hi) else (r >= lo)
            if np.any(mask):
                x = r[mask] - lo
                out[mask] = A * np.exp(1j * q * x) + B * np.exp(-1j * q * x)
        return out[()] if out.ndim == 0 else out

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=complex)
        for lo, hi, q, A, B in self._pieces():
            mask = (r >= lo) & (r < hi) if np.isfinite(hi) else (r >= lo)
            if np.any(mask):
                x = r[mask] - lo
                out[mask] = 1j * q * (A * np.exp(1j * q * x) - B * np.exp(-1j * q * x))
        return out[()] if out.ndim == 0 else out

    def boundary(self) -> tuple[complex, complex]:
        """(u(a), u'(a)) read from the exterior amplitudes."""
        A, B = self.exterior
        return A + B, 1j * self.k * (A - B)


def _local_q(k, height, sign=1):
    q = sign * np.sqrt(np.asarray(k, dtype=complex) ** 2 - height)
    if np.any(np.abs(q) < Q_FLOOR):
        raise DegenerateWavenumberError(f"local wavenumber vanishes for k={k}, V={height}")
    return q


def _propagate(spec: PotentialSpec, k, signs=None):
    """Amplitude pairs for every segment plus the exterior; broadcasts over ``k``."""
    k = np.asarray(k, dtype=complex)
    if np.any(np.abs(k) < Q_FLOOR):
        raise DegenerateWavenumberError("k = 0 is excluded")
    n = len(spec.segments)
    signs = [1] * (n + 1) if signs is None else list(signs)
    qs = [_local_q(k, s.height, signs[j]) for j, s in enumerate(spec.segments)]
    qs.append(signs[n] * k)

    A = 1.0 / (2j * qs[0])
    B = -A
    amps = [(A, B)]
    residuals = []
    for j, s in enumerate(spec.segments):
        q, qn = qs[j], qs[j + 1]
        ep = np.exp(1j * q * s.width)
        em = np.exp(-1j * q * s.width)
        u = A * ep + B * em
        du = 1j * q * (A * ep - B * em)
        A = 0.5 * (u + du / (1j * qn))
        B = 0.5 * (u - du / (1j * qn))
        scale = np.maximum(np.maximum(np.abs(u), np.abs(du)), 1e-300)
        res_u = np.abs(A + B - u) / scale
        res_du = np.abs(1j * qn * (A - B) - du) / scale
        residuals.append(np.maximum(res_u, res_du))
        amps.append((A, B))
    return qs, amps, residuals


def solve_piecewise(spec: PotentialSpec, k: complex, signs: Sequence[int] | None = None) -> PiecewiseSolution:
    """Regular solution ``u(0) = 0`` matched across every interface.

    ``signs`` optionally flips the branch of individual local wavenumbers
    (one entry per segment plus one for the exterior); physical quantities do
    not depend on the choice.
    """
    qs, amps, residuals = _propagate(spec, complex(k), signs)
    interior = tuple((complex(A), complex(B)) for A, B in amps[:-1])
    exterior = (complex(amps[-1][0]), complex(amps[-1][1]))
    if signs is not None and signs[-1] == -1:
        exterior = exterior[::-1]
    return PiecewiseSolution(spec, complex(k), tuple(complex(q) for q in qs[:-1]), interior,
                             exterior, tuple(float(r) for r in residuals))


def jost_outgoing(spec: PotentialSpec, k):
    """Incoming-wave coefficient of the regular solution outside ``a``.

    That is the ``B`` in ``u = A exp(ik(r-a)) + B exp(-ik(r-a))`` for ``r > a``,
    equal to ``(u(a) - u'(a)/(ik)) / 2``.  It vanishes exactly where the
    outgoing condition ``u'(a) = ik u(a)`` holds.  Vectorised over ``k``.
    """
    _, amps, _ = _propagate(spec, k)
    out = amps[-1][1]
    return complex(out) if np.ndim(out) == 0 else out


def jost_derivative(spec: PotentialSpec, k, step: float = 1e-7):
    """dJ/dk by a central difference along the real direction (J is analytic)."""
    k = np.asarray(k, dtype=complex)
    h = step * np.maximum(1.0, np.abs(k))
    d = (jost_outgoing(spec, k + h) - jost_outgoing(spec, k - h)) / (2 * h)
    return complex(d) if np.ndim(d) == 0 else d
