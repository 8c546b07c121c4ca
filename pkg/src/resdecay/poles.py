"""Resonance poles, normalized Gamow states and completeness checks.

Poles are the fourth-quadrant zeros of :func:`~resdecay.potential.jost_outgoing`.
The search covers a rectangle in vertical strips; every strip is certified by
the argument principle (winding number of J around its boundary) and
subdivided until the zeros polished by Newton iteration account for the full
winding count.  Third-quadrant partners ``-conj(kappa)`` carry the states
``conj(u)`` and are never stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import (
    DegenerateStateError,
    IncompleteSearchError,
    InvalidParameterError,
    UnsupportedPoleError,
)
from .potential import PiecewiseSolution, PotentialSpec, jost_derivative, jost_outgoing, solve_piecewise

POLE_TOL = 1e-10
NORM_TOL = 1e-10


@dataclass(frozen=True)
class SearchBox:
    """Closed rectangle ``re_lo <= Re k <= re_hi``, ``im_lo <= Im k <= im_hi``."""

    re_lo: float
    re_hi: float
    im_lo: float
    im_hi: float

    def __post_init__(self):
        if not (self.re_hi > self.re_lo and self.im_hi > self.im_lo):
            raise InvalidParameterError(f"empty search box {self}")

    def contains(self, k: complex) -> bool:
        return self.re_lo <= k.real <= self.re_hi and self.im_lo <= k.imag <= self.im_hi

    def corners(self) -> list[complex]:
        return [complex(self.re_lo, self.im_lo), complex(self.re_hi, self.im_lo),
                complex(self.re_hi, self.im_hi), complex(self.re_lo, self.im_hi)]

    def quarters(self) -> list["SearchBox"]:
        rm = 0.5 * (self.re_lo + self.re_hi)
        im = 0.5 * (self.im_lo + self.im_hi)
        return [SearchBox(self.re_lo, rm, self.im_lo, im), SearchBox(rm, self.re_hi, self.im_lo, im),
                SearchBox(self.re_lo, rm, im, self.im_hi), SearchBox(rm, self.re_hi, im, self.im_hi)]

    @property
    def size(self) -> float:
        return max(self.re_hi - self.re_lo, self.im_hi - self.im_lo)


def default_box(spec: PotentialSpec, count: int) -> SearchBox:
    """Fourth-quadrant box expected to hold at least ``count`` poles.

    Poles of a sharp-edged potential are spaced roughly ``pi/a`` along the real
    axis and sink only logarithmically, so the depth grows with ``log(Re k)``.
    """
    a = spec.cutoff
    re_hi = (count + 2.5) * math.pi / a
    im_lo = -max(8.0, 2.0 * math.log1p(re_hi**2) / a)
    return SearchBox(min(0.05, 0.1 / a), re_hi, im_lo, 0.0)


@dataclass(frozen=True)
class ResonancePole:
    n: int
    kappa: complex
    jost_residual: float = 0.0

    @property
    def energy(self) -> complex:
        return self.kappa**2

    @property
    def resonance_energy(self) -> float:
        return self.energy.real

    @property
    def width(self) -> float:
        return -2.0 * self.energy.imag

    @property
    def proper(self) -> bool:
        return self.kappa.real > -self.kappa.imag

    @property
    def partner(self) -> complex:
        """Third-quadrant mirror pole."""
        return -self.kappa.conjugate()


# --------------------------------------------------------------------------
# argument principle

def _edge_values(f: Callable, z0: complex, z1: complex, n: int, max_phase: float = 0.4,
                 max_rounds: int = 40):
    """Sample f on the segment [z0, z1] until consecutive phase steps are small."""
    s = np.linspace(0.0, 1.0, n + 1)
    vals = f(z0 + (z1 - z0) * s)
    for _ in range(max_rounds):
        dphi = np.abs(np.angle(vals[1:] / vals[:-1]))
        bad = np.nonzero(dphi > max_phase)[0]
        if bad.size == 0:
            break
        mids = 0.5 * (s[bad] + s[bad + 1])
        s = np.insert(s, bad + 1, mids)
        vals = np.insert(vals, bad + 1, f(z0 + (z1 - z0) * mids))
    else:
        raise IncompleteSearchError(f"phase of J does not resolve on edge {z0}->{z1}; a zero lies on the contour")
    return z0 + (z1 - z0) * s, vals


def _contour(spec, box: SearchBox, points_per_unit: float = 40.0):
    f = lambda z: jost_outgoing(spec, z)
    c = box.corners() + [box.corners()[0]]
    zs, vs = [], []
    for z0, z1 in zip(c, c[1:]):
        n = max(16, int(abs(z1 - z0) * points_per_unit))
        z, v = _edge_values(f, z0, z1, n)
        zs.append(z[:-1])
        vs.append(v[:-1])
    zs.append(np.array([c[0]]))
    vs.append(np.array([jost_outgoing(spec, c[0])]))
    return np.concatenate(zs), np.concatenate(vs)


def winding_number(spec: PotentialSpec, box: SearchBox) -> int:
    """Number of zeros of J inside ``box`` from the accumulated phase of J."""
    _, vals = _contour(spec, box)
    total = np.sum(np.angle(vals[1:] / vals[:-1])) / (2 * np.pi)
    count = int(round(total))
    if abs(total - count) > 1e-6:
        raise IncompleteSearchError(f"non-integer winding {total} around {box}", box=box)
    return count


def contour_zero_count(spec: PotentialSpec, box: SearchBox) -> complex:
    """(1/2 pi i) times the integral of J'/J around ``box`` by adaptive quadrature.

    Kept separate from :func:`winding_number` (it never looks at phases) so
    that the two can check each other.
    """
    total = 0.0 + 0.0j
    c = box.corners() + [box.corners()[0]]
    for z0, z1 in zip(c, c[1:]):
        dz = z1 - z0

        def g(s, part):
            z = z0 + dz * s
            v = jost_derivative(spec, z) / jost_outgoing(spec, z) * dz
            return v.real if part == 0 else v.imag

        re = integrate.quad(g, 0.0, 1.0, args=(0,), limit=500, epsabs=1e-10)[0]
        im = integrate.quad(g, 0.0, 1.0, args=(1,), limit=500, epsabs=1e-10)[0]
        total += complex(re, im)
    return total / (2j * np.pi)


def _contour_centroid(spec, box: SearchBox, count: int) -> complex:
    """Mean position of the ``count`` zeros inside ``box`` from the first moment of J'/J."""
    total = 0.0 + 0.0j
    c = box.corners() + [box.corners()[0]]
    for z0, z1 in zip(c, c[1:]):
        n = max(64, int(abs(z1 - z0) * 60))
        z = z0 + (z1 - z0) * np.linspace(0.0, 1.0, n + 1)
        g = z * jost_derivative(spec, z) / jost_outgoing(spec, z)
        total += np.trapezoid(g, z)
    return total / (2j * np.pi) / count


def newton_polish(spec: PotentialSpec, k0: complex, tol: float = POLE_TOL, max_iter: int = 60) -> complex:
    k = complex(k0)
    for _ in range(max_iter):
        step = jost_outgoing(spec, k) / jost_derivative(spec, k)
        k -= step
        if abs(step) <= 1e-15 * max(1.0, abs(k)):
            break
    return k


# --------------------------------------------------------------------------
# pole search

def _locate(spec, box: SearchBox, expected: int, found: list[complex], tol: float, depth: int = 0):
    """Make ``found`` hold ``expected`` zeros inside ``box`` (refining recursively)."""
    inside = [z for z in found if box.contains(z)]
    if len(inside) == expected:
        return
    if len(inside) > expected:
        raise IncompleteSearchError(f"more zeros than winding count in {box}", box=box,
                                    expected=expected, found=len(inside))
    if expected == 1 or box.size < 1e-3:
        seed = _contour_centroid(spec, box, expected)
        for s in (seed, 0.5 * (box.corners()[0] + box.corners()[2])):
            z = newton_polish(spec, s, tol)
            if abs(jost_outgoing(spec, z)) < tol and box.contains(z) and \
                    all(abs(z - w) > 1e-8 * max(1.0, abs(z)) for w in found):
                found.append(z)
                if expected - len(inside) == 1:
                    return
                break
    if box.size < 1e-6 and expected == 1:
        raise IncompleteSearchError(f"Newton iteration failed for the zero in {box}", box=box,
                                    expected=1, found=0)
    if box.size < 1e-6:
        raise UnsupportedPoleError(f"{expected} zeros coalesce near {box.corners()[0]}; "
                                   "degenerate poles are not supported")
    if depth > 40:
        raise IncompleteSearchError(f"could not resolve zeros in {box}", box=box,
                                    expected=expected, found=len(inside))
    for sub in box.quarters():
        m = winding_number(spec, sub)
        if m:
            _locate(spec, sub, m, found, tol, depth + 1)
    inside = [z for z in found if box.contains(z)]
    if len(inside) != expected:
        raise IncompleteSearchError(f"winding count {expected} but {len(inside)} zeros found in {box}",
                                    box=box, expected=expected, found=len(inside))


def _check_antibound(spec, box: SearchBox):
    """Reject potentials with zeros on the negative imaginary axis above ``box.im_lo``."""
    gamma = np.linspace(1e-3, -box.im_lo, 4000)
    k = -1j * gamma
    vals = (2j * k * jost_outgoing(spec, k)).real
    if np.any(np.sign(vals[1:]) != np.sign(vals[:-1])):
        raise UnsupportedPoleError("potential has antibound (virtual) poles in the search depth")


def find_poles(spec: PotentialSpec, count: int, search_box: SearchBox | None = None,
               tol: float = POLE_TOL, extend: bool = True) -> list[ResonancePole]:
    """Locate at least ``count`` resonance poles, sorted by increasing Re kappa.

    If ``search_box`` is omitted a box is sized from the cutoff radius and is
    extended to the right until ``count`` poles are certified (``extend``).
    Every pole is Newton-polished to ``|J| < tol`` and the set is complete
    within the box in the argument-principle sense.
    """
    if count < 1:
        raise InvalidParameterError("pole count must be >= 1")
    box = search_box or default_box(spec, count)
    if box.im_hi > 0 or box.re_lo < 0:
        raise InvalidParameterError("search box must lie in the closed fourth quadrant")
    re_lo = max(box.re_lo, 1e-3)
    im_hi = min(box.im_hi, 0.0)
    _check_antibound(spec, box)

    a = spec.cutoff
    strip = 0.5 * math.pi / a
    found: list[complex] = []
    left = re_lo
    right = box.re_hi
    while True:
        edges = np.arange(left, right, strip).tolist() + [right]
        for x0, x1 in zip(edges, edges[1:]):
            sub = SearchBox(x0, x1, box.im_lo, im_hi)
            m = winding_number(spec, sub)
            if m:
                _locate(spec, sub, m, found, tol)
        if len(found) >= count or not extend or search_box is not None:
            break
        left, right = right, right + max(strip, 0.5 * (right - re_lo))

    poles = sorted(found, key=lambda z: z.real)
    return [ResonancePole(n + 1, z, float(abs(jost_outgoing(spec, z)))) for n, z in enumerate(poles)]


# --------------------------------------------------------------------------
# states

def _square_integral(q, A, B, h):
    """Integral over [0, h] of (A e^{iqx} + B e^{-iqx})^2."""
    iq2 = 2j * q
    return A * A * np.expm1(iq2 * h) / iq2 + 2 * A * B * h - B * B * np.expm1(-iq2 * h) / iq2


@dataclass(frozen=True)
class ResonanceState:
    """Gamow state normalised by ``int_0^a u^2 dr + i u(a)^2 / (2 kappa) = 1``."""

    pole: ResonancePole
    solution: PiecewiseSolution
    norm_factor: complex

    @property
    def kappa(self) -> complex:
        return self.pole.kappa

    @property
    def u_a(self) -> complex:
        return self.solution.boundary()[0]

    @property
    def du_a(self) -> complex:
        return self.solution.boundary()[1]

    def __call__(self, r):
        return self.solution(r)

    def derivative(self, r):
        return self.solution.derivative(r)

    def square_integral(self) -> complex:
        spec = self.solution.spec
        return sum(_square_integral(q, A, B, s.width)
                   for s, q, (A, B) in zip(spec.segments, self.solution.q, self.solution.amplitudes))

    def normalization_residual(self) -> float:
        value = self.square_integral() + 1j * self.u_a**2 / (2 * self.kappa)
        return abs(value - 1.0)


def build_state(spec: PotentialSpec, pole: ResonancePole, tol: float = NORM_TOL) -> ResonanceState:
    """Normalised resonance state for ``pole``; segment integrals are closed form."""
    if abs(jost_outgoing(spec, pole.kappa)) >= POLE_TOL:
        raise InvalidParameterError(f"kappa={pole.kappa} is not a pole (|J| too large)")
    sol = solve_piecewise(spec, pole.kappa)
    sq = sum(_square_integral(q, A, B, s.width)
             for s, q, (A, B) in zip(spec.segments, sol.q, sol.amplitudes))
    ua = sol.boundary()[0]
    norm = sq + 1j * ua**2 / (2 * pole.kappa)
    if abs(norm) < 1e-14:
        raise DegenerateStateError(f"normalisation integral vanishes at kappa={pole.kappa}")
    factor = 1.0 / np.sqrt(complex(norm))
    state = ResonanceState(pole, sol.scaled(factor), complex(factor))
    res = state.normalization_residual()
    if res > tol:
        raise DegenerateStateError(f"normalisation residual {res:.2e} exceeds {tol:.0e}")
    return state


def build_states(spec: PotentialSpec, poles: Sequence[ResonancePole]) -> list[ResonanceState]:
    return [build_state(spec, p) for p in poles]


# --------------------------------------------------------------------------
# completeness identities

def _panels(lo: float, hi: float, breaks: Sequence[float], kmax: float, order: int):
    """Gauss-Legendre nodes and weights on [lo, hi], split at ``breaks``.

    Panels are at most half a wavelength of the fastest state long.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    edges = [lo] + [b for b in breaks if lo < b < hi] + [hi]
    nodes, weights = [], []
    for e0, e1 in zip(edges, edges[1:]):
        n = max(2, int(np.ceil((e1 - e0) * kmax / np.pi)) + 1)
        cuts = np.linspace(e0, e1, n + 1)
        half = 0.5 * np.diff(cuts)
        mid = 0.5 * (cuts[1:] + cuts[:-1])
        nodes.append((mid[:, None] + half[:, None] * x).ravel())
        weights.append((half[:, None] * w).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def projections(f: Callable, states: Sequence[ResonanceState], lo: float = 0.0,
                hi: float | None = None, order: int = 24) -> np.ndarray:
    """``int f(r) u_n(r) dr`` over [lo, hi] for every state.

    Composite Gauss-Legendre over panels that respect every potential
    interface; ``f`` should be smooth on [lo, hi] (its support edges belong
    at ``lo`` and ``hi``).
    """
    if not states:
        return np.zeros(0, dtype=complex)
    spec = states[0].solution.spec
    hi = spec.cutoff if hi is None else hi
    kmax = max(abs(st.kappa) for st in states)
    r, w = _panels(lo, hi, spec.interfaces, kmax, order)
    fw = np.asarray(f(r)) * w
    return np.array([np.dot(st(r), fw) for st in states])


def projection_quad(f: Callable, state: ResonanceState, lo: float = 0.0, hi: float | None = None) -> complex:
    """Single projection by adaptive quadrature; the reference for :func:`projections`."""
    spec = state.solution.spec
    hi = spec.cutoff if hi is None else hi
    breaks = [x for x in spec.interfaces if lo < x < hi]
    limit = 200 + int(abs(state.kappa) * (hi - lo))
    kw = dict(points=breaks or None, limit=limit, epsabs=1e-13, epsrel=1e-12)
    re = integrate.quad(lambda r: float((f(r) * state(r)).real), lo, hi, **kw)[0]
    im = integrate.quad(lambda r: float((f(r) * state(r)).imag), lo, hi, **kw)[0]
    return complex(re, im)


@dataclass(frozen=True)
class ClosureReport:
    n_states: int
    max_error: float
    l2_error: float


def verify_closure(states: Sequence[ResonanceState], f: Callable, r_grid) -> ClosureReport:
    """Reconstruct ``f`` from ``Re sum_n u_n(r) int f u_n`` and measure the error on ``r_grid``."""
    r_grid = np.asarray(r_grid, dtype=float)
    target = np.asarray(f(r_grid), dtype=float)
    if not states:
        return ClosureReport(0, float(np.max(np.abs(target))), float(np.sqrt(np.trapezoid(target**2, r_grid))))
    coeffs = projections(f, states)
    approx = np.zeros_like(r_grid)
    for c, st in zip(coeffs, states):
        approx += (c * st(r_grid)).real
    err = approx - target
    return ClosureReport(len(states), float(np.max(np.abs(err))), float(np.sqrt(np.trapezoid(err**2, r_grid))))


def verify_sum_rules(states: Sequence[ResonanceState], r: float, r_prime: float) -> tuple[float, float]:
    """Imaginary parts of ``sum u_n(r) u_n(r') / kappa_n`` and ``sum u_n u_n kappa_n``.

    Pairing each pole with its mirror turns both bilateral sum rules into the
    vanishing of these one-sided imaginary parts.
    """
    a = states[0].solution.spec.cutoff if states else np.inf
    if r == r_prime == a:
        raise InvalidParameterError("sum rules exclude the point r = r' = a")
    if r > a or r_prime > a:
        raise InvalidParameterError("sum rules hold for r, r' <= a")
    prods = np.array([st(r) * st(r_prime) for st in states])
    kap = np.array([st.kappa for st in states])
    return float(np.sum(prods / kap).imag), float(np.sum(prods * kap).imag)


def sum_rule_partials(states: Sequence[ResonanceState], r: float, r_prime: float) -> np.ndarray:
    """Running values of the first sum rule after 1, 2, ... states."""
    prods = np.array([st(r) * st(r_prime) for st in states])
    kap = np.array([st.kappa for st in states])
    return np.cumsum(prods / kap).imag


def smooth_bump(lo: float, hi: float) -> Callable:
    """``sin^2`` bump on ``[lo, hi]``, zero elsewhere: a C^1 test function."""
    if not hi > lo:
        raise InvalidParameterError("bump needs hi > lo")

    def bump(r):
        r = np.asarray(r, dtype=float)
        inside = (r > lo) & (r < hi)
        return np.where(inside, np.sin(np.pi * (r - lo) / (hi - lo)) ** 2, 0.0)

    return bump


@dataclass(frozen=True)
class SmearedSumRules:
    """Running sum rules after weighting both coordinates with test functions."""

    first: np.ndarray
    second: np.ndarray

    def at(self, n: int) -> tuple[float, float]:
        return float(self.first[n - 1]), float(self.second[n - 1])


def smeared_sum_rules(states: Sequence[ResonanceState], f: Callable, g: Callable,
                      f_support: tuple[float, float], g_support: tuple[float, float]) -> SmearedSumRules:
    """Sum rules integrated against ``f(r) g(r')``.

    Pointwise partial sums have terms that do not shrink with ``n`` (the
    growth of ``u_n`` inside the well cancels the ``1/kappa_n``), so they only
    hold in the distributional sense.  Weighting with smooth test functions
    replaces ``u_n(r) u_n(r')`` by the projections ``F_n G_n``, which decay
    fast enough for ordinary convergence.
    """
    F = projections(f, states, *f_support)
    G = projections(g, states, *g_support)
    kap = np.array([st.kappa for st in states])
    return SmearedSumRules(np.cumsum(F * G / kap).imag, np.cumsum(F * G * kap).imag)
