"""Resonance expansion of the decaying state and its survival amplitude.

Pole sums run over the stored fourth-quadrant poles; each is paired with its
mirror ``-conj(kappa)`` whose state is ``conj(u)``.  With ``w_n = C_n Cbar_n``

    A_e(t)  = sum w_n exp(-i kappa_n^2 t)
    A_ne(t) = -sum [w_n M(-y0_n) - conj(w_n) M(y0_{-n})]
    A(t)    = A_e(t) + A_ne(t)

and at long times A_ne -> -i eta Im[sum w_n / kappa_n^3] t^{-3/2},
eta = (4 pi i)^{-1/2}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize, special

from .errors import (
    AccuracyError,
    ImproperPoleError,
    InvalidParameterError,
    NoTransitionError,
    OutOfRangeError,
)
from .poles import ResonancePole, ResonanceState, build_states, find_poles, projection_quad, projections
from .potential import BarrierShellParams, PotentialSpec, make_barrier_shell
from .specfun import ROT, moshinsky_array, moshinsky_of_y, moshinsky_y0

ETA = 1.0 / np.sqrt(4j * np.pi)
SQRT_PI = np.sqrt(np.pi)


# --------------------------------------------------------------------------
# initial states

@dataclass(frozen=True)
class InitialState:
    """Initial wave function supported on ``support``.

    ``box_width`` is set only for the quantum-box state, which enables
    closed-form overlaps.
    """

    evaluator: Callable
    descriptor: str = "custom"
    support: tuple[float, float] = (0.0, 1.0)
    box_width: float | None = None
    real: bool = True
    norm_tol: float = 1e-10

    def __post_init__(self):
        lo, hi = self.support
        norm = integrate.quad(lambda r: abs(self.evaluator(r)) ** 2, lo, hi, limit=400)[0]
        if abs(norm - 1.0) > self.norm_tol:
            raise InvalidParameterError(f"initial state norm {norm:.12f} differs from 1")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        lo, hi = self.support
        inside = (r >= lo) & (r <= hi)
        vals = np.where(inside, self.evaluator(np.clip(r, lo, hi)), 0.0)
        return vals[()] if vals.ndim == 0 else vals

    @classmethod
    def quantum_box(cls, w: float) -> "InitialState":
        """sqrt(2/w) sin(pi r / w) on [0, w]."""
        if not w > 0:
            raise InvalidParameterError("box width must be positive")
        amp = np.sqrt(2.0 / w)
        return cls(lambda r: amp * np.sin(np.pi * np.asarray(r) / w), f"quantum-box(w={w:g})",
                   (0.0, float(w)), box_width=float(w))


def _phi(beta, h):
    """int_0^h exp(i beta x) dx, stable as beta -> 0."""
    z = 1j * beta * h
    if abs(z) < 1e-8:
        return h * (1 + 0.5 * z)
    return np.expm1(z) / (1j * beta)


def _box_overlap(w: float, state: ResonanceState) -> complex:
    """Closed-form ``int_0^w sqrt(2/w) sin(pi r/w) u(r) dr``."""
    p = np.pi / w
    sol = state.solution
    total = 0.0 + 0.0j
    for s, q, (A, B) in zip(sol.spec.segments, sol.q, sol.amplitudes):
        lo, hi = s.r_lo, min(s.r_hi, w)
        if hi <= lo:
            break
        h = hi - lo
        for amp, sig in ((A, q), (B, -q)):
            # sin(p r) = (e^{ipr} - e^{-ipr}) / 2i with r = lo + x
            total += amp * (np.exp(1j * p * lo) * _phi(p + sig, h) - np.exp(-1j * p * lo) * _phi(sig - p, h)) / 2j
    if w > sol.spec.cutoff:
        raise InvalidParameterError("quantum box extends beyond the potential cutoff")
    return np.sqrt(2.0 / w) * total


@dataclass(frozen=True)
class ExpansionCoefficients:
    """Overlaps ``C_n = int Psi0 u_n`` and ``Cbar_n = int conj(Psi0) u_n``."""

    C: np.ndarray
    C_bar: np.ndarray
    kappa: np.ndarray
    poles: tuple[ResonancePole, ...] = field(repr=False, default=())

    @property
    def N(self) -> int:
        return len(self.C)

    @property
    def weights(self) -> np.ndarray:
        return self.C * self.C_bar

    @property
    def strengths(self) -> np.ndarray:
        return self.weights.real

    @property
    def strength_sum(self) -> float:
        return float(np.sum(self.strengths))

    @property
    def deficit(self) -> float:
        return 1.0 - self.strength_sum

    def running_strength(self) -> np.ndarray:
        return np.cumsum(self.strengths)

    def sum_rule_residual(self) -> float:
        """|Im sum w_n / kappa_n|, zero for the complete set."""
        return float(abs(np.sum(self.weights / self.kappa).imag))

    def truncated(self, n: int) -> "ExpansionCoefficients":
        if not 1 <= n <= self.N:
            raise InvalidParameterError(f"truncation must lie in [1, {self.N}]")
        return ExpansionCoefficients(self.C[:n], self.C_bar[:n], self.kappa[:n], self.poles[:n])

    @property
    def tau(self) -> float:
        """Lifetime 1/Gamma_1 of the first pole."""
        k = self.kappa[0]
        return 1.0 / (-2.0 * (k * k).imag)


def compute_coefficients(state: InitialState, states: Sequence[ResonanceState],
                         quad_tol: float = 1e-10) -> ExpansionCoefficients:
    """Overlaps with every resonance state (closed form for the quantum box)."""
    if not states:
        raise InvalidParameterError("no resonance states given")
    a = states[0].solution.spec.cutoff
    if state.support[1] > a + 1e-12 or state.support[0] < 0:
        raise InvalidParameterError("initial state must be supported inside [0, a]")
    kappa = np.array([st.kappa for st in states])
    poles = tuple(st.pole for st in states)
    if state.box_width is not None:
        C = np.array([_box_overlap(state.box_width, st) for st in states])
    else:
        C = projections(state, states, *state.support)
        # spot-check the fixed rule against adaptive quadrature on the slowest and fastest states
        for i in {0, len(states) - 1}:
            ref = projection_quad(state, states[i], *state.support)
            if abs(ref - C[i]) > quad_tol * max(1.0, abs(ref)):
                raise AccuracyError(f"overlap quadrature for state {i + 1} off by {abs(ref - C[i]):.2e}")
    if state.real:
        C_bar = C.copy()
    else:
        C_bar = projections(lambda r: np.conj(state(r)), states, *state.support)
    return ExpansionCoefficients(C, C_bar, kappa, poles)


# --------------------------------------------------------------------------
# bundled model

@dataclass(frozen=True)
class DecayModel:
    spec: PotentialSpec
    poles: tuple[ResonancePole, ...]
    states: tuple[ResonanceState, ...]
    initial: InitialState
    coeffs: ExpansionCoefficients

    @property
    def tau(self) -> float:
        return self.coeffs.tau

    def truncated(self, n: int) -> "DecayModel":
        return DecayModel(self.spec, self.poles[:n], self.states[:n], self.initial, self.coeffs.truncated(n))


def build_model(params: BarrierShellParams | PotentialSpec | None = None, n_poles: int = 200,
                initial: InitialState | None = None, search_box=None) -> DecayModel:
    """Poles, states and coefficients for a potential and initial state.

    Defaults reproduce the barrier-shell example (V=30, w=1, b=0.3) with the
    quantum-box state in the well.
    """
    if params is None:
        params = BarrierShellParams()
    if isinstance(params, BarrierShellParams):
        spec = make_barrier_shell(params)
        initial = initial or InitialState.quantum_box(params.well_width)
    else:
        spec = params
        if initial is None:
            raise InvalidParameterError("an initial state is required for a general potential")
    poles = find_poles(spec, n_poles, search_box)[:n_poles]
    states = build_states(spec, poles)
    coeffs = compute_coefficients(initial, states)
    return DecayModel(spec, tuple(poles), tuple(states), initial, coeffs)


# --------------------------------------------------------------------------
# wave function

def _require_proper(kappa):
    bad = np.nonzero(~(kappa.real > -kappa.imag))[0]
    if bad.size:
        raise ImproperPoleError(f"poles {bad + 1} are improper (Re k <= -Im k)")


def _state_matrix(states, r):
    return np.array([st(r) for st in states])


def wavefunction(r, t: float, coeffs: ExpansionCoefficients, states: Sequence[ResonanceState],
                 initial: InitialState | None = None):
    """Psi(r, t) from the full pole expansion, inside and outside the cutoff.

    At ``t = 0`` the initial state itself is returned when supplied.
    """
    if t < 0:
        raise InvalidParameterError("t must be non-negative")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    states = list(states)[: coeffs.N]
    a = states[0].solution.spec.cutoff
    if t == 0:
        if initial is not None:
            out = initial(r).astype(complex)
        else:
            U = _state_matrix(states, np.minimum(r, a))
            out = (coeffs.C[:, None] * U).real.sum(axis=0).astype(complex)
        return out[0] if out.size == 1 else out
    kap = coeffs.kappa[:, None]
    mirror = -np.conj(kap)
    C, Cb = coeffs.C[:, None], coeffs.C_bar[:, None]
    out = np.zeros(r.shape, dtype=complex)
    inner = r <= a
    if np.any(inner):
        U = _state_matrix(states, r[inner])
        m_plus = moshinsky_array(0.0, kap, t)
        m_minus = moshinsky_array(0.0, mirror, t)
        out[inner] = np.sum(C * U * m_plus + np.conj(Cb) * np.conj(U) * m_minus, axis=0)
    outer = ~inner
    if np.any(outer):
        ua = np.array([st.u_a for st in states])[:, None]
        x = (r[outer] - a)[None, :]
        out[outer] = np.sum(C * ua * moshinsky_array(x, kap, t)
                            + np.conj(Cb) * np.conj(ua) * moshinsky_array(x, mirror, t), axis=0)
    return out[0] if out.size == 1 else out


def psi_split(r, t: float, coeffs: ExpansionCoefficients, states: Sequence[ResonanceState]):
    """Exponential and nonexponential parts of Psi for r <= a."""
    if t < 0:
        raise InvalidParameterError("t must be non-negative")
    _require_proper(coeffs.kappa)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    states = list(states)[: coeffs.N]
    a = states[0].solution.spec.cutoff
    if np.any(r > a):
        raise InvalidParameterError("the exponential split is defined for r <= a")
    U = _state_matrix(states, r)
    kap = coeffs.kappa[:, None]
    C, Cb = coeffs.C[:, None], coeffs.C_bar[:, None]
    psi_e = np.sum(C * U * np.exp(-1j * kap**2 * t), axis=0)
    if t == 0:
        m_minus_y0 = m_mirror = 0.5
    else:
        y0 = moshinsky_y0(kap, t)
        m_minus_y0 = moshinsky_of_y(-y0)
        m_mirror = moshinsky_of_y(moshinsky_y0(-np.conj(kap), t))
    psi_ne = -np.sum(C * U * m_minus_y0 - np.conj(Cb) * np.conj(U) * m_mirror, axis=0)
    if psi_e.size == 1:
        return complex(psi_e[0]), complex(psi_ne[0])
    return psi_e, psi_ne


# --------------------------------------------------------------------------
# survival amplitude

def amplitude_exp(coeffs: ExpansionCoefficients, t):
    t = np.asarray(t, dtype=float)
    phase = np.exp(-1j * np.multiply.outer(t, coeffs.kappa**2))
    return phase @ coeffs.weights


def amplitude_nonexp(coeffs: ExpansionCoefficients, t):
    """Exact nonexponential amplitude from the Moshinsky functions."""
    _require_proper(coeffs.kappa)
    t = np.asarray(t, dtype=float)
    wts = coeffs.weights
    st = np.sqrt(t)[..., None]
    # both arguments lie in the upper half plane for proper poles
    z1 = (1j * ROT) * coeffs.kappa * st
    z2 = (1j * ROT) * np.conj(coeffs.kappa) * st
    terms = wts * special.wofz(z1) - np.conj(wts) * special.wofz(z2)
    return -0.5 * terms.sum(axis=-1)


def amplitude_direct(coeffs: ExpansionCoefficients, t):
    """A(t) summed term by term as sum w M(y0_n) + conj(w) M(y0_{-n}).

    M(y0_n) is taken straight from ``scipy.special.wofz`` in the lower half
    plane, independently of the exponential split.
    """
    t = np.asarray(t, dtype=float)
    wts = coeffs.weights
    st = np.sqrt(t)[..., None]
    y0 = -ROT * coeffs.kappa * st
    y0m = ROT * np.conj(coeffs.kappa) * st
    terms = wts * special.wofz(1j * y0) + np.conj(wts) * special.wofz(1j * y0m)
    return 0.5 * terms.sum(axis=-1)


def amplitude_nonexp_asymptotic(coeffs: ExpansionCoefficients, t, check_range: bool = True):
    t = np.asarray(t, dtype=float)
    if check_range and np.any(np.abs(coeffs.kappa[0]) * np.sqrt(t) < 3.0):
        raise OutOfRangeError("t too small for the long-time expansion (|y0| < 3)")
    c = np.sum(coeffs.weights / coeffs.kappa**3).imag
    return -1j * ETA * c * t ** -1.5


def survival_ne_asymptotic(coeffs: ExpansionCoefficients, t):
    """Leading long-time nonexponential amplitude, ``-i eta Im[sum w/kappa^3] t^-3/2``."""
    _require_proper(coeffs.kappa)
    kmin = np.min(np.abs(coeffs.kappa))
    if np.any(kmin * np.sqrt(np.asarray(t, dtype=float)) < 3.0):
        raise OutOfRangeError("t too small for the long-time expansion (|y0| < 3)")
    return amplitude_nonexp_asymptotic(coeffs, t, check_range=False)


def leading_cancellation(coeffs: ExpansionCoefficients, t: float) -> tuple[complex, complex]:
    """(leading 1/z contribution, next 1/z^3 contribution) to A_ne at time ``t``.

    The first vanishes for a complete pole set; the second is the asymptote.
    """
    w, k = coeffs.weights, coeffs.kappa
    pref = 1.0 / (2 * SQRT_PI)
    z1, z2 = ROT * k * np.sqrt(t), ROT * np.conj(k) * np.sqrt(t)
    lead = -pref * np.sum(w / z1 - np.conj(w) / z2)
    sub = -pref * np.sum(w * (-0.5 / z1**3) - np.conj(w) * (-0.5 / z2**3))
    return complex(lead), complex(sub)


@dataclass(frozen=True)
class SurvivalSeries:
    t: np.ndarray
    tau: float
    A: np.ndarray
    A_e: np.ndarray
    A_ne: np.ndarray

    eta = ETA

    @property
    def t_lifetimes(self) -> np.ndarray:
        return self.t / self.tau

    @property
    def S(self) -> np.ndarray:
        return np.abs(self.A) ** 2

    @property
    def S_e(self) -> np.ndarray:
        return np.abs(self.A_e) ** 2

    @property
    def S_ne(self) -> np.ndarray:
        return np.abs(self.A_ne) ** 2

    @property
    def cross(self) -> np.ndarray:
        return 2.0 * (np.conj(self.A_e) * self.A_ne).real


def survival(coeffs: ExpansionCoefficients, t_grid) -> SurvivalSeries:
    """Survival amplitude and its exact exponential/nonexponential split on ``t_grid``."""
    t = np.asarray(t_grid, dtype=float)
    if np.any(t < 0):
        raise InvalidParameterError("times must be non-negative")
    _require_proper(coeffs.kappa)
    A_e = amplitude_exp(coeffs, t)
    A_ne = np.empty_like(A_e)
    zero = t == 0
    A_ne[zero] = -1j * np.sum(coeffs.weights).imag
    if np.any(~zero):
        A_ne[~zero] = amplitude_nonexp(coeffs, t[~zero])
    return SurvivalSeries(t, coeffs.tau, A_e + A_ne, A_e, A_ne)


def interference_term(coeffs: ExpansionCoefficients, t):
    """2 Re[conj(A_e) A_ne] with the long-time form of A_ne."""
    return 2.0 * (np.conj(amplitude_exp(coeffs, t)) * survival_ne_asymptotic(coeffs, t)).real


def survival_amplitude(coeffs: ExpansionCoefficients, t):
    t = np.asarray(t, dtype=float)
    out = amplitude_exp(coeffs, t).astype(complex)
    pos = t > 0
    ne = np.full(t.shape, -1j * np.sum(coeffs.weights).imag, dtype=complex)
    if np.any(pos):
        ne[pos] = amplitude_nonexp(coeffs, t[pos])
    return out + ne


@dataclass(frozen=True)
class ErsakSeries:
    T: float
    t: np.ndarray
    I: np.ndarray

    @property
    def J(self) -> np.ndarray:
        return np.abs(self.I) ** 2


def ersak(coeffs: ExpansionCoefficients, t_grid, T: float) -> ErsakSeries:
    """Regeneration term I(t, T) = A(t + T) - A(t) A(T)."""
    if not T > 0:
        raise InvalidParameterError("Ersak T must be positive")
    t = np.asarray(t_grid, dtype=float)
    A_t = survival_amplitude(coeffs, t)
    A_tT = survival_amplitude(coeffs, t + T)
    A_T = survival_amplitude(coeffs, np.array([T]))[0]
    return ErsakSeries(float(T), t, A_tT - A_t * A_T)


# --------------------------------------------------------------------------
# transition

def tau0_formula(R: float) -> float:
    """Single-level estimate of the transition time in lifetimes."""
    return 5.41 * np.log(R) + 12.25


@dataclass(frozen=True)
class Transition:
    t0: float
    tau: float
    R: float
    tau0_formula: float

    @property
    def t0_lifetimes(self) -> float:
        return self.t0 / self.tau


def transition_time(coeffs: ExpansionCoefficients, window=(1.0, 200.0), points: int = 2000) -> Transition:
    """First time where |A_e|^2 = |A_ne|^2, located by bracketing and Brent's method."""
    if coeffs.strengths[0] <= 0.5:
        raise InvalidParameterError("first resonance does not dominate (Re C1 Cbar1 <= 0.5)")
    tau = coeffs.tau
    t = tau * np.geomspace(window[0], window[1], points)

    def gap(tt):
        return np.log(np.abs(amplitude_exp(coeffs, tt)) ** 2) - np.log(np.abs(amplitude_nonexp(coeffs, tt)) ** 2)

    g = gap(t)
    idx = np.nonzero(np.sign(g[1:]) != np.sign(g[:-1]))[0]
    if idx.size == 0:
        raise NoTransitionError(f"no exponential/nonexponential crossing in {window} lifetimes")
    i = idx[0]
    t0 = optimize.brentq(lambda x: float(gap(np.array([x]))[0]), t[i], t[i + 1], xtol=1e-12, rtol=1e-12)
    k1 = coeffs.kappa[0]
    R = (k1 * k1).real / (-2 * (k1 * k1).imag)
    return Transition(float(t0), tau, float(R), float(tau0_formula(R)))


def time_grid(tau: float, t_min: float, t_max: float, points: int, spacing: str = "geometric") -> np.ndarray:
    """Times in absolute units for a window given in lifetimes."""
    if not t_max > t_min or t_min < 0 or points < 2:
        raise InvalidParameterError("need 0 <= t_min < t_max and at least 2 points")
    if spacing == "geometric":
        if t_min == 0:
            raise InvalidParameterError("geometric spacing needs t_min > 0")
        return tau * np.geomspace(t_min, t_max, points)
    if spacing == "linear":
        return tau * np.linspace(t_min, t_max, points)
    raise InvalidParameterError(f"unknown spacing {spacing!r}")
