import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resdecay.decay import (
    ETA,
    ExpansionCoefficients,
    InitialState,
    amplitude_direct,
    amplitude_exp,
    amplitude_nonexp,
    amplitude_nonexp_asymptotic,
    compute_coefficients,
    ersak,
    interference_term,
    leading_cancellation,
    psi_split,
    survival,
    survival_ne_asymptotic,
    tau0_formula,
    time_grid,
    transition_time,
    wavefunction,
)
from resdecay.errors import (
    ImproperPoleError,
    InvalidParameterError,
    NoTransitionError,
    OutOfRangeError,
)
from resdecay.poles import projection_quad

TAU = 2.8371223531806096
C1 = 0.9484805385937105 - 0.013365188345132974j


def test_quantum_box_state():
    psi = InitialState.quantum_box(1.0)
    assert psi(0.5) == pytest.approx(np.sqrt(2.0))
    assert psi(1.2) == 0.0
    with pytest.raises(InvalidParameterError):
        InitialState(lambda r: np.ones_like(r), support=(0.0, 2.0))
    with pytest.raises(InvalidParameterError):
        InitialState.quantum_box(0.0)


def test_first_strength(coeffs):
    assert coeffs.C[0] == pytest.approx(C1, abs=1e-12)
    assert (coeffs.C[0] ** 2).real == pytest.approx(0.899, abs=0.002)


def test_real_state_has_equal_coefficients(coeffs):
    assert np.array_equal(coeffs.C, coeffs.C_bar)


def test_closed_form_overlaps_match_quadrature(model):
    for i in (0, 1, 10, 120, 199):
        ref = projection_quad(model.initial, model.states[i], 0.0, 1.0)
        assert abs(ref - model.coeffs.C[i]) < 1e-10


def test_general_state_uses_quadrature(model):
    amp = np.sqrt(2.0)
    generic = InitialState(lambda r: amp * np.sin(np.pi * np.asarray(r)), "sine", (0.0, 1.0))
    c = compute_coefficients(generic, model.states[:40])
    assert np.max(np.abs(c.C - model.coeffs.C[:40])) < 1e-10


def test_complex_state_conjugate_coefficients(model):
    amp = np.sqrt(2.0)
    cplx = InitialState(lambda r: amp * np.sin(np.pi * np.asarray(r)) * np.exp(0.7j * np.asarray(r)),
                        "chirped", (0.0, 1.0), real=False)
    c = compute_coefficients(cplx, model.states[:5])
    assert not np.allclose(c.C, c.C_bar)


def test_strength_sum(coeffs):
    assert abs(coeffs.truncated(50).deficit) < 1e-3
    assert coeffs.truncated(1).deficit == pytest.approx(0.1006, abs=5e-4)
    env = [abs(coeffs.truncated(n).deficit) for n in (1, 2, 5, 10, 50, 200)]
    assert all(b < a for a, b in zip(env, env[1:]))


def test_truncation_bounds(coeffs):
    with pytest.raises(InvalidParameterError):
        coeffs.truncated(0)
    with pytest.raises(InvalidParameterError):
        coeffs.truncated(coeffs.N + 1)


def test_tau(coeffs):
    assert coeffs.tau == pytest.approx(TAU, rel=1e-12)


# ---------------------------------------------------------------- wave function

def test_wavefunction_initial_time(model):
    r = np.linspace(0.05, 0.95, 7)
    psi = wavefunction(r, 0.0, model.coeffs, model.states, model.initial)
    np.testing.assert_allclose(psi, model.initial(r))
    recon = wavefunction(r, 0.0, model.coeffs.truncated(30), model.states)
    assert np.max(np.abs(recon - model.initial(r))) < 5e-2


def test_wavefunction_continuous_at_cutoff(model):
    eps = 1e-9
    inner = wavefunction(1.3 - eps, TAU, model.coeffs, model.states)
    outer = wavefunction(1.3 + eps, TAU, model.coeffs, model.states)
    assert abs(inner - outer) < 1e-6


def test_wavefunction_rejects_negative_time(model):
    with pytest.raises(InvalidParameterError):
        wavefunction(0.5, -1.0, model.coeffs, model.states)


def test_wavefunction_norm_inside_decays(model):
    r = np.linspace(0, 1.3, 261)
    dens = [np.trapezoid(np.abs(wavefunction(r, t, model.coeffs, model.states)) ** 2, r)
            for t in (TAU, 3 * TAU)]
    assert dens[1] < dens[0] < 1.0


def test_split_sums_to_wavefunction(model):
    rng = np.random.default_rng(2)
    for _ in range(100):
        r = rng.uniform(0, 1.3)
        t = TAU * 10 ** rng.uniform(-2, 2)
        e, ne = psi_split(r, t, model.coeffs, model.states)
        full = wavefunction(r, t, model.coeffs, model.states)
        assert abs(e + ne - full) < 1e-10


def test_split_eras(model):
    e5, ne5 = psi_split(0.5, 5 * TAU, model.coeffs, model.states)
    assert abs(ne5) < 1e-2 * abs(e5)
    e50, ne50 = psi_split(0.5, 50 * TAU, model.coeffs, model.states)
    assert abs(ne50) > abs(e50)


def test_split_rejects_outside(model):
    with pytest.raises(InvalidParameterError):
        psi_split(1.5, 1.0, model.coeffs, model.states)


def _improper(coeffs):
    k = coeffs.kappa.copy()
    k[1] = 1.0 - 2.0j
    return ExpansionCoefficients(coeffs.C, coeffs.C_bar, k)


def test_improper_poles_rejected(coeffs):
    bad = _improper(coeffs)
    with pytest.raises(ImproperPoleError):
        survival(bad, [1.0])
    with pytest.raises(ImproperPoleError):
        amplitude_nonexp(bad, 1.0)


# ---------------------------------------------------------------- survival

def test_survival_at_zero(coeffs):
    s = survival(coeffs, [0.0])
    assert s.A[0] == pytest.approx(1.0, abs=1e-3)
    assert abs(s.A[0].imag) < 1e-15


def test_survival_bounds_and_values(coeffs):
    t = time_grid(TAU, 0.01, 100, 500)
    s = survival(coeffs, t)
    assert np.all(s.S <= 1 + 1e-9)
    assert np.all(np.diff(s.t_lifetimes) > 0)
    vals = survival(coeffs, [5 * TAU, 28 * TAU]).S
    assert vals[0] == pytest.approx(5.45574361e-3, rel=1e-6)
    assert vals[1] == pytest.approx(7.11368e-13, rel=1e-4)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 2.5))
def test_split_identity(log_t):
    t = TAU * 10.0**log_t
    c = _coeffs()
    s = survival(c, [t])
    assert abs(s.A_e[0] + s.A_ne[0] - amplitude_direct(c, t)) < 1e-10


_CACHE = {}


def _coeffs():
    if "c" not in _CACHE:
        from resdecay.decay import build_model
        _CACHE["c"] = build_model().coeffs
    return _CACHE["c"]


def test_cross_term_definition(coeffs):
    s = survival(coeffs, [30 * TAU])
    assert s.cross[0] == pytest.approx(2 * (np.conj(s.A_e[0]) * s.A_ne[0]).real)
    assert s.S[0] == pytest.approx(s.S_e[0] + s.S_ne[0] + s.cross[0], rel=1e-10)


def test_eta_constant():
    assert ETA == pytest.approx(1 / np.sqrt(4j * np.pi))
    assert abs(ETA) ** 2 == pytest.approx(1 / (4 * np.pi))


def test_asymptote_matches_exact(coeffs):
    t = TAU * np.array([60.0, 100.0, 200.0])
    ratio = np.abs(survival_ne_asymptotic(coeffs, t) / amplitude_nonexp(coeffs, t))
    assert np.all(np.abs(ratio - 1) < 1e-4)


def test_asymptote_range_check(coeffs):
    with pytest.raises(OutOfRangeError):
        survival_ne_asymptotic(coeffs, 0.1)
    with pytest.raises(OutOfRangeError):
        amplitude_nonexp_asymptotic(coeffs, 0.1)


def test_leading_term_cancels(coeffs):
    # the 1/z term survives only through the truncation residual of Im sum w/kappa
    lead, sub = leading_cancellation(coeffs, 60 * TAU)
    assert abs(lead) < 1e-4 * abs(sub)
    lead1, sub1 = leading_cancellation(coeffs.truncated(10), 60 * TAU)
    assert abs(lead1) / abs(sub1) > 100 * abs(lead) / abs(sub)


@pytest.mark.xfail(strict=True, reason="needs thousands of poles; ratio is 3e-5 at N=200; see README, Known limitations")
def test_leading_term_cancels_to_1e8(coeffs):
    lead, sub = leading_cancellation(coeffs, 60 * TAU)
    assert abs(lead) < 1e-8 * abs(sub)


def test_interference_term(coeffs):
    t = 30 * TAU
    cross = interference_term(coeffs, t)
    exact = survival(coeffs, [t]).cross[0]
    assert cross == pytest.approx(exact, rel=1e-2)


def test_amplitude_exp_is_pole_sum(coeffs):
    t = 2.0
    assert amplitude_exp(coeffs, t) == pytest.approx(np.sum(coeffs.weights * np.exp(-1j * coeffs.kappa**2 * t)))


# ---------------------------------------------------------------- transition and Ersak

def test_tau0_formula():
    assert tau0_formula(19.4) == pytest.approx(28.29, abs=0.005)
    assert tau0_formula(np.e * 19.4) - tau0_formula(19.4) == pytest.approx(5.41, abs=1e-12)


def test_transition_time(coeffs):
    tr = transition_time(coeffs)
    assert 26 <= tr.t0_lifetimes <= 31
    assert tr.R == pytest.approx(19.4, abs=0.05)
    assert tr.tau0_formula == pytest.approx(28.30, abs=0.01)
    s = survival(coeffs, [tr.t0])
    assert s.S_e[0] == pytest.approx(s.S_ne[0], rel=1e-8)


def test_no_transition(coeffs):
    with pytest.raises(NoTransitionError):
        transition_time(coeffs, window=(1.0, 10.0))
    with pytest.raises(InvalidParameterError):
        transition_time(ExpansionCoefficients(coeffs.C * 0.5, coeffs.C_bar * 0.5, coeffs.kappa))


def test_ersak_zero_and_errors(coeffs):
    e = ersak(coeffs, [0.0, 10.0], 1000.0)
    assert abs(e.I[0]) < 1e-9
    with pytest.raises(InvalidParameterError):
        ersak(coeffs, [1.0], 0.0)


def test_ersak_small_against_nonexponential(coeffs):
    t = time_grid(TAU, 20, 60, 200)
    ratio = ersak(coeffs, t, 1000.0).J / survival(coeffs, t).S_ne
    assert np.max(ratio) < 1e-2


def test_time_grid():
    g = time_grid(2.0, 0.5, 4.0, 4)
    assert g == pytest.approx([1.0, 2.0, 4.0, 8.0])
    assert time_grid(2.0, 0.0, 1.0, 3, "linear") == pytest.approx([0.0, 1.0, 2.0])
    for bad in ((1.0, 0.5, 10), (0.0, 1.0, 10), (0.1, 1.0, 1)):
        with pytest.raises(InvalidParameterError):
            time_grid(1.0, *bad)
    with pytest.raises(InvalidParameterError):
        time_grid(1.0, 0.1, 1.0, 5, "cubic")
