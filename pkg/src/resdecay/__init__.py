"""Resonance-state expansion of s-wave tunnelling decay.

Poles of the outgoing-wave condition for a piecewise-constant potential give
Gamow states; overlaps with an initial state expand the decaying wave
function and its survival amplitude into exponential and nonexponential parts.
A Crank-Nicolson grid propagator serves as an independent check.
"""

from .decay import (
    ETA,
    DecayModel,
    ErsakSeries,
    ExpansionCoefficients,
    InitialState,
    SurvivalSeries,
    Transition,
    build_model,
    compute_coefficients,
    ersak,
    psi_split,
    survival,
    survival_ne_asymptotic,
    tau0_formula,
    time_grid,
    transition_time,
    wavefunction,
)
from .errors import ResdecayError
from .oracle import GridConfig, compare, evolve
from .poles import (
    ResonancePole,
    ResonanceState,
    SearchBox,
    build_state,
    build_states,
    find_poles,
    smeared_sum_rules,
    verify_closure,
    verify_sum_rules,
    winding_number,
)
from .potential import (
    BarrierShellParams,
    PotentialSpec,
    Segment,
    jost_outgoing,
    make_barrier_shell,
    solve_piecewise,
)
from .specfun import MoshinskyArgs, faddeyeva, moshinsky, moshinsky_asymptotic, moshinsky_reflect

__version__ = "0.1.0"
