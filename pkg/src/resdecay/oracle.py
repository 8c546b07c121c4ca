"""Grid time evolution used as an independent check of the pole expansion.

Crank-Nicolson on a uniform radial grid with ``u(0) = u(R_max) = 0`` and an
optional quadratic complex absorbing potential in ``[absorber_start, R_max]``.
Nothing here touches poles or special functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .errors import ConfigError
from .potential import PotentialSpec


@dataclass(frozen=True)
class GridConfig:
    dr: float = 0.005
    dt: float = 0.001
    r_max: float = 60.0
    absorber_start: float | None = 10.0
    absorber_strength: float = 30.0
    total_time: float = 30.0
    record_every: int = 1
    reference_energy: float | None = None

    def doubled_layer(self) -> "GridConfig":
        """Same absorber profile on ``[absorber_start, r_max]``, continued over twice the layer.

        Differencing against this configuration isolates flux returning from
        the outer wall.
        """
        if self.absorber_start is None:
            return replace(self, r_max=2 * self.r_max)
        layer = self.r_max - self.absorber_start
        return replace(self, r_max=self.absorber_start + 2 * layer,
                       absorber_strength=4 * self.absorber_strength)

    def validate(self, spec: PotentialSpec):
        for name in ("dr", "dt", "r_max", "total_time"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"grid {name} must be positive")
        a = spec.cutoff
        if self.r_max <= a:
            raise ConfigError("r_max must exceed the potential cutoff")
        if self.absorber_start is not None and not a < self.absorber_start < self.r_max:
            raise ConfigError("absorber must start between the cutoff and r_max")
        for x in spec.interfaces:
            if abs(x / self.dr - round(x / self.dr)) > 1e-9:
                raise ConfigError(f"interface r={x} does not fall on a grid node (dr={self.dr})")
        E = self.reference_energy
        if E is not None and E > 0:
            wavelength = 2 * np.pi / np.sqrt(E)
            if wavelength / self.dr < 20:
                raise ConfigError(f"dr={self.dr} gives fewer than 20 points per wavelength at E={E}")
            if E * self.dt > 0.05:
                raise ConfigError(f"dt={self.dt} too coarse for E={E} (E dt > 0.05)")
            if self.absorber_start is None:
                travel = 2 * np.sqrt(E) * self.total_time
                if 2 * (self.r_max - a) < travel:
                    raise ConfigError("reflected flux returns within total_time; enlarge r_max or add an absorber")


@dataclass
class EvolutionResult:
    r: np.ndarray
    times: np.ndarray
    survival: np.ndarray
    norm: np.ndarray
    probes: np.ndarray
    probe_radii: tuple[float, ...]
    snapshots: dict = field(default_factory=dict)
    final: np.ndarray | None = None

    @property
    def amplitude_density(self) -> np.ndarray:
        """|Psi(r_probe, t)|^2, one column per probe radius."""
        return np.abs(self.probes) ** 2


def _node_potential(spec: PotentialSpec, r: np.ndarray) -> np.ndarray:
    V = spec(r)
    # nodes on an interface get the mean of both sides
    for left, right in zip(spec.segments, spec.segments[1:]):
        at = np.isclose(r, left.r_hi, rtol=0, atol=1e-12)
        V[at] = 0.5 * (left.height + right.height)
    at = np.isclose(r, spec.cutoff, rtol=0, atol=1e-12)
    V[at] = 0.5 * spec.segments[-1].height
    return V


def evolve(spec: PotentialSpec, state, cfg: GridConfig, probe_radii: Sequence[float] = (),
           snapshot_times: Sequence[float] = ()) -> EvolutionResult:
    """Propagate ``state`` and record the survival probability at every ``record_every`` step.

    The survival probability is ``|int_0^a Psi0 Psi(t) dr|^2`` with the grid
    initial state normalised on the grid.
    """
    cfg.validate(spec)
    n = int(round(cfg.r_max / cfg.dr))
    r = cfg.dr * np.arange(1, n)  # interior nodes
    V = _node_potential(spec, r).astype(complex)
    if cfg.absorber_start is not None:
        ramp = np.clip((r - cfg.absorber_start) / (cfg.r_max - cfg.absorber_start), 0.0, None)
        V = V - 1j * cfg.absorber_strength * ramp**2

    off = -np.ones(r.size - 1) / cfg.dr**2
    H = sparse.diags([off, 2.0 / cfg.dr**2 + V, off], [-1, 0, 1], format="csc")
    eye = sparse.identity(r.size, format="csc", dtype=complex)
    lhs = splu((eye + 0.5j * cfg.dt * H).tocsc())
    rhs = (eye - 0.5j * cfg.dt * H).tocsr()

    psi0 = np.asarray(state(r), dtype=complex)
    psi0 = psi0 / np.sqrt(np.sum(np.abs(psi0) ** 2) * cfg.dr)
    inner = r <= spec.cutoff + 1e-12
    ref = np.conj(psi0[inner]) * cfg.dr

    probe_idx = [int(round(p / cfg.dr)) - 1 for p in probe_radii]
    steps = int(round(cfg.total_time / cfg.dt))
    snap_steps = {int(round(ts / cfg.dt)): ts for ts in snapshot_times}
    n_rec = steps // cfg.record_every + 1
    times = np.empty(n_rec)
    surv = np.empty(n_rec)
    norm = np.empty(n_rec)
    probes = np.empty((n_rec, len(probe_idx)), dtype=complex)
    snapshots = {}

    psi = psi0.copy()
    j = 0
    for step in range(steps + 1):
        if step % cfg.record_every == 0:
            times[j] = step * cfg.dt
            surv[j] = abs(np.dot(ref, psi[inner])) ** 2
            norm[j] = np.sum(np.abs(psi) ** 2) * cfg.dr
            probes[j] = psi[probe_idx] if probe_idx else ()
            j += 1
        if step in snap_steps:
            snapshots[snap_steps[step]] = psi.copy()
        if step < steps:
            psi = lhs.solve(rhs @ psi)
    return EvolutionResult(r, times[:j], surv[:j], norm[:j], probes[:j], tuple(probe_radii), snapshots, psi)


@dataclass(frozen=True)
class ComparisonReport:
    t_lo: float
    t_hi: float
    max_deviation: float
    rms_deviation: float
    n_points: int


def compare(t_a, s_a, t_b, s_b) -> ComparisonReport:
    """Deviation of two sampled survival curves on their common window.

    The second curve is interpolated onto the first curve's times inside the
    overlap.
    """
    t_a, s_a, t_b, s_b = map(np.asarray, (t_a, s_a, t_b, s_b))
    lo, hi = max(t_a.min(), t_b.min()), min(t_a.max(), t_b.max())
    if not hi > lo:
        raise ConfigError("survival series have disjoint time windows")
    sel = (t_a >= lo) & (t_a <= hi)
    dev = np.abs(s_a[sel] - np.interp(t_a[sel], t_b, s_b))
    return ComparisonReport(float(lo), float(hi), float(dev.max()), float(np.sqrt(np.mean(dev**2))), int(sel.sum()))


def compare_series(series_expansion, series_oracle: EvolutionResult) -> ComparisonReport:
    return compare(series_expansion.t, series_expansion.S, series_oracle.times, series_oracle.survival)
