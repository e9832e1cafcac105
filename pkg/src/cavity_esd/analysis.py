"""Negativity time traces, sudden-death detection and drive sweeps."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import minimize_scalar

from . import atom_field as af
from . import two_atom as ta

ZERO_TOL = 1e-12
DEFAULT_REFINE_TOL = 1e-9
DRIVE_TOL = 1e-4


class BracketInvalidError(ValueError):
    """The critical-drive search was not given a valid bracket."""


@dataclass(frozen=True)
class FockScenario:
    params: af.DrivenJCParams
    n: int = 0

    def negativity(self, t):
        frame = af.dressed_frame(self.params)
        alpha, beta, _ = af.amplitudes(frame, self.n, t)
        n = np.abs(alpha * beta)
        return n, np.log2(1.0 + 2.0 * n)

    def margin(self, t):
        return self.negativity(t)[0]

    def with_drive(self, lam: float) -> "FockScenario":
        return dataclasses.replace(self, params=dataclasses.replace(self.params, lam=lam))


@dataclass(frozen=True)
class ThermalScenario:
    params: af.DrivenJCParams
    field: af.ThermalFieldSpec

    def negativity(self, t):
        n = af.thermal_negativity(self.params, self.field, t)
        return n, np.log2(1.0 + 2.0 * n)

    def margin(self, t):
        return af.thermal_margin(self.params, self.field, t)

    def with_drive(self, lam: float) -> "ThermalScenario":
        return dataclasses.replace(self, params=dataclasses.replace(self.params, lam=lam))


@dataclass(frozen=True)
class TwoAtomScenario:
    """Two identical driven atoms prepared in an EWL state."""

    params: af.DrivenJCParams
    state: ta.EWLSpec

    def evolved(self, t) -> ta.XState:
        ch = ta.DampingChannel.at(self.params, t)
        return ta.evolve_pair(ta.ewl_state(self.state), ch, ch)

    def negativity(self, t):
        return ta.x_log_negativity(self.evolved(t))

    def margin(self, t):
        return ta.x_margin(self.evolved(t))

    def with_drive(self, lam: float, omega_c: float | None = None) -> "TwoAtomScenario":
        changes = {"lam": lam}
        if omega_c is not None:
            changes["omega_c"] = omega_c
        return dataclasses.replace(self, params=dataclasses.replace(self.params, **changes))

    def with_kind(self, kind) -> "TwoAtomScenario":
        return dataclasses.replace(self, state=dataclasses.replace(self.state, kind=ta.EWLKind(kind)))


Scenario = Union[FockScenario, ThermalScenario, TwoAtomScenario]


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    t_end: float
    steps: int

    def __post_init__(self):
        if not (0 <= self.t_start < self.t_end):
            raise ValueError(f"need 0 <= t_start < t_end, got [{self.t_start}, {self.t_end}]")
        if self.steps < 2:
            raise ValueError(f"need at least 2 steps, got {self.steps}")

    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.steps)

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / (self.steps - 1)


@dataclass(frozen=True)
class NegativityTrace:
    grid: TimeGrid
    N: np.ndarray
    E: np.ndarray
    scenario: Scenario

    @property
    def t(self) -> np.ndarray:
        return self.grid.times()


@dataclass(frozen=True)
class EsdEvent:
    death_time: float
    revival_time: float = math.inf

    @property
    def open_ended(self) -> bool:
        return math.isinf(self.revival_time)

    def duration(self, horizon_end: float = math.inf) -> float:
        return min(self.revival_time, horizon_end) - self.death_time


def negativity_trace(scenario: Scenario, grid: TimeGrid) -> NegativityTrace:
    n, e = scenario.negativity(grid.times())
    n = np.broadcast_to(np.asarray(n, dtype=float), (grid.steps,)).copy()
    e = np.broadcast_to(np.asarray(e, dtype=float), (grid.steps,)).copy()
    return NegativityTrace(grid, n, e, scenario)


def _dark(scenario: Scenario, t):
    return np.asarray(scenario.negativity(t)[0]) <= ZERO_TOL


def _refine(scenario: Scenario, lo: float, hi: float, dark_at_hi: bool, tol: float) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if bool(_dark(scenario, mid)) == dark_at_hi:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _separable_inside(scenario: Scenario, t: np.ndarray, start: float, stop: float) -> bool:
    # a dark period must contain points with a strictly negative margin;
    # otherwise it is an isolated touching zero of the negativity
    probe = t[(t > start) & (t < stop)]
    probe = np.append(probe, 0.5 * (start + stop))
    return bool(np.any(np.asarray(scenario.margin(probe)) < -ZERO_TOL))


def esd_events(trace: NegativityTrace, refine_tol: float = DEFAULT_REFINE_TOL) -> list[EsdEvent]:
    """Dark periods of a trace, with edges refined by bisection.

    A sample is dark when its negativity is at most ``ZERO_TOL``. Each
    grid-level change is bisected on the scenario down to ``refine_tol``.
    Stretches where the negativity only touches zero without the state
    becoming strictly separable are discarded. Detection happens on the
    trace grid, so sample at least ~100 points per oscillation. A trace
    that starts dark has no death transition and its leading dark stretch
    is skipped; a dark period still open at the end of the grid is
    reported with an infinite revival time.
    """
    t = trace.t
    scenario = trace.scenario
    dark = trace.N <= ZERO_TOL
    end = float(t[-1])
    events: list[EsdEvent] = []
    death = None
    for i in range(1, len(t)):
        if dark[i] == dark[i - 1]:
            continue
        edge = _refine(scenario, float(t[i - 1]), float(t[i]), bool(dark[i]), refine_tol)
        if dark[i]:
            death = edge
        elif death is not None:
            if _separable_inside(scenario, t, death, edge):
                events.append(EsdEvent(death, edge))
            death = None
    if death is not None and _separable_inside(scenario, t, death, end):
        events.append(EsdEvent(death))
    return events


def dark_time(events: list[EsdEvent], horizon_end: float) -> float:
    """Total dark-period length, clipping open-ended periods at ``horizon_end``."""
    return sum(ev.duration(horizon_end) for ev in events)


def min_margin(scenario: Scenario, horizon: TimeGrid) -> float:
    """Minimum of the separability margin over the horizon.

    The grid minimum is polished by a bounded scalar search around each
    interior local minimum, so narrow dips between samples are resolved.
    """
    t = horizon.times()
    m = np.asarray(scenario.margin(t), dtype=float)
    best = float(m.min())
    interior = np.nonzero((m[1:-1] <= m[:-2]) & (m[1:-1] <= m[2:]))[0] + 1
    for i in interior:
        res = minimize_scalar(
            lambda s: float(scenario.margin(s)),
            bounds=(t[i - 1], t[i + 1]),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = min(best, float(res.fun))
    return best


def has_esd(scenario: Scenario, horizon: TimeGrid) -> bool:
    return min_margin(scenario, horizon) < -ZERO_TOL


def esd_critical_drive(
    scenario: Scenario,
    horizon: TimeGrid,
    lam_range: tuple[float, float],
    tol: float = DRIVE_TOL,
) -> float:
    """Drive strength where sudden death stops occurring within ``horizon``.

    ``scenario.with_drive(lam)`` generates the family. The low end of
    ``lam_range`` must show a dark period and the high end must not.
    """
    lo, hi = lam_range
    esd_lo = has_esd(scenario.with_drive(lo), horizon)
    esd_hi = has_esd(scenario.with_drive(hi), horizon)
    if not esd_lo or esd_hi:
        raise BracketInvalidError(
            f"lambda={lo}: ESD {'present' if esd_lo else 'absent'} "
            f"(min margin {min_margin(scenario.with_drive(lo), horizon):.3e}); "
            f"lambda={hi}: ESD {'present' if esd_hi else 'absent'} "
            f"(min margin {min_margin(scenario.with_drive(hi), horizon):.3e})"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if has_esd(scenario.with_drive(mid), horizon):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sweep_drive_grid(base: TwoAtomScenario, lam_grid, omega_c_grid, t_eval: float) -> np.ndarray:
    """Log-negativity at ``t_eval`` over a (lambda, omega_c) grid.

    Returns an array of shape ``(len(lam_grid), len(omega_c_grid), 2)``
    holding ``(E_phi, E_psi)``; rows run over lambda.
    """
    lam_grid = np.asarray(lam_grid, dtype=float)
    omega_c_grid = np.asarray(omega_c_grid, dtype=float)
    if lam_grid.size == 0 or omega_c_grid.size == 0:
        raise ValueError("sweep grids must be nonempty")
    out = np.empty((lam_grid.size, omega_c_grid.size, 2))
    kinds = (ta.EWLKind.PHI, ta.EWLKind.PSI)
    for i, lam in enumerate(lam_grid):
        for j, wc in enumerate(omega_c_grid):
            cell = base.with_drive(float(lam), float(wc))
            for k, kind in enumerate(kinds):
                out[i, j, k] = cell.with_kind(kind).negativity(t_eval)[1]
    return out
