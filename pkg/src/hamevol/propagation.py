"""Trajectory and parameter-scan drivers built on the compiled stepper.

A trajectory starts at the centre of the Sun with a pure flavor state and
runs out to the surface. In ``sun-plus-earth`` mode the state then crosses an
optional vacuum gap (evolved exactly) and a diameter of the Earth.

Records carry the coordinate along the path (1/eV) or the scan variable
``Var = log10(dm2 / 2E)``, the flavor probabilities ``|nu_i|^2`` and the norm
deviation ``sum |nu_i|^2 - 1``.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from ._kernel import integrate_model
from .constants import REARTH, RSUN
from .errors import IntegrationError, ScanBudgetExceeded
from .physics import DensityProfile, HamiltonianModel, MassSpectrum, MixingParameters
from .rk import StepControl


class Mode(str, Enum):
    SUN = "sun-only"
    SUN_EARTH = "sun-plus-earth"


@dataclass(frozen=True)
class TrajectoryRecord:
    """One output row. ``floor`` marks scan points accepted at the minimum step."""

    coordinate: float
    probabilities: np.ndarray
    norm_deviation: float
    floor: bool = False


@dataclass(frozen=True)
class TrajectorySpec:
    mode: Mode = Mode.SUN
    start: float = 0.0
    sun_end: float = RSUN
    earth_segment: float = 2.0 * REARTH
    initial_flavor: int = 0
    vacuum_gap: float = 0.0
    earth_profile: DensityProfile = None

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not self.sun_end >= self.start >= 0:
            raise ValueError(f"need 0 <= start <= sun_end, got {self.start}, {self.sun_end}")
        if not self.earth_segment > 0:
            raise ValueError(f"earth_segment must be positive, got {self.earth_segment}")
        if not self.vacuum_gap >= 0:
            raise ValueError(f"vacuum_gap must be >= 0, got {self.vacuum_gap}")
        if self.initial_flavor < 0:
            raise ValueError(f"initial_flavor must be >= 0, got {self.initial_flavor}")
        if self.earth_profile is None:
            object.__setattr__(
                self, "earth_profile", DensityProfile.earth(radius=self.earth_segment / 2)
            )

    @property
    def end(self):
        if self.mode is Mode.SUN:
            return self.sun_end
        return self.sun_end + self.earth_segment


@dataclass(frozen=True)
class OuterLoopConfig:
    """Step bounds and tolerances for :func:`adaptive_scan`."""

    max_steps: int = 100_000
    min_steps: int = 10_000
    init_steps: int = 10_000
    decrease: float = 0.1
    increase: float = 5.0
    prob_error: float = 0.01
    var_start: float = -2.39794
    var_end: float = -12.3979

    def __post_init__(self):
        if not 0 < self.decrease < 1 < self.increase:
            raise ValueError("need 0 < decrease < 1 < increase")
        if not 0 < self.prob_error < 1:
            raise ValueError(f"prob_error must lie in (0, 1), got {self.prob_error}")
        if not 1 <= self.min_steps <= self.max_steps:
            raise ValueError("need 1 <= min_steps <= max_steps")
        if self.init_steps < 1:
            raise ValueError(f"init_steps must be >= 1, got {self.init_steps}")


def survival_probabilities(state):
    """``|nu_i|^2`` for each flavor, without renormalisation."""
    return np.abs(np.asarray(state)) ** 2


def _record(coordinate, state, floor=False):
    p = survival_probabilities(state)
    return TrajectoryRecord(float(coordinate), p, float(p.sum() - 1.0), floor)


def vacuum_propagator(model, length):
    """Exact vacuum evolution ``U exp(-i m^2 L / 2E) U^dagger``."""
    u = model.mixing_matrix
    m2 = np.square(model.spectrum.masses)
    phases = np.exp(-1j * m2 / (2.0 * model.spectrum.energy) * length)
    return (u * phases) @ u.conj().T


class _Segment:
    """A piece of the path with its own model and local coordinate offset."""

    def __init__(self, model, offset, t0, t1):
        self.model = model
        self.offset = offset
        self.t0 = t0
        self.t1 = t1


def _segments(model, spec):
    segs = [_Segment(model, 0.0, spec.start, spec.sun_end)]
    if spec.mode is Mode.SUN_EARTH:
        earth = replace(model, profile=spec.earth_profile, crossing=True)
        segs.append(_Segment(earth, spec.sun_end, 0.0, spec.earth_segment))
    return segs


def _advance(y, model, a, b, control, h):
    if b == a:
        return y, h
    try:
        y, h, _, _ = integrate_model(y, a, b, control, model, h_start=h)
    except IntegrationError as exc:
        exc.position = a
        raise
    return y, h


def _initial_state(model, spec):
    if spec.initial_flavor >= model.n:
        raise ValueError(f"initial_flavor {spec.initial_flavor} out of range for {model.n} flavors")
    y = np.zeros(model.n, dtype=np.complex128)
    y[spec.initial_flavor] = 1.0
    return y


def iter_trajectory(model, spec, control=StepControl(), samples=101):
    """Yield ``samples`` evenly spaced records from ``spec.start`` to ``spec.end``."""
    y = _initial_state(model, spec)
    total = spec.end - spec.start
    if total == 0:
        yield _record(spec.start, y)
        return
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    points = np.linspace(spec.start, spec.end, samples)
    segs = _segments(model, spec)
    yield _record(points[0], y)
    k = 1
    for index, seg in enumerate(segs):
        if index > 0 and spec.vacuum_gap > 0:
            y = vacuum_propagator(model, spec.vacuum_gap) @ y
        t = seg.t0
        h = control.h1
        last = index == len(segs) - 1
        while k < samples:
            local = points[k] - seg.offset
            if k == samples - 1 and last:
                local = seg.t1
            if local > seg.t1:
                break
            y, h = _advance(y, seg.model, t, local, control, h)
            t = local
            yield _record(points[k], y)
            k += 1
        y, h = _advance(y, seg.model, t, seg.t1, control, h)


def propagate_trajectory(model, spec, control=StepControl(), samples=101):
    """List form of :func:`iter_trajectory`."""
    return list(iter_trajectory(model, spec, control, samples))


def final_state(model, spec, control=StepControl()):
    """State at the end of the trajectory without intermediate sampling."""
    y = _initial_state(model, spec)
    for index, seg in enumerate(_segments(model, spec)):
        if index > 0 and spec.vacuum_gap > 0:
            y = vacuum_propagator(model, spec.vacuum_gap) @ y
        y, _ = _advance(y, seg.model, seg.t0, seg.t1, control, control.h1)
    return y


def iter_scan(model_factory, spec, outer=OuterLoopConfig(), control=StepControl()):
    """Adaptive walk over ``Var``, yielding accepted records as they are found.

    Each candidate ``Var`` is compared with the last accepted point. When the
    probabilities moved by more than ``prob_error`` in max-norm the step is
    multiplied by ``decrease`` and the candidate dropped, except when that
    shrink falls below the floor ``|span| / max_steps``: then the step is set
    to the floor and the candidate is kept, flagged with ``floor=True``.
    """
    span = outer.var_end - outer.var_start
    if span == 0:
        raise ValueError("var_start and var_end coincide: empty scan")
    direction = math.copysign(1.0, span)
    h_floor = abs(span) / outer.max_steps
    h_cap = abs(span) / outer.min_steps
    h = abs(span) / outer.init_steps

    def evaluate(var):
        y = final_state(model_factory(var), spec, control)
        return _record(var, y)

    prev = evaluate(outer.var_start)
    yield prev
    var = outer.var_start
    iterations = 0
    while True:
        iterations += 1
        if iterations > outer.max_steps:
            raise ScanBudgetExceeded()
        candidate = var + direction * h
        # snap to the end rather than leave a sliver of a step behind
        if (candidate - outer.var_end) * direction >= -1e-9 * abs(span):
            candidate = outer.var_end
        rec = evaluate(candidate)
        distance = float(np.max(np.abs(rec.probabilities - prev.probabilities)))
        if distance > outer.prob_error:
            h *= outer.decrease
            if h >= h_floor:
                continue
            # the shrink hit the floor: keep the candidate anyway
            h = h_floor
            rec = replace(rec, floor=True)
        else:
            h = min(h * outer.increase, h_cap)
        yield rec
        prev = rec
        var = candidate
        if var == outer.var_end:
            return


def adaptive_scan(model_factory, spec, outer=OuterLoopConfig(), control=StepControl()):
    """List form of :func:`iter_scan`."""
    return list(iter_scan(model_factory, spec, outer, control))


@dataclass(frozen=True)
class SplittingFactory:
    """Map ``Var`` to a two-flavor model with ``m2^2 - m1^2 = 2E * 10**Var``."""

    theta: float
    energy: float
    profile: DensityProfile = field(default_factory=DensityProfile)
    m1: float = 0.0
    antineutrino: bool = False

    def __call__(self, var):
        dm2 = 2.0 * self.energy * 10.0**var
        m2 = math.sqrt(self.m1**2 + dm2)
        return HamiltonianModel(
            MixingParameters(self.theta, n_flavors=2),
            MassSpectrum((self.m1, m2), self.energy),
            self.profile,
            self.antineutrino,
        )
