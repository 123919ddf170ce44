"""Piecewise control schedules.

A :class:`Schedule` is pure data: an ordered, contiguous list of
:class:`ControlSegment`, each holding one ramp per control channel.  The
channels are the externally controllable knobs of the microwave network:

* ``alpha_d_abs`` / ``alpha_d_arg`` - magnitude and phase of the Kerr
  bottom-port drive (magnitude ramps keep the phase well defined),
* ``delta_a`` - Kerr-resonator/drive detuning,
* ``delta_b`` - cavity/drive detuning (the tuning knob: parking the drive
  away from the cavity makes this large),
* ``alpha_in`` - tee-port cancellation drive (complex),
* ``alpha_p`` - Purcell-port drive (complex),
* ``omega_pulse`` - qubit Rabi drive (complex).

Ramps are ``(start, end, shape)`` with shape ``constant`` or ``linear``.
Integrators sample controls at the left endpoint of each step, piecewise
constant within the step.

Segments may additionally mark ``project_qubit_at_end``: the trajectory
collapses the qubit onto an energy eigenstate there, modelling the
projective character of the completed bifurcation measurement.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .params import SystemParams


class ScheduleError(ValueError):
    """Malformed segment or violated tuning-rate bound."""


@dataclass(frozen=True)
class Ramp:
    start: float
    end: float
    shape: str = "constant"

    def __post_init__(self):
        if self.shape not in ("constant", "linear"):
            raise ScheduleError(f"unknown ramp shape {self.shape!r}")
        if self.shape == "constant" and self.start != self.end:
            raise ScheduleError("constant ramp must have equal endpoints")
        if not (np.isfinite(self.start) and np.isfinite(self.end)):
            raise ScheduleError("ramp endpoints must be finite")

    def value(self, frac: float) -> float:
        if self.shape == "constant":
            return self.start
        return self.start + (self.end - self.start) * frac


@dataclass(frozen=True)
class ComplexRamp:
    start: complex
    end: complex
    shape: str = "constant"

    def __post_init__(self):
        if self.shape not in ("constant", "linear"):
            raise ScheduleError(f"unknown ramp shape {self.shape!r}")
        if self.shape == "constant" and self.start != self.end:
            raise ScheduleError("constant ramp must have equal endpoints")
        if not (np.isfinite(self.start) and np.isfinite(self.end)):
            raise ScheduleError("ramp endpoints must be finite")

    def value(self, frac: float) -> complex:
        if self.shape == "constant":
            return self.start
        return self.start + (self.end - self.start) * frac


def const(value) -> Ramp:
    return Ramp(float(value), float(value), "constant")


def cconst(value) -> ComplexRamp:
    return ComplexRamp(complex(value), complex(value), "constant")


@dataclass(frozen=True)
class Controls:
    """Instantaneous control values fed to the equations of motion."""

    alpha_d: complex
    alpha_in: complex
    alpha_p: complex
    delta_a: float
    delta_b: float
    omega_pulse: complex


@dataclass(frozen=True)
class ControlSegment:
    name: str
    duration: float  # s
    alpha_d_abs: Ramp = field(default_factory=lambda: const(0.0))
    alpha_d_arg: Ramp = field(default_factory=lambda: const(0.0))
    delta_a: Ramp = field(default_factory=lambda: const(0.0))
    delta_b: Ramp = field(default_factory=lambda: const(0.0))
    alpha_in: ComplexRamp = field(default_factory=lambda: cconst(0j))
    alpha_p: ComplexRamp = field(default_factory=lambda: cconst(0j))
    omega_pulse: ComplexRamp = field(default_factory=lambda: cconst(0j))
    project_qubit_at_end: bool = False

    def __post_init__(self):
        if not (self.duration > 0):
            raise ScheduleError(f"segment {self.name!r}: duration must be positive")

    def controls_at(self, frac: float) -> Controls:
        frac = min(max(frac, 0.0), 1.0)
        mag = self.alpha_d_abs.value(frac)
        arg = self.alpha_d_arg.value(frac)
        return Controls(
            alpha_d=mag * np.exp(1j * arg),
            alpha_in=self.alpha_in.value(frac),
            alpha_p=self.alpha_p.value(frac),
            delta_a=self.delta_a.value(frac),
            delta_b=self.delta_b.value(frac),
            omega_pulse=self.omega_pulse.value(frac),
        )


# compiled-control column layout; one row per segment
CTRL_COLS = 20
(AD_ABS0, AD_ABS1, AD_ARG0, AD_ARG1, DA0, DA1, DB0, DB1,
 AIN_RE0, AIN_RE1, AIN_IM0, AIN_IM1, AP_RE0, AP_RE1, AP_IM0, AP_IM1,
 OM_RE0, OM_RE1, OM_IM0, OM_IM1) = range(CTRL_COLS)


@dataclass(frozen=True)
class CompiledSchedule:
    """Array form of a schedule for the trajectory kernels."""

    seg_t0: np.ndarray
    seg_t1: np.ndarray
    ctrl: np.ndarray        # (nseg, CTRL_COLS) float64
    proj_times: np.ndarray  # qubit-projection event times, ascending
    total_duration: float


@dataclass(frozen=True)
class Schedule:
    segments: tuple

    def __post_init__(self):
        if not self.segments:
            raise ScheduleError("schedule needs at least one segment")
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def total_duration(self) -> float:
        return float(sum(s.duration for s in self.segments))

    def boundaries(self) -> np.ndarray:
        return np.concatenate(
            ([0.0], np.cumsum([s.duration for s in self.segments]))
        )

    def segment_index(self, t: float) -> int:
        ends = self.boundaries()[1:]
        i = int(np.searchsorted(ends, t, side="right"))
        return min(i, len(self.segments) - 1)

    def sample(self, t: float) -> Controls:
        """Controls at time t (left-continuous, clamped to the span)."""
        if t < 0:
            raise ScheduleError("cannot sample controls before t = 0")
        bounds = self.boundaries()
        i = self.segment_index(t)
        seg = self.segments[i]
        frac = (t - bounds[i]) / seg.duration
        return seg.controls_at(frac)

    def validate(self, p: SystemParams, rate_bound_mult: float = 2.0) -> None:
        """Enforce the detuning ramp-rate bound on every segment.

        Tuning the Kerr resonator faster than kappa^2 (kappa = kappa_a +
        kappa_d) excites it; both detuning channels carry the physical
        tuning, so both are checked against ``rate_bound_mult * kappa^2``.
        """
        bound = rate_bound_mult * p.kappa_total**2
        for seg in self.segments:
            for chan in ("delta_a", "delta_b"):
                ramp = getattr(seg, chan)
                rate = abs(ramp.end - ramp.start) / seg.duration
                if rate > bound * (1 + 1e-12):
                    raise ScheduleError(
                        f"segment {seg.name!r}: |d({chan})/dt| = {rate:.3e} "
                        f"exceeds the tuning bound {bound:.3e} rad/s^2"
                    )

    def compile(self) -> CompiledSchedule:
        nseg = len(self.segments)
        ctrl = np.zeros((nseg, CTRL_COLS))
        bounds = self.boundaries()
        proj = []
        for i, seg in enumerate(self.segments):
            row = ctrl[i]
            row[AD_ABS0], row[AD_ABS1] = seg.alpha_d_abs.start, seg.alpha_d_abs.end
            row[AD_ARG0], row[AD_ARG1] = seg.alpha_d_arg.start, seg.alpha_d_arg.end
            row[DA0], row[DA1] = seg.delta_a.start, seg.delta_a.end
            row[DB0], row[DB1] = seg.delta_b.start, seg.delta_b.end
            row[AIN_RE0], row[AIN_RE1] = seg.alpha_in.start.real, seg.alpha_in.end.real
            row[AIN_IM0], row[AIN_IM1] = seg.alpha_in.start.imag, seg.alpha_in.end.imag
            row[AP_RE0], row[AP_RE1] = seg.alpha_p.start.real, seg.alpha_p.end.real
            row[AP_IM0], row[AP_IM1] = seg.alpha_p.start.imag, seg.alpha_p.end.imag
            row[OM_RE0], row[OM_RE1] = seg.omega_pulse.start.real, seg.omega_pulse.end.real
            row[OM_IM0], row[OM_IM1] = seg.omega_pulse.start.imag, seg.omega_pulse.end.imag
            if seg.project_qubit_at_end:
                proj.append(bounds[i + 1])
        return CompiledSchedule(
            seg_t0=np.ascontiguousarray(bounds[:-1]),
            seg_t1=np.ascontiguousarray(bounds[1:]),
            ctrl=ctrl,
            proj_times=np.array(sorted(proj)),
            total_duration=float(bounds[-1]),
        )

    # -- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        def ramp(r):
            return [r.start, r.end, r.shape]

        def cramp(r):
            return [[r.start.real, r.start.imag],
                    [r.end.real, r.end.imag], r.shape]

        return {
            "segments": [
                {
                    "name": s.name,
                    "duration_ns": s.duration * 1e9,
                    "alpha_d_abs": ramp(s.alpha_d_abs),
                    "alpha_d_arg": ramp(s.alpha_d_arg),
                    "delta_a": ramp(s.delta_a),
                    "delta_b": ramp(s.delta_b),
                    "alpha_in": cramp(s.alpha_in),
                    "alpha_p": cramp(s.alpha_p),
                    "omega_pulse": cramp(s.omega_pulse),
                    "project_qubit_at_end": s.project_qubit_at_end,
                }
                for s in self.segments
            ]
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "Schedule":
        def ramp(v):
            return Ramp(float(v[0]), float(v[1]), v[2])

        def cramp(v):
            return ComplexRamp(complex(v[0][0], v[0][1]),
                               complex(v[1][0], v[1][1]), v[2])

        segs = [
            ControlSegment(
                name=s["name"],
                duration=s["duration_ns"] * 1e-9,
                alpha_d_abs=ramp(s["alpha_d_abs"]),
                alpha_d_arg=ramp(s["alpha_d_arg"]),
                delta_a=ramp(s["delta_a"]),
                delta_b=ramp(s["delta_b"]),
                alpha_in=cramp(s["alpha_in"]),
                alpha_p=cramp(s["alpha_p"]),
                omega_pulse=cramp(s["omega_pulse"]),
                project_qubit_at_end=s["project_qubit_at_end"],
            )
            for s in data["segments"]
        ]
        return cls(tuple(segs))

    @classmethod
    def from_json(cls, text: str) -> "Schedule":
        return cls.from_dict(json.loads(text))

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True,
                               separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def concatenate(schedules: Iterable[Schedule]) -> Schedule:
    segs = []
    for sched in schedules:
        segs.extend(sched.segments)
    return Schedule(tuple(segs))


def rename_segments(sched: Schedule, prefix: str) -> Schedule:
    return Schedule(tuple(replace(s, name=f"{prefix}{s.name}")
                          for s in sched.segments))
