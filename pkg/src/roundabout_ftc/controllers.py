"""Signal-control policies: VA, FUZZY-TURN, FUZZY-JUMP, FUZZY-MIX and FUZZY-MIX-OPT."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from . import phases
from .fuzzy import MembershipSet, default_membership_set, membership_from_dict, trapezoids_of
from .phases import N_PHASES, SUBSET_I, SignalCommand


class RangeError(ValueError):
    """A trapezoid parameter lies outside its search bounds."""


@dataclass(frozen=True)
class ControllerParams:
    initial_duration: int = 10       # Theta
    extension_threshold: float = 5.0  # Phi
    ud_interval: int = 10            # Delta
    allred: int = 5                  # theta
    va_window: int = 2
    va_increment: int = 1
    va_max_green: int = 30
    initial_phase: int = 1

    def __post_init__(self):
        for name in ("initial_duration", "extension_threshold", "ud_interval", "allred",
                     "va_window", "va_increment", "va_max_green"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.initial_phase not in range(N_PHASES):
            raise ValueError(f"invalid initial phase {self.initial_phase}")


def round_half_up(x: float) -> int:
    return max(1, int(math.floor(x + 0.5)))


class VAController:
    """Vehicle-actuated: extend while the green lanes keep detecting arrivals."""

    name = "va"

    def __init__(self, params: ControllerParams = ControllerParams()):
        self.params = params
        self.initial_phase = params.initial_phase
        self.initial_duration = params.initial_duration

    def decide(self, sim) -> SignalCommand:
        p = self.params
        cur = sim.phase
        if sim.green_elapsed < p.va_max_green and sim.detected_since(cur, p.va_window):
            return SignalCommand.extend(min(p.va_increment, p.va_max_green - sim.green_elapsed))
        return SignalCommand.switch(phases.next_in_circle(cur), p.initial_duration)


class _FuzzyController:
    def __init__(self, params: ControllerParams = ControllerParams(),
                 mfs: MembershipSet | None = None):
        self.params = params
        self.mfs = mfs if mfs is not None else default_membership_set()
        self._et = self.mfs.et_inference()
        self._ud = self.mfs.ud_inference()
        self.initial_phase = params.initial_phase
        self.initial_duration = params.initial_duration

    def extension_time(self, sim, p: int) -> float:
        return self._et(*sim.observe(p))

    def urgency(self, sim, p: int) -> float:
        return self._ud(*sim.observe(p))

    def subset_urgency(self, sim, subset: str) -> float:
        return self.urgency(sim, phases.entrance(subset))


class FuzzyTurnController(_FuzzyController):
    """Extend by ET while ET exceeds the threshold, else advance around the circle."""

    name = "turn"

    def decide(self, sim) -> SignalCommand:
        p = self.params
        et = self.extension_time(sim, sim.phase)
        if et > p.extension_threshold:
            return SignalCommand.extend(round_half_up(et))
        return SignalCommand.switch(phases.next_in_circle(sim.phase), p.initial_duration)


class FuzzyJumpController(_FuzzyController):
    """Every interval, jump to the phase with the largest urgency degree."""

    name = "jump"

    def __init__(self, params: ControllerParams = ControllerParams(),
                 mfs: MembershipSet | None = None):
        super().__init__(params, mfs)
        self.initial_duration = params.ud_interval

    def choose(self, sim) -> int:
        cur = sim.phase
        uds = [self.urgency(sim, q) for q in range(N_PHASES)]
        best = max(uds)
        if uds[cur] == best:
            return cur
        tied = [q for q in range(N_PHASES) if uds[q] == best]
        # prefer the phase serving more flows, then the lowest id
        return min(tied, key=lambda q: (-len(phases.MOVING_INDICES[q]), q))

    def decide(self, sim) -> SignalCommand:
        p = self.params
        cur = sim.phase
        target = self.choose(sim)
        if target == cur:
            return SignalCommand.extend(p.ud_interval)
        if phases.consistent(cur, target):
            return SignalCommand.switch(target, p.ud_interval)
        return SignalCommand.allred_then_switch(target, p.allred, p.ud_interval)


class FuzzyMixController(_FuzzyController):
    """Two layers: subset urgency picks the direction, ET paces the phase sequence."""

    name = "mix"

    def decide(self, sim) -> SignalCommand:
        p = self.params
        cur = sim.phase
        here = phases.subset_of(cur)
        there = phases.other_subset(here)
        if self.subset_urgency(sim, here) >= self.subset_urgency(sim, there):
            et = self.extension_time(sim, cur)
            if et > p.extension_threshold:
                return SignalCommand.extend(round_half_up(et))
            return SignalCommand.switch(phases.next_in_subset(cur), p.initial_duration)
        return SignalCommand.allred_then_switch(phases.entrance(there), p.allred, p.initial_duration)


class FuzzyMixOptController(FuzzyMixController):
    name = "mix-opt"


CONTROLLERS = {
    "va": VAController,
    "turn": FuzzyTurnController,
    "jump": FuzzyJumpController,
    "mix": FuzzyMixController,
    "mix-opt": FuzzyMixOptController,
}


def check_bounds(doc: Mapping) -> None:
    """Raise RangeError if any trapezoid-form term lies outside its search box."""
    from .pso import TERM_BOUNDS

    for var, term, trap in trapezoids_of(doc):
        (u_hi, d_hi, c_hi) = TERM_BOUNDS[var]
        for label, value, hi in (("U", trap.U, u_hi), ("D", trap.D, d_hi), ("C", trap.C, c_hi)):
            if not 0.0 <= value <= hi:
                raise RangeError(f"{var}.{term}: {label}={value} outside [0, {hi}]")


def load_optimized(doc: Mapping | str | Path,
                   params: ControllerParams = ControllerParams()) -> FuzzyMixOptController:
    """FUZZY-MIX driven by a stored membership document."""
    if not isinstance(doc, Mapping):
        doc = json.loads(Path(doc).read_text())
    check_bounds(doc)
    return FuzzyMixOptController(params, membership_from_dict(doc))


def make_controller(name: str, params: ControllerParams = ControllerParams(),
                    mf_file: str | Path | None = None):
    if name not in CONTROLLERS:
        raise ValueError(f"unknown controller {name!r}; expected one of {sorted(CONTROLLERS)}")
    if name == "mix-opt":
        if mf_file is None:
            raise ValueError("mix-opt needs a membership-function file")
        return load_optimized(mf_file, params)
    return CONTROLLERS[name](params)


__all__ = [
    "CONTROLLERS", "ControllerParams", "FuzzyJumpController", "FuzzyMixController",
    "FuzzyMixOptController", "FuzzyTurnController", "RangeError", "SUBSET_I", "VAController",
    "load_optimized", "make_controller",
]
