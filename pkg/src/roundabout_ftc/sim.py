"""Discrete-time queueing simulation of the signalized roundabout.

Each time unit (0.5 s by default) draws Poisson arrivals for the eight
controlled entrance lanes, admits them to detector-capped queues, and lets
every lane with green discharge one vehicle per ``discharge_headway`` units
of uninterrupted green. Arrivals come from numpy's PCG64 generator seeded with
the run seed, drawn for the whole horizon up front.
"""
from __future__ import annotations

import csv
import json
from collections import deque
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Mapping, Protocol, Sequence

import numpy as np

from .phases import FLOW_LABELS, MOVING_INDICES, N_FLOWS, SignalCommand, entrance


class ConfigError(ValueError):
    """Malformed scenario or run configuration."""


DEFAULT_HORIZON = 100_000
CONDITION_NAMES = tuple(f"C{i}" for i in range(1, 17))


@dataclass(frozen=True)
class Scenario:
    name: str
    rate_schedule: Mapping[str, tuple[tuple[float, float], ...]]
    horizon: int = DEFAULT_HORIZON
    time_unit_seconds: float = 0.5
    detector_cap: int = 20
    discharge_headway: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if self.horizon <= 0:
            raise ConfigError("horizon must be positive")
        if self.detector_cap <= 0 or self.discharge_headway <= 0:
            raise ConfigError("detector_cap and discharge_headway must be positive")
        if self.time_unit_seconds <= 0:
            raise ConfigError("time_unit_seconds must be positive")
        if set(self.rate_schedule) != set(FLOW_LABELS):
            raise ConfigError(f"rate_schedule must name exactly the flows {FLOW_LABELS}")
        sched = {}
        for flow, pts in self.rate_schedule.items():
            pts = tuple((float(t), float(lam)) for t, lam in pts)
            if not pts:
                raise ConfigError(f"{flow}: empty rate schedule")
            if any(lam < 0 for _, lam in pts):
                raise ConfigError(f"{flow}: negative arrival rate")
            if any(t1 <= t0 for (t0, _), (t1, _) in zip(pts, pts[1:])):
                raise ConfigError(f"{flow}: waypoints must be strictly increasing in t")
            sched[flow] = pts
        object.__setattr__(self, "rate_schedule", sched)

    @property
    def steady(self) -> bool:
        return all(len(p) == 1 for p in self.rate_schedule.values())

    def rate_at(self, flow: str, t: float) -> float:
        return rate_at(self.rate_schedule, flow, t)

    def rate_matrix(self) -> np.ndarray:
        """Arrival rate of every flow at every time unit, shape (horizon, 8)."""
        t = np.arange(self.horizon, dtype=float)
        out = np.empty((self.horizon, N_FLOWS))
        for i, flow in enumerate(FLOW_LABELS):
            pts = self.rate_schedule[flow]
            out[:, i] = np.interp(t, [p[0] for p in pts], [p[1] for p in pts])
        return out

    def with_horizon(self, horizon: int) -> "Scenario":
        """Same scenario over a new horizon; waypoint times scale proportionally."""
        k = horizon / self.horizon
        sched = {f: tuple((t * k, lam) for t, lam in pts) for f, pts in self.rate_schedule.items()}
        return replace(self, horizon=int(horizon), rate_schedule=sched)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "horizon": self.horizon,
            "time_unit_seconds": self.time_unit_seconds,
            "detector_cap": self.detector_cap,
            "discharge_headway": self.discharge_headway,
            "rng_seed": self.rng_seed,
            "rate_schedule": {f: [list(p) for p in self.rate_schedule[f]] for f in FLOW_LABELS},
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Scenario":
        known = {"name", "horizon", "time_unit_seconds", "detector_cap", "discharge_headway",
                 "rng_seed", "rate_schedule"}
        try:
            kwargs = {k: doc[k] for k in known if k in doc}
            kwargs["rate_schedule"] = {f: tuple(tuple(p) for p in pts)
                                       for f, pts in doc["rate_schedule"].items()}
            return cls(**kwargs)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed scenario: {exc}") from exc


def rate_at(schedule: Mapping[str, Sequence[tuple[float, float]]], flow: str, t: float) -> float:
    """Piecewise-linear rate with constant extrapolation beyond the waypoints."""
    pts = schedule[flow]
    return float(np.interp(t, [p[0] for p in pts], [p[1] for p in pts]))


def steady_scenario(name: str, rates: Sequence[float], **kwargs) -> Scenario:
    return Scenario(name, {f: ((0.0, float(r)),) for f, r in zip(FLOW_LABELS, rates)}, **kwargs)


def load_scenario(path: str | Path) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    return Scenario.from_dict(doc)


def builtin_condition(name: str) -> Scenario:
    name = name.upper()
    if name not in CONDITION_NAMES:
        raise ConfigError(f"unknown condition {name!r}; expected one of C1..C16")
    text = resources.files("roundabout_ftc").joinpath("data", "conditions", f"{name}.json").read_text()
    return Scenario.from_dict(json.loads(text))


def resolve_scenario(name_or_path: str) -> Scenario:
    if name_or_path.upper() in CONDITION_NAMES:
        return builtin_condition(name_or_path)
    return load_scenario(name_or_path)


# -- simulation -------------------------------------------------------------

@dataclass
class SimMetrics:
    veh_miss: int = 0
    veh_pass: int = 0
    delay_sum: int = 0
    time_unit_seconds: float = 0.5
    arrivals: list[int] = field(default_factory=lambda: [0] * N_FLOWS)
    queue_trace: list[tuple[int, float]] = field(default_factory=list)
    allred_time: int = 0

    @property
    def veh_delay(self) -> float:
        """Mean delay of passed vehicles, in seconds."""
        if self.veh_pass == 0:
            return 0.0
        return self.delay_sum * self.time_unit_seconds / self.veh_pass

    def key(self) -> tuple:
        return (self.veh_miss, self.veh_pass, self.delay_sum, tuple(self.arrivals),
                tuple(self.queue_trace), self.allred_time)


class Controller(Protocol):
    name: str
    initial_phase: int
    initial_duration: int

    def decide(self, sim: "Simulation") -> SignalCommand: ...


class Simulation:
    """Mutable traffic state plus the sense-control-actuate loop."""

    def __init__(self, scenario: Scenario, controller: Controller, seed: int | None = None,
                 log: bool = False, trace_every: int = 100):
        self.scenario = scenario
        self.controller = controller
        self.seed = scenario.rng_seed if seed is None else seed
        rng = np.random.default_rng(self.seed)
        self._arrivals = rng.poisson(scenario.rate_matrix()).tolist()
        self.cap = scenario.detector_cap
        self.headway = scenario.discharge_headway
        self.trace_every = trace_every

        self.clock = 0
        self.queues = [deque() for _ in range(N_FLOWS)]
        self.qsum = [0] * N_FLOWS
        self.counters = [0] * N_FLOWS
        self.last_detection = [-(10 ** 9)] * N_FLOWS
        self.phase: int | None = controller.initial_phase
        self.phase_remaining = controller.initial_duration
        self.green_elapsed = 0
        self.allred_remaining = 0
        self._pending: tuple[int, int] | None = None
        self.metrics = SimMetrics(time_unit_seconds=scenario.time_unit_seconds)
        self.log: list[tuple[int, str, int, int]] | None = [] if log else None
        if self.log is not None:
            self.log.append((0, "start", self.phase, self.phase_remaining))

    # observation ----------------------------------------------------------

    def observe(self, p: int) -> tuple[float, float]:
        """(mean queue length, mean waiting time) over the moving flows of ``p``."""
        flows = MOVING_INDICES[p]
        n = 0
        s = 0
        for i in flows:
            n += len(self.queues[i])
            s += self.qsum[i]
        if n == 0:
            return 0.0, 0.0
        return n / len(flows), (self.clock * n - s) / n

    def observe_subset(self, subset: str) -> tuple[float, float]:
        return self.observe(entrance(subset))

    def queue_lengths(self) -> list[int]:
        return [len(q) for q in self.queues]

    def detected_since(self, p: int, window: int) -> bool:
        cutoff = self.clock - window
        return any(self.last_detection[i] >= cutoff for i in MOVING_INDICES[p])

    # actuation ------------------------------------------------------------

    def _start_phase(self, phase: int, duration: int) -> None:
        moving = MOVING_INDICES[phase]
        if self.phase is not None:
            for i in MOVING_INDICES[self.phase]:
                if i not in moving:
                    self.counters[i] = 0
        self.phase = phase
        self.phase_remaining = duration
        self.green_elapsed = 0

    def apply(self, cmd: SignalCommand) -> None:
        if self.log is not None:
            self.log.append((self.clock, cmd.kind, self.phase if cmd.kind == "extend" else cmd.phase,
                             cmd.allred if cmd.kind == "allred" else cmd.duration))
        if cmd.kind == "extend":
            self.phase_remaining += cmd.duration
        elif cmd.kind == "switch":
            self._start_phase(cmd.phase, cmd.duration)
        else:
            for i in range(N_FLOWS):
                self.counters[i] = 0
            self.phase = None
            self.allred_remaining = cmd.allred
            self._pending = (cmd.phase, cmd.duration)

    def needs_decision(self) -> bool:
        return self.allred_remaining == 0 and self.phase_remaining <= 0

    # dynamics -------------------------------------------------------------

    def step(self) -> None:
        t = self.clock
        m = self.metrics
        queues, qsum = self.queues, self.qsum
        row = self._arrivals[t]
        for i in range(N_FLOWS):
            n = row[i]
            if n:
                m.arrivals[i] += n
                q = queues[i]
                for _ in range(n):
                    if len(q) < self.cap:
                        q.append(t)
                        qsum[i] += t
                        self.last_detection[i] = t
                    else:
                        m.veh_miss += 1
        if self.allred_remaining > 0:
            self.allred_remaining -= 1
            m.allred_time += 1
            if self.allred_remaining == 0:
                phase, duration = self._pending
                self._pending = None
                self._start_phase(phase, duration)
                if self.log is not None:
                    self.log.append((t + 1, "switch", phase, duration))
        else:
            counters, headway = self.counters, self.headway
            for i in MOVING_INDICES[self.phase]:
                c = counters[i] + 1
                q = queues[i]
                if c >= headway and q:
                    arrived = q.popleft()
                    qsum[i] -= arrived
                    m.delay_sum += t - arrived
                    m.veh_pass += 1
                    c = 0
                elif c > headway:
                    c = headway
                counters[i] = c
            self.phase_remaining -= 1
            self.green_elapsed += 1
        self.clock = t + 1
        if self.clock % self.trace_every == 0:
            m.queue_trace.append((self.clock, sum(len(q) for q in queues) / N_FLOWS))

    def advance(self) -> None:
        """One control check followed by one time step."""
        if self.needs_decision():
            self.apply(self.controller.decide(self))
        self.step()

    def run(self) -> SimMetrics:
        horizon = self.scenario.horizon
        while self.clock < horizon:
            if self.allred_remaining == 0 and self.phase_remaining <= 0:
                self.apply(self.controller.decide(self))
            self.step()
        return self.metrics


def run(scenario: Scenario, controller: Controller, seed: int | None = None,
        log: bool = False) -> SimMetrics:
    return Simulation(scenario, controller, seed=seed, log=log).run()


# -- CSV output -------------------------------------------------------------

METRICS_HEADER = ("condition", "controller", "seed", "veh_miss", "veh_pass", "veh_delay_s")


def metrics_row(condition: str, controller: str, seed: int, m: SimMetrics) -> dict:
    return {"condition": condition, "controller": controller, "seed": seed,
            "veh_miss": m.veh_miss, "veh_pass": m.veh_pass, "veh_delay_s": f"{m.veh_delay:.6f}"}


def write_metrics_csv(path, rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=METRICS_HEADER)
        w.writeheader()
        w.writerows(rows)


def write_trace_csv(path, trace: Sequence[tuple[int, float]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("t", "mean_queue_len"))
        w.writerows(trace)


def write_log_csv(path, log: Sequence[tuple[int, str, int, int]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("t", "event", "phase", "duration"))
        w.writerows(log)


__all__ = [
    "ConfigError", "Scenario", "SimMetrics", "Simulation", "builtin_condition", "load_scenario",
    "rate_at", "resolve_scenario", "run", "steady_scenario",
]
