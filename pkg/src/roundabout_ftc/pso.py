"""Global-best particle swarm for tuning the FUZZY-MIX membership functions.

A position packs the eleven trapezoids as ``[U1 D1 C1 U2 D2 C2 ... C11]`` in
the order QL(short, medium, long), WT(short, medium, long), ET(short, long),
UD(low, medium, high).
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .controllers import ControllerParams, FuzzyMixOptController, RangeError
from .fuzzy import VARIABLE_ORDER, MembershipSet, TrapezoidMF
from .sim import ConfigError, Scenario, Simulation, builtin_condition

# (U max, D max, C max) per variable; all lower bounds are 0
TERM_BOUNDS = {
    "QL": (10.0, 10.0, 20.0),
    "WT": (50.0, 50.0, 100.0),
    "ET": (7.5, 7.5, 15.0),
    "UD": (0.5, 0.5, 1.0),
}
TERMS: tuple[tuple[str, str], ...] = tuple(
    (var, term) for var, _, names in VARIABLE_ORDER for term in names
)
N_DIM = 3 * len(TERMS)


def bounds() -> np.ndarray:
    """Array of shape (33, 2) with per-dimension (lo, hi)."""
    hi = np.array([b for var, _ in TERMS for b in TERM_BOUNDS[var]])
    return np.column_stack([np.zeros_like(hi), hi])


def _check(vector: np.ndarray) -> np.ndarray:
    v = np.asarray(vector, dtype=float)
    if v.shape != (N_DIM,):
        raise RangeError(f"expected a {N_DIM}-vector, got shape {v.shape}")
    b = bounds()
    bad = np.flatnonzero((v < b[:, 0]) | (v > b[:, 1]))
    if bad.size:
        i = int(bad[0])
        var, term = TERMS[i // 3]
        raise RangeError(f"{var}.{term}: {'UDC'[i % 3]}={v[i]} outside [0, {b[i, 1]}]")
    return v


def encode(trapezoids: Sequence[TrapezoidMF]) -> np.ndarray:
    if len(trapezoids) != len(TERMS):
        raise RangeError(f"expected {len(TERMS)} trapezoids")
    return _check(np.array([x for t in trapezoids for x in (t.U, t.D, t.C)], dtype=float))


def decode_trapezoids(vector) -> list[TrapezoidMF]:
    v = _check(vector)
    return [TrapezoidMF(float(v[3 * k]), float(v[3 * k + 1]), float(v[3 * k + 2]))
            for k in range(len(TERMS))]


def decode(vector) -> MembershipSet:
    traps = decode_trapezoids(vector)
    domains = {name: dom for name, dom, _ in VARIABLE_ORDER}
    terms: dict[str, dict] = {name: {} for name, _, _ in VARIABLE_ORDER}
    for (var, term), trap in zip(TERMS, traps):
        terms[var][term] = trap.to_piecewise(domains[var])
    return MembershipSet.from_terms(terms)


def encode_set(mset: MembershipSet) -> np.ndarray:
    variables = mset.variables()
    traps = []
    for var, term in TERMS:
        src = variables[var].terms[term].source
        if src is None:
            raise RangeError(f"{var}.{term} is not a trapezoid")
        traps.append(src)
    return encode(traps)


# -- swarm ----------------------------------------------------------------

@dataclass
class SwarmConfig:
    particles: int = 20
    iterations: int = 1000
    w_start: float = 0.9
    w_end: float = 0.4
    c1: float = 2.0
    c2: float = 2.0
    w_miss: float = 1.0
    w_delay: float = 1e-8
    seed: int = 0
    # (condition, seed, horizon)
    training: list[tuple[str, int, int]] = field(
        default_factory=lambda: [("C5", 101, 20_000), ("C8", 102, 20_000)]
    )

    def __post_init__(self):
        if self.particles < 2:
            raise ConfigError("a swarm needs at least two particles")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.w_start < self.w_end:
            raise ConfigError("inertia must not increase")
        self.training = [tuple(t) for t in self.training]
        if not self.training:
            raise ConfigError("at least one training scenario is required")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["training"] = [list(t) for t in self.training]
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> "SwarmConfig":
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ConfigError(f"malformed swarm config: {exc}") from exc


@dataclass
class Particle:
    x: np.ndarray
    v: np.ndarray
    fit: float = np.inf
    best_x: np.ndarray | None = None
    best_fit: float = np.inf


def inertia(iteration: int, cfg: SwarmConfig) -> float:
    if cfg.iterations == 1:
        return cfg.w_start
    return cfg.w_start - (cfg.w_start - cfg.w_end) * iteration / (cfg.iterations - 1)


def update_particle(p: Particle, gbest: np.ndarray, w: float, c1: float, c2: float,
                    rng: np.random.Generator, box: np.ndarray,
                    r1: np.ndarray | None = None, r2: np.ndarray | None = None) -> Particle:
    """Velocity then position update; clamped components get zero velocity."""
    n = p.x.shape[0]
    r1 = rng.random(n) if r1 is None else r1
    r2 = rng.random(n) if r2 is None else r2
    v = w * p.v + c1 * r1 * (p.best_x - p.x) + c2 * r2 * (gbest - p.x)
    x = p.x + v
    lo, hi = box[:, 0], box[:, 1]
    clamped = (x < lo) | (x > hi)
    x = np.clip(x, lo, hi)
    v[clamped] = 0.0
    p.x, p.v = x, v
    return p


@dataclass
class SwarmResult:
    best_x: np.ndarray
    best_fit: float
    history: list[float]
    particles: list[Particle]


def optimize(fitness: Callable[[np.ndarray], float], cfg: SwarmConfig,
             box: np.ndarray | None = None,
             callback: Callable[[int, float], None] | None = None) -> SwarmResult:
    """Minimize ``fitness`` over ``box``; history[0] is the initial gBest."""
    box = bounds() if box is None else np.asarray(box, dtype=float)
    rng = np.random.default_rng(cfg.seed)
    lo, hi = box[:, 0], box[:, 1]
    span = hi - lo
    swarm = []
    for _ in range(cfg.particles):
        x = lo + rng.random(len(lo)) * span
        v = (rng.random(len(lo)) - 0.5) * span
        swarm.append(Particle(x, v))
    for p in swarm:
        p.fit = float(fitness(p.x))
        p.best_x, p.best_fit = p.x.copy(), p.fit
    g = min(range(len(swarm)), key=lambda i: swarm[i].best_fit)
    gbest, gfit = swarm[g].best_x.copy(), swarm[g].best_fit
    history = [gfit]
    if callback:
        callback(0, gfit)
    for it in range(cfg.iterations):
        w = inertia(it, cfg)
        for p in swarm:
            update_particle(p, gbest, w, cfg.c1, cfg.c2, rng, box)
        for p in swarm:
            p.fit = float(fitness(p.x))
            if p.fit < p.best_fit:
                p.best_x, p.best_fit = p.x.copy(), p.fit
        g = min(range(len(swarm)), key=lambda i: swarm[i].best_fit)
        if swarm[g].best_fit < gfit:
            gbest, gfit = swarm[g].best_x.copy(), swarm[g].best_fit
        history.append(gfit)
        if callback:
            callback(it + 1, gfit)
    return SwarmResult(gbest, gfit, history, swarm)


# -- traffic fitness --------------------------------------------------------

def fitness_value(veh_miss: int, veh_pass: int, veh_delay_s: float,
                  w_miss: float = 1.0, w_delay: float = 1e-8) -> float:
    ratio = veh_miss / veh_pass if veh_pass > 0 else float(veh_miss)
    return w_miss * ratio + w_delay * veh_delay_s


def training_scenarios(cfg: SwarmConfig) -> list[tuple[Scenario, int]]:
    out = []
    for cond, seed, horizon in cfg.training:
        scn = builtin_condition(cond)
        if horizon != scn.horizon:
            scn = scn.with_horizon(int(horizon))
        out.append((scn, int(seed)))
    return out


def evaluate_membership(mset: MembershipSet, scenarios: Sequence[tuple[Scenario, int]],
                        cfg: SwarmConfig, params: ControllerParams = ControllerParams()) -> float:
    """Mean fitness of FUZZY-MIX with ``mset`` over the training runs."""
    total = 0.0
    for scn, seed in scenarios:
        m = Simulation(scn, FuzzyMixOptController(params, mset), seed=seed).run()
        total += fitness_value(m.veh_miss, m.veh_pass, m.veh_delay, cfg.w_miss, cfg.w_delay)
    return total / len(scenarios)


class TrafficFitness:
    """Position -> fitness; every call reuses the same training seeds."""

    def __init__(self, cfg: SwarmConfig, params: ControllerParams = ControllerParams()):
        self.cfg = cfg
        self.params = params
        self.scenarios = training_scenarios(cfg)

    def __call__(self, position) -> float:
        return evaluate_membership(decode(position), self.scenarios, self.cfg, self.params)


def fitness(position, cfg: SwarmConfig) -> float:
    return TrafficFitness(cfg)(position)


def save_history(path, history: Sequence[float]) -> None:
    with open(path, "w") as fh:
        fh.write("iteration,gbest_fitness\n")
        for i, f in enumerate(history):
            fh.write(f"{i},{f!r}\n")


def save_manifest(path, cfg: SwarmConfig, extra: dict | None = None) -> None:
    doc = {"swarm": cfg.to_dict()}
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
