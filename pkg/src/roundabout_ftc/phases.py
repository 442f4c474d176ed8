"""Six-phase signal model of the four-approach, two-lane roundabout."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Movement(str, Enum):
    LEFT = "L"
    THROUGH = "S"


@dataclass(frozen=True, order=True)
class FlowId:
    approach: int
    movement: Movement

    def __str__(self) -> str:
        return f"{self.approach}-{self.movement.value}"

    @classmethod
    def parse(cls, label: str) -> "FlowId":
        approach, mov = label.split("-")
        return cls(int(approach), Movement(mov))


# Flow index order matches the arrival-rate table: 0-L 1-L 2-L 3-L 0-S 1-S 2-S 3-S
FLOWS: tuple[FlowId, ...] = tuple(
    [FlowId(a, Movement.LEFT) for a in range(4)] + [FlowId(a, Movement.THROUGH) for a in range(4)]
)
FLOW_INDEX = {f: i for i, f in enumerate(FLOWS)}
FLOW_LABELS = tuple(str(f) for f in FLOWS)
N_FLOWS = len(FLOWS)
N_PHASES = 6

SUBSET_I, SUBSET_II = "I", "II"

_MOVING = {
    0: ("0-S", "2-S"),
    1: ("0-L", "2-L"),
    2: ("0-L", "0-S", "2-L", "2-S"),
    3: ("1-S", "3-S"),
    4: ("1-L", "3-L"),
    5: ("1-L", "1-S", "3-L", "3-S"),
}
MOVING_FLOWS: tuple[frozenset[FlowId], ...] = tuple(
    frozenset(FlowId.parse(s) for s in _MOVING[p]) for p in range(N_PHASES)
)
# index form, for the simulation inner loop
MOVING_INDICES: tuple[tuple[int, ...], ...] = tuple(
    tuple(sorted(FLOW_INDEX[f] for f in MOVING_FLOWS[p])) for p in range(N_PHASES)
)

SUBSETS = {SUBSET_I: (0, 1, 2), SUBSET_II: (3, 4, 5)}
ENTRANCE = {SUBSET_I: 2, SUBSET_II: 5}
NEXT_IN_SUBSET = {1: 2, 2: 0, 0: 1, 4: 5, 5: 3, 3: 4}
CIRCLE = (0, 2, 1, 4, 5, 3)
_NEXT_IN_CIRCLE = {p: CIRCLE[(i + 1) % len(CIRCLE)] for i, p in enumerate(CIRCLE)}


def moving_flows(p: int) -> frozenset[FlowId]:
    return MOVING_FLOWS[p]


def subset_of(p: int) -> str:
    return SUBSET_I if p in SUBSETS[SUBSET_I] else SUBSET_II


def consistent(p: int, q: int) -> bool:
    """Whether ``q`` may follow ``p`` without an all-red interval."""
    return subset_of(p) == subset_of(q)


def next_in_circle(p: int) -> int:
    return _NEXT_IN_CIRCLE[p]


def next_in_subset(p: int) -> int:
    return NEXT_IN_SUBSET[p]


def entrance(subset: str) -> int:
    return ENTRANCE[subset]


def other_subset(subset: str) -> str:
    return SUBSET_II if subset == SUBSET_I else SUBSET_I


@dataclass(frozen=True)
class SignalCommand:
    """Controller output.

    ``kind`` is ``"extend"``, ``"switch"`` or ``"allred"``; ``allred`` is the
    all-red length inserted before ``phase`` starts (only for ``"allred"``).
    """

    kind: str
    duration: int
    phase: int | None = None
    allred: int = 0

    def __post_init__(self):
        if self.kind not in ("extend", "switch", "allred"):
            raise ValueError(f"unknown command kind {self.kind!r}")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.kind != "extend" and self.phase not in range(N_PHASES):
            raise ValueError(f"invalid phase {self.phase}")
        if self.kind == "allred" and self.allred <= 0:
            raise ValueError("all-red length must be positive")

    @classmethod
    def extend(cls, duration: int) -> "SignalCommand":
        return cls("extend", duration)

    @classmethod
    def switch(cls, phase: int, duration: int) -> "SignalCommand":
        return cls("switch", duration, phase)

    @classmethod
    def allred_then_switch(cls, phase: int, allred: int, duration: int) -> "SignalCommand":
        return cls("allred", duration, phase, allred)


def describe() -> str:
    """Plain-text phase table."""
    lines = ["phase  subset  moving flows              next-in-subset  next-in-circle"]
    for p in range(N_PHASES):
        flows = ", ".join(str(f) for f in sorted(MOVING_FLOWS[p]))
        mark = " (entrance)" if p in ENTRANCE.values() else ""
        lines.append(f"P{p}     {subset_of(p):<6}  {flows:<24}  P{next_in_subset(p):<14} P{next_in_circle(p)}{mark}")
    lines.append("circle: " + " -> ".join(f"P{p}" for p in CIRCLE) + f" -> P{CIRCLE[0]}")
    return "\n".join(lines)
