"""Two-input Mamdani inference with height defuzzification.

Membership functions are piecewise-linear curves over a closed variable
domain. Rule matching uses ``min``, rule merging uses ``max``, and the crisp
output is the grade-weighted mean of the consequent terms' centroids.
"""
from __future__ import annotations

import json
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence


class ZeroArea(ValueError):
    """Raised when a membership function has no area over its domain."""


@dataclass(frozen=True)
class TrapezoidMF:
    """Isosceles trapezoid ``<U, D, C>``.

    ``U`` is the length of the upper (grade 1) side, ``D`` the extra length of
    the lower side (so the lower side is ``L = U + D``) and ``C`` the common
    midpoint of both sides. ``U == 0`` gives a triangle.
    """

    U: float
    D: float
    C: float

    def __post_init__(self):
        if self.U < 0 or self.D < 0:
            raise ValueError(f"trapezoid lengths must be non-negative, got U={self.U}, D={self.D}")

    @property
    def L(self) -> float:
        return self.U + self.D

    def corners(self) -> tuple[float, float, float, float]:
        half_u = self.U / 2.0
        half_l = (self.U + self.D) / 2.0
        return self.C - half_l, self.C - half_u, self.C + half_u, self.C + half_l

    def grade(self, x: float) -> float:
        a, b, c, d = self.corners()
        if b <= x <= c:
            return 1.0
        if x <= a or x >= d:
            return 0.0
        if x < b:
            return (x - a) / (b - a)
        return (d - x) / (d - c)

    def to_piecewise(self, domain: tuple[float, float]) -> "PiecewiseLinearMF":
        """Clip to ``domain`` and return the equivalent piecewise-linear curve."""
        lo, hi = domain
        a, b, c, d = self.corners()
        raw = [(a, 0.0), (b, 1.0), (c, 1.0), (d, 0.0)]
        inner: list[tuple[float, float]] = []
        for pt in raw:
            if lo < pt[0] < hi and (not inner or inner[-1] != pt):
                inner.append(pt)
        points = [(lo, self.grade(lo)), *inner, (hi, self.grade(hi))]
        return PiecewiseLinearMF(tuple(points), (lo, hi), source=self)


@dataclass(frozen=True)
class PiecewiseLinearMF:
    """Membership curve given by ``(x, grade)`` breakpoints.

    Breakpoints must be non-decreasing in ``x``; two points may share an ``x``
    to express a vertical edge, in which case the larger grade is taken at
    that exact ``x``. Inputs outside the domain are clamped to it.
    """

    breakpoints: tuple[tuple[float, float], ...]
    domain: tuple[float, float]
    source: TrapezoidMF | None = field(default=None, compare=False)

    def __post_init__(self):
        lo, hi = self.domain
        if not hi > lo:
            raise ValueError(f"empty domain {self.domain}")
        pts = tuple((float(x), float(g)) for x, g in self.breakpoints)
        if not pts:
            raise ValueError("at least one breakpoint is required")
        for x, g in pts:
            if not lo <= x <= hi:
                raise ValueError(f"breakpoint x={x} outside domain {self.domain}")
            if not 0.0 <= g <= 1.0:
                raise ValueError(f"grade {g} outside [0, 1]")
        for (x0, _), (x1, _) in zip(pts, pts[1:]):
            if x1 < x0:
                raise ValueError("breakpoints must be ordered by x")
        # extend flat to the domain edges so integration covers [lo, hi]
        if pts[0][0] > lo:
            pts = ((lo, pts[0][1]),) + pts
        if pts[-1][0] < hi:
            pts = pts + ((hi, pts[-1][1]),)
        object.__setattr__(self, "breakpoints", pts)
        object.__setattr__(self, "domain", (float(lo), float(hi)))
        object.__setattr__(self, "_xs", [p[0] for p in pts])
        object.__setattr__(self, "_gs", [p[1] for p in pts])

    def __call__(self, x: float) -> float:
        xs, gs = self._xs, self._gs
        lo, hi = self.domain
        if x < lo:
            x = lo
        elif x > hi:
            x = hi
        i = bisect_left(xs, x)
        j = bisect_right(xs, x, i)
        if j > i:
            return max(gs[i:j])
        x0, x1 = xs[i - 1], xs[i]
        g0, g1 = gs[i - 1], gs[i]
        return g0 + (g1 - g0) * (x - x0) / (x1 - x0)

    def area(self) -> float:
        total = 0.0
        for (x0, g0), (x1, g1) in zip(self.breakpoints, self.breakpoints[1:]):
            total += 0.5 * (g0 + g1) * (x1 - x0)
        return total

    def centroid(self) -> float:
        """Exact centroid of the area under the curve over the domain."""
        area = 0.0
        moment = 0.0
        for (x0, g0), (x1, g1) in zip(self.breakpoints, self.breakpoints[1:]):
            h = x1 - x0
            if h == 0.0:
                continue
            area += 0.5 * (g0 + g1) * h
            # integral of x * g(x) over a linear segment
            moment += h * (x0 * (2.0 * g0 + g1) + x1 * (g0 + 2.0 * g1)) / 6.0
        if area <= 0.0:
            raise ZeroArea("membership function has zero area over its domain")
        return moment / area


def evaluate_mf(mf: PiecewiseLinearMF, x: float) -> float:
    return mf(x)


def centroid(mf: PiecewiseLinearMF) -> float:
    return mf.centroid()


def safe_centroid(mf: PiecewiseLinearMF) -> float:
    """Centroid, falling back for zero-area terms.

    A zero-area trapezoid uses its midpoint ``C`` clamped to the domain; a
    zero-area breakpoint curve uses the domain midpoint.
    """
    try:
        return mf.centroid()
    except ZeroArea:
        lo, hi = mf.domain
        if mf.source is not None:
            return min(max(mf.source.C, lo), hi)
        return 0.5 * (lo + hi)


@dataclass(frozen=True)
class FuzzyVariable:
    name: str
    domain: tuple[float, float]
    terms: Mapping[str, PiecewiseLinearMF]

    def __post_init__(self):
        for term, mf in self.terms.items():
            if tuple(mf.domain) != tuple(float(v) for v in self.domain):
                raise ValueError(f"{self.name}.{term}: domain {mf.domain} != {self.domain}")

    def grades(self, x: float) -> dict[str, float]:
        return {term: mf(x) for term, mf in self.terms.items()}

    def centroids(self) -> dict[str, float]:
        return {term: safe_centroid(mf) for term, mf in self.terms.items()}


@dataclass(frozen=True)
class RuleBase:
    """``(antecedent1, antecedent2, consequent)`` triples, one per input pair."""

    rules: tuple[tuple[str, str, str], ...]

    def check(self, in1: FuzzyVariable, in2: FuzzyVariable, out: FuzzyVariable) -> None:
        pairs = [(a, b) for a, b, _ in self.rules]
        if len(set(pairs)) != len(pairs):
            raise ValueError("duplicate antecedent pair in rule base")
        expected = {(a, b) for a in in1.terms for b in in2.terms}
        if set(pairs) != expected:
            raise ValueError("rule base must cover every antecedent pair exactly once")
        for _, _, c in self.rules:
            if c not in out.terms:
                raise ValueError(f"unknown consequent {c!r} for {out.name}")


@dataclass(frozen=True)
class InferenceResult:
    grades: dict[str, float]
    crisp: float


def defuzzify(grades: Sequence[float], centroids: Sequence[float]) -> float:
    """Height defuzzification; all-zero grades give the plain centroid mean."""
    if len(grades) != len(centroids) or not grades:
        raise ValueError("need one grade per centroid and at least one term")
    total = math.fsum(grades)
    if total <= 0.0:
        return math.fsum(centroids) / len(centroids)
    return math.fsum(o * c for o, c in zip(grades, centroids)) / total


def infer(rb: RuleBase, in1: FuzzyVariable, x1: float, in2: FuzzyVariable, x2: float,
          out: FuzzyVariable) -> InferenceResult:
    g1 = in1.grades(x1)
    g2 = in2.grades(x2)
    heights = {term: 0.0 for term in out.terms}
    for a, b, c in rb.rules:
        strength = min(g1[a], g2[b])
        if strength > heights[c]:
            heights[c] = strength
    cents = out.centroids()
    names = list(out.terms)
    crisp = defuzzify([heights[n] for n in names], [cents[n] for n in names])
    return InferenceResult(heights, crisp)


class Inference:
    """Precompiled rule base for repeated evaluation in the control loop."""

    def __init__(self, rb: RuleBase, in1: FuzzyVariable, in2: FuzzyVariable, out: FuzzyVariable):
        rb.check(in1, in2, out)
        self.rb, self.in1, self.in2, self.out = rb, in1, in2, out
        names1, names2, names_out = list(in1.terms), list(in2.terms), list(out.terms)
        self._mf1 = [in1.terms[n] for n in names1]
        self._mf2 = [in2.terms[n] for n in names2]
        self._rules = [(names1.index(a), names2.index(b), names_out.index(c)) for a, b, c in rb.rules]
        self._cents = [safe_centroid(out.terms[n]) for n in names_out]
        self._k = len(names_out)

    def __call__(self, x1: float, x2: float) -> float:
        g1 = [mf(x1) for mf in self._mf1]
        g2 = [mf(x2) for mf in self._mf2]
        heights = [0.0] * self._k
        for i, j, c in self._rules:
            s = g1[i] if g1[i] < g2[j] else g2[j]
            if s > heights[c]:
                heights[c] = s
        return defuzzify(heights, self._cents)


# Rule table: (QL, WT) -> (ET, UD)
RULE_TABLE = (
    ("short", "short", "short", "low"),
    ("short", "medium", "short", "low"),
    ("short", "long", "short", "medium"),
    ("medium", "short", "short", "low"),
    ("medium", "medium", "long", "medium"),
    ("medium", "long", "long", "high"),
    ("long", "short", "long", "medium"),
    ("long", "medium", "long", "high"),
    ("long", "long", "long", "high"),
)

ET_RULES = RuleBase(tuple((q, w, et) for q, w, et, _ in RULE_TABLE))
UD_RULES = RuleBase(tuple((q, w, ud) for q, w, _, ud in RULE_TABLE))

VARIABLE_ORDER = (
    ("QL", (0.0, 20.0), ("short", "medium", "long")),
    ("WT", (0.0, 100.0), ("short", "medium", "long")),
    ("ET", (0.0, 15.0), ("short", "long")),
    ("UD", (0.0, 1.0), ("low", "medium", "high")),
)


@dataclass(frozen=True)
class MembershipSet:
    """The eleven membership functions used by the fuzzy controllers."""

    QL: FuzzyVariable
    WT: FuzzyVariable
    ET: FuzzyVariable
    UD: FuzzyVariable

    def variables(self) -> dict[str, FuzzyVariable]:
        return {"QL": self.QL, "WT": self.WT, "ET": self.ET, "UD": self.UD}

    def et_inference(self) -> Inference:
        return Inference(ET_RULES, self.QL, self.WT, self.ET)

    def ud_inference(self) -> Inference:
        return Inference(UD_RULES, self.QL, self.WT, self.UD)

    @classmethod
    def from_terms(cls, terms: Mapping[str, Mapping[str, PiecewiseLinearMF]]) -> "MembershipSet":
        variables = {}
        for name, domain, term_names in VARIABLE_ORDER:
            given = terms[name]
            if set(given) != set(term_names):
                raise ValueError(f"{name} needs terms {term_names}, got {sorted(given)}")
            variables[name] = FuzzyVariable(name, domain, {t: given[t] for t in term_names})
        return cls(**variables)


def _shoulders(lo: float, hi: float, left_end: float, tri: tuple[float, float, float],
               right_start: float) -> tuple[PiecewiseLinearMF, PiecewiseLinearMF, PiecewiseLinearMF]:
    a, b, c = tri
    dom = (lo, hi)
    left = PiecewiseLinearMF(((lo, 1.0), (left_end, 0.0), (hi, 0.0)), dom)
    mid = PiecewiseLinearMF(((lo, 0.0), (a, 0.0), (b, 1.0), (c, 0.0), (hi, 0.0)), dom)
    right = PiecewiseLinearMF(((lo, 0.0), (right_start, 0.0), (hi, 1.0)), dom)
    return left, mid, right


def default_membership_set() -> MembershipSet:
    """Hand-crafted membership functions.

    QL uses the reference ramps (short 0-8, medium 4-10-16, long 12-20); ET
    is fixed by its centroids (2.5 and 12.5). UD reuses the QL shapes
    rescaled onto [0, 1].
    WT keeps the same short/medium/long layout but is compressed towards
    zero: at one vehicle per time unit of green, queued waits rarely exceed
    a few tens of units, so the stretched QL shape would never leave "short".
    """
    ql = _shoulders(0.0, 20.0, 8.0, (4.0, 10.0, 16.0), 12.0)
    wt = _shoulders(0.0, 100.0, 6.0, (4.0, 11.0, 16.0), 12.0)
    ud = _shoulders(0.0, 1.0, 0.4, (0.2, 0.5, 0.8), 0.6)
    et_short = PiecewiseLinearMF(((0.0, 1.0), (7.5, 0.0), (15.0, 0.0)), (0.0, 15.0))
    et_long = PiecewiseLinearMF(((0.0, 0.0), (7.5, 0.0), (15.0, 1.0)), (0.0, 15.0))
    return MembershipSet.from_terms({
        "QL": dict(zip(("short", "medium", "long"), ql)),
        "WT": dict(zip(("short", "medium", "long"), wt)),
        "ET": {"short": et_short, "long": et_long},
        "UD": dict(zip(("low", "medium", "high"), ud)),
    })


# -- JSON documents -------------------------------------------------------

def membership_to_dict(mset: MembershipSet, prefer_trapezoid: bool = True) -> dict:
    doc: dict = {}
    for name, var in mset.variables().items():
        doc[name] = {}
        for term, mf in var.terms.items():
            if prefer_trapezoid and mf.source is not None:
                t = mf.source
                doc[name][term] = {"U": t.U, "D": t.D, "C": t.C}
            else:
                doc[name][term] = {"breakpoints": [[x, g] for x, g in mf.breakpoints]}
    return doc


def membership_from_dict(doc: Mapping) -> MembershipSet:
    terms: dict[str, dict[str, PiecewiseLinearMF]] = {}
    for name, domain, term_names in VARIABLE_ORDER:
        if name not in doc:
            raise ValueError(f"membership document lacks variable {name}")
        terms[name] = {}
        for term, spec in doc[name].items():
            if "breakpoints" in spec:
                pts = tuple((float(x), float(g)) for x, g in spec["breakpoints"])
                terms[name][term] = PiecewiseLinearMF(pts, domain)
            elif {"U", "D", "C"} <= set(spec):
                trap = TrapezoidMF(float(spec["U"]), float(spec["D"]), float(spec["C"]))
                terms[name][term] = trap.to_piecewise(domain)
            else:
                raise ValueError(f"{name}.{term}: expected 'breakpoints' or U/D/C")
    return MembershipSet.from_terms(terms)


def save_membership(mset: MembershipSet, path: str | Path, prefer_trapezoid: bool = True) -> None:
    # json emits repr() floats, which round-trip exactly
    Path(path).write_text(json.dumps(membership_to_dict(mset, prefer_trapezoid), indent=2))


def load_membership(path: str | Path) -> MembershipSet:
    return membership_from_dict(json.loads(Path(path).read_text()))


def trapezoids_of(doc: Mapping) -> Iterable[tuple[str, str, TrapezoidMF]]:
    for name, _, term_names in VARIABLE_ORDER:
        for term in term_names:
            spec = doc.get(name, {}).get(term, {})
            if {"U", "D", "C"} <= set(spec):
                yield name, term, TrapezoidMF(float(spec["U"]), float(spec["D"]), float(spec["C"]))
