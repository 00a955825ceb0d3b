"""Combinatorial model of non-singular regular flows on closed 4-manifolds.

A flow is a finite set of periodic orbits, each carrying a Morse index and
two twist flags, together with the precedence relation induced by
stable/unstable manifold intersections.  The module orders the orbits,
counts round handles, evaluates the round-handle lower-bound inequalities,
and carries the quotient-manifold exclusion used in the non-orientable case.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence


class CycleError(Exception):
    """The precedence data admits no index-ordered linear extension."""

    def __init__(self, cycle: list[str]):
        super().__init__("cycle: " + " < ".join(cycle + cycle[:1]))
        self.cycle = cycle


class TwistedExtreme(ValueError):
    """An attracting or repelling orbit carries a twist flag."""


class StructureViolation(Exception):
    """A violated orbit-structure equation (N0)-(N3) or attachment rule."""

    def __init__(self, equation: str, detail: str):
        label = f"Eq ({equation})" if equation.startswith("N") else equation
        super().__init__(f"{label}: {detail}")
        self.equation = equation
        self.detail = detail


class FlowParseError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Orbit:
    id: str
    index: int
    rho: int = +1
    nu: int = +1


@dataclass(frozen=True)
class FlowSpec:
    orientable: bool
    orbits: tuple[Orbit, ...]
    edges: frozenset[tuple[str, str]]  # (x, y) means x precedes y
    dimension: int = 4

    def orbit_map(self) -> dict[str, Orbit]:
        return {o.id: o for o in self.orbits}


@dataclass(frozen=True)
class HandleCounts:
    k0: int
    k1: int
    k2: int
    k3: int

    def total(self) -> int:
        return self.k0 + self.k1 + self.k2 + self.k3

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.k0, self.k1, self.k2, self.k3)


@dataclass(frozen=True)
class BettiVector:
    """Caller-supplied Betti data; the model never computes 4-manifold homology."""

    b0: int
    b1: int
    b2: int
    b3: int
    b4: int
    source_note: str = ""

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.b0, self.b1, self.b2, self.b3, self.b4)


def flow(
    orientable: bool,
    orbits: Iterable[Orbit],
    edges: Iterable[tuple[str, str]] = (),
) -> FlowSpec:
    return FlowSpec(orientable, tuple(orbits), frozenset(edges))


# ---------------------------------------------------------------------------
# Validation and ordering


def validate_flow(spec: FlowSpec) -> list[str]:
    """Report every violated well-formedness rule; empty means valid."""
    report = []
    if spec.dimension != 4:
        report.append(f"dimension {spec.dimension} unsupported (model is 4-dimensional)")
    seen: set[str] = set()
    for o in spec.orbits:
        if o.id in seen:
            report.append(f"duplicate orbit id {o.id!r}")
        seen.add(o.id)
        if o.index not in (0, 1, 2, 3):
            report.append(f"orbit {o.id}: index out of range (got {o.index})")
        if o.rho not in (-1, +1) or o.nu not in (-1, +1):
            report.append(f"orbit {o.id}: twist flags must be +1 or -1")
        if spec.orientable and o.index in (0, 3):
            kind = "attracting" if o.index == 0 else "repelling"
            if o.rho != +1:
                report.append(f"{kind} orbit {o.id} twisted (rho=-1)")
            if o.nu != +1:
                report.append(f"{kind} orbit {o.id} twisted (nu=-1)")
    for x, y in sorted(spec.edges):
        for end in (x, y):
            if end not in seen:
                report.append(f"edge ({x} < {y}) references unknown orbit {end!r}")
    return report


def _index_constrained_successors(spec: FlowSpec) -> dict[str, set[str]]:
    """Precedence graph: given edges plus all index-increasing pairs."""
    orbits = spec.orbit_map()
    succ: dict[str, set[str]] = {o.id: set() for o in spec.orbits}
    for x, y in spec.edges:
        if x != y:
            succ[x].add(y)
    ids = sorted(orbits)
    for a in ids:
        for b in ids:
            if orbits[a].index < orbits[b].index:
                succ[a].add(b)
    return succ


def _find_cycle(succ: dict[str, set[str]], nodes: set[str]) -> list[str]:
    # Deterministic DFS over the residual graph; returns one directed cycle.
    state: dict[str, int] = {}
    stack: list[str] = []

    def visit(v: str) -> Optional[list[str]]:
        state[v] = 1
        stack.append(v)
        for w in sorted(succ[v]):
            if w not in nodes:
                continue
            if state.get(w) == 1:
                return stack[stack.index(w):]
            if w not in state:
                found = visit(w)
                if found:
                    return found
        state[v] = 2
        stack.pop()
        return None

    for v in sorted(nodes):
        if v not in state:
            found = visit(v)
            if found:
                return found
    raise AssertionError("no cycle found in an unfinishable order")


def dynamic_order(spec: FlowSpec) -> list[str]:
    """Total order extending the precedence edges, non-decreasing in index.

    Ties inside an index class break lexicographically, so the output is the
    unique lexicographically minimal admissible order.  Raises CycleError
    with one witnessing cycle when no admissible order exists.
    """
    orbits = spec.orbit_map()
    succ = _index_constrained_successors(spec)
    indeg = {v: 0 for v in succ}
    for v, outs in succ.items():
        for w in outs:
            indeg[w] += 1
    heap = [(orbits[v].index, v) for v, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order: list[str] = []
    while heap:
        _, v = heapq.heappop(heap)
        order.append(v)
        for w in sorted(succ[v]):
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, (orbits[w].index, w))
    if len(order) != len(succ):
        remaining = {v for v in succ if v not in set(order)}
        raise CycleError(_find_cycle(succ, remaining))
    return order


# ---------------------------------------------------------------------------
# Handle counts and inequalities


def handle_counts(spec: FlowSpec) -> HandleCounts:
    ks = [0, 0, 0, 0]
    for o in spec.orbits:
        ks[o.index] += 1
    return HandleCounts(*ks)


def saddle_structure(spec: FlowSpec) -> HandleCounts:
    """Orbit-structure equations for index-1 flows: returns (k0, k1, 0, 1)."""
    k = handle_counts(spec)
    if k.k0 < 1:
        raise StructureViolation("N0", f"k0 >= 1 (k0={k.k0})")
    if k.k1 < k.k0 - 1:
        raise StructureViolation("N1", f"k1 >= k0 - 1 (k0={k.k0}, k1={k.k1})")
    if k.k2 != 0:
        raise StructureViolation("N2", f"k2 = 0 (k2={k.k2})")
    if k.k3 != 1:
        raise StructureViolation("N3", f"k3 = 1 (k3={k.k3})")
    return k


@dataclass(frozen=True)
class FranksViolation:
    rule: str  # e.g. "(a) i=2"
    text: str  # instantiated inequality

    def __str__(self) -> str:
        return f"violated {self.rule}: {self.text}"


_BETA_SUM_TEXT = [
    "beta0",
    "beta1 - beta0",
    "beta2 - beta1 + beta0",
    "beta3 - beta2 + beta1 - beta0",
]


def _alternating_sum(b: Sequence[int], i: int) -> int:
    return sum((-1) ** (i - j) * b[j] for j in range(i + 1))


def franks_check(
    k: Sequence[Optional[int]], betti: BettiVector
) -> list[FranksViolation]:
    """Round-handle lower bounds for n=4; empty result means pass.

    Entries of k may be None ("any value"): an inequality is reported only
    when every handle count it mentions is concrete.
    """
    if len(k) != 4:
        raise ValueError("expected four handle counts k0..k3")
    b = betti.as_tuple()
    out = []
    for i in range(4):
        if k[i] is None:
            continue
        bound = _alternating_sum(b, i)
        if k[i] < bound:
            out.append(
                FranksViolation(
                    f"(a) i={i}", f"k{i} >= {_BETA_SUM_TEXT[i]} = {bound} (k{i} = {k[i]})"
                )
            )
    if k[0] is not None and k[1] is not None and k[1] < k[0] - 1:
        out.append(FranksViolation("(b) i=1", f"k1 >= k0 - 1 = {k[0] - 1} (k1 = {k[1]})"))
    if k[2] is not None and k[3] is not None and k[2] < k[3] - 1:
        out.append(FranksViolation("(b) i=2", f"k2 >= k3 - 1 = {k[3] - 1} (k2 = {k[2]})"))
    for i in (1, 2):
        lo, mid, hi = k[i - 1], k[i], k[i + 1]
        if lo is None or mid is None or hi is None:
            continue
        if lo == 0 and hi == 0 and _alternating_sum(b, i) <= 0 and mid != 0:
            out.append(
                FranksViolation(
                    f"(c) i={i}",
                    f"k{i-1} = k{i+1} = 0 and {_BETA_SUM_TEXT[i]} <= 0 force k{i} = 0 (k{i} = {mid})",
                )
            )
    return out


def poincare_hopf_check(chi: int) -> bool:
    """A closed manifold carrying a non-singular flow has chi = 0."""
    return chi == 0


# ---------------------------------------------------------------------------
# Twist preprocessing and local invariants


def period_double(spec: FlowSpec) -> FlowSpec:
    """Untwist every saddle orbit (rho := +1), keeping ids, indices and nu.

    Models the doubling bifurcation as a flag rewrite: the doubled orbit
    replaces the twisted one.  Idempotent.
    """
    new_orbits = []
    for o in spec.orbits:
        if o.index in (0, 3) and o.rho == -1:
            kind = "attracting" if o.index == 0 else "repelling"
            raise TwistedExtreme(f"{kind} orbit {o.id} is twisted; inconsistent with orientability")
        if o.index in (1, 2) and o.rho == -1:
            o = replace(o, rho=+1)
        new_orbits.append(o)
    return FlowSpec(spec.orientable, tuple(new_orbits), spec.edges, spec.dimension)


def invariant_manifold_types(o: Orbit, dimension: int = 4) -> tuple[str, str]:
    """Homeomorphism types of the unstable and stable manifolds of an orbit."""
    u_fiber = f"R^{o.index}"
    s_fiber = f"R^{dimension - o.index - 1}"
    unstable = f"{u_fiber} x S^1" if o.rho == +1 else f"{u_fiber} x~ S^1"
    stable = f"{s_fiber} x S^1" if o.nu == +1 else f"{s_fiber} x~ S^1"
    return unstable, stable


# ---------------------------------------------------------------------------
# Quotients of S^3 x S^1 by a free involution

S3XS1 = "S3xS1"
S3TWISTS1 = "S3twistS1"
RP3XS1 = "RP3xS1"
RP4RP4 = "RP4#RP4"

QUOTIENT_CANDIDATES = (S3XS1, S3TWISTS1, RP3XS1, RP4RP4)
_CANDIDATE_ORIENTABLE = {S3XS1: True, S3TWISTS1: False, RP3XS1: True, RP4RP4: False}

# Betti data of RP4#RP4 used in the exclusion argument.
RP4RP4_BETTI = BettiVector(1, 0, 1, 0, 1, source_note="integral Betti data of RP4#RP4")


@dataclass(frozen=True)
class KwasikResult:
    verdict: Optional[str]
    trace: tuple[str, ...]


def kwasik_exclusion(
    cover: str = S3XS1,
    quotient_orientable: bool = False,
    candidates: Sequence[str] = QUOTIENT_CANDIDATES,
) -> KwasikResult:
    """Classify the free-involution quotient of S^3 x S^1 carrying an
    index-1 non-singular flow.

    Keeps the non-orientable candidates and eliminates RP4#RP4 through the
    k2 lower bound; the survivor is the skew product.
    """
    if cover != S3XS1:
        raise ValueError(f"quotient classification is only available over {S3XS1}")
    if quotient_orientable:
        raise ValueError("precondition rejected: the quotient must be non-orientable")
    trace = [f"candidate quotients of {cover}: {', '.join(candidates)}"]
    survivors = []
    for c in candidates:
        if _CANDIDATE_ORIENTABLE.get(c, True):
            trace.append(f"{c}: dropped (orientable, quotient is non-orientable)")
            continue
        if c == RP4RP4:
            violations = franks_check((None, None, 0, None), RP4RP4_BETTI)
            if violations:
                trace.append(f"{c}: eliminated; index-1 flows have k2 = 0 but {violations[0].text}")
                continue
        trace.append(f"{c}: survives")
        survivors.append(c)
    if len(survivors) == 1:
        return KwasikResult(survivors[0], tuple(trace))
    trace.append("no unique survivor among the supplied candidates")
    return KwasikResult(None, tuple(trace))


# ---------------------------------------------------------------------------
# Flow-spec text format (line-oriented, bit-exact)
#
#   flow dim=4 orientable=<true|false>
#   orbit <id> index=<0..3> rho=<+1|-1> nu=<+1|-1>
#   edge <id> < <id>
#
# ';' starts a comment; unknown keys are errors.

_ID_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.-]*")


def _parse_kv(part: str, lineno: int, col: int, key: str, allowed: dict[str, object]):
    if "=" not in part:
        raise FlowParseError(f"expected {key}=<value>, found {part!r}", lineno, col)
    k, v = part.split("=", 1)
    if k != key:
        raise FlowParseError(f"unknown key {k!r} (expected {key!r})", lineno, col)
    if v not in allowed:
        raise FlowParseError(f"bad value {v!r} for {key}", lineno, col + len(k) + 1)
    return allowed[v]


def parse_flow(text: str) -> FlowSpec:
    orientable: Optional[bool] = None
    orbits: list[Orbit] = []
    edges: set[tuple[str, str]] = set()
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0].rstrip()
        if not line.strip():
            continue
        tokens = [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", line)]
        parts = [t for t, _ in tokens]
        cols = [c for _, c in tokens]
        if not header_seen:
            if parts[0] != "flow":
                raise FlowParseError("flow file must start with a 'flow' line", lineno, cols[0])
            if len(parts) != 3:
                raise FlowParseError("expected: flow dim=4 orientable=<true|false>", lineno, cols[0])
            _parse_kv(parts[1], lineno, cols[1], "dim", {"4": 4})
            orientable = _parse_kv(
                parts[2], lineno, cols[2], "orientable", {"true": True, "false": False}
            )
            header_seen = True
            continue
        if parts[0] == "orbit":
            if len(parts) != 5:
                raise FlowParseError(
                    "expected: orbit <id> index=<0..3> rho=<+1|-1> nu=<+1|-1>", lineno, cols[0]
                )
            if not _ID_RE.fullmatch(parts[1]):
                raise FlowParseError(f"bad orbit id {parts[1]!r}", lineno, cols[1])
            index = _parse_kv(parts[2], lineno, cols[2], "index", {"0": 0, "1": 1, "2": 2, "3": 3})
            rho = _parse_kv(parts[3], lineno, cols[3], "rho", {"+1": +1, "-1": -1})
            nu = _parse_kv(parts[4], lineno, cols[4], "nu", {"+1": +1, "-1": -1})
            orbits.append(Orbit(parts[1], index, rho, nu))
        elif parts[0] == "edge":
            if len(parts) != 4 or parts[2] != "<":
                raise FlowParseError("expected: edge <id> < <id>", lineno, cols[0])
            for ref, col in ((parts[1], cols[1]), (parts[3], cols[3])):
                if not _ID_RE.fullmatch(ref):
                    raise FlowParseError(f"bad orbit id {ref!r}", lineno, col)
            edges.add((parts[1], parts[3]))
        else:
            raise FlowParseError(f"unknown directive {parts[0]!r}", lineno, cols[0])
    if not header_seen:
        raise FlowParseError("empty flow file", 1)
    return FlowSpec(bool(orientable), tuple(orbits), frozenset(edges))


def format_flow(spec: FlowSpec) -> str:
    lines = [f"flow dim={spec.dimension} orientable={'true' if spec.orientable else 'false'}"]
    for o in spec.orbits:
        lines.append(f"orbit {o.id} index={o.index} rho={'+1' if o.rho > 0 else '-1'} nu={'+1' if o.nu > 0 else '-1'}")
    for x, y in sorted(spec.edges):
        lines.append(f"edge {x} < {y}")
    return "\n".join(lines) + "\n"
