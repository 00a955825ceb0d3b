"""Backward torus-surgery rewriting on boundary 3-manifolds.

Going down one stage of a round-handle filtration replaces one boundary
component A either by the pair L(p,q)#A1 | (A2)_{p,q} (the associated
sphere divides A = A1#A2) or by the single component L(p,q)#(A)_{p,q}
(non-dividing case, A = E#A').  verify_compr drives these rewrites
backward from a single copy of E and certifies, by exhaustive enumeration,
that every boundary component along the chain is forced to be E.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd
from typing import Optional

from .manifolds import (
    E,
    S3,
    E_COMPONENT,
    ConnectedSum,
    EIrreducibility,
    Expression,
    NonCoprimeParameters,
    connected_sum,
    copies_of_e,
    is_E_irreducible,
    lens,
    normalize,
    normalize_sum,
    surg,
)

DIVIDING = "Dividing"
NONDIVIDING = "NonDividing"


class IllFormedMove(ValueError):
    """The move's split does not recombine to the targeted component."""


class OpaqueBase(ValueError):
    """The disk-side piece is not S3 or E, so its surgery has no symbol."""


@dataclass(frozen=True)
class SurgeryMove:
    component: int
    case: str  # DIVIDING | NONDIVIDING
    p: int
    q: int
    # Dividing: a1 stays with the lens summand, a2 takes the disk side and
    # gets surgered.  NonDividing: a2 is the remainder A' of A = E#A'.
    a1: Optional[ConnectedSum] = None
    a2: Optional[ConnectedSum] = None

    def describe(self) -> str:
        if self.case == DIVIDING:
            return f"{self.case} c{self.component} split ({self.a1}; {self.a2}) (p={self.p}, q={self.q})"
        return f"{self.case} c{self.component} remainder {self.a2} (p={self.p}, q={self.q})"


@dataclass(frozen=True)
class MoveResult:
    result: Expression
    solid_torus_note: str


def _wrap_surgered(piece: ConnectedSum, p: int, q: int) -> ConnectedSum:
    normal = normalize_sum(piece)
    if normal.summands == (S3,):
        return connected_sum(surg("S3", p, q))
    if normal.summands == (E,):
        return connected_sum(surg("E", p, q))
    raise OpaqueBase(f"cannot surger {normal}: only S3 and E admit a surgered symbol")


def _solid_torus_note(p: int, q: int) -> str:
    return (
        f"one associated solid torus lies in the L({p},{q}) summand; "
        "its complement there is again a solid torus"
    )


def surger_backward(expr: Expression, move: SurgeryMove) -> MoveResult:
    """Apply one backward surgery move to one component of expr."""
    if not 0 <= move.component < len(expr.components):
        raise IllFormedMove(f"component index {move.component} out of range")
    if gcd(abs(move.p), abs(move.q)) != 1:
        raise NonCoprimeParameters(f"slope ({move.p},{move.q}) is not primitive")
    component = expr.components[move.component]
    others = list(expr.components[: move.component]) + list(expr.components[move.component + 1:])

    if move.case == DIVIDING:
        if move.a1 is None or move.a2 is None:
            raise IllFormedMove("dividing move needs both split parts")
        recombined = normalize_sum(ConnectedSum.of(move.a1.summands + move.a2.summands))
        if recombined != normalize_sum(component):
            raise IllFormedMove(
                f"split ({move.a1}; {move.a2}) does not recombine to {component}"
            )
        lens_part = ConnectedSum.of((lens(move.p, move.q),) + move.a1.summands)
        surgered = _wrap_surgered(move.a2, move.p, move.q)
        result = Expression.of(others + [lens_part, surgered])
    elif move.case == NONDIVIDING:
        if move.a2 is None:
            raise IllFormedMove("non-dividing move needs the remainder piece")
        recombined = normalize_sum(ConnectedSum.of((E,) + move.a2.summands))
        normal_component = normalize_sum(component)
        if recombined != normal_component or E not in normal_component.summands:
            raise IllFormedMove(
                f"component {component} is not E # {move.a2}; non-dividing move rejected"
            )
        surgered = _wrap_surgered(move.a2, move.p, move.q)
        merged = ConnectedSum.of((lens(move.p, move.q),) + surgered.summands)
        result = Expression.of(others + [merged])
    else:
        raise IllFormedMove(f"unknown case tag {move.case!r}")
    return MoveResult(normalize(result), _solid_torus_note(move.p, move.q))


def _splits_for(component: ConnectedSum) -> list[tuple[ConnectedSum, ConnectedSum]]:
    """Dividing splits (A1, A2) with a representable disk side A2."""
    normal = normalize_sum(component)
    splits = [(normal, connected_sum(S3))]
    if E in normal.summands:
        rest = list(normal.summands)
        rest.remove(E)
        splits.append((ConnectedSum.of(rest), connected_sum(E)))
    splits.sort(key=lambda pair: (str(pair[0]), str(pair[1])))
    return splits


def enumerate_moves(
    expr: Expression, pq_bound: int
) -> list[tuple[SurgeryMove, MoveResult]]:
    """Every well-formed move with |p|, |q| <= pq_bound, deduplicated.

    Moves are ordered by (component, case, p, q) and deduplicated per
    component and case by the normalized result expression.
    """
    if pq_bound < 1:
        raise ValueError("pq_bound must be >= 1")
    # (p,q) and (-p,-q) name the same unoriented slope, so only the
    # representatives with p > 0 (or p = 0, q > 0) are walked.
    slopes = [
        (p, q)
        for p in range(0, pq_bound + 1)
        for q in range(-pq_bound, pq_bound + 1)
        if gcd(abs(p), abs(q)) == 1 and (p > 0 or q > 0)
    ]
    out: list[tuple[SurgeryMove, MoveResult]] = []
    for ci, component in enumerate(expr.components):
        normal = normalize_sum(component)
        seen: set[tuple[str, str]] = set()
        for p, q in slopes:
            for a1, a2 in _splits_for(component):
                move = SurgeryMove(ci, DIVIDING, p, q, a1, a2)
                try:
                    res = surger_backward(expr, move)
                except (OpaqueBase, NonCoprimeParameters):
                    continue
                key = (DIVIDING, str(res.result))
                if key not in seen:
                    seen.add(key)
                    out.append((move, res))
        if E in normal.summands:
            rest = list(normal.summands)
            rest.remove(E)
            remainder = ConnectedSum.of(rest)
            for p, q in slopes:
                move = SurgeryMove(ci, NONDIVIDING, p, q, a2=remainder)
                try:
                    res = surger_backward(expr, move)
                except (OpaqueBase, NonCoprimeParameters):
                    continue
                key = (NONDIVIDING, str(res.result))
                if key not in seen:
                    seen.add(key)
                    out.append((move, res))
    return out


# ---------------------------------------------------------------------------
# Candidate classification for the backward induction

SURVIVES = "SURVIVES"
ELIMINATED = "ELIMINATED"
BRANCHED = "BRANCHED"
COUNTEREXAMPLE = "COUNTEREXAMPLE"


@dataclass(frozen=True)
class BranchOutcome:
    resolution: str  # "as E" | "as E-irreducible"
    verdict: "CandidateVerdict"


@dataclass(frozen=True)
class CandidateVerdict:
    expr: Expression
    status: str  # SURVIVES | ELIMINATED | BRANCHED | COUNTEREXAMPLE
    predicate: str
    branches: tuple[BranchOutcome, ...] = ()

    def survivors(self) -> list[Expression]:
        if self.status == SURVIVES:
            return [self.expr]
        out: list[Expression] = []
        for b in self.branches:
            out.extend(b.verdict.survivors())
        return out

    def closed(self) -> bool:
        """True when no resolution path is left unclassified."""
        if self.status == COUNTEREXAMPLE:
            return False
        return all(b.verdict.closed() for b in self.branches)

    def open_expressions(self) -> list[Expression]:
        if self.status == COUNTEREXAMPLE:
            return [self.expr]
        out: list[Expression] = []
        for b in self.branches:
            out.extend(b.verdict.open_expressions())
        return out


def _all_e(expr: Expression) -> bool:
    return all(c == E_COMPONENT for c in expr.components) and bool(expr.components)


def classify_candidate(expr: Expression) -> CandidateVerdict:
    """SURVIVES if every component is E; ELIMINATED when some component is
    certified E-irreducible; the Surg(S3,1,0) dichotomy expands into both
    resolutions (E first, then E-irreducible), and each must close."""
    expr = normalize(expr)
    if _all_e(expr):
        return CandidateVerdict(expr, SURVIVES, "all components are E")
    verdicts = [(comp, is_E_irreducible(comp)) for comp in expr.components]
    for comp, v in verdicts:
        if v is EIrreducibility.YES:
            return CandidateVerdict(expr, ELIMINATED, f"is_E_irreducible({comp}) = true")
    branch_comps = [comp for comp, v in verdicts if v is EIrreducibility.E_OR_IRREDUCIBLE]
    if branch_comps:
        comp = branch_comps[0]
        rest = list(expr.components)
        rest.remove(comp)
        as_e = normalize(Expression.of(rest + [E_COMPONENT]))
        e_sub = classify_candidate(as_e)
        irr_sub = CandidateVerdict(
            expr,
            ELIMINATED,
            f"is_E_irreducible({comp}) = true under the irreducible resolution",
        )
        branches = (BranchOutcome("as E", e_sub), BranchOutcome("as E-irreducible", irr_sub))
        status = BRANCHED if e_sub.closed() else COUNTEREXAMPLE
        return CandidateVerdict(
            expr,
            status,
            f"{comp} is E or E-irreducible; both resolutions examined",
            branches,
        )
    return CandidateVerdict(
        expr,
        COUNTEREXAMPLE,
        "a component is neither E nor certified E-irreducible",
    )


# ---------------------------------------------------------------------------
# Exhaustive backward induction


@dataclass(frozen=True)
class StageRecord:
    backward_step: int  # 1-based: step s derives candidates for Q_{k-1-s}
    source: Expression
    candidates: tuple[tuple[SurgeryMove, CandidateVerdict], ...]


@dataclass(frozen=True)
class ComprCertificate:
    k0: int
    k1: int
    pq_bound: int
    success: bool
    stages: tuple[StageRecord, ...]
    survivors: tuple[tuple[Expression, ...], ...]  # index s = backward step
    counterexamples: tuple[Expression, ...]

    def render(self) -> str:
        lines = [
            f"backward boundary-chain certification: k0={self.k0} k1={self.k1} pq_bound={self.pq_bound}",
            f"Q-chain anchor: {copies_of_e(1)}",
        ]

        def emit(verdict: CandidateVerdict, depth: int) -> None:
            pad = "  " * depth
            if verdict.status == ELIMINATED:
                lines.append(f"{pad}{ELIMINATED}({verdict.predicate})")
            elif verdict.status == SURVIVES:
                lines.append(f"{pad}{SURVIVES}")
            elif verdict.status in (BRANCHED, COUNTEREXAMPLE) and verdict.branches:
                for b in verdict.branches:
                    lines.append(f"{pad}branch {b.resolution}: {b.verdict.expr}")
                    emit(b.verdict, depth + 1)
            else:
                lines.append(f"{pad}{COUNTEREXAMPLE}({verdict.predicate})")

        for record in self.stages:
            lines.append(f"step {record.backward_step}: candidates from {record.source}")
            for move, verdict in record.candidates:
                lines.append(f"  move {move.describe()} -> {verdict.expr}")
                emit(verdict, 2)
        for s, survivors in enumerate(self.survivors):
            shown = ", ".join(str(e) for e in survivors) or "(none)"
            lines.append(f"survivors after step {s}: {shown}")
        target = copies_of_e(self.k0)
        lines.append(f"target boundary {target}: {'certified' if self.success else 'NOT certified'}")
        for c in self.counterexamples:
            lines.append(f"{COUNTEREXAMPLE}: {c}")
        return "\n".join(lines)


@lru_cache(maxsize=None)
def verify_compr(k0: int, k1: int, pq_bound: int) -> ComprCertificate:
    """Walk backward from one copy of E through k1 surgery stages.

    Every enumerated candidate must either consist entirely of copies of E
    or carry a component certified E-irreducible (impossible strictly inside
    the chain, whose ends are unions of copies of E).  The Surg(S3,1,0)
    dichotomy is expanded into both resolutions and both must close.
    """
    if k0 < 1 or k1 < k0 - 1:
        raise ValueError("requires k1 >= k0 - 1 >= 0")
    if pq_bound < 1:
        raise ValueError("pq_bound must be >= 1")
    frontier: list[Expression] = [copies_of_e(1)]
    survivors_per_step: list[tuple[Expression, ...]] = [tuple(frontier)]
    stages: list[StageRecord] = []
    counterexamples: list[Expression] = []
    for step in range(1, k1 + 1):
        next_frontier: dict[str, Expression] = {}
        for source in frontier:
            records = []
            for move, res in enumerate_moves(source, pq_bound):
                verdict = classify_candidate(res.result)
                records.append((move, verdict))
                counterexamples.extend(verdict.open_expressions())
                for surv in verdict.survivors():
                    next_frontier.setdefault(str(surv), surv)
            stages.append(StageRecord(step, source, tuple(records)))
        frontier = [next_frontier[k] for k in sorted(next_frontier)]
        survivors_per_step.append(tuple(frontier))
    target = copies_of_e(k0)
    success = not counterexamples and target in survivors_per_step[k1]
    return ComprCertificate(
        k0,
        k1,
        pq_bound,
        success,
        tuple(stages),
        tuple(survivors_per_step),
        tuple(counterexamples),
    )
