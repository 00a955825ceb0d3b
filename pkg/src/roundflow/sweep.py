"""Exhaustive desk-scale sweep over the admissible index-1 flow family.

For each pair (k0, k1) the sweep enumerates every abstract placement of the
saddle feet (each saddle either merges two current pieces or re-attaches to
one), builds a concrete flow spec realizing it, and runs the full pipeline.
Placements that leave the pre-cap stage connected must classify as S3xS1;
the rest must be obstructed at the cap.
"""

from __future__ import annotations

from dataclasses import dataclass

from .filtration import verify_main_theorem
from .flows import FlowSpec, Orbit, flow

MERGE = "merge"
SELF = "self"


def placements(k0: int, k1: int) -> list[tuple[str, ...]]:
    """All realizable merge/self sequences of length k1 starting from k0 pieces."""
    out: list[tuple[str, ...]] = []

    def walk(prefix: tuple[str, ...], count: int) -> None:
        if len(prefix) == k1:
            out.append(prefix)
            return
        if count >= 2:
            walk(prefix + (MERGE,), count - 1)
        walk(prefix + (SELF,), count)

    walk((), k0)
    return out


def final_piece_count(k0: int, placement: tuple[str, ...]) -> int:
    return k0 - sum(1 for step in placement if step == MERGE)


def spec_for_placement(
    k0: int,
    k1: int,
    placement: tuple[str, ...] = (),
    orientable: bool = True,
    twist_saddles: bool = True,
) -> FlowSpec:
    """A concrete spec whose derived feet realize the given placement.

    Saddles alternate twisted/untwisted when twist_saddles is set, so the
    untwisting preprocessing is exercised.
    """
    if len(placement) != k1:
        raise ValueError("placement length must equal k1")
    attractors = [f"a{i}" for i in range(1, k0 + 1)]
    orbits = [Orbit(a, 0) for a in attractors]
    pieces: list[list[str]] = [[a] for a in attractors]
    edges: list[tuple[str, str]] = []
    for t, step in enumerate(placement, start=1):
        sid = f"s{t}"
        rho = -1 if (twist_saddles and t % 2 == 1) else +1
        orbits.append(Orbit(sid, 1, rho=rho))
        if step == MERGE:
            if len(pieces) < 2:
                raise ValueError("merge step with fewer than two pieces")
            edges.append((pieces[0][0], sid))
            edges.append((pieces[1][0], sid))
            pieces[0].extend(pieces.pop(1))
        else:
            edges.append((pieces[0][0], sid))
        pieces[0].append(sid)
    orbits.append(Orbit("r1", 3))
    return flow(orientable, orbits, edges)


@dataclass(frozen=True)
class SweepRow:
    k0: int
    k1: int
    placements: int
    classified: int  # verdicts S3xS1
    obstructed: int
    status: str  # OK when every placement behaved as predicted

    def as_text(self) -> str:
        return (
            f"{self.k0:>2} {self.k1:>2} {self.placements:>10} "
            f"{self.classified:>5} {self.obstructed:>10} {self.status}"
        )


@dataclass(frozen=True)
class SweepReport:
    rows: tuple[SweepRow, ...]

    @property
    def ok(self) -> bool:
        return all(r.status == "OK" for r in self.rows)

    def render(self) -> str:
        lines = ["k0 k1 placements S3xS1 obstructed status"]
        lines.extend(r.as_text() for r in self.rows)
        lines.append(f"sweep: {'OK' if self.ok else 'FAIL'}")
        return "\n".join(lines)


def run_sweep(k0_max: int, k1_extra: int, pq_bound: int) -> SweepReport:
    """Verify every placement for k0 in 1..k0_max, k1 in k0-1..k0-1+k1_extra."""
    rows = []
    for k0 in range(1, k0_max + 1):
        for k1 in range(k0 - 1, k0 - 1 + k1_extra + 1):
            all_placements = placements(k0, k1)
            classified = 0
            obstructed_count = 0
            ok = True
            for pl in all_placements:
                spec = spec_for_placement(k0, k1, pl)
                verdict, _ = verify_main_theorem(spec, pq_bound)
                connected = final_piece_count(k0, pl) == 1
                if verdict.ok:
                    classified += 1
                    if not connected:
                        ok = False
                else:
                    obstructed_count += 1
                    if connected or verdict.obstruction != "pre-cap stage not connected":
                        ok = False
            rows.append(
                SweepRow(
                    k0,
                    k1,
                    len(all_placements),
                    classified,
                    obstructed_count,
                    "OK" if ok else "FAIL",
                )
            )
    return SweepReport(tuple(rows))
