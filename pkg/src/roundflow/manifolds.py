"""Symbolic algebra of closed orientable 3-manifolds.

The boundary manifolds handled here are disjoint unions of connected sums
built from four kinds of prime pieces: the 3-sphere ``S3``, the product
``E = S^2 x S^1``, lens spaces ``L(p,q)``, and opaque Dehn-surgered pieces
``Surg(S3,p,q)`` / ``Surg(E,p,q)``.  The module provides canonical forms,
first homology (two independent routes), and the E-irreducibility predicate.

All values are immutable; all operations are pure functions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from math import gcd
from typing import Iterable


class NonCoprimeParameters(ValueError):
    """Lens or surgery parameters (p, q) with gcd(|p|, |q|) != 1."""


class UnsupportedOpaquePiece(ValueError):
    """Raised by the homology oracle on pieces with no known presentation."""


class ExprParseError(ValueError):
    """Expression text rejected; carries a 1-based column."""

    def __init__(self, message: str, column: int):
        super().__init__(f"column {column}: {message}")
        self.message = message
        self.column = column


# Prime kinds, ranked for canonical multiset ordering.
KIND_S3 = "S3"
KIND_E = "E"
KIND_LENS = "L"
KIND_SURG = "Surg"
_KIND_RANK = {KIND_S3: 0, KIND_E: 1, KIND_LENS: 2, KIND_SURG: 3}


@dataclass(frozen=True)
class Prime:
    """One prime piece.  Parameters are stored as given; use normalize()."""

    kind: str
    p: int = 0
    q: int = 0
    base: str = ""  # surgery base kind: "S3" or "E"

    def sort_key(self):
        return (_KIND_RANK[self.kind], self.base, self.p, self.q)

    def __str__(self) -> str:
        if self.kind == KIND_S3:
            return "S3"
        if self.kind == KIND_E:
            return "E"
        if self.kind == KIND_LENS:
            return f"L({self.p},{self.q})"
        return f"Surg({self.base},{self.p},{self.q})"


S3 = Prime(KIND_S3)
E = Prime(KIND_E)


def lens(p: int, q: int) -> Prime:
    return Prime(KIND_LENS, p, q)


def surg(base: str, p: int, q: int) -> Prime:
    if base not in (KIND_S3, KIND_E):
        raise ValueError(f"surgery base must be S3 or E, got {base!r}")
    return Prime(KIND_SURG, p, q, base)


@dataclass(frozen=True)
class ConnectedSum:
    """A connected component: finite multiset of primes under #.

    The empty connected sum is represented by the singleton (S3,), which is
    the identity of #.  Summands are kept sorted so equality and hashing are
    multiset equality.
    """

    summands: tuple[Prime, ...]

    @classmethod
    def of(cls, summands: Iterable[Prime]) -> "ConnectedSum":
        items = tuple(sorted(summands, key=Prime.sort_key))
        if not items:
            items = (S3,)
        return cls(items)

    def __str__(self) -> str:
        return "#".join(str(s) for s in self.summands)


@dataclass(frozen=True)
class Expression:
    """A closed 3-manifold expression: multiset of components under |."""

    components: tuple[ConnectedSum, ...]

    @classmethod
    def of(cls, components: Iterable[ConnectedSum]) -> "Expression":
        return cls(tuple(sorted(components, key=lambda c: tuple(s.sort_key() for s in c.summands))))

    def __str__(self) -> str:
        if not self.components:
            return "(empty)"
        return " | ".join(str(c) for c in self.components)


def connected_sum(*summands: Prime) -> ConnectedSum:
    return ConnectedSum.of(summands)


def expression(*components: ConnectedSum) -> Expression:
    return Expression.of(components)


E_COMPONENT = connected_sum(E)
S3_COMPONENT = connected_sum(S3)
E_EXPRESSION = expression(E_COMPONENT)


def copies_of_e(n: int) -> Expression:
    """n disjoint copies of S^2 x S^1."""
    return Expression.of([E_COMPONENT] * n)


# ---------------------------------------------------------------------------
# Normalization


def _check_coprime(p: int, q: int, symbol: str) -> None:
    if gcd(abs(p), abs(q)) != 1:
        raise NonCoprimeParameters(
            f"{symbol}({p},{q}): gcd(|p|,|q|) != 1, not a valid surgery slope"
        )


def _lens_orbit_min(p: int, q: int) -> int:
    # Canonical q: minimal element of {+-q^{+-1} mod p}, p >= 2.
    q = q % p
    inv = pow(q, -1, p)
    return min(q, p - q, inv, p - inv)


def _normalize_prime(prime: Prime) -> Prime:
    if prime.kind in (KIND_S3, KIND_E):
        return prime
    p, q = prime.p, prime.q
    if prime.kind == KIND_LENS:
        _check_coprime(p, q, "L")
        if p < 0:
            # Mirror identification: L(-p,q) = L(p, p - (q mod p)).
            p = -p
            q = (p - (q % p)) % p
        if p == 0:
            return E  # L(0,+-1) = S^2 x S^1
        if p == 1:
            return S3  # L(1,q) = S^3
        return Prime(KIND_LENS, p, _lens_orbit_min(p, q))
    # Surgered piece: opaque except for slope-sign identification and the
    # literal identity surgery.
    _check_coprime(p, q, f"Surg({prime.base},.,.) with ")
    if p < 0 or (p == 0 and q < 0):
        p, q = -p, -q
    if (p, q) == (0, 1):
        return S3 if prime.base == KIND_S3 else E
    return Prime(KIND_SURG, p, q, prime.base)


def normalize_sum(component: ConnectedSum) -> ConnectedSum:
    kept = [pr for pr in map(_normalize_prime, component.summands) if pr.kind != KIND_S3]
    return ConnectedSum.of(kept)


def normalize(expr: Expression) -> Expression:
    """Canonical form: primes rewritten, S3 summands dropped, multisets sorted.

    Idempotent and invariant under any permutation of summands/components.
    """
    return Expression.of(normalize_sum(c) for c in expr.components)


# ---------------------------------------------------------------------------
# Homology

UNKNOWN_BETTI = None


@dataclass(frozen=True)
class AbelianGroup:
    """Finitely generated abelian group in divisibility normal form.

    known=False marks a group the symbolic model cannot determine (opaque
    surgered pieces over E).
    """

    known: bool = True
    free_rank: int = 0
    torsion: tuple[int, ...] = ()

    def __str__(self) -> str:
        if not self.known:
            return "unknown"
        return f"rank {self.free_rank}, torsion [{','.join(map(str, self.torsion))}]"


UNKNOWN_GROUP = AbelianGroup(known=False)
TRIVIAL_GROUP = AbelianGroup()


def invariant_factors(orders: Iterable[int]) -> tuple[int, tuple[int, ...]]:
    """Fold cyclic summands Z/n (n=0 meaning Z) into (free_rank, t1|t2|...).

    Works by the gcd/lcm exchange: replacing a non-comparable pair (a, b)
    with (gcd, lcm) preserves the group and terminates in a divisor chain.
    Independent of the Smith-normal-form route used by h1_oracle.
    """
    free = sum(1 for n in orders if n == 0)
    ts = [abs(n) for n in orders if abs(n) > 1]
    changed = True
    while changed:
        changed = False
        for i in range(len(ts)):
            for j in range(len(ts)):
                if i == j:
                    continue
                a, b = ts[i], ts[j]
                if a % b != 0 and b % a != 0:
                    g = gcd(a, b)
                    ts[i], ts[j] = g, a * b // g
                    changed = True
    return free, tuple(sorted(t for t in ts if t > 1))


def _prime_h1_order(prime: Prime) -> int | None:
    """Order of H1 of one prime as a cyclic group (0 = Z, None = unknown)."""
    if prime.kind == KIND_S3:
        return 1
    if prime.kind == KIND_E:
        return 0
    if prime.kind == KIND_LENS:
        _check_coprime(prime.p, prime.q, "L")
        return abs(prime.p)
    # Surgered pieces: H1((S^3)_{p,q}) = Z/q; surgery over E is opaque.
    if prime.base == KIND_S3:
        return abs(prime.q)
    return None


def h1(expr: Expression) -> tuple[AbelianGroup, ...]:
    """First homology per component, direct sum over summands."""
    out = []
    for comp in expr.components:
        orders = [_prime_h1_order(s) for s in comp.summands]
        if any(o is None for o in orders):
            out.append(UNKNOWN_GROUP)
            continue
        free, tors = invariant_factors([o for o in orders if o is not None])
        out.append(AbelianGroup(True, free, tors))
    return tuple(out)


def betti1(expr: Expression) -> tuple[int | None, ...]:
    """First Betti number per component; None where opaque pieces hide it."""
    out = []
    for group in h1(expr):
        out.append(group.free_rank if group.known else None)
    return tuple(out)


def smith_normal_form(matrix: list[list[int]]) -> list[int]:
    """Diagonal of the Smith normal form of an integer matrix.

    Returns non-negative d_1, ..., d_r with d_1 | d_2 | ... (zeros last).
    Exact integer arithmetic throughout.
    """
    a = [row[:] for row in matrix]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    diag: list[int] = []
    t = 0
    while t < min(rows, cols):
        # Pick the smallest-magnitude nonzero entry in the trailing block.
        pivot = None
        for i in range(t, rows):
            for j in range(t, cols):
                if a[i][j] != 0 and (pivot is None or abs(a[i][j]) < abs(a[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        pi, pj = pivot
        a[t], a[pi] = a[pi], a[t]
        for row in a:
            row[t], row[pj] = row[pj], row[t]
        # Clear row and column t; restart if a remainder shrinks the pivot.
        dirty = False
        for i in range(t + 1, rows):
            if a[i][t] != 0:
                f = a[i][t] // a[t][t]
                for j in range(t, cols):
                    a[i][j] -= f * a[t][j]
                if a[i][t] != 0:
                    dirty = True
        for j in range(t + 1, cols):
            if a[t][j] != 0:
                f = a[t][j] // a[t][t]
                for i in range(t, rows):
                    a[i][j] -= f * a[i][t]
                if a[t][j] != 0:
                    dirty = True
        if dirty:
            continue
        # Pivot must divide the rest of the block for the divisor chain.
        offender = None
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if a[i][j] % a[t][t] != 0:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            for j in range(t, cols):
                a[t][j] += a[offender][j]
            continue
        diag.append(abs(a[t][t]))
        t += 1
    diag.extend(0 for _ in range(min(rows, cols) - len(diag)))
    return diag


def h1_oracle(expr: Expression) -> tuple[AbelianGroup, ...]:
    """Independent H1 route: block presentation matrix reduced by SNF."""
    out = []
    for comp in expr.components:
        blocks: list[int] = []
        for s in comp.summands:
            if s.kind == KIND_S3:
                continue
            if s.kind == KIND_E:
                blocks.append(0)
            elif s.kind == KIND_LENS:
                _check_coprime(s.p, s.q, "L")
                blocks.append(abs(s.p))
            elif s.base == KIND_S3:
                blocks.append(abs(s.q))
            else:
                raise UnsupportedOpaquePiece(f"no presentation known for {s}")
        n = len(blocks)
        if n == 0:
            out.append(TRIVIAL_GROUP)
            continue
        matrix = [[blocks[i] if i == j else 0 for j in range(n)] for i in range(n)]
        diag = smith_normal_form(matrix)
        free = sum(1 for d in diag if d == 0)
        tors = tuple(sorted(d for d in diag if d > 1))
        out.append(AbelianGroup(True, free, tors))
    return tuple(out)


# ---------------------------------------------------------------------------
# E-irreducibility


class EIrreducibility(Enum):
    YES = "true"
    NO = "false"
    UNKNOWN = "unknown"
    # Dedicated branch value for the bare Surg(S3,1,0) component, whose
    # homeomorphism type is only pinned down to "E or E-irreducible".
    E_OR_IRREDUCIBLE = "branch-E-or-irreducible"

    def __str__(self) -> str:
        return self.value


_UNIT_SURGERY = Prime(KIND_SURG, 1, 0, KIND_S3)


def is_E_irreducible(
    component: ConnectedSum, assume_unit_surgery_irreducible: bool = False
) -> EIrreducibility:
    """Decide whether a component has no E summand and beta_1 <= 1.

    The flag resolves the Surg(S3,1,0) dichotomy towards the E-irreducible
    branch; without it the bare piece reports the dedicated branch value.
    """
    comp = normalize_sum(component)
    if comp.summands == (_UNIT_SURGERY,) and not assume_unit_surgery_irreducible:
        return EIrreducibility.E_OR_IRREDUCIBLE

    beta_low = 0
    beta_high: int | None = 0  # None once an opaque piece hides the top
    e_free_certain = True
    for s in comp.summands:
        if s.kind == KIND_E:
            return EIrreducibility.NO
        if s.kind in (KIND_S3, KIND_LENS):
            continue
        if s.base == KIND_S3:
            if s.q != 0:
                continue  # finite H1: no E summand, beta_1 = 0
            if assume_unit_surgery_irreducible:
                beta_low += 1
                if beta_high is not None:
                    beta_high += 1
                continue
            # Unresolved unit surgery inside a larger sum: stay agnostic.
            beta_low += 1
            beta_high = None
            e_free_certain = False
        else:
            beta_high = None
            e_free_certain = False
    if beta_low >= 2:
        return EIrreducibility.NO
    if e_free_certain and beta_high is not None and beta_high <= 1:
        return EIrreducibility.YES
    return EIrreducibility.UNKNOWN


# ---------------------------------------------------------------------------
# Expression grammar (ASCII, bit-exact)
#
#   expression := sum ('|' sum)*
#   sum        := prime ('#' prime)*
#   prime      := 'S3' | 'E' | 'L' '(' int ',' int ')'
#               | 'Surg' '(' ('S3'|'E') ',' int ',' int ')'

_TOKEN = re.compile(r"(Surg|S3|E|L|\(|\)|,|#|\||-?\d+)")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    i = 0
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        m = _TOKEN.match(text, i)
        if not m:
            raise ExprParseError(f"unexpected character {text[i]!r}", i + 1)
        tokens.append((m.group(0), i + 1))
        i = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def _peek(self) -> str | None:
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def _next(self, expected: str | None = None) -> tuple[str, int]:
        if self.pos >= len(self.tokens):
            raise ExprParseError(
                f"unexpected end of expression (expected {expected or 'a prime'})",
                len(self.text) + 1,
            )
        tok, col = self.tokens[self.pos]
        self.pos += 1
        if expected is not None and tok != expected:
            raise ExprParseError(f"expected {expected!r}, found {tok!r}", col)
        return tok, col

    def _int(self) -> int:
        tok, col = self._next()
        if not re.fullmatch(r"-?\d+", tok):
            raise ExprParseError(f"expected an integer, found {tok!r}", col)
        return int(tok)

    def _prime(self) -> Prime:
        tok, col = self._next()
        if tok == "S3":
            return S3
        if tok == "E":
            return E
        if tok == "L":
            self._next("(")
            p = self._int()
            self._next(",")
            q = self._int()
            self._next(")")
            return lens(p, q)
        if tok == "Surg":
            self._next("(")
            base_tok, base_col = self._next()
            if base_tok not in ("S3", "E"):
                raise ExprParseError(f"surgery base must be S3 or E, found {base_tok!r}", base_col)
            self._next(",")
            p = self._int()
            self._next(",")
            q = self._int()
            self._next(")")
            return surg(base_tok, p, q)
        raise ExprParseError(f"expected a prime, found {tok!r}", col)

    def _sum(self) -> ConnectedSum:
        summands = [self._prime()]
        while self._peek() == "#":
            self._next()
            summands.append(self._prime())
        return ConnectedSum.of(summands)

    def parse(self) -> Expression:
        components = [self._sum()]
        while self._peek() == "|":
            self._next()
            components.append(self._sum())
        if self.pos < len(self.tokens):
            tok, col = self.tokens[self.pos]
            raise ExprParseError(f"trailing input {tok!r}", col)
        return Expression.of(components)


def parse_expression(text: str) -> Expression:
    if not text.strip():
        raise ExprParseError("empty expression", 1)
    return _Parser(text).parse()


def format_expression(expr: Expression) -> str:
    return str(expr)
