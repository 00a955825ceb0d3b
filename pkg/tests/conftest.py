"""Shared randomized generators for the test suite (seeded, deterministic)."""

from __future__ import annotations

import random
from math import gcd

from roundflow.flows import FlowSpec, Orbit, flow
from roundflow.manifolds import (
    E,
    S3,
    ConnectedSum,
    Expression,
    Prime,
    lens,
    surg,
)


def random_coprime_pair(rng: random.Random, bound: int) -> tuple[int, int]:
    while True:
        p = rng.randint(-bound, bound)
        q = rng.randint(-bound, bound)
        if gcd(abs(p), abs(q)) == 1:
            return p, q


def random_prime(rng: random.Random, bound: int = 20, allow_surg_e: bool = True) -> Prime:
    kinds = ["S3", "E", "L", "SurgS3"] + (["SurgE"] if allow_surg_e else [])
    kind = rng.choice(kinds)
    if kind == "S3":
        return S3
    if kind == "E":
        return E
    p, q = random_coprime_pair(rng, bound)
    if kind == "L":
        return lens(p, q)
    return surg("S3" if kind == "SurgS3" else "E", p, q)


def random_component(
    rng: random.Random, bound: int = 20, max_summands: int = 6, allow_surg_e: bool = True
) -> ConnectedSum:
    n = rng.randint(1, max_summands)
    return ConnectedSum.of(random_prime(rng, bound, allow_surg_e) for _ in range(n))


def random_expression(
    rng: random.Random,
    bound: int = 20,
    max_components: int = 3,
    max_summands: int = 6,
    allow_surg_e: bool = True,
) -> Expression:
    n = rng.randint(1, max_components)
    return Expression.of(
        random_component(rng, bound, max_summands, allow_surg_e) for _ in range(n)
    )


def random_flow_spec(
    rng: random.Random, max_orbits: int = 7, edge_prob: float = 0.3
) -> FlowSpec:
    n = rng.randint(2, max_orbits)
    ids = [f"o{i}" for i in range(n)]
    orbits = [Orbit(i, rng.choice([0, 1, 2, 3])) for i in ids]
    edges = []
    for x in ids:
        for y in ids:
            if x != y and rng.random() < edge_prob:
                edges.append((x, y))
    return flow(True, orbits, edges)
