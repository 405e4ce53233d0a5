"""Seeded random generators shared across the test modules."""

from __future__ import annotations

import itertools

import numpy as np

from advbound.adversary import AdversaryMatrix, MinimaxWitness
from advbound.boolfn import And, BooleanFunction, CompositionSpec, Leaf, Not, Or
from advbound.specmat import SymMatrix


def random_function(rng: np.random.Generator, n: int, nonconstant: bool = True) -> BooleanFunction:
    while True:
        bits = rng.integers(0, 2, size=2**n)
        if not nonconstant or (0 in bits and 1 in bits):
            break
    dom = tuple("".join(t) for t in itertools.product("01", repeat=n))
    return BooleanFunction(n, dom, tuple(int(b) for b in bits))


def random_gamma(
    f: BooleanFunction, rng: np.random.Generator, low: float = 0.1, high: float = 1.0
) -> AdversaryMatrix:
    """Positive weights on every differing-output pair (connected support)."""
    vals = np.array(f.values)
    m = len(f.domain)
    entries = np.zeros((m, m))
    xs, ys = np.where(vals[:, None] < vals[None, :])
    w = rng.uniform(low, high, size=xs.size)
    entries[xs, ys] = w
    entries[ys, xs] = w
    return AdversaryMatrix(f, SymMatrix(f.domain, entries))


def random_witness(f: BooleanFunction, rng: np.random.Generator) -> MinimaxWitness:
    rows = {}
    for x in f.domain:
        p = rng.uniform(0.05, 1.0, size=f.arity)
        p /= p.sum()
        rows[x] = tuple(float(q) for q in p)
    return MinimaxWitness(f, rows)


def random_costs(rng: np.random.Generator, n: int) -> tuple[float, ...]:
    return tuple(float(c) for c in rng.uniform(0.2, 3.0, size=n))


def random_composition_case(seed: int, k_max: int = 3, inner_max: int = 2):
    """Deterministic (spec, gamma_f, gammas_g) for one case index."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, k_max + 1))
    inner = tuple(random_function(rng, int(rng.integers(1, inner_max + 1))) for _ in range(k))
    outer = random_function(rng, k)
    spec = CompositionSpec(outer, inner)
    gamma_f = random_gamma(outer, rng)
    gammas_g = [random_gamma(g, rng) for g in inner]
    return spec, gamma_f, gammas_g


def random_read_once_ast(rng: np.random.Generator, n: int, ordered: bool = False):
    """Random AND/OR/NOT tree using x1..xn exactly once each."""
    idxs = list(range(1, n + 1))
    if not ordered:
        rng.shuffle(idxs)
    nodes: list = [Leaf(i) for i in idxs]
    while len(nodes) > 1:
        j = int(rng.integers(0, len(nodes) - 1))
        op = And if rng.random() < 0.5 else Or
        merged = op(nodes[j], nodes[j + 1])
        if rng.random() < 0.25:
            merged = Not(merged)
        nodes[j : j + 2] = [merged]
    root = nodes[0]
    if rng.random() < 0.25:
        root = Not(root)
    return root
