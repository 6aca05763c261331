"""Seeded generators of small random finite CBNs and interventions."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from cbnvalidity import Cbn, Dag, FiniteKernel, NotAnInterventionError


def random_row(rng, size, zero_rate=0.25):
    """Random exact probability vector with small denominators."""
    while True:
        w = [0 if rng.random() < zero_rate else rng.randint(1, 4) for _ in range(size)]
        if sum(w):
            total = sum(w)
            return [Fraction(x, total) for x in w]


def random_kernel(rng, domain, parent_domains, perfect=False, zero_rate=0.25):
    if perfect:
        return FiniteKernel.constant(domain, random_row(rng, len(domain), zero_rate), parent_domains)
    rows = {pa: random_row(rng, len(domain), zero_rate) for pa in itertools.product(*parent_domains)}
    return FiniteKernel(domain, parent_domains, rows)


def random_cbn(rng, n_min=1, n_max=4, dom_max=3, edge_rate=0.5, zero_rate=0.25):
    """Random finite CBN with ``n_min..n_max`` nodes and domains of size 2..dom_max.

    The topological order is a random permutation of the node indices, so
    parent lists are not always lower-indexed.
    """
    n = rng.randint(n_min, n_max)
    names = [f"V{i}" for i in range(n)]
    domains = [tuple(range(rng.randint(2, dom_max))) for _ in range(n)]
    order = list(range(n))
    rng.shuffle(order)
    edges = [(order[a], order[b]) for a in range(n) for b in range(a + 1, n) if rng.random() < edge_rate]
    dag = Dag.from_edges(n, edges)
    kernels = []
    for j in range(n):
        pdoms = [domains[p] for p in dag.parents[j]]
        kernels.append(random_kernel(rng, domains[j], pdoms, zero_rate=zero_rate))
    return Cbn(names, dag, kernels)


def random_intervention(c, rng, nodes=None, perfect=None, size=None, tries=50, label=None, keep_rate=0.0):
    """Random valid intervention on ``c`` or None if none was found.

    Parameters
    ----------
    nodes : sequence, optional
        Exact target set; otherwise a random nonempty subset (of ``size`` if given).
    perfect : bool, optional
        Force perfect (True) or parent-dependent (False) kernels; random if None.
    keep_rate : float
        Chance that a target keeps its observational kernel, which yields
        non-minimal interventions.
    """
    for _ in range(tries):
        if nodes is not None:
            targets = list(nodes)
        else:
            k = size if size is not None else rng.randint(1, len(c.vars))
            targets = rng.sample(list(c.vars), k)
        kernels = {}
        for v in targets:
            k = c.kernel(v)
            if len(targets) > 1 and rng.random() < keep_rate:
                kernels[v] = k
                continue
            perf = perfect if perfect is not None else rng.random() < 0.5
            kernels[v] = random_kernel(rng, k.domain, k.parent_domains, perfect=perf)
        try:
            return c.intervention(kernels, label)
        except NotAnInterventionError:
            continue
    return None


def random_interventions(c, rng, count, **kwargs):
    out = []
    for i in range(count):
        d = random_intervention(c, rng, label=f"d{i}", **kwargs)
        if d is not None:
            out.append(d)
    return out


def rngs(seed, count):
    """``count`` independent generators derived from one seed."""
    master = random.Random(seed)
    return [random.Random(master.getrandbits(64)) for _ in range(count)]
