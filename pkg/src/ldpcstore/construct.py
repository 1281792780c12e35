"""Large-girth graph construction: progressive edge growth, circulant lifting."""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .errors import InfeasibleSpec
from .graph import FactorGraph

INF = math.inf


@dataclass(frozen=True)
class ConstructionSpec:
    """Inputs for :func:`peg_construct`.

    ``cn_regular`` caps every check node at ``E / m`` edges, which is how
    minimum-repair-bandwidth codes are built.  Degree-1 variable nodes are
    rejected unless ``allow_degree_one`` is set.
    """

    n: int
    m: int
    vn_degree_targets: tuple[int, ...]
    seed: Optional[int] = None
    circulant_size: Optional[int] = None
    cn_regular: bool = False
    allow_degree_one: bool = False

    def __post_init__(self):
        object.__setattr__(self, "vn_degree_targets", tuple(int(d) for d in self.vn_degree_targets))
        if self.n < 1 or self.m < 1:
            raise InfeasibleSpec("n and m must be positive")
        if len(self.vn_degree_targets) != self.n:
            raise InfeasibleSpec(f"{len(self.vn_degree_targets)} degree targets for n={self.n}")
        lowest = 1 if self.allow_degree_one else 2
        if min(self.vn_degree_targets) < lowest:
            raise InfeasibleSpec(f"VN degrees below {lowest} are not allowed")
        if max(self.vn_degree_targets) > self.m:
            raise InfeasibleSpec("a VN degree exceeds m; parallel edges would be needed")
        if self.cn_regular and self.num_edges % self.m:
            raise InfeasibleSpec(f"E={self.num_edges} is not divisible by m={self.m}")
        if self.circulant_size is not None and self.circulant_size < 1:
            raise InfeasibleSpec("circulant_size must be at least 1")

    @classmethod
    def regular(cls, n: int, m: int, dv: int, seed=None, **kw) -> "ConstructionSpec":
        """VN-regular spec; CN regularity is requested whenever ``m | n*dv``."""
        kw.setdefault("cn_regular", (n * dv) % m == 0)
        return cls(n, m, (dv,) * n, seed=seed, **kw)

    @property
    def num_edges(self) -> int:
        return sum(self.vn_degree_targets)


def _cn_distances(vn_adj, cn_adj, root: int, m: int) -> list[float]:
    """BFS depth (in CN layers, 0-based) of each CN from VN ``root``."""
    dist = [INF] * m
    seen_vn = {root}
    frontier = deque()
    for r in vn_adj[root]:
        dist[r] = 0
        frontier.append(r)
    while frontier:
        r = frontier.popleft()
        for u in cn_adj[r]:
            if u in seen_vn:
                continue
            seen_vn.add(u)
            for r2 in vn_adj[u]:
                if dist[r2] == INF:
                    dist[r2] = dist[r] + 1
                    frontier.append(r2)
    return dist


def peg_construct(spec: ConstructionSpec, attempts: int = 8) -> FactorGraph:
    """Progressive edge growth.

    Variable nodes are processed in non-decreasing target degree.  Each new
    edge goes to an admissible check node farthest from the VN's current
    computation tree (unreached counts as infinitely far); ties go to the
    lowest current CN degree, then to a seeded uniform pick (lowest index
    when ``seed`` is None).

    The CN-degree cap of ``cn_regular`` can corner the greedy into a short
    cycle near the end, so with a seed the pass is repeated ``attempts``
    times on derived seeds and the first graph of largest girth is kept.
    Output is a pure function of ``(spec, attempts)``.
    """
    if spec.seed is None or attempts <= 1:
        return _peg_pass(spec, spec.seed)
    best, best_girth = None, -1
    for k in range(attempts):
        g = _peg_pass(spec, spec.seed if k == 0 else f"{spec.seed}:{k}")
        gg = girth(g)
        if gg > best_girth:
            best, best_girth = g, gg
    return best


def _peg_pass(spec: ConstructionSpec, seed) -> FactorGraph:
    n, m = spec.n, spec.m
    cap = spec.num_edges // m if spec.cn_regular else None
    rng = random.Random(seed) if seed is not None else None
    vn_adj: list[list[int]] = [[] for _ in range(n)]
    cn_adj: list[list[int]] = [[] for _ in range(m)]
    order = sorted(range(n), key=lambda u: (spec.vn_degree_targets[u], u))

    for u in order:
        for _ in range(spec.vn_degree_targets[u]):
            dist = _cn_distances(vn_adj, cn_adj, u, m) if vn_adj[u] else [INF] * m
            best_key = None
            ties: list[int] = []
            for r in range(m):
                if r in vn_adj[u] or (cap is not None and len(cn_adj[r]) >= cap):
                    continue
                key = (-dist[r], len(cn_adj[r]))
                if best_key is None or key < best_key:
                    best_key, ties = key, [r]
                elif key == best_key:
                    ties.append(r)
            if not ties:
                raise InfeasibleSpec(f"no admissible check node left for VN {u}")
            r = ties[0] if rng is None else rng.choice(ties)
            vn_adj[u].append(r)
            cn_adj[r].append(u)

    return FactorGraph(
        n,
        m,
        tuple(tuple(sorted(a)) for a in vn_adj),
        tuple(tuple(sorted(a)) for a in cn_adj),
    )


def girth(g: FactorGraph) -> float:
    """Length of the shortest cycle, or ``math.inf`` for a forest.

    BFS from every variable node; every cycle passes through one.
    """
    n = g.n
    # unified ids: VN u -> u, CN r -> n + r
    adj = [[n + r for r in row] for row in g.vn_adj] + [list(row) for row in g.cn_adj]
    best = INF
    for s in range(n):
        dist = {s: 0}
        parent = {s: -1}
        q = deque([s])
        while q:
            x = q.popleft()
            if 2 * dist[x] + 1 >= best:
                break
            for y in adj[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    q.append(y)
                elif parent[x] != y:
                    best = min(best, dist[x] + dist[y] + 1)
    return best if best == INF else int(best)


def qc_lift(base: FactorGraph, circulant_size: int, seed=None) -> FactorGraph:
    """Replace every base edge by an ``L x L`` circulant permutation.

    Lifted VN ``(u, a)`` has index ``u*L + a`` and joins CN ``(r, (a+s) % L)``
    where ``s`` is the shift of base edge ``(u, r)``.  Shifts are fixed
    greedily in edge order, each maximising the shortest cycle it closes in
    the partially lifted graph (so shifts closing 4-cycles lose whenever an
    alternative exists); ties are broken by a seeded shuffle.
    """
    L = int(circulant_size)
    if L < 1:
        raise ValueError("circulant_size must be at least 1")
    rng = random.Random(seed)
    N, M = base.n * L, base.m * L
    vn_adj: list[list[int]] = [[] for _ in range(N)]
    cn_adj: list[list[int]] = [[] for _ in range(M)]

    for u, r in base.edges():
        root = u * L
        if vn_adj[root]:
            dist = _cn_distances(vn_adj, cn_adj, root, M)
        else:
            dist = [INF] * M
        shifts = list(range(L))
        rng.shuffle(shifts)
        # a CN at BFS layer k is 2k+1 hops away; the new edge closes a cycle of 2k+2
        s = max(shifts, key=lambda s: 2 * dist[r * L + s] + 2)
        for a in range(L):
            b = r * L + (a + s) % L
            vn_adj[u * L + a].append(b)
            cn_adj[b].append(u * L + a)

    return FactorGraph(
        N,
        M,
        tuple(tuple(sorted(a)) for a in vn_adj),
        tuple(tuple(sorted(a)) for a in cn_adj),
    )


def construct(spec: ConstructionSpec, attempts: int = 8) -> FactorGraph:
    """PEG, optionally followed by circulant lifting when ``circulant_size`` is set.

    With lifting, ``spec.n`` and ``spec.m`` describe the base graph.
    """
    g = peg_construct(spec, attempts)
    if spec.circulant_size and spec.circulant_size > 1:
        g = qc_lift(g, spec.circulant_size, seed=spec.seed)
    return g


def degree_targets_from_fractions(n: int, vn_fractions: dict[int, float]) -> list[int]:
    """Round node-perspective fractions to an integer degree list of length n.

    Largest-remainder rounding; lowest degrees first in the returned list.
    """
    raw = {d: f * n for d, f in vn_fractions.items()}
    counts = {d: int(math.floor(x)) for d, x in raw.items()}
    short = n - sum(counts.values())
    for d in sorted(raw, key=lambda d: (-(raw[d] - counts[d]), d))[:short]:
        counts[d] += 1
    out: list[int] = []
    for d in sorted(counts):
        out += [d] * counts[d]
    return out


def degree_targets_with_edge_count(
    n: int, vn_fractions: dict[int, float], num_edges: int
) -> list[int]:
    """Like :func:`degree_targets_from_fractions` but nudged to exactly ``num_edges``.

    Needed for CN-regular irregular codes where ``E`` must equal ``m * d_c``.
    Degrees are moved one step at a time between adjacent listed degrees.
    """
    targets = degree_targets_from_fractions(n, vn_fractions)
    degs = sorted(vn_fractions)
    diff = num_edges - sum(targets)
    i = 0
    while diff != 0 and i < 10 * n * max(degs):
        i += 1
        if diff > 0:
            # raise a VN at the highest degree below max to the next listed degree
            for j in range(len(targets) - 1, -1, -1):
                d = targets[j]
                bigger = [x for x in degs if x > d]
                if bigger and bigger[0] - d <= diff:
                    targets[j] = bigger[0]
                    diff -= bigger[0] - d
                    break
            else:
                break
        else:
            for j in range(len(targets)):
                d = targets[j]
                smaller = [x for x in degs if x < d]
                if smaller and d - smaller[-1] <= -diff:
                    targets[j] = smaller[-1]
                    diff += d - smaller[-1]
                    break
            else:
                break
    if diff != 0:
        raise InfeasibleSpec(f"cannot hit E={num_edges} with degrees {degs}")
    return sorted(targets)

