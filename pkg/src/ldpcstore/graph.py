"""Factor graphs, degree distributions and repair-bandwidth accounting.

A factor graph is the bipartite (Tanner) graph of a binary parity-check
matrix: ``n`` variable nodes (stored blocks) and ``m`` check nodes (parity
equations).  Everything here is exact where it can be: degree fractions and
repair bandwidth are returned as :class:`fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Iterable, Mapping, Sequence

from .errors import (
    DuplicateEdge,
    EmptyGraph,
    GraphError,
    IndexOutOfRange,
    Infeasible,
    InvalidRate,
    IsolatedNode,
    ZeroDenominator,
)

_SUM_TOL = 1e-9


@dataclass(frozen=True)
class FactorGraph:
    """Immutable bipartite graph with sorted adjacency in both directions.

    Build instances with :func:`graph_from_parity_rows` or
    :meth:`from_edges`; the constructor validates consistency but does not
    sort for you.
    """

    n: int
    m: int
    vn_adj: tuple[tuple[int, ...], ...]
    cn_adj: tuple[tuple[int, ...], ...]
    E: int = field(init=False)

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise EmptyGraph(f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}")
        if len(self.vn_adj) != self.n or len(self.cn_adj) != self.m:
            raise GraphError("adjacency lengths do not match n/m")
        edges_v = set()
        for u, row in enumerate(self.vn_adj):
            if not row:
                raise IsolatedNode(f"VN {u} has degree 0")
            if list(row) != sorted(set(row)):
                raise DuplicateEdge(f"VN {u} adjacency is unsorted or repeats a CN")
            for r in row:
                if not 0 <= r < self.m:
                    raise IndexOutOfRange(f"CN index {r} out of range for m={self.m}")
                edges_v.add((u, r))
        edges_c = set()
        for r, row in enumerate(self.cn_adj):
            if list(row) != sorted(set(row)):
                raise DuplicateEdge(f"CN {r} adjacency is unsorted or repeats a VN")
            for u in row:
                if not 0 <= u < self.n:
                    raise IndexOutOfRange(f"VN index {u} out of range for n={self.n}")
                edges_c.add((u, r))
        if edges_v != edges_c:
            raise GraphError("VN and CN adjacency describe different edge sets")
        object.__setattr__(self, "E", len(edges_v))

    @classmethod
    def from_edges(cls, n: int, m: int, edges: Iterable[tuple[int, int]]) -> "FactorGraph":
        """Build from ``(vn, cn)`` pairs; a repeated pair raises DuplicateEdge."""
        vn: list[list[int]] = [[] for _ in range(n)]
        cn: list[list[int]] = [[] for _ in range(m)]
        seen = set()
        for u, r in edges:
            if not (0 <= u < n):
                raise IndexOutOfRange(f"VN index {u} out of range for n={n}")
            if not (0 <= r < m):
                raise IndexOutOfRange(f"CN index {r} out of range for m={m}")
            if (u, r) in seen:
                raise DuplicateEdge(f"edge (VN {u}, CN {r}) given twice")
            seen.add((u, r))
            vn[u].append(r)
            cn[r].append(u)
        if not seen:
            raise EmptyGraph("graph has no edges")
        return cls(n, m, tuple(tuple(sorted(a)) for a in vn), tuple(tuple(sorted(a)) for a in cn))

    def edges(self) -> list[tuple[int, int]]:
        return [(u, r) for u, row in enumerate(self.vn_adj) for r in row]

    @property
    def vn_degrees(self) -> list[int]:
        return [len(a) for a in self.vn_adj]

    @property
    def cn_degrees(self) -> list[int]:
        return [len(a) for a in self.cn_adj]

    def to_dense(self):
        """Dense ``m x n`` parity-check matrix as a uint8 numpy array."""
        import numpy as np

        H = np.zeros((self.m, self.n), dtype=np.uint8)
        for r, row in enumerate(self.cn_adj):
            H[r, list(row)] = 1
        return H


def graph_from_parity_rows(rows: Sequence[Sequence[int]], n: int) -> FactorGraph:
    """One list of VN indices per check node, e.g. rows of a sparse H."""
    if n < 1 or not rows:
        raise EmptyGraph("need at least one VN and one CN")
    edges = []
    for r, row in enumerate(rows):
        if len(set(row)) != len(row):
            raise DuplicateEdge(f"CN {r} lists a VN more than once: {list(row)}")
        edges.extend((u, r) for u in row)
    return FactorGraph.from_edges(n, len(rows), edges)


# -- degree distributions -----------------------------------------------------


def _poly_eval(coeffs: Mapping[int, Real], x: float) -> float:
    return sum(c * x ** (d - 1) for d, c in coeffs.items())


@dataclass(frozen=True)
class DegreeDistribution:
    """Edge-perspective degree distribution pair (lambda, rho).

    ``lambda_coeffs[d]`` is the fraction of edges attached to degree-``d``
    variable nodes; ``rho_coeffs`` likewise for check nodes.  Coefficients
    may be floats or Fractions.
    """

    lambda_coeffs: Mapping[int, Real]
    rho_coeffs: Mapping[int, Real]

    def __post_init__(self):
        for name, coeffs in (("lambda", self.lambda_coeffs), ("rho", self.rho_coeffs)):
            if not coeffs:
                raise ValueError(f"{name} has no coefficients")
            for d, c in coeffs.items():
                if int(d) != d or d < 1:
                    raise ValueError(f"{name}: degree {d!r} must be a positive integer")
                if not 0 <= c <= 1:
                    raise ValueError(f"{name}_{d} = {c} outside [0, 1]")
            total = sum(coeffs.values())
            if abs(total - 1) > _SUM_TOL:
                raise ValueError(f"{name} coefficients sum to {float(total)!r}, not 1")
        object.__setattr__(self, "lambda_coeffs", dict(sorted(self.lambda_coeffs.items())))
        object.__setattr__(self, "rho_coeffs", dict(sorted(self.rho_coeffs.items())))

    @classmethod
    def regular(cls, dv: int, dc: int) -> "DegreeDistribution":
        return cls({dv: Fraction(1)}, {dc: Fraction(1)})

    @classmethod
    def from_node_perspective(
        cls, vn_fractions: Mapping[int, Real], cn_fractions: Mapping[int, Real]
    ) -> "DegreeDistribution":
        return cls(_node_to_edge(vn_fractions), _node_to_edge(cn_fractions))

    def lam(self, x: float) -> float:
        return _poly_eval(self.lambda_coeffs, x)

    def rho(self, x: float) -> float:
        return _poly_eval(self.rho_coeffs, x)

    @property
    def lambda_integral(self):
        """Integral of lambda over [0, 1], i.e. sum of lambda_d / d."""
        return sum(c / d for d, c in self.lambda_coeffs.items())

    @property
    def rho_integral(self):
        return sum(c / d for d, c in self.rho_coeffs.items())

    def vn_node_fractions(self) -> dict[int, Real]:
        """Fraction of variable nodes having each degree."""
        return _edge_to_node(self.lambda_coeffs)

    def cn_node_fractions(self) -> dict[int, Real]:
        return _edge_to_node(self.rho_coeffs)


def _edge_to_node(coeffs: Mapping[int, Real]) -> dict[int, Real]:
    total = sum(c / d for d, c in coeffs.items())
    if total == 0:
        raise ZeroDenominator("distribution has zero integral")
    return {d: (c / d) / total for d, c in coeffs.items()}


def _node_to_edge(fracs: Mapping[int, Real]) -> dict[int, Real]:
    total = sum(d * f for d, f in fracs.items())
    if total == 0:
        raise ZeroDenominator("node distribution has zero mean degree")
    return {d: d * f / total for d, f in fracs.items()}


def degree_profile(g: FactorGraph) -> DegreeDistribution:
    """Exact edge-perspective distribution of a concrete graph."""
    lam: dict[int, Fraction] = {}
    for d in g.vn_degrees:
        lam[d] = lam.get(d, 0) + Fraction(d, g.E)
    rho: dict[int, Fraction] = {}
    for d in g.cn_degrees:
        if d:
            rho[d] = rho.get(d, 0) + Fraction(d, g.E)
    return DegreeDistribution(lam, rho)


def design_rate(dd: DegreeDistribution):
    """``1 - (sum rho_d/d) / (sum lambda_d/d)``; assumes a full-rank H."""
    li = dd.lambda_integral
    if li == 0:
        raise ZeroDenominator("sum of lambda_d/d is zero")
    return 1 - dd.rho_integral / li


def average_vn_degree(dd: DegreeDistribution):
    li = dd.lambda_integral
    if li == 0:
        raise ZeroDenominator("sum of lambda_d/d is zero")
    return 1 / li


# -- repair bandwidth ---------------------------------------------------------


def repair_bandwidth(g: FactorGraph) -> Fraction:
    """Average number of blocks downloaded to rebuild one erased block.

    Edge-weighted: each (VN, CN) incidence contributes ``deg(CN) - 1``, i.e.
    ``sum_r d_r (d_r - 1) / E``.
    """
    if g.E == 0:
        raise EmptyGraph("graph has no edges")
    return repair_bandwidth_from_cn_degrees(g.cn_degrees)


def repair_bandwidth_from_cn_degrees(degrees: Sequence[int]) -> Fraction:
    """Same quantity from the check-degree sequence alone."""
    E = sum(degrees)
    if E == 0:
        raise ZeroDenominator("check degrees sum to zero")
    return Fraction(sum(d * (d - 1) for d in degrees), E)


def per_vn_repair_bandwidth(g: FactorGraph) -> Fraction:
    """Diagnostic: VN-uniform average of each VN's mean repair download.

    Differs from :func:`repair_bandwidth` on VN-irregular graphs.
    """
    degs = g.cn_degrees
    total = Fraction(0)
    for row in g.vn_adj:
        total += Fraction(sum(degs[r] - 1 for r in row), len(row))
    return total / g.n


def repair_plan(g: FactorGraph, failed_vn: int) -> list[tuple[int, frozenset[int]]]:
    """Repair options for one erased VN: ``(cn, other VNs on that cn)``."""
    if not 0 <= failed_vn < g.n:
        raise IndexOutOfRange(f"VN {failed_vn} out of range for n={g.n}")
    checks = g.vn_adj[failed_vn]
    if not checks:
        raise IsolatedNode(f"VN {failed_vn} has no check nodes")
    return [(r, frozenset(u for u in g.cn_adj[r] if u != failed_vn)) for r in checks]


def _as_fraction(R) -> Fraction:
    if isinstance(R, Fraction):
        return R
    if isinstance(R, int):
        return Fraction(R)
    if isinstance(R, str):
        return Fraction(R)
    return Fraction(R).limit_denominator(10**6)


def min_repair_bandwidth(R, dv_min: int = 2) -> int:
    """Smallest achievable repair bandwidth ``d_c - 1`` at rate ``R``.

    Only both-regular graphs with ``d_v = dv_min`` reach it, so
    ``d_c = dv_min / (1 - R)`` must be an integer above ``dv_min``; otherwise
    :class:`Infeasible` is raised with the fractional ``d_c`` as
    ``violation``.  Floats are snapped to the nearest fraction with
    denominator at most 10**6; pass a Fraction or ``"p/q"`` for exactness.
    """
    rate = _as_fraction(R)
    if not 0 < rate < 1:
        raise InvalidRate(f"rate must lie in (0, 1), got {R}")
    if dv_min < 1:
        raise ValueError("dv_min must be at least 1")
    dc = dv_min / (1 - rate)
    if dc.denominator != 1 or dc <= dv_min:
        raise Infeasible(
            f"d_c = {dv_min}/(1-{rate}) = {float(dc):.6g} is not an integer above {dv_min}",
            violation=dc,
        )
    return int(dc) - 1


def gamma_min(R: float, dv: float) -> float:
    """Repair bandwidth of a CN-regular code with average VN degree ``dv``."""
    if not 0 < R < 1:
        raise InvalidRate(f"rate must lie in (0, 1), got {R}")
    return dv / (1 - R) - 1


# -- alist --------------------------------------------------------------------


def read_alist(path) -> FactorGraph:
    """Parse an alist file (1-based indices; zero padding tolerated)."""
    with open(path) as fh:
        tokens = fh.read().split()
    return parse_alist(tokens)


def parse_alist(tokens: Sequence[str] | str) -> FactorGraph:
    if isinstance(tokens, str):
        tokens = tokens.split()
    it = iter(int(t) for t in tokens)
    try:
        n, m = next(it), next(it)
        next(it), next(it)  # max degrees, recomputed
        vn_deg = [next(it) for _ in range(n)]
        cn_deg = [next(it) for _ in range(m)]
        max_v, max_c = max(vn_deg), max(cn_deg)
        # rows may be padded to the max degree or written ragged
        rest = list(it)
    except StopIteration as exc:
        raise GraphError("alist file is truncated") from exc
    vn_rows, cn_rows = _split_alist_body(rest, vn_deg, cn_deg, n, m, max_v, max_c)
    g = graph_from_parity_rows(cn_rows, n)
    if [sorted(r) for r in vn_rows] != [list(a) for a in g.vn_adj]:
        raise GraphError("alist VN and CN sections disagree")
    return g


def _split_alist_body(rest, vn_deg, cn_deg, n, m, max_v, max_c):
    padded = len(rest) == n * max_v + m * max_c
    ragged = len(rest) == sum(vn_deg) + sum(cn_deg)
    if not (padded or ragged):
        raise GraphError("alist body length matches neither padded nor ragged layout")
    pos = 0

    def take(degs, width, bound):
        nonlocal pos
        rows = []
        for d in degs:
            w = width if padded else d
            raw = rest[pos : pos + w]
            pos += w
            idx = [x for x in raw if x != 0]
            if len(idx) != d:
                raise GraphError(f"alist row {raw} does not match degree {d}")
            if any(x < 1 or x > bound for x in idx):
                raise IndexOutOfRange(f"alist index outside 1..{bound}: {raw}")
            rows.append([x - 1 for x in idx])
        return rows

    vn_rows = take(vn_deg, max_v, m)
    cn_rows = take(cn_deg, max_c, n)
    return vn_rows, cn_rows


def format_alist(g: FactorGraph) -> str:
    """Ragged alist text; rows are never zero-padded."""
    lines = [
        f"{g.n} {g.m}",
        f"{max(g.vn_degrees)} {max(g.cn_degrees)}",
        " ".join(map(str, g.vn_degrees)),
        " ".join(map(str, g.cn_degrees)),
    ]
    lines += [" ".join(str(r + 1) for r in row) for row in g.vn_adj]
    lines += [" ".join(str(u + 1) for u in row) for row in g.cn_adj]
    return "\n".join(lines) + "\n"


def write_alist(g: FactorGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_alist(g))


def is_cn_regular(g: FactorGraph) -> bool:
    return len(set(g.cn_degrees)) == 1

