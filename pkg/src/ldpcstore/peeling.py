"""Erasure decoding on the factor graph and the statistics built on it.

The peeling decoder repeatedly resolves any check node with exactly one
erased neighbour.  What it cannot resolve is the largest stopping set
inside the erasure pattern, so every reliability quantity here reduces to
asking whether a pattern contains a stopping set.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats

from .errors import BudgetExceeded
from .graph import FactorGraph

log = logging.getLogger(__name__)

CHUNK = 8192
EXHAUSTIVE_FLOOR = 10**6


@dataclass(frozen=True)
class DecodeResult:
    recovered: frozenset[int]
    residual: frozenset[int]
    iterations: int

    @property
    def success(self) -> bool:
        return not self.residual


def peel_decode(g: FactorGraph, erased: Iterable[int]) -> DecodeResult:
    """Peel until no check node has exactly one erased neighbour.

    ``iterations`` counts passes; each pass resolves every check node that
    is degree-one at the start of that pass.
    """
    erased = set(erased)
    for u in erased:
        if not 0 <= u < g.n:
            raise IndexError(f"VN {u} out of range for n={g.n}")
    remaining = set(erased)
    passes = 0
    while remaining:
        fixable = set()
        for r in {r for u in remaining for r in g.vn_adj[u]}:
            hit = [u for u in g.cn_adj[r] if u in remaining]
            if len(hit) == 1:
                fixable.add(hit[0])
        if not fixable:
            break
        remaining -= fixable
        passes += 1
    return DecodeResult(frozenset(erased - remaining), frozenset(remaining), passes)


def is_stopping_set(g: FactorGraph, vns: Iterable[int]) -> bool:
    """Nonempty and every neighbouring check node touches it at least twice."""
    s = set(vns)
    if not s:
        return False
    touch: dict[int, int] = {}
    for u in s:
        for r in g.vn_adj[u]:
            touch[r] = touch.get(r, 0) + 1
    return all(c >= 2 for c in touch.values())


def stopping_number_exact(
    g: FactorGraph, weight_cutoff: int, budget: int = 5_000_000
) -> Optional[int]:
    """Size of the smallest stopping set, or None if it exceeds ``weight_cutoff``.

    Iterative deepening over the weight.  For each candidate minimum element
    the search only ever adds a VN that sits on a check node currently
    touched once, and gives up on a branch once the dangling checks cannot be
    closed by the VNs still allowed.  ``budget`` caps the number of search
    nodes and raises :class:`BudgetExceeded`.
    """
    if weight_cutoff < 1:
        raise ValueError("weight_cutoff must be at least 1")
    vn_adj, cn_adj = g.vn_adj, g.cn_adj
    dmax = max(g.vn_degrees)
    visited = 0

    def extend(members: set[int], touch: dict[int, int], floor: int, room: int) -> bool:
        nonlocal visited
        visited += 1
        if visited > budget:
            raise BudgetExceeded(f"stopping-set search exceeded {budget} nodes")
        dangling = [r for r, c in touch.items() if c == 1]
        if not dangling:
            return True
        if room == 0 or -(-len(dangling) // dmax) > room:
            return False
        # branch on the dangling check with the fewest ways to close it
        best = None
        for r in dangling:
            cands = [u for u in cn_adj[r] if u > floor and u not in members]
            if not cands:
                return False
            if best is None or len(cands) < len(best):
                best = cands
        for u in best:
            members.add(u)
            for r in vn_adj[u]:
                touch[r] = touch.get(r, 0) + 1
            found = extend(members, touch, floor, room - 1)
            for r in vn_adj[u]:
                touch[r] -= 1
                if touch[r] == 0:
                    del touch[r]
            members.discard(u)
            if found:
                return True
        return False

    for w in range(1, min(weight_cutoff, g.n) + 1):
        for v0 in range(g.n):
            touch = {r: 1 for r in vn_adj[v0]}
            if extend({v0}, touch, v0, w - 1):
                return w
    return None


# -- batched peeling ----------------------------------------------------------


class BatchPeeler:
    """Vectorised peeling of many erasure patterns against one graph."""

    def __init__(self, g: FactorGraph):
        self.g = g
        H = g.to_dense().astype(np.float32)
        self.H = H
        self.Ht = np.ascontiguousarray(H.T)

    def residual(self, erased: np.ndarray) -> np.ndarray:
        """``erased`` is a (batch, n) boolean array; returns the unresolved part."""
        X = erased.astype(np.float32, copy=True)
        while True:
            single = (X @ self.Ht == 1).astype(np.float32)
            fixed = (single @ self.H > 0) & (X > 0)
            if not fixed.any():
                return X > 0
            X[fixed] = 0.0

    def decodable(self, erased: np.ndarray) -> np.ndarray:
        return ~self.residual(erased).any(axis=1)


def _chunk_rng(seed: int, stream: int, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream, chunk))
    return np.random.Generator(np.random.Philox(ss))


def _chunk_sizes(total: int) -> list[int]:
    full, rest = divmod(total, CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def _map_chunks(fn, sizes: Sequence[int], workers: int) -> list:
    if workers <= 1 or len(sizes) <= 1:
        return [fn(c, b) for c, b in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(len(sizes)), sizes))


def _exhaustive_successes(peeler: BatchPeeler, n: int, k: int) -> tuple[int, int]:
    combos = itertools.combinations(range(n), k)
    ok = total = 0
    while True:
        block = list(itertools.islice(combos, CHUNK * 8))
        if not block:
            return ok, total
        mask = np.zeros((len(block), n), dtype=bool)
        rows = np.repeat(np.arange(len(block)), k)
        mask[rows, np.asarray(block, dtype=np.int64).ravel()] = True
        ok += int(peeler.decodable(mask).sum())
        total += len(block)


# -- tolerance profile --------------------------------------------------------


@dataclass
class ToleranceProfile:
    """Survival statistics per erasure count.

    ``q[i]`` is the probability that a uniformly random set of ``i`` erased
    blocks is recoverable, ``p[i] = q[i+1] / q[i]``.  ``exact[i]`` marks
    levels obtained by full enumeration, where ``successes[i]`` of
    ``trials[i] = C(n, i)`` patterns decode.  On sampled levels the counts
    are conditional: ``trials[i]`` random erasure orders decoded their
    first ``i-1`` blocks and ``successes[i]`` of them also decoded the
    ``i``-th, so ``p[i-1] = successes[i] / trials[i]``.  ``p`` stops where
    ``q`` first hits zero (``truncated_at``).
    """

    n: int
    m: int
    q: list[float]
    p: list[float]
    s_star: Optional[int]
    n_s: int
    exact_upto: int
    successes: list[int] = field(default_factory=list)
    trials: list[int] = field(default_factory=list)
    exact: list[bool] = field(default_factory=list)
    truncated_at: Optional[int] = None
    seed: Optional[int] = None

    def p_padded(self, length: int) -> list[float]:
        """``p`` extended with zeros (conservative) to ``length`` entries."""
        out = list(self.p[:length])
        return out + [0.0] * (length - len(out))

    def p_interval(self, i: int, confidence: float = 0.99) -> tuple[float, float]:
        """Wilson interval for ``p[i]``; a point on exactly enumerated levels."""
        if self.exact[i + 1]:
            return self.p[i], self.p[i]
        ci = stats.binomtest(self.successes[i + 1], self.trials[i + 1]).proportion_ci(
            confidence, method="wilson")
        return float(ci.low), float(ci.high)

    def p_stderr(self, i: int) -> float:
        if self.exact[i + 1]:
            return 0.0
        return math.sqrt(self.p[i] * (1 - self.p[i]) / self.trials[i + 1])

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ToleranceProfile":
        return cls(**json.loads(text))


def _nested_counts(peeler: BatchPeeler, n: int, lo: int, hi: int, n_s: int,
                   seed: int, workers: int) -> np.ndarray:
    """Decodable counts of the first ``k`` blocks of random erasure orders, ``k = lo..hi``.

    Recoverability is inherited by subsets, so a prefix that fails makes
    every longer prefix fail; such rows are dropped instead of re-peeled.
    """

    def run(c, b):
        order = np.argsort(_chunk_rng(seed, 0, c).random((b, n)), axis=1)
        counts = np.zeros(hi - lo + 1, dtype=np.int64)
        alive = np.arange(b)
        for k in range(lo, hi + 1):
            mask = np.zeros((len(alive), n), dtype=bool)
            if k:
                np.put_along_axis(mask, order[alive, :k], True, axis=1)
            alive = alive[peeler.decodable(mask)]
            counts[k - lo] = len(alive)
            if not len(alive):
                break
        return counts

    return sum(_map_chunks(run, _chunk_sizes(n_s), workers))


def tolerance_profile(
    g: FactorGraph,
    n_s: int,
    exact_upto: int = 0,
    seed: int = 0,
    max_level: Optional[int] = None,
    exhaustive_limit: Optional[int] = None,
    workers: int = 1,
) -> ToleranceProfile:
    """Estimate ``q_0 .. q_max_level`` and the ratios ``p_i``.

    Leading levels are enumerated exactly while ``i <= exact_upto`` or
    ``C(n, i) <= exhaustive_limit`` (default ``max(n_s, 10**6)``).  From the
    first level past that point on, ``n_s`` random erasure orders are peeled
    prefix by prefix and ``q`` is chained through the conditional ratios,
    which keeps ``q`` non-increasing and every ``p_i`` in [0, 1].  Streams
    are keyed by ``(seed, chunk)`` so counts do not depend on ``workers``.
    ``max_level`` defaults to ``m``, enough for ``p_0 .. p_{m-1}``.
    """
    if n_s < 1:
        raise ValueError("n_s must be at least 1")
    limit = max(n_s, EXHAUSTIVE_FLOOR) if exhaustive_limit is None else exhaustive_limit
    top = min(g.m if max_level is None else max_level, g.n)
    peeler = BatchPeeler(g)
    q, succ, tri, exact = [1.0], [1], [1], [True]
    i = 1
    while i <= top and q[-1] > 0 and (i <= exact_upto or math.comb(g.n, i) <= limit):
        ok, total = _exhaustive_successes(peeler, g.n, i)
        q.append(ok / total)
        succ.append(ok)
        tri.append(total)
        exact.append(True)
        i += 1
    if i <= top and q[-1] > 0:
        counts = _nested_counts(peeler, g.n, i - 1, top, n_s, seed, workers)
        for k in range(i, top + 1):
            before, after = int(counts[k - i]), int(counts[k - i + 1])
            q.append(q[-1] * after / before)
            succ.append(after)
            tri.append(before)
            exact.append(False)
            if after == 0:
                break
    truncated = None
    if q[-1] == 0:
        truncated = len(q) - 1
        log.info("q_%d estimated as 0; profile truncated there", truncated)
    p = [q[k + 1] / q[k] for k in range(len(q) - 1)]
    s_star = next((k for k, v in enumerate(q) if v < 1), None)
    return ToleranceProfile(
        n=g.n,
        m=g.m,
        q=q,
        p=p,
        s_star=s_star,
        n_s=n_s,
        exact_upto=exact_upto,
        successes=succ,
        trials=tri,
        exact=exact,
        truncated_at=truncated,
        seed=seed,
    )


# -- data loss under independent erasures ------------------------------------


@dataclass(frozen=True)
class LossEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    failures: int
    trials: int


def clopper_pearson(k: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    a = 1 - confidence
    lo = 0.0 if k == 0 else float(stats.beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


def data_loss_probability(
    g: FactorGraph,
    p_erase: float,
    n_s: int,
    seed: int = 0,
    workers: int = 1,
    confidence: float = 0.95,
) -> LossEstimate:
    """Monte Carlo probability that i.i.d. block erasures are unrecoverable."""
    if not 0 <= p_erase <= 1:
        raise ValueError("p_erase must lie in [0, 1]")
    peeler = BatchPeeler(g)
    stream = int(round(p_erase * 2**52))

    def run(c, b):
        rng = _chunk_rng(seed, stream, c)
        erased = rng.random((b, g.n)) < p_erase
        return int((~peeler.decodable(erased)).sum())

    fails = sum(_map_chunks(run, _chunk_sizes(n_s), workers))
    if p_erase in (0.0, 1.0):
        # every trial sees the same pattern, so there is nothing to estimate
        return LossEstimate(fails / n_s, fails / n_s, fails / n_s, fails, n_s)
    lo, hi = clopper_pearson(fails, n_s, confidence)
    return LossEstimate(fails / n_s, lo, hi, fails, n_s)


def loss_from_profile(profile: ToleranceProfile, p_erase: float) -> float:
    """``sum_e C(n,e) p^e (1-p)^(n-e) (1 - q_e)``; levels past the profile count as lost."""
    n = profile.n
    total = 0.0
    for e in range(n + 1):
        qe = profile.q[e] if e < len(profile.q) else 0.0
        if qe < 1:
            total += stats.binom.pmf(e, n, p_erase) * (1 - qe)
    return float(total)


def mds_loss_probability(n: int, m: int, p_erase: float) -> float:
    """An MDS code loses data iff more than ``m`` of its ``n`` blocks are erased."""
    return float(stats.binom.sf(m, n, p_erase))
