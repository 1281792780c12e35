"""Mean time to data loss of a coded stripe.

A stripe of ``n`` blocks with ``m`` parities is modelled as a
continuous-time Markov chain on the number of erased blocks.  From state
``i`` a further block fails at rate ``(n-i)*lam``.  The code survives that
failure with probability ``p_i`` (going to ``i+1``); otherwise the stripe
is lost.  Repairs move ``i -> i-1`` at rate ``mu``.  State ``m`` never
survives another failure.

All times are in seconds internally; reports also give days.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Literal, Optional, Sequence

import numpy as np

from .errors import (
    ConfigError,
    InvalidStoppingIndex,
    SingularSystem,
    ZeroDenominator,
)

log = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400.0
SECONDS_PER_YEAR = 365.25 * SECONDS_PER_DAY

Numerator = Literal["exact", "m_plus_one"]


# -- system parameters --------------------------------------------------------


@dataclass(frozen=True)
class StorageSystemParams:
    """Cluster parameters.  Sizes in bytes, bandwidth in bits/s, times in seconds.

    Decimal prefixes throughout (1 TB = 1e12 bytes); the download time
    converts bytes to bits.
    """

    C: float = 40e15
    B: float = 256e6
    N_disk: int = 2000
    S: float = 20e12
    r_node: float = 1e9
    T_t: float = 15 * 60.0
    mttf: float = SECONDS_PER_YEAR
    bw_cost: float = 1.0

    def __post_init__(self):
        for name in ("C", "B", "S", "r_node", "T_t", "mttf", "bw_cost"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.N_disk < 2:
            raise ConfigError("N_disk must be at least 2")

    @property
    def fail_rate(self) -> float:
        return 1.0 / self.mttf

    @property
    def download_time(self) -> float:
        """Time to pull ``bw_cost`` disks' worth of data, spread over the other disks."""
        return self.S * 8 * self.bw_cost / (self.r_node * (self.N_disk - 1))

    def with_bw_cost(self, bw_cost: float) -> "StorageSystemParams":
        return replace(self, bw_cost=float(bw_cost))

    def units(self) -> dict:
        return {
            "size": "bytes (decimal prefixes)",
            "bandwidth": "bits/s",
            "time": "seconds",
            "year": "365.25 days",
        }


def repair_rate(params: StorageSystemParams) -> float:
    """``mu = 1 / (T_t + T_r)`` with ``T_r`` the download time."""
    return 1.0 / (params.T_t + params.download_time)


_UNITS = {
    "": 1.0,
    "b": 1.0, "kb": 1e3, "mb": 1e6, "gb": 1e9, "tb": 1e12, "pb": 1e15, "eb": 1e18,
    "bps": 1.0, "kbps": 1e3, "mbps": 1e6, "gbps": 1e9, "tbps": 1e12,
    "s": 1.0, "sec": 1.0, "min": 60.0, "h": 3600.0, "hour": 3600.0, "hours": 3600.0,
    "day": SECONDS_PER_DAY, "days": SECONDS_PER_DAY,
    "year": SECONDS_PER_YEAR, "years": SECONDS_PER_YEAR, "y": SECONDS_PER_YEAR,
}

_KEYS = {
    "c": "C", "b": "B", "n_disk": "N_disk", "s": "S", "r_node": "r_node",
    "t_t": "T_t", "mttf": "mttf", "bw_cost": "bw_cost",
}


def _parse_quantity(text: str) -> float:
    text = text.strip().replace("_", "")
    i = len(text)
    while i and not (text[i - 1].isdigit() or text[i - 1] == "."):
        i -= 1
    number, unit = text[:i].strip(), text[i:].strip().lower()
    if unit not in _UNITS:
        raise ConfigError(f"unknown unit {unit!r} in {text!r}")
    try:
        return float(number) * _UNITS[unit]
    except ValueError as exc:
        raise ConfigError(f"cannot parse quantity {text!r}") from exc


def parse_config(text: str) -> StorageSystemParams:
    """Flat ``key = value`` lines; ``#`` starts a comment.

    Keys: C, B, N_disk, S, r_node, T_t, mttf, bw_cost.  Values take an
    optional unit suffix (``40PB``, ``1Gbps``, ``15min``, ``1year``).
    Missing keys keep their defaults.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key.lower() not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        name = _KEYS[key.lower()]
        values[name] = _parse_quantity(value)
    if "N_disk" in values:
        values["N_disk"] = int(values["N_disk"])
    return StorageSystemParams(**values)


def load_config(path) -> StorageSystemParams:
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


# -- Markov model -------------------------------------------------------------


@dataclass(frozen=True)
class MarkovSpec:
    n: int
    m: int
    fail_rate: float
    repair_rate: float
    p: tuple[float, ...]
    padded: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.m < 1 or self.n <= self.m:
            raise ValueError(f"need m >= 1 and n > m, got n={self.n}, m={self.m}")
        if self.fail_rate < 0 or self.repair_rate <= 0:
            raise ValueError("rates must be positive")
        p = tuple(float(x) for x in self.p)
        if any(not 0 <= x <= 1 for x in p):
            raise ValueError("survival probabilities must lie in [0, 1]")
        padded = self.padded
        if len(p) < self.m:
            log.warning("p has %d entries for m=%d; padding with zeros", len(p), self.m)
            p = p + (0.0,) * (self.m - len(p))
            padded = True
        object.__setattr__(self, "p", p[: self.m])
        object.__setattr__(self, "padded", padded)
        if self.fail_rate > 1e-2 * self.repair_rate:
            log.info("lambda/mu = %.3g; the asymptotic formulas assume it is small",
                     self.fail_rate / self.repair_rate)

    @classmethod
    def mds(cls, n: int, m: int, fail_rate: float, repair_rate: float) -> "MarkovSpec":
        return cls(n, m, fail_rate, repair_rate, (1.0,) * m)

    @property
    def ratio(self) -> float:
        return self.fail_rate / self.repair_rate


def _log_falling(n: int, k: int) -> float:
    """log of n (n-1) ... (n-k+1)."""
    return sum(math.log(n - i) for i in range(k))


def _log_terms(spec: MarkovSpec) -> list[float]:
    """Logs of the loss-path terms of the denominator divided by ``mu^m``.

    Term ``j < m``: survive ``j`` failures, lose on failure ``j+1``; term
    ``m``: survive ``m`` failures, lose on the next.  Zero terms are -inf.
    """
    lam, r = spec.fail_rate, spec.ratio
    if lam == 0:
        return [-math.inf] * (spec.m + 1)
    out = []
    log_surv = 0.0
    for j in range(spec.m + 1):
        lose = 1.0 if j == spec.m else 1.0 - spec.p[j]
        if lose <= 0 or log_surv == -math.inf:
            out.append(-math.inf)
        else:
            out.append(j * math.log(r) + math.log(lam) + math.log(lose)
                       + log_surv + _log_falling(spec.n, j + 1))
        if j < spec.m:
            log_surv = log_surv + math.log(spec.p[j]) if spec.p[j] > 0 else -math.inf
    return out


def denominator_terms(spec: MarkovSpec) -> list[float]:
    """The individual terms of the scaled denominator (may underflow to 0)."""
    return [math.exp(t) if t > -math.inf else 0.0 for t in _log_terms(spec)]


def term_ratios(spec: MarkovSpec) -> list[float]:
    """Ratio of each nonzero term to the preceding nonzero term."""
    logs = [t for t in _log_terms(spec) if t > -math.inf]
    return [math.exp(b - a) for a, b in zip(logs, logs[1:])]


def _logsumexp(xs: Sequence[float]) -> float:
    top = max(xs)
    if top == -math.inf:
        return top
    return top + math.log(math.fsum(math.exp(x - top) for x in xs))


def _lead(spec: MarkovSpec, numerator: Numerator) -> float:
    if numerator == "exact":
        return 1.0
    if numerator == "m_plus_one":
        return float(spec.m + 1)
    raise ValueError(f"unknown numerator convention {numerator!r}")


def mttdl_closed_form(spec: MarkovSpec, numerator: Numerator = "exact") -> float:
    """Small-``lambda/mu`` MTTDL, ``c * mu^m / f`` with ``f`` the sum of loss-path terms.

    ``numerator="exact"`` uses ``c = 1``, the true leading-order behaviour
    of the chain (it matches :func:`mttdl_ctmc_oracle` as
    ``lambda/mu -> 0``).  ``"m_plus_one"`` uses ``c = m + 1``, a convention
    that overstates the MTTDL by that factor.  Evaluated in log space, so
    long codes (large ``m``) neither underflow nor overflow until the final
    exponentiation.
    """
    log_f = _logsumexp(_log_terms(spec))
    if log_f == -math.inf:
        raise ZeroDenominator("no path to data loss (all p_i = 1 and lambda = 0?)")
    x = math.log(_lead(spec, numerator)) - log_f
    return math.exp(x) if x < 709 else math.inf


def mttdl_mds(n: int, m: int, fail_rate: float, repair_rate: float,
              numerator: Numerator = "exact") -> float:
    """``c mu^m / (lam^(m+1) n (n-1) ... (n-m))``."""
    c = 1.0 if numerator == "exact" else float(m + 1)
    log_v = (math.log(c) + m * math.log(repair_rate) - (m + 1) * math.log(fail_rate)
             - _log_falling(n, m + 1))
    return math.exp(log_v) if log_v < 709 else math.inf


def stopping_index(p: Sequence[float], m: int) -> int:
    """1 + index of the first ``p_i < 1``; ``m + 1`` when every ``p_i`` is 1."""
    for i, v in enumerate(p[:m]):
        if v < 1:
            return i + 1
    return m + 1


def mttdl_dominant(spec: MarkovSpec, s_star: Optional[int] = None,
                   numerator: Numerator = "exact") -> float:
    """Keep only the first loss-path term, the one set by ``p_{s*-1}``.

    ``s_star`` defaults to the first index where ``p`` drops below 1.
    ``s_star = m + 1`` is allowed and means no early loss path (MDS).
    """
    if s_star is None:
        s_star = stopping_index(spec.p, spec.m)
    if not 1 <= s_star <= spec.m + 1:
        raise InvalidStoppingIndex(f"s* = {s_star} outside 1..{spec.m + 1}")
    lose = 1.0 if s_star == spec.m + 1 else 1.0 - spec.p[s_star - 1]
    if lose <= 0:
        raise InvalidStoppingIndex(f"p_{s_star - 1} = 1; no loss path at s* = {s_star}")
    log_d = ((s_star - 1) * math.log(spec.ratio) + math.log(spec.fail_rate)
             + math.log(lose) + _log_falling(spec.n, s_star))
    x = math.log(_lead(spec, numerator)) - log_d
    return math.exp(x) if x < 709 else math.inf


def _rates(spec: MarkovSpec):
    lam, mu = spec.fail_rate, spec.repair_rate
    up = [(spec.n - i) * lam * (spec.p[i] if i < spec.m else 0.0) for i in range(spec.m + 1)]
    loss = [(spec.n - i) * lam * (1.0 - spec.p[i] if i < spec.m else 1.0) for i in range(spec.m + 1)]
    return up, loss, mu


def mttdl_ctmc_oracle(spec: MarkovSpec, method: Literal["reduction", "solve"] = "reduction") -> float:
    """Exact expected time to absorption from state 0.

    ``"reduction"`` eliminates states from the top down and folds each
    excursion above a state into that state's exit rate and time reward.
    It only ever adds and multiplies positive numbers, so it stays accurate
    at tiny ``lambda/mu``.  ``"solve"`` assembles the transient generator
    and calls an LU solver with partial pivoting; it is a cross-check that
    degrades once ``lambda/mu`` gets very small.
    """
    up, loss, mu = _rates(spec)
    if method == "solve":
        return _ctmc_solve(spec, up, loss, mu)
    if method != "reduction":
        raise ValueError(f"unknown method {method!r}")
    exit_rate = loss[spec.m]
    excursion = 1.0 / (mu + exit_rate)
    for k in range(spec.m - 1, 0, -1):
        exit_k = loss[k] + up[k] * exit_rate / (mu + exit_rate)
        excursion = (1.0 + up[k] * excursion) / (mu + exit_k)
        exit_rate = exit_k
    exit_0 = loss[0] + up[0] * exit_rate / (mu + exit_rate)
    if exit_0 <= 0:
        raise SingularSystem("data loss is unreachable from state 0")
    return (1.0 + up[0] * excursion) / exit_0


def _ctmc_solve(spec, up, loss, mu) -> float:
    k = spec.m + 1
    Q = np.zeros((k, k))
    for i in range(k):
        Q[i, i] = -(up[i] + loss[i] + (mu if i else 0.0))
        if i + 1 < k:
            Q[i, i + 1] = up[i]
        if i:
            Q[i, i - 1] = mu
    try:
        t = np.linalg.solve(Q, -np.ones(k))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    if spec.ratio < 1e-12:
        log.warning("lambda/mu = %.3g; dense solve may be ill-conditioned", spec.ratio)
    return float(t[0])


# -- reports ------------------------------------------------------------------


@dataclass(frozen=True)
class MttdlReport:
    stripe_mttdl: float
    normalized_mttdl: float
    stripes: float
    method: str
    n: int
    m: int
    bw_cost: float
    extra: dict = field(default_factory=dict)

    @property
    def stripe_days(self) -> float:
        return self.stripe_mttdl / SECONDS_PER_DAY

    @property
    def normalized_days(self) -> float:
        return self.normalized_mttdl / SECONDS_PER_DAY

    def to_dict(self) -> dict:
        d = asdict(self)
        d["stripe_mttdl_days"] = self.stripe_days
        d["normalized_mttdl_days"] = self.normalized_days
        return d


def normalize_mttdl(stripe_mttdl: float, params: StorageSystemParams, n: int,
                    method: str = "closed_form", m: int = 0, extra: Optional[dict] = None) -> MttdlReport:
    """System MTTDL: the stripe value divided by the stripe count ``C / (n B)``."""
    stripes = params.C / (n * params.B)
    if stripes < 1:
        raise ValueError(f"C={params.C} holds less than one stripe of {n} blocks")
    return MttdlReport(stripe_mttdl, stripe_mttdl / stripes, stripes, method, n, m,
                       params.bw_cost, dict(extra or {}))


def markov_spec_for(n: int, m: int, p: Sequence[float], params: StorageSystemParams) -> MarkovSpec:
    return MarkovSpec(n, m, params.fail_rate, repair_rate(params), tuple(p))


def mttdl_mds_report(n: int, k: int, params: StorageSystemParams,
                     numerator: Numerator = "exact") -> MttdlReport:
    """RS-style ``(n, k)`` code: tolerates any ``n-k`` erasures, repair reads ``k`` blocks."""
    params = params.with_bw_cost(k)
    spec = MarkovSpec.mds(n, n - k, params.fail_rate, repair_rate(params))
    return normalize_mttdl(mttdl_closed_form(spec, numerator), params, n, "mds", n - k)


def mttdl_replication_report(copies: int, params: StorageSystemParams,
                             numerator: Numerator = "exact") -> MttdlReport:
    params = params.with_bw_cost(1)
    spec = MarkovSpec.mds(copies, copies - 1, params.fail_rate, repair_rate(params))
    return normalize_mttdl(mttdl_closed_form(spec, numerator), params, copies, "mds", copies - 1)


def mttdl_for_graph(g, profile, params: StorageSystemParams,
                    numerator: Numerator = "exact") -> MttdlReport:
    """MTTDL of an LDPC stripe from its measured tolerance profile.

    The repair cost is the graph's repair bandwidth.  A profile that stops
    early is padded with ``p = 0`` (conservative).  When the stopping number
    is known the dominant-term value is attached in ``extra``.
    """
    from .graph import repair_bandwidth

    params = params.with_bw_cost(float(repair_bandwidth(g)))
    p = profile.p_padded(g.m)
    spec = markov_spec_for(g.n, g.m, p, params)
    extra = {"padded": len(profile.p) < g.m, "s_star": profile.s_star}
    stripe = mttdl_closed_form(spec, numerator)
    s = stopping_index(p, g.m)
    extra["dominant_stripe_mttdl"] = mttdl_dominant(spec, s, numerator)
    return normalize_mttdl(stripe, params, g.n, "closed_form", g.m, extra)


@dataclass(frozen=True)
class ReferenceRow:
    scheme: str
    storage_overhead: float
    repair_bw_overhead: float
    mttdl_days: float
    citation: str


# Fixed comparison values for codes whose Markov models are not rebuilt here.
REFERENCE_ROWS = {
    "xorbas_lrc_10_6_5": ReferenceRow(
        "(10, 6, 5) Xorbas LRC", 1.6, 5.0, 7.38e7,
        "fixed comparison value for HDFS-Xorbas LRC; not recomputed"),
    "binary_lrc_15_10_6": ReferenceRow(
        "(15, 10, 6) Binary LRC", 1.5, 6.0, 3.00e4,
        "fixed comparison value for binary LRC; not recomputed"),
}
