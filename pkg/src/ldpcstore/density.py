"""Density evolution on the binary erasure channel.

The erased fraction after ``l`` rounds of message passing on an infinitely
long code from ensemble ``(lambda, rho)`` obeys

    P_l = eps * lambda(1 - rho(1 - P_{l-1})),   P_0 = eps,

and decoding succeeds iff ``P_l -> 0``.  The threshold is the largest such
``eps``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NonMonotonePredicate
from .graph import DegreeDistribution, design_rate


@dataclass(frozen=True)
class DeConfig:
    tol: float = 1e-10
    max_iter: int = 5000
    bisect_tol: float = 1e-6

    def __post_init__(self):
        if self.tol <= 0 or self.max_iter < 1 or self.bisect_tol <= 0:
            raise ValueError(f"invalid DeConfig {self}")


@dataclass(frozen=True)
class DeResult:
    success: bool
    residual: float
    iterations: int
    certified: bool = False


class _Ensemble:
    """Float coefficient lists for fast repeated evaluation."""

    def __init__(self, dd: DegreeDistribution):
        self.lam = [(d - 1, float(c)) for d, c in dd.lambda_coeffs.items() if c]
        self.rho = [(d - 1, float(c)) for d, c in dd.rho_coeffs.items() if c]
        self.lam1 = float(dd.lambda_coeffs.get(1, 0))
        self.rho_slope = sum(c * e for e, c in self.rho)

    def step(self, eps: float, x: float) -> float:
        y = 1.0 - x
        g = 1.0 - sum(c * y**e for e, c in self.rho)
        return eps * sum(c * g**e for e, c in self.lam)

    def contraction(self, eps: float, x: float) -> float:
        """Bound on f(z)/z over (0, x]; valid when rho_slope * x <= 1.

        Uses 1 - rho(1-z) <= rho'(1) z and that lambda(y)/y is increasing.
        """
        a = self.rho_slope
        return eps * sum(c * a**e * x ** (e - 1) for e, c in self.lam)


def de_iterate(dd: DegreeDistribution, epsilon: float, cfg: DeConfig = DeConfig()) -> DeResult:
    """Run the erased-fraction recursion from ``P_0 = epsilon``.

    Stops with success once ``P_l < tol``.  It also stops early with
    success when ``P_l`` is small enough that the recursion provably
    contracts geometrically from there on (factor ``k < 1``).  The
    reported residual and iteration count are then the extrapolated values
    at which ``P`` drops below ``tol``.  This settles slow linear
    convergence near the threshold without millions of steps.  It stops
    with failure once the sequence stalls at a positive fixed point, or
    after ``max_iter`` uncertified steps.
    """
    if not 0 <= epsilon <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    ens = _Ensemble(dd)
    x = epsilon
    for it in range(1, cfg.max_iter + 1):
        nxt = ens.step(epsilon, x)
        if nxt < cfg.tol:
            return DeResult(True, nxt, it)
        if ens.lam1 == 0 and ens.rho_slope * nxt <= 1:
            k = ens.contraction(epsilon, nxt)
            if k < 1:
                extra = math.ceil(math.log(cfg.tol / nxt) / math.log(k)) if k > 0 else 1
                return DeResult(True, nxt * k**extra, it + extra, certified=True)
        if nxt >= x * (1 - 1e-14):
            return DeResult(False, nxt, it)
        x = nxt
    return DeResult(False, x, cfg.max_iter)


def decoding_threshold(dd: DegreeDistribution, cfg: DeConfig = DeConfig()) -> float:
    """Largest erasure probability for which :func:`de_iterate` succeeds.

    Bisection over [0, 1] to ``cfg.bisect_tol``; returns the last
    successful point.
    """
    if de_iterate(dd, 1.0, cfg).success:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > cfg.bisect_tol:
        mid = 0.5 * (lo + hi)
        if de_iterate(dd, mid, cfg).success:
            lo = mid
        else:
            hi = mid
    if lo > 0 and not de_iterate(dd, lo, cfg).success:
        raise NonMonotonePredicate(f"success at {lo} not reproducible")
    return lo


def scaled_threshold(dd: DegreeDistribution, cfg: DeConfig = DeConfig()) -> float:
    """Threshold as a fraction of channel capacity ``1 - R``."""
    return decoding_threshold(dd, cfg) / (1 - float(design_rate(dd)))


def fixed_point_margin(dd: DegreeDistribution, epsilon: float, grid: int = 2000) -> float:
    """``min_x (x - eps*lambda(1-rho(1-x)))`` over a uniform grid on (0, eps]."""
    ens = _Ensemble(dd)
    return min(
        x - ens.step(epsilon, x)
        for x in (epsilon * j / grid for j in range(1, grid + 1))
    )
