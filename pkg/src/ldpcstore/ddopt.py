"""Variable-degree distribution design for CN-regular ensembles.

For fixed rate ``R`` and check degree ``d_c`` the rate constraint pins
``sum lambda_d/d = 1/((1-R) d_c)``, so the only freedom left is how far
the decoding threshold can be pushed.  For each candidate ``eps`` a linear
program decides whether some ``lambda`` satisfies the density-evolution
inequality on a grid of (0, eps]; bisection on ``eps`` finds the largest.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np
from scipy.optimize import linprog

from .density import DeConfig, de_iterate
from .errors import Infeasible, InvalidRate, RateImpossible
from .graph import DegreeDistribution, _as_fraction


@dataclass(frozen=True)
class OptProblem:
    R: Fraction
    d_c: int
    d_max: int = 16
    grid_points: int = 200
    margin: float = 1e-6
    de_config: DeConfig = field(default_factory=DeConfig)
    eps_tol: float = 1e-4

    def __post_init__(self):
        object.__setattr__(self, "R", _as_fraction(self.R))
        if not 0 < self.R < 1:
            raise InvalidRate(f"rate must lie in (0, 1), got {self.R}")
        if self.d_c < 2 or self.d_max < 2 or self.grid_points < 50 or self.margin < 0:
            raise ValueError(f"invalid OptProblem {self}")

    @property
    def rate_target(self) -> float:
        """Required ``sum lambda_d / d``."""
        return float(1 / ((1 - self.R) * self.d_c))

    @property
    def degrees(self) -> list[int]:
        return list(range(2, self.d_max + 1))

    def distribution(self, lam: dict[int, float]) -> DegreeDistribution:
        return DegreeDistribution(lam, {self.d_c: 1.0})


@dataclass(frozen=True)
class OptResult:
    R: Fraction
    d_c: int
    epsilon_star: float
    lambda_coeffs: dict[int, float]
    dv: float

    @property
    def gamma(self) -> int:
        return self.d_c - 1

    @property
    def scaled(self) -> float:
        return self.epsilon_star / float(1 - self.R)


def _check_rate(p: OptProblem) -> None:
    target = p.rate_target
    if target > 0.5 + 1e-12:
        raise RateImpossible(
            f"need sum lambda_d/d = {target:.6g} > 1/2; no ensemble without degree-1 VNs has it"
        )
    if target < 1 / p.d_max - 1e-12:
        raise RateImpossible(
            f"need sum lambda_d/d = {target:.6g} < 1/{p.d_max}; raise d_max"
        )


def _constraint_rows(p: OptProblem, eps: float):
    x = eps * np.arange(1, p.grid_points + 1) / p.grid_points
    g = 1.0 - (1.0 - x) ** (p.d_c - 1)
    A = eps * np.stack([g ** (d - 1) for d in p.degrees], axis=1)
    return x, A


def _project(lam: np.ndarray, degrees: list[int], target: float) -> np.ndarray:
    """Nudge ``lam`` onto both equality constraints, keeping its support."""
    inv_d = 1.0 / np.asarray(degrees, dtype=float)
    for _ in range(3):
        lam = np.clip(lam, 0.0, 1.0)
        lam[lam < 1e-12] = 0.0
        on = lam > 0
        A = np.vstack([np.ones(on.sum()), inv_d[on]])
        resid = A @ lam[on] - np.array([1.0, target])
        if np.abs(resid).max() < 1e-15:
            break
        if on.sum() == 1:
            lam[on] = 1.0
            break
        lam[on] -= A.T @ np.linalg.lstsq(A @ A.T, resid, rcond=None)[0]
    return lam


def feasible_lambda(p: OptProblem, epsilon: float) -> dict[int, float]:
    """A ``lambda`` meeting the DE and rate constraints at ``epsilon``.

    Among feasible distributions the LP picks the one with the largest
    uniform relative slack ``t`` in ``eps*lambda(g(x_j)) + t*x_j <= x_j - margin``.
    That witness gives density evolution the most room when it is
    re-checked with :func:`de_iterate`.  Raises :class:`Infeasible`
    (``violation`` = ``(x_j, excess)`` of the worst grid point under
    min-max violation) or :class:`RateImpossible`.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    _check_rate(p)
    degs = p.degrees
    k = len(degs)
    x, A = _constraint_rows(p, epsilon)
    A_eq = np.zeros((2, k + 1))
    A_eq[0, :k] = 1.0
    A_eq[1, :k] = 1.0 / np.asarray(degs)
    b_eq = np.array([1.0, p.rate_target])
    A_ub = np.hstack([A, x[:, None]])
    b_ub = x - p.margin
    c = np.zeros(k + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=[(0, 1)] * k + [(0, 1)], method="highs")
    if res.status != 0:
        raise Infeasible(f"no lambda meets the DE constraint at eps={epsilon:.6g}",
                         violation=_worst_violation(p, x, A, A_eq[:, :k], b_eq))
    lam = _project(res.x[:k].copy(), degs, p.rate_target)
    coeffs = {d: float(v) for d, v in zip(degs, lam) if v > 0}
    dd = p.distribution(coeffs)
    if not de_iterate(dd, epsilon, p.de_config).success:
        raise Infeasible(f"LP witness fails density evolution at eps={epsilon:.6g}")
    return coeffs


def _worst_violation(p, x, A, A_eq, b_eq):
    k = A.shape[1]
    c = np.zeros(k + 1)
    c[-1] = 1.0
    A_ub = np.hstack([A, -np.ones((len(x), 1))])
    res = linprog(c, A_ub=A_ub, b_ub=x - p.margin,
                  A_eq=np.hstack([A_eq, np.zeros((2, 1))]), b_eq=b_eq,
                  bounds=[(0, 1)] * k + [(0, None)], method="highs")
    if res.status != 0:
        return None
    excess = A @ res.x[:k] - (x - p.margin)
    j = int(np.argmax(excess))
    return float(x[j]), float(excess[j])


def optimize_threshold(p: OptProblem) -> OptResult:
    """Largest ``eps`` (to ``p.eps_tol``) admitting a feasible ``lambda``."""
    _check_rate(p)
    lo, hi = 0.0, float(1 - p.R)
    best: Optional[dict[int, float]] = None
    while hi - lo > p.eps_tol:
        mid = 0.5 * (lo + hi)
        try:
            best_mid = feasible_lambda(p, mid)
        except Infeasible:
            hi = mid
        else:
            lo, best = mid, best_mid
    if best is None:
        raise Infeasible(f"no feasible lambda for R={p.R}, d_c={p.d_c} above eps={hi:.3g}")
    dv = 1.0 / sum(c / d for d, c in best.items())
    return OptResult(p.R, p.d_c, lo, best, dv)


@dataclass(frozen=True)
class TradeoffRow:
    d_c: int
    status: str
    result: Optional[OptResult] = None

    @property
    def gamma(self) -> int:
        return self.d_c - 1


def tradeoff_curve(R, d_c_range: Iterable[int], template: Optional[OptProblem] = None) -> list[TradeoffRow]:
    """One optimisation per check degree; impossible rates stay in the table."""
    rows = []
    for dc in d_c_range:
        base = template or OptProblem(R, dc)
        prob = replace(base, R=_as_fraction(R), d_c=dc)
        try:
            rows.append(TradeoffRow(dc, "ok", optimize_threshold(prob)))
        except RateImpossible:
            rows.append(TradeoffRow(dc, "rate_impossible"))
        except Infeasible:
            rows.append(TradeoffRow(dc, "infeasible"))
    return rows
