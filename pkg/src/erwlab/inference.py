"""Lower confidence limit for the memory parameter and position intervals.

Both come from the CLT scaling S_n / sqrt(n / (3 - 4p)) ~ N(0, 1):

    |S_n| <= z sqrt(n / (3 - 4p))   <=>   p >= (3 - n (z / S_n)^2) / 4,

with z = Phi^{-1}(1 - kappa/2).  Intervals are centred at 0, i.e. they
assume q = 1/2; for q != 1/2 the mean (2q - 1)/a_n is not corrected for.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import normal
from .coeffs import Regime, require_supported
from .errors import DomainError, UndefinedEstimateError
from .exact import exact_pmf
from .model import ERWParams
from .montecarlo import SimulationPlan, run_ensemble


@dataclass(frozen=True)
class ConfidenceQuery:
    n: int
    s_n: int
    kappa: float

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"n must be positive, got {self.n}")
        if abs(self.s_n) > self.n or (self.s_n - self.n) % 2:
            raise DomainError(f"S_n = {self.s_n} is not attainable at n = {self.n}")
        _check_kappa(self.kappa)


def _check_kappa(kappa: float) -> None:
    if not 0.0 < kappa < 1.0:
        raise DomainError(f"kappa must lie in (0, 1), got {kappa}")


def z_value(kappa: float) -> float:
    _check_kappa(kappa)
    return normal.ppf(1.0 - kappa / 2.0)


def p_lower_limit(query: ConfidenceQuery) -> float:
    """(3 - n (z / S_n)^2) / 4, unclamped; may be negative (vacuous)."""
    if query.s_n == 0:
        raise UndefinedEstimateError("estimate undefined at this observation (S_n = 0)")
    z = z_value(query.kappa)
    return 0.25 * (3.0 - query.n * (z / query.s_n) ** 2)


def p_lower_report(query: ConfidenceQuery) -> dict:
    p_low = p_lower_limit(query)
    hint = None
    if p_low < 0.0:
        hint = "below 0: bound is vacuous"
    elif p_low > 0.75:
        hint = "above 3/4: outside the diffusive range"
    return {"schema": 1, "n": query.n, "s_n": query.s_n, "kappa": query.kappa,
            "z": z_value(query.kappa), "p_lower": p_low, "clamped_hint": hint}


def position_scale(p: float, n: int) -> float:
    regime = require_supported(p)
    if regime is Regime.CRITICAL:
        return math.sqrt(n * math.log(n))
    return math.sqrt(n / (3.0 - 4.0 * p))


def position_interval(p: float, n: int, kappa: float) -> tuple[float, float]:
    """Symmetric (1 - kappa) interval for S_n, assuming q = 1/2."""
    half = z_value(kappa) * position_scale(p, n)
    return -half, half


def _covered(s: np.ndarray, n: int, kappa: float, p_true: float) -> np.ndarray:
    z = z_value(kappa)
    s = s.astype(float)
    with np.errstate(divide="ignore"):
        p_low = 0.25 * (3.0 - n * (z / s) ** 2)
    return (s != 0) & (p_low <= p_true)


def exact_coverage(p_true: float, q: float, n: int, kappa: float) -> dict:
    """Coverage of the lower limit and of the position interval from the exact law.

    S_n = 0 leaves the limit undefined and counts as non-coverage.
    """
    require_supported(p_true)
    dist = exact_pmf(ERWParams(p_true, q, n))
    k = dist.support
    cov = float(np.sum(dist.pmf[_covered(k, n, kappa, p_true)]))
    lo, hi = position_interval(p_true, n, kappa)
    pos = float(np.sum(dist.pmf[(k >= lo) & (k <= hi)]))
    return {"coverage": cov, "undefined": dist.prob(0), "position_coverage": pos}


def coverage_experiment(p_true: float, q: float, n: int, kappa: float, reps: int, seed: int,
                        *, sampler: str = "markov", threads: int = 1) -> dict:
    require_supported(p_true)
    plan = SimulationPlan(ERWParams(p_true, q, n), reps, seed, sampler)
    ens = run_ensemble(plan, threads=threads)
    keys, counts = ens.values_and_counts()
    lo, hi = position_interval(p_true, n, kappa)
    return {
        "schema": 1,
        "plan": plan.echo(),
        "kappa": kappa,
        "coverage": float(counts[_covered(keys, n, kappa, p_true)].sum() / reps),
        "undefined": int(counts[keys == 0].sum()),
        "position_coverage": float(counts[(keys >= lo) & (keys <= hi)].sum() / reps),
    }


def to_json(obj: dict) -> str:
    return json.dumps(obj, indent=2)
