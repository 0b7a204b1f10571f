"""Exact law of S_n by forward dynamic programming over the position kernel.

Layer k holds P(S_k = s) for s = -k, -k+2, ..., k in a dense array of
length k+1 (index j <-> s = -k + 2j).  One layer costs O(k), the whole
law O(n^2) time and O(n) memory.

The brute-force enumerators at the bottom walk all 2^n step histories and
serve as the independent oracle for n <= ~14.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .coeffs import CoeffTable, build_coeffs, fmt
from .errors import DomainError, ResourceCapError
from .model import ERWParams

EXACT_CAP = 20_000
MASS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ExactDistribution:
    params: ERWParams
    support: np.ndarray  # -n, -n+2, ..., n
    pmf: np.ndarray
    a_n: float
    v_n: float
    mass_drift: float = 0.0  # max |sum(layer) - 1| seen while building
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def scale(self) -> float:
        return math.sqrt(self.v_n) / self.a_n

    @property
    def x(self) -> np.ndarray:
        """Standardized support a_n k / sqrt(v_n)."""
        return self.a_n * self.support / math.sqrt(self.v_n)

    def prob(self, k: int) -> float:
        n = self.n
        if abs(k) > n or (k - n) % 2:
            return 0.0
        return float(self.pmf[(k + n) // 2])

    def cdf_values(self) -> np.ndarray:
        return np.cumsum(self.pmf)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "pmf", "cdf", "x_k"])
        for k, pk, ck, xk in zip(self.support, self.pmf, self.cdf_values(), self.x):
            w.writerow([int(k), fmt(pk), fmt(ck), fmt(xk)])
        return buf.getvalue()


def _layer_probs(p: float, k: int) -> tuple[np.ndarray, np.ndarray]:
    # up/down probabilities from layer k; written so that at q = 1/2
    # up(s) and down(-s) are bitwise equal, which keeps the law exactly symmetric
    s = np.arange(-k, k + 1, 2, dtype=float)
    drift = (2.0 * p - 1.0) * (s / (2.0 * k))
    return 0.5 + drift, 0.5 - drift


def exact_pmf(params: ERWParams, table: CoeffTable | None = None, *,
              cap: int = EXACT_CAP, renormalize: bool = False) -> ExactDistribution:
    n = params.n
    if n > cap:
        raise ResourceCapError(f"n={n} exceeds the exact-DP cap {cap} (O(n^2) work)")
    if table is None:
        try:
            table = build_coeffs(params.p, n)
        except (DomainError, FloatingPointError):
            # p = 0, or p so small that a_n overflows: the law is still computable
            table = None
    elif table.n != n or table.p != params.p:
        raise DomainError("coefficient table does not match (p, n)")
    mass = np.array([1.0 - params.q, params.q])
    drift = 0.0
    for k in range(1, n):
        up, down = _layer_probs(params.p, k)
        nxt = np.zeros(k + 2)
        nxt[1:] += mass * up
        nxt[:-1] += mass * down
        mass = nxt
        err = abs(float(mass.sum()) - 1.0)
        if err > MASS_TOL:
            raise FloatingPointError(f"DP mass drift {err:.3e} at layer {k + 1}")
        drift = max(drift, err)
        if renormalize:
            mass /= mass.sum()
    mass.setflags(write=False)
    support = np.arange(-n, n + 1, 2, dtype=np.int64)
    a_n, v_n = (table.a_n, table.v_n) if table is not None else (math.nan, math.nan)
    return ExactDistribution(params=params, support=support, pmf=mass,
                             a_n=a_n, v_n=v_n, mass_drift=drift)


def exact_cdf(dist: ExactDistribution, t: float) -> float:
    """P(S_n <= t), right-continuous."""
    idx = np.searchsorted(dist.support, t, side="right")
    return float(np.sum(dist.pmf[:idx]))


def exact_tail(dist: ExactDistribution, x: float) -> float:
    """P(a_n S_n / sqrt(v_n) >= x); atoms exactly at x are included."""
    idx = np.searchsorted(dist.x, x, side="left")
    return float(math.fsum(dist.pmf[idx:].tolist()))


def exact_moments(dist: ExactDistribution) -> dict:
    k = dist.support.astype(float)
    mean = float(np.dot(dist.pmf, k))
    var = float(np.dot(dist.pmf, (k - mean) ** 2))
    return {"mean": mean, "variance": var, "martingale_mean": (2.0 * dist.params.q - 1.0) / dist.a_n}


# --- brute-force oracles -------------------------------------------------

def enumerate_memory_law(params: ERWParams) -> dict[int, float]:
    """Terminal law by summing over all 2^n histories, weighting each step by
    the memory rule: P(X_{k+1} = x | X_1..X_k) = mean_i [p if X_i == x else 1 - p]."""
    p, q, n = params.p, params.q, params.n
    law: dict[int, float] = {}
    for hist in itertools.product((1, -1), repeat=n):
        w = q if hist[0] == 1 else 1.0 - q
        ups = 1 if hist[0] == 1 else 0
        for k in range(1, n):
            same = ups if hist[k] == 1 else k - ups
            w *= (same * p + (k - same) * (1.0 - p)) / k
            if w == 0.0:
                break
            ups += hist[k] == 1
        s = sum(hist)
        law[s] = law.get(s, 0.0) + w
    return law


def enumerate_kernel_law(params: ERWParams) -> dict[int, float]:
    """Terminal law over all 2^n histories weighted by the position kernel."""
    p, q, n = params.p, params.q, params.n
    law: dict[int, float] = {}
    for hist in itertools.product((1, -1), repeat=n):
        w = q if hist[0] == 1 else 1.0 - q
        s = hist[0]
        for k in range(1, n):
            up = 0.5 + (2.0 * p - 1.0) * s / (2.0 * k)
            w *= up if hist[k] == 1 else 1.0 - up
            s += hist[k]
        law[s] = law.get(s, 0.0) + w
    return law
