"""Deterministic normalizing sequences of the elephant random walk.

With gamma_k = 1 + (2p - 1)/k the sequences are

    a_1 = 1,  a_{k+1} = a_k / gamma_k,      v_k = a_1^2 + ... + a_k^2,

so that a_n S_n is a martingale and v_n is its variance proxy.  In closed
form a_n = Gamma(n) Gamma(2p) / Gamma(n + 2p - 1); the product recursion is
used for the table itself because the Gamma ratio overflows beyond n ~ 170.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedRegimeError

COEFF_CAP = 1_000_000


class Regime(str, enum.Enum):
    DIFFUSIVE = "diffusive"
    CRITICAL = "critical"
    SUPERDIFFUSIVE = "superdiffusive"
    CLASSICAL = "classical"


def classify(p: float) -> Regime:
    if p in (0.0, 0.5):
        return Regime.CLASSICAL
    if p < 0.75:
        return Regime.DIFFUSIVE
    if p == 0.75:
        return Regime.CRITICAL
    return Regime.SUPERDIFFUSIVE


def check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise DomainError(f"memory parameter p must lie in [0, 1], got {p}")
    return p


def require_supported(p: float) -> Regime:
    """Gate for the normal-approximation diagnostics: p in (0, 3/4], p != 1/2."""
    regime = classify(check_p(p))
    if regime in (Regime.CLASSICAL, Regime.SUPERDIFFUSIVE):
        raise UnsupportedRegimeError(
            f"p={p} is outside (0, 3/4] \\ {{1/2}} ({regime.value} regime)"
        )
    return regime


def lgamma(x: float) -> float:
    """log|Gamma(x)|; the C library routine is accurate to a few ulp."""
    return math.lgamma(x)


def gamma_ratio_a(p: float, n: int) -> float:
    """a_n from Gamma(n) Gamma(2p) / Gamma(n + 2p - 1) via log-Gamma (p > 0)."""
    if p <= 0.0:
        raise DomainError("Gamma-ratio form of a_n needs p > 0")
    if n == 1:
        return 1.0
    return math.exp(lgamma(n) + lgamma(2.0 * p) - lgamma(n + 2.0 * p - 1.0))


@dataclass(frozen=True, eq=False)
class CoeffTable:
    """gamma[k-1] = gamma_k (k = 1..n-1); a[k-1] = a_k and v[k-1] = v_k (k = 1..n)."""

    p: float
    n: int
    gamma: np.ndarray
    a: np.ndarray
    v: np.ndarray
    regime: Regime

    @property
    def a_n(self) -> float:
        return float(self.a[-1])

    @property
    def v_n(self) -> float:
        return float(self.v[-1])

    @property
    def scale(self) -> float:
        """sqrt(v_n) / a_n: S_n divided by this is the standardized walk."""
        return math.sqrt(self.v_n) / self.a_n

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "gamma_k", "a_k", "v_k"])
        for k in range(1, self.n + 1):
            g = fmt(self.gamma[k - 1]) if k < self.n else ""
            w.writerow([k, g, fmt(self.a[k - 1]), fmt(self.v[k - 1])])
        return buf.getvalue()


def fmt(x: float) -> str:
    """17 significant digits, locale independent."""
    return format(float(x), ".17g")


def _compensated_cumsum(x: np.ndarray) -> np.ndarray:
    # Neumaier's variant of Kahan summation
    out = np.empty_like(x)
    s = 0.0
    c = 0.0
    for i, xi in enumerate(x.tolist()):
        t = s + xi
        if abs(s) >= abs(xi):
            c += (s - t) + xi
        else:
            c += (xi - t) + s
        s = t
        out[i] = s + c
    return out


def build_coeffs(p: float, n: int, cap: int = COEFF_CAP) -> CoeffTable:
    p = check_p(p)
    if int(n) != n or n < 1:
        raise DomainError(f"horizon n must be a positive integer, got {n}")
    n = int(n)
    if p == 0.0 and n > 1:
        raise DomainError("p = 0 gives gamma_1 = 0, so a_2 = a_1 / gamma_1 is infinite; "
                          "coefficients exist only for n = 1")
    if n > cap:
        raise DomainError(f"n={n} exceeds the coefficient cap {cap}")
    k = np.arange(1, n, dtype=float)
    # ((k - 1) + 2p) / k == 1 + (2p - 1)/k, without cancellation at k = 1 for small p
    gamma = ((k - 1.0) + 2.0 * p) / k
    # divide.accumulate gives a_{k+1} = a_k / gamma_k with one rounding per step
    with np.errstate(over="ignore"):  # overflow is reported just below
        a = np.divide.accumulate(np.concatenate(([1.0], gamma)))
        v = _compensated_cumsum(a * a)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(v))):
        raise FloatingPointError(f"non-finite coefficients for p={p}, n={n}")
    for arr in (gamma, a, v):
        arr.setflags(write=False)
    return CoeffTable(p=p, n=n, gamma=gamma, a=a, v=v, regime=classify(p))


def asymptotic_constants(p: float) -> dict:
    """Limits of a_n n^{2p-1} and of v_n over its growth scale.

    ``vn_scale`` is ``("power", 3 - 4p)`` for p < 3/4, meaning v_n ~ limit * n^(3-4p),
    and ``("log", None)`` at p = 3/4, meaning v_n ~ limit * log n.
    """
    p = check_p(p)
    if not 0.0 < p <= 0.75:
        raise UnsupportedRegimeError(f"asymptotic constants need p in (0, 3/4], got {p}")
    an_limit = math.exp(lgamma(2.0 * p))
    if p < 0.75:
        return {
            "an_limit": an_limit,
            "vn_limit": an_limit**2 / (3.0 - 4.0 * p),
            "vn_scale": ("power", 3.0 - 4.0 * p),
        }
    return {"an_limit": an_limit, "vn_limit": math.pi / 4.0, "vn_scale": ("log", None)}


def vn_growth(p: float, n: int) -> float:
    """The growth scale n^(3-4p), or log n in the critical case."""
    kind, expo = asymptotic_constants(p)["vn_scale"]
    return n**expo if kind == "power" else math.log(n)


def rate_epsilon(table: CoeffTable) -> float:
    """eps_n = 2 max_i a_i / sqrt(v_n), the uniform bound on |dM_i| / sqrt(v_n)."""
    return 2.0 * float(np.max(table.a)) / math.sqrt(table.v_n)


def rate_reference(p: float, n: int) -> dict:
    """Constant-free rate shapes for the Berry-Esseen distance and the Cramer range."""
    regime = require_supported(p)
    if n < 3:
        raise DomainError(f"rate shapes need n >= 3, got {n}")
    logn = math.log(n)
    if regime is Regime.CRITICAL:
        return {"besseen_rate": math.log(logn) / math.sqrt(logn), "cramer_range": math.sqrt(logn)}
    if p < 0.5:
        return {"besseen_rate": logn / math.sqrt(n), "cramer_range": math.sqrt(n)}
    expo = (3.0 - 4.0 * p) / 2.0
    return {"besseen_rate": logn / n**expo, "cramer_range": n**expo}
