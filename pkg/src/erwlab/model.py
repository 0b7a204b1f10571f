"""The elephant random walk: parameters, kernel, samplers, martingale view.

Both samplers turn a vector of n uniforms into a path; uniform 0 decides
X_1 (+1 iff u < q) and uniform k decides X_{k+1}.

* memory sampler (the literal definition): with x = u * k, the index
  beta = floor(x) + 1 is uniform on {1..k} and frac(x) is an independent
  uniform; X_{k+1} = X_beta if frac(x) < p, else -X_beta.
* Markov sampler: X_{k+1} = +1 iff u < transition_prob(p, k, S_k).

The two consume the same number of uniforms but agree only in law.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .coeffs import CoeffTable, check_p
from .errors import DomainError


@dataclass(frozen=True)
class ERWParams:
    p: float
    q: float = 0.5
    n: int = 1

    def __post_init__(self):
        check_p(self.p)
        if not 0.0 <= self.q <= 1.0:
            raise DomainError(f"first-step parameter q must lie in [0, 1], got {self.q}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"horizon n must be a positive integer, got {self.n}")
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "n", int(self.n))


@dataclass(frozen=True, eq=False)
class Path:
    steps: np.ndarray  # X_1..X_n
    positions: np.ndarray  # S_0..S_n

    @property
    def n(self) -> int:
        return len(self.steps)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "X_k", "S_k"])
        for k in range(1, self.n + 1):
            w.writerow([k, int(self.steps[k - 1]), int(self.positions[k])])
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class MartingaleView:
    M: np.ndarray
    dM: np.ndarray
    qv: np.ndarray  # conditional-variance sums
    qv_closed: float  # <M>_n from v_n minus the correction sum


@njit(cache=True, nogil=True)
def _up_prob(p, k, s):
    # (s / 2k) is exact at |s| = k, which keeps the probability inside [0, 1]
    return 0.5 + (2.0 * p - 1.0) * (s / (2.0 * k))


def transition_prob(p: float, k: int, s: int) -> float:
    """P(X_{k+1} = +1 | S_k = s) = 1/2 + (2p - 1) s / (2k)."""
    check_p(p)
    if k < 1 or abs(s) > k or (s - k) % 2:
        raise DomainError(f"S_{k} = {s} is not attainable")
    return float(_up_prob(float(p), float(k), float(s)))


@njit(cache=True, nogil=True)
def markov_steps(p, q, u, steps):
    """Fill ``steps`` from uniforms ``u``; returns S_n."""
    n = u.shape[0]
    s = 1 if u[0] < q else -1
    steps[0] = s
    for k in range(1, n):
        x = 1 if u[k] < _up_prob(p, float(k), float(s)) else -1
        steps[k] = x
        s += x
    return s


@njit(cache=True, nogil=True)
def memory_steps(p, q, u, steps):
    n = u.shape[0]
    s = 1 if u[0] < q else -1
    steps[0] = s
    for k in range(1, n):
        x = u[k] * k
        b = int(x)
        if b >= k:
            b = k - 1
        frac = x - b
        step = steps[b] if frac < p else -steps[b]
        steps[k] = step
        s += step
    return s


def _path(sampler, params: ERWParams, rng) -> Path:
    u = np.asarray(rng.random(params.n), dtype=np.float64)
    steps = np.empty(params.n, dtype=np.int8)
    sampler(params.p, params.q, u, steps)
    positions = np.concatenate(([0], np.cumsum(steps, dtype=np.int64)))
    return Path(steps=steps, positions=positions)


def sample_path_memory(params: ERWParams, rng) -> Path:
    """Sample a path by the literal memory rule; ``rng`` needs ``random(size)``."""
    return _path(memory_steps, params, rng)


def sample_path_markov(params: ERWParams, rng) -> Path:
    """Sample a path through the position kernel (O(1) state per step)."""
    return _path(markov_steps, params, rng)


def martingale_view(path: Path, table: CoeffTable, p: float | None = None) -> MartingaleView:
    """M_k = a_k S_k, its increments and the predictable quadratic variation.

    ``qv`` accumulates the conditional variances a_1^2 and, for k >= 2,
    a_k^2 (1 - (2p-1)^2 (S_{k-1}/(k-1))^2).  ``qv_closed`` evaluates
    v_n - (2p-1)^2 sum_{k<n} (a_{k+1}/a_k)^2 (M_k/k)^2 independently.
    """
    if path.n != table.n:
        raise DomainError(f"path horizon {path.n} != table horizon {table.n}")
    if p is not None and float(p) != table.p:
        raise DomainError(f"path p={p} != table p={table.p}")
    n = table.n
    a = table.a
    S = path.positions[1:].astype(float)
    M = a * S
    dM = np.diff(M, prepend=0.0)
    c2 = (2.0 * table.p - 1.0) ** 2
    k = np.arange(1, n, dtype=float)
    cond = np.empty(n)
    cond[0] = 1.0
    cond[1:] = a[1:] ** 2 * (1.0 - c2 * (S[:-1] / k) ** 2)
    qv = np.cumsum(cond)
    corr = math.fsum((((a[1:] / a[:-1]) ** 2) * (M[:-1] / k) ** 2).tolist())
    return MartingaleView(M=M, dM=dM, qv=qv, qv_closed=table.v_n - c2 * corr)
