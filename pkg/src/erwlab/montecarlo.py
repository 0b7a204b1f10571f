"""Reproducible ensemble simulation.

Replicates are cut into fixed-size blocks (independent of the worker
count) and each block is simulated by a nogil numba kernel, so a thread
pool gives real parallelism.  Replicate i always reads the counter-based
stream (seed, i) from :mod:`erwlab.streams`, which makes the merged counts
a pure function of the plan.
"""
from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .coeffs import CoeffTable
from .errors import DomainError
from .model import ERWParams, markov_steps, memory_steps
from .streams import MASK64, fill_uniforms, replicate_key

BLOCK = 2048
SAMPLERS = ("markov", "memory")


@dataclass(frozen=True)
class SimulationPlan:
    params: ERWParams
    reps: int
    seed: int
    sampler: str = "markov"

    def __post_init__(self):
        if int(self.reps) != self.reps or self.reps < 1:
            raise DomainError(f"reps must be a positive integer, got {self.reps}")
        if not 0 <= int(self.seed) <= MASK64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.sampler not in SAMPLERS:
            raise DomainError(f"sampler must be one of {SAMPLERS}, got {self.sampler!r}")

    def echo(self) -> dict:
        return {"p": self.params.p, "q": self.params.q, "n": self.params.n,
                "reps": self.reps, "seed": int(self.seed), "sampler": self.sampler}


@dataclass(frozen=True, eq=False)
class Ensemble:
    plan: SimulationPlan
    terminal_counts: dict  # S_n -> count, keys ascending
    reps_done: int

    def values_and_counts(self) -> tuple[np.ndarray, np.ndarray]:
        keys = np.fromiter(self.terminal_counts.keys(), dtype=np.int64)
        counts = np.fromiter(self.terminal_counts.values(), dtype=np.int64)
        return keys, counts

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["S_n", "count"])
        for k, c in self.terminal_counts.items():
            w.writerow([k, c])
        return buf.getvalue()

    def summary(self) -> dict:
        keys, counts = self.values_and_counts()
        mean = float(np.dot(keys, counts) / self.reps_done)
        var = float(np.dot((keys - mean) ** 2, counts) / self.reps_done)
        return {"schema": 1, "plan": self.plan.echo(), "reps_done": self.reps_done,
                "mean": mean, "variance": var,
                "terminal_counts": {str(k): int(c) for k, c in self.terminal_counts.items()}}

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2)


@njit(cache=True, nogil=True)
def _simulate_block(seed, start, stop, p, q, n, use_memory, out):
    u = np.empty(n, dtype=np.float64)
    steps = np.empty(n, dtype=np.int8)
    for i in range(start, stop):
        fill_uniforms(replicate_key(seed, i), 0, u)
        if use_memory:
            out[i - start] = memory_steps(p, q, u, steps)
        else:
            out[i - start] = markov_steps(p, q, u, steps)


def simulate_terminals(plan: SimulationPlan, start: int, stop: int) -> np.ndarray:
    """Terminal positions of replicates start..stop-1."""
    out = np.empty(stop - start, dtype=np.int64)
    par = plan.params
    _simulate_block(np.uint64(plan.seed), start, stop, par.p, par.q, par.n,
                    plan.sampler == "memory", out)
    return out


def run_ensemble(plan: SimulationPlan, threads: int = 1) -> Ensemble:
    if threads < 1:
        raise DomainError("threads must be >= 1")
    blocks = [(s, min(s + BLOCK, plan.reps)) for s in range(0, plan.reps, BLOCK)]

    def work(block):
        vals, cnts = np.unique(simulate_terminals(plan, *block), return_counts=True)
        return Counter(dict(zip(vals.tolist(), cnts.tolist())))

    total: Counter = Counter()
    if threads == 1:
        for b in blocks:
            total.update(work(b))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(work, blocks):
                total.update(part)
    counts = {k: total[k] for k in sorted(total)}
    return Ensemble(plan=plan, terminal_counts=counts, reps_done=sum(counts.values()))


def _check_table(ens: Ensemble, table: CoeffTable) -> None:
    par = ens.plan.params
    if table.n != par.n or table.p != par.p:
        raise DomainError("coefficient table does not match the ensemble's (p, n)")


def empirical_tail(ens: Ensemble, table: CoeffTable, x: float) -> float:
    """Fraction of replicates with a_n S_n / sqrt(v_n) >= x."""
    _check_table(ens, table)
    keys, counts = ens.values_and_counts()
    xs = table.a_n * keys / math.sqrt(table.v_n)
    return float(counts[xs >= x].sum() / ens.reps_done)


def empirical_cdf(ens: Ensemble, support: np.ndarray) -> np.ndarray:
    """Empirical P(S_n <= k) evaluated at each k of ``support``."""
    keys, counts = ens.values_and_counts()
    cum = np.cumsum(counts) / ens.reps_done
    idx = np.searchsorted(keys, support, side="right")
    return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)


