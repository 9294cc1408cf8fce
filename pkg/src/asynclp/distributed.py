"""Simulated distributed execution over a shared associative array.

The reduced system is laid out as keyed cells the way a distributed key-value
store would hold it: one read-only column g(k) of G' per coordinate, the
read-only offset e, and one scalar cell per coordinate for c2(k) and d2(k).
Workers repeat three stages with no coordination beyond per-cell atomicity:

    lookup     read d_hat = d2(k), c_hat = c2(k) and the column g(k)
    compute    delta = gamma * m_k(d_hat) - c_hat
    increment  d2(j) += g(k)_j * delta for all j, then c2(k) += delta

Reads may observe values staler than concurrent increments; increments are
never lost.  A delta of zero performs no writes.  Snapshots for monitoring are
taken without locks and tolerate staleness.

A single-worker run is bit-for-bit the engine's random-coordinate schedule:
same RNG stream, same update arithmetic, same recording cadence.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .engine import Trajectory, _distance_to_reference, make_gamma
from .stationarity import StationaritySystem


class AtomicCell:
    """A float cell with atomic increments (lock around +=)."""

    __slots__ = ("_value", "_lock")

    def __init__(self, value: float = 0.0):
        self._value = float(value)
        self._lock = threading.Lock()

    @property
    def value(self) -> float:
        # lock-free read; may be stale relative to in-flight increments
        return self._value

    def add(self, delta: float) -> float:
        with self._lock:
            self._value += delta
            return self._value


class AtomicCounter:
    """Integer counter with atomic increment-and-get."""

    __slots__ = ("_value", "_lock")

    def __init__(self):
        self._value = 0
        self._lock = threading.Lock()

    @property
    def value(self) -> int:
        return self._value

    def add(self, n: int = 1) -> int:
        with self._lock:
            self._value += n
            return self._value


@dataclass
class AssocArray:
    """Keyed view of a reduced system: columns, offset, and scalar cells."""

    g: list[np.ndarray]
    e: np.ndarray
    c2: list[AtomicCell]
    d2: list[AtomicCell]

    @property
    def n_coords(self) -> int:
        return len(self.c2)

    def snapshot_c2(self) -> np.ndarray:
        return np.array([cell.value for cell in self.c2])

    def snapshot_d2(self) -> np.ndarray:
        return np.array([cell.value for cell in self.d2])


def init_array(system: StationaritySystem) -> AssocArray:
    """Cold-start layout: c2 cells at 0, d2 cells at e, read-only g columns."""
    K = system.n_nonlinear
    g = [system.Gprime[:, k].copy() for k in range(K)]
    for col in g:
        col.setflags(write=False)
    e = system.e.copy()
    e.setflags(write=False)
    return AssocArray(
        g=g,
        e=e,
        c2=[AtomicCell(0.0) for _ in range(K)],
        d2=[AtomicCell(system.e[k]) for k in range(K)],
    )


def worker_update(array: AssocArray, system: StationaritySystem, k: int,
                  gamma: float = 1.0, log: list | None = None) -> float:
    """One lookup/compute/increment cycle on coordinate k; returns delta."""
    d_hat = array.d2[k].value
    c_hat = array.c2[k].value
    delta = system.m_scalar(k, d_hat, gamma) - c_hat
    if delta != 0.0:
        col = array.g[k]
        for j in range(array.n_coords):
            array.d2[j].add(col[j] * delta)
        array.c2[k].add(delta)
    if log is not None:
        log.append((k, delta))
    return delta


@dataclass
class WorkerReport:
    """Per-worker accounting for a distributed run."""

    worker: int
    updates: int
    histogram: list[int]

    def to_dict(self) -> dict:
        return {"worker": self.worker, "updates": self.updates,
                "histogram": self.histogram}


def run_distributed(system: StationaritySystem, workers: int = 1,
                    max_equiv_iters: float = 1000.0, tol: float = 1e-8,
                    seed: int = 0, homotopy: object = None,
                    reference: dict[str, np.ndarray] | None = None,
                    ) -> tuple[np.ndarray, np.ndarray, Trajectory,
                               list[WorkerReport], bool]:
    """Race `workers` threads over a shared array until tol or budget.

    Worker i draws coordinates from its own stream: default_rng(seed) when
    running alone (bit-for-bit the engine's randomk mode), default_rng([seed, i])
    otherwise.  Whichever worker crosses a multiple of K total updates takes a
    stale-tolerant snapshot, records a trajectory row, and checks tol.

    Returns (d2, c2, trajectory, reports, converged).
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    K = system.n_nonlinear
    gamma = make_gamma(homotopy)
    array = init_array(system)
    fired = AtomicCounter()
    stop = threading.Event()
    converged = threading.Event()
    traj = Trajectory()
    traj_lock = threading.Lock()
    budget_updates = int(round(max_equiv_iters * K))

    def record_row() -> float:
        d2 = array.snapshot_d2()
        c2 = array.snapshot_c2()
        res = system.residual(d2)
        values = system.recover_variables(d2, c2)
        obj = system.problem.objective_value(values)
        with traj_lock:
            traj.append(fired.value / K, obj, res,
                        _distance_to_reference(values, reference))
        return res

    res0 = record_row()
    if res0 <= tol or budget_updates == 0:
        if res0 <= tol:
            converged.set()
        return (array.snapshot_d2(), array.snapshot_c2(), traj, [], converged.is_set())

    counts = [0] * workers
    histograms = [np.zeros(K, dtype=int) for _ in range(workers)]

    def worker_fn(i: int) -> None:
        if workers == 1:
            rng = np.random.default_rng(seed)
        else:
            rng = np.random.default_rng([seed, i])
        while not stop.is_set():
            before = fired.value
            if before >= budget_updates:
                stop.set()
                break
            g = gamma(before // K + 1)
            k = int(rng.integers(K))
            worker_update(array, system, k, g)
            counts[i] += 1
            histograms[i][k] += 1
            after = fired.add(1)
            if after % K == 0:
                res = record_row()
                if res <= tol:
                    converged.set()
                    stop.set()
            if after >= budget_updates:
                stop.set()

    threads = [threading.Thread(target=worker_fn, args=(i,)) for i in range(workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    reports = [WorkerReport(i, counts[i], histograms[i].tolist())
               for i in range(workers)]
    return (array.snapshot_d2(), array.snapshot_c2(), traj, reports,
            converged.is_set())
