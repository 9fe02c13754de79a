"""Distance-based non-Markovianity estimators.

Each estimator compares a probe channel family with a finite candidate set
of (epsilon-)Markovian families at a common time ``t``:

* ``max``: min over candidates of max over input states of the distance
  between the two outputs;
* ``min``: min over candidates and input states;
* ``cjks``: min over candidates of the distance between Choi states
  ``(I (x) Lambda)(|Psi+><Psi+|)``.

The optimization is restricted to whatever the candidate set contains;
with a sampled set the value is an upper estimate of the true measure.
Ties in every arg-extremum resolve to the lowest index.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channels import AmplitudeDampingFamily, PhaseDampingFamily
from .errors import ConfigurationError
from .quantum import DensityMatrix
from .sampling import SampleConfig, sample_divisible_families

MODES = ("max", "min", "cjks")
DISTANCES = ("trace", "relative_entropy")
THREADS_ENV = "NONMARKOV_THREADS"


def certified_epsilon(member) -> float | None:
    """Smallest epsilon for which ``member`` is certified epsilon-Markovian."""
    eps = getattr(member, "certified_epsilon", None)
    if eps is not None:
        return float(eps)
    if isinstance(member, (AmplitudeDampingFamily, PhaseDampingFamily)):
        return 0.0 if member.analytically_divisible else None
    return None


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """Finite stand-in for the set of epsilon-Markovian maps."""

    family: str
    members: tuple
    config: SampleConfig | None = None
    epsilon: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ConfigurationError("candidate set is empty")
        for j, m in enumerate(self.members):
            eps = certified_epsilon(m)
            if eps is None or eps > self.epsilon + 1e-12:
                raise ConfigurationError(f"candidate {j} ({m!r}) is not certified {self.epsilon}-Markovian")

    def __len__(self):
        return len(self.members)

    def __getitem__(self, item):
        return self.members[item]

    def union(self, other: "CandidateSet | Sequence") -> "CandidateSet":
        extra = other.members if isinstance(other, CandidateSet) else tuple(other)
        eps = max(self.epsilon, getattr(other, "epsilon", self.epsilon))
        return CandidateSet(self.family, self.members + extra, self.config, eps)


def divisible_candidates(probe, config: SampleConfig) -> CandidateSet:
    """Sampled divisible members of the probe's own family."""
    return CandidateSet(probe.tag, tuple(sample_divisible_families(probe, config)), config, 0.0)


@dataclass(frozen=True, eq=False)
class MeasureResult:
    time: float
    value: float
    mode: str
    epsilon: float
    candidate_index: int
    argmin_param: float
    candidate: object = field(repr=False)
    state_index: int | None = None
    probe_state: DensityMatrix | None = field(default=None, repr=False)
    distance: str = "trace"


# --------------------------------------------------------------------------
# batched distances
# --------------------------------------------------------------------------


def _trace_norms(delta: np.ndarray) -> np.ndarray:
    """Trace norms of a stack of Hermitian matrices."""
    if delta.shape[-1] == 2:
        a = delta[..., 0, 0].real
        d = delta[..., 1, 1].real
        b = delta[..., 0, 1]
        m = 0.5 * (a + d)
        r = np.sqrt((0.5 * (a - d)) ** 2 + np.abs(b) ** 2)
        return np.abs(m + r) + np.abs(m - r)
    return np.sum(np.abs(np.linalg.eigvalsh(delta)), axis=-1)


def _relative_entropies(p: np.ndarray, q: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """``D(p || q)`` in bits for broadcastable stacks; ``inf`` off support."""
    p, q = np.broadcast_arrays(p, q)
    lp = np.clip(np.linalg.eigvalsh(p), 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        s_p = -np.sum(np.where(lp > 0, lp * np.log2(lp), 0.0), axis=-1)
        lq, vq = np.linalg.eigh(q)
        w = np.real(np.einsum("...ji,...jk,...ki->...i", vq.conj(), p, vq))
        null = lq <= tol
        cross = np.sum(np.where(null, 0.0, w * np.log2(np.where(null, 1.0, lq))), axis=-1)
    out = -s_p - cross
    out = np.where(np.any(null & (w > tol), axis=-1), np.inf, out)
    return np.maximum(out, 0.0)


def _distances(p: np.ndarray, q: np.ndarray, distance: str) -> np.ndarray:
    if distance == "trace":
        return _trace_norms(p - q)
    if distance == "relative_entropy":
        return _relative_entropies(p, q)
    raise ConfigurationError(f"unknown distance backend {distance!r}")


def _state_stack(states) -> np.ndarray:
    if isinstance(states, np.ndarray):
        arr = states.astype(complex)
    elif states is None or len(states) == 0:
        raise ConfigurationError("state set is empty")
    else:
        arr = np.stack([np.asarray(s.data if isinstance(s, DensityMatrix) else s, dtype=complex) for s in states])
    if arr.ndim != 3 or arr.shape[0] == 0:
        raise ConfigurationError("state set is empty")
    return arr


def distance_table(probe, t: float, candidates, states, distance: str = "trace") -> np.ndarray:
    """``table[j, i]`` = distance between probe and candidate ``j`` outputs on state ``i``."""
    rho = _state_stack(states)
    out_p = probe.snapshot(t).apply_array(rho)
    out_c = np.stack([m.snapshot(t).apply_array(rho) for m in candidates])
    return _distances(out_p[None], out_c, distance)


def _check(candidates, mode: str, distance: str):
    if candidates is None or len(candidates) == 0:
        raise ConfigurationError("candidate set is empty")
    if mode not in MODES:
        raise ConfigurationError(f"unknown mode {mode!r}")
    if distance not in DISTANCES:
        raise ConfigurationError(f"unknown distance backend {distance!r}")


def _eps(candidates) -> float:
    return float(getattr(candidates, "epsilon", 0.0))


def _result(candidates, t, value, mode, j, i, rho, distance) -> MeasureResult:
    member = candidates[j]
    state = None if i is None else DensityMatrix(rho[i], (rho.shape[-1],), validate=False)
    return MeasureResult(
        float(t), float(value), mode, _eps(candidates), int(j), float(member.param), member, i, state, distance
    )


def max_distance_measure(probe, t: float, candidates, states, *, distance: str = "trace") -> MeasureResult:
    """min over candidates of max over states of the output distance."""
    _check(candidates, "max", distance)
    rho = _state_stack(states)
    table = distance_table(probe, t, candidates, rho, distance)
    worst = np.argmax(table, axis=1)
    per_candidate = table[np.arange(table.shape[0]), worst]
    j = int(np.argmin(per_candidate))
    return _result(candidates, t, per_candidate[j], "max", j, int(worst[j]), rho, distance)


def min_distance_measure(probe, t: float, candidates, states, *, distance: str = "trace") -> MeasureResult:
    """min over candidates and states of the output distance."""
    _check(candidates, "min", distance)
    rho = _state_stack(states)
    table = distance_table(probe, t, candidates, rho, distance)
    j, i = np.unravel_index(int(np.argmin(table)), table.shape)
    return _result(candidates, t, table[j, i], "min", j, int(i), rho, distance)


def _choi_stack(snapshot) -> np.ndarray:
    return snapshot.choi().data


def cjks_measure(probe, t: float, candidates, *, distance: str = "trace") -> MeasureResult:
    """min over candidates of the Choi-state distance."""
    _check(candidates, "cjks", distance)
    cp = _choi_stack(probe.snapshot(t))
    cc = np.stack([_choi_stack(m.snapshot(t)) for m in candidates])
    dist = _distances(cp[None], cc, distance)
    j = int(np.argmin(dist))
    return _result(candidates, t, dist[j], "cjks", j, None, None, distance)


def _workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def measure_curve(
    probe,
    t_grid: Sequence[float],
    candidates,
    states=None,
    *,
    mode: str = "max",
    distance: str = "trace",
    workers: int | None = None,
) -> list[MeasureResult]:
    """One :class:`MeasureResult` per grid time, candidates re-used throughout."""
    _check(candidates, mode, distance)
    if mode == "cjks":
        fn = lambda t: cjks_measure(probe, t, candidates, distance=distance)  # noqa: E731
    else:
        rho = _state_stack(states)
        single = max_distance_measure if mode == "max" else min_distance_measure
        fn = lambda t: single(probe, t, candidates, rho, distance=distance)  # noqa: E731
    grid = [float(t) for t in t_grid]
    n = _workers(workers)
    if n == 1:
        return [fn(t) for t in grid]
    with ThreadPoolExecutor(n) as pool:
        return list(pool.map(fn, grid))


def curve_values(results: Sequence[MeasureResult]) -> np.ndarray:
    return np.array([r.value for r in results])


def first_index_below(values: np.ndarray, threshold: float, start: int = 0) -> int | None:
    idx = np.flatnonzero(values[start:] < threshold)
    return int(idx[0]) + start if idx.size else None


def decay_plateau_revival(times: Sequence[float], values: Sequence[float], threshold: float = 1e-3):
    """Locate decay-to-zero and revival onset in a measure curve.

    Returns ``(t_zero, t_revival)``: the first time the curve drops below
    ``threshold`` after being above it, and the first later time it rises
    above it again. Either entry is ``None`` when absent.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    above = values >= threshold
    start = int(np.argmax(above)) if np.any(above) else None
    if start is None:
        return None, None
    z = first_index_below(values, threshold, start)
    if z is None:
        return None, None
    rest = np.flatnonzero(above[z:])
    r = int(rest[0]) + z if rest.size else None
    return float(times[z]), (None if r is None else float(times[r]))


__all__ = [
    "CandidateSet",
    "MeasureResult",
    "certified_epsilon",
    "divisible_candidates",
    "distance_table",
    "max_distance_measure",
    "min_distance_measure",
    "cjks_measure",
    "measure_curve",
    "curve_values",
    "decay_plateau_revival",
    "MODES",
    "DISTANCES",
]
