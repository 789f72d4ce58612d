"""User scheduling: the geometry-based greedy selector working on the
user-cluster pathloss matrix, a full-CSI greedy baseline, a random
baseline, and the channel-estimation load metric."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import gscm
from .errors import ConfigurationError, RankDeficiencyError, SelectionError
from .rx import PowerConfig, sum_rate, zf_weights


@dataclass(frozen=True)
class ScheduleResult:
    """Ordered selected-user indices with per-step diagnostics.

    ``per_step_scores`` holds the row norm for the first pick and, for the
    geometry selector, the winning correlation at each later pick; for the
    full-CSI greedy it holds the objective value after each accepted step.
    """

    selected: tuple[int, ...]
    per_step_scores: tuple[float, ...]
    algorithm: str


def build_v_matrix(scenario: gscm.Scenario) -> np.ndarray:
    """K x N_C matrix of large-scale user-cluster gains.

    Entry (k, j) is sqrt(path gain of user k) * A_VR(user k, VR j) *
    sqrt(A_C(cluster j, user k)). Purely geometric: no fast fading and no
    shadowing enters, since the base station computes it from positions
    alone.
    """
    k = scenario.num_users
    n_c = scenario.num_clusters
    v = np.empty((k, n_c))
    for i in range(k):
        for j in range(n_c):
            v[i, j] = gscm.user_cluster_geometry_factor(
                scenario, i, j, include_shadowing=False)
    return v


def correlation_metric(v_k: np.ndarray, v_j: np.ndarray) -> float:
    """Normalized inner product |v_k . v_j*| / (||v_k|| ||v_j||) in [0, 1]."""
    v_k = np.asarray(v_k).reshape(-1)
    v_j = np.asarray(v_j).reshape(-1)
    nk = np.linalg.norm(v_k)
    nj = np.linalg.norm(v_j)
    if nk == 0 or nj == 0:
        raise ConfigurationError("correlation metric undefined for a zero row")
    return min(1.0, float(abs(np.vdot(v_j, v_k))) / (nk * nj))


def gus_select(v: np.ndarray, num_selected: int,
               variant: str = "last") -> ScheduleResult:
    """Geometry-based greedy selection on the user-cluster matrix.

    The first user maximizes the row norm; each later pick minimizes the
    correlation metric against the most recently selected row (``last``,
    the literal algorithm) or against the worst case over all selected rows
    (``set``). Ties go to the lowest index. Zero-norm rows are excluded
    with a warning since their correlation is undefined.
    """
    v = np.asarray(v, dtype=float)
    k = v.shape[0]
    if not 1 <= num_selected <= k:
        raise ConfigurationError(f"num_selected must be in [1, {k}]")
    if variant not in ("last", "set"):
        raise ConfigurationError(f"unknown variant {variant!r}")

    norms = np.linalg.norm(v, axis=1)
    candidates = [i for i in range(k) if norms[i] > 0]
    if len(candidates) < k:
        warnings.warn(
            f"excluding {k - len(candidates)} zero-norm user rows from selection",
            stacklevel=2,
        )
    if len(candidates) < num_selected:
        raise SelectionError(
            f"only {len(candidates)} usable candidates for {num_selected} slots"
        )

    first = max(candidates, key=lambda i: (norms[i], -i))
    selected = [first]
    scores = [float(norms[first])]
    remaining = [i for i in candidates if i != first]
    while len(selected) < num_selected:
        if variant == "last":
            ref = v[selected[-1]]
            corr = {i: correlation_metric(v[i], ref) for i in remaining}
        else:
            corr = {
                i: max(correlation_metric(v[i], v[s]) for s in selected)
                for i in remaining
            }
        pick = min(remaining, key=lambda i: (corr[i], i))
        selected.append(pick)
        scores.append(corr[pick])
        remaining.remove(pick)
    return ScheduleResult(tuple(selected), tuple(scores), "GUS")


def gwc_select(h_all: np.ndarray, num_selected: int,
               power: PowerConfig, mode: str = "physical") -> ScheduleResult:
    """Full-CSI greedy baseline: start from the strongest channel column
    and at each step add the user maximizing the zero-forcing sum-rate of
    the tentative set (equal power split over the tentative set size).

    A step that cannot improve the objective still takes the best available
    candidate so that exactly ``num_selected`` users come out.
    """
    h_all = np.asarray(h_all)
    k = h_all.shape[1]
    if not 1 <= num_selected <= k:
        raise ConfigurationError(f"num_selected must be in [1, {k}]")

    norms = np.linalg.norm(h_all, axis=0)
    first = int(np.argmax(norms))
    selected = [first]
    scores = [_set_rate(h_all, selected, power, mode)]
    remaining = [i for i in range(k) if i != first]
    while len(selected) < num_selected:
        best_i, best_rate = None, -math.inf
        for i in remaining:
            try:
                rate = _set_rate(h_all, selected + [i], power, mode)
            except (RankDeficiencyError, ConfigurationError):
                continue
            if rate > best_rate:
                best_i, best_rate = i, rate
        if best_i is None:
            raise SelectionError(
                "zero-forcing is undefined for every remaining candidate"
            )
        selected.append(best_i)
        scores.append(best_rate)
        remaining.remove(best_i)
    return ScheduleResult(tuple(selected), tuple(scores), "GWC")


def _set_rate(h_all: np.ndarray, members: list[int], power: PowerConfig,
              mode: str) -> float:
    h = h_all[:, members]
    p = PowerConfig(power.total_power, len(members), power.noise_power)
    return sum_rate(h, zf_weights(h), p, mode=mode)


def random_select(num_users: int, num_selected: int,
                  rng: np.random.Generator | int | None = None) -> ScheduleResult:
    """Uniform subset baseline, deterministic for a given generator/seed."""
    if num_selected > num_users:
        raise ConfigurationError("num_selected must be <= num_users")
    if num_selected < 1 or num_users < 1:
        raise ConfigurationError("counts must be positive")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    picks = rng.choice(num_users, size=num_selected, replace=False)
    return ScheduleResult(tuple(int(i) for i in picks),
                          tuple(0.0 for _ in range(num_selected)), "RANDOM")


def estimation_load(num_antennas: int, num_estimated_users: int) -> int:
    """Channel-estimation load 2 * M * (users whose channels are estimated):
    the selected-set size for the geometry scheduler, the full pool for a
    full-CSI scheme."""
    if num_antennas < 1 or num_estimated_users < 1:
        raise ConfigurationError("counts must be positive")
    return 2 * num_antennas * num_estimated_users
