"""Noisy recall: neuron update rules, intra-cluster correction and peeling."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .model import Cluster, ModelArrays, NetworkModel, NoiseSpec, RecallOutcome, Thresholds

DEFAULT_T_INNER = 10
DEFAULT_T_OUTER = 40


class UnreliableCheckWarning(UserWarning):
    """Constraint noise can exceed psi, so a satisfaction check may false-alarm."""


@dataclass(frozen=True)
class Limits:
    t_max: int = DEFAULT_T_INNER
    T_max: int = DEFAULT_T_OUTER

    def __post_init__(self) -> None:
        if self.t_max < 1 or self.T_max < 1:
            raise ValueError("iteration limits must be >= 1")


def constraint_update(h: float, psi: float) -> int:
    if h >= psi:
        return 1
    if h >= -psi:
        return 0
    return -1


def pattern_update(x: int, g: float, phi: float, Q: int) -> int:
    if abs(g) >= phi:
        x = x - (1 if g > 0 else -1)
    return min(max(x, 0), Q - 1)


def kernel_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**32 - 1))


def _local_arrays(cluster: Cluster) -> ModelArrays:
    local = Cluster(0, np.arange(cluster.size), cluster.W)
    return ModelArrays.from_model(_SingleCluster(local))


class _SingleCluster:
    def __init__(self, cluster):
        self.clusters = (cluster,)


def intra_cluster_correct(cluster: Cluster, state: np.ndarray, thresholds: Thresholds,
                          noise: NoiseSpec, t_max: int, rng: np.random.Generator,
                          Q: int) -> tuple[np.ndarray, bool]:
    """Run up to ``t_max`` noisy forward/backward rounds on one cluster's subpattern.

    ``state`` holds the cluster members' values in ``member_ids`` order.
    Returns the new values and whether the noiseless syndrome is clear.
    """
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    x = np.array(state, dtype=np.int64)
    if x.shape != (cluster.size,):
        raise ValueError(f"expected {cluster.size} states, got shape {x.shape}")
    arr = _local_arrays(cluster)
    converged = K.intra_cluster(
        0, x, thresholds.psi, thresholds.phi, noise.nu, noise.upsilon, Q, t_max,
        kernel_seed(rng), *arr.as_tuple(),
    )
    return x, bool(converged)


def cluster_satisfied(cluster: Cluster, state: np.ndarray, thresholds: Thresholds,
                      noise: NoiseSpec, rng: np.random.Generator) -> bool:
    """One noisy constraint pass; True when every constraint stays silent."""
    if not thresholds.psi > noise.nu:
        warnings.warn(
            f"nu={noise.nu} >= psi={thresholds.psi}: noise alone can fire constraints",
            UnreliableCheckWarning, stacklevel=2,
        )
    x = np.asarray(state, dtype=np.int64)
    arr = _local_arrays(cluster)
    return bool(K.check_cluster(0, x, thresholds.psi, noise.nu, kernel_seed(rng), *arr.as_tuple()))


def sequential_peeling(model: NetworkModel, initial_state: np.ndarray, thresholds: Thresholds,
                       noise: NoiseSpec, limits: Limits, rng: np.random.Generator,
                       pattern: np.ndarray | None = None) -> RecallOutcome:
    """Round-robin correction over all clusters, reverting clusters that stay unsatisfied.

    ``pattern`` is the stored pattern used to count symbol errors; without
    it the counts are left at zero.
    """
    state = np.array(initial_state, dtype=np.int64)
    if state.shape != (model.n,):
        raise ValueError(f"initial state must have length {model.n}")
    if state.min() < 0 or state.max() > model.Q - 1:
        raise ValueError("initial state outside the alphabet; clamp it first")
    flags = np.zeros(model.L, dtype=np.bool_)
    counts = np.zeros(limits.T_max + 1, dtype=np.int64)
    rounds, success = K.peel(
        state, thresholds.psi, thresholds.phi, noise.nu, noise.upsilon, model.Q,
        limits.t_max, limits.T_max, kernel_seed(rng), *model.arrays.as_tuple(), flags, counts,
    )
    errors = int(np.count_nonzero(state != pattern)) if pattern is not None else 0
    return RecallOutcome(
        final_state=state,
        symbol_errors=errors,
        pattern_error=errors > 0,
        outer_iterations=int(rounds),
        declared_failure=not success,
        per_cluster_converged=flags.copy(),
        satisfied_counts=counts[: rounds + 1].copy(),
    )


def fixed_point_audit(model: NetworkModel, state: np.ndarray, thresholds: Thresholds,
                      noise: NoiseSpec, rounds: int, rng: np.random.Generator) -> tuple[int, int]:
    """Force ``rounds`` sweeps of check-plus-correction over every cluster.

    Returns (constraint firings, pattern state changes). Both stay zero on a
    stored pattern when thresholds exceed the noise bounds.
    """
    x = np.array(state, dtype=np.int64)
    firings, changes = K.audit_fixed_point(
        x, thresholds.psi, thresholds.phi, noise.nu, noise.upsilon, model.Q, rounds,
        kernel_seed(rng), *model.arrays.as_tuple(),
    )
    return int(firings), int(changes)
