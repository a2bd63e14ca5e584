"""Closed-form error probabilities, Monte-Carlo P_ci estimation and density evolution."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import binom

from . import _kernels as K
from .model import Cluster, DegreeDistribution, NetworkModel, NoiseSpec, Thresholds
from .recall import DEFAULT_T_INNER

Z95 = 1.959963984540054


# -- single-neuron noise probabilities -------------------------------------------

def _prob_at_least(a: float, half_width: float) -> float:
    """Pr(U >= a) for U uniform on [-half_width, half_width] (a point mass at 0 if width 0)."""
    if half_width == 0.0:
        return 1.0 if a <= 0.0 else 0.0
    return min(1.0, max(0.0, (half_width - a) / (2.0 * half_width)))


def noiseless_flip_probs(upsilon: float, nu: float, phi: float, psi: float) -> tuple[float, float]:
    """Spurious-action probabilities with no external error: (constraint fires, pattern flips)."""
    if not (0.0 <= upsilon < 1.0 and 0.0 <= nu < 1.0):
        raise ValueError("noise half-widths must lie in [0, 1)")
    if phi <= 0 or psi <= 0:
        raise ValueError("thresholds must be positive")
    pi0 = max(0.0, (nu - psi) / nu) if nu > 0 else 0.0
    p0 = max(0.0, (upsilon - phi) / upsilon) if upsilon > 0 else 0.0
    return pi0, p0


def pi1_upper_bound(nu: float, psi: float, eta: float) -> float:
    """Bound on a constraint staying silent while it carries one error of weight >= eta."""
    if psi <= 0:
        raise ValueError("psi must be positive")
    if eta < psi:
        raise ValueError(f"invalid regime: eta={eta} below psi={psi}")
    if not 0.0 <= nu < 1.0:
        raise ValueError("nu must lie in [0, 1)")
    if nu == 0:
        return 0.0
    return max(0.0, (nu - (eta - psi)) / (2.0 * nu))


# -- analytic single-error correction ----------------------------------------------

@dataclass(frozen=True)
class ClusterStats:
    n: int
    m: int
    degrees: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        if len(self.degrees) != self.n:
            raise ValueError(f"{len(self.degrees)} degrees for {self.n} pattern neurons")
        if self.n < 1 or self.m < 1 or min(self.degrees) < 1 or max(self.degrees) > self.m:
            raise ValueError("degrees must lie in [1, m]")

    @property
    def mean_degree(self) -> float:
        return float(np.mean(self.degrees))

    @classmethod
    def from_cluster(cls, cluster: Cluster) -> "ClusterStats":
        return cls(cluster.size, cluster.m, tuple(cluster.pattern_degrees))

    @classmethod
    def from_model(cls, model: NetworkModel) -> list["ClusterStats"]:
        return [cls.from_cluster(c) for c in model.clusters]


def _q1(o: np.ndarray, d: int, upsilon: float, phi: float) -> np.ndarray:
    """Pr(|o/d + u| >= phi): an uncorrupted neuron moves."""
    g = np.asarray(o, dtype=np.float64) / d
    if upsilon == 0.0:
        return (np.abs(g) >= phi - 1e-12).astype(np.float64)
    up = np.clip((upsilon - (phi - g)) / (2 * upsilon), 0.0, 1.0)
    down = np.clip((upsilon - (phi + g)) / (2 * upsilon), 0.0, 1.0)
    return np.minimum(up + down, 1.0)


def _q2(j: np.ndarray, d1: int, upsilon: float, phi: float) -> np.ndarray:
    """Pr((d1 - j)/d1 + u < phi): the corrupted neuron fails to move."""
    g = (d1 - np.asarray(j, dtype=np.float64)) / d1
    if upsilon == 0.0:
        return (g < phi - 1e-12).astype(np.float64)
    return np.clip((upsilon + phi - g) / (2 * upsilon), 0.0, 1.0)


def _q1_bar(d: int, share: float, upsilon: float, phi: float, pi1: float) -> float:
    """Average q1 over e ~ Bin(b_c, 1/2), b_c ~ Bin(b, 1 - pi1), b ~ Bin(d, share)."""
    k = np.arange(d + 1)
    b, bc, e = k[:, None, None], k[None, :, None], k[None, None, :]
    # scipy's pmf is zero where the count exceeds the number of draws
    w = binom.pmf(b, d, share) * binom.pmf(bc, b, 1.0 - pi1) * binom.pmf(e, bc, 0.5)
    return float(np.sum(w * _q1(2 * e - bc, d, upsilon, phi)))


def _q2_bar(d1: int, upsilon: float, phi: float, pi1: float) -> float:
    j = np.arange(d1 + 1)
    return float(np.dot(binom.pmf(j, d1, pi1), _q2(j, d1, upsilon, phi)))


def analytic_p1(stats: ClusterStats, upsilon: float, phi: float, pi1: float) -> tuple[float, float]:
    """Per-neuron first-round mistake probability P1 and P_c1 = (1 - P1)**n for one cluster.

    Both the corrupted and the uncorrupted neuron terms are averaged over the
    cluster's degree list.
    """
    if not 0.0 <= pi1 <= 1.0:
        raise ValueError("pi1 must lie in [0, 1]")
    share = min(1.0, stats.mean_degree / stats.m)
    degs, counts = np.unique(stats.degrees, return_counts=True)
    w = counts / counts.sum()
    q1 = sum(wi * _q1_bar(int(d), share, upsilon, phi, pi1) for d, wi in zip(degs, w))
    q2 = sum(wi * _q2_bar(int(d), upsilon, phi, pi1) for d, wi in zip(degs, w))
    n = stats.n
    p1 = q2 / n + (n - 1) / n * q1
    p1 = min(1.0, max(0.0, p1))
    return p1, (1.0 - p1) ** n


def mean_analytic_pc1(stats: Sequence[ClusterStats], upsilon: float, phi: float, pi1: float) -> float:
    return float(np.mean([analytic_p1(s, upsilon, phi, pi1)[1] for s in stats]))


def optimize_threshold_phi(upsilon: float, pi1: float, stats, phi_grid) -> tuple[float, np.ndarray]:
    """Grid-search the update threshold minimising P_e1 = 1 - P_c1.

    ``stats`` is one ClusterStats or a sequence of them (P_c1 is then
    averaged over clusters). Returns (phi*, P_e1 per grid point); ties go to
    the larger phi.
    """
    grid = np.asarray(phi_grid, dtype=np.float64)
    if grid.size == 0 or grid.min() <= 0 or grid.max() > 1:
        raise ValueError("phi grid must be non-empty and inside (0, 1]")
    if isinstance(stats, ClusterStats):
        stats = [stats]
    pe = np.array([1.0 - mean_analytic_pc1(stats, upsilon, phi, pi1) for phi in grid])
    best = pe.min()
    ties = np.flatnonzero(pe <= best + 1e-12)
    return float(grid[ties[np.argmax(grid[ties])]]), pe


# -- Monte-Carlo P_ci --------------------------------------------------------------

def binomial_halfwidth(p: float, trials: int) -> float:
    return Z95 * math.sqrt(max(p * (1.0 - p), 0.0) / trials)


@dataclass
class PciTable:
    """Rows of (upsilon, nu, i, trials, p_ci, ci_halfwidth); ``trials`` counts cluster attempts."""

    rows: list[tuple[float, float, int, int, float, float]] = field(default_factory=list)

    HEADER = ("upsilon", "nu", "i", "trials", "p_ci", "ci_halfwidth")

    def add(self, upsilon: float, nu: float, i: int, trials: int, p: float) -> None:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"P_ci estimate {p} outside [0, 1]")
        self.rows.append((float(upsilon), float(nu), int(i), int(trials), float(p),
                          binomial_halfwidth(p, trials)))

    def sorted(self) -> "PciTable":
        return PciTable(sorted(self.rows, key=lambda r: (r[2], r[0], r[1])))

    def lookup(self, upsilon: float, nu: float, i: int) -> tuple[float, float]:
        for u, v, j, _, p, h in self.rows:
            if j == i and u == upsilon and v == nu:
                return p, h
        raise KeyError((upsilon, nu, i))

    def pc_list(self, upsilon: float, nu: float) -> list[float]:
        found = sorted((j, p) for u, v, j, _, p, _ in self.rows if u == upsilon and v == nu)
        if [j for j, _ in found] != list(range(1, len(found) + 1)):
            raise ValueError("table does not hold i = 1..k consecutively for this noise point")
        return [p for _, p in found]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.HEADER)
        for row in self.rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()


def estimate_pci(model: NetworkModel, i: int, noise: NoiseSpec, thresholds: Thresholds,
                 trials: int, rng: np.random.Generator, *, patterns: np.ndarray,
                 t_max: int = DEFAULT_T_INNER) -> tuple[float, int]:
    """Corrupt ``i`` members of each cluster by +-1 and run intra-cluster correction.

    Each cluster gets ``trials`` attempts on rows of ``patterns`` (stored
    patterns, cycled). Returns (success rate averaged over clusters, total attempts).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    min_size = min(c.size for c in model.clusters)
    if not 1 <= i <= min_size:
        raise ValueError(f"i must lie in [1, {min_size}]")
    pats = np.ascontiguousarray(np.atleast_2d(patterns), dtype=np.int64)
    if pats.shape[1] != model.n:
        raise ValueError("pattern length does not match the model")
    arrays = model.arrays.as_tuple()
    seeds = rng.integers(0, 2**32 - 1, size=model.L)
    wins = 0
    for l in range(model.L):
        wins += K.pci_trials(l, pats, i, thresholds.psi, thresholds.phi, noise.nu, noise.upsilon,
                             model.Q, t_max, trials, int(seeds[l]), *arrays)
    total = trials * model.L
    return wins / total, total


# -- density evolution -------------------------------------------------------------

def _check_pc(pc) -> np.ndarray:
    pc = np.asarray(pc, dtype=np.float64)
    if pc.ndim != 1 or pc.size == 0 or pc.min() < 0 or pc.max() > 1:
        raise ValueError("pc must be a non-empty list of probabilities")
    return pc


def _pi(z, rho: DegreeDistribution, pc: np.ndarray):
    z = np.asarray(z, dtype=np.float64)
    total = np.zeros_like(z)
    for i, p in enumerate(pc, start=1):
        if p == 0.0:
            continue
        total = total + p * z ** (i - 1) / math.factorial(i - 1) * rho.derivative(1.0 - z, i - 1)
    return 1.0 - total


def de_recursion_step(z, epsilon: float, lam: DegreeDistribution, rho: DegreeDistribution, pc):
    """One update of the average pattern-neuron error probability."""
    pc = _check_pc(pc)
    return epsilon * lam(_pi(z, rho, pc))


@dataclass
class DeResult:
    epsilon: float
    trajectory: np.ndarray
    tol: float

    @property
    def final(self) -> float:
        return float(self.trajectory[-1])

    @property
    def success(self) -> bool:
        return self.final < self.tol

    def rows(self) -> list[tuple[float, int, float]]:
        return [(self.epsilon, t, float(z)) for t, z in enumerate(self.trajectory)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("epsilon", "t", "z_t"))
        for e, t, z in self.rows():
            w.writerow((repr(e), t, repr(z)))
        return buf.getvalue()


def de_trajectory(epsilon: float, lam: DegreeDistribution, rho: DegreeDistribution, pc,
                  tol: float = 1e-6, max_iter: int = 10000) -> DeResult:
    """Iterate from z(0) = epsilon until below ``tol``, stalled, or ``max_iter`` steps."""
    pc = _check_pc(pc)
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    traj = [float(epsilon)]
    for _ in range(max_iter):
        z = traj[-1]
        if z < tol:
            break
        nxt = float(de_recursion_step(z, epsilon, lam, rho, pc))
        traj.append(nxt)
        if abs(nxt - z) <= 1e-15:
            break
    return DeResult(float(epsilon), np.array(traj), tol)


def de_condition_holds(epsilon: float, lam: DegreeDistribution, rho: DegreeDistribution, pc,
                       tol: float = 1e-6, grid_size: int = 10_000) -> bool:
    """epsilon * lam(Pi(z)) < z on a uniform grid of [tol, epsilon]."""
    if epsilon <= tol:
        return True
    z = np.linspace(tol, epsilon, grid_size)
    return bool(np.all(de_recursion_step(z, epsilon, lam, rho, pc) < z))


def de_threshold(lam: DegreeDistribution, rho: DegreeDistribution, pc,
                 tol: float = 1e-6, grid_size: int = 10_000) -> float:
    """Largest external error rate for which the recursion is driven to zero, found by bisection."""
    pc = _check_pc(pc)
    if not lam.coeffs or not rho.coeffs:
        raise ValueError("degree distributions must be non-empty")
    if de_condition_holds(1.0, lam, rho, pc, tol, grid_size):
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if de_condition_holds(mid, lam, rho, pc, tol, grid_size):
            lo = mid
        else:
            hi = mid
    return 0.0 if lo <= tol else lo
