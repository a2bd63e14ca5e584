"""Core domain types for clustered associative memories with noisy neurons.

A network is a list of overlapping clusters. Each cluster owns a dense
constraint matrix ``W`` (rows are constraint neurons, columns are the member
pattern neurons in ``member_ids`` order). Stored patterns satisfy
``W @ x[member_ids] == 0`` in every cluster.
"""

from __future__ import annotations

import hashlib
import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

SYNDROME_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Cluster:
    index: int
    member_ids: np.ndarray
    W: np.ndarray

    def __post_init__(self) -> None:
        members = _frozen(np.asarray(self.member_ids, dtype=np.int64).copy())
        W = _frozen(np.asarray(self.W, dtype=np.float64).copy())
        object.__setattr__(self, "member_ids", members)
        object.__setattr__(self, "W", W)
        if W.ndim != 2 or W.shape[1] != members.size:
            raise ValueError(
                f"cluster {self.index}: W has shape {W.shape}, expected (m, {members.size})"
            )
        if W.shape[0] < 1 or members.size < 1:
            raise ValueError(f"cluster {self.index}: empty cluster")
        if np.unique(members).size != members.size:
            raise ValueError(f"cluster {self.index}: duplicate member ids")
        if np.any(~W.any(axis=1)):
            raise ValueError(f"cluster {self.index}: all-zero constraint row")
        if np.any(self.pattern_degrees < 1):
            raise ValueError(f"cluster {self.index}: pattern neuron without constraints")

    @property
    def m(self) -> int:
        return self.W.shape[0]

    @property
    def size(self) -> int:
        return self.member_ids.size

    @cached_property
    def pattern_degrees(self) -> np.ndarray:
        return _frozen(np.count_nonzero(self.W, axis=0).astype(np.int64))

    def syndrome(self, x: np.ndarray) -> np.ndarray:
        """Noiseless constraint inputs ``W @ x[members]`` for a full-length state."""
        return self.W @ np.asarray(x, dtype=np.float64)[self.member_ids]


@dataclass(frozen=True, eq=False)
class NetworkModel:
    n: int
    Q: int
    clusters: tuple[Cluster, ...]
    S: int = 1
    eta: float = field(default=math.nan)

    def __post_init__(self) -> None:
        object.__setattr__(self, "clusters", tuple(self.clusters))
        if self.Q < 2:
            raise ValueError("alphabet size Q must be at least 2")
        if self.S < 1:
            raise ValueError("external error amplitude S must be >= 1")
        covered = np.zeros(self.n, dtype=bool)
        for c in self.clusters:
            if c.member_ids.min() < 0 or c.member_ids.max() >= self.n:
                raise ValueError(f"cluster {c.index}: member id out of range")
            covered[c.member_ids] = True
        if not covered.all():
            missing = np.flatnonzero(~covered)
            raise ValueError(f"pattern neurons not in any cluster: {missing[:10].tolist()}")
        eta = self.min_weight()
        if math.isnan(self.eta):
            object.__setattr__(self, "eta", eta)
        elif eta < self.eta - 1e-15:
            raise ValueError(f"nonzero weight {eta} below recorded minimum {self.eta}")

    @property
    def L(self) -> int:
        return len(self.clusters)

    def min_weight(self) -> float:
        return float(min(np.abs(c.W[c.W != 0]).min() for c in self.clusters))

    def membership_degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for c in self.clusters:
            deg[c.member_ids] += 1
        return deg

    def max_syndrome(self, x: np.ndarray) -> float:
        return max(float(np.abs(c.syndrome(x)).max()) for c in self.clusters)

    def is_valid_pattern(self, x: np.ndarray, tol: float = SYNDROME_TOL) -> bool:
        x = np.asarray(x)
        in_range = bool(np.all((x >= 0) & (x <= self.Q - 1)))
        return in_range and self.max_syndrome(x) <= tol

    @cached_property
    def arrays(self) -> "ModelArrays":
        return ModelArrays.from_model(self)

    # -- serialization -------------------------------------------------
    def dumps(self) -> str:
        buf = io.StringIO()
        buf.write(f"{self.n} {self.L} {self.Q} {self.S} {self.eta!r}\n")
        for c in self.clusters:
            buf.write(f"{c.m} {c.size}\n")
            buf.write(" ".join(str(int(i)) for i in c.member_ids) + "\n")
            for row in c.W:
                buf.write(" ".join(repr(float(w)) for w in row) + "\n")
        return buf.getvalue()

    @classmethod
    def loads(cls, text: str) -> "NetworkModel":
        lines = iter(ln for ln in text.splitlines() if ln.strip())
        head = next(lines).split()
        if len(head) != 5:
            raise ValueError("model header must be 'n L Q S eta'")
        n, L, Q, S = (int(v) for v in head[:4])
        eta = float(head[4])
        clusters = []
        for idx in range(L):
            m, size = (int(v) for v in next(lines).split())
            members = np.array([int(v) for v in next(lines).split()], dtype=np.int64)
            if members.size != size:
                raise ValueError(f"cluster {idx}: expected {size} member ids")
            W = np.array([[float(v) for v in next(lines).split()] for _ in range(m)])
            clusters.append(Cluster(idx, members, W.reshape(m, size)))
        return cls(n=n, Q=Q, clusters=tuple(clusters), S=S, eta=eta)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), newline="\n")

    @classmethod
    def load(cls, path: str | Path) -> "NetworkModel":
        return cls.loads(Path(path).read_text())

    def digest(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()


@dataclass(frozen=True)
class ModelArrays:
    """Flat CSR layout of all clusters, consumed by the compiled kernels."""

    mem_ptr: np.ndarray  # (L+1,) offsets into mem_idx / deg
    mem_idx: np.ndarray  # global pattern-neuron id of each cluster slot
    deg: np.ndarray  # per-slot pattern degree inside its cluster
    row_ptr: np.ndarray  # (L+1,) offsets into the global row list
    nz_ptr: np.ndarray  # (R+1,) offsets into nz_col / nz_val
    nz_col: np.ndarray  # local (within-cluster) column of each nonzero
    nz_val: np.ndarray

    @classmethod
    def from_model(cls, model: NetworkModel) -> "ModelArrays":
        mem_ptr, row_ptr, nz_ptr = [0], [0], [0]
        mem_idx, deg, nz_col, nz_val = [], [], [], []
        for c in model.clusters:
            mem_idx.append(c.member_ids)
            deg.append(c.pattern_degrees)
            mem_ptr.append(mem_ptr[-1] + c.size)
            for row in c.W:
                cols = np.flatnonzero(row)
                nz_col.append(cols)
                nz_val.append(row[cols])
                nz_ptr.append(nz_ptr[-1] + cols.size)
            row_ptr.append(row_ptr[-1] + c.m)
        return cls(
            mem_ptr=np.array(mem_ptr, dtype=np.int64),
            mem_idx=np.concatenate(mem_idx).astype(np.int64),
            deg=np.concatenate(deg).astype(np.int64),
            row_ptr=np.array(row_ptr, dtype=np.int64),
            nz_ptr=np.array(nz_ptr, dtype=np.int64),
            nz_col=np.concatenate(nz_col).astype(np.int64),
            nz_val=np.concatenate(nz_val).astype(np.float64),
        )

    def as_tuple(self) -> tuple[np.ndarray, ...]:
        return (self.mem_ptr, self.mem_idx, self.deg, self.row_ptr,
                self.nz_ptr, self.nz_col, self.nz_val)


@dataclass(frozen=True)
class NoiseSpec:
    upsilon: float = 0.0
    nu: float = 0.0
    epsilon: float = 0.0
    S: int = 1

    def __post_init__(self) -> None:
        if not 0.0 <= self.upsilon < 1.0:
            raise ValueError(f"upsilon must lie in [0, 1), got {self.upsilon}")
        if not 0.0 <= self.nu < 1.0:
            raise ValueError(f"nu must lie in [0, 1), got {self.nu}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if int(self.S) != self.S or self.S < 1:
            raise ValueError(f"S must be a positive integer, got {self.S}")


@dataclass(frozen=True)
class Thresholds:
    psi: float
    phi: float
    eta: float = math.inf

    def __post_init__(self) -> None:
        if self.psi <= 0 or self.phi <= 0:
            raise ValueError("thresholds psi and phi must be positive")

    def is_safe(self, noise: NoiseSpec) -> bool:
        """Bounded noise can never trigger a constraint or a pattern update on its own."""
        return self.psi > noise.nu and self.phi > noise.upsilon and self.eta >= self.psi


@dataclass
class RecallOutcome:
    final_state: np.ndarray
    symbol_errors: int
    pattern_error: bool
    outer_iterations: int
    declared_failure: bool
    per_cluster_converged: np.ndarray
    satisfied_counts: np.ndarray | None = None


class DegreeDistribution:
    """Edge-perspective degree polynomial ``sum_j c_j z**(j-1)``."""

    def __init__(self, coeffs: Mapping[int, float]):
        items = sorted((int(d), float(c)) for d, c in coeffs.items() if c != 0.0)
        if not items:
            raise ValueError("degree distribution is empty")
        if any(d < 1 for d, _ in items) or any(c < 0 for _, c in items):
            raise ValueError("degrees must be >= 1 and coefficients non-negative")
        total = math.fsum(c for _, c in items)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"coefficients sum to {total}, not 1")
        self.coeffs = dict(items)
        # ascending power coefficients of z
        self._poly = np.zeros(items[-1][0])
        for d, c in items:
            self._poly[d - 1] = c

    @classmethod
    def from_node_degrees(cls, degrees: Iterable[int]) -> "DegreeDistribution":
        """Fraction of edges attached to nodes of each degree."""
        degrees = np.asarray(list(degrees), dtype=np.int64)
        degrees = degrees[degrees > 0]
        values, counts = np.unique(degrees, return_counts=True)
        edges = values * counts
        total = int(edges.sum())
        return cls({int(d): e / total for d, e in zip(values, edges)})

    @classmethod
    def regular(cls, degree: int) -> "DegreeDistribution":
        return cls({degree: 1.0})

    @property
    def max_degree(self) -> int:
        return self._poly.size

    def mean_node_degree(self) -> float:
        """Average degree from the node perspective, ``1 / sum_j c_j / j``."""
        return 1.0 / math.fsum(c / d for d, c in self.coeffs.items())

    def derivative(self, z, order: int = 1):
        """``order``-th derivative in z; identically zero once order >= max degree."""
        poly = np.polynomial.polynomial.polyder(self._poly, order) if order else self._poly
        if poly.size == 0:
            return np.zeros_like(np.asarray(z, dtype=np.float64))
        return np.polynomial.polynomial.polyval(z, poly)

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self._poly)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DegreeDistribution) and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        terms = ", ".join(f"{d}: {c:.6g}" for d, c in self.coeffs.items())
        return f"DegreeDistribution({{{terms}}})"


@dataclass(frozen=True, eq=False)
class ContractedGraph:
    adjacency: np.ndarray  # (L, n) 0/1
    lam: DegreeDistribution  # pattern side
    rho: DegreeDistribution  # cluster side
