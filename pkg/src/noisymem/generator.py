"""Synthetic clustered networks with a known integer pattern lattice.

Patterns live on a ring of ``n`` neurons. A fraction ``ratio`` of them are
free ("info") neurons; every other neuron holds the sum of a few nearby info
neurons. Clusters are overlapping arcs of the ring, and a cluster constrains
exactly those sum-neurons whose inputs also fall inside its arc. Constraint
rows are drawn sparse over the sum-neurons and completed on the info
neurons so that every pattern has zero syndrome, which keeps every nonzero
weight a multiple of the smallest allowed magnitude.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .model import Cluster, ContractedGraph, DegreeDistribution, NetworkModel, NoiseSpec

log = logging.getLogger(__name__)


class InfeasibleSpec(ValueError):
    """The requested network cannot be built; relax the generator spec."""


class LearningDidNotConverge(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class GeneratorSpec:
    n: int = 400
    L: int = 50
    mean_cluster_size: float = 40.0
    mean_constraints: int = 20
    ratio: float = 0.25
    Q: int = 8
    mean_membership: float | None = None
    density: float = 1.0
    parity_degree: int = 3
    min_dependents: int = 3
    locality: int | None = None
    coefficients: tuple[int, ...] = (0, 1)
    weight_values: tuple[float, ...] = (-1.0, -0.7, -0.5, 0.5, 0.7, 1.0)
    psi: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("mean_cluster_size", "ratio", "density"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.mean_membership is not None:
            object.__setattr__(self, "mean_membership", float(self.mean_membership))
        object.__setattr__(self, "coefficients", tuple(int(c) for c in self.coefficients))
        object.__setattr__(self, "weight_values", tuple(float(w) for w in self.weight_values))
        if not 0.0 < self.ratio < 1.0:
            raise ValueError("ratio must lie strictly between 0 and 1")
        if self.n < 2 or self.L < 1 or self.mean_constraints < 1:
            raise ValueError("n >= 2, L >= 1 and mean_constraints >= 1 are required")
        if self.mean_cluster_size * self.L < self.n:
            raise ValueError("mean_cluster_size * L must be at least n to cover every neuron")
        if not 0.0 < self.density <= 1.0:
            raise ValueError("density must lie in (0, 1]")
        if self.parity_degree < 1 or self.min_dependents < 1:
            raise ValueError("parity_degree and min_dependents must be >= 1")
        if len(set(self.coefficients)) < 2 or min(self.coefficients) < 0:
            raise ValueError("need at least two distinct non-negative coefficients")
        if not self.weight_values or any(w == 0 for w in self.weight_values):
            raise ValueError("weight_values must be non-empty and nonzero")

    @property
    def k(self) -> int:
        return int(math.floor(self.ratio * self.n))


@dataclass(frozen=True, eq=False)
class PatternBasis:
    """Integer generator matrix: patterns are ``generator @ c`` with c over ``coefficients``."""

    generator: np.ndarray  # (n, k) non-negative integers
    coefficients: tuple[int, ...]
    info_ids: np.ndarray = field(default=None)

    @property
    def k(self) -> int:
        return self.generator.shape[1]

    @property
    def count(self) -> int:
        """Number of distinct representable patterns (the generator is systematic)."""
        return len(set(self.coefficients)) ** self.k

    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.generator.astype(np.float64)))

    def pattern(self, coeffs: np.ndarray) -> np.ndarray:
        return self.generator @ np.asarray(coeffs, dtype=np.int64)

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        alphabet = np.asarray(self.coefficients, dtype=np.int64)
        shape = (self.k,) if size is None else (size, self.k)
        c = alphabet[rng.integers(0, alphabet.size, size=shape)]
        return c @ self.generator.T


# -- construction ----------------------------------------------------------

def _ring_dist(a, b, n):
    d = np.abs(np.asarray(a) - np.asarray(b)) % n
    return np.minimum(d, n - d)


def _arc_contains(start: int, width: int, ids: np.ndarray, n: int) -> bool:
    return bool(np.all((ids - start) % n < width))


def _assign_feeders(spec: GeneratorSpec, info: np.ndarray, parity: np.ndarray,
                    locality: int, rng: np.random.Generator) -> dict[int, np.ndarray]:
    """Wire each free neuron into several nearby sum-neurons, balancing their fan-in."""
    n = spec.n
    fanout = max(spec.min_dependents,
                 int(round(spec.parity_degree * parity.size / info.size)))
    cap = (spec.Q - 1) // max(spec.coefficients)
    if cap * parity.size < fanout * info.size:
        raise InfeasibleSpec(
            f"alphabet top {spec.Q - 1} leaves room for {cap * parity.size} feeder links, "
            f"{fanout * info.size} needed; raise Q or lower ratio")
    fan_in = {int(p): [] for p in parity}
    for i in rng.permutation(info):
        open_ = np.array([p for p in parity if len(fan_in[int(p)]) < cap], dtype=np.int64)
        near = open_[_ring_dist(open_, i, n) <= locality]
        if near.size < fanout:
            near = open_[np.argsort(_ring_dist(open_, i, n), kind="stable")[:fanout]]
        load = np.array([len(fan_in[int(p)]) for p in near]) + rng.random(near.size)
        for p in near[np.argsort(load)[:fanout]]:
            fan_in[int(p)].append(int(i))
    for p in parity:
        if not fan_in[int(p)]:
            fan_in[int(p)].append(int(info[np.argmin(_ring_dist(info, p, n))]))
    return {p: np.array(sorted(f), dtype=np.int64) for p, f in fan_in.items()}


def _arc_span(p: int, f: np.ndarray, n: int) -> tuple[int, int]:
    """Smallest arc (start, width) covering ``p`` and its feeders."""
    pts = np.sort(np.unique(np.append(f, p)) % n)
    gaps = np.diff(np.append(pts, pts[0] + n))
    j = int(np.argmax(gaps))
    start = int(pts[(j + 1) % pts.size])
    width = int(n - gaps[j] + 1)
    return start, width


def _arcs(spec: GeneratorSpec, width: int, offsets: np.ndarray) -> list[list[int]]:
    n, L = spec.n, spec.L
    if L == 1 or width >= n:
        return [[0, n] for _ in range(L)]
    stride = n / L
    return [[int(round(l * stride + offsets[l])) % n, width] for l in range(L)]


def _spans(feeders, n):
    ps = np.fromiter(feeders, dtype=np.int64)
    spans = np.array([_arc_span(p, feeders[p], n) for p in ps], dtype=np.int64)
    return ps, spans


def _cluster_parities(start, width, ps, spans, feeders, min_dependents, n):
    """Sum-neurons constrained by one arc, pruned so every free member feeds enough of them."""
    if width >= n:
        inside = ps
    else:
        inside = ps[(spans[:, 0] - start) % n + spans[:, 1] <= width]
    keep = [int(p) for p in inside]
    while True:
        count: dict[int, int] = {}
        for p in keep:
            for i in feeders[p]:
                count[int(i)] = count.get(int(i), 0) + 1
        pruned = [p for p in keep if all(count[int(i)] >= min_dependents for i in feeders[p])]
        if len(pruned) == len(keep):
            return keep
        keep = pruned


def _memberships(spec, arcs, feeders, spans):
    ps, sp = spans
    return [_cluster_parities(start, width, ps, sp, feeders, spec.min_dependents, spec.n)
            for start, width in arcs]


def _arc_union(a, b, n):
    """Shortest arc containing arcs ``a`` and ``b`` (each ``[start, width]``)."""
    w1 = max(a[1], (b[0] - a[0]) % n + b[1])
    w2 = max(b[1], (a[0] - b[0]) % n + a[1])
    return [a[0], min(w1, n)] if w1 <= w2 else [b[0], min(w2, n)]


def _widen(arc, n):
    return [(arc[0] - 1) % n, min(n, arc[1] + 2)]


def _repair_coverage(spec, arcs, feeders, parity_of, spans):
    """Widen arcs until every sum-neuron is constrained somewhere and no arc is empty.

    The cheapest arc that takes a missing neuron's span is tried first; if
    pruning still drops the neuron, arcs are widened one step at a time.
    """
    n = spec.n
    ps, sp = spans

    def group(arc):
        return _cluster_parities(*arc, ps, sp, feeders, spec.min_dependents, n)

    covered = {p for g in parity_of for p in g}
    for p, span in zip(ps, sp):
        p = int(p)
        if p in covered:
            continue
        grown = [_arc_union(arc, list(span), n) for arc in arcs]
        order = sorted(range(len(arcs)), key=lambda l: grown[l][1] - arcs[l][1])
        placed = False
        for l in order:
            g = group(grown[l])
            if p in g:
                arcs[l], parity_of[l], placed = grown[l], g, True
                break
        for l in order if not placed else ():
            arc = grown[l]
            while arc[1] < n:
                arc = _widen(arc, n)
                g = group(arc)
                if p in g:
                    arcs[l], parity_of[l], placed = arc, g, True
                    break
            if placed:
                break
        if not placed:
            raise InfeasibleSpec(f"neuron {p} cannot be placed in any cluster")
        covered.update(parity_of[l])
    for l in range(len(arcs)):
        while not parity_of[l] and arcs[l][1] < n:
            arcs[l] = _widen(arcs[l], n)
            parity_of[l] = group(arcs[l])
    return parity_of


def _confusable(W: np.ndarray) -> list[tuple[int, int]]:
    """Column pairs (j, k) where an error on j sends full-strength feedback to k too.

    That happens when k's support lies inside j's and their signs agree (or
    all disagree) there, so sign-valued messages cannot tell them apart.
    """
    S = np.sign(W).astype(np.int64)
    overlap = np.abs(S.T @ S)
    deg = np.count_nonzero(S, axis=0)
    np.fill_diagonal(overlap, -1)
    return [(int(j), int(k)) for j, k in zip(*np.nonzero(overlap == deg[None, :]))]


def _cluster_weights(parity: list[int], feeders: dict[int, np.ndarray], m: int,
                     spec: GeneratorSpec, rng: np.random.Generator):
    info = sorted({int(i) for p in parity for i in feeders[p]})
    col_of = {i: j for j, i in enumerate(info)}
    A = np.zeros((len(parity), len(info)))
    for r, p in enumerate(parity):
        for i in feeders[p]:
            A[r, col_of[int(i)]] = 1.0
    values = np.asarray(spec.weight_values)
    eta = float(np.abs(values).min())

    def draw_row():
        # info entries are sums of sum-neuron weights; redraw until none is a
        # nonzero value below the smallest allowed magnitude
        for _ in range(1000):
            nnz = max(1, rng.binomial(len(parity), spec.density))
            row = np.zeros(len(parity))
            row[rng.choice(len(parity), size=nnz, replace=False)] = rng.choice(values, size=nnz)
            wi = np.round(-row @ A, 12)
            if not np.any((wi != 0) & (np.abs(wi) < eta - 1e-12)):
                return row, wi
        raise InfeasibleSpec("cannot keep derived weights away from zero; use coarser weight_values")

    rows = [draw_row() for _ in range(m)]
    WP = np.array([r for r, _ in rows])
    WI = np.array([w for _, w in rows])
    for _ in range(10 * (len(parity) + len(info)) + 100):
        dead_p = np.flatnonzero(~WP.any(axis=0))
        dead_i = np.flatnonzero(~WI.any(axis=0))
        if dead_p.size == 0 and dead_i.size == 0:
            break
        r = rng.integers(m)
        WP[r], WI[r] = draw_row()
    else:
        raise InfeasibleSpec("could not give every pattern neuron a nonzero constraint weight")
    # best effort: redraw rows so a lone error's feedback singles out its neuron
    bad = _confusable(np.hstack([WP, WI]))
    for _ in range(20 * m):
        if not bad:
            break
        k = bad[rng.integers(len(bad))][1]
        r = rng.choice(np.flatnonzero(np.hstack([WP, WI])[:, k]))
        old = WP[r].copy(), WI[r].copy()
        WP[r], WI[r] = draw_row()
        trial = _confusable(np.hstack([WP, WI]))
        if WP.any(axis=0).all() and WI.any(axis=0).all() and len(trial) <= len(bad):
            bad = trial
        else:
            WP[r], WI[r] = old
    members = np.array(parity + info, dtype=np.int64)
    W = np.hstack([WP, WI])
    order = np.argsort(members, kind="stable")
    return members[order], W[:, order]


def construct_subspace_model(spec: GeneratorSpec) -> tuple[NetworkModel, PatternBasis]:
    """Build a clustered network and the integer basis of the patterns it stores."""
    n, k = spec.n, spec.k
    if k < 1 or k >= n:
        raise InfeasibleSpec(f"ratio {spec.ratio} gives k={k} free neurons out of {n}")
    rng = np.random.default_rng(spec.seed)
    info = np.sort(rng.choice(n, size=k, replace=False))
    is_info = np.zeros(n, dtype=bool)
    is_info[info] = True
    parity = np.flatnonzero(~is_info)

    stride = n / spec.L
    if spec.locality is not None:
        locality = spec.locality
    else:
        locality = max(1, int(round(min(spec.mean_cluster_size, n) / 5)))
    feeders = _assign_feeders(spec, info, parity, locality, rng)
    max_sum = max(f.size for f in feeders.values()) * max(spec.coefficients)
    if max_sum > spec.Q - 1:
        raise InfeasibleSpec(
            f"pattern entries reach {max_sum}, beyond alphabet top {spec.Q - 1}"
        )

    spans = _spans(feeders, n)
    offsets = rng.uniform(-stride / 4, stride / 4, size=spec.L)
    target = spec.mean_cluster_size
    if spec.mean_membership is not None:
        target = spec.mean_membership * n / spec.L
    best = None
    for width in range(max(2, int(target) - locality), min(n, int(target) + 4 * locality + 2) + 1):
        arcs = _arcs(spec, width, offsets)
        parity_of = _memberships(spec, arcs, feeders, spans)
        sizes = [len(ps) + len({int(i) for p in ps for i in feeders[p]}) for ps in parity_of]
        err = abs(np.mean(sizes) - target)
        if best is None or err < best[0]:
            best = (err, arcs, parity_of)
        if spec.L == 1:
            break
    _, arcs, parity_of = best
    parity_of = _repair_coverage(spec, arcs, feeders, parity_of, spans)
    if any(len(ps) == 0 for ps in parity_of):
        raise InfeasibleSpec("some cluster arc holds no complete constraint; increase mean_cluster_size")

    clusters = []
    for l, ps in enumerate(parity_of):
        members, W = _cluster_weights(ps, feeders, spec.mean_constraints, spec, rng)
        clusters.append(Cluster(l, members, W))
    model = NetworkModel(n=n, Q=spec.Q, clusters=tuple(clusters), S=1)
    if spec.psi is not None and model.eta < spec.psi:
        raise InfeasibleSpec(f"minimum weight {model.eta} is below psi={spec.psi}")

    G = np.zeros((n, k), dtype=np.int64)
    G[info, np.arange(k)] = 1
    col = {int(i): j for j, i in enumerate(info)}
    for p, f in feeders.items():
        for i in f:
            G[p, col[int(i)]] = 1
    basis = PatternBasis(G, spec.coefficients, info)
    log.debug("built model: n=%d L=%d mean size %.1f", n, spec.L,
              np.mean([c.size for c in clusters]))
    return model, basis


# -- contracted graph ----------------------------------------------------------

def contract_and_degree_distributions(model: NetworkModel) -> ContractedGraph:
    adj = np.zeros((model.L, model.n), dtype=np.int8)
    for l, c in enumerate(model.clusters):
        adj[l, c.member_ids] = 1
    lam = DegreeDistribution.from_node_degrees(adj.sum(axis=0))
    rho = DegreeDistribution.from_node_degrees(adj.sum(axis=1))
    return ContractedGraph(adjacency=adj, lam=lam, rho=rho)


# -- error sampling ------------------------------------------------------------

def sample_external_error(n: int, noise: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    hit = rng.random(n) < noise.epsilon
    sign = np.where(rng.random(n) < 0.5, -1, 1)
    if noise.S == 1:
        mag = np.ones(n, dtype=np.int64)
    else:
        mag = rng.integers(1, noise.S + 1, size=n)
    return np.where(hit, sign * mag, 0).astype(np.int64)


def corrupt(pattern: np.ndarray, error: np.ndarray, Q: int) -> np.ndarray:
    return np.clip(np.asarray(pattern) + error, 0, Q - 1).astype(np.int64)


# -- optional learning path ----------------------------------------------------------

def _null_projector(X: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the null space of ``X`` (rows are patterns)."""
    _, sv, vt = np.linalg.svd(X, full_matrices=True)
    rank = int(np.sum(sv > sv.max() * max(X.shape) * 1e-12)) if sv.size else 0
    N = vt[rank:]
    return N.T @ N


def learn_dual_vectors(patterns: np.ndarray, m: int, *, sparsity: float = 0.0,
                       step: float = 1.0, max_iter: int = 20000, tol: float = 1e-8,
                       eta: float | None = None, rng: np.random.Generator | None = None,
                       check_every: int = 200) -> np.ndarray:
    """Learn ``m`` sparse rows orthogonal to every training subpattern.

    Each step picks one pattern and removes (a ``step`` fraction of) each
    row's projection onto it, then soft-thresholds by ``sparsity * step``.
    With a penalty, the iteration stops after half the budget and each row
    is projected onto the null space of the patterns restricted to its
    support, so surviving zeros stay exact; a support that admits no null
    vector falls back to the full null space.
    """
    X = np.atleast_2d(np.asarray(patterns, dtype=np.float64))
    if X.shape[0] < 1:
        raise ValueError("need at least one training pattern")
    if step <= 0 or max_iter < 1 or tol <= 0 or sparsity < 0:
        raise ValueError("step, max_iter, tol must be positive and sparsity non-negative")
    rng = rng or np.random.default_rng()
    N, d = X.shape
    norms2 = np.einsum("ij,ij->i", X, X)
    live = norms2 > 0
    if not live.any():
        W = rng.standard_normal((m, d))
        return W / np.abs(W).max(axis=1, keepdims=True)

    def fresh(rows):
        w = rng.standard_normal((rows, d))
        return w / np.linalg.norm(w, axis=1, keepdims=True)

    W = fresh(m)
    budget = max_iter // 2 if sparsity > 0 else max_iter
    scale = np.sqrt(norms2.max())
    for it in range(budget):
        x = X[rng.choice(np.flatnonzero(live))]
        W -= step * (W @ x / (x @ x))[:, None] * x
        if sparsity > 0:
            W = np.sign(W) * np.maximum(np.abs(W) - step * sparsity, 0.0)
        norms = np.linalg.norm(W, axis=1)
        dead = norms < 1e-12
        if dead.any():
            W[dead] = fresh(int(dead.sum()))
            norms[dead] = 1.0
        W /= norms[:, None]
        if sparsity == 0 and ((it + 1) % check_every == 0 or it == budget - 1):
            if float(np.abs(X @ W.T).max()) / scale <= tol:
                break
    if sparsity > 0:
        full = _null_projector(X)
        for r in range(m):
            support = np.abs(W[r]) > 1e-9
            w = np.zeros(d)
            if support.any():
                w[support] = _null_projector(X[:, support]) @ W[r, support]
            if np.linalg.norm(w) < 1e-9:
                w = full @ W[r]
            if np.linalg.norm(w) < 1e-9:
                w = full @ fresh(1)[0]
            W[r] = w / max(np.linalg.norm(w), 1e-300)
    W[np.abs(W) < 1e-12] = 0.0
    if np.any(~W.any(axis=1)):
        raise LearningDidNotConverge("a learned row vanished: the patterns span the whole space", 1.0)
    W = W / np.abs(W).max(axis=1, keepdims=True)
    if eta is not None:
        for r in range(m):
            nz = np.abs(W[r][W[r] != 0])
            if nz.min() < eta:
                W[r] *= eta / nz.min()
    residual = float(np.abs(X @ W.T).max())
    if residual > tol * max(1.0, np.abs(W).max()) * scale:
        raise LearningDidNotConverge(
            f"dual vectors not orthogonal after {max_iter} iterations (residual {residual:.3g})",
            residual,
        )
    return W
