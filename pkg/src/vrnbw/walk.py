"""Simulation of vertex-reinforced non-backtracking random walks.

The walk lives on a finite graph without loops; at each step it moves to a
neighbor of the current vertex, never the vertex it just came from, with
probability proportional to W(Z(k)) = (1 + Z(k))^alpha where Z(k) counts the
visits to k so far.  On the complete graph this is exactly the edge-chain
driven by the occupation measure: the weight rule and the occupation-measure
kernel give identical rows because (1 + Z_n(k)) is proportional to v_n(k).

Bookkeeping is exact: states store integer visit counts, and the occupation
measure v_n = (1 + Z_n) / (n + N) is derived on demand, so the structural
bound max(Z_n) <= (n + 2)/3 (no vertex can be visited twice within three
consecutive steps) is checked in integer arithmetic at every step.

The inner loop is JIT-compiled; Python-level ``step`` calls the same kernel
with a single uniform, so single-stepping and bulk runs are bit-identical.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numba import njit

from .kernels import build_vrnbw_kernel, edge_to_vertex_matrix
from .measures import Sigma, uniform_on

__all__ = [
    "GraphTopology",
    "complete_graph",
    "cycle_graph",
    "graph_from_edges",
    "ReinforcementScheme",
    "vertex_scheme",
    "WalkState",
    "WalkConfigurationError",
    "DeadEndError",
    "init_walk",
    "occupation",
    "step",
    "next_step_distribution",
    "WalkSnapshot",
    "TrajectorySummary",
    "run",
    "detect_support",
    "PathBound",
    "first_loop_probability",
    "path_formation_lower_bound",
    "monte_carlo_path_formation",
    "LocalizationRun",
    "monte_carlo_localization",
    "run_seed_sequence",
]


class WalkConfigurationError(ValueError):
    pass


class DeadEndError(RuntimeError):
    pass


@dataclass(frozen=True)
class GraphTopology:
    """Finite simple graph; adjacency is symmetric and loop-free."""

    n: int
    neighbors: tuple[tuple[int, ...], ...]
    complete: bool = False

    def degree(self, i: int) -> int:
        return len(self.neighbors[i])

    @property
    def min_degree(self) -> int:
        return min(len(nb) for nb in self.neighbors)

    def adjacency_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Padded neighbor table and degree vector for the JIT kernels."""
        deg = np.array([len(nb) for nb in self.neighbors], dtype=np.int64)
        adj = np.full((self.n, int(deg.max())), -1, dtype=np.int64)
        for i, nb in enumerate(self.neighbors):
            adj[i, : len(nb)] = nb
        return adj, deg


def complete_graph(n: int) -> GraphTopology:
    if n < 2:
        raise WalkConfigurationError("complete graph needs at least two vertices")
    nbrs = tuple(tuple(j for j in range(n) if j != i) for i in range(n))
    return GraphTopology(n=n, neighbors=nbrs, complete=True)


def cycle_graph(n: int) -> GraphTopology:
    if n < 3:
        raise WalkConfigurationError("cycle needs at least three vertices")
    nbrs = tuple(tuple(sorted(((i - 1) % n, (i + 1) % n))) for i in range(n))
    return GraphTopology(n=n, neighbors=nbrs, complete=(n == 3))


def graph_from_edges(n: int, edges) -> GraphTopology:
    sets = [set() for _ in range(n)]
    for i, j in edges:
        if i == j:
            raise WalkConfigurationError("loops are not allowed")
        if not (0 <= i < n and 0 <= j < n):
            raise WalkConfigurationError(f"edge ({i},{j}) outside 0..{n - 1}")
        sets[i].add(j)
        sets[j].add(i)
    nbrs = tuple(tuple(sorted(s)) for s in sets)
    is_complete = all(len(s) == n - 1 for s in sets)
    return GraphTopology(n=n, neighbors=nbrs, complete=is_complete)


@dataclass(frozen=True)
class ReinforcementScheme:
    """Abstract reinforcement data: what each traversed edge reinforces.

    ``reinforcement_matrix`` maps oriented edges to the reinforcement set
    (rows sum to one); ``kernel_map`` sends an occupation measure in the
    constraint set to a row-stochastic edge kernel.  The vertex scheme used
    throughout reinforces the head of each edge; the type also admits
    edge-reinforced variants, which are out of analysis scope here.
    """

    reinforcement_matrix: np.ndarray
    kernel_map: Callable[[np.ndarray], np.ndarray]
    constraint_set: Sigma


def vertex_scheme(n: int, alpha: float) -> ReinforcementScheme:
    return ReinforcementScheme(
        reinforcement_matrix=edge_to_vertex_matrix(n),
        kernel_map=lambda v: build_vrnbw_kernel(v, alpha),
        constraint_set=Sigma(n),
    )


def run_seed_sequence(base_seed: int, run_index: int) -> np.random.SeedSequence:
    """Splittable per-run seeding: adding runs never perturbs earlier ones."""
    return np.random.SeedSequence(base_seed, spawn_key=(run_index,))


def _make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


@dataclass
class WalkState:
    """Mutable state of one walk: one instance per thread."""

    graph: GraphTopology
    alpha: float
    n: int
    prev: int
    cur: int
    Z: np.ndarray  # int64 visit counts over steps 1..n
    last_visit: np.ndarray  # int64 step of most recent visit, -1 if never
    rng: np.random.Generator
    bound_violations: int = 0
    first_violation: int = -1
    _adj: np.ndarray = field(default=None, repr=False)
    _deg: np.ndarray = field(default=None, repr=False)

    @property
    def current_edge(self) -> tuple[int, int]:
        return (self.prev, self.cur)


def init_walk(
    graph: GraphTopology,
    alpha: float,
    seed,
    start: Optional[int] = None,
) -> WalkState:
    """Start a walk: X0 given or uniform, X1 uniform over the neighbors of X0.

    The first move carries no non-backtracking constraint and all weights
    W(0) are equal, so X1 is uniform on N(X0).  After it, n = 1 and the
    current oriented edge is (X0, X1).
    """
    if alpha < 1.0:
        raise WalkConfigurationError("reinforcement strength alpha must be >= 1")
    if graph.complete and graph.n < 4:
        raise WalkConfigurationError("complete-graph walk needs N >= 4")
    if not graph.complete and graph.min_degree < 2:
        raise WalkConfigurationError(
            "general graph needs minimum degree >= 2, otherwise the walk can be trapped"
        )
    rng = _make_rng(seed)
    n_vert = graph.n
    if start is None:
        x0 = min(int(rng.random() * n_vert), n_vert - 1)
    else:
        x0 = int(start)
        if not (0 <= x0 < n_vert):
            raise WalkConfigurationError(f"start vertex {x0} outside 0..{n_vert - 1}")
    nbrs = graph.neighbors[x0]
    x1 = nbrs[min(int(rng.random() * len(nbrs)), len(nbrs) - 1)]
    Z = np.zeros(n_vert, dtype=np.int64)
    Z[x1] = 1
    last = np.full(n_vert, -1, dtype=np.int64)
    last[x0] = 0
    last[x1] = 1
    adj, deg = graph.adjacency_arrays()
    return WalkState(
        graph=graph,
        alpha=alpha,
        n=1,
        prev=x0,
        cur=x1,
        Z=Z,
        last_visit=last,
        rng=rng,
        _adj=adj,
        _deg=deg,
    )


def occupation(state: WalkState) -> np.ndarray:
    """v_n = (1 + Z_n) / (n + N); the numerator is held as exact integers."""
    return (1.0 + state.Z) / (state.n + state.graph.n)


@njit(cache=True)
def _complete_chunk(Z, endpoints, n0, alpha, u, last, traj, N):
    """Advance len(u) steps on the complete graph.

    Inverse-CDF sampling over admissible targets in increasing vertex order;
    returns (bound violations, first violating step, steps done)."""
    prev = endpoints[0]
    cur = endpoints[1]
    viol = 0
    first = -1
    max_z = np.int64(0)
    for i in range(N):
        if Z[i] > max_z:
            max_z = Z[i]
    record = traj.shape[0] > 0
    for t in range(u.shape[0]):
        tot = 0.0
        for k in range(N):
            if k != prev and k != cur:
                tot += (1.0 + Z[k]) ** alpha
        r = u[t] * tot
        acc = 0.0
        nxt = -1
        last_adm = -1
        for k in range(N):
            if k != prev and k != cur:
                last_adm = k
                acc += (1.0 + Z[k]) ** alpha
                if r < acc:
                    nxt = k
                    break
        if nxt < 0:
            nxt = last_adm
        prev = cur
        cur = nxt
        Z[nxt] += 1
        n = n0 + t + 1
        last[nxt] = n
        if record:
            traj[t] = nxt
        if Z[nxt] > max_z:
            max_z = Z[nxt]
        if 3 * max_z > n + 2:
            viol += 1
            if first < 0:
                first = n
    endpoints[0] = prev
    endpoints[1] = cur
    return viol, first, u.shape[0]


@njit(cache=True)
def _general_chunk(adj, deg, Z, endpoints, n0, alpha, u, last, traj):
    prev = endpoints[0]
    cur = endpoints[1]
    viol = 0
    first = -1
    max_z = np.int64(0)
    for i in range(Z.shape[0]):
        if Z[i] > max_z:
            max_z = Z[i]
    record = traj.shape[0] > 0
    for t in range(u.shape[0]):
        tot = 0.0
        for s in range(deg[cur]):
            k = adj[cur, s]
            if k != prev:
                tot += (1.0 + Z[k]) ** alpha
        if tot <= 0.0:
            endpoints[0] = prev
            endpoints[1] = cur
            return viol, first, t
        r = u[t] * tot
        acc = 0.0
        nxt = -1
        last_adm = -1
        for s in range(deg[cur]):
            k = adj[cur, s]
            if k != prev:
                last_adm = k
                acc += (1.0 + Z[k]) ** alpha
                if r < acc:
                    nxt = k
                    break
        if nxt < 0:
            nxt = last_adm
        prev = cur
        cur = nxt
        Z[nxt] += 1
        n = n0 + t + 1
        last[nxt] = n
        if record:
            traj[t] = nxt
        if Z[nxt] > max_z:
            max_z = Z[nxt]
        if 3 * max_z > n + 2:
            viol += 1
            if first < 0:
                first = n
    endpoints[0] = prev
    endpoints[1] = cur
    return viol, first, u.shape[0]


_EMPTY_TRAJ = np.empty(0, dtype=np.int64)


def _advance(state: WalkState, u: np.ndarray, traj: np.ndarray) -> int:
    endpoints = np.array([state.prev, state.cur], dtype=np.int64)
    if state.graph.complete:
        viol, first, done = _complete_chunk(
            state.Z, endpoints, state.n, state.alpha, u, state.last_visit, traj,
            state.graph.n,
        )
    else:
        viol, first, done = _general_chunk(
            state._adj, state._deg, state.Z, endpoints, state.n, state.alpha, u,
            state.last_visit, traj,
        )
    state.prev, state.cur = int(endpoints[0]), int(endpoints[1])
    if viol and state.first_violation < 0:
        state.first_violation = first
    state.bound_violations += viol
    state.n += done
    if done < u.shape[0]:
        raise DeadEndError(
            f"no admissible neighbor at step {state.n + 1}: "
            f"edge=({state.prev},{state.cur}), Z={state.Z.tolist()}"
        )
    return done


def step(state: WalkState) -> WalkState:
    """Advance a single step (same sampling path as bulk runs)."""
    _advance(state, state.rng.random(1), _EMPTY_TRAJ)
    return state


def next_step_distribution(state: WalkState) -> np.ndarray:
    """Exact conditional law of the next vertex given the current state."""
    n_vert = state.graph.n
    p = np.zeros(n_vert)
    for k in state.graph.neighbors[state.cur]:
        if k != state.prev:
            p[k] = (1.0 + state.Z[k]) ** state.alpha
    tot = p.sum()
    if tot <= 0:
        raise DeadEndError("no admissible neighbor from the current edge")
    return p / tot


@dataclass(frozen=True)
class WalkSnapshot:
    n: int
    v: np.ndarray
    Z: np.ndarray
    support_size: int


@dataclass
class TrajectorySummary:
    state: WalkState
    snapshots: list[WalkSnapshot]
    bound_violations: int
    first_violation: int
    trajectory: Optional[np.ndarray] = None

    @property
    def bound_ok(self) -> bool:
        return self.bound_violations == 0


def detect_support(state: WalkState, window: int) -> np.ndarray:
    """Vertices visited during the trailing ``window`` steps.

    A finite-run proxy for the set of infinitely-often visited vertices: a
    vertex leaves the estimate only after a full window of absence.  With
    window > n every vertex ever visited is returned.
    """
    cutoff = state.n - int(window)
    return np.flatnonzero((state.last_visit >= 0) & (state.last_visit > cutoff))


def default_window(n_vert: int) -> int:
    return max(10 * n_vert, 500)


def run(
    state: WalkState,
    n_steps: int,
    record_every: int = 0,
    collect_trajectory: bool = False,
    window: Optional[int] = None,
) -> TrajectorySummary:
    """Advance ``n_steps`` steps, recording snapshots at the given cadence."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    win = default_window(state.graph.n) if window is None else int(window)
    chunk = record_every if record_every and record_every > 0 else min(n_steps, 1 << 17)
    traj_parts = []
    snapshots = []
    left = n_steps
    while left > 0:
        m = min(chunk, left)
        u = state.rng.random(m)
        traj = np.empty(m, dtype=np.int64) if collect_trajectory else _EMPTY_TRAJ
        _advance(state, u, traj)
        if collect_trajectory:
            traj_parts.append(traj)
        left -= m
        if record_every and record_every > 0:
            snapshots.append(
                WalkSnapshot(
                    n=state.n,
                    v=occupation(state),
                    Z=state.Z.copy(),
                    support_size=int(detect_support(state, win).size),
                )
            )
    return TrajectorySummary(
        state=state,
        snapshots=snapshots,
        bound_violations=state.bound_violations,
        first_violation=state.first_violation,
        trajectory=np.concatenate(traj_parts) if traj_parts else None,
    )


# ---------------------------------------------------------------------------
# Path formation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathBound:
    """Truncated lower bound on the probability of looping forever on a cycle.

    ``value`` is the finite product a * prod_{k<=k_max} prod_l W(k)/(W(k)+a_l)
    (monotone decreasing in k_max); the infinite tail lies within
    [value * exp(-tail_exponent), value].  ``first_loop_probability`` is the
    exact probability a of completing the first full loop from the start.
    """

    value: float
    first_loop_probability: float
    tail_exponent: float
    k_max: int
    alpha: float
    cycle: tuple[int, ...]
    diagnostic: str = ""

    @property
    def lower_bracket(self) -> float:
        return self.value * float(np.exp(-self.tail_exponent))


def _validate_cycle(graph: GraphTopology, cycle) -> list[int]:
    cyc = [int(i) for i in cycle]
    L = len(cyc)
    if L < 3:
        raise ValueError("cycle must have at least three vertices")
    if len(set(cyc)) != L:
        raise ValueError("cycle vertices must be distinct")
    cset = set(cyc)
    for idx, v in enumerate(cyc):
        before = cyc[(idx - 1) % L]
        after = cyc[(idx + 1) % L]
        inside = set(graph.neighbors[v]) & cset
        if inside != {before, after}:
            raise ValueError(
                f"vertex {v}: neighbors inside the cycle are {sorted(inside)}, "
                f"need exactly {sorted({before, after})}"
            )
    return cyc


def first_loop_probability(graph: GraphTopology, cycle, alpha: float) -> float:
    """Exact probability that the walk started at the cycle's end traverses it once."""
    cyc = _validate_cycle(graph, cycle)
    Z = np.zeros(graph.n, dtype=np.int64)
    prev = -1
    cur = cyc[-1]
    prob = 1.0
    for target in cyc:
        wts = 0.0
        for k in graph.neighbors[cur]:
            if k != prev:
                wts += (1.0 + Z[k]) ** alpha
        prob *= (1.0 + Z[target]) ** alpha / wts
        Z[target] += 1
        prev, cur = cur, target
    return prob


def path_formation_lower_bound(
    graph: GraphTopology, cycle, alpha: float, k_max: int
) -> PathBound:
    """Truncated product bound for eternal traversal of ``cycle``.

    After the first loop, the k-th revisit of each cycle vertex succeeds with
    probability W(k) / (W(k) + a_l) where a_l = (deg(i_l) - 2) W(0) weighs
    the never-visited outside neighbors.  Positivity needs the reinforcement
    series sum 1/W(k) to converge, i.e. alpha > 1; at alpha <= 1 the product
    vanishes and 0 is returned with a diagnostic.
    """
    cyc = _validate_cycle(graph, cycle)
    if alpha <= 1.0:
        return PathBound(
            value=0.0,
            first_loop_probability=first_loop_probability(graph, cyc, alpha),
            tail_exponent=np.inf,
            k_max=int(k_max),
            alpha=alpha,
            cycle=tuple(cyc),
            diagnostic="sum 1/W(k) diverges for alpha <= 1: the bound degenerates to 0",
        )
    a_l = np.array([graph.degree(v) - 2.0 for v in cyc])
    a_first = first_loop_probability(graph, cyc, alpha)
    log_prod = 0.0
    chunk = 1_000_000
    k0 = 1
    while k0 <= k_max:
        k1 = min(k_max, k0 + chunk - 1)
        ks = np.arange(k0, k1 + 1, dtype=float)
        w = (1.0 + ks) ** alpha
        for al in a_l:
            if al > 0:
                log_prod += np.log1p(-al / (w + al)).sum()
        k0 = k1 + 1
    value = a_first * float(np.exp(log_prod))
    # sum_{k>k_max} 1/W(k) <= (1+k_max)^(1-alpha)/(alpha-1)
    tail = float(a_l.sum()) * (1.0 + k_max) ** (1.0 - alpha) / (alpha - 1.0)
    return PathBound(
        value=value,
        first_loop_probability=a_first,
        tail_exponent=tail,
        k_max=int(k_max),
        alpha=alpha,
        cycle=tuple(cyc),
    )


def completed_loops(trajectory: np.ndarray, cycle) -> int:
    """Number of full in-order traversals at the head of a trajectory."""
    cyc = [int(i) for i in cycle]
    L = len(cyc)
    k = 0
    for t, v in enumerate(trajectory):
        if int(v) != cyc[t % L]:
            break
        if (t + 1) % L == 0:
            k += 1
    return k


def monte_carlo_path_formation(
    graph: GraphTopology, cycle, alpha: float, loops: int, runs: int, base_seed: int
) -> float:
    """Fraction of walks whose first loops*L steps follow the cycle in order.

    The recorded trajectory of ``run`` starts at X_2 (initialization already
    performed the first move), so X_1 is prepended before counting.
    """
    cyc = _validate_cycle(graph, cycle)
    L = len(cyc)
    hits = 0
    for r in range(runs):
        st = init_walk(graph, alpha, run_seed_sequence(base_seed, r), start=cyc[-1])
        x1 = st.cur
        summary = run(st, loops * L - 1, collect_trajectory=True)
        traj = np.concatenate([[x1], summary.trajectory])
        if completed_loops(traj, cyc) >= loops:
            hits += 1
    return hits / runs


# ---------------------------------------------------------------------------
# Localization experiments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalizationRun:
    run_index: int
    support: tuple[int, ...]
    support_size: int
    sup_deviation: float  # ||v_n - uniform on the detected support||_inf
    bound_ok: bool
    n_steps: int


def localization_run(
    alpha: float, n_vert: int, n_steps: int, window: int, base_seed: int, run_index: int
) -> LocalizationRun:
    st = init_walk(complete_graph(n_vert), alpha, run_seed_sequence(base_seed, run_index))
    summary = run(st, n_steps, window=window)
    sup = detect_support(st, window)
    dev = float(np.abs(occupation(st) - uniform_on(sup, n_vert)).max())
    return LocalizationRun(
        run_index=run_index,
        support=tuple(int(i) for i in sup),
        support_size=int(sup.size),
        sup_deviation=dev,
        bound_ok=summary.bound_ok,
        n_steps=n_steps,
    )


def monte_carlo_localization(
    alpha: float,
    n_vert: int,
    n_steps: int,
    n_runs: int,
    window: int,
    base_seed: int,
) -> list[LocalizationRun]:
    """Independent seeded runs with final-window support statistics."""
    return [
        localization_run(alpha, n_vert, n_steps, window, base_seed, r)
        for r in range(n_runs)
    ]


def support_histogram(results: list[LocalizationRun]) -> dict[int, float]:
    freq: dict[int, float] = {}
    for r in results:
        freq[r.support_size] = freq.get(r.support_size, 0.0) + 1.0
    return {k: v / len(results) for k, v in sorted(freq.items())}
