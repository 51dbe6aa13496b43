"""Transition kernels on oriented edges of the complete graph.

A vertex-reinforced non-backtracking walk on the complete graph with N >= 4
vertices is Markov on oriented edges given its occupation measure v.  The
one-step kernel is

    P(v)((i,j),(j,k)) = v_k^alpha / sum_{k' not in {i,j}} v_{k'}^alpha,

zero whenever the edges do not chain (j != j') or the move backtracks
(k == i).  This module builds P(v), analyzes its recurrent classes, computes
its stationary measure both in closed form and by a linear solve, constructs
the pseudo-inverse Q of I - P (the deviation / fundamental matrix), and
provides the exact limits of Q(v)g at the degenerate corners where v is
uniform on exactly three vertices and the kernel splits into two 3-cycles.

Closed forms are driven by the symmetric functions

    H_{i,j}(v) = sum_{k not in {i,j}} v_k^alpha
    H_i(v)     = sum_{j != i} v_j^alpha H_{i,j}(v)
    H(v)       = sum_i v_i^alpha H_i(v)

with pi_{i,j}(v) = v_i^a v_j^a H_{i,j}(v) / H(v) on edges and
pi^V_k(v) = v_k^a H_k(v) / H(v) on vertices.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .measures import SIGMA_GAP, in_sigma, support

__all__ = [
    "EdgeIndex",
    "edge_to_vertex_matrix",
    "build_vrnbw_kernel",
    "ClassDecomposition",
    "DecomposableKernelError",
    "indecomposability_check",
    "h_functions",
    "StationaryPair",
    "stationary_closed_form",
    "stationary_solve",
    "pseudo_inverse",
    "stationary_matrix",
    "TaylorLimitBundle",
    "taylor_limit_at_uniform3",
    "corner_relabeling",
    "ExpansionResiduals",
    "stationary_expansion_check",
]


class EdgeIndex:
    """Bijection between oriented edges (i, j), i != j, and 0..N(N-1)-1."""

    def __init__(self, n: int):
        if n < 2:
            raise ValueError("need at least two vertices")
        self.n = int(n)

    @property
    def m(self) -> int:
        """Number of oriented edges."""
        return self.n * (self.n - 1)

    def encode(self, i: int, j: int) -> int:
        if i == j or not (0 <= i < self.n and 0 <= j < self.n):
            raise ValueError(f"({i},{j}) is not an oriented edge on {self.n} vertices")
        return i * (self.n - 1) + (j if j < i else j - 1)

    def decode(self, idx: int) -> tuple[int, int]:
        i, r = divmod(int(idx), self.n - 1)
        j = r if r < i else r + 1
        return i, j

    def pairs(self):
        """All oriented edges in index order."""
        for idx in range(self.m):
            yield self.decode(idx)

    def heads(self) -> np.ndarray:
        return np.array([j for _, j in self.pairs()], dtype=np.int64)

    def tails(self) -> np.ndarray:
        return np.array([i for i, _ in self.pairs()], dtype=np.int64)


def edge_to_vertex_matrix(n: int) -> np.ndarray:
    """The reinforcement matrix V((i,j), k) = 1_{j=k}: each edge reinforces its head."""
    ei = EdgeIndex(n)
    V = np.zeros((ei.m, n))
    V[np.arange(ei.m), ei.heads()] = 1.0
    return V


def build_vrnbw_kernel(v: np.ndarray, alpha: float, check: bool = True) -> np.ndarray:
    """Edge kernel P(v) of the walk reinforced by W(k) = (1+k)^alpha.

    Requires v in Sigma (support >= 3, so after removing the two endpoints of
    any edge at least one admissible target keeps positive weight) and N >= 4.
    """
    v = np.asarray(v, dtype=float)
    n = v.size
    if check:
        if n < 4:
            raise ValueError("complete-graph walk needs N >= 4")
        if not in_sigma(v).contained:
            raise ValueError("occupation measure outside Sigma")
    w = v**alpha
    ei = EdgeIndex(n)
    P = np.zeros((ei.m, ei.m))
    for a in range(ei.m):
        i, j = ei.decode(a)
        denom = 0.0
        for k in range(n):
            if k != i and k != j:
                denom += w[k]
        if denom <= 0.0:
            raise ValueError(
                f"vanishing weight out of edge ({i},{j}): support of v too small"
            )
        for k in range(n):
            if k != i and k != j:
                P[a, ei.encode(j, k)] = w[k] / denom
    return P


@dataclass(frozen=True)
class ClassDecomposition:
    """Recurrent structure of a Markov matrix on a finite state space."""

    indecomposable: bool
    recurrent_classes: tuple[frozenset, ...]


class DecomposableKernelError(ValueError):
    """Raised when an operation needs a single recurrent class but got several."""

    def __init__(self, decomposition: ClassDecomposition):
        self.decomposition = decomposition
        ncl = len(decomposition.recurrent_classes)
        super().__init__(f"kernel is decomposable: {ncl} recurrent classes")


def indecomposability_check(P: np.ndarray, tol: float = 0.0) -> ClassDecomposition:
    """Recurrent classes of the positive-entry digraph of a Markov matrix.

    A matrix is indecomposable iff exactly one strongly connected component
    has no outgoing edge; that component is the recurrent class.
    """
    P = np.asarray(P, dtype=float)
    m = P.shape[0]
    adj = csr_matrix(P > tol)
    ncomp, labels = connected_components(adj, directed=True, connection="strong")
    # a component is recurrent iff no positive entry leaves it
    rows, cols = adj.nonzero()
    leaves = np.zeros(ncomp, dtype=bool)
    crossing = labels[rows] != labels[cols]
    leaves[labels[rows[crossing]]] = True
    rec = [
        frozenset(np.flatnonzero(labels == c).tolist())
        for c in range(ncomp)
        if not leaves[c]
    ]
    rec.sort(key=lambda s: min(s))
    return ClassDecomposition(len(rec) == 1, tuple(rec))


_TRIPLE_MASK_CACHE: dict[int, np.ndarray] = {}


def _pair_exclusion_mask(n: int) -> np.ndarray:
    # mask[i, j, k] = 1 iff k not in {i, j}
    m = _TRIPLE_MASK_CACHE.get(n)
    if m is None:
        k = np.arange(n)
        m = (
            (k[None, None, :] != k[:, None, None])
            & (k[None, None, :] != k[None, :, None])
        ).astype(float)
        _TRIPLE_MASK_CACHE[n] = m
    return m


def h_functions(v: np.ndarray, alpha: float):
    """The triple (H(v), H_i(v), H_{i,j}(v)).

    H_{i,j} sums w_k = v_k^alpha over k outside {i, j}; the contracted forms
    follow by weighting with w.  Everything is assembled from sums of
    nonnegative terms: power-sum shortcuts like (S1 - w_i)^2 - (S2 - w_i^2)
    cancel catastrophically when the weight ratio (max v / min v)^alpha is
    extreme, which two-level equilibria at large alpha do reach.
    """
    v = np.asarray(v, dtype=float)
    w = v**alpha
    n = w.size
    Hij = np.einsum("k,ijk->ij", w, _pair_exclusion_mask(n))
    np.fill_diagonal(Hij, 0.0)
    Hi = (w[None, :] * Hij).sum(axis=1)
    H = float(w @ Hi)
    return H, Hi, Hij


@dataclass(frozen=True)
class StationaryPair:
    """Stationary edge measure pi and its vertex marginal pi^V = pi V."""

    edge: np.ndarray
    vertex: np.ndarray
    edge_index: EdgeIndex = field(repr=False)


def stationary_vertex(v: np.ndarray, alpha: float) -> np.ndarray:
    """Closed-form pi^V_k(v) = v_k^alpha H_k(v) / H(v).

    Continuous on all of Sigma (H > 0 whenever the support has >= 3 points),
    including the three-point corners where the edge chain itself loses
    indecomposability.
    """
    v = np.asarray(v, dtype=float)
    H, Hi, _ = h_functions(v, alpha)
    if H <= 0.0:
        raise ValueError("H(v) = 0: support of v has fewer than three points")
    return (v**alpha) * Hi / H


def stationary_closed_form(v: np.ndarray, alpha: float) -> StationaryPair:
    """Closed-form stationary pair of P(v) on the complete graph."""
    v = np.asarray(v, dtype=float)
    n = v.size
    H, Hi, Hij = h_functions(v, alpha)
    if H <= 0.0:
        raise ValueError("H(v) = 0: support of v has fewer than three points")
    w = v**alpha
    pi_mat = np.outer(w, w) * Hij / H
    ei = EdgeIndex(n)
    pi_edge = np.array([pi_mat[i, j] for i, j in ei.pairs()])
    pi_vertex = w * Hi / H
    return StationaryPair(pi_edge, pi_vertex, ei)


def stationary_solve(P: np.ndarray, residual_tol: float = 1e-10) -> np.ndarray:
    """Stationary measure of an indecomposable Markov matrix by a dense solve.

    Replaces the first row of (P^T - I) by the normalization row of ones and
    solves; falls back to least squares on the stacked system if that row
    choice happens to be singular.  Tiny negative entries (above -1e-12) are
    clamped to zero and the result renormalized.
    """
    P = np.asarray(P, dtype=float)
    m = P.shape[0]
    dec = indecomposability_check(P)
    if not dec.indecomposable:
        raise DecomposableKernelError(dec)
    A = P.T - np.eye(m)
    A[0, :] = 1.0
    b = np.zeros(m)
    b[0] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        stacked = np.vstack([P.T - np.eye(m), np.ones((1, m))])
        rhs = np.concatenate([np.zeros(m), [1.0]])
        pi = np.linalg.lstsq(stacked, rhs, rcond=None)[0]
    if pi.min() < -1e-12:
        raise RuntimeError(f"stationary solve produced negative mass {pi.min():.3e}")
    pi = np.maximum(pi, 0.0)
    pi /= pi.sum()
    res = np.abs(pi @ P - pi).max()
    if res > residual_tol:
        raise RuntimeError(f"stationary residual {res:.3e} exceeds {residual_tol:.0e}")
    return pi


def stationary_matrix(pi: np.ndarray) -> np.ndarray:
    """Pi with every row equal to pi (rank-one projection onto constants)."""
    pi = np.asarray(pi, dtype=float)
    return np.tile(pi, (pi.size, 1))


def pseudo_inverse(P: np.ndarray, pi: np.ndarray) -> np.ndarray:
    """Pseudo-inverse Q of I - P: Q 1 = 0 and Q(I-P) = (I-P)Q = I - Pi.

    Fundamental-matrix construction Q = (I - P + Pi)^{-1} - Pi; both defining
    identities hold to solver precision and pi Q = 0 as well.
    """
    P = np.asarray(P, dtype=float)
    m = P.shape[0]
    Pi = stationary_matrix(pi)
    try:
        Z = np.linalg.solve(np.eye(m) - P + Pi, np.eye(m))
    except np.linalg.LinAlgError as exc:
        raise DecomposableKernelError(indecomposability_check(P)) from exc
    return Z - Pi


# ---------------------------------------------------------------------------
# Limits at the three-point corners
# ---------------------------------------------------------------------------

_J3 = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])


def corner_relabeling(corner_support, n: int) -> np.ndarray:
    """Permutation sending a corner's support to {0,1,2} in increasing order.

    Returns sigma with sigma[old_vertex] = new_vertex; the complement of the
    support is mapped to 3..N-1, also in increasing order.
    """
    sup = sorted(set(int(i) for i in corner_support))
    if len(sup) != 3:
        raise ValueError("corner support must have exactly three vertices")
    rest = [i for i in range(n) if i not in sup]
    sigma = np.empty(n, dtype=np.int64)
    for new, old in enumerate(sup + rest):
        sigma[old] = new
    return sigma


@dataclass(frozen=True)
class TaylorLimitBundle:
    """Exact limit of Q(v)g at the corner uniform on {0,1,2}.

    Blocks follow the split of edges by which side of the corner support the
    endpoints lie on; with h = a restricted to the corner support, hbar its
    mean, J the 3-cycle shift, L1 = (J + 2 J^2)/3 and L2 = (2 J + J^2)/3:

        X_q -> -L_q h + hbar            (edges inside the support; q = 1, 2)
        Y_l -> -h/4 + a(l) - 3 hbar/4   (edges support -> l)
        Z_l -> (h - hbar)/2             (edges l -> support)
        T_l -> (a(l) - hbar)(1 - delta_l)   (edges tail -> l)
    """

    h: np.ndarray
    a_tail: np.ndarray
    hbar: float
    X1: np.ndarray
    X2: np.ndarray
    Y: np.ndarray  # shape (n_tail, 3), row l-4 is Y_l
    Z: np.ndarray  # shape (n_tail, 3)
    T: np.ndarray  # shape (n_tail, n_tail), column l-4 is T_l, diagonal 0

    @property
    def n(self) -> int:
        return 3 + self.a_tail.size

    def edge_function(self, corner_support=(0, 1, 2)) -> np.ndarray:
        """Assemble the limit of Q(v)g as a vector over all oriented edges.

        ``corner_support`` relabels the blocks onto an arbitrary corner; the
        bundle itself is always expressed in the canonical labels where the
        support is {0,1,2}.
        """
        n = self.n
        ei = EdgeIndex(n)
        sigma = corner_relabeling(corner_support, n)
        out = np.empty(ei.m)
        # canonical-label lookup tables; X blocks enumerate the two 3-cycles
        x1_edges = {(2, 0): 0, (0, 1): 1, (1, 2): 2}
        x2_edges = {(1, 0): 0, (2, 1): 1, (0, 2): 2}
        for idx, (i0, j0) in enumerate(ei.pairs()):
            i, j = int(sigma[i0]), int(sigma[j0])
            if i < 3 and j < 3:
                if (i, j) in x1_edges:
                    out[idx] = self.X1[x1_edges[(i, j)]]
                else:
                    out[idx] = self.X2[x2_edges[(i, j)]]
            elif i < 3 <= j:
                out[idx] = self.Y[j - 3, i]
            elif j < 3 <= i:
                out[idx] = self.Z[i - 3, j]
            else:
                out[idx] = self.T[i - 3, j - 3]
        return out


def taylor_limit_at_uniform3(h, a_tail) -> TaylorLimitBundle:
    """Corner limit of v -> Q(v)g for g(i,j) = a(j), a = (h, a_tail)."""
    h = np.asarray(h, dtype=float)
    a_tail = np.atleast_1d(np.asarray(a_tail, dtype=float))
    if h.shape != (3,):
        raise ValueError("h must collect the three support values of a")
    hbar = float(h.mean())
    L1 = (_J3 + 2 * _J3 @ _J3) / 3.0
    L2 = (2 * _J3 + _J3 @ _J3) / 3.0
    X1 = -L1 @ h + hbar
    X2 = -L2 @ h + hbar
    nt = a_tail.size
    Y = np.empty((nt, 3))
    Z = np.empty((nt, 3))
    T = np.empty((nt, nt))
    for l in range(nt):
        Y[l] = -h / 4.0 + a_tail[l] - 3.0 * hbar / 4.0
        Z[l] = (h - hbar) / 2.0
        T[:, l] = a_tail[l] - hbar
    np.fill_diagonal(T, 0.0)
    return TaylorLimitBundle(h, a_tail, hbar, X1, X2, Y, Z, T)


def edge_observable(a: np.ndarray, n: int) -> np.ndarray:
    """The map g(i,j) = a(j) as a vector over oriented edges ((V a) on edges)."""
    a = np.asarray(a, dtype=float)
    ei = EdgeIndex(n)
    return a[ei.heads()]


@dataclass(frozen=True)
class ExpansionResiduals:
    """Deviations of pi(v) from its corner expansion, for v near a corner.

    eps collects the corner coordinates: eps_i = 1 - 3 v_i on the support
    triple, eps_l = 3 v_l on the tail, eps = sum over either group.  The
    expansion predicts, with s = sum_l eps_l^alpha,

        pi_{i,j} = 1/6 - s/3 + O(eps^{alpha+1})   (i, j in the triple)
        pi_{i,l} = pi_{l,i} = eps_l^alpha / 3 + O(eps^{alpha+1})
        pi_{l,m} = O(eps^{alpha+1})
    """

    eps: float
    eps_top: np.ndarray
    eps_tail: np.ndarray
    top_residual: float
    mixed_residual: float
    low_residual: float


def stationary_expansion_check(
    v: np.ndarray, alpha: float, triple=None
) -> ExpansionResiduals:
    """Residuals of the closed-form pi(v) against its corner Taylor expansion."""
    v = np.asarray(v, dtype=float)
    n = v.size
    if triple is None:
        triple = np.sort(np.argsort(v)[-3:])
    triple = [int(i) for i in triple]
    tail = [i for i in range(n) if i not in triple]
    eps_top = 1.0 - 3.0 * v[triple]
    eps_tail = 3.0 * v[tail]
    eps = float(eps_tail.sum())
    if eps <= 0.0:
        raise ValueError("v lies exactly on the corner; use the limit bundle instead")
    s = float((eps_tail**alpha).sum())
    pair = stationary_closed_form(v, alpha)
    ei = pair.edge_index
    pi = pair.edge
    top = max(
        abs(pi[ei.encode(i, j)] - (1.0 / 6.0 - s / 3.0))
        for i in triple
        for j in triple
        if i != j
    )
    mixed = 0.0
    for li, l in enumerate(tail):
        pred = eps_tail[li] ** alpha / 3.0
        for i in triple:
            mixed = max(mixed, abs(pi[ei.encode(i, l)] - pred))
            mixed = max(mixed, abs(pi[ei.encode(l, i)] - pred))
    low = 0.0
    for l in tail:
        for m_ in tail:
            if l != m_:
                low = max(low, abs(pi[ei.encode(l, m_)]))
    return ExpansionResiduals(eps, eps_top, eps_tail, top, mixed, float(low))
