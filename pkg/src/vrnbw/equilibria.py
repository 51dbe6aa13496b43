"""Equilibria of the mean-field flow and their stability classification.

Uniform probability measures on at least three vertices are always fixed
points of v -> piV(v); for alpha = 1 they are the only ones.  For alpha > 1
every other equilibrium takes exactly two positive values: up to relabeling
it is a barycenter v = (1-p) mu_K + p mu_M of uniform measures on nested
supports (K high coordinates of value a, M-K low ones of value b), and it
exists iff the scalar branch equation

    (1+x)^beta (1 + 2 b1 x + b1 b2 x^2) = 1 + 2 a1 x + a1 a2 x^2

has a root x = (a/b)^alpha - 1 > 0, where beta = (alpha-1)/alpha and

    a1 = K/(M-1),  a2 = (K-1)/(M-2),  b1 = (K-1)/(M-1),  b2 = (K-2)/(M-2).

For K = 1 the equation reduces to beta = phi_a1(x) = log(1+2 a1 x)/log(1+x);
for K >= 2, substituting y = b1 x turns it into beta = phi(y) with

    phi(y) = (log A(y) - log B(y)) / log(1 + lam y),
    A(y) = 1 + 2(1+t) y + (1+t)(1+s) y^2,
    B(y) = 1 + 2 y + (1-t)(1+s) y^2,
    s = 1/(M-2),  t = 1/(K-1),  lam = (1/s + 1) t,

so that 1 + lam y = 1 + x.  The root count D(K,M) follows the shape of these
scalar functions: monotone for K in {1,2}, decreasing for K >= max(3, M/2),
unimodal with peak value beta_{K,M} for 3 <= K < M/2.

The derivative of the field at an equilibrium acts on the zero-sum tangent
space.  Directions off the support are exact eigendirections; on the support
the operator is self-adjoint for the 1/v inner product, so a similarity by
diag(v^(-1/2)) makes it symmetric and the spectrum comes out real by
construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Optional

import numpy as np

from .flow import vector_field
from .kernels import h_functions
from .measures import support

__all__ = [
    "BranchConstants",
    "phi_a1",
    "phi",
    "psi",
    "BetaThresholds",
    "beta_threshold",
    "EquilibriumRecord",
    "two_level_record",
    "uniform_record",
    "solve_branch_equilibria",
    "count_D",
    "enumerate_equilibria",
    "DFMatrices",
    "differential_DF",
    "EigenvalueGroup",
    "StabilityReport",
    "classify_stability",
    "low_block_factor",
    "CoboundaryResult",
    "coboundary_check",
]

RESIDUAL_TOL = 1e-9
MARGINAL_TOL = 1e-9


# ---------------------------------------------------------------------------
# Branch functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BranchConstants:
    """Rational constants of the (K, M) branch equation."""

    K: int
    M: int

    def __post_init__(self):
        if not (1 <= self.K <= self.M - 1) or self.M < 4:
            raise ValueError(f"invalid branch (K={self.K}, M={self.M})")

    @property
    def a1(self):
        return self.K / (self.M - 1)

    @property
    def a2(self):
        return (self.K - 1) / (self.M - 2)

    @property
    def b1(self):
        return (self.K - 1) / (self.M - 1)

    @property
    def b2(self):
        return (self.K - 2) / (self.M - 2)

    @property
    def s(self):
        return 1.0 / (self.M - 2)

    @property
    def t(self):
        if self.K < 2:
            raise ValueError("t is defined for K >= 2")
        return 1.0 / (self.K - 1)

    @property
    def lam(self):
        return (1.0 / self.s + 1.0) * self.t  # equals (M-1)/(K-1)

    def x_cap(self, alpha: float) -> float:
        """Largest x compatible with the high value a <= 1/3.

        Binding only for K in {1, 2}; for K >= 3 the high value is below 1/K
        and the constraint is vacuous.
        """
        if self.K == 1:
            return ((self.M - 1) / 2.0) ** alpha - 1.0
        if self.K == 2:
            return (self.M - 2.0) ** alpha - 1.0
        return np.inf


def phi_a1(x, M: int):
    """K = 1 branch function log(1+2 a1 x)/log(1+x), a1 = 1/(M-1).

    Increasing, with limits 2/(M-1) at 0+ and 1 at infinity.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("branch functions are defined for x > 0")
    a1 = 1.0 / (M - 1)
    return np.log1p(2.0 * a1 * x) / np.log1p(x)


def phi(y, branch: BranchConstants):
    """K >= 2 branch function (log A - log B)/log(1 + lam y).

    Written in log1p form so the value stays accurate down to y ~ 1e-9,
    where A and B both collapse onto 1 and plain logs lose the signal.
    """
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("branch functions are defined for y > 0")
    s, t, lam = branch.s, branch.t, branch.lam
    a_lin = y * (2.0 * (1.0 + t) + (1.0 + t) * (1.0 + s) * y)
    b_lin = y * (2.0 + (1.0 - t) * (1.0 + s) * y)
    return (np.log1p(a_lin) - np.log1p(b_lin)) / np.log1p(lam * y)


def psi(x, K: int, M: int):
    """Unified branch function of x = (a/b)^alpha - 1 for any K."""
    if K == 1:
        return phi_a1(x, M)
    br = BranchConstants(K, M)
    return phi(np.asarray(x, dtype=float) * br.b1, br)


@dataclass(frozen=True)
class BetaThresholds:
    beta_M: float
    beta_KM: Optional[float]  # present only for 3 <= K < M/2


def _branch_peak(K: int, M: int) -> tuple[float, float]:
    """(argmax x, peak value) of the unimodal branch function.

    Coarse log-grid argmax seeds a golden-section refinement to 1e-12."""
    xs = np.logspace(-8, 8, 4001)
    vals = psi(xs, K, M)
    k = int(np.argmax(vals))
    lo = xs[max(k - 1, 0)]
    hi = xs[min(k + 1, xs.size - 1)]
    inv_gr = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_gr * (b - a)
    d = a + inv_gr * (b - a)
    fc, fd = psi(c, K, M), psi(d, K, M)
    while b - a > 1e-14 * max(1.0, abs(a)):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_gr * (b - a)
            fc = psi(c, K, M)
        else:
            a, c, fc = c, d, fd
            d = a + inv_gr * (b - a)
            fd = psi(d, K, M)
    xm = 0.5 * (a + b)
    return xm, float(psi(xm, K, M))


def beta_threshold(K: int, M: int) -> BetaThresholds:
    """beta_M = 2/(M-1) exactly; beta_{K,M} by maximizing the branch function."""
    BranchConstants(K, M)  # validate
    beta_M = 2.0 / (M - 1)
    if 3 <= K < M / 2:
        return BetaThresholds(beta_M, _branch_peak(K, M)[1])
    return BetaThresholds(beta_M, None)


# ---------------------------------------------------------------------------
# Equilibrium records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquilibriumRecord:
    """One equilibrium up to vertex permutation (canonical representative).

    ``kind`` is "uniform" (K = M = support size) or "two_level" (K high
    coordinates of value a, M - K low ones of value b).  ``p`` is the weight
    of mu_M in the barycenter v = (1-p) mu_K + p mu_M, so b = p/M.
    ``orbit_count`` is the number of distinct vertex arrangements of this
    representative.
    """

    kind: str
    K: int
    M: int
    alpha: float
    vector: np.ndarray
    a: float
    b: Optional[float]
    x: Optional[float]
    p: Optional[float]
    beta: float
    orbit_count: int

    @property
    def support_size(self) -> int:
        return self.M


def _check_residual(vec: np.ndarray, alpha: float):
    res = float(np.abs(vector_field(vec, alpha)).max())
    if res > RESIDUAL_TOL:
        raise RuntimeError(f"equilibrium residual {res:.2e} exceeds {RESIDUAL_TOL:.0e}")
    return res


def uniform_record(K: int, N: int, alpha: float) -> EquilibriumRecord:
    """Uniform measure on the first K vertices; an equilibrium for K >= 3."""
    if K < 3 or K > N:
        raise ValueError("uniform equilibria need 3 <= K <= N")
    vec = np.zeros(N)
    vec[:K] = 1.0 / K
    _check_residual(vec, alpha)
    return EquilibriumRecord(
        kind="uniform",
        K=K,
        M=K,
        alpha=alpha,
        vector=vec,
        a=1.0 / K,
        b=None,
        x=None,
        p=None,
        beta=(alpha - 1.0) / alpha,
        orbit_count=comb(N, K),
    )


def two_level_record(K: int, M: int, x: float, alpha: float, N: int) -> EquilibriumRecord:
    """Record for a root x of the (K, M) branch equation, on N vertices."""
    if M > N:
        raise ValueError("support does not fit the vertex set")
    r = (1.0 + x) ** (1.0 / alpha)  # a/b
    b = 1.0 / (K * r + (M - K))
    a = r * b
    p = M * b
    vec = np.zeros(N)
    vec[:K] = a
    vec[K:M] = b
    _check_residual(vec, alpha)
    return EquilibriumRecord(
        kind="two_level",
        K=K,
        M=M,
        alpha=alpha,
        vector=vec,
        a=a,
        b=b,
        x=x,
        p=p,
        beta=(alpha - 1.0) / alpha,
        orbit_count=comb(N, M) * comb(M, K),
    )


# ---------------------------------------------------------------------------
# Root solving and counting
# ---------------------------------------------------------------------------

_SCAN_POINTS = 10_000
_SCAN_LO = 1e-9
_SCAN_HI = 1e8
_BISECT_ITERS = 80


def _scan_roots(K: int, M: int, beta: float, alpha: float) -> list[float]:
    # For K in {1, 2} the cap a <= 1/3 is finite and the root provably sits
    # below it, so the scan follows the cap however large alpha makes it.
    # For K >= 3 the cap is vacuous and the scan stops at _SCAN_HI: roots
    # drift beyond every floating range as beta -> 0 (the equilibrium merges
    # into the uniform measure on K points there).
    cap = BranchConstants(K, M).x_cap(alpha)
    hi = cap if np.isfinite(cap) else _SCAN_HI
    if hi <= _SCAN_LO:
        return []
    xs = np.logspace(np.log10(_SCAN_LO), np.log10(hi), _SCAN_POINTS)
    g = psi(xs, K, M) - beta
    roots = []
    sgn = np.sign(g)
    for k in np.flatnonzero(sgn[:-1] * sgn[1:] < 0):
        lo_, hi_ = xs[k], xs[k + 1]
        glo = g[k]
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo_ + hi_)
            gm = psi(mid, K, M) - beta
            if gm == 0.0:
                lo_ = hi_ = mid
                break
            if (gm > 0) == (glo > 0):
                lo_, glo = mid, gm
            else:
                hi_ = mid
        roots.append(0.5 * (lo_ + hi_))
    for k in np.flatnonzero(g == 0.0):  # exact grid hits
        roots.append(float(xs[k]))
    roots.sort()
    dedup = []
    for r in roots:
        if not dedup or abs(r - dedup[-1]) > 1e-9 * max(1.0, r):
            dedup.append(r)
    return dedup


def solve_branch_equilibria(K: int, M: int, alpha: float, N: int) -> list[EquilibriumRecord]:
    """All two-level equilibria on the (K, M) branch, at this alpha.

    Empty for alpha = 1 (beta = 0: the branch functions are positive).  At a
    tangency beta = beta_{K,M} the double root is located at the peak of the
    branch function rather than by a sign change.
    """
    beta = (alpha - 1.0) / alpha
    if beta <= 0.0:
        return []
    roots = _scan_roots(K, M, beta, alpha)
    if 3 <= K < M / 2 and not roots:
        x_peak, beta_KM = _branch_peak(K, M)
        if abs(beta - beta_KM) <= MARGINAL_TOL:
            roots = [x_peak]
    return [two_level_record(K, M, x, alpha, N) for x in roots]


def count_D(K: int, M: int, alpha: float) -> int:
    """Number of two-level equilibria on the (K, M) branch (0, 1 or 2).

    Case split by the shape of the branch function; thresholds are
    beta_M = 2/(M-1) and, for 3 <= K < M/2, the peak value beta_{K,M}.
    """
    BranchConstants(K, M)
    beta = (alpha - 1.0) / alpha
    beta_M = 2.0 / (M - 1)
    if beta <= 0.0:
        return 0
    if K in (1, 2):
        return 0 if beta <= beta_M else 1
    if K >= M / 2:
        # decreasing branch: the root escapes to x = 0 (p = 1, the uniform
        # measure itself) exactly at beta = beta_M, so equality counts zero
        return 1 if beta < beta_M else 0
    if beta <= beta_M:
        return 1
    beta_KM = beta_threshold(K, M).beta_KM
    if beta < beta_KM - MARGINAL_TOL:
        return 2
    if beta <= beta_KM + MARGINAL_TOL:
        return 1
    return 0


def enumerate_equilibria(N: int, alpha: float) -> list[EquilibriumRecord]:
    """Canonical representatives of all equilibria on N vertices.

    Uniform measures on supports of size 3..N, plus (for alpha > 1) all
    two-level branch solutions over admissible (K, M).  Orbit counts give
    the size of each permutation class.
    """
    if N < 4:
        raise ValueError("need N >= 4")
    if alpha < 1:
        raise ValueError("reinforcement strength below 1 is out of scope")
    records = [uniform_record(K, N, alpha) for K in range(3, N + 1)]
    if alpha > 1.0:
        for M in range(4, N + 1):
            for K in range(1, M):
                records.extend(solve_branch_equilibria(K, M, alpha, N))
    return records


# ---------------------------------------------------------------------------
# Differential of the field at an equilibrium
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DFMatrices:
    """DF(v) restricted to the zero-sum tangent space.

    ``basis`` holds the tangent basis as columns: differences e_i - e_j
    within the support, then e_i - v for vertices off the support.
    ``ambient`` holds the image of each basis vector in R^N; ``reduced`` is
    the (N-1) x (N-1) coordinate matrix of the operator in that basis.
    """

    basis: np.ndarray
    ambient: np.ndarray
    reduced: np.ndarray


def _tangent_basis(vec: np.ndarray) -> np.ndarray:
    n = vec.size
    sup = support(vec)
    cols = []
    s0 = sup[0]
    for sk in sup[1:]:
        e = np.zeros(n)
        e[s0], e[sk] = 1.0, -1.0
        cols.append(e)
    for i in range(n):
        if i not in set(sup.tolist()):
            e = -vec.copy()
            e[i] += 1.0
            cols.append(e)
    return np.column_stack(cols)


def differential_DF(record: EquilibriumRecord, alpha: Optional[float] = None) -> DFMatrices:
    """Closed-form differential of the field at an equilibrium.

    On the support, for alpha > 1,

        D_{e_i - e_j} F(v) = (alpha-1)(e_i - e_j)
            + (2 alpha / H) sum_k v_k^alpha (v_i^{alpha-1} H_{i,k}
                                             - v_j^{alpha-1} H_{j,k}) e_k,

    and off the support D_{e_i - v} F(v) = -(e_i - v).  For alpha = 1 (only
    uniform equilibria exist) the support block is the scalar -2/(K-1) and
    off-support directions carry +2/(K-2).  These formulas use the
    equilibrium identity v_i^{alpha-1} H_i(v) = H(v) on the support and are
    invalid elsewhere.
    """
    alpha = record.alpha if alpha is None else alpha
    vec = record.vector
    _check_residual(vec, alpha)
    n = vec.size
    sup = support(vec)
    m = sup.size
    B = _tangent_basis(vec)
    H, Hi, Hij = h_functions(vec, alpha)
    w = vec**alpha
    w1 = np.where(vec > 0, vec ** (alpha - 1.0), 0.0 if alpha > 1 else 1.0)
    cols = []
    if alpha == 1.0:
        K = m
        for k in range(1, m):
            cols.append(-2.0 / (K - 1) * B[:, k - 1])
        for k in range(m - 1, n - 1):
            cols.append(2.0 / (K - 2) * B[:, k])
    else:
        s0 = sup[0]
        for sk in sup[1:]:
            base = np.zeros(n)
            base[s0], base[sk] = alpha - 1.0, -(alpha - 1.0)
            corr = (2.0 * alpha / H) * w * (w1[s0] * Hij[s0, :] - w1[sk] * Hij[sk, :])
            cols.append(base + corr)
        for k in range(m - 1, n - 1):
            cols.append(-B[:, k])
    amb = np.column_stack(cols)
    red = np.linalg.lstsq(B, amb, rcond=None)[0]
    return DFMatrices(basis=B, ambient=amb, reduced=red)


def _support_block_spectrum(record: EquilibriumRecord) -> np.ndarray:
    """Real spectrum of DF restricted to zero-sum support directions.

    The operator is self-adjoint for <f,g> = sum f_i g_i / v_i, so the
    similarity by diag(v^(-1/2)) is symmetric; its extra mode along sqrt(v)
    has eigenvalue 3 alpha - 1 and does not belong to the tangent space.
    """
    alpha = record.alpha
    vec = record.vector
    sup = support(vec)
    vs = vec[sup]
    H, _, Hij = h_functions(vec, alpha)
    Hs = Hij[np.ix_(sup, sup)]
    ws = vs ** (alpha - 0.5)
    W = (alpha - 1.0) * np.eye(sup.size) + (2.0 * alpha / H) * np.outer(ws, ws) * Hs
    evals, evecs = np.linalg.eigh(W)
    z = np.sqrt(vs)
    z /= np.linalg.norm(z)
    overlaps = np.abs(evecs.T @ z)
    k_spur = int(np.argmax(overlaps))
    spur = evals[k_spur]
    if abs(spur - (3.0 * alpha - 1.0)) > 1e-6 * max(1.0, abs(spur)):
        raise RuntimeError(
            f"spurious mode check failed: got {spur:.6f}, expected {3 * alpha - 1:.6f}"
        )
    return np.delete(evals, k_spur)


@dataclass(frozen=True)
class EigenvalueGroup:
    value: float
    multiplicity: int
    description: str


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: tuple[EigenvalueGroup, ...]
    classification: str  # "stable" | "unstable" | "marginal"
    max_eigenvalue: float
    low_block_factor: Optional[float] = None

    def all_values(self) -> np.ndarray:
        out = []
        for g in self.eigenvalues:
            out.extend([g.value] * g.multiplicity)
        return np.array(sorted(out))


def low_block_factor(record: EquilibriumRecord) -> float:
    """Quadratic low-block eigenvalue factor of a two-level equilibrium.

    lambda(v) = beta K(K-1) x^2 + 2K [beta(M-2) - 1] x + (M-2)[beta(M-1) - 2];
    the eigenvalue shared by low-coordinate difference directions equals
    alpha b^{2 alpha} lambda(v) / H_i(v) for low i, so the signs agree.
    """
    if record.kind != "two_level":
        raise ValueError("low-block factor is defined for two-level records")
    K, M, x, beta = record.K, record.M, record.x, record.beta
    return (
        beta * K * (K - 1) * x * x
        + 2.0 * K * (beta * (M - 2) - 1.0) * x
        + (M - 2) * (beta * (M - 1) - 2.0)
    )


def _group(values: np.ndarray, description: str, tol: float = 1e-8):
    groups = []
    for val in np.sort(values):
        if groups and abs(val - groups[-1][0] / groups[-1][1]) <= tol:
            tot, cnt = groups[-1]
            groups[-1] = (tot + val, cnt + 1)
        else:
            groups.append((val, 1))
    return [EigenvalueGroup(tot / cnt, cnt, description) for tot, cnt in groups]


def classify_stability(record: EquilibriumRecord, N: Optional[int] = None) -> StabilityReport:
    """Spectrum of DF at the equilibrium with stable/unstable classification.

    Stable means every eigenvalue below -tol, unstable means some eigenvalue
    above +tol; anything with a deciding eigenvalue within 1e-9 of zero is
    reported marginal rather than silently classified.
    """
    alpha = record.alpha
    vec = record.vector
    n = vec.size if N is None else N
    m = support(vec).size
    groups: list[EigenvalueGroup] = []
    if alpha == 1.0:
        K = m
        groups.extend(_group(np.full(K - 1, -2.0 / (K - 1)), "support differences"))
        if n > K:
            groups.extend(_group(np.full(n - K, 2.0 / (K - 2)), "off-support directions"))
    else:
        sup_evals = _support_block_spectrum(record)
        groups.extend(_group(sup_evals, "support differences"))
        if n > m:
            groups.extend(_group(np.full(n - m, -1.0), "off-support directions"))
    all_vals = np.concatenate([[g.value] * g.multiplicity for g in groups])
    vmax = float(all_vals.max())
    if vmax > MARGINAL_TOL:
        cls = "unstable"
    elif vmax < -MARGINAL_TOL:
        cls = "stable"
    else:
        cls = "marginal"
    lam = low_block_factor(record) if record.kind == "two_level" else None
    return StabilityReport(
        eigenvalues=tuple(groups),
        classification=cls,
        max_eigenvalue=vmax,
        low_block_factor=lam,
    )


# ---------------------------------------------------------------------------
# Coboundary obstruction at unstable equilibria
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoboundaryResult:
    obstructed: bool
    residual: float
    constant: float
    potential: np.ndarray  # g over the support, minimum-norm representative


def coboundary_check(record: EquilibriumRecord, f: np.ndarray, tol: float = 1e-10) -> CoboundaryResult:
    """Least-squares fit of Vf(i,j) = C + g(i) - g(j) over support edges.

    Since the reinforcement matrix maps an edge to its head, Vf(i,j) = f(j),
    and a solution exists iff f is constant on the support.  A positive
    residual certifies the obstruction required for the non-convergence
    argument at unstable equilibria.
    """
    f = np.asarray(f, dtype=float)
    sup = support(record.vector)
    m = sup.size
    rows = []
    rhs = []
    for ii in range(m):
        for jj in range(m):
            if ii == jj:
                continue
            row = np.zeros(1 + m)
            row[0] = 1.0
            row[1 + ii] += 1.0
            row[1 + jj] -= 1.0
            rows.append(row)
            rhs.append(f[sup[jj]])
    A = np.array(rows)
    b = np.array(rhs)
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    residual = float(np.linalg.norm(A @ sol - b))
    scale = max(1.0, float(np.abs(b).max()))
    return CoboundaryResult(
        obstructed=residual > tol * scale,
        residual=residual,
        constant=float(sol[0]),
        potential=sol[1:],
    )
