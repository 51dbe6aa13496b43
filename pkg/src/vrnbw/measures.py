"""Finite measures, the constrained simplex, and the exact retraction onto it.

Measures on {0..N-1} are plain float arrays.  A probability measure is a
nonnegative vector summing to one; a signed measure is any vector, with its
coordinate sum playing the role of total mass (0 for tangent vectors, 1 for
affine points).

The invariant region of the occupation measure of a non-backtracking walk is

    Sigma = { v in the simplex : max(v) <= 1/3 + min(v) }

No vertex can absorb more than a third of the visits beyond the smallest
occupation, so the walk's normalized visit counts never leave this set.  The
mean-field vector field is defined on the whole affine hyperplane through the
retraction ``project_to_sigma``, the Euclidean-closest point of Sigma.  The
projection here is exact (piecewise-linear parametric solve, not iterative),
because it feeds the flow integrator.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Width of the max-min band defining Sigma.
SIGMA_GAP = 1.0 / 3.0

#: Absolute tolerance on coordinate sums of probability measures.
SUM_TOL = 1e-12

#: Coordinates above this threshold count as support; below is float dust.
SUPPORT_TOL = 1e-14


def uniform_on(subset, dim: int) -> np.ndarray:
    """Uniform probability measure on ``subset`` of {0..dim-1}.

    Weight 1/|subset| on each member, 0 elsewhere.  A singleton gives a
    point mass.
    """
    subset = sorted(set(int(i) for i in subset))
    if not subset:
        raise ValueError("uniform measure on the empty set is undefined")
    if subset[0] < 0 or subset[-1] >= dim:
        raise ValueError(f"subset {subset} not contained in 0..{dim - 1}")
    v = np.zeros(dim)
    v[subset] = 1.0 / len(subset)
    return v


def support(v: np.ndarray, tol: float = SUPPORT_TOL) -> np.ndarray:
    """Indices carrying mass above ``tol``."""
    return np.flatnonzero(np.asarray(v) > tol)


def is_probability(v: np.ndarray, tol: float = SUM_TOL) -> bool:
    v = np.asarray(v, dtype=float)
    return bool(v.min() >= -tol and abs(v.sum() - 1.0) <= tol)


def coordinate_sum(v: np.ndarray) -> float:
    """Total mass of a signed measure."""
    return float(np.asarray(v, dtype=float).sum())


@dataclass(frozen=True)
class SigmaMembership:
    contained: bool
    interior: bool

    @property
    def boundary(self) -> bool:
        return self.contained and not self.interior


class Sigma:
    """The constrained simplex {v in Delta : max(v) <= gap + min(v)}.

    The boundary consists of measures with a saturated band (max - min = gap)
    or with at least one zero coordinate.  Interior measures have support of
    size >= 4 when gap = 1/3.
    """

    def __init__(self, dim: int, gap: float = SIGMA_GAP):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = int(dim)
        self.gap = float(gap)

    def membership(self, v: np.ndarray, tol: float = SUM_TOL) -> SigmaMembership:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError(f"expected shape ({self.dim},), got {v.shape}")
        if not is_probability(v, tol):
            return SigmaMembership(False, False)
        vmax, vmin = float(v.max()), float(v.min())
        contained = vmax <= self.gap + vmin + tol
        interior = contained and vmax < self.gap + vmin - tol and vmin > SUPPORT_TOL
        return SigmaMembership(contained, interior)

    def contains(self, v: np.ndarray, tol: float = SUM_TOL) -> bool:
        return self.membership(v, tol).contained


def in_sigma(v: np.ndarray, gap: float = SIGMA_GAP) -> SigmaMembership:
    """Membership and interior/boundary flag of v in Sigma."""
    return Sigma(len(np.asarray(v)), gap).membership(v)


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sorted-threshold method)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = idx[u - css / idx > 0][-1]
    tau = css[rho - 1] / rho
    return np.maximum(v - tau, 0.0)


def _piecewise_linear_root(breaks: np.ndarray, fn, target: float) -> float:
    """Root of a nondecreasing piecewise-linear function with the given breakpoints.

    Exact up to float arithmetic: bracket on the breakpoint grid, then
    interpolate linearly inside the bracketing segment.
    """
    bs = np.unique(breaks)
    lo, hi = bs[0] - 1.0, bs[-1] + 1.0
    while fn(lo) > target:
        lo -= 2 * (hi - lo)
    while fn(hi) < target:
        hi += 2 * (hi - lo)
    pts = np.concatenate(([lo], bs[(bs > lo) & (bs < hi)], [hi]))
    vals = np.array([fn(p) for p in pts])
    k = int(np.searchsorted(vals, target, side="left"))
    if k == 0:
        return float(pts[0])
    a, b, fa, fb = pts[k - 1], pts[k], vals[k - 1], vals[k]
    if fb == fa:
        return float(a)
    return float(a + (target - fa) * (b - a) / (fb - fa))


def project_to_sigma(v: np.ndarray, gap: float = SIGMA_GAP) -> np.ndarray:
    """Euclidean-closest point of Sigma; identity on Sigma itself.

    Input must sum to 1 (an affine point); any coordinate signs are allowed.
    The KKT system of the projection QP has three regimes, each solvable in
    closed form because Sigma is permutation-invariant:

    * band slack: plain simplex projection,
    * band tight with positive floor: a mass-preserving double clamp
      clip(v, f, f + gap) with no global shift,
    * band tight with floor at zero: clip(v - tau, 0, gap) with tau >= 0.

    The floor f and shift tau are roots of monotone piecewise-linear
    functions, located exactly on their breakpoint grids.
    """
    v = np.asarray(v, dtype=float)
    if abs(v.sum() - 1.0) > 1e-9:
        raise ValueError(f"projection input must sum to 1, got {v.sum()!r}")
    p = project_to_simplex(v)
    if p.max() - p.min() <= gap + 1e-15:
        return p
    breaks = np.concatenate([v, v - gap])
    f = _piecewise_linear_root(breaks, lambda f: np.clip(v, f, f + gap).sum(), 1.0)
    if f >= 0.0:
        return np.clip(v, f, f + gap)
    t = _piecewise_linear_root(breaks, lambda t: -np.clip(v - t, 0.0, gap).sum(), -1.0)
    return np.clip(v - t, 0.0, gap)


def _project_band(v: np.ndarray, gap: float) -> np.ndarray:
    # projection onto {x : max(x) - min(x) <= gap} alone (no simplex constraint);
    # double clamp with the floor balancing push-up against push-down mass
    v = np.asarray(v, dtype=float)
    if v.max() - v.min() <= gap:
        return v.copy()
    breaks = np.concatenate([v, v - gap])

    def imbalance(m):
        return np.maximum(m - v, 0.0).sum() - np.maximum(v - m - gap, 0.0).sum()

    m = _piecewise_linear_root(breaks, imbalance, 0.0)
    return np.clip(v, m, m + gap)


def dykstra_project_to_sigma(
    v: np.ndarray, gap: float = SIGMA_GAP, iters: int = 500
) -> np.ndarray:
    """Dykstra alternating projections between the simplex and the band.

    Converges to the exact Sigma projection; kept as an independent
    cross-check oracle for ``project_to_sigma``.
    """
    x = np.asarray(v, dtype=float).copy()
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for _ in range(iters):
        y = project_to_simplex(x + p)
        p = x + p - y
        x = _project_band(y + q, gap)
        q = y + q - x
    return x
