"""Mean-field dynamics of the occupation measure.

The slow variable of the walk follows, in the ODE-method sense, the field

    F(v) = -v + piV(mu(v))

where mu is the exact retraction onto the constrained simplex and piV the
stationary vertex measure of the edge kernel.  H(v) = sum over ordered
triples of distinct vertices of v_i^a v_j^a v_k^a is a strict Lyapunov
function: it increases strictly along every non-equilibrium trajectory, with

    <grad H(v), F(v)> = (3 a / H(v)) (v h^2 - (v h)^2),   h_i = v_i^{a-1} H_i(v).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .kernels import h_functions, stationary_vertex
from .measures import in_sigma, project_to_sigma

logger = logging.getLogger(__name__)


def lyapunov_components(v: np.ndarray, alpha: float):
    """Consistent triple (H, H_i, H_{i,j}); defined on all of R^N_{>=0}."""
    return h_functions(v, alpha)


def lyapunov(v: np.ndarray, alpha: float) -> float:
    """H(v): zero iff the support has fewer than three points."""
    H, _, _ = h_functions(v, alpha)
    return H


def lyapunov_gradient(v: np.ndarray, alpha: float) -> np.ndarray:
    """Closed-form gradient, d_i H = 3 alpha v_i^{alpha-1} H_i(v).

    At alpha = 1 the prefactor v_i^0 is 1 even at v_i = 0.  Below alpha = 1
    the gradient blows up on the boundary and is out of scope.
    """
    v = np.asarray(v, dtype=float)
    if alpha < 1.0 and np.any(v <= 0.0):
        raise ValueError("gradient undefined at zero coordinates for alpha < 1")
    _, Hi, _ = h_functions(v, alpha)
    return 3.0 * alpha * v ** (alpha - 1.0) * Hi


def vector_field(v: np.ndarray, alpha: float) -> np.ndarray:
    """F(v) = -v + piV(mu(v)) on the affine hyperplane of unit coordinate sum.

    The retraction makes the stationary formula safe everywhere (projected
    points lie in Sigma, where H > 0), including at the three-point corners
    where the edge kernel itself degenerates.  Output sums to zero.
    """
    v = np.asarray(v, dtype=float)
    mu = v if in_sigma(v).contained else project_to_sigma(v)
    return -v + stationary_vertex(mu, alpha)


@dataclass
class FlowConfig:
    step_size: float = 1e-2
    integrator: str = "rk4"  # "rk4" | "euler"
    max_time: float = 50.0
    equilibrium_tolerance: float = 1e-10
    record_every: int = 1
    sum_drift_tolerance: float = 1e-9

    def __post_init__(self):
        if self.step_size <= 0 or self.equilibrium_tolerance <= 0:
            raise ValueError("step_size and equilibrium_tolerance must be positive")
        if self.integrator not in ("rk4", "euler"):
            raise ValueError(f"unknown integrator {self.integrator!r}")


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), N)
    lyapunov_values: np.ndarray
    field_norms: np.ndarray
    converged: bool
    renormalizations: int = 0

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def _rk4_step(v, h, f):
    k1 = f(v)
    k2 = f(v + 0.5 * h * k1)
    k3 = f(v + 0.5 * h * k2)
    k4 = f(v + h * k3)
    return v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_flow(v0: np.ndarray, alpha: float, config: FlowConfig | None = None) -> TrajectoryRecord:
    """Fixed-step integration of the mean-field flow from v0.

    Stops at max_time or when the sup norm of the field drops below the
    equilibrium tolerance.  The coordinate sum is conserved by the field; if
    float drift exceeds the configured tolerance the state is renormalized
    and the event counted.
    """
    cfg = config or FlowConfig()
    v = np.asarray(v0, dtype=float).copy()
    if abs(v.sum() - 1.0) > 1e-9:
        raise ValueError("initial state must sum to 1")
    f = lambda x: vector_field(x, alpha)
    stepper = _rk4_step if cfg.integrator == "rk4" else (lambda v, h, f: v + h * f(v))
    n_steps = int(np.ceil(cfg.max_time / cfg.step_size))
    times = [0.0]
    states = [v.copy()]
    hs = [lyapunov(v, alpha)]
    fn = [float(np.abs(f(v)).max())]
    renorm = 0
    converged = fn[-1] < cfg.equilibrium_tolerance
    t = 0.0
    for k in range(1, n_steps + 1):
        if converged:
            break
        v = stepper(v, cfg.step_size, f)
        drift = abs(v.sum() - 1.0)
        if drift > cfg.sum_drift_tolerance:
            logger.warning("renormalizing state at t=%.3f, drift %.2e", t, drift)
            v /= v.sum()
            renorm += 1
        t = k * cfg.step_size
        fnorm = float(np.abs(f(v)).max())
        converged = fnorm < cfg.equilibrium_tolerance
        if k % cfg.record_every == 0 or converged or k == n_steps:
            times.append(t)
            states.append(v.copy())
            hs.append(lyapunov(v, alpha))
            fn.append(fnorm)
    return TrajectoryRecord(
        times=np.array(times),
        states=np.array(states),
        lyapunov_values=np.array(hs),
        field_norms=np.array(fn),
        converged=converged,
        renormalizations=renorm,
    )
