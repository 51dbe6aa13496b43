import numpy as np
import pytest

from vrnbw.measures import SIGMA_GAP, uniform_on


def shrink_into_sigma(w: np.ndarray, margin: float = 0.999) -> np.ndarray:
    """Pull a probability vector toward the barycenter until it lies in Sigma."""
    n = w.size
    u = np.full(n, 1.0 / n)
    span = w.max() - w.min()
    if span > margin * SIGMA_GAP:
        w = u + (w - u) * (margin * SIGMA_GAP / span)
    return w


def random_interior_sigma(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random point of the interior of Sigma (all coordinates positive)."""
    return shrink_into_sigma(rng.dirichlet(np.ones(n)), margin=0.98)


def random_sigma_point(rng: np.random.Generator, n: int) -> np.ndarray:
    return shrink_into_sigma(rng.dirichlet(np.ones(n)))


def random_affine_point(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    """Random signed measure with coordinate sum exactly 1."""
    v = rng.normal(0.0, scale, n)
    return v - (v.sum() - 1.0) / n


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
