from typing import Callable, Iterator

import numpy as np


def seeded_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def eps_schedule(eps0: float, ratio: float, floor: float) -> Iterator[float]:
    """
    Geometric schedule eps0, eps0*r, eps0*r^2, ... stopping at the first value
    not above `floor` (which is clamped to `floor` and yielded last).
    """
    if not (0.0 < ratio < 1.0):
        raise ValueError(f"eps ratio must lie in (0,1), got {ratio}")
    if eps0 <= 0.0 or floor <= 0.0:
        raise ValueError("eps0 and eps floor must be positive")

    eps = eps0
    while eps > floor:
        yield eps
        eps *= ratio
    yield floor


def gauss_jacobi_antiderivative(
    fn: Callable[[np.ndarray], np.ndarray], gamma: float, n_points: int = 32
) -> Callable[[np.ndarray], np.ndarray]:
    """
    Returns t -> int_0^t fn(tau) tau^(-gamma) dtau for t >= 0 (0 for t <= 0),
    vectorized over t. The singular weight is absorbed by Gauss-Jacobi nodes.
    """
    from scipy.special import roots_jacobi

    x, w = roots_jacobi(n_points, 0.0, -gamma)
    sigma = 0.5 * (1.0 + x)
    scale = 2.0 ** (gamma - 1.0)

    def antiderivative(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        tp = np.maximum(t, 0.0)
        inner = fn(tp[..., None] * sigma) @ w
        return np.where(t > 0.0, scale * tp ** (1.0 - gamma) * inner, 0.0)

    return antiderivative

