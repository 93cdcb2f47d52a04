import logging
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from apps.grid.models import Domain, Field
from apps.multiplicity.models import MountainPassResult
from config import MP_MAX_SWEEPS, MP_REDISTRIBUTE_EVERY, SRC_LOG_LEVELS

log = logging.getLogger(__name__)
log.setLevel(SRC_LOG_LEVELS["MULTIPLICITY"])

Energy = Callable[[np.ndarray], float]
Gradient = Callable[[np.ndarray], np.ndarray]

ARMIJO = 1e-4
MIN_STEP = 1e-12
CLIMB_XATOL = 1e-10


####################
# Paths
####################


def redistribute(path: np.ndarray, metric: np.ndarray, n_nodes: int | None = None) -> np.ndarray:
    """
    Re-places the nodes of a polygonal path at equal arclength in the metric
    x^T metric x, keeping both endpoints fixed.
    """
    n_nodes = n_nodes or path.shape[0]
    diffs = np.diff(path, axis=0)
    seg = np.sqrt(np.maximum(np.einsum("ij,ij->i", diffs @ metric, diffs), 0.0))
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    if arc[-1] <= 0.0:
        return np.linspace(0.0, 1.0, n_nodes)[:, None] * path[-1]

    targets = np.linspace(0.0, arc[-1], n_nodes)
    index = np.clip(np.searchsorted(arc, targets, side="right") - 1, 0, len(seg) - 1)
    weight = np.divide(
        targets - arc[index], seg[index], out=np.zeros_like(targets), where=seg[index] > 0.0
    )
    out = (1.0 - weight)[:, None] * path[index] + weight[:, None] * path[index + 1]
    out[0], out[-1] = path[0], path[-1]
    return out


def straight_path(endpoint: np.ndarray, n_nodes: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, n_nodes)[:, None] * endpoint[None, :]


def path_through(point: np.ndarray, endpoint: np.ndarray, metric: np.ndarray, n_nodes: int):
    """Polygon 0 -> point -> endpoint, resampled at equal arclength."""
    corners = np.stack([np.zeros_like(point), point, endpoint])
    return redistribute(corners, metric, n_nodes)


####################
# Deformation
####################


def _climb(
    path: np.ndarray, top: int, energy: Energy, metric: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """
    Moves the top node to the energy maximum on the line through it parallel
    to the chord between its neighbours, within one neighbour spacing.
    Returns the new node and the unit (metric) chord direction.
    """
    before, v, after = path[top - 1], path[top], path[top + 1]
    chord = after - before
    length = float(np.sqrt(max(chord @ (metric @ chord), 0.0)))
    if length <= 0.0:
        return v, np.zeros_like(v)
    tangent = chord / length

    def span(w):
        return float(np.sqrt(max(w @ (metric @ w), 0.0)))

    def negative(sigma):
        value = energy(v + sigma * tangent)
        return -value if np.isfinite(value) else np.inf

    lo, hi = -span(v - before), span(after - v)
    if hi - lo <= 0.0:
        return v, tangent
    found = minimize_scalar(
        negative, bounds=(lo, hi), method="bounded", options={"xatol": CLIMB_XATOL * (hi - lo)}
    )
    if found.success and -found.fun > energy(v):
        return v + found.x * tangent, tangent
    return v, tangent


def deform_path(
    domain: Domain,
    path: np.ndarray,
    energy: Energy,
    gradient: Gradient,
    precondition: Callable[[np.ndarray], np.ndarray],
    metric: np.ndarray,
    tol: float,
    max_sweeps: int = MP_MAX_SWEEPS,
    redistribute_every: int = MP_REDISTRIBUTE_EVERY,
) -> MountainPassResult:
    """
    Path deformation toward a mountain-pass point. Each sweep takes the
    highest interior node, lifts it to the energy maximum along the local
    chord of the path, then moves it one backtracked step along the
    preconditioned (Sobolev) descent direction with the chord component
    removed. Stops when the dual gradient norm at the highest node drops
    below tol (1 + |node|); `converged` is False when the step collapses or
    the sweep budget runs out.

    `precondition` must apply the inverse of `metric`, so that the chord
    component of the descent direction is (tangent . grad) tangent.
    """
    path = np.array(path, dtype=float)
    energies = np.array([energy(p) for p in path])
    steps = np.ones(path.shape[0])

    top, gnorm, converged, sweep = 1, np.inf, False, 0
    for sweep in range(1, max_sweeps + 1):
        top = 1 + int(np.argmax(energies[1:-1]))
        v, tangent = _climb(path, top, energy, metric)
        path[top], energies[top] = v, energy(v)

        grad = gradient(v)
        direction = precondition(grad)
        gnorm = float(np.sqrt(max(grad @ direction, 0.0)))
        scale = 1.0 + float(np.sqrt(max(v @ (metric @ v), 0.0)))
        if gnorm < tol * scale:
            converged = True
            break

        along = float(tangent @ grad)
        normal = direction - along * tangent
        decrease = gnorm**2 - along**2
        # a gradient along the chord is left to the next climb
        if decrease > (tol * scale) ** 2:
            t = steps[top]
            while t >= MIN_STEP:
                trial = v - t * normal
                e_trial = energy(trial)
                if np.isfinite(e_trial) and e_trial <= energies[top] - ARMIJO * t * decrease:
                    break
                t *= 0.5
            if t < MIN_STEP:
                log.warning(
                    f"path descent stalled at sweep {sweep}, node {top}, |grad|={gnorm:.3e}"
                )
                break
            path[top], energies[top] = trial, e_trial
            steps[top] = min(1.0, 2.0 * t)

        if sweep % redistribute_every == 0:
            path = redistribute(path, metric)
            energies = np.array([energy(p) for p in path])
            steps[:] = np.maximum(steps, 0.25)

        if sweep % 500 == 0:
            log.debug(f"sweep {sweep}: max energy {energies[top]:.10g}, |grad|={gnorm:.3e}")

    return MountainPassResult(
        critical_point=Field(values=path[top], domain=domain),
        path=path,
        energies=energies,
        sweeps=sweep,
        gradient_norm=gnorm,
        converged=converged,
    )
