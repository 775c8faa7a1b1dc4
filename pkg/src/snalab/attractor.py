"""Invariant graphs by pullback iteration, and the exponents on them.

The attracting graph is reached by iterating the fibre maps forward along
orbits that *end* on the evaluation grid: the value at theta after depth m
is f^m applied to a constant seed placed at theta - m*omega. The repelling
graph is the attracting graph of the inverse system, whose fibre over
theta is (f_{theta-omega})^{-1}, so its pullback walks the rotation
forward instead.

Residuals measure the invariance defect d(f_theta(phi(theta)),
phi(theta+omega)) where the value at theta+omega comes from a second
same-depth pullback run, never from interpolating the first one. This
defect equals the depth-(m-1) to depth-m increment, so it decays at the
contraction rate in converging regimes and stays O(1) in neutral ones,
which is exactly what the non-convergence flag needs. (For a rigid
translation the defect is the translation step itself: honest, since the
pullback limit does not exist there.)
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .circle import circle_dist, lift_half, wrap
from .families import CircleMapFamily, FamilyKind

__all__ = [
    "Direction",
    "InvariantGraphSample",
    "LyapunovEstimate",
    "pullback_graph",
    "pullback_values",
    "lyapunov_of_graph",
    "birkhoff_lyapunov",
    "birkhoff_blocks",
    "rotation_number",
]

RESIDUAL_FLAG_P50 = 1e-4
_TILE = 4096
_TWO_PI = 2.0 * math.pi


class Direction(Enum):
    ATTRACTOR = "attractor"
    REPELLER = "repeller"


@dataclass(frozen=True)
class InvariantGraphSample:
    grid_size: int
    theta: np.ndarray
    phi: np.ndarray
    residuals: np.ndarray
    pullback_depth: int
    residual_p50: float
    residual_p90: float
    residual_max: float
    direction: Direction
    seed_x: float

    @property
    def converged(self) -> bool:
        """False signals the pullback has not settled (depth too small or
        the exponent is too close to zero)."""
        return self.residual_p50 <= RESIDUAL_FLAG_P50


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    n_samples: int
    std_error: float


def _pullback_run(family: CircleMapFamily, direction: Direction,
                  thetas: np.ndarray, depth: int, seed_x: float,
                  extra: int = 0) -> np.ndarray:
    om = family.omega
    x = np.full(thetas.shape, float(seed_x))
    for j in range(depth, 0, -1):
        if direction is Direction.ATTRACTOR:
            coeff = -j + extra
            ang = wrap(thetas + om.multiple(coeff))
            x = family.fiber_map(ang, x)
        else:
            coeff = j - 1 + extra
            ang = wrap(thetas + om.multiple(coeff))
            x = family.fiber_inverse(ang, x)
    return x


def pullback_values(family: CircleMapFamily, direction: Direction,
                    thetas: np.ndarray, depth: int,
                    seed_x: float) -> np.ndarray:
    """Graph values at arbitrary angles by a fresh depth-`depth` pullback.

    This is the sanctioned way to evaluate the graph off its stored grid:
    the sampled graph of a non-continuous attractor must never be
    interpolated, so callers recompute instead.
    """
    thetas = np.asarray(thetas, dtype=float)
    return _pullback_run(family, direction, thetas, depth, seed_x)


def _pullback_pair(family: CircleMapFamily, direction: Direction,
                   thetas: np.ndarray, depth: int, seed_x: float):
    """Pullback values at thetas and at thetas+omega, both depth `depth`."""
    return (_pullback_run(family, direction, thetas, depth, seed_x, extra=0),
            _pullback_run(family, direction, thetas, depth, seed_x, extra=1))


def pullback_graph(family: CircleMapFamily, direction: Direction,
                   grid_size: int, depth: int, seed_x: float,
                   workers: int = 1) -> InvariantGraphSample:
    """Sample the attracting (or repelling) graph on a uniform grid.

    Work splits over fixed 4096-point grid tiles; the result is identical
    for any worker count because every tile computes the same float
    sequence and reductions happen only on the assembled arrays.
    """
    if grid_size < 256:
        raise ValueError("grid_size must be at least 256")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    thetas = np.arange(grid_size) / grid_size
    tiles = [(i, min(i + _TILE, grid_size)) for i in range(0, grid_size, _TILE)]
    phi = np.empty(grid_size)
    phi_up = np.empty(grid_size)
    if workers > 1 and len(tiles) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [
                (a, b, pool.submit(_pullback_pair, family, direction,
                                   thetas[a:b], depth, seed_x))
                for a, b in tiles
            ]
            for a, b, fut in futs:
                phi[a:b], phi_up[a:b] = fut.result()
    else:
        for a, b in tiles:
            phi[a:b], phi_up[a:b] = _pullback_pair(
                family, direction, thetas[a:b], depth, seed_x)
    residuals = circle_dist(family.fiber_map(thetas, phi), phi_up)
    return InvariantGraphSample(
        grid_size=grid_size,
        theta=thetas,
        phi=phi,
        residuals=residuals,
        pullback_depth=depth,
        residual_p50=float(np.median(residuals)),
        residual_p90=float(np.percentile(residuals, 90)),
        residual_max=float(residuals.max()),
        direction=direction,
        seed_x=float(seed_x),
    )


def lyapunov_of_graph(family: CircleMapFamily, graph: InvariantGraphSample,
                      inverse: bool = False) -> LyapunovEstimate:
    """Average of log|d_x f| over the sampled graph.

    With inverse=True the fibre maps of the inverse system are used
    instead: their derivative at (theta, x) is 1/f'_{theta-omega} evaluated
    at the preimage, so a repelling graph fed back in with inverse=True
    estimates minus its own expansion rate.
    """
    if not graph.converged:
        raise ValueError(
            f"graph residual_p50 {graph.residual_p50:.3g} exceeds "
            f"{RESIDUAL_FLAG_P50:g}; deepen the pullback first")
    if inverse:
        prev = wrap(graph.theta + family.omega.multiple(-1))
        x_pre = family.fiber_inverse(prev, graph.phi)
        logs = -np.log(family.fiber_derivative(prev, x_pre))
    else:
        logs = np.log(family.fiber_derivative(graph.theta, graph.phi))
    n = logs.size
    nblk = 32
    block = n // nblk
    means = logs[: nblk * block].reshape(nblk, block).mean(axis=1)
    return LyapunovEstimate(
        value=float(logs.mean()),
        n_samples=n,
        std_error=float(means.std(ddof=1) / math.sqrt(nblk)),
    )


# ---------------------------------------------------------------------------
# single-orbit accumulators
# ---------------------------------------------------------------------------
#
# These run n >= 1e6 sequential steps, so each family kind gets a plain
# Python loop over scalars with the forcing values precomputed as one
# vector. The generic fallback goes through the family methods and is an
# order of magnitude slower; only arctan kinds with q != 2 take it.

def _orbit_sums(family: CircleMapFamily, theta0: float, x0: float, n: int):
    thetas = family.omega.rotations(n, theta0)
    v = family.forcing_value(thetas)
    if np.ndim(v) == 0:
        v = np.full(n, float(v))
    tau = family.tau
    x = float(x0)
    log_sum = 0.0
    disp_sum = 0.0
    k = family.kind
    if k is FamilyKind.RIGID:
        disp_sum = n * tau + float(v.sum())
        return 0.0, disp_sum / n, (x + disp_sum) % 1.0
    if k is FamilyKind.ARCTAN and family.q == 2:
        al = family.alpha
        norm = family._norm
        atan, ceil, log = math.atan, math.ceil, math.log
        for i in range(n):
            r = x - ceil(x - 0.5)
            core = atan(al * r) / norm
            log_sum += log(al / ((1.0 + (al * r) ** 2) * norm))
            disp_sum += core - r + v[i] + tau
            x = (core + v[i] + tau) % 1.0
        return log_sum / n, disp_sum / n, x
    if k is FamilyKind.DRIVEN_ARNOLD:
        al = family.alpha
        sin, cos, log = math.sin, math.cos, math.log
        c = al / _TWO_PI
        for i in range(n):
            step = tau + c * sin(_TWO_PI * x) + v[i]
            log_sum += log(1.0 + al * cos(_TWO_PI * x))
            disp_sum += step
            x = (x + step) % 1.0
        return log_sum / n, disp_sum / n, x
    if k is FamilyKind.PROJECTIVE:
        al = family.alpha
        pi = math.pi
        sin, cos, atan2, log, ceil = (math.sin, math.cos, math.atan2,
                                      math.log, math.ceil)
        for i in range(n):
            kturn = ceil(x - 0.5)
            r = pi * (x - kturn)
            base = kturn * pi + atan2(sin(r) / al, al * cos(r))
            lift = (base + v[i] + tau) / pi
            cs, sn = al * cos(pi * x), sin(pi * x) / al
            log_sum += -log(cs * cs + sn * sn)
            disp_sum += lift - x
            x = lift % 1.0
        return log_sum / n, disp_sum / n, x
    # generic (arctan with q != 2)
    for i in range(n):
        th = float(thetas[i])
        lift = family.fiber_lift(th, x)
        log_sum += math.log(family.fiber_derivative(th, x))
        disp_sum += lift - x
        x = lift % 1.0
    return log_sum / n, disp_sum / n, x


def birkhoff_lyapunov(family: CircleMapFamily, theta0: float, x0: float,
                      n: int) -> float:
    """Time average of log|d_x f| along the orbit of (theta0, x0)."""
    if n < 1000:
        raise ValueError("n must be at least 1000")
    log_mean, _, _ = _orbit_sums(family, theta0, x0, n)
    return log_mean


def rotation_number(family: CircleMapFamily, theta0: float, x0: float,
                    n: int) -> float:
    """(lift^n(x0) - x0)/n along the driven orbit."""
    if n < 1000:
        raise ValueError("n must be at least 1000")
    _, disp_mean, _ = _orbit_sums(family, theta0, x0, n)
    return disp_mean


def birkhoff_blocks(family: CircleMapFamily, theta0: float, x0: float,
                    n: int, nblk: int = 32) -> LyapunovEstimate:
    """Single-orbit exponent with a block-mean standard error.

    The orbit is one continuous run of nblk consecutive chunks (the
    fiber state carries over); n is truncated to a multiple of nblk so
    every block weighs the same. The error bar treats block means as
    independent, which undercounts correlations shorter than a block.
    """
    if n < 1000 * nblk:
        raise ValueError(f"n must be at least {1000 * nblk}")
    block = n // nblk
    means = np.empty(nblk)
    x = float(x0)
    for b in range(nblk):
        th = wrap(theta0 + family.omega.multiple(b * block))
        means[b], _, x = _orbit_sums(family, th, x, block)
    return LyapunovEstimate(
        value=float(means.mean()),
        n_samples=block * nblk,
        std_error=float(means.std(ddof=1) / math.sqrt(nblk)),
    )
