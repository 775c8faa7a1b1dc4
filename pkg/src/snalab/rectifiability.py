"""Orbit visit statistics, Lipschitz slope diagnostics, and dimension
estimators for sampled invariant graphs.

The quantities here measure how much of its time an orbit spends inside
the contracting arc away from the critical angles, and what that implies
for the regularity of the attracting graph. Conventions used throughout:

* A visit count over the step window [n, N) tallies steps whose fibre
  point lies in C while the base angle is outside the level-0 critical
  set.
* "Recent level" bookkeeping returns -1 when no stored level of the
  hierarchy was visited in the relevant lookback window (max over the
  empty set), and the step-length constant for level -1 is 0.
* Level-indexed lookups are truncated at the deepest level the hierarchy
  has actually computed. The pure index arithmetic of
  `deepest_admissible_level` is the exception: it extends the step
  sequence by its default growth rule, since no arc data is involved.
* Graph values off the stored grid are recomputed by a fresh pullback at
  the exact angle. Interpolation is never used: the graphs of interest
  are not continuous, so interpolated values would be meaningless.

Slope bounds are computed in arbitrary precision (mpmath): the closed
form contains a finite geometric sum whose top term is alpha^(2*start)
with start in the hundreds at desk scale, far beyond float64 range. The
bound is astronomically loose; its role is to be finite and explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import mpmath
import numpy as np

from .arcs import ArcSet
from .attractor import InvariantGraphSample, pullback_values
from .circle import Frequency, circle_dist, wrap
from .families import CircleMapFamily, ContractionExpansionData, FamilyKind
from .multiscale import ScaleHierarchy, entry_windows

__all__ = [
    "VisitStats",
    "VisitBoundRow",
    "VisitBoundReport",
    "LipschitzReport",
    "DimensionKind",
    "DimensionEstimate",
    "visit_counts",
    "suffix_visit_count",
    "deepest_recent_level",
    "deepest_admissible_level",
    "check_visit_bounds",
    "pair_visit_count",
    "slope_bound",
    "slope_bound_partial",
    "empirical_lipschitz",
    "fraction_outside",
    "ball_measure",
    "pointwise_dimension",
    "box_dimension",
]

M_EXTENSION_CAP = 10 ** 6

# Caveat attached to every dimension estimate; a grid sample cannot
# distinguish a graph defined almost everywhere from its closure.
GRAPH_CLOSURE_NOTE = ("estimates describe the sampled graph, which is "
                      "indistinguishable from its closure at grid resolution")


def _in_arc(vals, arc: tuple[float, float]):
    """Membership in the closed ccw arc [lo, hi]; vectorized."""
    lo, hi = arc
    return np.mod(np.asarray(vals, dtype=float) - lo, 1.0) \
        <= np.mod(hi - lo, 1.0)


# ---------------------------------------------------------------------------
# visit statistics along a single orbit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VisitStats:
    """Counts of contraction-region visits along one forward orbit.

    counts[n] is the number of steps l in [n, N) whose fibre point is in
    C while the base angle is outside the level-0 critical set. The
    orbit and the two per-step masks are kept so identities can be
    re-checked exactly after the fact.
    """

    theta0: float
    x0: float
    N: int
    counts: Mapping[int, int]
    in_C_mask: np.ndarray
    in_I0_mask: np.ndarray
    orbit_x: np.ndarray

    @property
    def qualifying(self) -> np.ndarray:
        return self.in_C_mask & ~self.in_I0_mask


def visit_counts(family: CircleMapFamily, data: ContractionExpansionData,
                 theta0: float, x0: float, N: int,
                 n_list: Sequence[int] | None = None) -> VisitStats:
    """Run one forward orbit of length N and tally contraction visits.

    Single sequential pass. The saturating family with the analytic
    inverse gets an inlined scalar loop (same arithmetic as the
    Birkhoff-average accumulators); everything else goes through the
    fibre map one step at a time. N is capped at 10^7 to keep the pass
    interactive.
    """
    if N < 0 or N > 10 ** 7:
        raise ValueError("N must be in [0, 1e7]")
    if data.C is None:
        raise ValueError("constants carry no contraction arc")
    theta0 = wrap(theta0)
    angles = family.omega.rotations(N, theta0)
    xs = np.empty(N)
    x = float(x0)
    if family.kind is FamilyKind.ARCTAN and family.q == 2 and N > 0:
        v = family.forcing_value(angles)
        if np.ndim(v) == 0:
            v = np.full(N, float(v))
        al, norm, tau = family.alpha, family._norm, family.tau
        atan, ceil = math.atan, math.ceil
        for i in range(N):
            xs[i] = x
            r = x - ceil(x - 0.5)
            x = (atan(al * r) / norm + v[i] + tau) % 1.0
    else:
        fiber = family.fiber_map
        for i in range(N):
            xs[i] = x
            x = fiber(float(angles[i]), x)
    in_C = _in_arc(xs, data.C)
    in_I0 = data.I0.contains(angles)
    suffix = np.concatenate((np.cumsum((in_C & ~in_I0)[::-1])[::-1], [0]))
    counts = {}
    for n in ([0] if n_list is None else n_list):
        if not 0 <= n <= N:
            raise ValueError(f"count index {n} outside [0, {N}]")
        counts[int(n)] = int(suffix[n])
    return VisitStats(theta0=theta0, x0=float(x0), N=N, counts=counts,
                      in_C_mask=in_C, in_I0_mask=in_I0, orbit_x=xs)


def suffix_visit_count(stats: VisitStats, n: int) -> int:
    """Visit count over [n, N) recomputed from the stored masks."""
    if not 0 <= n <= stats.N:
        raise ValueError(f"n={n} outside [0, {stats.N}]")
    return int(stats.qualifying[n:].sum())


# ---------------------------------------------------------------------------
# level bookkeeping for the lower-bound report
# ---------------------------------------------------------------------------

def deepest_recent_level(hierarchy: ScaleHierarchy, omega: Frequency,
                         theta: float, n: int, k: int) -> int:
    """Deepest stored level visited in the lookback window for (n, k).

    Level p qualifies when theta - l*omega lies inside level p for some
    integer l in [M_{p-1}, min(n, n-k+M_p+1)], where the level -1 step
    constant is 0. Returns -1 when no stored level qualifies.

    Reference implementation, one exact rotation per candidate l; the
    batched path inside `check_visit_bounds` must agree with it.
    """
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    best = -1
    for p in range(len(hierarchy.levels)):
        lev = hierarchy.level(p)
        if not lev:
            continue
        lo = hierarchy.M[p - 1] if p >= 1 else 0
        hi = min(n, n - k + hierarchy.M[p] + 1)
        if lo > hi:
            continue
        angs = wrap(theta + np.array(
            [omega.multiple(-l) for l in range(lo, hi + 1)]))
        if bool(lev.contains(angs).any()):
            best = p
    return best


def _level_visit_prefixes(hierarchy: ScaleHierarchy,
                          angles: np.ndarray) -> list[np.ndarray]:
    """Per stored level, prefix sums of membership along an orbit of
    angles, so any lookback window reduces to one subtraction."""
    prefs = []
    for p in range(len(hierarchy.levels)):
        mask = hierarchy.level(p).contains(angles)
        prefs.append(np.concatenate(([0], np.cumsum(mask))))
    return prefs


def _recent_level_batch(hierarchy: ScaleHierarchy,
                        prefs: list[np.ndarray], n: int, k: int) -> int:
    # angles[m] = theta0 + m*omega and theta_end - l*omega = angles[n-l],
    # so the l-window [lo, hi] is the m-window [n-hi, n-lo]
    best = -1
    for p in range(len(prefs)):
        lo = hierarchy.M[p - 1] if p >= 1 else 0
        hi = min(n, n - k + hierarchy.M[p] + 1)
        if lo > hi:
            continue
        if prefs[p][n - lo + 1] - prefs[p][n - hi] > 0:
            best = p
    return best


def deepest_admissible_level(hierarchy: ScaleHierarchy, n: int,
                             k: int) -> int:
    """Largest level index l with 2 K_l M_l - M_l - 1 <= n - k, else -1.

    Pure index arithmetic: beyond the stored levels the step sequence is
    extended by its default growth rule (floor of 2 alpha^(M/16), capped
    at 10^6), so the answer does not depend on truncation depth.
    """
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    gap = n - k
    M = list(hierarchy.M)
    log_cap = math.log(M_EXTENSION_CAP)
    best = -1
    l = 0
    while True:
        if l >= len(M):
            log_next = math.log(2.0) + M[-1] / 16.0 * math.log(hierarchy.alpha)
            if log_next >= log_cap:
                nxt = M_EXTENSION_CAP
            else:
                nxt = int(2.0 * hierarchy.alpha ** (M[-1] / 16.0))
            M.append(max(nxt, M[-1]))
        need = 2 * hierarchy.K(l) * M[l] - M[l] - 1
        if need > gap:
            return best
        best = l
        l += 1


@dataclass(frozen=True)
class VisitBoundRow:
    k: int
    count: int
    lower_bound: float
    bound_ok: bool
    fraction_ok: bool
    recent_level: int
    admissible_level: int


@dataclass(frozen=True)
class VisitBoundReport:
    admissible: bool
    reason: str
    n: int
    j: int
    rows: tuple[VisitBoundRow, ...]

    @property
    def all_bounds_ok(self) -> bool:
        return self.admissible and all(r.bound_ok for r in self.rows)

    @property
    def all_fractions_ok(self) -> bool:
        return self.admissible and all(r.fraction_ok for r in self.rows)

    @property
    def ordering_ok(self) -> bool:
        """admissible_level >= recent_level on every row."""
        return all(r.admissible_level >= r.recent_level for r in self.rows)


def check_visit_bounds(stats: VisitStats, hierarchy: ScaleHierarchy,
                       omega: Frequency, j: int = 1,
                       k_list: Sequence[int] | None = None,
                       max_rows: int = 256) -> VisitBoundReport:
    """Compare measured visit counts against the retention lower bounds.

    The orbit must start admissibly: fibre point in C, and base angle
    outside the truncated entry windows of the deepest recently visited
    level. A failed screening comes back as a non-admissible report, not
    an exception, so pipeline callers can record it.

    Each row covers one suffix start k and records the visit count over
    [k, N), the retention bound b_{p+1} (N - k - sum_{m<=p} (M_m + 2))
    with p the deepest recently visited level, the cruder b^2 (N - k)
    fraction test against the limit retention, and the admissible-level
    index. k ranges over [0, N - (2 K_{j-1} M_{j-1} - M_{j-1} - 1)],
    subsampled to at most max_rows evenly spaced values unless k_list
    says otherwise.
    """
    if j < 1 or j - 1 > hierarchy.n_max:
        raise ValueError("j must be in [1, n_max + 1]")
    n = stats.N
    if n == 0 or not bool(stats.in_C_mask[0]):
        return VisitBoundReport(False, "start not admissible: x0 outside C",
                                n, j, ())
    angles = omega.rotations(n + 1, stats.theta0)
    prefs = _level_visit_prefixes(hierarchy, angles)
    p0 = _recent_level_batch(hierarchy, prefs, n, 0)
    if p0 >= 0:
        zminus = entry_windows(hierarchy, omega, p0)
        if zminus and bool(zminus.contains(stats.theta0)):
            return VisitBoundReport(
                False, "start not admissible: theta0 inside entry windows",
                n, j, ())
    mj = hierarchy.M[j - 1]
    k_max = n - (2 * hierarchy.K(j - 1) * mj - mj - 1)
    if k_max < 0:
        return VisitBoundReport(
            False, f"orbit too short: horizon needs N >= {n - k_max}",
            n, j, ())
    if k_list is None:
        if k_max + 1 <= max_rows:
            k_list = range(k_max + 1)
        else:
            k_list = sorted({int(round(i * k_max / (max_rows - 1)))
                             for i in range(max_rows)})
    suffix = np.concatenate((np.cumsum(stats.qualifying[::-1])[::-1], [0]))
    b_lim = hierarchy.b_limit
    msum = np.cumsum([m + 2 for m in hierarchy.M])
    rows = []
    for k in k_list:
        if not 0 <= k <= k_max:
            raise ValueError(f"k={k} outside admissible range [0, {k_max}]")
        count = int(suffix[k])
        p = _recent_level_batch(hierarchy, prefs, n, k)
        overhead = int(msum[p]) if p >= 0 else 0
        bound = hierarchy.b_seq[p + 1] * (n - k - overhead)
        rows.append(VisitBoundRow(
            k=int(k), count=count, lower_bound=float(bound),
            bound_ok=count >= bound,
            fraction_ok=count > b_lim * b_lim * (n - k),
            recent_level=p,
            admissible_level=deepest_admissible_level(hierarchy, n, k)))
    return VisitBoundReport(True, "", n, j, tuple(rows))


# ---------------------------------------------------------------------------
# paired visits along two orbits
# ---------------------------------------------------------------------------

def pair_visit_count(family: CircleMapFamily, graph: InvariantGraphSample,
                     data: ContractionExpansionData, theta: float,
                     theta_prime: float, n: int) -> int:
    """Count of offsets m in [-1, n-1) where both graph points sit in C
    and both base angles avoid the level-0 critical set.

    The count is additive across consecutive windows by construction,
    and 0 <= count <= n always. Graph values at the shifted angles come
    from fresh pullbacks at the stored depth and seed, one vectorized
    run per orbit.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if data.C is None:
        raise ValueError("constants carry no contraction arc")
    if n == 0:
        return 0
    offs = np.array([family.omega.multiple(m) for m in range(-1, n - 1)])
    angs = wrap(theta + offs)
    angs_p = wrap(theta_prime + offs)
    phi = pullback_values(family, graph.direction, angs,
                          graph.pullback_depth, graph.seed_x)
    phi_p = pullback_values(family, graph.direction, angs_p,
                            graph.pullback_depth, graph.seed_x)
    ok = _in_arc(phi, data.C) & _in_arc(phi_p, data.C)
    ok &= ~data.I0.contains(angs) & ~data.I0.contains(angs_p)
    return int(ok.sum())


# ---------------------------------------------------------------------------
# Lipschitz slope bound and its empirical counterpart
# ---------------------------------------------------------------------------

def slope_bound(S: float, alpha: float, b: float, K_prev: int,
                M_prev: int) -> mpmath.mpf:
    """Closed-form Lipschitz constant for one piece of the stable set.

    With c0 = 6 b^2 - 5 and start = 2 K_prev M_prev - M_prev - 1:

        S * sum_{k >= start} alpha^(6 - c0 k)
      + S * sum_{0 <= k < start} alpha^(2 k)

    evaluated as exact geometric sums. Requires b^2 > 5/6 so the tail
    converges. The result is an mpmath float because the head sum
    overflows float64 whenever start exceeds a few hundred.
    """
    c0 = 6.0 * b * b - 5.0
    if c0 <= 0:
        raise ValueError(f"retention limit too small: 6 b^2 - 5 = {c0:.6g}")
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    if K_prev < 1 or M_prev < 1:
        raise ValueError("window parameters must be positive")
    start = 2 * K_prev * M_prev - M_prev - 1
    with mpmath.workdps(40):
        a = mpmath.mpf(alpha)
        r = a ** (-mpmath.mpf(c0))
        tail = mpmath.mpf(S) * a ** 6 * r ** start / (1 - r)
        head = mpmath.mpf(S) * (a ** (2 * start) - 1) / (a ** 2 - 1)
        return tail + head


def slope_bound_partial(S: float, alpha: float, b: float, K_prev: int,
                        M_prev: int, terms: int = 1000) -> mpmath.mpf:
    """Term-by-term partial summation of the same bound, for cross-checks.

    The infinite tail is truncated after `terms` terms; the truncation
    error is below the first dropped term over (1 - ratio), which for
    any sane (alpha, b) is far under a 1e-9 relative tolerance.
    """
    c0 = 6.0 * b * b - 5.0
    if c0 <= 0:
        raise ValueError(f"retention limit too small: 6 b^2 - 5 = {c0:.6g}")
    start = 2 * K_prev * M_prev - M_prev - 1
    with mpmath.workdps(40):
        a = mpmath.mpf(alpha)
        tail = mpmath.fsum(a ** (6 - mpmath.mpf(c0) * k)
                           for k in range(start, start + terms))
        head = mpmath.fsum(a ** (2 * k) for k in range(0, start))
        return mpmath.mpf(S) * (tail + head)


@dataclass(frozen=True)
class LipschitzReport:
    j: int
    pair_count: int
    max_slope: float
    L_j_bound: mpmath.mpf
    worst_pair: tuple[float, float]
    pair_dists: np.ndarray
    graph_dists: np.ndarray
    note: str = ""

    @property
    def slack(self):
        return self.L_j_bound - self.max_slope

    @property
    def within_bound(self) -> bool:
        return self.max_slope <= self.L_j_bound


def empirical_lipschitz(family: CircleMapFamily,
                        graph: InvariantGraphSample, region: ArcSet,
                        S: float, E_length: float, pair_budget: int,
                        j: int = 1, bound: mpmath.mpf | None = None,
                        seed: int = 0) -> LipschitzReport:
    """Sample close pairs inside `region` and report the worst graph slope.

    Pairs are drawn with separation at most E_length / (4 S), the range
    where the decomposition argument controls the increment; both graph
    values per pair come from fresh pullbacks at the stored depth. A
    sampled slope above the bound is reported through the fields, never
    raised: isolated violating pairs are expected on the measure-zero
    exceptional set, and deciding significance is the caller's job.

    `bound` is the closed-form constant to compare against (see
    `slope_bound`); without one the report carries +inf and the
    comparison is vacuous.
    """
    if not graph.converged:
        raise ValueError("graph residuals not converged; deepen the pullback")
    if not region:
        raise ValueError("empty sampling region")
    if pair_budget < 1:
        raise ValueError("pair_budget must be positive")
    cap = E_length / (4.0 * S)
    if cap <= 0:
        raise ValueError("pair separation cap must be positive")
    if bound is None:
        bound = mpmath.mpf("inf")
    rng = np.random.default_rng(seed)
    comps = region.arcs
    lefts = np.array([c[0] for c in comps])
    lengths = np.array([c[1] for c in comps])
    weights = lengths / lengths.sum()
    batch = max(2048, min(pair_budget, 1 << 16))
    thetas: list[float] = []
    thetas_p: list[float] = []
    for _ in range(64):
        if len(thetas) >= pair_budget:
            break
        idx = rng.choice(len(comps), size=batch, p=weights)
        u = rng.random(batch)
        t = wrap(lefts[idx] + u * lengths[idx])
        tp = wrap(t + cap * (2.0 * rng.random(batch) - 1.0))
        keep = region.contains(tp) & (circle_dist(t, tp) > 0)
        thetas.extend(t[keep].tolist())
        thetas_p.extend(tp[keep].tolist())
    if not thetas:
        return LipschitzReport(
            j=j, pair_count=0, max_slope=0.0, L_j_bound=bound,
            worst_pair=(math.nan, math.nan), pair_dists=np.empty(0),
            graph_dists=np.empty(0),
            note="no admissible pairs found in the sampling region")
    ts = np.array(thetas[:pair_budget])
    tps = np.array(thetas_p[:pair_budget])
    m = ts.size
    phi = np.empty(m)
    phi_p = np.empty(m)
    for i in range(0, m, 1 << 14):
        sl = slice(i, min(i + (1 << 14), m))
        phi[sl] = pullback_values(family, graph.direction, ts[sl],
                                  graph.pullback_depth, graph.seed_x)
        phi_p[sl] = pullback_values(family, graph.direction, tps[sl],
                                    graph.pullback_depth, graph.seed_x)
    d_theta = circle_dist(ts, tps)
    d_phi = circle_dist(phi, phi_p)
    slopes = d_phi / d_theta
    worst = int(np.argmax(slopes))
    note = "" if m >= pair_budget else \
        f"only {m} of {pair_budget} requested pairs were admissible"
    return LipschitzReport(
        j=j, pair_count=m, max_slope=float(slopes[worst]), L_j_bound=bound,
        worst_pair=(float(ts[worst]), float(tps[worst])),
        pair_dists=d_theta, graph_dists=d_phi, note=note)


def fraction_outside(graph: InvariantGraphSample,
                     arc: tuple[float, float]) -> float:
    """Grid fraction of angles whose graph value avoids the closed arc."""
    return float(1.0 - _in_arc(graph.phi, arc).mean())


# ---------------------------------------------------------------------------
# dimension estimators
# ---------------------------------------------------------------------------

class DimensionKind(Enum):
    POINTWISE = "pointwise"
    BOX = "box"


@dataclass(frozen=True)
class DimensionEstimate:
    scales: np.ndarray
    values: np.ndarray
    slope: float
    r2: float
    kind: DimensionKind
    notes: tuple[str, ...] = field(default=(GRAPH_CLOSURE_NOTE,))


def _ols_loglog(xvals: np.ndarray, yvals: np.ndarray):
    x = np.log(xvals)
    y = np.log(yvals)
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    if sxx == 0:
        raise ValueError("degenerate scale range for the fit")
    slope = float(((x - xm) * (y - ym)).sum()) / sxx
    syy = float(((y - ym) ** 2).sum())
    if syy == 0:
        return slope, 1.0
    resid = y - (ym + slope * (x - xm))
    return slope, 1.0 - float((resid ** 2).sum()) / syy


def ball_measure(graph: InvariantGraphSample, center: tuple[float, float],
                 eps: float) -> float:
    """Mass the graph measure assigns to the eps-ball around a point.

    The metric is max(base distance, fibre distance), so the ball's
    intersection with the graph projects to an angle set whose length is
    what the grid fraction converges to, at rate 1/N.
    """
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    c_theta, c_x = center
    hit = (circle_dist(graph.theta, c_theta) <= eps) \
        & (circle_dist(graph.phi, c_x) <= eps)
    return float(hit.mean())


def pointwise_dimension(graph: InvariantGraphSample,
                        centers: Sequence[tuple[float, float]],
                        eps_range: Sequence[float]) -> DimensionEstimate:
    """Average local scaling exponent of the graph measure.

    Per center, least squares of log ball mass against log radius over
    the scales whose mass clears the grid-noise floor of 16 samples; the
    slope and r2 reported are means over the centers that kept at least
    3 clean scales, and every dropped scale or center is named in the
    notes. Requested radii must span 2.5 decades or more, with the
    smallest at least 8 grid spacings, otherwise the regression says
    more about curvature and noise than about scaling. Measures of
    local exponent near 2 lose their small scales to the floor at any
    grid size (mass ~ eps^2 sinks below 16/N while eps is still coarse),
    which is why the clean-scale minimum stays this permissive.
    """
    eps = np.sort(np.asarray(eps_range, dtype=float))[::-1]
    if eps.size < 8:
        raise ValueError("need at least 8 scales")
    if eps[0] / eps[-1] < 10 ** 2.5:
        raise ValueError("scale range must span at least 2.5 decades")
    n = graph.grid_size
    if eps[-1] < 8.0 / n:
        raise ValueError(f"smallest scale below 8/N = {8.0 / n:.3g}")
    floor = 16.0 / n
    notes = [GRAPH_CLOSURE_NOTE]
    slopes = []
    r2s = []
    mean_vals = np.zeros(eps.size)
    for c in centers:
        vals = np.array([ball_measure(graph, c, e) for e in eps])
        mean_vals += vals
        keep = vals >= floor
        if keep.sum() < 3:
            notes.append(f"center ({c[0]:.4f},{c[1]:.4f}) dropped: "
                         "mass under the noise floor at most scales")
            continue
        if not keep.all():
            notes.append(f"center ({c[0]:.4f},{c[1]:.4f}): "
                         f"{int((~keep).sum())} scale(s) under noise floor")
        s, r = _ols_loglog(eps[keep], vals[keep])
        slopes.append(s)
        r2s.append(r)
    if not slopes:
        raise ValueError("no center had enough mass above the noise floor")
    return DimensionEstimate(
        scales=eps, values=mean_vals / len(centers),
        slope=float(np.mean(slopes)), r2=float(np.mean(r2s)),
        kind=DimensionKind.POINTWISE, notes=tuple(notes))


def box_dimension(theta: np.ndarray, x: np.ndarray,
                  scales: Sequence[float]) -> DimensionEstimate:
    """Box-counting slope for a point cloud on the torus.

    Counts occupied square boxes at each scale and fits log count
    against log(1/scale). Scales should be reciprocals of integers
    (powers of two in practice) so the box grid tiles the torus exactly.
    A scale with more boxes than points cannot saturate and is flagged,
    since its count is only a lower bound.
    """
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(x, dtype=float)
    if theta.size != x.size or theta.size == 0:
        raise ValueError("theta and x must be nonempty and equally long")
    eps = np.sort(np.asarray(scales, dtype=float))[::-1]
    if eps.size < 2 or eps[0] >= 1 or eps[-1] <= 0:
        raise ValueError("need at least two scales inside (0, 1)")
    notes = [GRAPH_CLOSURE_NOTE]
    counts = np.empty(eps.size)
    for i, e in enumerate(eps):
        m = int(round(1.0 / e))
        bi = np.minimum((np.mod(theta, 1.0) * m).astype(np.int64), m - 1)
        bj = np.minimum((np.mod(x, 1.0) * m).astype(np.int64), m - 1)
        counts[i] = np.unique(bi * m + bj).size
        if theta.size < m * m:
            notes.append(f"scale {e:g}: fewer points ({theta.size}) than "
                         f"boxes ({m * m}); count is a lower bound")
    slope, r2 = _ols_loglog(1.0 / eps, counts)
    return DimensionEstimate(scales=eps, values=counts, slope=slope,
                             r2=float(r2), kind=DimensionKind.BOX,
                             notes=tuple(notes))
