"""The nested critical-region recursion and its combinatorial checks.

A level-n critical region is the set of driving angles whose orbit window
of length 2 M_n carries the contraction arc C across the expansion arc E.
Each deeper level is computed from the previous one by endpoint tracking:
the image of an arc under an orientation-preserving fibre map is the arc
between the endpoint images, which is unambiguous as long as no
intermediate image grows past half the circle (guarded explicitly).

The separation checks (no early returns, no window collisions, component
sizes under the scale budget) are pure ArcSet algebra on rotated copies,
so they inherit the exact endpoint-copy semantics of ArcSet: an empty
intersection really is empty, not empty-up-to-tolerance.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .arcs import ArcSet
from .circle import Frequency, wrap
from .families import CircleMapFamily, ContractionExpansionData

__all__ = [
    "WrapAmbiguity",
    "RetentionSequence",
    "retention_sequence",
    "ScaleHierarchy",
    "critical_step",
    "check_return_separation",
    "check_window_separation",
    "check_component_sizes",
    "ComponentCheck",
    "forward_windows",
    "backward_windows",
    "entry_windows",
    "StablePhaseSet",
    "stable_phase_set",
    "BudgetReport",
    "measure_budget",
]

B_THRESHOLD = math.sqrt(5.0 / 6.0)


class WrapAmbiguity(RuntimeError):
    """An arc image exceeded half the circle during endpoint tracking, so
    its orientation can no longer be inferred from the endpoints. Raising
    the expansion level (shrinking C and E) is the usual cure."""


# ---------------------------------------------------------------------------
# retention sequence b_n and the scale hierarchy container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RetentionSequence:
    """b_0 = 1, b_n = (1 - 1/(K0 kappa^{n-1})) b_{n-1}, with a lower bound
    for the infinite product limit. The limit must stay above sqrt(5/6) for
    the visit-counting estimates downstream to retain enough mass."""

    values: list[float]
    limit: float

    @property
    def above_threshold(self) -> bool:
        return self.limit > B_THRESHOLD


def retention_sequence(K0: int, kappa: int, n: int) -> RetentionSequence:
    if K0 < 2 or kappa < 2:
        raise ValueError("need K0 >= 2 and kappa >= 2")
    if n < 0:
        raise ValueError("n must be non-negative")
    values = [1.0]
    for j in range(n):
        values.append(values[-1] * (1.0 - 1.0 / (K0 * kappa**j)))
    # continue the product until the factor rounds to 1, then knock off a
    # conservative tail so the result is a true lower bound
    limit = values[-1]
    j = n
    while True:
        factor = 1.0 - 1.0 / (K0 * kappa**j)
        if factor == 1.0:
            break
        limit *= factor
        j += 1
    limit *= 1.0 - 2.0 / (K0 * kappa**j)
    return RetentionSequence(values, limit)


class ScaleHierarchy:
    """Step lengths, size budgets, and the computed critical regions.

    M and eps must have n_max+1 entries each (levels 0..n_max); levels
    holds the critical regions as they are computed, always a prefix of
    0..n_max. alpha is the family's measured expansion bound, which the
    step and size recursions are checked against at construction:
    M_{n+1} <= 2 alpha^{M_n/16} and eps_{n+1} <= 2 alpha^{-M_n/4}/s.
    """

    __slots__ = ("K0", "kappa", "M", "eps", "s", "alpha", "b_seq",
                 "levels", "n_max", "n_components")

    def __init__(self, K0, kappa, M, eps, s, alpha, level0: ArcSet):
        if len(M) != len(eps) or not M:
            raise ValueError("M and eps must have equal positive length")
        if M[0] < 2:
            raise ValueError("M[0] must be at least 2")
        if eps[0] > 1.0:
            raise ValueError("eps[0] must be at most 1")
        if s <= 0:
            raise ValueError("s must be positive")
        if any(b < a for a, b in zip(M, M[1:])):
            raise ValueError("M must be non-decreasing")
        if any(b > a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps must be non-increasing")
        for i in range(len(M) - 1):
            cap_m = 2.0 * alpha ** (M[i] / 16.0)
            if M[i + 1] > cap_m:
                raise ValueError(
                    f"M[{i + 1}] = {M[i + 1]} exceeds the step cap "
                    f"2 alpha^(M[{i}]/16) = {cap_m:.6g}")
            cap_e = 2.0 * alpha ** (-M[i] / 4.0) / s
            if eps[i + 1] > cap_e:
                raise ValueError(
                    f"eps[{i + 1}] = {eps[i + 1]:g} exceeds the size cap "
                    f"2 alpha^(-M[{i}]/4)/s = {cap_e:.6g}")
        bs = retention_sequence(K0, kappa, len(M))
        if not bs.above_threshold:
            raise ValueError(
                f"retention limit {bs.limit:.6f} is not above "
                f"sqrt(5/6) = {B_THRESHOLD:.6f}; raise K0 or kappa")
        self.K0 = int(K0)
        self.kappa = int(kappa)
        self.M = list(M)
        self.eps = [float(e) for e in eps]
        self.s = float(s)
        self.alpha = float(alpha)
        self.b_seq = bs.values
        self.levels = [level0]
        self.n_max = len(M) - 1
        self.n_components = level0.n_components

    def K(self, n: int) -> int:
        return self.K0 * self.kappa**n

    @property
    def b_limit(self) -> float:
        return retention_sequence(self.K0, self.kappa, self.n_max).limit

    def append_level(self, arcs: ArcSet) -> None:
        if len(self.levels) > self.n_max:
            raise ValueError("hierarchy already holds all planned levels")
        if not arcs.subset_of(self.levels[-1]):
            raise ValueError("new level is not contained in the previous one")
        self.levels.append(arcs)

    def level(self, n: int) -> ArcSet:
        return self.levels[n]


# ---------------------------------------------------------------------------
# the critical-region recursion
# ---------------------------------------------------------------------------

def _track_arc(family: CircleMapFamily, theta: np.ndarray,
               lo: float, hi: float, steps: int, inverse: bool):
    """Endpoint-track the ccw arc [lo, hi] along `steps` fibre steps.

    Forward: apply f at base angles theta, theta+w, ... Backward
    (inverse=True): apply fibre inverses at theta+(steps-1)w, ..., theta,
    i.e. pull the arc back to the fiber over theta. Returns the two
    endpoint arrays; raises WrapAmbiguity if any intermediate arc length
    exceeds 1/2.
    """
    om = family.omega
    a = np.full(theta.shape, lo)
    b = np.full(theta.shape, hi)
    for k in range(steps):
        if inverse:
            ang = wrap(theta + om.multiple(steps - 1 - k))
            a = family.fiber_inverse(ang, a)
            b = family.fiber_inverse(ang, b)
        else:
            ang = wrap(theta + om.multiple(k))
            a = family.fiber_map(ang, a)
            b = family.fiber_map(ang, b)
        length = np.mod(b - a, 1.0)
        if np.any(length > 0.5):
            i = int(np.argmax(length > 0.5))
            raise WrapAmbiguity(
                f"arc image reached length {float(length.flat[i]):.3f} > 1/2 "
                f"at step {k + 1}/{steps} (theta sample "
                f"{float(np.asarray(theta).flat[i]):.6f})")
    return a, b


def _arcs_overlap(a1, a2, b1, b2):
    """Closed overlap test for ccw arcs [a1, a2] and [b1, b2] (arrays)."""
    la = np.mod(a2 - a1, 1.0)
    lb = np.mod(b2 - b1, 1.0)
    return (np.mod(b1 - a1, 1.0) <= la) | (np.mod(a1 - b1, 1.0) <= lb)


def _membership_chunk(family: CircleMapFamily, c_arc: tuple[float, float],
                      e_arc: tuple[float, float], back_shift: float, m: int,
                      theta: np.ndarray) -> np.ndarray:
    """Elementwise membership predicate for one chunk of driving angles."""
    start = wrap(theta + back_shift)
    f_a, f_b = _track_arc(family, start, c_arc[0], c_arc[1], m - 1,
                          inverse=False)
    g_a, g_b = _track_arc(family, theta, e_arc[0], e_arc[1], m + 1,
                          inverse=True)
    return _arcs_overlap(f_a, f_b, g_a, g_b)


_SAMPLE_TILE = 1 << 15


def critical_step(family: CircleMapFamily, data: ContractionExpansionData,
                  hierarchy: ScaleHierarchy, n: int,
                  samples: int = 1 << 14, refine_tol: float = 1e-8,
                  workers: int = 1) -> ArcSet:
    """Compute level n+1 of the critical-region recursion.

    A driving angle theta in level n qualifies if the forward image of C
    over the window starting at theta-(M_n-1)w meets the preimage of E
    pulled back from theta+(M_n+1)w; both are tracked as endpoint pairs.
    Membership is sampled inside each component of level n, boundaries are
    refined by bisection, and gaps shorter than two sampling steps are
    closed before taking the interior.

    With workers > 1 the membership sampling splits over fixed-size tiles
    of the sample grid; edge refinement and arc assembly stay sequential,
    so the result is identical for any worker count.
    """
    if n >= hierarchy.n_max:
        raise ValueError(f"level {n + 1} is beyond n_max = {hierarchy.n_max}")
    if len(hierarchy.levels) <= n:
        raise ValueError(f"hierarchy does not hold level {n} yet")
    level_n = hierarchy.levels[n]
    if not level_n:
        return ArcSet.empty()
    m = hierarchy.M[n]
    om = family.omega
    back_shift = om.multiple(-(m - 1))

    def member_mask(theta: np.ndarray) -> np.ndarray:
        return _membership_chunk(family, data.C, data.E, back_shift, m, theta)

    def member_mask_tiled(theta: np.ndarray, pool) -> np.ndarray:
        if pool is None or theta.size <= _SAMPLE_TILE:
            return member_mask(theta)
        futs = [pool.submit(_membership_chunk, family, data.C, data.E,
                            back_shift, m, theta[a:a + _SAMPLE_TILE])
                for a in range(0, theta.size, _SAMPLE_TILE)]
        return np.concatenate([f.result() for f in futs])

    def member_scalar(theta: float) -> bool:
        return bool(member_mask(np.asarray([theta]))[0])

    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        return _assemble_level(level_n, samples, refine_tol, member_mask_tiled,
                               member_scalar, pool)
    finally:
        if pool is not None:
            pool.shutdown()


def _assemble_level(level_n: ArcSet, samples: int, refine_tol: float,
                    member_mask_tiled, member_scalar, pool) -> ArcSet:
    total_len = level_n.measure()
    pieces = []
    for left, length in level_n.arcs:
        k = max(64, int(round(samples * length / total_len)))
        step = length / k
        local = wrap(left + (np.arange(k) + 0.5) * step)
        mask = member_mask_tiled(local, pool)
        if not mask.any():
            continue
        # runs of consecutive hits (no circular wrap inside one component)
        idx = np.nonzero(mask)[0]
        breaks = np.nonzero(np.diff(idx) > 1)[0]
        run_starts = np.concatenate(([0], breaks + 1))
        run_stops = np.concatenate((breaks, [idx.size - 1]))
        runs = [(int(idx[s]), int(idx[e])) for s, e in
                zip(run_starts, run_stops)]
        # close gaps shorter than two sampling steps
        merged = [runs[0]]
        for s, e in runs[1:]:
            if s - merged[-1][1] <= 2:
                merged[-1] = (merged[-1][0], e)
            else:
                merged.append((s, e))
        for s, e in merged:
            a = _bisect_edge(member_scalar, float(local[s]),
                             wrap(left) if s == 0 else float(local[s - 1]),
                             refine_tol)
            b = _bisect_edge(member_scalar, float(local[e]),
                             wrap(left + length) if e == k - 1
                             else float(local[e + 1]),
                             refine_tol)
            if wrap(b - a) > refine_tol:
                pieces.append((a, b))
    return ArcSet.from_pairs(pieces).intersect(level_n)


def _bisect_edge(pred, inside: float, outside: float, tol: float) -> float:
    """Refine the boundary between a sample where pred holds and a nearby
    point where it does not (or the component edge). Works along the short
    way around; returns a point on the holding side."""
    d = wrap(outside - inside)
    sign = 1.0
    if d > 0.5:
        sign = -1.0
        d = 1.0 - d
    if d <= tol:
        return wrap(outside)
    lo, hi = 0.0, d
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(wrap(inside + sign * mid)):
            lo = mid
        else:
            hi = mid
    return wrap(inside + sign * lo)


# ---------------------------------------------------------------------------
# separation and size checks
# ---------------------------------------------------------------------------

def check_return_separation(hierarchy: ScaleHierarchy, omega: Frequency,
                            n: int):
    """Every level j <= n must avoid its first 2 K_j M_j rotated copies.
    Returns (ok, first violating (j, k) or None)."""
    for j in range(n + 1):
        lev = hierarchy.levels[j]
        if not lev:
            continue
        horizon = 2 * hierarchy.K(j) * hierarchy.M[j]
        for k in range(1, horizon + 1):
            if lev.intersect(lev.translate(omega.multiple(k))):
                return False, (j, k)
    return True, None


def forward_windows(hierarchy: ScaleHierarchy, omega: Frequency,
                    n: int) -> ArcSet:
    """Union of levels 0..n pushed forward by 1..M_j+1 rotation steps."""
    out = ArcSet.empty()
    for j in range(n + 1):
        lev = hierarchy.levels[j]
        for l in range(1, hierarchy.M[j] + 2):
            out = out.union(lev.translate(omega.multiple(l)))
    return out


def backward_windows(hierarchy: ScaleHierarchy, omega: Frequency,
                     n: int) -> ArcSet:
    """Union of levels 0..n pulled back by 0..M_j-1 rotation steps."""
    out = ArcSet.empty()
    for j in range(n + 1):
        lev = hierarchy.levels[j]
        for l in range(-(hierarchy.M[j] - 1), 1):
            out = out.union(lev.translate(omega.multiple(l)))
    return out


def entry_windows(hierarchy: ScaleHierarchy, omega: Frequency,
                  n: int) -> ArcSet:
    """Union of levels 0..n pulled back by 0..M_j-2 rotation steps; the
    angles from which an orbit is inside a critical window or about to
    enter one."""
    out = ArcSet.empty()
    for j in range(n + 1):
        lev = hierarchy.levels[j]
        for l in range(-(hierarchy.M[j] - 2), 1):
            out = out.union(lev.translate(omega.multiple(l)))
    return out


def check_window_separation(hierarchy: ScaleHierarchy, omega: Frequency,
                            n: int):
    """Each level j <= n, shifted to the ends of its own orbit window, must
    avoid every shallower level's windows. Returns (ok, first violating j
    or None). Level 0 is vacuous: there are no shallower windows."""
    for j in range(1, n + 1):
        lev = hierarchy.levels[j]
        if not lev:
            continue
        m = hierarchy.M[j]
        ends = lev.translate(omega.multiple(-(m - 1))).union(
            lev.translate(omega.multiple(m + 1)))
        w = forward_windows(hierarchy, omega, j - 1).union(
            backward_windows(hierarchy, omega, j - 1))
        if ends.intersect(w):
            return False, j
    return True, None


@dataclass(frozen=True)
class ComponentCheck:
    ok: bool
    count: int
    expected: int
    widths: list[float]
    eps_n: float


def check_component_sizes(hierarchy: ScaleHierarchy, n: int) -> ComponentCheck:
    """Level n must consist of exactly as many components as level 0, each
    shorter than eps_n."""
    lev = hierarchy.levels[n]
    widths = lev.widths()
    ok = (lev.n_components == hierarchy.n_components
          and all(w < hierarchy.eps[n] for w in widths))
    return ComponentCheck(ok, lev.n_components, hierarchy.n_components,
                          widths, hierarchy.eps[n])


# ---------------------------------------------------------------------------
# stable driving angles and the measure budget
# ---------------------------------------------------------------------------

def _eps_tail(hierarchy: ScaleHierarchy) -> float:
    """Upper bound on sum of sqrt(eps_k) for the levels beyond n_max,
    extrapolated through the recursion caps."""
    alpha, s = hierarchy.alpha, hierarchy.s
    m = float(hierarchy.M[-1])
    total = 0.0
    for _ in range(64):
        eps_next = 2.0 * alpha ** (-m / 4.0) / s
        root = math.sqrt(eps_next)
        total += root
        if root < 1e-30:
            break
        m = min(2.0 * alpha ** (m / 16.0), 1e18)
    return total


@dataclass(frozen=True)
class StablePhaseSet:
    """Complement of all rotated critical windows from level j up to the
    truncation, with the analytic measure bound that survives the missing
    tail."""

    arcs: ArcSet
    j: int
    n_max: int
    leb_lower_bound: float
    tail_bound: float

    @property
    def measured(self) -> float:
        return self.arcs.measure()

    @property
    def valid(self) -> bool:
        return self.leb_lower_bound > 0.0


def stable_phase_set(hierarchy: ScaleHierarchy, omega: Frequency, j: int,
                     n_max: int | None = None) -> StablePhaseSet:
    if j < 1:
        raise ValueError("j must be at least 1")
    if n_max is None:
        n_max = len(hierarchy.levels) - 1
    ls: list[float] = []
    rs: list[float] = []
    for k in range(j, n_max + 1):
        lev = hierarchy.levels[k]
        if not lev:
            continue
        horizon = 2 * hierarchy.K(k) * hierarchy.M[k]
        for l in range(horizon + 1):
            t = lev.translate(omega.multiple(l))
            ls.extend(t.ls)
            rs.extend(t.rs)
    covered = ArcSet(ls, rs)
    bound = 1.0
    for k in range(j, n_max + 1):
        bound -= ((2 * hierarchy.K(k) * hierarchy.M[k] + 1)
                  * hierarchy.n_components * hierarchy.eps[k])
    bound -= _eps_tail(hierarchy)
    return StablePhaseSet(covered.complement(), j, n_max, bound,
                          _eps_tail(hierarchy))


@dataclass(frozen=True)
class BudgetReport:
    total: float
    terms: list[float]
    term_ok: list[bool]

    @property
    def ok(self) -> bool:
        return self.total < 1.0 / 16.0 and all(self.term_ok)


def measure_budget(hierarchy: ScaleHierarchy,
                   n_max: int | None = None) -> BudgetReport:
    """Sum of (M_n+1)*N*eps_n over levels, each term capped by sqrt(eps_n),
    total capped by 1/16."""
    if n_max is None:
        n_max = hierarchy.n_max
    terms = []
    term_ok = []
    nc = max(hierarchy.n_components, 1)
    for k in range(n_max + 1):
        t = (hierarchy.M[k] + 1) * nc * hierarchy.eps[k]
        terms.append(t)
        term_ok.append(t <= math.sqrt(hierarchy.eps[k]))
    return BudgetReport(float(sum(terms)), terms, term_ok)
