"""The qpf circle-map families: fibre maps, derivatives, inverses, lifts,
and the measured contraction/expansion geometry.

Every family here is a skew product (theta, x) -> (theta + omega, f_theta(x))
whose fibre maps are orientation-preserving circle diffeomorphisms. The
fibre maps share one additive structure: a theta-independent base map in x
plus a forcing shift V(theta) plus a parameter shift tau. That structure is
what makes the derivative in x theta-independent and the derivative in
theta equal to V'(theta) (up to the projective 1/pi scale).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .arcs import ArcSet
from .circle import Frequency, lift_half, wrap

__all__ = [
    "FamilyKind",
    "ForcingKind",
    "CircleMapFamily",
    "ContractionExpansionData",
    "saturating_primitive",
    "warp",
    "warp_deriv",
    "warp_lift",
    "estimate_constants",
]


# ---------------------------------------------------------------------------
# the saturating primitive  int_0^x dz / (1 + |z|^q)  and the warp map built
# from it
# ---------------------------------------------------------------------------

def _simpson(f, a, fa, m, fm, b, fb):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive_simpson(f, a, b, tol, depth=40):
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = _simpson(f, a, fa, m, fm, b, fb)
    return _adaptive_step(f, a, fa, m, fm, b, fb, whole, tol, depth)


def _adaptive_step(f, a, fa, m, fm, b, fb, whole, tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = _simpson(f, a, fa, lm, flm, m, fm)
    right = _simpson(f, m, fm, rm, frm, b, fb)
    err = left + right - whole
    if depth <= 0 or abs(err) <= 15.0 * tol:
        return left + right + err / 15.0
    half = 0.5 * tol
    return _adaptive_step(f, a, fa, lm, flm, m, fm, left, half, depth - 1) + \
        _adaptive_step(f, m, fm, rm, frm, b, fb, right, half, depth - 1)


def saturating_primitive(q: int, x: float) -> float:
    """Integral of 1/(1 + |z|^q) from 0 to x.

    Odd in x, bounded, strictly increasing. q = 2 is arctan in closed form;
    other q integrate adaptively (abs tol 1e-12), noticeably slower when
    called per-point in orbit loops.
    """
    if q < 2 or q != int(q):
        raise ValueError("q must be an integer >= 2")
    x = float(x)
    if q == 2:
        return math.atan(x)
    if x == 0.0:
        return 0.0
    if x < 0.0:
        return -saturating_primitive(q, -x)

    def f(z):
        return 1.0 / (1.0 + z**q)

    # unit segments keep the adaptive recursion shallow on long ranges
    total = 0.0
    nseg = max(1, math.ceil(x))
    seg_tol = 1e-12 / nseg
    a = 0.0
    while a < x:
        b = min(a + 1.0, x)
        total += _adaptive_simpson(f, a, b, seg_tol)
        a = b
    return total


def _saturating_primitive_arr(q: int, x: np.ndarray) -> np.ndarray:
    if q == 2:
        return np.arctan(x)
    flat = np.asarray(x, dtype=float).ravel()
    out = np.fromiter(
        (saturating_primitive(q, v) for v in flat), dtype=float, count=flat.size
    )
    return out.reshape(np.shape(x))


def warp(q: int, alpha: float, x):
    """The theta-free part of the arctan-type fibre map.

    Projection of a_q(alpha * xhat) / (2 a_q(alpha / 2)) with xhat the lift
    of x into (-1/2, 1/2]. Strictly increasing, fixes 0 and 1/2; expands
    near 0 and contracts near 1/2 once alpha is large.
    """
    norm = 2.0 * saturating_primitive(q, alpha / 2.0)
    xh = lift_half(x)
    return wrap(_saturating_primitive_arr(q, alpha * np.asarray(xh)) / norm)


def warp_deriv(q: int, alpha: float, x):
    norm = 2.0 * saturating_primitive(q, alpha / 2.0)
    xh = np.abs(lift_half(x))
    out = alpha / ((1.0 + (alpha * xh) ** q) * norm)
    if np.ndim(x) == 0:
        return float(out)
    return out


def warp_lift(q: int, alpha: float, xhat):
    """Continuous degree-one lift of warp: warp_lift(x+1) = warp_lift(x)+1."""
    norm = 2.0 * saturating_primitive(q, alpha / 2.0)
    xh = np.asarray(xhat, dtype=float)
    r = xh - np.ceil(xh - 0.5)  # in (-1/2, 1/2]
    n = xh - r
    out = n + _saturating_primitive_arr(q, alpha * r) / norm
    if np.ndim(xhat) == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

class FamilyKind(Enum):
    ARCTAN = "arctan"
    DRIVEN_ARNOLD = "driven_arnold"
    PROJECTIVE = "projective"
    RIGID = "rigid"


class ForcingKind(Enum):
    COSINE = "cosine"
    ARCTAN_SINE = "arctan_sine"
    NONE = "none"


_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CircleMapFamily:
    """One parameterized family of qpf circle diffeomorphisms.

    kind selects the fibre-map formula:
      ARCTAN         x -> warp(q, alpha, x) + V(theta) + tau
      DRIVEN_ARNOLD  x -> x + tau + alpha/(2 pi) sin(2 pi x) + V(theta),
                     invertible only for |alpha| <= 1
      PROJECTIVE     x -> angle(R_{V+tau} diag(alpha, 1/alpha) u(x)) / pi,
                     u(x) = (cos pi x, sin pi x)
      RIGID          x -> x + tau + V(theta)

    The forcing V is COSINE amplitude*cos(2 pi theta), ARCTAN_SINE
    arctan(amplitude*sin(2 pi theta))/pi, or NONE. All angle arguments and
    return values live in [0, 1); methods broadcast over numpy arrays.
    """

    kind: FamilyKind
    omega: Frequency
    tau: float = 0.0
    alpha: float = 1.0
    q: int = 2
    forcing: ForcingKind = ForcingKind.NONE
    amplitude: float = 1.0
    _norm: float = field(init=False, repr=False, compare=False, default=0.0)

    def __post_init__(self):
        object.__setattr__(self, "tau", wrap(float(self.tau)))
        if self.kind is FamilyKind.ARCTAN:
            if self.q < 2 or self.q != int(self.q):
                raise ValueError("ARCTAN needs an integer q >= 2")
            if self.alpha <= 0:
                raise ValueError("ARCTAN needs alpha > 0")
            norm = 2.0 * saturating_primitive(self.q, self.alpha / 2.0)
            object.__setattr__(self, "_norm", norm)
        elif self.kind is FamilyKind.DRIVEN_ARNOLD:
            if abs(self.alpha) > 1.0:
                raise ValueError(
                    "DRIVEN_ARNOLD with |alpha| > 1 is not invertible"
                )
        elif self.kind is FamilyKind.PROJECTIVE:
            if self.alpha <= 0:
                raise ValueError("PROJECTIVE needs alpha > 0")

    # -- forcing -----------------------------------------------------------

    def forcing_value(self, theta):
        if self.forcing is ForcingKind.COSINE:
            return self.amplitude * np.cos(_TWO_PI * np.asarray(theta, float))
        if self.forcing is ForcingKind.ARCTAN_SINE:
            s = np.sin(_TWO_PI * np.asarray(theta, float))
            return np.arctan(self.amplitude * s) / math.pi
        return np.zeros(np.shape(theta))

    def forcing_dtheta(self, theta):
        if self.forcing is ForcingKind.COSINE:
            return -_TWO_PI * self.amplitude * np.sin(
                _TWO_PI * np.asarray(theta, float)
            )
        if self.forcing is ForcingKind.ARCTAN_SINE:
            t = _TWO_PI * np.asarray(theta, float)
            s = np.sin(t)
            return 2.0 * self.amplitude * np.cos(t) / (
                1.0 + (self.amplitude * s) ** 2
            )
        return np.zeros(np.shape(theta))

    @property
    def shift_scale(self) -> float:
        """x-shift per unit of (V + tau): 1/pi for PROJECTIVE, else 1."""
        return 1.0 / math.pi if self.kind is FamilyKind.PROJECTIVE else 1.0

    def theta_derivative(self, theta):
        """d f_theta(x) / d theta; x-independent for every kind here."""
        return self.forcing_dtheta(theta) * self.shift_scale

    # -- fibre map, derivative, inverse, lift ------------------------------

    def fiber_map(self, theta, x):
        v = self.forcing_value(theta)
        k = self.kind
        if k is FamilyKind.RIGID:
            return wrap(np.asarray(x, float) + self.tau + v)
        if k is FamilyKind.ARCTAN:
            core = _saturating_primitive_arr(
                self.q, self.alpha * np.asarray(lift_half(x))
            ) / self._norm
            return wrap(core + v + self.tau)
        if k is FamilyKind.DRIVEN_ARNOLD:
            xa = np.asarray(x, float)
            return wrap(
                xa + self.tau + self.alpha / _TWO_PI * np.sin(_TWO_PI * xa) + v
            )
        # PROJECTIVE
        px = math.pi * np.asarray(x, float)
        psi = np.arctan2(np.sin(px) / self.alpha, self.alpha * np.cos(px))
        return wrap((psi + v + self.tau) / math.pi)

    def fiber_derivative(self, theta, x):
        # the x-derivative never depends on theta for these families, but
        # callers pass theta grids and expect the broadcast shape back
        k = self.kind
        if k is FamilyKind.RIGID:
            out = np.ones(np.shape(x))
        elif k is FamilyKind.ARCTAN:
            xh = np.abs(lift_half(x))
            out = self.alpha / ((1.0 + (self.alpha * xh) ** self.q) * self._norm)
        elif k is FamilyKind.DRIVEN_ARNOLD:
            out = 1.0 + self.alpha * np.cos(_TWO_PI * np.asarray(x, float))
        else:  # PROJECTIVE
            px = math.pi * np.asarray(x, float)
            out = 1.0 / (
                (self.alpha * np.cos(px)) ** 2 + (np.sin(px) / self.alpha) ** 2
            )
        shp = np.broadcast_shapes(np.shape(theta), np.shape(x))
        if np.shape(out) != shp:
            out = np.broadcast_to(out, shp).copy()
        if np.ndim(out) == 0:
            return float(out)
        return out

    def fiber_inverse(self, theta, y):
        """x with fiber_map(theta, x) = y, to better than 1e-12."""
        v = self.forcing_value(theta)
        k = self.kind
        if k is FamilyKind.RIGID:
            return wrap(np.asarray(y, float) - self.tau - v)
        if k is FamilyKind.ARCTAN and self.q == 2:
            z = lift_half(np.asarray(y, float) - v - self.tau)
            return wrap(np.tan(z * self._norm) / self.alpha)
        if k is FamilyKind.PROJECTIVE:
            psi = math.pi * np.asarray(y, float) - v - self.tau
            x = np.arctan2(self.alpha * np.sin(psi), np.cos(psi) / self.alpha)
            return wrap(x / math.pi)
        if k is FamilyKind.DRIVEN_ARNOLD:
            return self._arnold_inverse(np.asarray(y, float) - self.tau - v)
        return self._generic_inverse(theta, y)

    def _arnold_inverse(self, t):
        """Solve xhat + alpha/(2 pi) sin(2 pi xhat) = t; monotone for
        |alpha| <= 1. Bisection to width 1e-13, then 3 safeguarded Newton
        steps."""
        t = np.asarray(t, dtype=float)
        amp = abs(self.alpha) / _TWO_PI
        lo = t - amp
        hi = t + amp

        def g(u):
            return u + self.alpha / _TWO_PI * np.sin(_TWO_PI * u)

        for _ in range(46):
            mid = 0.5 * (lo + hi)
            below = g(mid) <= t
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        x = 0.5 * (lo + hi)
        for _ in range(3):
            d = 1.0 + self.alpha * np.cos(_TWO_PI * x)
            step = np.where(d > 1e-9, (g(x) - t) / np.where(d > 1e-9, d, 1.0), 0.0)
            x = np.clip(x - step, lo, hi)
        out = wrap(x)
        if np.ndim(t) == 0:
            return float(out)
        return out

    def _generic_inverse(self, theta, y):
        """Monotone-lift bisection fallback (used by ARCTAN with q != 2)."""
        theta = np.asarray(theta, dtype=float)
        y = np.asarray(y, dtype=float)
        shp = np.broadcast_shapes(theta.shape, y.shape)
        th = np.broadcast_to(theta, shp)
        t_frac = wrap(np.broadcast_to(y, shp) - self.fiber_map(th, np.zeros(shp)))
        target = self.fiber_lift(th, np.zeros(shp)) + t_frac
        lo = np.zeros(shp)
        hi = np.ones(shp)
        for _ in range(52):
            mid = 0.5 * (lo + hi)
            below = self.fiber_lift(th, mid) <= target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out = wrap(0.5 * (lo + hi))
        if np.ndim(y) == 0 and np.ndim(theta) == 0:
            return float(out)
        return out

    def fiber_lift(self, theta, xhat):
        """The continuous lift: degree one, projects onto fiber_map."""
        v = self.forcing_value(theta)
        xh = np.asarray(xhat, dtype=float)
        k = self.kind
        if k is FamilyKind.RIGID:
            out = xh + self.tau + v
        elif k is FamilyKind.ARCTAN:
            out = warp_lift(self.q, self.alpha, xh) + v + self.tau
        elif k is FamilyKind.DRIVEN_ARNOLD:
            out = xh + self.tau + self.alpha / _TWO_PI * np.sin(_TWO_PI * xh) + v
        else:  # PROJECTIVE
            psi = math.pi * xh
            kturn = np.ceil(psi / math.pi - 0.5)
            r = psi - kturn * math.pi  # in (-pi/2, pi/2]
            base = kturn * math.pi + np.arctan2(
                np.sin(r) / self.alpha, self.alpha * np.cos(r)
            )
            out = (base + v + self.tau) / math.pi
        if np.ndim(xhat) == 0 and np.ndim(theta) == 0:
            return float(out)
        return out


# ---------------------------------------------------------------------------
# measured contraction/expansion data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContractionExpansionData:
    """Geometry extracted from a derivative scan of one family member.

    C and E are ccw arcs (start, end); on E the x-derivative is at least
    alpha_bound, on C at most 1/alpha_bound, and alpha_bound also clears the
    global two-sided Lipschitz floor so alpha_bound^2 sandwiches every fibre
    map. I0 is the set of driving angles where the funnel condition
    (complement of the open E maps into the open C) fails.
    """

    split_found: bool
    reason: str
    C: tuple[float, float] | None
    E: tuple[float, float] | None
    alpha_bound: float
    S: float
    I0: ArcSet
    level: float
    sup_deriv: float
    inf_deriv: float
    sandwich_floor: float

    @property
    def E_length(self) -> float:
        if self.E is None:
            return 0.0
        return wrap(self.E[1] - self.E[0])

    @property
    def C_length(self) -> float:
        if self.C is None:
            return 0.0
        return wrap(self.C[1] - self.C[0])

    @property
    def n_components(self) -> int:
        return self.I0.n_components

    @property
    def max_component(self) -> float:
        widths = self.I0.widths()
        return max(widths) if widths else 0.0

    def C_mid(self) -> float:
        return wrap(self.C[0] + 0.5 * self.C_length)


def _mask_to_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Circular runs of True as (start, stop) index pairs, stop exclusive;
    a run crossing the end wraps (start > stop)."""
    n = mask.size
    if mask.all():
        return [(0, n)]
    if not mask.any():
        return []
    diff = np.diff(mask.astype(np.int8))
    starts = list((np.nonzero(diff == 1)[0] + 1))
    stops = list(np.nonzero(diff == -1)[0] + 1)
    if mask[0]:
        starts.insert(0, 0)
    if mask[-1]:
        stops.append(n)
    runs = list(zip(starts, stops))
    # join a run ending at n with one starting at 0
    if len(runs) >= 2 and runs[0][0] == 0 and runs[-1][1] == n:
        first = runs.pop(0)
        last = runs.pop()
        runs.append((last[0], first[1]))
    return runs


def _refine_edge(pred, inside_x: float, outside_x: float, tol: float) -> float:
    """Bisect the predicate boundary between a point where it holds and an
    adjacent one where it does not, taking the short way around the wrap.
    Returns a point on the pred-holding side, within tol of the boundary."""
    d = wrap(outside_x - inside_x)
    sign = 1.0
    if d > 0.5:
        sign = -1.0
        d = 1.0 - d
    lo, hi = 0.0, d
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(wrap(inside_x + sign * mid)):
            lo = mid
        else:
            hi = mid
    return wrap(inside_x + sign * lo)


def _extract_arc(xs, mask, pred, tol):
    """Largest circular run of the mask, refined to a (start, end) ccw arc."""
    runs = _mask_to_runs(mask)
    if not runs:
        return None
    n = xs.size

    def run_len(run):
        s, e = run
        return (e - s) % n if (e - s) % n else n

    s, e = max(runs, key=run_len)
    if run_len((s, e)) >= n:
        return (0.0, 1.0 - 1.0 / n)  # degenerate: everything qualifies
    first_in = xs[s]
    last_in = xs[(e - 1) % n]
    before = xs[(s - 1) % n]
    after = xs[e % n]
    start = _refine_edge(pred, first_in, before, tol)
    end = _refine_edge(pred, last_in, after, tol)
    return (start, end)


def estimate_constants(
    family: CircleMapFamily,
    theta_grid_size: int = 256,
    x_grid_size: int = 1024,
    level: float | None = None,
    refine_tol: float = 1e-8,
    scan_size: int | None = None,
) -> ContractionExpansionData:
    """Scan the x-derivative for a contraction arc C and an expansion arc E,
    measure the theta-Lipschitz constant, and extract the critical region I0
    where the funnel condition fails.

    level is the derivative threshold defining E (and 1/level defining C).
    Left unset it floats just above the largest of 5 and the global
    two-sided Lipschitz floor, which is the smallest value making the
    reported alpha_bound internally consistent. Pinning a higher level
    shrinks C and E and raises alpha_bound, which the scale hierarchy
    machinery needs (alpha_bound >= 256 keeps the step sequence growing
    from M0 = 2).
    """
    if theta_grid_size < 256 or x_grid_size < 256:
        raise ValueError("need at least 256 grid points per axis")

    thetas = np.arange(theta_grid_size) / theta_grid_size
    xs = np.arange(x_grid_size) / x_grid_size
    deriv = family.fiber_derivative(thetas[:, None], xs[None, :])
    deriv = np.broadcast_to(deriv, (theta_grid_size, x_grid_size))
    dmin = deriv.min(axis=0)
    dmax = deriv.max(axis=0)
    sup_d = float(dmax.max())
    inf_d = float(dmin.min())
    if inf_d <= 0:
        return ContractionExpansionData(
            False, "fibre derivative not positive on the grid",
            None, None, float("nan"), float("nan"), ArcSet.empty(),
            float("nan"), sup_d, inf_d, float("nan"),
        )

    floor = max(math.sqrt(sup_d), 1.0 / math.sqrt(inf_d))
    if level is None:
        lvl = 1.02 * max(5.0, floor)
    else:
        lvl = float(level)

    S = float(np.max(np.abs(family.theta_derivative(thetas))))

    e_mask = dmin >= lvl
    c_mask = dmax <= 1.0 / lvl
    no_e = not e_mask.any()
    no_c = not c_mask.any()
    if no_e or no_c:
        missing = "expansion" if no_e else "contraction"
        if no_e and no_c:
            missing = "contraction/expansion"
        return ContractionExpansionData(
            False, f"no {missing} split at level {lvl:.3g}",
            None, None, float("nan"), S, ArcSet.empty(),
            lvl, sup_d, inf_d, floor,
        )

    def e_pred(x):
        return bool(np.min(family.fiber_derivative(thetas, x)) >= lvl)

    def c_pred(x):
        return bool(np.max(family.fiber_derivative(thetas, x)) <= 1.0 / lvl)

    E = _extract_arc(xs, e_mask, e_pred, refine_tol)
    C = _extract_arc(xs, c_mask, c_pred, refine_tol)
    if E is None or C is None:
        return ContractionExpansionData(
            False, f"no contraction/expansion split at level {lvl:.3g}",
            None, None, float("nan"), S, ArcSet.empty(),
            lvl, sup_d, inf_d, floor,
        )
    if ArcSet.from_pairs([E]).intersect(ArcSet.from_pairs([C])).measure() > 0:
        return ContractionExpansionData(
            False, "extracted C and E overlap",
            C, E, float("nan"), S, ArcSet.empty(), lvl, sup_d, inf_d, floor,
        )

    # measured bound: worst derivative over dense samples of each arc
    def arc_samples(arc, k=4096):
        start, end = arc
        length = wrap(end - start)
        return wrap(start + np.linspace(0.0, length, k))

    alpha_e = float(np.min(family.fiber_derivative(thetas[:, None],
                                                   arc_samples(E)[None, :])))
    alpha_c = float(np.max(family.fiber_derivative(thetas[:, None],
                                                   arc_samples(C)[None, :])))
    alpha_bound = min(alpha_e, 1.0 / alpha_c)
    if alpha_bound < floor:
        return ContractionExpansionData(
            False,
            f"alpha_bound {alpha_bound:.3g} below the global Lipschitz "
            f"floor {floor:.3g}; raise the level",
            C, E, alpha_bound, S, ArcSet.empty(), lvl, sup_d, inf_d, floor,
        )
    if alpha_bound <= 4.0:
        return ContractionExpansionData(
            False, f"alpha_bound {alpha_bound:.3g} does not exceed 4",
            C, E, alpha_bound, S, ArcSet.empty(), lvl, sup_d, inf_d, floor,
        )

    # critical region: angles where the closed complement of int(E) does not
    # land inside the open C
    n_scan = scan_size or max(theta_grid_size, 1 << 16)
    th_f = np.arange(n_scan) / n_scan
    e_minus, e_plus = E
    c_lo, c_hi = C
    c_len = wrap(c_hi - c_lo)

    def contained_mask(th):
        y1 = family.fiber_map(th, e_plus)
        y2 = family.fiber_map(th, e_minus)
        rel = np.mod(np.asarray(y1) - c_lo, 1.0)
        img_len = np.mod(np.asarray(y2) - np.asarray(y1), 1.0)
        return (rel > 0.0) & (rel + img_len < c_len)

    ok = contained_mask(th_f)
    bad_runs = _mask_to_runs(~ok)
    step = 1.0 / n_scan

    def ok_scalar(th):
        return bool(contained_mask(np.asarray(th)))

    pairs = []
    for s, e in bad_runs:
        first_bad = th_f[s]
        last_bad = th_f[(e - 1) % n_scan]
        left = _refine_edge(lambda t: not ok_scalar(t), first_bad,
                            wrap(first_bad - step), refine_tol)
        right = _refine_edge(lambda t: not ok_scalar(t), last_bad,
                             wrap(last_bad + step), refine_tol)
        pairs.append((left, right))
    i0 = ArcSet.from_pairs(pairs).merge_gaps(2.0 * step) if pairs else ArcSet.empty()

    return ContractionExpansionData(
        True, "", C, E, alpha_bound, S, i0, lvl, sup_d, inf_d, floor,
    )
