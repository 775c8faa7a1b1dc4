"""Continued fractions and rational-approximation margins for the driving
frequency.

The recurrence structure of an irrational rotation is governed by how
slowly d(n*omega, 0) decays; everything here measures that decay exactly.
Frequencies arrive either as Frequency objects (whose 120-bit fixed-point
value is itself an exact rational, the one the dynamics actually use) or
as rationals/decimals/floats, which are kept as exact Fractions so that a
rational input really produces a zero margin at its denominator.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .circle import _ONE, Frequency

__all__ = [
    "DiophantineReport",
    "continued_fraction",
    "convergents",
    "check_diophantine",
]

_RATIONAL_CUTOFF = Fraction(1, 10**15)


def _as_exact(omega) -> Fraction:
    if isinstance(omega, Frequency):
        return Fraction(omega.bits, _ONE)
    if isinstance(omega, Fraction):
        return omega % 1
    if isinstance(omega, str):
        tok = omega.strip().lower()
        if tok in ("golden", "silver"):
            return Fraction(Frequency.parse(tok).bits, _ONE)
        return Fraction(tok) % 1  # handles "2/7" and "0.25" exactly
    return Fraction(float(omega)) % 1


def continued_fraction(omega, depth: int) -> list[int]:
    """First `depth` partial quotients of omega in [0, 1).

    omega = 1/(a1 + 1/(a2 + ...)). A returned list shorter than `depth`
    means a remainder fell below 1e-15 and the expansion was cut: the
    frequency is rational to working precision.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    rem = _as_exact(omega)
    quotients: list[int] = []
    for _ in range(depth):
        if rem < _RATIONAL_CUTOFF:
            break
        inv = 1 / rem
        a = int(inv)
        quotients.append(a)
        rem = inv - a
    return quotients


def convergents(quotients: list[int]) -> list[tuple[int, int]]:
    """(p, q) convergents of [0; a1, a2, ...] from its partial quotients."""
    out = []
    p_prev, p_cur = 1, 0  # p_{-1}, p_0 for the leading zero quotient
    q_prev, q_cur = 0, 1
    for a in quotients:
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        out.append((p_cur, q_cur))
    return out


@dataclass(frozen=True)
class DiophantineReport:
    """Worst rational-approximation margin |n|^nu * d(n omega, 0) on a
    finite horizon. The condition d(n omega, 0) > gamma |n|^-nu holds for
    all 0 < |n| <= n_max exactly when worst_margin > gamma."""

    gamma: float
    nu: float
    n_max: int
    worst_n: int
    worst_margin: float

    @property
    def holds(self) -> bool:
        return self.worst_margin > self.gamma


def check_diophantine(omega, gamma: float, nu: float,
                      n_max: int) -> DiophantineReport:
    """Scan the approximation margin up to n_max.

    Only convergent denominators are visited: n*d(n omega, 0) attains its
    running minima there, so the worst margin over all n <= n_max is the
    worst margin over denominators q_k <= n_max. d(n omega, 0) is symmetric
    in n, so positive n cover negative ones.
    """
    if gamma <= 0 or nu <= 0:
        raise ValueError("gamma and nu must be positive")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    w = _as_exact(omega)
    # enough quotients to push denominators past any sane horizon; the
    # slowest growth (golden mean) reaches 10^9 within 45 terms
    quots = continued_fraction(w, 64)
    denoms = [q for _, q in convergents(quots)]
    candidates = sorted({1, *[q for q in denoms if q <= n_max]})
    worst_n = 1
    worst_margin = float("inf")
    for n in candidates:
        frac = (n * w) % 1
        dist = min(frac, 1 - frac)
        margin = float(n) ** nu * float(dist)
        if margin < worst_margin:
            worst_margin = margin
            worst_n = n
    return DiophantineReport(gamma, nu, n_max, worst_n, worst_margin)
